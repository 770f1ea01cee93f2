#!/usr/bin/env python
"""
Concentration bounds for Poisson U-statistics

Usage:
    ustatconc -h|--help
    ustatconc --version
    ustatconc enumerate [--debug|--info] [--format=<fmt>] [--csv=<path>]
        [--k=<int>] [--cap=<int>] --m=<int> --ell=<int>
    ustatconc moments [--debug|--info] [--exact|--bound] [--gamma=<float>]
        [--regime=<str>] [--corollary] --model=<path> --ell=<int>
    ustatconc bound [--debug|--info] [--method=<str>] [--tail=<str>]
        [--c43=<float>] [--c47=<float>]
        [--not-centred] --model=<path> --gamma=<float> --t=<float>
    ustatconc preset [--debug|--info] [--out=<path>] [--kappa=<float>]
        [--d=<int>] [--radius=<float>] [--rho=<float>] [--delta=<float>]
        [--gamma=<float>] [--tau=<float>] [--s=<float>] [--graph=<str>]
        [--m=<int>] [--i=<int>] [--nu=<list>] <app>
    ustatconc simulate [--debug|--info] [--seed=<int>] [--threads=<int>]
        [--replications=<int>] [--format=<fmt>] [--csv=<path>]
        [--dump=<path>] [--dump-count=<int>] --scenario=<path>
    ustatconc verify [--debug|--info] [--seed=<int>] [--threads=<int>]
        [--replications=<int>] [--out=<path>] [--csv=<path>]
        [--moments=<list>] --scenario=<path>

Commands:
    enumerate           Enumerate the subpartitions indexing centred moments
    moments             Print an exact centred moment or its upper bounds
    bound               Evaluate a tail bound for a model
    preset              Print a model for a geometric application
                        {subgraph, poweredge, eucl-hyperplane, hyp-hyperplane}
    simulate            Print Monte Carlo tail estimates of a scenario
    verify              Check tail bounds against Monte Carlo estimates

Options:
    -h, --help          Print help and exit
    --version           Print version and exit
    --debug, --info     Execute a command with debug|info messages
    --format=<fmt>      Specify the output format {json, csv} [default: json]
    --csv=<path>        Write data with CSV into a file
    --m=<int>           Specify the kernel order
    --ell=<int>         Specify the moment order
    --k=<int>           Restrict to a completed-partition size
    --cap=<int>         Specify the enumeration cap [default: 16]
    --model=<path>      Specify a model JSON file
    --exact             Print the exact centred moment (constant kernels)
    --bound             Print the centred moment upper bounds
    --gamma=<float>     Specify the intensity [default: 1]
    --regime=<str>      Specify the moment-bound regime
                        {general, high-intensity} [default: general]
    --corollary         Use the moment bound without the beta0 factor
    --method=<str>      Specify the bound method [default: main]
                        {main, unified, largeorder, largeorder_lower, wu, cc,
                        clt, bp, moment}
    --tail=<str>        Specify the tail {two, upper, lower} [default: two]
    --c43=<float>       Specify the Chebyshev-Cantelli range [default: 1]
    --c47=<float>       Specify the variance-window constant [default: 1]
    --not-centred       Use the non-centred large-order bound
    --t=<float>         Specify the deviation (s for the clt method)
    --out=<path>        Write JSON into a file
    --kappa=<float>     Specify the sectional curvature [default: 0]
    --d=<int>           Specify the dimension [default: 2]
    --radius=<float>    Specify the ball window radius [default: 1]
    --rho=<float>       Specify the connection radius
    --delta=<float>     Choose rho by the expected degree delta at --gamma
    --tau=<float>       Specify the edge length power [default: 0]
    --s=<float>         Specify the interpolation exponent s [default: 0]
    --graph=<str>       Specify the subgraph
                        {edge, path3, triangle, star3, cycle4} [default: edge]
    --i=<int>           Specify the intrinsic volume index [default: 0]
    --nu=<list>         Specify comma-separated intrinsic volumes nu_0..nu_d
                        (default: those of the unit ball)
    --seed=<int>        Override the scenario seed
    --threads=<int>     Cap the number of worker threads
    --replications=<int>
                        Override the scenario replications
    --dump=<path>       Write sampled points with CSV into a file
    --dump-count=<int>  Specify the number of dumped replicates [default: 10]
    --moments=<list>    Run the moment check for comma-separated orders

Arguments:
    <app>               Application name
"""

import dataclasses
import logging
import os

from docopt import docopt

from . import __version__
from .applications import (GraphFunctionalSpec, WindowSpec,
                           ball_intrinsic_volumes, euclidean_hyperplane_model,
                           fixed_degree_radius, hyperbolic_model,
                           power_edge_model, subgraph_model)
from .bounds import evaluate, largeorder_lower_detail
from .combinat import enumerate_records, star2_table
from .experiments import TailExperiment, read_scenario
from .geometry import (SpaceSpec, dump_samples, sample_hyperbolic_chords,
                       sample_ppp_ball)
from .model import A2Params, model_to_dict, read_model
from .moments import (centred_moment_constant_kernel, centred_moment_upper,
                      moment_chain_bounds)
from .util import (PreconditionError, print_df, print_json, set_log_config,
                   to_jsonable, write_json)


def main(argv=None):
    args = docopt(__doc__, argv=argv, version=f'ustatconc {__version__}')
    set_log_config(debug=args['--debug'], info=args['--info'])
    logger = logging.getLogger(__name__)
    logger.debug(f'args:{os.linesep}{args}')
    try:
        if args['enumerate']:
            return _enumerate(args=args)
        elif args['moments']:
            return _moments(args=args)
        elif args['bound']:
            return _bound(args=args)
        elif args['preset']:
            return _preset(args=args)
        elif args['simulate']:
            return _simulate(args=args)
        elif args['verify']:
            return _verify(args=args)
        else:
            return 0
    except PreconditionError as e:
        logger.warning(f'precondition not met: {e}')
        print_json({'version': __version__, 'error': 'precondition',
                    'reason': str(e)})
        return 2
    except Exception as e:
        logger.error(f'{type(e).__name__}: {e}')
        return 1


def _enumerate(args):
    df = enumerate_records(
        m=int(args['--m']), ell=int(args['--ell']),
        k=(int(args['--k']) if args['--k'] else None), cap=int(args['--cap'])
    )
    if args['--format'] == 'csv':
        print_df(df, csv_path=args['--csv'])
    else:
        if args['--csv']:
            df.to_csv(args['--csv'], index=False)
        print_json({'version': __version__, 'records': df})
    return 0


def _moments(args):
    model = read_model(args['--model'])
    gamma = float(args['--gamma'])
    ell = int(args['--ell'])
    payload = {'version': __version__, 'ell': ell, 'gamma': gamma}
    if not args['--bound']:
        if not isinstance(model.assumption, A2Params):
            raise ValueError('exact moments need a constant-kernel (A2) model')
        payload['value'] = centred_moment_constant_kernel(
            alpha1=model.assumption.alpha1, alpha2=model.assumption.alpha2,
            gamma=gamma, m=model.m, ell=ell
        )
        payload['term_count'] = sum(star2_table(model.m, ell).values())
    if not args['--exact']:
        p = model.a1_params()
        payload['upper'] = centred_moment_upper(
            p=p, gamma=gamma, m=model.m, ell=ell, regime=args['--regime'],
            corollary=args['--corollary']
        )
        payload['chain'] = moment_chain_bounds(
            p=p, gamma=gamma, m=model.m, ell=ell
        )
    print_json(payload)
    return 0


def _bound(args):
    model = read_model(args['--model'])
    gamma = float(args['--gamma'])
    t = float(args['--t'])
    if args['--method'] == 'largeorder_lower':
        if model.a4 is None or model.f_L1 is None:
            raise ValueError('largeorder_lower needs a4 and f_L1 in the model')
        print_json({
            'version': __version__,
            **largeorder_lower_detail(
                p=model.a4, f_L1=model.f_L1, m=model.m, gamma=gamma, t=t
            )
        })
        return 0
    result = evaluate(
        args['--method'], model, gamma=gamma, t=t, tail=args['--tail'],
        centred=(not args['--not-centred']), c43=float(args['--c43']),
        c47=float(args['--c47'])
    )
    print_json({'version': __version__, **result.to_dict()})
    return 0 if result.preconditions_met else 2


def _preset(args):
    space = SpaceSpec(kappa=float(args['--kappa']), d=int(args['--d']))
    radius = float(args['--radius'])
    app = args['<app>']
    if app in ('subgraph', 'poweredge'):
        window = WindowSpec.ball(space, radius)
        if args['--delta']:
            rho = fixed_degree_radius(
                space, delta=float(args['--delta']),
                gamma=float(args['--gamma']), window=window
            )
        elif args['--rho']:
            rho = float(args['--rho'])
        else:
            raise ValueError('--rho or --delta is required')
        if app == 'subgraph':
            model = subgraph_model(
                space, window, GraphFunctionalSpec(graph=args['--graph']),
                rho=rho, s=float(args['--s'])
            )
        else:
            model = power_edge_model(
                space, window, rho=rho, tau=float(args['--tau']),
                s=float(args['--s'])
            )
    elif app == 'eucl-hyperplane':
        d = space.d
        nu = (
            [float(v) for v in args['--nu'].split(',')] if args['--nu']
            else ball_intrinsic_volumes(d, r=radius)
        )
        model = euclidean_hyperplane_model(
            d=d, m=int(args['--m'] or 1), i=int(args['--i']), nu=nu
        )
    elif app == 'hyp-hyperplane':
        model = hyperbolic_model(d=space.d, r=radius)
    else:
        raise ValueError(f'invalid app: {app}')
    data = {'version': __version__, **model_to_dict(model)}
    if args['--out']:
        write_json(data, path=args['--out'])
    else:
        print_json(data)
    return 0


def _load_scenario(args):
    sc = read_scenario(args['--scenario'])
    overrides = {
        k: int(args[f'--{k}']) for k in ('seed', 'replications')
        if args[f'--{k}']
    }
    return dataclasses.replace(sc, **overrides) if overrides else sc


def _sample(sc, replicate):
    if sc.functional == 'hyperbolic_f1':
        return sample_hyperbolic_chords(
            d=sc.d, r=sc.radius, gamma=sc.gamma, seed=sc.seed,
            replicate=replicate
        )
    else:
        return sample_ppp_ball(
            space=sc.space, r=sc.radius, gamma=sc.gamma, seed=sc.seed,
            replicate=replicate
        )


def _simulate(args):
    sc = _load_scenario(args=args)
    experiment = TailExperiment(
        scenario=sc,
        threads=(int(args['--threads']) if args['--threads'] else None)
    )
    df = experiment.run_tails()
    if args['--dump']:
        dump_samples(
            [
                _sample(sc, replicate=i) for i in
                range(min(int(args['--dump-count']), sc.replications))
            ],
            csv_path=args['--dump']
        )
    if args['--format'] == 'csv':
        print_df(df, csv_path=args['--csv'])
    else:
        if args['--csv']:
            df.to_csv(args['--csv'], index=False)
        print_json({
            'version': __version__, 'scenario': sc.name, 'seed': sc.seed,
            'centering': sc.centering, 'center': experiment.center(),
            'estimates': df
        })
    return 0


def _verify(args):
    logger = logging.getLogger(__name__)
    sc = _load_scenario(args=args)
    experiment = TailExperiment(
        scenario=sc,
        threads=(int(args['--threads']) if args['--threads'] else None)
    )
    report = experiment.verify_bounds()
    if args['--moments']:
        report['moments'] = experiment.moment_mc_check(
            ell_list=[int(v) for v in args['--moments'].split(',')]
        )
    if args['--csv']:
        report['results'].to_csv(args['--csv'], index=False)
    if args['--out']:
        write_json(report, path=args['--out'])
    print_json(to_jsonable(report))
    if not report['all_passed']:
        logger.warning(f'{sc.name}: some bounds failed')
        return 1
    return 0
