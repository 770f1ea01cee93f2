#!/usr/bin/env python

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pprint import pformat

import numpy as np
import pandas as pd
import scipy.stats as scs

from . import __version__
from .applications import (GraphFunctionalSpec, WindowSpec, hyperbolic_model,
                           hyperbolic_rate, power_edge_model, subgraph_model)
from .bounds import evaluate, largeorder_lower_detail
from .geometry import (STREAM_CALIBRATION, STREAM_MAIN, SpaceSpec,
                       ball_volume, chord_moment_integral, edge_count,
                       f1_hyperbolic, falling_factorial_stat,
                       included_subgraph_count, make_graph, point_count,
                       power_edge_length, sample_hyperbolic_chords,
                       sample_ppp_ball)
from .model import A2Params, A4Params, UStatModel
from .moments import (CallbackKernel, centred_moment_constant_kernel,
                      centred_moment_exact)
from .util import PreconditionError, check_keys, read_json

FUNCTIONALS = (
    'point_count', 'falling_factorial', 'edge_count', 'subgraph', 'power_edge',
    'hyperbolic_f1'
)
METHODS = (
    'main', 'unified', 'largeorder', 'largeorder_lower', 'wu', 'cc', 'clt',
    'bp', 'moment', 'hyperbolic_wu', 'hyperbolic_a1'
)
TAIL_COLUMNS = [
    't', 'tail', 'exceed_count', 'n', 'estimate', 'ci_low', 'ci_high'
]
REPORT_COLUMNS = [
    'method', 't', 'tail', 'exceed_count', 'n', 'estimate', 'ci_low',
    'ci_high', 'bound', 'applicable', 'passed', 'log_margin'
]


@dataclass(frozen=True)
class Scenario:
    name: str
    functional: str
    gamma: float
    radius: float
    kappa: float = 0.0
    d: int = 2
    rho: float = None
    tau: float = 0.0
    graph: str = 'edge'
    m: int = 1
    c: float = 1.0
    s: float = 0.0
    t_grid: tuple = ()
    s_grid: tuple = ()
    tails: tuple = ('two',)
    methods: tuple = ('main',)
    replications: int = 100000
    seed: int = 0
    centering: str = 'calibration'
    level: float = 0.99
    c43: float = 1.0
    c47: float = 1.0

    def __post_init__(self):
        for k in ('t_grid', 's_grid', 'tails', 'methods'):
            object.__setattr__(self, k, tuple(getattr(self, k)))
        if self.functional not in FUNCTIONALS:
            raise ValueError(f'invalid functional: {self.functional}')
        elif not self.replications >= 1:
            raise ValueError(f'invalid replications: {self.replications}')
        elif not (self.t_grid or self.s_grid):
            raise ValueError('t_grid and s_grid are both empty')
        elif any(list(g) != sorted(g) for g in (self.t_grid, self.s_grid)):
            raise ValueError('grids must be sorted')
        elif set(self.methods) - set(METHODS):
            raise ValueError(f'invalid methods: {self.methods}')
        elif set(self.tails) - {'two', 'upper', 'lower'}:
            raise ValueError(f'invalid tails: {self.tails}')
        elif self.centering not in ('calibration', 'analytic'):
            raise ValueError(f'invalid centering: {self.centering}')
        elif not 0 < self.level < 1:
            raise ValueError(f'invalid level: {self.level}')
        elif self.functional in ('edge_count', 'subgraph', 'power_edge') and (
                self.rho is None):
            raise ValueError(f'rho is required for {self.functional}')

    @property
    def space(self):
        return SpaceSpec(kappa=self.kappa, d=self.d)

    @property
    def window(self):
        return WindowSpec.ball(self.space, self.radius)

    @property
    def order(self):
        if self.functional in ('point_count', 'hyperbolic_f1'):
            return 1
        elif self.functional == 'falling_factorial':
            return self.m
        elif self.functional == 'subgraph':
            return make_graph(self.graph).number_of_nodes()
        else:
            return 2


def scenario_from_dict(data):
    check_keys(data, [f.name for f in fields(Scenario)], 'scenario')
    return Scenario(**data)


def read_scenario(path):
    return scenario_from_dict(read_json(path))


@dataclass(frozen=True)
class TailEstimate:
    t: float
    tail: str
    exceed_count: int
    n: int
    estimate: float = field(init=False)
    ci_low: float = field(init=False)
    ci_high: float = field(init=False)
    level: float = 0.99

    def __post_init__(self):
        if not 0 <= self.exceed_count <= self.n:
            raise ValueError(f'invalid counts: {self.exceed_count}/{self.n}')
        ci = clopper_pearson(k=self.exceed_count, n=self.n, level=self.level)
        object.__setattr__(self, 'estimate', self.exceed_count / self.n)
        object.__setattr__(self, 'ci_low', ci[0])
        object.__setattr__(self, 'ci_high', ci[1])

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if k in TAIL_COLUMNS}


def clopper_pearson(k, n, level=0.99):
    alpha = 1 - level
    return (
        (scs.beta.ppf(alpha / 2, k, n - k + 1) if k > 0 else 0.0),
        (scs.beta.ppf(1 - alpha / 2, k + 1, n - k) if k < n else 1.0)
    )


def falling_factorial_variance(alpha, m, c=1.0):
    return c ** 2 * math.fsum(
        math.comb(m, k) ** 2 * math.factorial(k) * alpha ** (2 * m - k)
        for k in range(1, m + 1)
    )


def scenario_model(sc):
    if sc.functional in ('point_count', 'falling_factorial'):
        m = sc.order
        c = sc.c if sc.functional == 'falling_factorial' else 1.0
        v = ball_volume(sc.space, sc.radius)
        return UStatModel(
            m=m, assumption=A2Params(alpha1=v, alpha2=c),
            f1_norm_sq=m ** 2 * c ** 2 * v ** (2 * m - 1), nonnegative=(c > 0),
            fk_norms=tuple(
                math.comb(m, k) ** 2 * c ** 2 * v ** (2 * m - k)
                for k in range(1, m + 1)
            ),
            f_L1=c * v ** m, a4=A4Params(theta1=v, theta2=c, m=m),
            name=sc.functional
        )
    elif sc.functional in ('edge_count', 'subgraph'):
        return subgraph_model(
            sc.space, sc.window,
            GraphFunctionalSpec(
                kind='included_subgraph',
                graph=(sc.graph if sc.functional == 'subgraph' else 'edge')
            ),
            rho=sc.rho, s=sc.s
        )
    elif sc.functional == 'power_edge':
        return power_edge_model(
            sc.space, sc.window, rho=sc.rho, tau=sc.tau, s=sc.s
        )
    else:
        return hyperbolic_model(d=sc.d, r=sc.radius)


def analytic_moments(sc):
    """Return (mean, variance) where a closed form exists, else None."""
    if sc.functional in ('point_count', 'falling_factorial'):
        alpha = sc.gamma * ball_volume(sc.space, sc.radius)
        m = sc.order
        c = sc.c if sc.functional == 'falling_factorial' else 1.0
        return (c * alpha ** m, falling_factorial_variance(alpha, m, c=c))
    elif sc.functional == 'hyperbolic_f1':
        return (
            sc.gamma * chord_moment_integral(sc.d, 1, sc.radius),
            sc.gamma * chord_moment_integral(sc.d, 2, sc.radius)
        )
    else:
        return None


def functional_value(sc, replicate, stream=STREAM_MAIN):
    if sc.functional == 'hyperbolic_f1':
        return f1_hyperbolic(
            sample_hyperbolic_chords(
                d=sc.d, r=sc.radius, gamma=sc.gamma, seed=sc.seed,
                replicate=replicate, stream=stream
            )
        )
    sample = sample_ppp_ball(
        space=sc.space, r=sc.radius, gamma=sc.gamma, seed=sc.seed,
        replicate=replicate, stream=stream
    )
    if sc.functional == 'point_count':
        return point_count(sample)
    elif sc.functional == 'falling_factorial':
        return falling_factorial_stat(sample, m=sc.m, c=sc.c)
    elif sc.functional == 'edge_count':
        return edge_count(sample, rho=sc.rho)
    elif sc.functional == 'subgraph':
        return included_subgraph_count(
            sample, rho=sc.rho, H=make_graph(sc.graph)
        )
    else:
        return power_edge_length(sample, rho=sc.rho, tau=sc.tau)


def tail_counts(deviations, t, tail):
    if tail == 'two':
        return int(np.count_nonzero(np.abs(deviations) >= t))
    elif tail == 'upper':
        return int(np.count_nonzero(deviations >= t))
    else:
        return int(np.count_nonzero(deviations <= -t))


def verify_bounds(estimates, bound_curve):
    """
    Join tail estimates with a bound curve on (t, tail).

    An upper bound passes at t iff ci_low <= bound; a bound flagged
    'lower' passes iff ci_high >= bound.
    """
    est = estimates.reset_index(drop=True)
    curve = bound_curve.reset_index(drop=True)
    if len(est) != len(curve) or not (
            np.allclose(est['t'], curve['t'], rtol=1e-12, atol=0)
            and (est['tail'].values == curve['tail'].values).all()):
        raise ValueError('misaligned grids between estimates and bound curve')
    df = est.assign(
        bound=curve['bound'].values,
        kind=(curve['kind'].values if 'kind' in curve else 'upper'),
        applicable=(
            curve['applicable'].values if 'applicable' in curve else True
        )
    )
    df['passed'] = np.where(
        df['kind'] == 'lower', df['ci_high'] >= df['bound'],
        df['ci_low'] <= df['bound']
    )
    with np.errstate(divide='ignore'):
        df['log_margin'] = np.log(df['bound']) - np.log(df['estimate'])
    return df


def _jackknife_central_moments(x, ell):
    n = x.size
    y = x - math.fsum(x) / n
    power_sums = [math.fsum(y ** a) for a in range(ell + 1)]
    full = power_sums[ell] / n
    shift = -y / (n - 1)
    loo = (
        sum(
            math.comb(ell, a) * power_sums[a] * (-shift) ** (ell - a)
            for a in range(ell + 1)
        ) - (y - shift) ** ell
    ) / (n - 1)
    se = math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))
    return full, se


class TailExperiment(object):
    def __init__(self, scenario, threads=None):
        self.__logger = logging.getLogger(__name__)
        self.scenario = scenario
        self.threads = threads or os.cpu_count() or 1
        self.model = scenario_model(scenario)
        self.moments = analytic_moments(scenario)
        self.__values = dict()
        self.__logger.debug('vars(self):' + os.linesep + pformat(vars(self)))

    def values(self, stream=STREAM_MAIN):
        if stream not in self.__values:
            n = self.scenario.replications
            self.__logger.info(
                f'Simulate {n} replicates of {self.scenario.functional}'
                f' (stream {stream}, {self.threads} threads)'
            )
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                self.__values[stream] = np.array(
                    list(executor.map(
                        lambda i: functional_value(self.scenario, i, stream),
                        range(n), chunksize=max(1, n // (8 * self.threads))
                    )),
                    dtype=float
                )
        return self.__values[stream]

    def center(self):
        if self.scenario.centering == 'analytic':
            if self.moments is None:
                raise ValueError(
                    f'no analytic mean for {self.scenario.functional}'
                )
            return self.moments[0]
        else:
            calibration = self.values(stream=STREAM_CALIBRATION)
            return math.fsum(calibration) / calibration.size

    def run_tails(self, t_grid=None, tails=None):
        sc = self.scenario
        deviations = self.values() - self.center()
        estimates = [
            TailEstimate(
                t=t, tail=tail, n=deviations.size, level=sc.level,
                exceed_count=tail_counts(deviations, t=t, tail=tail)
            ) for t in (sc.t_grid if t_grid is None else t_grid)
            for tail in (tails or sc.tails)
        ]
        return pd.DataFrame(
            [e.to_dict() for e in estimates], columns=TAIL_COLUMNS
        )

    def clt_t_grid(self):
        sd = math.sqrt(
            self.moments[1] if self.moments else self.model.variance or 0
        )
        if not sd > 0:
            raise ValueError('clt needs an analytic variance')
        return [s * sd for s in self.scenario.s_grid]

    def _bound_row(self, method, t, tail):
        sc = self.scenario
        if method in ('hyperbolic_wu', 'hyperbolic_a1'):
            res = hyperbolic_rate(
                d=sc.d, r=sc.radius, gamma=sc.gamma, t=t,
                method=method.split('_')[1], tail=tail
            )
        elif method == 'largeorder_lower':
            if tail != 'upper' or self.model.a4 is None:
                return {'bound': 0.0, 'kind': 'lower', 'applicable': False}
            try:
                bound = largeorder_lower_detail(
                    p=self.model.a4, f_L1=self.model.f_L1, m=self.model.m,
                    gamma=sc.gamma, t=t
                )['lower']
            except PreconditionError:
                return {'bound': 0.0, 'kind': 'lower', 'applicable': False}
            return {'bound': bound, 'kind': 'lower', 'applicable': True}
        elif method == 'clt':
            sd = math.sqrt(self.moments[1])
            res = evaluate(
                method, self.model, gamma=sc.gamma, t=t / sd, tail=tail
            )
        else:
            res = evaluate(
                method, self.model, gamma=sc.gamma, t=t, tail=tail,
                c43=sc.c43, c47=sc.c47
            )
        return {
            'bound': res.prob_bound, 'kind': 'upper',
            'applicable': res.preconditions_met
        }

    def verify_bounds(self):
        sc = self.scenario
        frames = []
        for method in sc.methods:
            t_grid = self.clt_t_grid() if method == 'clt' else sc.t_grid
            if not t_grid:
                continue
            estimates = self.run_tails(t_grid=t_grid)
            curve = pd.DataFrame([
                {'t': t, 'tail': tail, **self._bound_row(method, t, tail)}
                for t, tail in zip(estimates['t'], estimates['tail'])
            ])
            frames.append(
                verify_bounds(estimates, curve).assign(method=method)
            )
            self.__logger.info(
                f'{method}: {int(frames[-1]["passed"].sum())}'
                f'/{len(frames[-1])} passed'
            )
        df = pd.concat(frames, ignore_index=True)[REPORT_COLUMNS]
        return {
            'version': __version__, 'scenario': sc.name, 'seed': sc.seed,
            'centering': sc.centering, 'center': self.center(),
            'all_passed': bool(df['passed'].all()), 'results': df
        }

    def exact_centred_moment(self, ell):
        sc = self.scenario
        if sc.functional in ('point_count', 'falling_factorial'):
            p = self.model.assumption
            return centred_moment_constant_kernel(
                alpha1=p.alpha1, alpha2=p.alpha2, gamma=sc.gamma, m=sc.order,
                ell=ell
            )
        elif sc.functional == 'hyperbolic_f1':
            ki = CallbackKernel(
                lambda sigma, ell, k: math.prod(
                    chord_moment_integral(sc.d, len(b), sc.radius)
                    for b in sigma.blocks
                )
            )
            return centred_moment_exact(
                ki, gamma=sc.gamma, m=1, ell=ell
            ).value
        else:
            raise ValueError(f'no exact-moment route for {sc.functional}')

    def moment_mc_check(self, ell_list, z_max=4.0):
        x = self.values()
        rows = list()
        for ell in ell_list:
            mc, se = _jackknife_central_moments(x, ell)
            exact = self.exact_centred_moment(ell)
            z = (mc - exact) / se if se > 0 else 0.0
            rows.append({
                'ell': ell, 'mc': mc, 'se': se, 'exact': exact, 'z': z,
                'flagged': abs(z) > z_max
            })
        return pd.DataFrame(rows)
