#!/usr/bin/env python

import dataclasses
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from ustatconc.bounds import evaluate
from ustatconc.experiments import (REPORT_COLUMNS, TAIL_COLUMNS, Scenario,
                                   TailEstimate, TailExperiment,
                                   analytic_moments, clopper_pearson,
                                   falling_factorial_variance, read_scenario,
                                   scenario_from_dict, scenario_model,
                                   tail_counts, verify_bounds)
from ustatconc.model import A2Params
from ustatconc.util import exp_neg

SCENARIO_DIR = Path(__file__).resolve().parents[1] / 'docs' / 'scenarios'


def test_clopper_pearson():
    assert clopper_pearson(0, 10)[0] == 0
    assert clopper_pearson(10, 10)[1] == 1
    low, high = clopper_pearson(50, 100, level=0.95)
    assert low < 0.5 < high
    assert low == pytest.approx(0.3983, abs=1e-4)


def test_tail_estimate():
    est = TailEstimate(t=1.0, tail='upper', exceed_count=3, n=100)
    assert est.estimate == pytest.approx(0.03)
    assert est.ci_low < 0.03 < est.ci_high
    assert list(est.to_dict()) == TAIL_COLUMNS
    with pytest.raises(ValueError):
        TailEstimate(t=1.0, tail='upper', exceed_count=3, n=2)


def test_tail_counts():
    dev = np.array([-3.0, -1.0, 0.0, 1.0, 2.0])
    assert tail_counts(dev, t=1, tail='upper') == 2
    assert tail_counts(dev, t=1, tail='lower') == 2
    assert tail_counts(dev, t=1, tail='two') == 4


def test_falling_factorial_variance():
    assert falling_factorial_variance(3.0, 1) == pytest.approx(3)
    assert falling_factorial_variance(3.0, 2, c=0.5) == pytest.approx(
        0.25 * (4 * 27 + 2 * 9)
    )


def test_scenario_validation():
    base = {
        'name': 'x', 'functional': 'point_count', 'gamma': 1.0, 'radius': 1.0,
        't_grid': [1.0]
    }
    assert scenario_from_dict(base).t_grid == (1.0,)
    with pytest.raises(ValueError, match='scenario keys'):
        scenario_from_dict({**base, 'bogus': 1})
    with pytest.raises(ValueError, match='functional'):
        scenario_from_dict({**base, 'functional': 'volume'})
    with pytest.raises(ValueError, match='empty'):
        scenario_from_dict({**base, 't_grid': []})
    with pytest.raises(ValueError, match='sorted'):
        scenario_from_dict({**base, 't_grid': [2.0, 1.0]})
    with pytest.raises(ValueError, match='rho is required'):
        scenario_from_dict({**base, 'functional': 'edge_count'})
    with pytest.raises(ValueError, match='methods'):
        scenario_from_dict({**base, 'methods': ['magic']})


def test_read_scenario(write_json_file):
    sc = read_scenario(write_json_file({
        'name': 'edges', 'functional': 'edge_count', 'gamma': 50.0,
        'radius': 1.0, 'rho': 0.2, 't_grid': [10.0, 20.0]
    }))
    assert sc.order == 2
    assert sc.window.volume == pytest.approx(math.pi)


def test_scenario_model_point_count(point_count_scenario):
    model = scenario_model(point_count_scenario)
    assert isinstance(model.assumption, A2Params)
    assert model.assumption.alpha1 == pytest.approx(1)
    assert model.assumption.alpha2 == 1
    assert model.a4.theta1 == pytest.approx(1)
    mean, var = analytic_moments(point_count_scenario)
    assert mean == pytest.approx(5)
    assert var == pytest.approx(5)


def test_scenario_model_falling_factorial(point_count_scenario):
    sc = dataclasses.replace(
        point_count_scenario, functional='falling_factorial', m=2, c=0.5
    )
    model = scenario_model(sc)
    assert model.m == 2
    assert model.fk_norms == pytest.approx((4 * 0.25, 0.25))
    assert analytic_moments(sc)[0] == pytest.approx(0.5 * 25)


def test_verify_bounds_logic():
    estimates = pd.DataFrame({
        't': [1.0, 2.0], 'tail': ['upper', 'upper'], 'estimate': [0.2, 0.1],
        'ci_low': [0.15, 0.05], 'ci_high': [0.25, 0.15]
    })
    curve = pd.DataFrame({
        't': [1.0, 2.0], 'tail': ['upper', 'upper'], 'bound': [0.5, 0.01]
    })
    df = verify_bounds(estimates, curve)
    assert list(df['passed']) == [True, False]
    assert df['log_margin'][0] == pytest.approx(math.log(0.5 / 0.2))
    lower = curve.assign(kind='lower', bound=[0.2, 0.2])
    assert list(verify_bounds(estimates, lower)['passed']) == [True, False]
    with pytest.raises(ValueError, match='misaligned'):
        verify_bounds(estimates, curve.assign(t=[1.0, 3.0]))


def test_tail_experiment_is_reproducible(point_count_scenario):
    sc = dataclasses.replace(point_count_scenario, replications=300)
    a = TailExperiment(sc, threads=1).values()
    b = TailExperiment(sc, threads=4).values()
    assert np.array_equal(a, b)
    c = TailExperiment(dataclasses.replace(sc, seed=8), threads=2).values()
    assert not np.array_equal(a, c)


def test_tail_experiment_centering(point_count_scenario):
    analytic = TailExperiment(point_count_scenario, threads=2)
    assert analytic.center() == pytest.approx(5)
    calibrated = TailExperiment(
        dataclasses.replace(point_count_scenario, centering='calibration'),
        threads=2
    )
    assert abs(calibrated.center() - 5) <= 4 * math.sqrt(5 / 2000)


def test_run_tails(point_count_scenario):
    df = TailExperiment(point_count_scenario, threads=2).run_tails()
    assert list(df.columns) == TAIL_COLUMNS
    assert len(df) == 6
    assert (df['ci_low'] <= df['estimate']).all()
    assert (df['estimate'] <= df['ci_high']).all()


def test_verify_point_count_bounds(point_count_scenario):
    report = TailExperiment(point_count_scenario, threads=2).verify_bounds()
    assert list(report['results'].columns) == REPORT_COLUMNS
    assert report['all_passed']
    assert report['seed'] == 7
    assert set(report['results']['method']) == {'largeorder', 'wu', 'unified'}


def test_verify_largeorder_lower_on_point_count(point_count_scenario):
    sc = dataclasses.replace(
        point_count_scenario, gamma=2.0, t_grid=(1.0, 3.0, 60.0),
        tails=('upper',), methods=('largeorder_lower',)
    )
    df = TailExperiment(sc, threads=2).verify_bounds()['results']
    assert df['passed'].all()


def test_moment_mc_check(point_count_scenario):
    sc = dataclasses.replace(point_count_scenario, replications=4000)
    df = TailExperiment(sc, threads=2).moment_mc_check([2, 3])
    assert list(df['exact']) == pytest.approx([5, 5])
    assert not df['flagged'].any()


def test_hyperbolic_exact_moment_matches_cumulants():
    sc = Scenario(
        name='hyp', functional='hyperbolic_f1', gamma=1.0, radius=1.0,
        t_grid=(1.0,), replications=10
    )
    experiment = TailExperiment(sc, threads=1)
    assert experiment.exact_centred_moment(2) == pytest.approx(
        analytic_moments(sc)[1]
    )


@pytest.mark.parametrize(
    'path', sorted(SCENARIO_DIR.glob('*.json')), ids=lambda p: p.stem
)
def test_shipped_scenarios_pass_verification(path):
    sc = dataclasses.replace(read_scenario(str(path)), replications=1000)
    report = TailExperiment(sc, threads=4).verify_bounds()
    failed = report['results'].query('not passed')
    assert report['all_passed'], failed.to_string()
    assert set(report['results']['method']) == set(sc.methods)


def test_inflated_rate_fails_at_small_t(point_count_scenario):
    sc = dataclasses.replace(point_count_scenario, tails=('upper',))
    experiment = TailExperiment(sc, threads=2)
    estimates = experiment.run_tails()
    results = [
        evaluate('wu', experiment.model, gamma=sc.gamma, t=t, tail='upper')
        for t in sc.t_grid
    ]
    curve = pd.DataFrame({
        't': sc.t_grid, 'tail': 'upper',
        'bound': [r.prob_bound for r in results]
    })
    assert verify_bounds(estimates, curve)['passed'].all()
    inflated = curve.assign(
        bound=[exp_neg(100 * r.rate, factor=r.factor) for r in results]
    )
    assert not verify_bounds(estimates, inflated)['passed'][0]


def test_clt_regime_on_the_standardized_grid():
    sc = dataclasses.replace(
        read_scenario(str(SCENARIO_DIR / 'point_count_100.json')),
        methods=('clt',), tails=('two',), replications=2000
    )
    report = TailExperiment(sc, threads=2).verify_bounds()
    df = report['results']
    assert list(df['t']) == pytest.approx([10.0 * s for s in sc.s_grid])
    assert df['passed'].all()
    assert df['applicable'].any()
