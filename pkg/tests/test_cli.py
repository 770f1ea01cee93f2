#!/usr/bin/env python

import json
import math

import pandas as pd
import pytest

from ustatconc import __version__
from ustatconc.cli import main

TOY_MODEL = {
    'm': 1,
    'assumption': {'type': 'A1', 'beta0': 1, 'beta1': 1, 'beta2': 1, 'q': 0},
    'f1_norm_sq': 1.0, 'nonnegative': True
}
POISSON_MODEL = {
    'm': 1, 'assumption': {'type': 'A2', 'alpha1': 1, 'alpha2': 1},
    'f1_norm_sq': 1.0, 'nonnegative': True
}


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_version(capsys):
    with pytest.raises(SystemExit):
        main(['--version'])
    assert capsys.readouterr().out.strip() == f'ustatconc {__version__}'


def test_enumerate(capsys):
    assert main(['enumerate', '--m=2', '--ell=2']) == 0
    out = _json_out(capsys)
    assert out['version'] == __version__
    assert len(out['records']) == 6
    assert sum(r['k'] == 2 for r in out['records']) == 2


def test_enumerate_csv(capsys, tmp_path):
    path = tmp_path / 'subs.csv'
    assert main([
        'enumerate', '--m=2', '--ell=2', '--k=2', '--format=csv',
        f'--csv={path}'
    ]) == 0
    assert len(pd.read_csv(path)) == 2


def test_enumerate_cap_exceeded(capsys):
    assert main(['enumerate', '--m=4', '--ell=5']) == 1


def test_moments_exact(capsys, write_json_file):
    path = write_json_file(POISSON_MODEL)
    assert main([
        'moments', f'--model={path}', '--ell=4', '--gamma=3', '--exact'
    ]) == 0
    out = _json_out(capsys)
    assert out['value'] == pytest.approx(30)
    assert out['term_count'] == 4
    assert 'upper' not in out


def test_moments_bound(capsys, write_json_file):
    path = write_json_file(TOY_MODEL)
    assert main([
        'moments', f'--model={path}', '--ell=2', '--gamma=4', '--bound',
        '--regime=high-intensity'
    ]) == 0
    out = _json_out(capsys)
    assert out['upper'] == pytest.approx(64)
    assert 'value' not in out


def test_moments_exact_needs_constant_kernel(capsys, write_json_file):
    path = write_json_file(TOY_MODEL)
    assert main(['moments', f'--model={path}', '--ell=2', '--exact']) == 1


def test_bound_main(capsys, write_json_file):
    path = write_json_file(TOY_MODEL)
    assert main([
        'bound', f'--model={path}', '--gamma=16', '--t=1024'
    ]) == 0
    out = _json_out(capsys)
    assert out['regime'] == 'sub-variance'
    assert out['rate'] == pytest.approx(1 / 32)


def test_bound_largeorder(capsys, write_json_file):
    path = write_json_file(POISSON_MODEL)
    assert main([
        'bound', f'--model={path}', '--gamma=1', f'--t={2 * math.e ** 2}',
        '--method=largeorder'
    ]) == 0
    assert _json_out(capsys)['rate'] == pytest.approx(math.e ** 2)


def test_bound_not_applicable_exits_2(capsys, write_json_file):
    path = write_json_file(POISSON_MODEL)
    assert main([
        'bound', f'--model={path}', '--gamma=1', '--t=1',
        '--method=largeorder'
    ]) == 2
    out = _json_out(capsys)
    assert out['regime'] == 'not-applicable'
    assert out['reasons']


def test_bound_invalid_method_exits_1(capsys, write_json_file):
    path = write_json_file(TOY_MODEL)
    assert main([
        'bound', f'--model={path}', '--gamma=1', '--t=1', '--method=magic'
    ]) == 1


def test_bound_largeorder_lower_precondition(capsys, write_json_file):
    path = write_json_file({
        **POISSON_MODEL, 'f_L1': 1.0, 'a4': {'theta1': 1, 'theta2': 1}
    })
    assert main([
        'bound', f'--model={path}', '--gamma=1', '--t=1',
        '--method=largeorder_lower'
    ]) == 2
    assert _json_out(capsys)['error'] == 'precondition'


def test_preset_hyperbolic(capsys, tmp_path):
    path = tmp_path / 'model.json'
    assert main([
        'preset', 'hyp-hyperplane', '--d=2', '--radius=3', f'--out={path}'
    ]) == 0
    data = json.loads(path.read_text())
    assert data['version'] == __version__
    assert data['assumption']['type'] == 'A1'
    assert data['assumption']['q'] == 1


def test_preset_subgraph_round_trips_into_bound(capsys, tmp_path):
    path = tmp_path / 'model.json'
    assert main([
        'preset', 'subgraph', '--graph=triangle', '--rho=0.2', f'--out={path}'
    ]) == 0
    assert main([
        'bound', f'--model={path}', '--gamma=1000', '--t=0'
    ]) in (0, 2)


def test_preset_fixed_degree(capsys):
    assert main([
        'preset', 'poweredge', '--kappa=-1', '--radius=2', '--delta=16',
        '--gamma=100', '--tau=1'
    ]) == 0
    assert _json_out(capsys)['notes']['rho'] > 0


def test_preset_needs_rho(capsys):
    assert main(['preset', 'subgraph']) == 1


def test_preset_unknown_app(capsys):
    assert main(['preset', 'voronoi']) == 1


def test_preset_euclidean_hyperplane(capsys):
    assert main(['preset', 'eucl-hyperplane', '--d=3', '--m=2', '--i=1']) == 0
    assert _json_out(capsys)['assumption']['type'] == 'A2'


def _scenario(write_json_file):
    return write_json_file({
        'name': 'points', 'functional': 'point_count', 'gamma': 5.0,
        'radius': 1 / math.sqrt(math.pi), 't_grid': [2.0, 10.0],
        'tails': ['upper'], 'methods': ['wu'], 'replications': 500,
        'seed': 3, 'centering': 'analytic'
    }, name='scenario.json')


def test_simulate(capsys, tmp_path, write_json_file):
    dump = tmp_path / 'points.csv'
    assert main([
        'simulate', f'--scenario={_scenario(write_json_file)}',
        '--threads=2', f'--dump={dump}', '--dump-count=3'
    ]) == 0
    out = _json_out(capsys)
    assert out['seed'] == 3
    assert len(out['estimates']) == 2
    assert set(pd.read_csv(dump)['replicate']) <= {0, 1, 2}


def test_simulate_seed_override(capsys, write_json_file):
    assert main([
        'simulate', f'--scenario={_scenario(write_json_file)}', '--seed=9',
        '--replications=100'
    ]) == 0
    out = _json_out(capsys)
    assert out['seed'] == 9
    assert out['estimates'][0]['n'] == 100


def test_verify(capsys, tmp_path, write_json_file):
    report = tmp_path / 'report.json'
    assert main([
        'verify', f'--scenario={_scenario(write_json_file)}',
        f'--out={report}', '--moments=2'
    ]) == 0
    data = json.loads(report.read_text())
    assert data['all_passed'] is True
    assert len(data['results']) == 2
    assert data['moments'][0]['ell'] == 2
