#!/usr/bin/env python

import json
import math

import pytest

from ustatconc.experiments import Scenario
from ustatconc.model import A1Params, A2Params, UStatModel


@pytest.fixture
def toy_model():
    return UStatModel(
        m=1, assumption=A1Params(beta0=1, beta1=1, beta2=1, q=0),
        f1_norm_sq=1.0, nonnegative=True, name='toy'
    )


@pytest.fixture
def poisson_model():
    return UStatModel(
        m=1, assumption=A2Params(alpha1=1, alpha2=1), f1_norm_sq=1.0,
        nonnegative=True, fk_norms=(1.0,), f_L1=1.0, name='poisson'
    )


@pytest.fixture
def write_json_file(tmp_path):
    def _write(data, name='data.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return _write


@pytest.fixture
def point_count_scenario():
    # unit-volume disc, so the point count is Poisson(gamma)
    return Scenario(
        name='point-count', functional='point_count', gamma=5.0,
        radius=1 / math.sqrt(math.pi), t_grid=(2.0, 5.0, 10.0),
        tails=('upper', 'two'), methods=('largeorder', 'wu', 'unified'),
        replications=2000, seed=7, centering='analytic'
    )
