#!/usr/bin/env python
"""
Kernels, intensity data and the assumption parameter sets of Poisson
U-statistics, with the conversions (A2) -> (A1) and (A3) -> (A1).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from .util import PreconditionError, check_keys, read_json

_REL_TOL = 1e-9


def _check_positive(**kwargs):
    for k, v in kwargs.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f'invalid {k}: {v}')


@dataclass(frozen=True)
class IntensitySpec:
    gamma: float
    total_mass: float = math.inf

    def __post_init__(self):
        _check_positive(gamma=self.gamma)
        if not self.total_mass > 0:
            raise ValueError(f'invalid total_mass: {self.total_mass}')


@dataclass(frozen=True)
class A1Params:
    beta0: float
    beta1: float
    beta2: float
    q: float

    def __post_init__(self):
        if not self.beta0 >= 1:
            raise ValueError(f'invalid beta0: {self.beta0}')
        _check_positive(beta1=self.beta1, beta2=self.beta2)
        if not 0 <= self.q <= 1:
            raise ValueError(f'invalid q: {self.q}')


@dataclass(frozen=True)
class A2Params:
    alpha1: float
    alpha2: float

    def __post_init__(self):
        _check_positive(alpha1=self.alpha1, alpha2=self.alpha2)


@dataclass(frozen=True)
class A3Params:
    M: float
    C_gLambda: float
    f_L1: float
    s: float = 0.0

    def __post_init__(self):
        _check_positive(M=self.M, C_gLambda=self.C_gLambda)
        if not self.f_L1 >= 0:
            raise ValueError(f'invalid f_L1: {self.f_L1}')
        elif not 0 <= self.s <= 1:
            raise ValueError(f'invalid s: {self.s}')


@dataclass(frozen=True)
class A4Params:
    theta1: float
    theta2: float
    m: int

    def __post_init__(self):
        _check_positive(theta1=self.theta1, theta2=self.theta2)
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f'invalid m: {self.m}')


def a2_to_a1(p):
    return A1Params(beta0=1.0, beta1=p.alpha1, beta2=p.alpha2, q=0.0)


def a3_to_a1(p, m, s=None):
    s = p.s if s is None else s
    if not 0 <= s <= 1:
        raise ValueError(f'invalid s: {s}')
    r = max(1.0, p.f_L1 / (p.M * p.C_gLambda ** m))
    return A1Params(
        beta0=1.0, beta1=p.C_gLambda * r ** (s / m),
        beta2=p.M * r ** ((1 - s) / 2), q=0.0
    )


def f1_norm_sq_ceiling(p, m):
    """Largest ||f_1||^2 compatible with the (A1) parameters."""
    return 2 ** p.q * m ** 2 * p.beta0 * p.beta2 ** 2 * p.beta1 ** (2 * m - 1)


@dataclass(frozen=True)
class UStatModel:
    m: int
    assumption: object
    f1_norm_sq: Optional[float] = None
    variance: Optional[float] = None
    nonnegative: bool = False
    fk_norms: Optional[tuple] = None
    f_L1: Optional[float] = None
    a4: Optional[A4Params] = None
    f1_is_lower_bound: bool = False
    name: str = ''
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f'invalid m: {self.m}')
        elif not isinstance(self.assumption, (A1Params, A2Params, A3Params)):
            raise ValueError(f'invalid assumption: {self.assumption}')
        elif self.f1_norm_sq is not None and not self.f1_norm_sq >= 0:
            raise ValueError(f'invalid f1_norm_sq: {self.f1_norm_sq}')
        elif self.variance is not None and not self.variance >= 0:
            raise ValueError(f'invalid variance: {self.variance}')
        if self.fk_norms is not None:
            object.__setattr__(
                self, 'fk_norms', tuple(float(v) for v in self.fk_norms)
            )
            if len(self.fk_norms) != self.m or min(self.fk_norms) < 0:
                raise ValueError(f'invalid fk_norms: {self.fk_norms}')
        if (self.f1_norm_sq is not None
                and not isinstance(self.assumption, A3Params)):
            ceiling = f1_norm_sq_ceiling(p=self.a1_params(), m=self.m)
            if self.f1_norm_sq > ceiling * (1 + _REL_TOL):
                raise ValueError(
                    f'f1_norm_sq exceeds the (A1) ceiling: {self.f1_norm_sq}'
                    f' > {ceiling}'
                )

    def a1_params(self, s=None):
        if isinstance(self.assumption, A1Params):
            return self.assumption
        elif isinstance(self.assumption, A2Params):
            return a2_to_a1(self.assumption)
        else:
            return a3_to_a1(self.assumption, m=self.m, s=s)

    def require_f1(self):
        if self.f1_norm_sq is None:
            raise PreconditionError('f1_norm_sq is required but missing')
        return self.f1_norm_sq


def variance_window(model, gamma, cst_c47):
    logger = logging.getLogger(__name__)
    p = model.a1_params()
    f1 = model.require_f1()
    m = model.m
    if not cst_c47 > 0:
        raise ValueError(f'invalid cst_c47: {cst_c47}')
    elif gamma * p.beta1 < cst_c47:
        raise PreconditionError(
            f'intensity too small: gamma * beta1 = {gamma * p.beta1}'
            f' < c47 = {cst_c47}'
        )
    lower = gamma ** (2 * m - 1) * f1
    upper = (
        2 ** p.q * p.beta0 * m ** 2
        * (2 ** p.q * m / cst_c47 + 1) ** (m - 1)
        * p.beta2 ** 2 * (gamma * p.beta1) ** (2 * m - 1)
    )
    logger.debug(f'variance window: [{lower}, {upper}]')
    return (lower, upper)


_ASSUMPTION_TYPES = {
    'A1': (A1Params, ('beta0', 'beta1', 'beta2', 'q')),
    'A2': (A2Params, ('alpha1', 'alpha2')),
    'A3': (A3Params, ('M', 'C_gLambda', 'f_L1', 's'))
}
_MODEL_KEYS = (
    'm', 'assumption', 'f1_norm_sq', 'variance', 'nonnegative', 'fk_norms',
    'f_L1', 'a4', 'f1_is_lower_bound', 'name', 'notes', 'version'
)


def model_from_dict(data):
    check_keys(data, _MODEL_KEYS, 'model')
    a = dict(data['assumption'])
    type_name = a.pop('type', None)
    if type_name not in _ASSUMPTION_TYPES:
        raise ValueError(f'invalid assumption type: {type_name}')
    cls, keys = _ASSUMPTION_TYPES[type_name]
    check_keys(a, keys, f'{type_name} assumption')
    a4 = data.get('a4')
    if a4 is not None:
        check_keys(a4, ('theta1', 'theta2'), 'a4')
    return UStatModel(
        m=int(data['m']), assumption=cls(**a),
        f1_norm_sq=data.get('f1_norm_sq'), variance=data.get('variance'),
        nonnegative=bool(data.get('nonnegative', False)),
        fk_norms=data.get('fk_norms'), f_L1=data.get('f_L1'),
        a4=(A4Params(m=int(data['m']), **a4) if a4 is not None else None),
        f1_is_lower_bound=bool(data.get('f1_is_lower_bound', False)),
        name=data.get('name', ''), notes=dict(data.get('notes', {}))
    )


def model_to_dict(model):
    type_name = {v[0]: k for k, v in _ASSUMPTION_TYPES.items()}[
        type(model.assumption)
    ]
    data = {
        'm': model.m,
        'assumption': {'type': type_name, **asdict(model.assumption)},
        'f1_norm_sq': model.f1_norm_sq, 'variance': model.variance,
        'nonnegative': model.nonnegative,
        'fk_norms': (list(model.fk_norms) if model.fk_norms else None),
        'f_L1': model.f_L1,
        'a4': (
            {'theta1': model.a4.theta1, 'theta2': model.a4.theta2}
            if model.a4 else None
        ),
        'f1_is_lower_bound': model.f1_is_lower_bound, 'name': model.name,
        'notes': model.notes
    }
    return {k: v for k, v in data.items() if v is not None}


def read_model(path):
    return model_from_dict(read_json(path))
