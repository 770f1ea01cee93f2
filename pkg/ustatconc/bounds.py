#!/usr/bin/env python
"""
Tail bounds for Poisson U-statistics.

Every bound is evaluated through its rate I(gamma, t) in log-space and
reported as a BoundResult with prob_bound = min(1, factor * exp(-rate)).
Failed preconditions produce a 'not-applicable' result rather than
an exception, unless the operation returns a bare number.
"""

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from .model import A2Params, A4Params
from .util import PreconditionError, exp_neg

TAILS = ('two', 'upper', 'lower')
REGIMES = (
    'sub-variance', 'gaussian', 'poisson-log', 'unified', 'not-applicable'
)


@dataclass(frozen=True)
class RateConstants:
    c26: float
    c23: float
    c24: float
    c11: float
    c9: float
    c15: float
    c16: float
    c17: float
    c27: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class BoundResult:
    method: str
    regime: str
    rate: float
    prob_bound: float
    preconditions_met: bool
    factor: int = 1
    reasons: tuple = ()
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f'invalid regime: {self.regime}')

    @property
    def applicable(self):
        return self.preconditions_met

    def to_dict(self):
        return {
            'method': self.method, 'regime': self.regime, 'rate': self.rate,
            'prob_bound': self.prob_bound,
            'preconditions_met': self.preconditions_met,
            'factor': self.factor, 'reasons': list(self.reasons),
            'details': self.details
        }


def make_result(method, regime, rate, factor=1, **details):
    rate = max(0.0, float(rate))
    return BoundResult(
        method=method, regime=regime, rate=rate,
        prob_bound=exp_neg(rate, factor=factor), preconditions_met=True,
        factor=factor, details=details
    )


def not_applicable(method, *reasons, **details):
    logger = logging.getLogger(__name__)
    logger.info(f'{method} not applicable: {"; ".join(reasons)}')
    return BoundResult(
        method=method, regime='not-applicable', rate=0.0, prob_bound=1.0,
        preconditions_met=False, reasons=tuple(reasons), details=details
    )


def tail_factor(tail, two_sided=2):
    if tail not in TAILS:
        raise ValueError(f'invalid tail: {tail}')
    return two_sided if tail == 'two' else 1


def _check_t(t):
    if not t >= 0:
        raise ValueError(f'invalid t: {t}')


def _log_plus(x):
    return math.log(x) if x > 1 else 0.0


def _rate_constants(p, m, f1):
    b0, b1, b2, q = p.beta0, p.beta1, p.beta2, p.q
    return RateConstants(
        c26=f1 / (
            2 ** (17 * m + 4) * (b0 * m) ** (2 * m + 3) * b2 ** 4
            * b1 ** (4 * m - 2)
        ),
        c23=1 / (
            2 ** (16 * m + 4) * (m * b0) ** (2 * m + 1) * b2 ** 2
            * b1 ** (2 * m - 1)
        ),
        c24=2 ** (8 * m + 1.5) * (m * b0) ** (m + 0.5) * b2 * b1 ** (m - 0.5),
        c11=8 * m * b0 / b1,
        c9=1 / b1,
        c15=1 / (2 ** (1 + q) * math.e * m) * (math.e * b2) ** (-1 / m),
        c16=2 ** (-m * q) * math.exp(-m - 1) / (b2 * b1 ** m),
        c17=2 ** (8 * m) * b2 * (m * b0 * b1) ** m,
        c27=2 ** (-17 * m - 4) * (b0 * m) ** (-2 * m - 3) * min(
            1.0, f1 / (b2 ** 2 * b1 ** (2 * m - 1))
        )
    )


def main_constants(model):
    return _rate_constants(
        p=model.a1_params(), m=model.m, f1=model.require_f1()
    )


def main_bound(model, gamma, t, tail='two'):
    logger = logging.getLogger(__name__)
    _check_t(t)
    method = 'main'
    m = model.m
    f1 = model.f1_norm_sq or 0.0
    c = _rate_constants(p=model.a1_params(), m=m, f1=f1)
    logger.debug(f'constants: {c}')
    t_ab = c.c24 * gamma ** (m - 0.5)
    t_bc = c.c17 * gamma ** m
    thresholds = {'t_ab': t_ab, 't_bc': t_bc}
    if t < t_ab:
        if gamma < c.c11:
            return not_applicable(
                method, f'gamma = {gamma} < c11 = {c.c11}', **thresholds
            )
        elif f1 <= 0:
            return not_applicable(
                method, 'f1_norm_sq is missing or zero', **thresholds
            )
        else:
            return make_result(
                method, 'sub-variance', c.c26 * t ** 2 / gamma ** (2 * m - 1),
                factor=tail_factor(tail), **thresholds
            )
    elif t < t_bc:
        if gamma < c.c11:
            return not_applicable(
                method, f'gamma = {gamma} < c11 = {c.c11}', **thresholds
            )
        else:
            return make_result(
                method, 'gaussian', c.c23 * t ** 2 / gamma ** (2 * m - 1),
                factor=tail_factor(tail, two_sided=1), **thresholds
            )
    elif gamma < c.c9:
        return not_applicable(
            method, f'gamma = {gamma} < c9 = {c.c9}', **thresholds
        )
    else:
        q = model.a1_params().q
        log_term = max(0.0, math.log(c.c16 * t / gamma ** m))
        return make_result(
            method, 'poisson-log',
            c.c15 * t ** (1 / m) * log_term ** (1 - q),
            factor=tail_factor(tail, two_sided=1), **thresholds
        )


def unified_bound(model, gamma, t, tail='two'):
    _check_t(t)
    method = 'unified'
    p = model.a1_params()
    m = model.m
    f1 = model.f1_norm_sq or 0.0
    if p.beta1 * gamma < 8 * m * p.beta0:
        return not_applicable(
            method, f'beta1 * gamma = {p.beta1 * gamma} < 8 m beta0'
        )
    elif f1 <= 0:
        return not_applicable(method, 'f1_norm_sq is missing or zero')
    c27 = _rate_constants(p=p, m=m, f1=f1).c27
    x = t / (p.beta2 * (p.beta1 * gamma) ** m)
    rate = c27 * (t / p.beta2) ** (1 / m) * min(
        x ** (2 - 1 / m), (1 + _log_plus(x)) ** (1 - p.q)
    )
    return make_result(method, 'unified', rate, factor=tail_factor(tail), x=x)


def poisson_tail_upper(alpha, y):
    if not alpha > 0:
        raise ValueError(f'invalid alpha: {alpha}')
    elif y < alpha + 1:
        raise PreconditionError(f'y = {y} is below alpha + 1 = {alpha + 1}')
    return math.exp(y * (1 + math.log(alpha) - math.log(y)))


def stirling_constant(y_min, y_cap=1e5):
    """
    Smallest c19 with sqrt(2 pi) n^(n + 1/2) e^(1 - n) <= (c19 y)^y for every
    y in [y_min, y_cap], n = ceil(y).

    On (n - 1, n] the ratio is decreasing in y, so its supremum sits at the
    left end of each interval.
    """
    if not 0 < y_min < y_cap:
        raise ValueError(f'invalid range: [{y_min}, {y_cap}]')
    n = np.arange(max(1, math.ceil(y_min)), math.ceil(y_cap) + 1, dtype=float)
    y_left = np.maximum(n - 1, y_min)
    log_a = 0.5 * np.log(2 * np.pi) + (n + 0.5) * np.log(n) - n + 1
    return float(np.exp(np.max(log_a / y_left - np.log(y_left))))


def poisson_lower_constants(C1, C2, y_cap=1e5):
    if not (C1 > 0 and C2 > 0):
        raise ValueError(f'invalid constants: C1={C1}, C2={C2}')
    c19 = stirling_constant(y_min=C1 * C2, y_cap=y_cap)
    c14 = min(1.0, C1) / (math.exp(1 / C2) * c19)
    return {'c19': c19, 'c14': c14, 'certified_up_to': y_cap}


def poisson_tail_lower(alpha, y, C1, C2, y_cap=1e5):
    if not alpha > C1:
        raise PreconditionError(f'alpha = {alpha} is not above C1 = {C1}')
    elif y < C2 * alpha:
        raise PreconditionError(f'y = {y} is below C2 * alpha = {C2 * alpha}')
    c14 = poisson_lower_constants(C1=C1, C2=C2, y_cap=y_cap)['c14']
    return math.exp(y * math.log(c14 * alpha / y))


def largeorder_upper(p, m, gamma, t, centred=True, tail='two'):
    _check_t(t)
    method = 'largeorder'
    if not isinstance(p, A2Params):
        return not_applicable(method, 'requires (A2) parameters')
    scale = p.alpha2 * (p.alpha1 * gamma) ** m
    if centred:
        threshold = 2 * scale
        rate = (
            (t / (2 * p.alpha2)) ** (1 / m)
            * math.log(t / (2 * math.exp(m) * scale)) / m
            if t >= threshold else None
        )
        factor = tail_factor(tail)
    else:
        threshold = scale
        rate = (
            (t / p.alpha2) ** (1 / m)
            * math.log(t / (math.exp(m) * scale)) / m
            if t >= threshold else None
        )
        factor = 1
    if rate is None:
        return not_applicable(
            method, f't = {t} is below the threshold {threshold}',
            threshold=threshold
        )
    else:
        return make_result(
            method, 'poisson-log', rate, factor=factor, threshold=threshold,
            centred=centred
        )


def _c1905d(f_L1, m, c18, span=1e6, n_grid=2000):
    def _holds(c):
        x = np.geomspace(c, c * span, n_grid)
        lhs = (x + f_L1) ** (1 / m) * np.log(c18 * (x + f_L1))
        rhs = 2 * x ** (1 / m) * np.log(x)
        return bool(np.all(lhs <= rhs))

    lo = max(f_L1, 1.0 + 1e-9)
    if _holds(lo):
        return lo
    hi = max(lo, math.e)
    for _ in range(200):
        if _holds(hi):
            break
        lo, hi = hi, 2 * hi
    else:
        raise PreconditionError('no admissible c1905d found')
    for _ in range(100):
        mid = math.sqrt(lo * hi)
        if _holds(mid):
            hi = mid
        else:
            lo = mid
        if hi / lo < 1 + 1e-12:
            break
    return hi


def largeorder_lower_detail(p, f_L1, m, gamma, t, span=1e6):
    logger = logging.getLogger(__name__)
    if not isinstance(p, A4Params):
        raise ValueError(f'invalid (A4) parameters: {p}')
    elif not f_L1 > 0:
        raise ValueError(f'invalid f_L1: {f_L1}')
    C1 = p.theta1
    C2 = (f_L1 / p.theta2) ** (1 / m) / p.theta1
    c14 = poisson_lower_constants(C1=C1, C2=C2)['c14']
    c18 = 1 / (c14 ** m * p.theta2 * p.theta1 ** m)
    c1905c = 2 * p.theta2 ** (-1 / m)
    c1905d = _c1905d(f_L1=f_L1, m=m, c18=c18, span=span)
    logger.debug(f'c14: {c14}, c18: {c18}, c1905d: {c1905d}')
    detail = {
        'c14': c14, 'c18': c18, 'c1905c': c1905c, 'c1905d': c1905d,
        'certified_grid': [c1905d * gamma ** m, c1905d * span * gamma ** m]
    }
    if not gamma > 1:
        raise PreconditionError(f'gamma = {gamma} must exceed 1')
    elif t < c1905d * gamma ** m:
        raise PreconditionError(
            f't = {t} is below c1905d * gamma^m = {c1905d * gamma ** m}'
        )
    u = t + gamma ** m * f_L1
    detail['inner_lower'] = math.exp(
        -(u / p.theta2) ** (1 / m) * math.log(c18 * u / gamma ** m)
    )
    detail['lower'] = math.exp(
        -c1905c * t ** (1 / m) * math.log(t / gamma ** m)
    )
    return detail


def largeorder_lower(p, f_L1, m, gamma, t):
    return largeorder_lower_detail(p=p, f_L1=f_L1, m=m, gamma=gamma, t=t)[
        'lower'
    ]


def lower_tail_bp(model, gamma, t, c47=1.0, fk_norms=None, tail='lower'):
    _check_t(t)
    method = 'bp'
    if tail != 'lower':
        return not_applicable(method, 'bounds the lower tail only')
    p = model.a1_params()
    m = model.m
    if not model.nonnegative:
        return not_applicable(method, 'kernel is not flagged non-negative')
    elif gamma * p.beta1 < c47:
        return not_applicable(
            method, f'gamma * beta1 = {gamma * p.beta1} < c47 = {c47}'
        )
    c181 = 2 ** (p.q + 1) * m ** 2 * (2 ** p.q * m / c47 + 1) ** (m - 1)
    rate = t ** 2 / (
        c181 * p.beta0 * p.beta2 ** 2 * (gamma * p.beta1) ** (2 * m - 1)
    )
    fk_norms = fk_norms or model.fk_norms
    details = {'c181': c181, 'rate_a1': rate}
    if fk_norms:
        m2v = math.fsum(
            gamma ** (2 * m - k) * k * math.factorial(k) * v
            for k, v in enumerate(fk_norms, start=1)
        )
        if m2v > 0:
            details['rate_exact'] = t ** 2 / (2 * m2v)
            rate = max(rate, details['rate_exact'])
    return make_result(method, 'gaussian', rate, factor=1, **details)


def wu_order1(p, gamma, t, m=1):
    _check_t(t)
    if m != 1:
        raise PreconditionError(f'requires m = 1: m = {m}')
    elif not isinstance(p, A2Params):
        raise PreconditionError('requires (A2) parameters')
    upper = math.exp(
        -(t / (2 * p.alpha2)) * math.log1p(t / (gamma * p.alpha1 * p.alpha2))
    )
    lower = math.exp(-t ** 2 / (2 * gamma * p.alpha2 ** 2 * p.alpha1))
    return (upper, lower)


def wu_bound(model, gamma, t, tail='upper'):
    _check_t(t)
    method = 'wu'
    if model.m != 1:
        return not_applicable(method, f'requires m = 1: m = {model.m}')
    elif not isinstance(model.assumption, A2Params):
        return not_applicable(method, 'requires (A2) parameters')
    elif tail != 'upper' and not model.nonnegative:
        return not_applicable(method, 'lower tail needs a non-negative kernel')
    upper, lower = wu_order1(p=model.assumption, gamma=gamma, t=t)
    prob = {'upper': upper, 'lower': lower, 'two': upper + lower}[tail]
    return make_result(
        method, ('gaussian' if tail == 'lower' else 'poisson-log'),
        (-math.log(prob) if prob > 0 else math.inf), factor=1,
        upper=upper, lower=lower
    )


def cantelli(variance, t):
    return variance / (variance + t ** 2)


def chebyshev_cantelli(variance, t, c43):
    if not variance > 0:
        raise PreconditionError(f'invalid variance: {variance}')
    elif not 0 <= t < c43 * math.sqrt(variance):
        raise PreconditionError(
            f't = {t} is outside [0, c43 sqrt(V)) = '
            f'[0, {c43 * math.sqrt(variance)})'
        )
    return math.exp(-t ** 2 / ((1 + c43 ** 2) * variance))


def chebyshev_cantelli_a1(model, gamma, t, c43=1.0, c47=1.0, tail='upper'):
    _check_t(t)
    method = 'cc'
    p = model.a1_params()
    m = model.m
    if gamma * p.beta1 < c47:
        return not_applicable(
            method, f'gamma * beta1 = {gamma * p.beta1} < c47 = {c47}'
        )
    elif model.variance is not None:
        v = model.variance
    elif model.f1_norm_sq:
        v = gamma ** (2 * m - 1) * model.f1_norm_sq
    else:
        return not_applicable(method, 'needs variance or f1_norm_sq')
    if not t < c43 * math.sqrt(v):
        return not_applicable(
            method, f't = {t} is not below c43 sqrt(V) = {c43 * math.sqrt(v)}'
        )
    c44 = (
        2 ** p.q * p.beta0 * m ** 2 * (2 ** p.q * m / c47 + 1) ** (m - 1)
        * (1 + c43 ** 2)
    )
    rate = t ** 2 / (c44 * p.beta2 ** 2 * (p.beta1 * gamma) ** (2 * m - 1))
    return make_result(
        method, 'gaussian', rate, factor=tail_factor(tail), c44=c44
    )


def clt_constants(model):
    p = model.a1_params()
    m = model.m
    f1 = model.require_f1()
    return {
        'C10': f1 ** 2 / (
            2 ** (3 * m + 7 + p.q) * (p.beta0 * m) ** 2 * m * p.beta2 ** 4
            * p.beta1 ** (4 * m - 2)
        ),
        'C11': 2 ** ((m + 5 - p.q) / 2) * p.beta0 ** -0.5 / m,
        'c162': max(1, math.ceil(math.log(p.beta0)))
    }


def clt_regime(model, gamma, s, tail='two'):
    if not s >= 0:
        raise ValueError(f'invalid s: {s}')
    method = 'clt'
    p = model.a1_params()
    m = model.m
    if not model.f1_norm_sq:
        return not_applicable(method, 'f1_norm_sq is missing or zero')
    c = clt_constants(model)
    s_max = c['C11'] * math.sqrt(gamma * p.beta1)
    if gamma * p.beta1 < 8 * m * c['c162']:
        return not_applicable(
            method, f'gamma * beta1 = {gamma * p.beta1} < 8 m c162', **c
        )
    elif s > s_max:
        return not_applicable(method, f's = {s} exceeds {s_max}', **c)
    return make_result(
        method, 'gaussian', c['C10'] * s ** 2, factor=tail_factor(tail),
        s_max=s_max, **c
    )


def moment_route_bound(model, gamma, t, tail='two'):
    _check_t(t)
    method = 'moment'
    p = model.a1_params()
    m = model.m
    gb = gamma * p.beta1
    c162 = max(1, math.ceil(math.log(p.beta0)))
    c151 = math.ceil(
        max(2 * math.e ** 2, math.ceil(math.log(p.beta0)))
        * 2 ** p.q * math.exp(1 + 1 / m) * m
    ) ** m
    window = (
        2 ** (m + 3) * math.sqrt(2 * c162 * m) * p.beta2 * gb ** (m - 0.5),
        2 ** (m + 2) * p.beta2 * gb ** m
    )
    if gb >= 8 * m * c162 and window[0] <= t <= window[1]:
        return make_result(
            method, 'gaussian',
            t ** 2 / (2 ** (2 * m + 8) * m * p.beta2 ** 2 * gb ** (2 * m - 1)),
            window=list(window), c162=c162
        )
    elif gb >= 1 and t >= c151 * p.beta2 * gb ** m:
        log_term = math.log(
            t / (2 ** (2 * m * p.q) * math.exp(m + 1) * p.beta2 * gb ** m)
        )
        return make_result(
            method, 'poisson-log',
            (t / (math.e * p.beta2)) ** (1 / m) * log_term ** (1 - p.q)
            / (2 ** (1 + p.q) * math.e * m),
            c151=c151
        )
    else:
        return not_applicable(
            method, f't = {t} is outside both moment-route ranges',
            window=list(window), c151=c151, c162=c162
        )


BOUND_METHODS = {
    'main': main_bound,
    'unified': unified_bound,
    'wu': wu_bound,
    'cc': chebyshev_cantelli_a1,
    'clt': clt_regime,
    'bp': lower_tail_bp,
    'moment': moment_route_bound
}


def evaluate(method, model, gamma, t, tail='two', **kwargs):
    if method == 'largeorder':
        return largeorder_upper(
            p=model.assumption, m=model.m, gamma=gamma, t=t, tail=tail,
            centred=kwargs.get('centred', True)
        )
    elif method == 'bp':
        return lower_tail_bp(
            model=model, gamma=gamma, t=t, c47=kwargs.get('c47', 1.0),
            tail=tail
        )
    elif method == 'cc':
        return chebyshev_cantelli_a1(
            model=model, gamma=gamma, t=t, c43=kwargs.get('c43', 1.0),
            c47=kwargs.get('c47', 1.0), tail=tail
        )
    elif method == 'clt':
        return clt_regime(model=model, gamma=gamma, s=t, tail=tail)
    elif method in BOUND_METHODS:
        return BOUND_METHODS[method](model=model, gamma=gamma, t=t, tail=tail)
    else:
        raise ValueError(f'invalid method: {method}')


def rate_curve(method, model, gamma, t_grid, tail='two', **kwargs):
    return pd.DataFrame([
        {
            't': t,
            **{
                k: v for k, v in evaluate(
                    method=method, model=model, gamma=gamma, t=t, tail=tail,
                    **kwargs
                ).to_dict().items() if k in ('regime', 'rate', 'prob_bound')
            }
        } for t in t_grid
    ])
