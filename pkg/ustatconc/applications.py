#!/usr/bin/env python
"""
Assumption-parameter presets for geometric U-statistics.

Random geometric graph functionals in constant-curvature spaces, Euclidean
hyperplane intrinsic-volume functionals and the hyperbolic hyperplane
surface functional.
"""

import logging
import math
from dataclasses import asdict, dataclass

import networkx as nx
import scipy.optimize as sco

from .bounds import make_result, not_applicable, tail_factor
from .geometry import (ball_volume, chord_moment_integral, make_graph,
                       sphere_area, unit_ball_volume)
from .model import A1Params, A2Params, UStatModel
from .util import LargeValue, PreconditionError, exp_or_large


def _finite_exp(log_value):
    v = exp_or_large(log_value)
    if isinstance(v, LargeValue):
        raise PreconditionError(f'value exceeds double range: {v}')
    return v


def _div_exp(x, log_w):
    # x * e^(-log_w) for x >= 0
    return math.exp(math.log(x) - log_w) if x > 0 else 0.0


@dataclass(frozen=True)
class WindowSpec:
    volume: float
    inradius: float
    is_ball: bool = False
    radius: float = None
    no_antipodal: bool = True

    def __post_init__(self):
        if not (self.volume > 0 and self.inradius > 0):
            raise ValueError(f'invalid window: {self}')
        elif self.is_ball and self.radius is None:
            object.__setattr__(self, 'radius', self.inradius)

    @classmethod
    def ball(cls, space, r):
        return cls(
            volume=ball_volume(space, r), inradius=r, is_ball=True, radius=r
        )

    def check(self, space):
        if self.volume < ball_volume(space, self.inradius) * (1 - 1e-12):
            raise ValueError(
                f'window volume {self.volume} is below the inscribed ball'
            )
        elif space.kappa > 0 and not self.no_antipodal:
            raise ValueError('window must not contain antipodal points')


@dataclass(frozen=True)
class GraphFunctionalSpec:
    kind: str = 'included_subgraph'
    graph: str = 'edge'
    tau: float = 0.0
    induced: bool = False

    def __post_init__(self):
        if self.kind not in ('included_subgraph', 'power_edge', 'edge_count'):
            raise ValueError(f'invalid kind: {self.kind}')
        elif not self.tau >= 0:
            raise ValueError(f'invalid tau: {self.tau}')
        h = self.H
        if not nx.is_connected(h):
            raise ValueError(f'graph is not connected: {self.graph}')
        elif self.induced and (
                h.number_of_edges() != self.m * (self.m - 1) // 2):
            raise ValueError(
                f'induced counts need a complete graph: {self.graph}'
            )

    @property
    def H(self):
        return make_graph(
            self.graph if self.kind == 'included_subgraph' else 'edge'
        )

    @property
    def m(self):
        return self.H.number_of_nodes()

    @property
    def n(self):
        return nx.diameter(self.H)


@dataclass(frozen=True)
class PresetParams:
    beta1: float
    beta2: float
    c27: float
    gamma_min: float
    f1_norm_sq: float

    def __iter__(self):
        return iter((self.beta1, self.beta2, self.c27))

    def to_dict(self):
        return asdict(self)


def subgraph_params(space, window, H_spec, rho, s=0.0):
    logger = logging.getLogger(__name__)
    m, n = H_spec.m, H_spec.n
    window.check(space)
    if not 0 <= s <= 1:
        raise ValueError(f'invalid s: {s}')
    elif not 0 < rho <= window.inradius / n:
        raise ValueError(f'rho too large: {rho} > r(W) / n')
    h_b = ball_volume(space, n * rho)
    h_w = window.volume
    h_half = ball_volume(space, rho / 2)
    h_in = ball_volume(space, window.inradius / 2)
    ratio = (
        m ** 2 / math.factorial(m) ** 2 * (h_half / h_b) ** (2 * m - 2)
        * (h_b / h_w) ** (s * (1 - 1 / m)) * (h_in / h_w)
    )
    p = PresetParams(
        beta1=h_b ** (1 - s / m) * h_w ** (s / m),
        beta2=(h_w / h_b) ** ((1 - s) / 2),
        c27=2 ** (-17 * m - 4) * m ** (-2 * m - 3) * min(1.0, ratio),
        gamma_min=8 * m / (h_b ** (1 - s / m) * h_w ** (s / m)),
        f1_norm_sq=(
            m ** 2 / math.factorial(m) ** 2 * h_half ** (2 * m - 2) * h_in
        )
    )
    logger.debug(f'subgraph params: {p}')
    return p


def power_edge_params(space, window, rho, tau, s=0.0):
    window.check(space)
    if not 0 <= s <= 1:
        raise ValueError(f'invalid s: {s}')
    elif not tau >= 0:
        raise ValueError(f'invalid tau: {tau}')
    elif not 0 < rho <= window.inradius:
        raise ValueError(f'invalid rho: {rho}')
    h_b = ball_volume(space, rho)
    h_w = window.volume
    h_half = ball_volume(space, rho / 2)
    h_in = ball_volume(space, window.inradius)
    beta1 = h_w ** (s / 2) * h_b ** (1 - s / 2)
    return PresetParams(
        beta1=beta1,
        beta2=rho ** tau / 2 * (h_w / h_b) ** ((1 - s) / 2),
        c27=(
            2 ** (-47 - 2 * tau) * (h_half / h_b) ** 2 * (h_b / h_w) ** (s / 2)
            * (h_in / h_w)
        ),
        gamma_min=16 / beta1,
        f1_norm_sq=2 ** (-4 - 2 * tau) * rho ** (2 * tau) * h_half ** 2 * h_in
    )


def fixed_degree_radius(space, delta, gamma, window=None):
    if not delta >= 16:
        raise ValueError(f'invalid delta: {delta}')
    elif not gamma > 0:
        raise ValueError(f'invalid gamma: {gamma}')
    hi = space.max_radius * (1 - 1e-12) if space.kappa > 0 else 1.0
    if space.kappa <= 0:
        for _ in range(2000):
            if gamma * ball_volume(space, hi) >= delta:
                break
            hi *= 2
    if gamma * ball_volume(space, hi) < delta:
        raise PreconditionError(
            f'no root in the admissible bracket: (0, {hi}]'
        )
    rho = sco.brentq(
        lambda x: gamma * ball_volume(space, x) - delta, 0.0, hi,
        xtol=1e-300, rtol=1e-14, maxiter=500
    )
    limit = min(
        (1 / space.k if space.kappa != 0 else math.inf),
        (window.inradius if window is not None else math.inf)
    )
    if not rho < limit:
        raise PreconditionError(
            f'rho = {rho} is not below min(|kappa|^(-1/2), r(W)) = {limit}'
        )
    return rho


def ball_intrinsic_volumes(d, r=1.0):
    return [
        math.comb(d, j) * unit_ball_volume(d) / unit_ball_volume(d - j)
        * r ** j
        if j < d else unit_ball_volume(d) * r ** d
        for j in range(d + 1)
    ]


def box_intrinsic_volumes(sides):
    # elementary symmetric polynomials of the side lengths
    e = [1.0] + [0.0] * len(sides)
    for a in sides:
        for j in range(len(sides), 0, -1):
            e[j] += a * e[j - 1]
    return e


def euclidean_hyperplane_params(d, m, i, nu):
    if not 1 <= m <= d:
        raise ValueError(f'invalid m: {m}')
    elif not 0 <= i <= d - m:
        raise ValueError(f'invalid i: {i}')
    elif len(nu) != d + 1 or min(nu) < 0 or not nu[1] > 0:
        raise ValueError(f'invalid intrinsic volumes: {nu}')
    elif not nu[i] > 0:
        raise ValueError(f'invalid intrinsic volume nu_{i}: {nu[i]}')
    alpha1 = sphere_area(d + 1) / (math.pi * sphere_area(d)) * nu[1]
    alpha2 = nu[i] / math.factorial(m)
    x = (
        m * sphere_area(i + 1) * nu[i + m]
        / (alpha2 * sphere_area(i + m + 1) * (math.pi * nu[1]) ** m)
    )
    return PresetParams(
        beta1=alpha1, beta2=alpha2,
        c27=2 ** (-17 * m - 4) * m ** (-2 * m - 3) * min(1.0, x ** 2),
        gamma_min=8 * m / alpha1,
        f1_norm_sq=min(1.0, x ** 2) * alpha2 ** 2 * alpha1 ** (2 * m - 1)
    )


def hyperbolic_f1_params(d, r):
    if d < 2:
        raise ValueError(f'invalid d: {d}')
    elif not r > 0:
        raise ValueError(f'invalid r: {r}')
    elif d == 2:
        return A1Params(
            beta0=1.0, beta1=2 * _finite_exp(r), beta2=4.0, q=1.0
        )
    elif d == 3:
        return A1Params(
            beta0=1.0, beta1=2 * r,
            beta2=_finite_exp(math.log(sphere_area(2)) + r), q=0.0
        )
    else:
        return A1Params(
            beta0=1.0, beta1=2.0,
            beta2=_finite_exp(
                math.log(sphere_area(d - 1) / (d - 2)) + r * (d - 2)
            ),
            q=0.0
        )


def _hyperbolic_wu_rate(d, r, gamma, t):
    if d == 2:
        return t / (4 * r) * math.log1p(_div_exp(t * r / (32 * gamma), r))
    elif d == 3:
        log_w = math.log(sphere_area(2)) + r
        return _div_exp(t, log_w) * math.log1p(
            _div_exp(t / (4 * gamma * r), log_w)
        )
    else:
        log_w = math.log(sphere_area(d - 1)) + r * (d - 2)
        return 2 ** (d - 3) * (d - 2) * _div_exp(t, log_w) * math.log1p(
            _div_exp((d - 2) * t / (2 ** (d - 1) * gamma), log_w)
        )


def hyperbolic_rate(d, r, gamma, t, method='wu', tail='two'):
    if not t >= 0:
        raise ValueError(f'invalid t: {t}')
    elif not (gamma > 0 and r > 0) or d < 2:
        raise ValueError(f'invalid arguments: d={d}, r={r}, gamma={gamma}')
    name = f'hyperbolic_{method}'
    if method == 'wu':
        return make_result(
            name, 'poisson-log', _hyperbolic_wu_rate(d, r, gamma, t),
            factor=tail_factor(tail)
        )
    elif method != 'a1':
        raise ValueError(f'invalid method: {method}')
    elif d == 2:
        if gamma < 4 * math.exp(-r):
            return not_applicable(name, f'gamma = {gamma} < 4 e^(-r)')
        rate = t / 2 ** 31 * min(_div_exp(t / (8 * gamma), r), 1.0)
        return make_result(name, 'unified', rate, factor=tail_factor(tail))
    else:
        beta1 = 2 * r if d == 3 else 2.0
        if gamma < 8 / beta1:
            return not_applicable(name, f'gamma = {gamma} < 8 / beta1')
        log_beta_p = math.log(sphere_area(d - 1) / (d - 2)) + (
            math.log(r) + r if d == 3 else r * (d - 2)
        )
        x = _div_exp(t / gamma, log_beta_p)
        rate = (
            2 ** (-4 * d - 22) / sphere_area(d - 1) * _div_exp(t, r * (d - 2))
            * min(x, 1 + (math.log(x) if x > 1 else 0.0))
        )
        return make_result(
            name, 'unified', rate, factor=tail_factor(tail),
            beta_prime=exp_or_large(log_beta_p)
        )


def _log_chord2_lower(d, r):
    if d == 2:
        return r
    elif d == 3:
        return math.log(2 ** -6 * sphere_area(2) ** 2 * r) + 2 * r
    else:
        return (
            (-4 * d + 6) * math.log(2) + 2 * math.log(sphere_area(d - 1))
            - 3 * math.log(d - 2) + 2 * r * (d - 2)
        )


def hyperbolic_variance_window(d, r, gamma):
    """
    Return (lower, upper) for Var F; each is a float or a LargeValue once it
    leaves double range.
    """
    if not (r >= 3 and gamma >= 1):
        raise PreconditionError(
            f'needs r >= 3 and gamma >= 1: r={r}, gamma={gamma}'
        )
    log_lower = math.log(gamma) + _log_chord2_lower(d, r)
    if d == 2:
        log_upper = math.log(2 ** 6 * gamma) + r
    elif d == 3:
        log_upper = math.log(2 * sphere_area(2) ** 2 * gamma * r) + 2 * r
    else:
        log_upper = (
            math.log(2 * sphere_area(d - 1) ** 2 * (d - 2) ** -2 * gamma)
            + 2 * r * (d - 2)
        )
    return (exp_or_large(log_lower), exp_or_large(log_upper))


def hyperbolic_chord_moment_bounds(d, k, r):
    """
    Upper bound of the k-th chord moment integral and, for k = 2 and r >= 3,
    its lower bound (None otherwise).
    """
    if k < 2 or d < 2:
        raise ValueError(f'invalid arguments: d={d}, k={k}')
    elif not r > 0:
        raise ValueError(f'invalid r: {r}')
    if d == 2:
        log_upper = math.log(2 * 4 ** k * math.factorial(k)) + r
    elif d == 3 and k == 2:
        log_upper = math.log(2 * sphere_area(2) ** 2 * r) + 2 * r
    else:
        log_upper = (
            math.log(2 * sphere_area(d - 1) ** k * (d - 2) ** -k)
            + r * k * (d - 2)
        )
    lower = (
        exp_or_large(_log_chord2_lower(d, r)) if k == 2 and r >= 3 else None
    )
    return (exp_or_large(log_upper), lower)


def hyperbolic_gaussian_tail(d, r, gamma, s):
    name = 'hyperbolic_gaussian'
    if not (r >= 3 and gamma >= 1):
        return not_applicable(name, 'needs r >= 3 and gamma >= 1')
    elif d == 2:
        rate = 2 ** -8 * s ** 2
        s_max = float(
            exp_or_large(math.log(2 ** 5 / r) + (math.log(gamma) + r) / 2)
        )
    elif d == 3:
        rate, s_max = 2 ** -9 * s ** 2, 2 ** 5 * math.sqrt(r * gamma)
    else:
        rate = 2 ** (-4 * d + 3) * s ** 2
        s_max = 2 ** (3 * d - 3) * math.sqrt((d - 2) * gamma)
    if not 0 <= s <= s_max:
        return not_applicable(name, f's = {s} is outside [0, {s_max}]')
    return make_result(name, 'gaussian', rate, s_max=s_max)


def hyperbolic_poisson_tail(d, gamma, s):
    name = 'hyperbolic_poisson'
    if d < 4 or gamma < 1:
        return not_applicable(name, 'needs d >= 4 and gamma >= 1')
    elif not s >= 0:
        raise ValueError(f'invalid s: {s}')
    a = 2 ** (2 * d - 3) * gamma
    return make_result(name, 'poisson-log', (s + a) * math.log1p(s / a) - s)


def euclidean_subgraph_constants(d, m, n):
    kd = unit_ball_volume(d)
    base = m ** (-4 * m - 2) * 2 ** (-15 * m - 2 * m * d + d - 6)
    return {
        'c32': base * kd ** (1 - 2 * m) * n ** (-d * (4 * m - 4)),
        'c33': 8 * m / (kd * n ** d),
        'c34': kd ** m * n ** (d * m - d / 2),
        'c35': math.e * kd ** -m * n ** (-d * m + d / 2),
        'c36': base * n ** (-d * (2 * m - 2 - 1 / (2 * m))),
        'c37': (
            m ** (-6 * m - 1) * 2 ** (-13 * m - 4 * m * d + 2 * d - 7)
            * n ** (-d * (4 * m - 4))
        ),
        'c38': (
            m ** (-4 * m - 3 + 1 / (2 * m)) * 2 ** (-15 * m - 2 * m * d - 5)
            * kd ** (1 - 1 / (2 * m)) * n ** (-d * (2 * m - 2 - 1 / (2 * m)))
        ),
        'c40': math.e * kd ** -0.5 * (2 ** (d - 1) * m * n ** d) ** (-m + 0.5),
        'c41': kd ** 0.5 * (2 ** (d - 1) * m * n ** d) ** (m - 0.5)
    }


def euclidean_subgraph_bound(d, m, n, r, rho, gamma, t, tail='two'):
    name = 'euclidean_subgraph'
    c = euclidean_subgraph_constants(d, m, n)
    if not rho <= r / n:
        return not_applicable(name, f'rho = {rho} > r / n')
    elif gamma < c['c33'] * rho ** -d:
        return not_applicable(name, f'gamma = {gamma} < c33 rho^(-d)')
    a = rho ** d * gamma
    u = rho / r
    threshold = c['c34'] * u ** (-d / 2) * a ** m
    if t <= threshold:
        return make_result(
            name, 'gaussian', c['c32'] * u ** d * a ** (1 - 2 * m) * t ** 2,
            factor=tail_factor(tail), threshold=threshold
        )
    log_term = math.log(c['c35'] * u ** (d / 2) * t / a ** m)
    return make_result(
        name, 'poisson-log',
        c['c36'] * u ** (d / (2 * m)) * t ** (1 / m) * max(0.0, log_term),
        factor=tail_factor(tail), threshold=threshold
    )


def euclidean_subgraph_variance_lower(d, m, r, rho, gamma):
    return (
        (unit_ball_volume(d) / (m * 2 ** (d - 1))) ** (2 * m - 1)
        * (rho ** d * gamma) ** (2 * m - 1) * (r / rho) ** d
    )


def euclidean_subgraph_clt_bound(d, m, n, rho, gamma, z, tail='two'):
    name = 'euclidean_subgraph_clt'
    c = euclidean_subgraph_constants(d, m, n)
    if gamma < c['c33'] * rho ** -d:
        return not_applicable(name, f'gamma = {gamma} < c33 rho^(-d)')
    a = rho ** d * gamma
    z_max = c['c41'] * math.sqrt(a)
    if z <= z_max:
        return make_result(
            name, 'gaussian', c['c37'] * z ** 2, factor=tail_factor(tail),
            z_max=z_max
        )
    log_term = math.log(c['c40'] * z / math.sqrt(a))
    return make_result(
        name, 'poisson-log',
        c['c38'] * a ** (1 - 1 / (2 * m)) * z ** (1 / m) * max(0.0, log_term),
        factor=tail_factor(tail), z_max=z_max
    )


def _preset_model(m, p, name, **notes):
    return UStatModel(
        m=m,
        assumption=A1Params(beta0=1.0, beta1=p.beta1, beta2=p.beta2, q=0.0),
        f1_norm_sq=p.f1_norm_sq, nonnegative=True, f1_is_lower_bound=True,
        name=name, notes={**p.to_dict(), **notes}
    )


def subgraph_model(space, window, H_spec, rho, s=0.0):
    return _preset_model(
        m=H_spec.m, p=subgraph_params(space, window, H_spec, rho, s=s),
        name=f'subgraph-{H_spec.graph}', kappa=space.kappa, d=space.d,
        rho=rho, s=s
    )


def power_edge_model(space, window, rho, tau, s=0.0):
    return _preset_model(
        m=2, p=power_edge_params(space, window, rho, tau, s=s),
        name='power-edge', kappa=space.kappa, d=space.d, rho=rho, tau=tau, s=s
    )


def euclidean_hyperplane_model(d, m, i, nu):
    p = euclidean_hyperplane_params(d, m, i, nu)
    return UStatModel(
        m=m, assumption=A2Params(alpha1=p.beta1, alpha2=p.beta2),
        f1_norm_sq=p.f1_norm_sq, nonnegative=True, f1_is_lower_bound=True,
        name='euclidean-hyperplane', notes={**p.to_dict(), 'd': d, 'i': i}
    )


def hyperbolic_model(d, r):
    f1 = chord_moment_integral(d, 2, r)
    return UStatModel(
        m=1, assumption=hyperbolic_f1_params(d, r), f1_norm_sq=f1,
        nonnegative=True, fk_norms=(f1,),
        f_L1=chord_moment_integral(d, 1, r), name='hyperbolic-hyperplane',
        notes={'d': d, 'r': r}
    )
