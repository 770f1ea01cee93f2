#!/usr/bin/env python
"""
Constant-curvature spaces, Poisson samplers and Gilbert-graph functionals.

Points of a space with curvature kappa are stored in embedding coordinates:
R^d for kappa = 0, the hyperboloid -x0^2 + |x|^2 = -1 in R^(d+1) for
kappa < 0 and the unit sphere in R^(d+1) for kappa > 0.  Distances are
rescaled by |kappa|^(-1/2).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import networkx as nx
import numpy as np
import pandas as pd
import scipy.integrate as sci
import scipy.special as scsp
import scipy.stats as scs
from networkx.algorithms.isomorphism import GraphMatcher
from scipy.spatial import cKDTree

STREAM_MAIN = 0
STREAM_CALIBRATION = 1
CDF_KNOTS = 1024
BISECTION_TOL = 1e-12
EMBEDDING_TOL = 1e-9


@dataclass(frozen=True)
class SpaceSpec:
    kappa: float = 0.0
    d: int = 2

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f'invalid d: {self.d}')
        elif not math.isfinite(self.kappa):
            raise ValueError(f'invalid kappa: {self.kappa}')

    @property
    def k(self):
        return math.sqrt(abs(self.kappa))

    @property
    def max_radius(self):
        return math.pi / (2 * self.k) if self.kappa > 0 else math.inf

    @property
    def embedding_dim(self):
        return self.d if self.kappa == 0 else self.d + 1

    def check_radius(self, r):
        if not r >= 0:
            raise ValueError(f'invalid radius: {r}')
        elif r >= self.max_radius:
            raise ValueError(
                f'radius out of range: {r} >= pi / (2 sqrt(kappa))'
                f' = {self.max_radius}'
            )

    def sn(self, s):
        s = np.asarray(s, dtype=float)
        if self.kappa == 0:
            return s
        elif self.kappa < 0:
            return np.sinh(self.k * s) / self.k
        else:
            return np.sin(self.k * s) / self.k


def sphere_area(j):
    """Surface area 2 pi^(j/2) / Gamma(j/2) of the unit sphere in R^j."""
    if j < 1:
        raise ValueError(f'invalid dimension: {j}')
    return 2 * math.pi ** (j / 2) / scsp.gamma(j / 2)


def unit_ball_volume(d):
    if d < 1:
        raise ValueError(f'invalid dimension: {d}')
    return math.pi ** (d / 2) / scsp.gamma(d / 2 + 1)


def _power_integral(kind, n, x):
    # integral over [0, x] of sinh^n, sin^n or cosh^n by the reduction formula
    x = np.asarray(x, dtype=float)
    if kind == 'sinh':
        first = 2 * np.sinh(x / 2) ** 2
        boundary = lambda j: np.sinh(x) ** (j - 1) * np.cosh(x) / j
        coef = -1.0
    elif kind == 'sin':
        first = 2 * np.sin(x / 2) ** 2
        boundary = lambda j: -np.sin(x) ** (j - 1) * np.cos(x) / j
        coef = 1.0
    elif kind == 'cosh':
        first = np.sinh(x)
        boundary = lambda j: np.cosh(x) ** (j - 1) * np.sinh(x) / j
        coef = 1.0
    else:
        raise ValueError(f'invalid kind: {kind}')
    if n < 0:
        raise ValueError(f'invalid power: {n}')
    value = x.copy() if n % 2 == 0 else first
    for j in range(2 + n % 2, n + 1, 2):
        value = boundary(j) + coef * (j - 1) / j * value
    return value


def _ball_kind(space):
    return 'sinh' if space.kappa < 0 else 'sin'


def ball_volume(space, r):
    r = np.asarray(r, dtype=float)
    space.check_radius(float(np.max(r)))
    if space.kappa == 0:
        value = unit_ball_volume(space.d) * r ** space.d
    else:
        value = (
            sphere_area(space.d) * space.k ** (-space.d)
            * _power_integral(_ball_kind(space), space.d - 1, space.k * r)
        )
    return float(value) if value.ndim == 0 else value


def ball_volume_quad(space, r):
    space.check_radius(r)
    value, _ = sci.quad(
        lambda s: float(space.sn(s)) ** (space.d - 1), 0, r,
        epsabs=0, epsrel=1e-13, limit=200
    )
    return sphere_area(space.d) * value


def dist(space, x, y):
    v = _check_embedding(space, x) - _check_embedding(space, y)
    chord = _minkowski_norm(v) if space.kappa < 0 else np.linalg.norm(v)
    return float(_chord_to_distance(space, chord))


def _minkowski_norm(v):
    v = np.asarray(v, dtype=float)
    return np.sqrt(np.maximum(
        np.sum(v[..., 1:] ** 2, axis=-1) - v[..., 0] ** 2, 0.0
    ))


def _chord_to_distance(space, chord):
    if space.kappa == 0:
        return chord
    elif space.kappa < 0:
        return 2 * np.arcsinh(chord / 2) / space.k
    else:
        return 2 * np.arcsin(np.minimum(chord / 2, 1.0)) / space.k


def _check_embedding(space, points):
    points = np.asarray(points, dtype=float)
    if points.shape[-1] != space.embedding_dim:
        raise ValueError(
            f'invalid embedding: expected {space.embedding_dim} coordinates'
        )
    if space.kappa < 0:
        residual = (
            np.sum(points[..., 1:] ** 2, axis=-1) - points[..., 0] ** 2 + 1
        )
        if np.any(points[..., 0] <= 0) or np.any(
                np.abs(residual) > EMBEDDING_TOL * points[..., 0] ** 2):
            raise ValueError('invalid embedding: not on the hyperboloid')
    elif space.kappa > 0:
        if np.any(np.abs(np.linalg.norm(points, axis=-1) - 1) > EMBEDDING_TOL):
            raise ValueError('invalid embedding: not on the unit sphere')
    return points


def pairwise_distances(space, points):
    points = np.asarray(points, dtype=float)
    diff = points[:, None, :] - points[None, :, :]
    if space.kappa < 0:
        chord = _minkowski_norm(diff)
    else:
        chord = np.linalg.norm(diff, axis=-1)
    return _chord_to_distance(space, chord)


def make_rng(seed, stream=STREAM_MAIN, replicate=0):
    return np.random.Generator(
        np.random.Philox(
            np.random.SeedSequence(seed, spawn_key=(stream, replicate))
        )
    )


@lru_cache(maxsize=128)
def _cdf_table(kind, n, scale, r):
    knots = np.linspace(0, r, CDF_KNOTS + 1)
    values = _power_integral(kind, n, scale * knots)
    return knots, values / values[-1]


def _inverse_cdf(u, kind, n, scale, r):
    """Invert s -> P(scale * s) / P(scale * r) by bracketed bisection."""
    knots, values = _cdf_table(kind, n, scale, r)
    idx = np.clip(np.searchsorted(values, u, side='right'), 1, CDF_KNOTS)
    lo = knots[idx - 1]
    hi = knots[idx]
    target = u * _power_integral(kind, n, scale * r)
    for _ in range(100):
        if lo.size == 0 or np.max(hi - lo) <= BISECTION_TOL * r:
            break
        mid = (lo + hi) / 2
        below = _power_integral(kind, n, scale * mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return (lo + hi) / 2


def _uniform_directions(rng, size, d):
    v = rng.standard_normal(size=(size, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass(frozen=True)
class PointSample:
    space: SpaceSpec
    r: float
    points: np.ndarray = field(compare=False, repr=False)
    seed: int = 0
    replicate: int = 0

    def __post_init__(self):
        if self.points.ndim != 2 or (
                self.points.shape[1] != self.space.embedding_dim):
            raise ValueError(f'invalid points shape: {self.points.shape}')

    @property
    def count(self):
        return self.points.shape[0]


def sample_ppp_ball(space, r, gamma, seed, replicate=0, stream=STREAM_MAIN):
    logger = logging.getLogger(__name__)
    if not gamma >= 0:
        raise ValueError(f'invalid gamma: {gamma}')
    space.check_radius(r)
    rng = make_rng(seed=seed, stream=stream, replicate=replicate)
    mu = gamma * float(ball_volume(space, r))
    n_points = int(scs.poisson.rvs(mu, random_state=rng)) if mu > 0 else 0
    logger.debug(f'mu: {mu}, n_points: {n_points}')
    u = rng.uniform(size=n_points)
    directions = _uniform_directions(rng, n_points, space.d)
    if space.kappa == 0:
        radii = r * u ** (1 / space.d)
        points = radii[:, None] * directions
    else:
        radii = _inverse_cdf(
            u, kind=_ball_kind(space), n=space.d - 1, scale=space.k, r=r
        )
        ks = space.k * radii
        if space.kappa < 0:
            head, tail = np.cosh(ks), np.sinh(ks)
        else:
            head, tail = np.cos(ks), np.sin(ks)
        points = np.column_stack([head, tail[:, None] * directions])
    return PointSample(
        space=space, r=r, points=points, seed=seed,
        replicate=replicate
    )


def point_count(sample):
    return sample.count


def falling_factorial_stat(sample, m, c=1.0):
    return c * math.perm(sample.count, m)


def near_pairs(sample, rho, brute_force=False):
    """Return index pairs i < j within distance rho and their distances."""
    n = sample.count
    if n < 2:
        return np.empty((0, 2), dtype=int), np.empty(0)
    elif sample.space.kappa == 0 and not brute_force:
        pairs = cKDTree(sample.points).query_pairs(rho, output_type='ndarray')
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        d = np.linalg.norm(
            sample.points[pairs[:, 0]] - sample.points[pairs[:, 1]], axis=1
        )
        return pairs, d
    else:
        dm = pairwise_distances(sample.space, sample.points)
        i, j = np.nonzero(np.triu(dm <= rho, k=1))
        return np.column_stack([i, j]), dm[i, j]


def edge_count(sample, rho, brute_force=False):
    return len(near_pairs(sample, rho, brute_force=brute_force)[0])


def power_edge_length(sample, rho, tau, brute_force=False):
    if not tau >= 0:
        raise ValueError(f'invalid tau: {tau}')
    _, d = near_pairs(sample, rho, brute_force=brute_force)
    return math.fsum(d ** tau)


SHIPPED_GRAPHS = {
    'edge': lambda: nx.path_graph(2),
    'path3': lambda: nx.path_graph(3),
    'triangle': lambda: nx.complete_graph(3),
    'star3': lambda: nx.star_graph(3),
    'cycle4': lambda: nx.cycle_graph(4)
}


def make_graph(name):
    if name not in SHIPPED_GRAPHS:
        raise ValueError(f'unsupported graph: {name}')
    return SHIPPED_GRAPHS[name]()


@lru_cache(maxsize=None)
def _automorphism_count(edges):
    h = nx.Graph(list(edges))
    return sum(1 for _ in GraphMatcher(h, h).isomorphisms_iter())


def included_subgraph_count(sample, rho, H):
    logger = logging.getLogger(__name__)
    m = H.number_of_nodes()
    if not (2 <= m <= 5 and nx.is_connected(H)):
        raise ValueError(f'unsupported graph: {H}')
    n_diam = nx.diameter(H)
    edges, _ = near_pairs(sample, rho)
    g = nx.Graph()
    g.add_nodes_from(range(sample.count))
    g.add_edges_from(map(tuple, edges))
    near = [[] for _ in range(sample.count)]
    for i, j in near_pairs(sample, n_diam * rho)[0]:
        near[i].append(j)
    aut = _automorphism_count(tuple(sorted(H.edges())))
    n_monomorphisms = 0
    for v in range(sample.count):
        for rest in itertools.combinations(sorted(near[v]), m - 1):
            sub = g.subgraph((v, *rest))
            if sub.number_of_edges() >= H.number_of_edges():
                n_monomorphisms += sum(
                    1 for _ in
                    GraphMatcher(sub, H).subgraph_monomorphisms_iter()
                )
    logger.debug(f'monomorphisms: {n_monomorphisms}, automorphisms: {aut}')
    return n_monomorphisms // aut


def chord_length(d, r, s):
    s = np.asarray(s, dtype=float)
    if d < 2:
        raise ValueError(f'invalid d: {d}')
    elif np.any(s < 0) or np.any(s > r):
        raise ValueError(f's out of range [0, {r}]: {s}')
    a = np.arccosh(np.maximum(np.cosh(r) / np.cosh(s), 1.0))
    value = sphere_area(d - 1) * _power_integral('sinh', d - 2, a)
    return float(value) if value.ndim == 0 else value


def hitting_mass(d, r):
    return 2 * float(_power_integral('cosh', d - 1, r))


def chord_moment_integral(d, k, r):
    value, _ = sci.quad(
        lambda s: math.cosh(s) ** (d - 1) * chord_length(d, r, s) ** k,
        0, r, epsabs=0, epsrel=1e-11, limit=200
    )
    return 2 * value


@dataclass(frozen=True)
class ChordSample:
    d: int
    r: float
    distances: np.ndarray = field(compare=False, repr=False)
    seed: int = 0
    replicate: int = 0

    @property
    def count(self):
        return self.distances.shape[0]


def sample_hyperbolic_chords(d, r, gamma, seed, replicate=0,
                             stream=STREAM_MAIN):
    if not (gamma >= 0 and r > 0):
        raise ValueError(f'invalid arguments: gamma={gamma}, r={r}')
    rng = make_rng(seed=seed, stream=stream, replicate=replicate)
    mu = gamma * hitting_mass(d, r)
    n_chords = int(scs.poisson.rvs(mu, random_state=rng)) if mu > 0 else 0
    distances = _inverse_cdf(
        rng.uniform(size=n_chords), kind='cosh', n=d - 1, scale=1.0, r=r
    )
    return ChordSample(
        d=d, r=r, distances=np.clip(distances, 0, r), seed=seed,
        replicate=replicate
    )


def f1_hyperbolic(chords):
    if chords.count == 0:
        return 0.0
    return math.fsum(chord_length(chords.d, chords.r, chords.distances))


def dump_samples(samples, csv_path):
    logger = logging.getLogger(__name__)
    frames = []
    for sample in samples:
        if isinstance(sample, ChordSample):
            coords = pd.DataFrame({'s': sample.distances})
        else:
            coords = pd.DataFrame(
                sample.points,
                columns=[f'x{i}' for i in range(sample.points.shape[1])]
            )
        coords.insert(0, 'index', np.arange(len(coords)))
        coords.insert(0, 'replicate', sample.replicate)
        frames.append(coords)
    df = (
        pd.concat(frames, ignore_index=True) if frames
        else pd.DataFrame(columns=['replicate', 'index'])
    )
    logger.info(f'Write CSV data: {csv_path}')
    df.to_csv(csv_path, index=False)
    return df
