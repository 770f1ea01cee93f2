#!/usr/bin/env python

import math

import networkx as nx
import numpy as np
import pandas as pd
import pytest

from ustatconc.geometry import (STREAM_CALIBRATION, PointSample, SpaceSpec,
                                ball_volume, ball_volume_quad,
                                chord_length, chord_moment_integral, dist,
                                dump_samples, edge_count, f1_hyperbolic,
                                falling_factorial_stat, hitting_mass,
                                included_subgraph_count, make_graph,
                                make_rng, pairwise_distances, point_count,
                                power_edge_length, sample_hyperbolic_chords,
                                sample_ppp_ball, sphere_area)


@pytest.mark.parametrize('kappa, d, r, expected', [
    (0, 2, 1, math.pi),
    (-1, 2, 1, 2 * math.pi * (math.cosh(1) - 1)),
    (1, 2, math.pi / 4, 2 * math.pi * (1 - math.cos(math.pi / 4))),
    (0, 3, 2, 4 / 3 * math.pi * 8)
])
def test_ball_volume(kappa, d, r, expected):
    assert ball_volume(SpaceSpec(kappa=kappa, d=d), r) == pytest.approx(
        expected, rel=1e-12
    )


@pytest.mark.parametrize('kappa, d, r', [
    (-1, 3, 2.5), (-0.25, 4, 3), (-1, 5, 1.2), (1, 3, 1.2), (4, 4, 0.7)
])
def test_ball_volume_matches_quadrature(kappa, d, r):
    space = SpaceSpec(kappa=kappa, d=d)
    assert ball_volume(space, r) == pytest.approx(
        ball_volume_quad(space, r), rel=1e-10
    )


def test_ball_volume_vectorizes():
    space = SpaceSpec(kappa=-1, d=3)
    r = np.array([0.5, 1.0])
    assert ball_volume(space, r) == pytest.approx(
        [ball_volume(space, 0.5), ball_volume(space, 1.0)]
    )


def test_spherical_radius_out_of_range():
    with pytest.raises(ValueError, match='radius out of range'):
        ball_volume(SpaceSpec(kappa=1, d=2), math.pi / 2)


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_dist_euclidean():
    assert dist(SpaceSpec(), [0, 0], [3, 4]) == pytest.approx(5)


def test_dist_hyperbolic_through_origin():
    space = SpaceSpec(kappa=-1, d=2)
    x = [math.cosh(1), math.sinh(1), 0]
    y = [math.cosh(1), -math.sinh(1), 0]
    assert dist(space, x, y) == pytest.approx(2, rel=1e-12)


def test_dist_spherical():
    space = SpaceSpec(kappa=4, d=2)
    assert dist(space, [1, 0, 0], [0, 1, 0]) == pytest.approx(math.pi / 4)


@pytest.mark.parametrize('kappa, r', [(-1, 2.0), (0, 2.0), (1, 1.2)])
def test_dist_is_a_metric_on_random_triples(kappa, r):
    space = SpaceSpec(kappa=kappa, d=3)
    points = sample_ppp_ball(
        space, r=r, gamma=80 / ball_volume(space, r), seed=21
    ).points
    rng = np.random.default_rng(0)
    for i, j, k in rng.integers(len(points), size=(300, 3)):
        x, y, z = points[i], points[j], points[k]
        assert dist(space, x, y) == pytest.approx(dist(space, y, x), abs=1e-9)
        assert dist(space, x, z) <= (
            dist(space, x, y) + dist(space, y, z) + 1e-9
        )
    assert dist(space, points[0], points[0]) == pytest.approx(0, abs=1e-9)


def test_dist_rejects_points_off_the_model():
    with pytest.raises(ValueError, match='hyperboloid'):
        dist(SpaceSpec(kappa=-1, d=2), [1, 1, 0], [1, 0, 0])
    with pytest.raises(ValueError, match='coordinates'):
        dist(SpaceSpec(), [0, 0, 0], [1, 0, 0])


def test_pairwise_distances_agree_with_dist():
    space = SpaceSpec(kappa=-1, d=2)
    sample = sample_ppp_ball(space, r=2, gamma=2, seed=3)
    dm = pairwise_distances(space, sample.points)
    assert dm.shape == (sample.count, sample.count)
    assert np.allclose(dm, dm.T)
    if sample.count >= 2:
        assert dm[0, 1] == pytest.approx(
            dist(space, sample.points[0], sample.points[1]), rel=1e-9
        )


def test_make_rng_streams_are_reproducible_and_distinct():
    a = make_rng(1, replicate=4).uniform(size=3)
    assert np.array_equal(a, make_rng(1, replicate=4).uniform(size=3))
    assert not np.array_equal(a, make_rng(1, replicate=5).uniform(size=3))
    assert not np.array_equal(
        a, make_rng(1, stream=STREAM_CALIBRATION, replicate=4).uniform(size=3)
    )


@pytest.mark.parametrize('kappa, d, r', [(0, 2, 1), (-1, 2, 2), (1, 3, 1)])
def test_sample_ppp_ball_stays_in_ball(kappa, d, r):
    space = SpaceSpec(kappa=kappa, d=d)
    sample = sample_ppp_ball(space, r=r, gamma=20, seed=11, replicate=2)
    again = sample_ppp_ball(space, r=r, gamma=20, seed=11, replicate=2)
    assert np.array_equal(sample.points, again.points)
    assert sample.points.shape[1] == space.embedding_dim
    if kappa == 0:
        assert np.all(np.linalg.norm(sample.points, axis=1) <= r)
    elif kappa < 0:
        assert np.all(sample.points[:, 0] <= math.cosh(r) * (1 + 1e-12))
    else:
        assert np.all(sample.points[:, 0] >= math.cos(r) * (1 - 1e-12))


def test_sample_ppp_ball_counts_are_poisson():
    space = SpaceSpec(kappa=-1, d=2)
    mu = 3 * ball_volume(space, 1.5)
    n = 3000
    counts = np.array([
        point_count(
            sample_ppp_ball(space, r=1.5, gamma=3, seed=5, replicate=i)
        )
        for i in range(n)
    ])
    assert abs(counts.mean() - mu) <= 4 * math.sqrt(mu / n)
    assert abs(counts.var(ddof=1) - mu) <= 4 * mu * math.sqrt(2 / n) + 0.5


def test_sample_ppp_ball_radial_law_in_hyperbolic_plane():
    space = SpaceSpec(kappa=-1, d=2)
    pts = np.concatenate([
        sample_ppp_ball(space, r=2, gamma=5, seed=9, replicate=i).points
        for i in range(200)
    ])
    radii = np.arccosh(pts[:, 0])
    inner = np.mean(radii <= 1)
    expected = ball_volume(space, 1) / ball_volume(space, 2)
    assert abs(inner - expected) <= 4 * math.sqrt(expected / len(radii))


def test_empty_sample():
    sample = sample_ppp_ball(SpaceSpec(), r=1, gamma=0, seed=0)
    assert sample.count == 0
    assert edge_count(sample, rho=1) == 0


def _sample(points):
    points = np.asarray(points, dtype=float)
    return PointSample(space=SpaceSpec(), r=10, points=points)


def test_power_edge_length_of_two_points():
    sample = _sample([[0, 0], [0.5, 0]])
    assert power_edge_length(sample, rho=1, tau=1) == pytest.approx(0.5)
    assert edge_count(sample, rho=1) == 1
    assert edge_count(sample, rho=0.4) == 0


def test_edge_count_brute_force_agrees():
    sample = sample_ppp_ball(SpaceSpec(), r=1, gamma=60, seed=2)
    assert edge_count(sample, rho=0.3) == edge_count(
        sample, rho=0.3, brute_force=True
    )


def test_edge_count_agrees_across_random_configurations():
    edge = make_graph('edge')
    for i in range(200):
        space = SpaceSpec(kappa=(-1, 0, 1)[i % 3], d=2)
        sample = sample_ppp_ball(space, r=1, gamma=30, seed=12, replicate=i)
        rho = 0.05 + 0.04 * (i % 8)
        n = edge_count(sample, rho=rho)
        assert n == edge_count(sample, rho=rho, brute_force=True)
        if i % 4 == 0:
            assert included_subgraph_count(sample, rho=rho, H=edge) == n


def test_falling_factorial_stat():
    sample = _sample([[0, 0], [1, 0], [2, 0], [3, 0]])
    assert falling_factorial_stat(sample, m=2, c=0.5) == 6


@pytest.mark.parametrize('name, expected', [
    ('triangle', 1), ('path3', 3), ('edge', 3)
])
def test_included_subgraph_count_on_close_triple(name, expected):
    sample = _sample([[0, 0], [0.1, 0], [0, 0.1]])
    assert included_subgraph_count(
        sample, rho=1, H=make_graph(name)
    ) == expected


@pytest.mark.parametrize('name, expected', [('star3', 4), ('cycle4', 3)])
def test_included_subgraph_count_on_close_quadruple(name, expected):
    sample = _sample([[0, 0], [0.1, 0], [0, 0.1], [0.1, 0.1]])
    assert included_subgraph_count(
        sample, rho=1, H=make_graph(name)
    ) == expected


def test_included_subgraph_count_without_edges():
    sample = _sample([[0, 0], [5, 0], [0, 5]])
    assert included_subgraph_count(sample, rho=1, H=make_graph('path3')) == 0


def test_included_subgraph_count_matches_networkx():
    sample = sample_ppp_ball(SpaceSpec(), r=1, gamma=30, seed=4)
    g = nx.random_geometric_graph(
        sample.count, radius=0.35,
        pos={i: tuple(p) for i, p in enumerate(sample.points)}
    )
    assert included_subgraph_count(
        sample, rho=0.35, H=make_graph('triangle')
    ) == sum(nx.triangles(g).values()) // 3


def test_make_graph_rejects_unknown():
    with pytest.raises(ValueError, match='unsupported graph'):
        make_graph('petersen')


def test_chord_length():
    assert chord_length(2, 3, 0) == pytest.approx(6)
    assert chord_length(2, 3, 3) == pytest.approx(0)
    with pytest.raises(ValueError):
        chord_length(2, 3, 4)


def test_hitting_mass():
    assert hitting_mass(2, 1.5) == pytest.approx(2 * math.sinh(1.5))
    assert hitting_mass(3, 1.0) == pytest.approx(
        2 * (math.sinh(2) / 4 + 0.5)
    )


def test_hyperbolic_chord_mean():
    d, r, gamma, n = 2, 3.0, 1.0, 3000
    values = np.array([
        f1_hyperbolic(
            sample_hyperbolic_chords(d, r, gamma, seed=1, replicate=i)
        )
        for i in range(n)
    ])
    mean = gamma * chord_moment_integral(d, 1, r)
    sd = math.sqrt(gamma * chord_moment_integral(d, 2, r) / n)
    assert abs(values.mean() - mean) <= 4 * sd


def test_dump_samples(tmp_path):
    path = tmp_path / 'points.csv'
    samples = [
        sample_ppp_ball(SpaceSpec(), r=1, gamma=5, seed=0, replicate=i)
        for i in range(3)
    ]
    dump_samples(samples, csv_path=str(path))
    df = pd.read_csv(path)
    assert list(df.columns) == ['replicate', 'index', 'x0', 'x1']
    assert len(df) == sum(s.count for s in samples)
