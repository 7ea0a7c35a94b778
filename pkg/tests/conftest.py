"""Shared fixtures and hypothesis strategies."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from chainshadow import (
    PseudoOrbit,
    build_delta_graph,
    far_two_cycles,
    make_system,
    north_south,
    parallel_cycles,
    shortest_path_metric,
)


def sweep_values(system) -> list[Fraction]:
    """The acceptance grid: every pairwise distance, halved and doubled."""
    values: set[Fraction] = set()
    for v in system.distance_values:
        values.update((v / 2, v, 2 * v))
    return sorted(values)


@pytest.fixture(scope="session")
def parallel():
    return parallel_cycles()


@pytest.fixture(scope="session")
def ns6():
    return north_south(6)


@pytest.fixture(scope="session")
def far_cycles():
    return far_two_cycles()


@pytest.fixture(scope="session")
def path_system():
    """a -> b -> c -> c with all distances 1."""
    rows = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    return make_system(rows, (1, 2, 2))


@st.composite
def metric_systems(draw, max_n: int = 7):
    """Random valid systems: shortest-path-completed random weights plus a
    random total map; the completion makes the triangle inequality hold by
    construction."""
    n = draw(st.integers(min_value=1, max_value=max_n))
    edges = []
    for i in range(n):
        for j in range(i):
            w = Fraction(draw(st.integers(1, 9)), draw(st.integers(1, 3)))
            edges.append((j, i, w))
    dist = shortest_path_metric(n, edges)
    fmap = tuple(draw(st.integers(0, n - 1)) for _ in range(n))
    return make_system(dist, fmap, invertible=len(set(fmap)) == n)


@st.composite
def system_and_scales(draw, max_n: int = 6):
    system = draw(metric_systems(max_n=max_n))
    pool = [Fraction(0)] + sweep_values(system)
    return system, draw(st.sampled_from(pool)), draw(st.sampled_from(pool))


@st.composite
def system_and_chain(draw, max_n: int = 6, max_len: int = 6):
    """A system, scales, and a valid delta chain drawn as a graph walk."""
    system, delta, eps = draw(system_and_scales(max_n=max_n))
    graph = build_delta_graph(system, delta)
    points = [draw(st.integers(0, system.n - 1))]
    for _ in range(draw(st.integers(0, max_len - 1))):
        points.append(draw(st.sampled_from(graph.succ[points[-1]])))
    return system, delta, eps, PseudoOrbit.plain(points, delta)
