import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from circcoords.datasets import PointCloud, generate_figure8_2d, generate_ring
from circcoords.errors import ParameterError, SizeError
from circcoords.lift import triangle_defects
from circcoords.persistence import (betti_from_barcode, betti_oracle, check_prime, is_prime,
                                    persistent_cohomology, rank_mod_p, significant_cocycles)
from circcoords.rips import build_rips, distance_matrix, restrict_to_scale


def h1(pairs):
    return [p for p in pairs if p.dim == 1]


def test_primes():
    assert [p for p in range(30) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    for bad in (1, 4, 21, 2**16 + 1):
        with pytest.raises(ParameterError):
            check_prime(bad)


def test_square_at_two(square):
    pairs = persistent_cohomology(build_rips(distance_matrix(square), 2.0))
    (cls,) = h1(pairs)
    assert cls.birth == 2.0 and not cls.is_finite
    assert cls.cocycle.as_dict() == {(2, 3): 1}
    zero = sorted((p.birth, p.death) for p in pairs if p.dim == 0)
    assert zero == [(0, 1), (0, 1), (0, 2), (0, math.inf)]


def test_square_full_scale(square):
    (cls,) = h1(persistent_cohomology(build_rips(distance_matrix(square))))
    assert cls.birth == 2.0 and cls.death == pytest.approx(math.sqrt(5))
    # indicator of the last side edge; winding 1 around the square
    assert cls.cocycle.as_dict() == {(2, 3): 1}


def test_vertices_only(square):
    pairs = persistent_cohomology(build_rips(distance_matrix(square), 0.5))
    assert len(pairs) == 4 and all(p.dim == 0 and not p.is_finite for p in pairs)


def test_bad_prime(square):
    with pytest.raises(ParameterError):
        persistent_cohomology(build_rips(distance_matrix(square)), 22)


def test_figure8_two_classes():
    pairs = persistent_cohomology(build_rips(distance_matrix(generate_figure8_2d(50))))
    pers = sorted((p.persistence for p in h1(pairs)), reverse=True) + [0.0, 0.0, 0.0]
    assert pers[1] > 3 * pers[2]
    # frozen regression values
    assert pers[0] == pytest.approx(1.5161, abs=2e-3)
    assert pers[1] == pytest.approx(1.5021, abs=2e-3)


def test_significant_cocycles():
    pairs = persistent_cohomology(build_rips(distance_matrix(generate_figure8_2d(50))))
    top = significant_cocycles(pairs, tau=1.0)
    assert len(top) == 2 and top[0].persistence >= top[1].persistence
    assert significant_cocycles(pairs, tau=math.inf) == []
    assert significant_cocycles(pairs, tau=None, top_k=1) == top[:1]
    assert significant_cocycles(pairs, tau=1.51) == top[:1]
    with pytest.raises(ParameterError):
        significant_cocycles(pairs, tau=-1)


def test_betti_oracle_examples(square):
    assert betti_oracle(build_rips(distance_matrix(square), 2.0), 2.0) == (1, 1)
    tet = PointCloud([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert betti_oracle(build_rips(distance_matrix(tet), 2.0), 2.0) == (1, 0)
    tri = np.array([[0, 0], [1, 0], [0.5, 0.9]])
    two = PointCloud(np.vstack([tri, tri + [10, 0]]))
    f = build_rips(distance_matrix(two), 1.2, max_dim=1)
    assert betti_oracle(f, 1.2) == (2, 2)


def test_betti_oracle_guard():
    pc = PointCloud(np.random.default_rng(1).normal(size=(30, 2)))
    f = build_rips(distance_matrix(pc))
    with pytest.raises(SizeError):
        betti_oracle(f, f.max_scale, limit=100)


def test_rank_mod_p():
    assert rank_mod_p([[1, 2], [2, 4]], 23) == 1
    assert rank_mod_p([[1, 2], [3, 4]], 2) == 1
    assert rank_mod_p(np.eye(5, dtype=int), 7) == 5
    assert rank_mod_p(np.zeros((0, 3)), 7) == 0


def test_representatives_are_cocycles():
    pc = generate_ring(1.5, 1.5, 80, seed=2)
    f = build_rips(distance_matrix(pc))
    pairs = persistent_cohomology(f, 23)
    assert h1(pairs)
    eps = 1e-9 * f.max_scale
    for p in h1(pairs):
        if not p.is_finite:
            continue
        assert p.cocycle.scale == pytest.approx(p.death - eps)
        sl = restrict_to_scale(f, p.death - eps)
        d = triangle_defects(p.cocycle.edges, p.cocycle.coeffs, f.n, sl.triangles)
        assert np.all(np.mod(d, 23) == 0)
        assert np.all((p.cocycle.coeffs > 0) & (p.cocycle.coeffs < 23))
        assert len({tuple(e) for e in p.cocycle.edges}) == len(p.cocycle.edges)


def test_determinism():
    f = build_rips(distance_matrix(generate_ring(1.5, 1.5, 60, seed=4)))
    a, b = persistent_cohomology(f), persistent_cohomology(f)
    assert [(p.dim, p.birth, p.death) for p in a] == [(p.dim, p.birth, p.death) for p in b]
    for x, y in zip(h1(a), h1(b)):
        assert x.cocycle.as_dict() == y.cocycle.as_dict()


def test_h0_infinite_bars_count_components():
    X = np.vstack([np.random.default_rng(0).normal(size=(10, 2)) * 0.1 + c for c in ([0, 0], [50, 0], [0, 50])])
    f = build_rips(distance_matrix(PointCloud(X)), 5.0)
    pairs = persistent_cohomology(f)
    assert sum(1 for p in pairs if p.dim == 0 and not p.is_finite) == 3


small_clouds = st.integers(4, 8).flatmap(
    lambda n: arrays(np.float64, (n, 2), elements=st.floats(-3, 3, allow_nan=False, width=32)))


@settings(max_examples=40, deadline=None)
@given(small_clouds, st.sampled_from([2, 3, 23]), st.data())
def test_oracle_equivalence_property(X, p, data):
    f = build_rips(distance_matrix(PointCloud(X)))
    pairs = persistent_cohomology(f, p)
    values = sorted(set(np.concatenate([[0.0], f.edge_values])))
    for t in values + [data.draw(st.floats(0, f.max_scale))]:
        if t > f.max_scale:
            continue
        assert betti_from_barcode(pairs, t) == betti_oracle(f, t, p)
