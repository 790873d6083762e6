import numpy as np
import pytest
from hypothesis import given, strategies as st

from circcoords.datasets import PointCloud, generate_double_ring, generate_figure8_2d, generate_ring
from circcoords.errors import LiftError
from circcoords.lift import IntegerCocycle, lift, symmetric_residue, verify_integer_cocycle
from circcoords.persistence import Cocycle, persistent_cohomology, significant_cocycles
from circcoords.rips import build_rips, distance_matrix, restrict_to_scale


def test_symmetric_residue():
    assert symmetric_residue(22, 23) == -1
    assert symmetric_residue(5, 23) == 5
    assert symmetric_residue(11, 23) == 11 and symmetric_residue(12, 23) == -11


@given(st.sampled_from([2, 3, 5, 7, 23, 101, 65521]), st.lists(st.integers(-10**6, 10**6), min_size=1))
def test_round_trip_and_bound(p, values):
    c = np.array(values)
    r = symmetric_residue(c, p)
    assert np.all(np.mod(r, p) == np.mod(c, p))
    assert np.all(np.abs(r) <= (p - 1) // 2 + (p == 2))


def test_square_lift(square):
    f = build_rips(distance_matrix(square), 2.0)
    (cls,) = [p for p in persistent_cohomology(f) if p.dim == 1]
    ic = lift(cls.cocycle)
    assert ic.as_dict() == {(2, 3): 1}
    assert verify_integer_cocycle(ic, restrict_to_scale(f, 2.0))


def test_zero_cocycle_ok():
    pc = generate_ring(1, 0.5, 30, seed=0)
    f = build_rips(distance_matrix(pc))
    ic = IntegerCocycle(np.empty((0, 2), dtype=np.int64), np.empty(0, dtype=np.int64), f.max_scale)
    assert verify_integer_cocycle(ic, restrict_to_scale(f, f.max_scale))


def test_mod_p_valid_integer_invalid():
    tri = PointCloud([[0, 0], [1, 0], [0.5, 0.8]])
    f = build_rips(distance_matrix(tri), 2.0)
    # delta on (0,1,2) is a(12) - a(02) + a(01) = 12 - 1 + 12 = 23 = 0 mod 23
    coc = Cocycle(np.array([[0, 1], [0, 2], [1, 2]]), np.array([12, 1, 12]), 2.0, 23)
    assert (12 - 1 + 12) % 23 == 0
    ic = lift(coc)
    with pytest.raises(LiftError, match="lower the working scale") as err:
        verify_integer_cocycle(ic, restrict_to_scale(f, 2.0))
    assert err.value.violations == [(0, 1, 2)]


def test_edges_outside_slice(square):
    f = build_rips(distance_matrix(square))
    ic = IntegerCocycle(np.array([[0, 2]]), np.array([1]), 1.5)
    with pytest.raises(LiftError, match="outside"):
        verify_integer_cocycle(ic, restrict_to_scale(f, 1.5))


@pytest.mark.parametrize("cloud", [
    lambda: generate_ring(1.5, 1.5, 150, seed=7),
    lambda: generate_double_ring(1.5, 0.5, 100, seed=3),
    lambda: generate_figure8_2d(50),
])
def test_default_lifts_verify(cloud):
    f = build_rips(distance_matrix(cloud()))
    for pr in significant_cocycles(persistent_cohomology(f), tau=None, top_k=2):
        ic = lift(pr.cocycle)
        assert verify_integer_cocycle(ic, restrict_to_scale(f, pr.cocycle.scale))
        assert np.all(np.abs(ic.coeffs) <= 11)
