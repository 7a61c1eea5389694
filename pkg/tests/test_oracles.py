import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from mottcdw.errors import ConsistencyError, DomainError, SizeError
from mottcdw.model import ModelParams
from mottcdw.oracles import (FockBasis, LatticeGraph, aq_by_matching, aq_by_operator, aq_distorted,
                             complete_bipartite, dimer, exact_diagonalize, matching_profile,
                             matrix_element_check, projected_hamiltonian, rectangle, ring)
from mottcdw.oracles import fock
from mottcdw.oracles.lattice import from_name
from mottcdw.qspace import build_hamiltonian, ground_state

SMALL = [dimer(), ring(4), ring(6), ring(8), rectangle(2, 2), rectangle(2, 4),
         rectangle(2, 6), rectangle(3, 4), ring(10), ring(12), rectangle(4, 2, periodic=True)]


# ---------------------------------------------------------------- lattices

def test_lattice_validation():
    with pytest.raises(DomainError):
        LatticeGraph(3, (0, 1, 0), (), "bad")
    with pytest.raises(DomainError):
        LatticeGraph(4, (0, 0, 0, 1), (), "bad")
    with pytest.raises(DomainError):
        LatticeGraph(2, (0, 1), ((1, 0),), "bad")
    with pytest.raises(DomainError):
        rectangle(3, 3)
    with pytest.raises(DomainError):
        rectangle(3, 2, periodic=True)
    with pytest.raises(DomainError):
        from_name("hex", 6)


def test_lattice_shapes():
    assert len(ring(8).edges) == 8 and ring(8).coordination == 2
    assert len(rectangle(4, 4).edges) == 24
    assert len(rectangle(4, 4, periodic=True).edges) == 32
    assert complete_bipartite(8).coordination == 4
    assert from_name("rect", 8, width=2).geometry == "rect4x2-obc"


# ---------------------------------------------------------------- A(Q)

def test_dimer_single_hop():
    t = aq_by_operator(dimer())
    assert t[0] == 1 and t[2] == 1


def test_rectangle_2x2_cross_oracle():
    assert aq_by_operator(rectangle(2, 2)).values == aq_by_matching(rectangle(2, 2)).values


@pytest.mark.parametrize("graph", SMALL, ids=lambda g: g.geometry)
def test_cross_oracle_equality(graph):
    op = aq_by_operator(graph)
    mt = aq_by_matching(graph)
    assert op.exact
    assert op.values == mt.values
    assert all(isinstance(v, int) for v in op.values.values())
    assert op.values[0] == 1
    assert mt.values[2] == len(graph.edges)


@pytest.mark.parametrize("graph", SMALL[:7], ids=lambda g: g.geometry)
def test_odd_direction_is_the_mirror(graph):
    even = aq_by_operator(graph)
    odd = aq_by_operator(graph, direction="odd")
    assert {-q: v for q, v in odd.values.items()} == even.values


def test_positive_until_unreachable():
    # an open 2x6 strip cannot place 6 disjoint bonds in fewer than 12 sites... it can;
    # a star-free example: 4-ring with one bond removed still covers Q = 4
    g = LatticeGraph(4, (0, 1, 0, 1), ((0, 1), (2, 3)), "two-dimers")
    t = aq_by_matching(g)
    assert t.values == {0: 1, 2: 2, 4: 4}
    g = LatticeGraph(4, (0, 1, 0, 1), ((0, 1), (0, 3)), "path3+site")
    t = aq_by_matching(g)
    op = aq_by_operator(g)
    assert t.values == op.values and t.values[4] == 0


def test_rectangle_4x4_matching_counts():
    hist = matching_profile(rectangle(4, 4), 3)
    assert hist[1] > 0 and hist[3] > 0
    assert set(hist) <= {1, 2, 3}


def test_size_caps():
    with pytest.raises(SizeError):
        aq_by_operator(ring(14))
    with pytest.raises(SizeError):
        aq_by_matching(ring(18))
    with pytest.raises(DomainError):
        aq_by_operator(ring(4), direction="up")


@pytest.mark.parametrize("k, q, expected", [(4, 2, 4), (10, 0, 1), (2000, 2000, 1), (8, 4, 36)])
def test_aq_distorted(k, q, expected):
    assert aq_distorted(k, q) == expected


@pytest.mark.parametrize("k, q", [(5, 2), (4, 3), (4, 6), (4, -2)])
def test_aq_distorted_domain(k, q):
    with pytest.raises(DomainError):
        aq_distorted(k, q)


@pytest.mark.parametrize("k", [2, 4, 6, 8])
def test_complete_bipartite_reduces_to_binomials(k):
    op = aq_by_operator(complete_bipartite(k))
    mt = aq_by_matching(complete_bipartite(k))
    for q in range(0, k + 1, 2):
        n = q // 2
        assert op.support[q] == aq_distorted(k, q)
        # every double/hole placement is reached by (n!)^2 ordered hop sequences
        assert op[q] == math.factorial(n) ** 4 * aq_distorted(k, q)
        assert mt[q] == op[q]


# ---------------------------------------------------------------- matrix elements and algebra

@pytest.mark.parametrize("k", [2, 4, 6, 8])
def test_matrix_elements(k):
    rep = matrix_element_check(k)
    assert rep.element_max_error <= 1e-12
    assert rep.commutator_even <= 1e-12 and rep.commutator_odd <= 1e-12
    for q, v in rep.elements.items():
        assert v == pytest.approx(math.sqrt(2) * (k - q) * (q + 2) / k**2, abs=1e-12)


def test_matrix_element_examples():
    assert matrix_element_check(4).elements[0] == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert matrix_element_check(6).elements[2] == pytest.approx(4 * math.sqrt(2) / 9, abs=1e-12)


def test_projection_breaks_the_ladder_algebra():
    rep = matrix_element_check(4)
    assert rep.triple_occupation_reachable
    assert rep.commutator_even == 0.0
    assert rep.ladder_mismatch > 1.0
    # the projector commutes with Theta, so this identity survives projection
    assert rep.projected_commutator_even == 0.0
    assert matrix_element_check(2).ladder_mismatch == 0.0


def test_matrix_element_failure_reported(monkeypatch):
    monkeypatch.setattr(fock.math, "sqrt", lambda x: x ** 0.5 * (1 + 1e-9))
    with pytest.raises(ConsistencyError):
        matrix_element_check(4)


def test_matrix_element_size_cap():
    with pytest.raises(SizeError):
        matrix_element_check(12)


@pytest.mark.parametrize("graph", [complete_bipartite(4), complete_bipartite(6),
                                   complete_bipartite(8), ring(8), rectangle(2, 4)],
                         ids=lambda g: g.geometry)
def test_projected_hamiltonian_equals_tridiagonal(graph):
    z = graph.coordination
    p = ModelParams(u_s=1.0, u_l=0.37, j=0.05, k_sites=graph.n_sites, z=1)
    # the averaged hopping sees the mean coordination 2|E|/K
    p = p.replace(j=0.05 * float(z))
    h_q = build_hamiltonian(p).dense()
    h_full = projected_hamiltonian(graph, p.replace(j=0.05, z=1))
    np.testing.assert_allclose(h_full, h_q, atol=1e-12)


# ---------------------------------------------------------------- exact diagonalisation

def test_fock_basis_dimension_and_lookup():
    b = FockBasis(4, 4, 2)
    assert b.dim == 19
    idx = b.index([[1, 1, 1, 1], [3, 1, 0, 0], [2, 2, 0, 0]])
    assert idx[0] >= 0 and idx[1] == -1 and idx[2] >= 0
    assert FockBasis(4, 4, 4).dim == math.comb(7, 3)
    with pytest.raises(SizeError):
        FockBasis(30, 30, 30)


@pytest.mark.parametrize("u_l, expected", [(0.3, 0.0), (0.7, 8 * (0.5 - 0.7))])
def test_ed_zero_hopping(u_l, expected):
    p = ModelParams(u_s=1.0, u_l=u_l, j=0.0, k_sites=8, z=2)
    assert exact_diagonalize(ring(8), p).energy == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("j", [0.01, 0.05, 0.1])
@pytest.mark.parametrize("u_l", [0.3, 0.5, 0.7])
def test_variational_bound_ring8(j, u_l):
    p = ModelParams(u_s=1.0, u_l=u_l, j=j, k_sites=8, z=2)
    e_ed = exact_diagonalize(ring(8), p).energy
    e_q = ground_state(build_hamiltonian(p), 2).energies[0]
    assert e_q >= e_ed - 1e-12


def test_occupation_cap_ordering():
    p = ModelParams(u_s=1.0, u_l=0.3, j=0.1, k_sites=8, z=2)
    e2 = exact_diagonalize(ring(8), p, occupation_cap=2).energy
    e3 = exact_diagonalize(ring(8), p, occupation_cap=3).energy
    e_full = exact_diagonalize(ring(8), p).energy
    assert e2 >= e3 - 1e-12 >= e_full - 2e-12


def test_lanczos_path_matches_dense(monkeypatch):
    monkeypatch.setattr(fock, "DENSE_DIM", 50)
    g = ring(6)
    p = ModelParams(u_s=1.0, u_l=0.45, j=0.08, k_sites=6, z=2)
    sparse = exact_diagonalize(g, p)
    assert sparse.basis.dim > fock.DENSE_DIM
    h = fock.hamiltonian(sparse.basis, g, p).toarray()
    assert sparse.energy == pytest.approx(np.linalg.eigvalsh(h)[0], abs=1e-10)
    assert np.linalg.norm(h @ sparse.state - sparse.energy * sparse.state) < 1e-8


def test_ed_size_mismatch():
    with pytest.raises(DomainError):
        exact_diagonalize(ring(8), ModelParams(1.0, 0.3, 0.0, 6))
