import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mottcdw.errors import DomainError
from mottcdw.model import ModelParams, classify_landscape, landau_f, phi
from mottcdw.oracles import landau_table, min_pair_count, min_pair_count_joint


def params(u_l, rho=1.0, k=16):
    return ModelParams(u_s=1.0, u_l=u_l, j=0.0, k_sites=k, rho=rho)


# ---------------------------------------------------------------- ModelParams

def test_alpha_is_derived_from_j_and_z():
    p = ModelParams(u_s=1.0, u_l=0.3, j=0.1, k_sites=10, z=4)
    assert p.alpha == pytest.approx(2 * math.sqrt(2) * 4 * 0.1, rel=1e-15)
    assert p.replace(z=2).alpha == pytest.approx(p.alpha / 2, rel=1e-15)
    assert ModelParams.from_ratios(0.3, 0.75, 10).alpha == pytest.approx(0.75, rel=1e-15)


@pytest.mark.parametrize("kwargs", [
    dict(u_s=0.0, u_l=0.1, j=0.0, k_sites=4),
    dict(u_s=1.0, u_l=-0.1, j=0.0, k_sites=4),
    dict(u_s=1.0, u_l=0.1, j=-1e-3, k_sites=4),
    dict(u_s=1.0, u_l=0.1, j=0.0, k_sites=5),
    dict(u_s=1.0, u_l=0.1, j=0.0, k_sites=0),
    dict(u_s=1.0, u_l=0.1, j=0.0, k_sites=4, z=0),
    dict(u_s=1.0, u_l=0.1, j=0.0, k_sites=4, rho=0.0),
    dict(u_s=1.0, u_l=0.1, j=0.0, k_sites=4, rho=1.1),
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(DomainError):
        ModelParams(**kwargs)


# ---------------------------------------------------------------- phi

@pytest.mark.parametrize("rho_x, expected", [(1.0, 0.0), (2.0, 1.0), (1.5, 0.5), (0.7, 0.0)])
def test_phi_values(rho_x, expected):
    assert phi(rho_x) == pytest.approx(expected, abs=1e-15)


def test_phi_one_and_a_half_by_enumeration():
    # 6 particles on 4 sites of a K = 8 lattice; energy U_s/K per unit of n(n-1)
    assert Fraction(min_pair_count(4, 6), 8) == phi(Fraction(3, 2))


def test_phi_exact_and_negative():
    assert phi(Fraction(5, 2)) == 2 * (Fraction(5, 2) - Fraction(3, 2))
    with pytest.raises(DomainError):
        phi(-0.1)


@given(st.floats(0, 3), st.integers(1, 8))
def test_phi_matches_enumeration_on_rational_densities(x, sites):
    n = int(round(x * sites))
    # 2 * phi / U_s is the minimal n(n-1) per site
    assert min_pair_count(sites, n) == 2 * sites * phi(Fraction(n, sites), 1)


# ---------------------------------------------------------------- landau_f

def test_landau_examples():
    assert landau_f(0.0, params(0.3)) == 0.0
    assert landau_f(1.0, params(0.5)) == pytest.approx(0.0, abs=1e-15)
    assert landau_f(0.5, params(0.4, rho=1.25)) == pytest.approx(0.275, abs=1e-14)


def test_landau_general_filling_cross_check_k16():
    # theta = 0.5, rho = 1.25 on K = 16: N = 20 and Theta = 8
    k, u_l = 16, Fraction(2, 5)
    n_e, n_o = 14, 6
    pairs = min_pair_count(k // 2, n_e) + min_pair_count(k // 2, n_o)
    energy = Fraction(1, 2) * pairs / k - u_l * Fraction(8, k) ** 2
    assert energy == Fraction(11, 40)
    exact = ModelParams(u_s=1, u_l=u_l, j=0, k_sites=k, rho=Fraction(5, 4))
    assert landau_f(Fraction(1, 2), exact) == energy


def test_landau_out_of_range():
    with pytest.raises(DomainError):
        landau_f(1.01, params(0.3))
    with pytest.raises(DomainError):
        landau_f(np.array([0.0, -1.3]), params(0.3, rho=1.25))


@given(st.floats(-1, 1), st.floats(0, 2))
def test_landau_unit_filling_closed_form(theta, u_l):
    f = landau_f(theta, params(u_l))
    assert abs(f - (-u_l * theta**2 + abs(theta) / 2)) < 1e-12


@given(st.floats(0, 1), st.sampled_from([0.5, 1.0, 1.25, 1.5, 2.0, 2.75]), st.floats(0, 1.5))
def test_landau_even(frac, rho, u_l):
    theta = frac * rho
    p = params(u_l, rho=rho, k=8)
    assert landau_f(theta, p) == landau_f(-theta, p)


@pytest.mark.parametrize("k", [4, 6, 8])
@pytest.mark.parametrize("rho", [Fraction(1), Fraction(3, 2)])
def test_landau_table_against_full_lattice_enumeration(k, rho):
    # the oracle minimises each sub-lattice separately; here the whole lattice at once
    n = int(rho * k)
    for theta, brute, via_phi in landau_table(k, rho):
        assert brute == via_phi
        assert min_pair_count_joint(k, n, theta) == brute


# ---------------------------------------------------------------- classify_landscape

def test_classify_mi_only():
    c = classify_landscape(params(0.2))
    assert c.phase == "MI"
    assert [(e.theta, e.kind) for e in c.minima()] == [(0.0, "global-min")]


def test_classify_degenerate():
    c = classify_landscape(params(0.5))
    assert c.phase == "degenerate"
    for t in (-1.0, 0.0, 1.0):
        assert c.has_min_at(t)
        assert landau_f(t, params(0.5)) == pytest.approx(0.0, abs=1e-15)


def test_classify_cdw_with_metastable_mi():
    c = classify_landscape(params(0.7))
    assert c.phase == "CDW"
    kinds = {e.theta: e.kind for e in c.extrema}
    assert kinds[1.0] == kinds[-1.0] == "global-min"
    assert kinds[0.0] == "local-min"
    maxima = [e.theta for e in c.extrema if e.kind == "maximum"]
    assert maxima == pytest.approx([-1 / 2.8, 1 / 2.8])


def test_cdw_minimum_flag_flips_once_at_quarter():
    grid = np.linspace(0.2, 0.3, 101)   # contains 0.25 exactly after rounding
    flags = [classify_landscape(params(round(u, 12))).has_min_at(1.0) for u in grid]
    flips = sum(a != b for a, b in zip(flags, flags[1:]))
    assert flips == 1
    marg = classify_landscape(params(0.25))
    assert marg.has_min_at(1.0)
    assert all(e.marginal for e in marg.extrema if abs(e.theta) == 1.0)


@given(st.floats(0, 1.5))
def test_local_minima_above_global(u_l):
    c = classify_landscape(params(u_l), n_grid=51)
    glob = min(e.f for e in c.minima())
    for e in c.minima():
        if e.kind == "local-min" and c.phase != "degenerate":
            assert e.f > glob
    assert np.array_equal(c.f_values, c.f_values[::-1])


@pytest.mark.parametrize("rho, u_l, phase", [(1.25, 0.4, "CDW"), (1.5, 0.0, "degenerate"),
                                             (1.5, 1.0, "CDW"), (2.0, 0.3, "MI")])
def test_classify_general_filling(rho, u_l, phase):
    c = classify_landscape(params(u_l, rho=rho), n_grid=201)
    assert c.phase == phase
    assert c.theta_grid[0] == -rho and c.theta_grid[-1] == rho
    glob = [e for e in c.extrema if e.kind == "global-min"]
    assert glob and all(e.f == pytest.approx(float(np.min(c.f_values))) for e in glob)


def test_intermediate_minimum_at_quarter_filling_excess():
    # rho = 1.25, U_l = 0.4: global minima at theta = +-1/4 and local ones at +-3/4
    c = classify_landscape(params(0.4, rho=1.25), n_grid=9)
    by_theta = {round(e.theta, 12): e.kind for e in c.extrema}
    assert by_theta[0.25] == by_theta[-0.25] == "global-min"
    assert by_theta[0.75] == by_theta[-0.75] == "local-min"


def test_n_grid_validation():
    with pytest.raises(DomainError):
        classify_landscape(params(0.3), n_grid=2)
