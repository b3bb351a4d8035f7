import numpy as np
import pytest

from elliptica import Lattice, LatticeSumPolicy, build_symmetric_wp, count_degree
from elliptica.elliptic import (
    c_formula_route,
    eval_P,
    eval_P_prime,
    eval_P_richardson,
    half_period_values,
    is_pole,
)
from elliptica.errors import CountUnreliableError, InvalidLatticeError

# independently computed: Richardson-extrapolated lattice sum at radius 240
# agrees with this theta-route value to ~8e-10; a 40-digit evaluation gives
# 4.1495417114249864652...
P_HALF_SQUARE = 4.149541711424988

# median-of-ratios constants, cross-checked against the diagonal-derivative
# formula during build (relative agreement ~2e-9)
C_SQUARE = -6.875185818020373
C_RECT = -1.6933091626986965
X_RECT = 0.17415534987450354


def test_frozen_reference_value_square(wp_square):
    assert abs(wp_square.P(0.5) - P_HALF_SQUARE) < 1e-12
    # the slow route with Richardson extrapolation lands on the same value
    oracle = eval_P_richardson(0.5, wp_square.lattice, radius=60)
    assert abs(oracle - P_HALF_SQUARE) < 1e-7


def test_high_precision_referee(wp_square):
    # independent 40-digit evaluation of the same log-derivative formula
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    for z in (0.5, 0.3 + 0.4j, 1.2 + 0.7j):
        omega1, omega2 = mp.mpf(2), mp.mpc(0, 2)
        q = mp.exp(1j * mp.pi * (omega2 / omega1))
        u = mp.pi * mp.mpc(z) / omega1
        th = mp.jtheta(1, u, q)
        d2 = mp.jtheta(1, u, q, 2) / th - (mp.jtheta(1, u, q, 1) / th) ** 2
        lam = mp.jtheta(1, 0, q, 3) / mp.jtheta(1, 0, q, 1)
        ref = complex((mp.pi / omega1) ** 2 * (lam / 3 - d2))
        assert abs(wp_square.P(z) - ref) < 1e-13 * (1 + abs(ref))


def test_sum_and_theta_routes_agree():
    lat = Lattice(1.0, 2j)
    wp = build_symmetric_wp(lat)
    pol = LatticeSumPolicy(radius=50)
    z = np.array([0.4 + 0.3j, 1.1 + 0.9j, 0.2 + 1.6j])
    direct = eval_P(z, lat, pol)
    budget = 30 * pol.tail_estimate(lat)
    assert np.max(np.abs(direct - wp.P(z))) < budget


def test_P_even_and_periodic(all_wps):
    rng = np.random.default_rng(4)
    for wp in all_wps.values():
        lat = wp.lattice
        z = lat.from_coords(rng.uniform(0.05, 0.95, 200), rng.uniform(0.05, 0.95, 200))
        assert np.max(np.abs(wp.P(z) - wp.P(-z))) < 1e-10
        assert np.max(np.abs(wp.P(z) - wp.P(z + 2 * lat.w1))) < 1e-9
        assert np.max(np.abs(wp.P(z) - wp.P(z + 2 * lat.w2))) < 1e-9


def test_P_prime_odd_and_halfperiod_critical(wp_square):
    rng = np.random.default_rng(5)
    lat = wp_square.lattice
    z = lat.from_coords(rng.uniform(0.05, 0.95, 100), rng.uniform(0.05, 0.95, 100))
    _, pp = wp_square.P_with_prime(z)
    _, ppm = wp_square.P_with_prime(-z)
    assert np.max(np.abs(pp + ppm)) < 1e-9
    for hp in (lat.w1, lat.w2, lat.w1 + lat.w2):
        assert abs(wp_square.P_with_prime(hp)[1]) < 1e-9


def test_P_prime_finite_differences(wp_rect):
    # independent oracle: central differences of P itself
    rng = np.random.default_rng(6)
    lat = wp_rect.lattice
    h = 1e-5
    z = lat.from_coords(rng.uniform(0.1, 0.9, 50), rng.uniform(0.1, 0.9, 50))
    fd = (wp_rect.P(z + h) - wp_rect.P(z - h)) / (2 * h)
    _, pp = wp_rect.P_with_prime(z)
    assert np.max(np.abs(fd - pp) / (1 + np.abs(pp))) < 1e-7


def test_lattice_sum_pole_signal():
    lat = Lattice(1.0, 1j)
    v = eval_P(np.array([0j, 2 + 2j, 0.5 + 0j]), lat, LatticeSumPolicy(radius=10))
    assert is_pole(v[0]) and is_pole(v[1]) and not is_pole(v[2])
    vp = eval_P_prime(np.array([0j]), lat, LatticeSumPolicy(radius=10))
    assert is_pole(vp[0])


def test_policy_validation():
    with pytest.raises(InvalidLatticeError):
        LatticeSumPolicy(radius=3)
    # the direct sum cannot honour a 1e-10 tail at radius 60; the policy
    # says so instead of pretending
    lat = Lattice(1.0, 1j)
    with pytest.raises(InvalidLatticeError):
        LatticeSumPolicy(radius=60, tail_tol=1e-10).validate(lat)
    est = LatticeSumPolicy(radius=60).validate(lat)
    assert 0 < est < 1e-2


def test_normalization_triple(all_wps):
    for wp in all_wps.values():
        lat = wp.lattice
        hs = lat.w1 + lat.w2
        assert abs(wp.wp(0j)) < 1e-12
        assert abs(wp.wp(hs / 2) - 1j) < 1e-10
        assert abs(wp.wp(-hs / 2) - 1j) < 1e-10
        assert is_pole(wp.wp(hs))
        hd = lat.w1 - lat.w2
        assert abs(wp.wp(hd / 2) + 1j) < 1e-10
        assert abs(wp.wp(-hd / 2) + 1j) < 1e-10


def test_wp_even_and_eq3(all_wps):
    rng = np.random.default_rng(7)
    for wp in all_wps.values():
        lat = wp.lattice
        z = lat.from_coords(rng.uniform(0.03, 0.97, 1000), rng.uniform(0.03, 0.97, 1000))
        v = np.asarray(wp.wp(z))
        assert np.nanmax(np.abs(v - np.asarray(wp.wp(-z)))) < 1e-10
        prod = np.asarray(wp.wp(-z + lat.w1 + lat.w2)) * v
        assert np.nanmax(np.abs(prod + 1) / np.abs(prod)) < 1e-10


def test_wp_prime_chain_rule(wp_square):
    # independent oracle: central differences of wp
    rng = np.random.default_rng(8)
    lat = wp_square.lattice
    z = lat.from_coords(rng.uniform(0.1, 0.9, 60), rng.uniform(0.1, 0.9, 60))
    h = 1e-5
    fd = (np.asarray(wp_square.wp(z + h)) - np.asarray(wp_square.wp(z - h))) / (2 * h)
    vp = np.asarray(wp_square.wp_prime(z))
    ok = np.abs(vp) < 1e3
    assert np.max(np.abs(fd - vp)[ok] / (1 + np.abs(vp)[ok])) < 1e-7


def test_square_torus_halfperiod_value(wp_square):
    # x = tan(pi/4) = 1 on the square torus
    assert abs(wp_square.x - 1.0) < 1e-10
    rec = half_period_values(wp_square)
    assert abs(rec["wp_w2"] + 1.0) < 1e-10
    assert abs(rec["alpha"] - np.pi / 4) < 1e-10
    assert abs(rec["rho"]) < 1e-8


def test_rectangular_halfperiod_values(wp_rect):
    rec = half_period_values(wp_rect)
    assert abs(wp_rect.x - X_RECT) < 1e-10
    assert 0 < rec["alpha"] < np.pi / 2
    assert abs(np.tan(rec["alpha"]) - wp_rect.x.real) < 1e-10
    assert abs(rec["wp_w2"] * wp_rect.x + 1.0) < 1e-10
    assert abs(wp_rect.x.imag) < 1e-10


def test_rhombic_halfperiod_values(wp_rhombic):
    rec = half_period_values(wp_rhombic)
    assert abs(abs(wp_rhombic.x) - 1.0) < 1e-10
    assert rec["rho"] is not None
    assert abs(rec["wp_w2"] * wp_rhombic.x + 1.0) < 1e-10


def test_torus_equation_and_c(all_wps):
    rng = np.random.default_rng(9)
    for name, wp in all_wps.items():
        z = wp.lattice.from_coords(rng.uniform(0.03, 0.97, 100), rng.uniform(0.03, 0.97, 100))
        v, vp = wp.wp_with_prime(z)
        res = np.abs(vp**2 - wp.c * v * (v - wp.x) * (v + 1.0 / wp.x)) / (1 + np.abs(vp) ** 2)
        assert np.nanmax(res) < 1e-8
        assert abs(c_formula_route(wp) - wp.c) / abs(wp.c) < 1e-6


def test_frozen_c_values(wp_square, wp_rect):
    assert abs(wp_square.c - C_SQUARE) < 1e-9 * abs(C_SQUARE)
    assert abs(wp_rect.c - C_RECT) < 1e-9 * abs(C_RECT)


def test_c_invariant_under_negating_both_generators(wp_square):
    wp2 = build_symmetric_wp(Lattice(-wp_square.lattice.w1, -wp_square.lattice.w2))
    assert abs(wp2.c - wp_square.c) < 1e-9 * abs(wp_square.c)


def test_rectangular_conjugation_identity(wp_rect):
    rng = np.random.default_rng(10)
    lat = wp_rect.lattice
    z = lat.from_coords(rng.uniform(0.03, 0.97, 1000), rng.uniform(0.03, 0.97, 1000))
    lhs = np.asarray(wp_rect.wp(np.conj(z)))
    rhs = np.conj(np.asarray(wp_rect.wp(z)))
    assert np.nanmax(np.abs(lhs - rhs)) < 1e-9


def test_rhombic_conjugation_identity(wp_rhombic):
    rng = np.random.default_rng(11)
    lat = wp_rhombic.lattice
    z = lat.from_coords(rng.uniform(0.03, 0.97, 1000), rng.uniform(0.03, 0.97, 1000))
    lhs = np.asarray(wp_rhombic.wp(np.conj(z) + lat.w1 + lat.w2))
    rhs = 1.0 / np.conj(np.asarray(wp_rhombic.wp(z)))
    assert np.nanmax(np.abs(lhs - rhs)) < 1e-9


def test_degree_counts(wp_square):
    lat = wp_square.lattice
    for k in range(5):
        v = 0.55 * np.exp(1j * (0.3 + 1.2 * k)) + 0.3 - 0.2j
        assert count_degree(wp_square.wp, v, lat, f_prime=wp_square.wp_prime) == 2
        assert count_degree(wp_square.wp_prime, v, lat) == 3


def test_degree_count_branch_value_avoided(wp_square):
    # the precondition excludes branch values like i, where the two
    # half-diagonal preimages merge; a generic value nearby still counts 2
    lat = wp_square.lattice
    assert count_degree(wp_square.wp, 0.9j + 0.2, lat, f_prime=wp_square.wp_prime) == 2


def test_count_degree_unreliable_for_unreachable_value(wp_square):
    def never(z):
        return np.full(np.shape(z), 5.0 + 5.0j)

    with pytest.raises(CountUnreliableError):
        count_degree(never, 1.0 + 0j, wp_square.lattice)


def test_sum_method_build():
    # the slow route supports the same build contract at its own accuracy
    wp = build_symmetric_wp(Lattice(1.0, 1j), policy=LatticeSumPolicy(radius=40),
                            method="sum", cross_check=False)
    assert abs(wp.wp((1 + 1j) / 2) - 1j) < 1e-10   # normalization is exact by construction
    assert abs(wp.x - 1.0) < 1e-3                  # half-period value at sum accuracy
