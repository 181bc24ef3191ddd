import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from lagflow.disk import DiskGeometry
from lagflow.flow import ellipse
from lagflow.runge import (
    ApproximationFailure,
    Disk,
    PointSet,
    Psi,
    RationalFunction,
    SampledHolomorphicFunction,
    assemble_control_potential,
    boundary_correction,
    bump_partition,
    cauchy_riemann_field,
    cutoff_rho,
    extend_complement_data,
    fit_rational,
    mergelyan_cutoff,
    runge_approximate,
    smoothstep,
    time_varying_runge,
)

GEO = DiskGeometry(1.0, 0.3, (0.0, np.pi))


# -- Cauchy-Riemann field ----------------------------------------------------

def test_cr_field_examples():
    assert cauchy_riemann_field(lambda z: z, (0.3, -0.8)) == (0.3, 0.8)
    assert cauchy_riemann_field(lambda z: 1.0 + 0 * z, (5.0, 2.0)) == (1.0, -0.0)


def test_cr_field_divergence_and_curl_free():
    h = 1e-5
    for x, y in [(0.1, 0.2), (-0.7, 0.4), (1.3, -1.1)]:
        u = lambda x, y: cauchy_riemann_field(np.exp, (x, y))
        dudx = (u(x + h, y)[0] - u(x - h, y)[0]) / (2 * h)
        dvdy = (u(x, y + h)[1] - u(x, y - h)[1]) / (2 * h)
        dvdx = (u(x + h, y)[1] - u(x - h, y)[1]) / (2 * h)
        dudy = (u(x, y + h)[0] - u(x, y - h)[0]) / (2 * h)
        assert abs(dudx + dvdy) <= 1e-6
        assert abs(dvdx - dudy) <= 1e-6


def test_sampled_function_region_check():
    f = SampledHolomorphicFunction(np.exp, Disk(0.0, 1.0))
    assert f(0.5) == pytest.approx(np.exp(0.5))
    with pytest.raises(ValueError):
        f(np.array([2.0]))


# -- Runge fits --------------------------------------------------------------

def test_exact_recovery_of_basis_rational():
    f = lambda z: 1.0 / (z - 3.0) + 2.0 / (z - 3.0) ** 2 - 0.5j / (z + 2.5j)
    R, err = runge_approximate(f, Disk(0.0, 1.0), poles=[3.0, -2.5j], eps_target=1e-13)
    assert err <= 1e-13


def test_exp_degree_12():
    R, fit_err, val_err = fit_rational(np.exp, Disk(0.0, 1.0), degree=12)
    assert val_err <= 1e-8
    # held-out error stays within twice the fit error
    assert val_err <= 2 * fit_err
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 3001)) * np.sqrt(np.random.default_rng(0).random(3001))
    assert np.max(np.abs(R(z) - np.exp(z))) <= 1e-8


def test_monotone_in_degree():
    f = lambda z: 1.0 / (z - 2.0)
    errs = [fit_rational(f, Disk(0.0, 1.0), [3.0], d)[2] for d in range(1, 10)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_budget_exhaustion():
    f = lambda z: 1.0 / (z - 1.05)
    with pytest.raises(ApproximationFailure) as info:
        runge_approximate(f, Disk(0.0, 1.0), degree_budget=4, eps_target=1e-12)
    assert info.value.best is not None
    assert np.isfinite(info.value.best_error)


def test_pole_on_samples_rejected():
    with pytest.raises(ValueError):
        fit_rational(np.exp, Disk(0.0, 1.0), poles=[1.0 + 0j], degree=2)


def test_rational_derivative_and_json():
    R, _, _ = fit_rational(lambda z: np.exp(z) + 1 / (z - 2), Disk(0.2, 0.8), [2.0], 8)
    z = np.array([0.1 + 0.2j, -0.3j])
    h = 1e-6
    np.testing.assert_allclose(R.derivative(z), (R(z + h) - R(z - h)) / (2 * h), atol=1e-7)
    back = RationalFunction.from_dict(json.loads(R.to_json()))
    np.testing.assert_allclose(back(z), R(z), rtol=1e-15)


# -- bumps and partitions ----------------------------------------------------

@pytest.mark.parametrize("x", [0.05, 0.2, 0.5, 0.9, 1.0, 3.0])
def test_Psi_matches_quadrature(x):
    ref, _ = quad(lambda s: np.exp(-1.0 / s), 0.0, x, epsabs=1e-14, epsrel=1e-13)
    assert Psi(x) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_Psi_zero_for_nonpositive():
    assert Psi(0.0) == 0.0 and Psi(-3.0) == 0.0


def test_smoothstep_limits():
    assert smoothstep(0.0) == 0.0 and smoothstep(1.0) == 1.0
    assert smoothstep(0.5) == pytest.approx(0.5, abs=1e-15)


def test_single_node_partition():
    p = bump_partition([0.5], 0.75)
    np.testing.assert_array_equal(p(np.linspace(0, 1, 11)), np.ones((1, 11)))


def test_partition_of_unity_and_support():
    nodes = (np.arange(7) + 0.5) / 7
    kappa = 0.75 / 7
    p = bump_partition(nodes, kappa)
    t = np.linspace(0, 1, 1001)
    phi = p(t)
    assert np.max(np.abs(phi.sum(axis=0) - 1)) <= 1e-12
    assert phi.min() >= 0 and phi.max() <= 1
    for j in range(7):
        lo, hi = nodes[j] - kappa, nodes[j] + kappa
        outside = (t <= lo) | (t >= hi)
        assert np.all(phi[j, outside] == 0.0)


def test_partition_cover_rejected():
    with pytest.raises(ValueError):
        bump_partition([0.25, 0.75], 0.2)
    with pytest.raises(ValueError):
        bump_partition([0.5, 0.4], 0.6)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.floats(0.55, 1.5))
def test_partition_property(n, factor):
    nodes = (np.arange(n) + 0.5) / n
    p = bump_partition(nodes, factor / n)
    phi = p(np.linspace(0, 1, 257))
    assert np.max(np.abs(phi.sum(axis=0) - 1)) <= 1e-12


# -- time-varying blend ------------------------------------------------------

def test_constant_in_time_single_node():
    fam = lambda t: ellipse(64, 1.0, 0.6)
    f = lambda t, z: np.exp(z)
    blend = time_varying_runge(f, fam, eps=1e-6)
    assert blend.info["n"] == 1
    z = np.array([0.3 + 0.1j])
    assert blend(0.2, z) == pytest.approx(blend.pieces[0](z))


def test_blend_is_convex_combination():
    fam = lambda t: ellipse(64, 1.0, 0.6, angle=np.pi * t)
    blend = time_varying_runge(lambda t, z: np.exp(z + t), fam, eps=0.2)
    z = np.array([0.4 + 0.3j, -0.5j])
    for t in np.linspace(0, 1, 21):
        w = blend.partition(t)[:, 0]
        vals = np.array([R(z) for R in blend.pieces])
        np.testing.assert_allclose(blend(t, z), w @ vals, rtol=1e-14)
        assert np.all(w >= 0) and abs(w.sum() - 1) <= 1e-12


def test_blend_failure_reports_best():
    fam = lambda t: ellipse(64, 1.0, 0.6)
    with pytest.raises(ApproximationFailure):
        time_varying_runge(lambda t, z: np.exp(z + 50 * t), fam, eps=1e-3, n_budget=4)


# -- Mergelyan cutoff --------------------------------------------------------

def test_mergelyan_two_disks():
    P = mergelyan_cutoff(Disk(-1.0, 0.05, 64, 2), Disk(1.0, 0.05, 64, 2), 1e-2)
    assert P.coeffs.size - 1 <= 40
    assert P.err_U <= 1e-2 and P.err_V <= 1e-2


def test_mergelyan_empty_V():
    P = mergelyan_cutoff(Disk(0.0, 1.0), np.array([], dtype=complex), 1e-3)
    assert P(np.array([0.3j]))[0] == 1.0


def test_mergelyan_unreachable():
    with pytest.raises(ApproximationFailure):
        mergelyan_cutoff(Disk(-0.01, 0.5, 64, 2), Disk(0.6, 0.5, 64, 2), 1e-6, degree_budget=10)


def test_product_estimate():
    eps = 1e-6
    U = Disk(0.0, 0.5, 64, 3)
    V = Disk(3.0, 0.2, 64, 3)
    R, err = runge_approximate(np.exp, U, eps_target=eps)
    zall = np.concatenate([U.validation_points(), V.validation_points()])
    norm = float(np.max(np.abs(R(zall))))
    P = mergelyan_cutoff(U, V, eps / norm)
    z = U.validation_points()
    assert np.max(np.abs(P(z) * R(z) - np.exp(z))) <= 2 * eps


# -- boundary correction -----------------------------------------------------

def test_zero_data_zero_field():
    bc = boundary_correction(GEO, lambda t, th: 0 * th, K=16, M=256)
    assert np.all(bc.fields[0].a == 0)


def test_extension_keeps_complement_values():
    th = np.linspace(0, 2 * np.pi, 1001)
    ext = extend_complement_data(GEO, np.cos, th)
    comp = th > np.pi
    np.testing.assert_array_equal(ext[comp], np.cos(th[comp]))


@pytest.mark.parametrize("k", [1, 3])
def test_boundary_correction_matches_direct_solve(k):
    M, K = 1024, 40
    bc = boundary_correction(GEO, lambda t, th: np.sin(k * th) + 0.3, K=K, M=M)
    ext = bc.neumann_data[0]
    assert abs(np.mean(ext)) <= 1e-15
    th = bc.theta
    # direct route: Fourier coefficients by explicit sums, r^m / (m R^(m-1)) per mode
    r0 = np.array([0.2, 0.55, 0.9])
    t0 = np.array([0.3, 2.0, 4.4])
    direct = np.zeros(3)
    for m in range(1, K + 1):
        cm = 2 * np.mean(ext * np.cos(m * th))
        sm = 2 * np.mean(ext * np.sin(m * th))
        direct += r0**m / m * (cm * np.cos(m * t0) + sm * np.sin(m * t0))
    np.testing.assert_allclose(bc.fields[0](r0, t0), direct, atol=1e-12)


def test_boundary_correction_constant_reported():
    bc = boundary_correction(GEO, lambda t, th: np.cos(th) * (1 + t), t_grid=(0.0, 0.5, 1.0), K=32, M=512)
    assert bc.constant > 0 and bc.data_norm == pytest.approx(2.0, rel=1e-3)
    mid = bc.at(0.25)
    np.testing.assert_allclose(mid.a, 0.5 * (bc.fields[0].a + bc.fields[1].a))


# -- assembled potential -----------------------------------------------------

def test_cutoff_rho_properties():
    eta = 0.1
    assert cutoff_rho(0.0, eta) == 0.0 and cutoff_rho(1.0, eta) == 0.0
    np.testing.assert_array_equal(cutoff_rho(np.linspace(eta, 1 - eta, 50), eta), 1.0)
    t = np.arange(0, 1 + 1e-12, 1e-4)
    d = np.diff(cutoff_rho(t, eta)) / 1e-4
    assert np.max(np.abs(d)) <= 4.0 / eta
    # bounded second differences: no kinks anywhere, including at eta and 1 - eta
    assert np.max(np.abs(np.diff(d))) <= 1e-4 * 50.0 / eta**2
    i = int(round(eta / 1e-4))
    assert abs(d[i - 1]) <= 1e-6 and abs(d[i]) == 0.0
    with pytest.raises(ValueError):
        cutoff_rho(0.5, 0.6)


def _potential():
    zeta = boundary_correction(GEO, lambda t, th: np.cos(2 * th), K=32, M=512)
    f = lambda t, z: np.exp(z) * (1 + 0.2 * t)
    return assemble_control_potential(f, zeta, 0.2)


def test_potential_vanishes_at_ends():
    phi = _potential()
    for t in (0.0, 1.0):
        gx, gy = phi.gradient(t, np.array([0.1, 0.3]), np.array([0.2, -0.5]))
        assert np.all(gx == 0) and np.all(gy == 0)


def test_potential_is_f_minus_zeta_inside():
    phi = _potential()
    x, y = np.array([0.2, -0.4]), np.array([0.1, 0.3])
    gx, gy = phi.gradient(0.5, x, y)
    w = np.exp(x + 1j * y) * 1.1
    zeta = phi.zeta.at(0.5)
    r, th = np.hypot(x, y), np.arctan2(y, x)
    zx = np.cos(th) * zeta.dr(r, th) - np.sin(th) * zeta.dtheta(r, th) / r
    zy = np.sin(th) * zeta.dr(r, th) + np.cos(th) * zeta.dtheta(r, th) / r
    np.testing.assert_allclose(gx, w.real - zx, rtol=1e-13)
    np.testing.assert_allclose(gy, -w.imag - zy, rtol=1e-13)


def test_potential_gradient_consistent_and_harmonic():
    phi = _potential()
    h = 1e-5
    for x, y in [(0.3, 0.2), (-0.5, 0.1)]:
        gx, gy = phi.gradient(0.5, x, y)
        fx = (phi(0.5, x + h, y) - phi(0.5, x - h, y)) / (2 * h)
        fy = (phi(0.5, x, y + h) - phi(0.5, x, y - h)) / (2 * h)
        assert abs(gx - fx) <= 1e-6 and abs(gy - fy) <= 1e-6
        div = (phi.gradient(0.5, x + h, y)[0] - phi.gradient(0.5, x - h, y)[0]) / (2 * h) + (
            phi.gradient(0.5, x, y + h)[1] - phi.gradient(0.5, x, y - h)[1]
        ) / (2 * h)
        curl = (phi.gradient(0.5, x + h, y)[1] - phi.gradient(0.5, x - h, y)[1]) / (2 * h) - (
            phi.gradient(0.5, x, y + h)[0] - phi.gradient(0.5, x, y - h)[0]
        ) / (2 * h)
        assert abs(div) <= 1e-6 and abs(curl) <= 1e-6
