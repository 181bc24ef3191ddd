"""The twelve acceptance criteria, each at its stated tolerance and time limit.

Every test prints one ``PASS``/``FAIL`` line, collected again in the
terminal summary under "acceptance criteria".
"""

import os
import subprocess
import sys
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from lagflow import fd_oracle as fd
from lagflow.cauchy import (
    BoundaryData,
    amplification_factor,
    design_control_for_target,
    eval_field,
    mixed_normal_derivative_closed_form,
    normal_derivative_at,
    normal_derivative_gamma0,
    solve_cauchy,
    solve_mixed,
)
from lagflow.disk import (
    DiskGeometry,
    approximate_control,
    duality_identity_residual,
    lemma_ab_invertibility,
    mode_vector,
)
from lagflow.flow import (
    advect,
    cauchy_riemann_rational_field,
    circle,
    disk_domain,
    ellipse,
    enclosed_area,
    rotation_field,
)
from lagflow.runge import (
    Disk,
    RationalFunction,
    bump_partition,
    fit_rational,
    runge_approximate,
    time_varying_runge,
)
from lagflow.steklov import NEUMANN, RectangleDomain, eigenvalue


def _report(n, ok, detail, elapsed, limit=None):
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit is not None else "")
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail} time={timing}"
    print(line)
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} {n}: {detail} time={timing}")
    assert ok, line


def test_criterion_01_steklov_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for l2 in (0.5, 1.0, 2.0):
        d = RectangleDomain(np.pi, l2)
        for k in range(1, 51):
            prod = eigenvalue(d, NEUMANN, 0, k) * eigenvalue(d, NEUMANN, 1, k)
            worst = max(worst, abs(prod - k * k) / (k * k))
    el = time.perf_counter() - t0
    _report(1, worst <= 1e-10 and el < 1.0, f"max |mu0 mu1 - k^2|/k^2 = {worst:.2e} (tol 1e-10)", el, 1)


def test_criterion_02_mixed_vs_oracle():
    t0 = time.perf_counter()
    d = RectangleDomain(np.pi, 1.0)
    n, N = 257, 40
    errs = []
    for k in (1, 2, 5):
        f0 = BoundaryData.single_mode("Gamma0", k, 0.5, N=N)
        g1 = BoundaryData.single_mode("Gamma1", k, N=N)
        v = solve_mixed(f0, g1, d, N)
        bc = {
            "left": fd.neumann(0.0),
            "right": fd.neumann(0.0),
            "bottom": fd.dirichlet(lambda x, k=k: 0.5 * np.sqrt(2 / np.pi) * np.cos(k * x)),
            "top": fd.neumann(lambda x, k=k: np.sqrt(2 / np.pi) * np.cos(k * x)),
        }
        g = fd.solve_rectangle(n, n, np.pi, 1.0, bc)
        X, Y = np.meshgrid(*g.coords, indexing="ij")
        errs.append(fd.compare(eval_field(v, (X, Y)), g.values, norm="L2", mean_align=True))
    el = time.perf_counter() - t0
    worst = max(errs)
    detail = "rel L2 k=1,2,5: " + ", ".join(f"{e:.2e}" for e in errs) + " (tol 1e-3)"
    _report(2, worst <= 1e-3 and el < 30, detail, el, 30)


def test_criterion_03_cauchy_round_trip():
    t0 = time.perf_counter()
    d = RectangleDomain(np.pi, 1.0)
    worst = 0.0
    for k in range(1, 9):
        f0 = BoundaryData.single_mode("Gamma0", k, N=8)
        g0 = BoundaryData.single_mode("Gamma0", k, k * np.tanh(k), N=8)
        u = solve_cauchy(f0, g0, d, 8)
        worst = max(worst, np.max(np.abs(u.coeffs0 - f0.coeffs)))
        worst = max(worst, np.max(np.abs(normal_derivative_gamma0(u).coeffs - g0.coeffs)))
    el = time.perf_counter() - t0
    _report(3, worst <= 1e-10 and el < 1.0, f"max coefficient error {worst:.2e} (tol 1e-10)", el, 1)


def test_criterion_04_dv_dn_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    d = RectangleDomain(np.pi, 1.0)
    N = 32
    worst = 0.0
    for _ in range(20):
        f0 = BoundaryData("Gamma0", rng.standard_normal(N + 1))
        g1 = BoundaryData("Gamma1", rng.standard_normal(N + 1))
        a = normal_derivative_gamma0(solve_mixed(f0, g1, d, N)).coeffs
        b = mixed_normal_derivative_closed_form(f0, g1, d, N).coeffs
        worst = max(worst, np.max(np.abs(a - b)))
    el = time.perf_counter() - t0
    _report(4, worst <= 1e-12, f"max coefficient gap {worst:.2e} (tol 1e-12)", el)


def test_criterion_05_amplification_and_design():
    t0 = time.perf_counter()
    d = RectangleDomain(np.pi, 1.0, 0.5)
    ratios = [amplification_factor(k, d) / np.exp(0.5 * k) for k in range(3, 16)]
    in_band = all(0.5 <= r <= 2.0 for r in ratios)
    worst = 0.0
    for k in range(3, 16):
        target = BoundaryData.single_mode("GammaStar", k, N=15)
        f0, g0, _ = design_control_for_target(target, d)
        back = normal_derivative_at(solve_cauchy(f0, g0, d, 15), 0.5).coeffs
        worst = max(worst, abs(back[k] - 1.0), np.max(np.abs(np.delete(back, k))))
    el = time.perf_counter() - t0
    detail = (
        f"ratio range [{min(ratios):.4f}, {max(ratios):.4f}] (band [0.5, 2]), "
        f"design round trip rel {worst:.2e} (tol 1e-10)"
    )
    _report(5, in_band and worst <= 1e-10 and el < 1.0, detail, el, 1)


def test_criterion_06_duality_identity():
    t0 = time.perf_counter()
    geo = DiskGeometry(1.0, 0.3, (0.0, np.pi))
    rng = np.random.default_rng(6)
    K = 32
    worst = max(
        duality_identity_residual(geo, K, rng.standard_normal(2 * K), rng.standard_normal(2 * K)) for _ in range(100)
    )
    el = time.perf_counter() - t0
    _report(6, worst <= 1e-9 and el < 5, f"max residual over 100 pairs {worst:.2e} (tol 1e-9)", el, 5)


def test_criterion_07_lemma_audit():
    t0 = time.perf_counter()
    rep = lemma_ab_invertibility(n=200, trials=50, lambdas=(0.1, 1.0, 10.0), seed=7)
    el = time.perf_counter() - t0
    res = max(rep.max_residual.values())
    ok = rep.failures == 0 and res <= 1e-8 and el < 60
    detail = f"failures {rep.failures}, min sv {min(rep.min_singular.values()):.3f}, max residual {res:.2e} (tol 1e-8)"
    _report(7, ok, detail, el, 60)


def test_criterion_08_density_trend():
    t0 = time.perf_counter()
    geo = DiskGeometry(1.0, 0.3, (0.0, np.pi))
    K = 16
    h = mode_vector(K, 1)
    res = [approximate_control(geo, kc, K, h, reg=1e-10).relative_residual for kc in (8, 16, 32, 64)]
    el = time.perf_counter() - t0
    monotone = all(b <= a for a, b in zip(res, res[1:]))
    ok = monotone and res[-1] <= 1e-2 and el < 10
    detail = "residuals K_control=8,16,32,64: " + ", ".join(f"{r:.4g}" for r in res) + " (nonincreasing, final <= 1e-2)"
    _report(8, ok, detail, el, 10)


def test_criterion_09_runge():
    t0 = time.perf_counter()
    f = lambda z: 1.0 / (z - 3.0) - 0.25 / (z - 3.0) ** 2
    _, exact_err = runge_approximate(f, Disk(0.0, 1.0), poles=[3.0], eps_target=1e-13, degree_budget=4)
    _, _, exp_err = fit_rational(np.exp, Disk(0.0, 1.0), degree=12)
    fam = lambda t: ellipse(128, 1.0, 0.6, angle=np.pi * t)
    blend = time_varying_runge(lambda t, z: np.exp(z + 0.1 * t), fam, eps=1e-3)
    el = time.perf_counter() - t0
    ok = exact_err <= 1e-13 and exp_err <= 1e-8 and blend.validated_sup <= 1e-3 and el < 30
    detail = (
        f"in-basis {exact_err:.1e} (tol 1e-13), exp deg 12 {exp_err:.1e} (tol 1e-8), "
        f"blend sup {blend.validated_sup:.2e} with n={blend.info['n']} (tol 1e-3)"
    )
    _report(9, ok, detail, el, 30)


def test_criterion_10_partition_of_unity():
    t0 = time.perf_counter()
    n = 9
    nodes = (np.arange(n) + 0.5) / n
    kappa = 0.75 / n
    p = bump_partition(nodes, kappa)
    t = np.linspace(0.0, 1.0, 1001)
    phi = p(t)
    sum_err = float(np.max(np.abs(phi.sum(axis=0) - 1.0)))
    supports = all(np.all(phi[j, (t <= nodes[j] - kappa) | (t >= nodes[j] + kappa)] == 0.0) for j in range(n))
    el = time.perf_counter() - t0
    _report(10, sum_err <= 1e-12 and supports, f"max |sum phi - 1| {sum_err:.1e} (tol 1e-12), supports exact {supports}", el)


def test_criterion_11_flow():
    t0 = time.perf_counter()
    c = circle(256, 0.8)
    out = advect(c, rotation_field(), 0.0, np.pi / 2, 1000)
    v = c.vertices
    rot_err = float(np.max(np.abs(out.vertices - np.column_stack([-v[:, 1], v[:, 0]]))))
    X = cauchy_riemann_rational_field(RationalFunction([3.0], [[0.5]], [0.2, 0.1j]))
    c2 = circle(512, 0.5)
    moved = advect(c2, X, 0.0, 1.0, 1000, domain=disk_domain(1.0))
    drift = abs(enclosed_area(moved) - enclosed_area(c2)) / enclosed_area(c2)
    back = advect(moved, X, 1.0, 0.0, 1000)
    rev = float(np.max(np.abs(back.vertices - c2.vertices)))
    el = time.perf_counter() - t0
    ok = rot_err <= 1e-10 and drift <= 1e-6 and rev <= 1e-8 and el < 10
    detail = f"rotation {rot_err:.1e} (tol 1e-10), area drift {drift:.1e} (tol 1e-6), reversibility {rev:.1e} (tol 1e-8)"
    _report(11, ok, detail, el, 10)


def test_criterion_12_determinism():
    t0 = time.perf_counter()
    env = dict(os.environ)
    env.pop("LAGFLOW_SEED", None)
    cmd = [sys.executable, "-m", "lagflow", "verify", "--seed", "11"]
    a = subprocess.run(cmd, capture_output=True, env=env, check=False)
    b = subprocess.run(cmd, capture_output=True, env=env, check=False)
    el = time.perf_counter() - t0
    same = a.stdout == b.stdout and a.returncode == b.returncode == 0 and len(a.stdout) > 0
    _report(12, same, f"two verify runs byte-identical: {same} ({len(a.stdout)} bytes, exit {a.returncode})", el)
