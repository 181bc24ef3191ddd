"""Command line entry point: ``lagflow <subcommand> ...``.

Exit codes: 0 success, 1 computational failure (divergence, escape,
non-convergence, failed check), 2 usage or precondition error.  Failures
print one line ``lagflow: error=<Kind> reason=<text>`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import cauchy, disk, fd_oracle, flow, runge, steklov

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class ComputationFailed(Exception):
    pass


# -- output helpers ----------------------------------------------------------

def fmt(x):
    return format(float(x), ".17g")


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else (str(c) if isinstance(c, (int, np.integer)) else fmt(c)) for c in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    text = _csv_text(header, rows)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


def write_json(path, obj):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise UsageError(f"{path}: no data rows")
    return rows


def _floats(text, n=None, name="value"):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"could not parse {name} {text!r}")
    if n is not None and len(vals) != n:
        raise UsageError(f"{name} needs {n} comma separated numbers")
    return vals


def _resolve(p):
    return None if p is None or p == "-" else Path(p).expanduser().resolve()


def seed_value(args):
    env = os.environ.get("LAGFLOW_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"LAGFLOW_SEED must be an integer, got {env!r}")
    return int(args.seed)


# -- rectangle subcommands ---------------------------------------------------

def _lateral(variant, alpha):
    if variant == "neumann":
        return steklov.NEUMANN
    if variant == "dirichlet":
        return steklov.DIRICHLET
    if alpha is None:
        raise UsageError("--variant robin needs --alpha")
    return steklov.LateralCondition("robin", float(alpha))


def cmd_modes(args):
    domain = steklov.RectangleDomain(args.l1, args.l2)
    lateral = _lateral(args.variant, args.alpha)
    s, _, _ = steklov.transverse(domain, lateral, args.kmax)
    rows = []
    for j in (0, 1):
        for k in range(args.kmax + 1):
            mu = steklov.eigenvalue(domain, lateral, j, k, top_dirichlet=args.top_dirichlet)
            rows.append((j, k, mu, s[k]))
    write_csv(_resolve(args.out), ["j", "k", "eigenvalue", "transverse_frequency"], rows)
    return EXIT_OK


def _load_cauchy_config(path):
    with open(path) as fh:
        cfg = json.load(fh)
    try:
        dom = cfg["domain"]
        domain = steklov.RectangleDomain(float(dom["l1"]), float(dom["l2"]), dom.get("lstar"))
        lateral = _lateral(cfg.get("variant", "neumann"), cfg.get("alpha"))
        N = int(cfg["N"])
        f0 = cauchy.BoundaryData("Gamma0", cfg["f0"], lateral)
        g0 = cauchy.BoundaryData("Gamma0", cfg["g0"], lateral)
    except KeyError as e:
        raise UsageError(f"config is missing {e}")
    return domain, lateral, N, f0, g0


def cmd_cauchy(args):
    domain, lateral, N, f0, g0 = _load_cauchy_config(args.config)
    field = cauchy.solve_cauchy(f0, g0, domain, N)
    rep = cauchy.compatibility(f0, g0, domain, N)
    out = field.to_dict()
    out["largest_coeff1"] = field.largest_coeff1
    out["verdict"] = rep.verdict
    write_json(_resolve(args.out), out)
    if not rep.compatible:
        raise ComputationFailed(f"divergence indicated, growth exponent {rep.growth_exponent_estimate:.3g}")
    return EXIT_OK


def cmd_design(args):
    if not 0.0 < args.lstar < args.l2:
        raise UsageError(f"--lstar must lie in (0, {args.l2})")
    domain = steklov.RectangleDomain(args.l1, args.l2, args.lstar)
    rows = read_csv(args.target)
    try:
        pairs = [(int(r["k"]), float(r["a_k"])) for r in rows]
    except (KeyError, ValueError):
        raise UsageError("target csv needs columns k,a_k")
    N = max(k for k, _ in pairs)
    a = np.zeros(N + 1)
    for k, v in pairs:
        if k < 0:
            raise UsageError("mode indices must be nonnegative")
        a[k] = v
    gstar = cauchy.BoundaryData("GammaStar", a)
    f0, g0, rep = cauchy.design_control_for_target(gstar, domain, N)
    write_json(
        _resolve(args.out),
        {
            "f0": f0.coeffs.tolist(),
            "g0": g0.coeffs.tolist(),
            "dropped": rep.dropped,
            "log10_max_f0": rep.log10_max_f0,
            "verdict": rep.compatibility.verdict,
            "domain": {"l1": args.l1, "l2": args.l2, "lstar": args.lstar},
        },
    )
    if rep.dropped:
        raise ComputationFailed(f"modes {rep.dropped} overflow and were dropped")
    return EXIT_OK


def cmd_diagnose(args):
    domain, lateral, N, f0, g0 = _load_cauchy_config(args.config)
    if domain.lstar is None:
        raise UsageError("diagnose needs domain.lstar in the config")
    rep = cauchy.compatibility(f0, g0, domain, N)
    rows = [(k, cauchy.amplification_factor(k, domain), rep.partial_sums[k]) for k in range(1, N + 1)]
    write_csv(_resolve(args.out), ["k", "amplification", "clcns_partial_sum"], rows)
    return EXIT_OK


# -- disk control ------------------------------------------------------------

def cmd_disk_control(args):
    a, b = _floats(args.arc, 2, "--arc")
    geom = disk.DiskGeometry(args.R, args.rho, (a, b))
    h = np.zeros(2 * args.K)
    for r in read_csv(args.target):
        try:
            kind, k, v = r["k_sin_or_cos"].strip(), int(r["k"]), float(r["value"])
        except (KeyError, ValueError):
            raise UsageError("target csv needs columns k_sin_or_cos,k,value")
        if kind not in ("cos", "sin") or not 1 <= k <= args.K:
            raise UsageError(f"bad target row {kind},{k}")
        h += disk.mode_vector(args.K, k, kind, v)
    Kcs = [int(x) for x in _floats(args.K_control, name="--K-control")]
    if any(k < 1 for k in Kcs):
        raise UsageError("--K-control entries must be positive")
    rows = []
    res = None
    for Kc in Kcs:
        res = disk.approximate_control(geom, Kc, args.K, h, args.reg)
        rows.append((Kc, res.residual))
    out = _resolve(args.out)
    write_json(
        out,
        {
            "K_control": Kcs[-1],
            "coeffs": res.coeffs.tolist(),
            "weighted_residual": res.residual,
            "dropped_singular_values": res.dropped,
            "achieved": res.achieved.tolist(),
        },
    )
    rpath = _resolve(args.residuals) if args.residuals else (out.parent / "residuals.csv" if out else None)
    write_csv(rpath, ["K_control", "weighted_residual"], rows)
    return EXIT_OK


# -- runge / blend -----------------------------------------------------------

def _parse_complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"could not parse complex number {text!r}")


def cmd_runge(args):
    poles = [_parse_complex(p) for p in args.poles.split(";") if p.strip()] if args.poles else []
    cx, cy, r = _floats(args.region, 3, "--region")
    region = runge.Disk(complex(cx, cy), r)
    spec = args.function
    if spec == "exp":
        f = np.exp
    elif spec.startswith("rational:"):
        s = _parse_complex(spec.split(":", 1)[1])
        f = lambda z, s=s: 1.0 / (z - s)
    elif spec.startswith("file:"):
        rows = read_csv(spec.split(":", 1)[1])
        try:
            z = np.array([complex(float(q["x"]), float(q["y"])) for q in rows])
            w = np.array([complex(float(q["re"]), float(q["im"])) for q in rows])
        except (KeyError, ValueError):
            raise UsageError("sample csv needs columns x,y,re,im")
        table = dict(zip(z.tolist(), w.tolist()))
        f = lambda q: np.array([table[c] for c in np.ravel(q).tolist()]).reshape(np.shape(q))
        region = runge.PointSet(z[0::2], z[1::2])
    else:
        raise UsageError(f"unknown --function {spec!r}")
    R, err = runge.runge_approximate(f, region, poles, args.degree_budget, args.eps)
    out = R.to_dict()
    out["validated_error"] = err
    write_json(_resolve(args.out), out)
    return EXIT_OK


def cmd_blend(args):
    vals = _floats(args.nodes, name="--nodes")
    if len(vals) == 1 and float(vals[0]).is_integer() and vals[0] >= 1:
        nodes = (np.arange(int(vals[0])) + 0.5) / int(vals[0])
    else:
        nodes = np.array(vals)
    kappa = args.kappa if args.kappa is not None else 0.75 / len(nodes)
    part = runge.bump_partition(nodes, kappa)
    t = np.linspace(0.0, 1.0, args.samples)
    phi = part(t)
    rows = [(t[i], *phi[:, i]) for i in range(t.size)]
    write_csv(_resolve(args.out), ["t"] + [f"phi_{j + 1}" for j in range(len(nodes))], rows)
    return EXIT_OK


# -- flow --------------------------------------------------------------------

def _read_curve(path):
    rows = read_csv(path)
    try:
        v = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    except (KeyError, ValueError):
        raise UsageError(f"{path}: curve csv needs columns x,y")
    return flow.JordanCurve(v)


def _field_from_json(path):
    with open(path) as fh:
        d = json.load(fh)
    if "coeffs0" in d:
        return flow.series_gradient_field(cauchy.SeriesField.from_dict(d)), None
    if "poles" in d:
        return flow.cauchy_riemann_rational_field(runge.RationalFunction.from_dict(d)), None
    raise UsageError("field json must hold a series field or a rational function")


def cmd_flow(args):
    curve = _read_curve(args.curve)
    if (args.field is None) == (args.builtin is None):
        raise UsageError("give exactly one of --field and --builtin")
    if args.field:
        X, _ = _field_from_json(args.field)
    else:
        X = {"rotation": flow.rotation_field, "shear": flow.shear_field, "zero": flow.zero_field}[args.builtin]()
    target = _read_curve(args.target) if args.target else None
    if args.steps < 1 or args.snapshots < 1:
        raise UsageError("--steps and --snapshots must be positive")
    outdir = _resolve(args.outdir)
    times = np.linspace(args.t0, args.t1, args.snapshots + 1)
    per = max(1, args.steps // args.snapshots)
    metrics = []
    c = curve
    width = len(str(args.snapshots))
    for i, t in enumerate(times):
        if i > 0:
            c = flow.advect(c, X, times[i - 1], t, per)
        write_csv(outdir / f"curve_t{i:0{width}d}.csv", ["x", "y"], c.vertices.tolist())
        row = [t, flow.enclosed_area(c)]
        if target is not None:
            row.append(flow.curve_distance(c, target))
        metrics.append(row)
    header = ["t", "area"] + (["distance_to_target"] if target is not None else [])
    write_csv(outdir / "metrics.csv", header, metrics)
    return EXIT_OK


# -- verify ------------------------------------------------------------------

def _verify_mixed(seed):
    d = steklov.RectangleDomain()
    out = []
    for k in (1, 2, 5):
        f0 = cauchy.BoundaryData.zeros("Gamma0", 40)
        g1 = cauchy.BoundaryData.single_mode("Gamma1", k, 1.0, N=40)
        fld = cauchy.solve_mixed(f0, g1, d, 40)
        phi = lambda x, k=k: np.sqrt(2.0 / np.pi) * np.cos(k * x)
        bc = {
            "left": fd_oracle.neumann(),
            "right": fd_oracle.neumann(),
            "bottom": fd_oracle.dirichlet(0.0),
            "top": fd_oracle.neumann(phi),
        }
        G = fd_oracle.solve_rectangle(257, 257, d.l1, d.l2, bc)
        X, Y = np.meshgrid(*G.coords, indexing="ij")
        err = fd_oracle.compare(cauchy.eval_field(fld, (X, Y)), G.values, mean_align=True)
        out.append((f"mixed k={k}", "rel_l2", err, 1e-3))
    return out


def _verify_cauchy(seed):
    d = steklov.RectangleDomain()
    out = []
    for k in (1, 4, 8):
        f0 = cauchy.BoundaryData.single_mode("Gamma0", k, 1.0, N=8)
        mu = steklov.eigenvalue(d, steklov.NEUMANN, 0, k)
        g0 = cauchy.BoundaryData.single_mode("Gamma0", k, mu, N=8)
        u = cauchy.solve_cauchy(f0, g0, d, 8)
        dn = cauchy.normal_derivative_gamma0(u)
        err = max(np.max(np.abs(u.coeffs0 - f0.coeffs)), np.max(np.abs(dn.coeffs - g0.coeffs)))
        out.append((f"cauchy k={k}", "coeff_max", err, 1e-10))
    # FD spot check: trace of u on the bottom edge plus its flux on the top edge
    k = 2
    f0 = cauchy.BoundaryData.single_mode("Gamma0", k, 1.0, N=8)
    g0 = cauchy.BoundaryData.single_mode("Gamma0", k, 0.5, N=8)
    u = cauchy.solve_cauchy(f0, g0, d, 8)
    top = lambda x: np.asarray(cauchy.eval_gradient(u, (x, np.full_like(x, d.l2)))[1])
    bot = lambda x: np.asarray(cauchy.eval_field(u, (x, np.zeros_like(x))))
    bc = {"left": fd_oracle.neumann(), "right": fd_oracle.neumann(), "bottom": fd_oracle.dirichlet(bot), "top": fd_oracle.neumann(top)}
    G = fd_oracle.solve_rectangle(129, 129, d.l1, d.l2, bc)
    X, Y = np.meshgrid(*G.coords, indexing="ij")
    out.append(("cauchy fd k=2", "rel_l2", fd_oracle.compare(cauchy.eval_field(u, (X, Y)), G.values), 1e-3))
    return out


def _verify_lambda1(seed):
    g = disk.DiskGeometry(1.0, 0.3, (0.0, np.pi))
    k = 2
    bc = {"inner": fd_oracle.neumann(lambda th: np.cos(k * th)), "outer": fd_oracle.neumann(0.0)}
    G = fd_oracle.solve_polar(129, 128, g.R, bc, inner=g.rho)
    th = G.coords[1]
    trace = G.values[0]
    fd = 2.0 * np.mean(trace * np.cos(k * th))
    exact = disk.lambda1(g, k).diagonal[2 * (k - 1)]
    return [("disk-lambda1 k=2", "rel", abs(fd - exact) / exact, 1e-2)]


def _verify_lambda2(seed):
    g = disk.DiskGeometry(1.0, 0.5, (0.0, np.pi))
    out = []
    for k in (1, 3):
        G = fd_oracle.solve_polar(129, 128, g.rho, {"outer": fd_oracle.dirichlet(lambda th, k=k: np.cos(k * th))})
        r, th = G.coords
        dr = fd_oracle.one_sided_derivative(G.values, r[-1] - r[-2], axis=0, at="end")
        fd = 2.0 * np.mean(dr * np.cos(k * th))
        exact = disk.lambda2(g, k).diagonal[2 * (k - 1)]
        out.append((f"disk-lambda2 k={k}", "rel", abs(fd - exact) / exact, 1e-2))
    return out


def _verify_duality(seed):
    g = disk.DiskGeometry(1.0, 0.3, (0.0, np.pi))
    rng = np.random.default_rng(seed)
    K = 32
    worst = 0.0
    for _ in range(100):
        v = rng.standard_normal(2 * K)
        phi = rng.standard_normal(2 * K)
        worst = max(worst, disk.duality_identity_residual(g, K, v, phi))
    return [("duality K=32 pairs=100", "abs", worst, 1e-9)]


VERIFY_CASES = {
    "mixed": _verify_mixed,
    "cauchy": _verify_cauchy,
    "disk-lambda1": _verify_lambda1,
    "disk-lambda2": _verify_lambda2,
    "duality": _verify_duality,
}


def cmd_verify(args):
    seed = seed_value(args)
    cases = list(VERIFY_CASES) if args.case == "all" else [args.case]
    ok = True
    for name in cases:
        for label, metric, err, tol in VERIFY_CASES[name](seed):
            passed = bool(err <= tol)
            ok &= passed
            print(f"{'PASS' if passed else 'FAIL'} {label} {metric}={err:.3e} tol={tol:.1e}")
    if not ok:
        raise ComputationFailed("at least one verification case failed")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for randomised checks (LAGFLOW_SEED wins)")
    p = _Parser(prog="lagflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    m = sub.add_parser("modes", parents=[common], help="Steklov eigenvalues on the rectangle")
    m.add_argument("--l1", type=float, default=np.pi)
    m.add_argument("--l2", type=float, default=1.0)
    m.add_argument("--variant", choices=["neumann", "dirichlet", "robin"], default="neumann")
    m.add_argument("--alpha", type=float)
    m.add_argument("--kmax", type=int, default=10)
    m.add_argument("--top-dirichlet", action="store_true")
    m.add_argument("--out")
    m.set_defaults(func=cmd_modes)

    c = sub.add_parser("cauchy", parents=[common], help="series solution of the Cauchy problem")
    c.add_argument("--config", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_cauchy)

    d = sub.add_parser("design", parents=[common], help="Cauchy data reaching a target flux on y = lstar")
    d.add_argument("--target", required=True)
    d.add_argument("--lstar", type=float, required=True)
    d.add_argument("--l1", type=float, default=np.pi)
    d.add_argument("--l2", type=float, default=1.0)
    d.add_argument("--out")
    d.set_defaults(func=cmd_design)

    g = sub.add_parser("diagnose", parents=[common], help="amplification and compatibility partial sums")
    g.add_argument("--config", required=True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_diagnose)

    k = sub.add_parser("disk-control", parents=[common], help="regularised arc control on the disk")
    k.add_argument("--rho", type=float, default=0.3)
    k.add_argument("--R", type=float, default=1.0)
    k.add_argument("--arc", default=f"0,{np.pi!r}")
    k.add_argument("--K", type=int, default=32, help="circle modes on gamma")
    k.add_argument("--K-control", default="8,16,32,64", help="comma separated arc mode counts")
    k.add_argument("--target", required=True)
    k.add_argument("--reg", type=float, default=1e-10)
    k.add_argument("--out")
    k.add_argument("--residuals")
    k.set_defaults(func=cmd_disk_control)

    r = sub.add_parser("runge", parents=[common], help="rational approximation with prescribed poles")
    r.add_argument("--function", default="exp")
    r.add_argument("--region", default="0,0,1")
    r.add_argument("--poles", default="")
    r.add_argument("--eps", type=float, default=1e-8)
    r.add_argument("--degree-budget", type=int, default=40)
    r.add_argument("--out")
    r.set_defaults(func=cmd_runge)

    b = sub.add_parser("blend", parents=[common], help="smooth partition of unity on [0, 1]")
    b.add_argument("--nodes", required=True, help="node count or comma separated node list")
    b.add_argument("--kappa", type=float)
    b.add_argument("--samples", type=int, default=1001)
    b.add_argument("--out")
    b.set_defaults(func=cmd_blend)

    f = sub.add_parser("flow", parents=[common], help="advect a closed curve")
    f.add_argument("--curve", required=True)
    f.add_argument("--field")
    f.add_argument("--builtin", choices=["rotation", "shear", "zero"])
    f.add_argument("--t0", type=float, default=0.0)
    f.add_argument("--t1", type=float, default=1.0)
    f.add_argument("--steps", type=int, default=1000)
    f.add_argument("--snapshots", type=int, default=1)
    f.add_argument("--target")
    f.add_argument("--outdir", default=".")
    f.set_defaults(func=cmd_flow)

    v = sub.add_parser("verify", parents=[common], help="cross-checks against the finite-difference oracle")
    v.add_argument("--case", choices=["all"] + list(VERIFY_CASES), default="all")
    v.set_defaults(func=cmd_verify)
    return p


USAGE_ERRORS = (UsageError, steklov.InvalidInput, disk.InvalidGeometry, flow.InvalidCurve, FileNotFoundError)
COMPUTE_ERRORS = (
    ComputationFailed,
    steklov.SpectralSolveError,
    fd_oracle.OracleFailure,
    flow.TransportEscape,
    runge.ApproximationFailure,
    np.linalg.LinAlgError,
)


def _report(kind, exc):
    msg = " ".join(str(exc).split())
    print(f"lagflow: error={kind} reason={msg}", file=sys.stderr)


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except USAGE_ERRORS as e:
        _report(type(e).__name__, e)
        return EXIT_USAGE
    except COMPUTE_ERRORS as e:
        _report(type(e).__name__, e)
        return EXIT_FAIL
    except (ValueError, json.JSONDecodeError) as e:
        _report(type(e).__name__, e)
        return EXIT_USAGE
    except SystemExit as e:
        # --help exits 0 through argparse
        return int(e.code or 0)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
