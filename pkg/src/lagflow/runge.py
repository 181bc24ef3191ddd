"""Rational approximation with prescribed poles and the smooth time blend.

Fits are linear least squares in the scaled basis

    ((z - c) / r)^j,  j = 0..d        and        (r / (z - s))^m,  m = 1..d, s in S,

where c, r are the centre and radius of the sample cloud.  Every fit is
checked on a held-out sample set before it is accepted.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import exp1

from .disk import AnnulusField, DiskGeometry

log = logging.getLogger(__name__)

__all__ = [
    "ApproximationFailure",
    "Disk",
    "PointSet",
    "CurveFamilyRegion",
    "SampledHolomorphicFunction",
    "RationalFunction",
    "Partition",
    "TimeVaryingRational",
    "BoundaryCorrection",
    "ControlPotential",
    "cauchy_riemann_field",
    "runge_approximate",
    "fit_rational",
    "Psi",
    "smoothstep",
    "bump_partition",
    "time_varying_runge",
    "mergelyan_cutoff",
    "extend_complement_data",
    "boundary_correction",
    "cutoff_rho",
    "assemble_control_potential",
]


class ApproximationFailure(RuntimeError):
    """Raised when a degree or refinement budget runs out; carries the best result."""

    def __init__(self, message, best_error, best=None):
        super().__init__(f"{message} (best error {best_error:.3e})")
        self.best_error = float(best_error)
        self.best = best


# -- regions -----------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    """Closed disk |z - center| <= radius, sampled on rings."""

    center: complex = 0.0
    radius: float = 1.0
    n_boundary: int = 256
    n_rings: int = 6

    def contains(self, z, tol=1e-12):
        return np.abs(np.asarray(z) - self.center) <= self.radius * (1 + tol)

    def _rings(self, n, shift):
        pts = []
        for i in range(self.n_rings + 1):
            rr = self.radius * (1.0 - i / (self.n_rings + 1))
            m = max(8, int(round(n * rr / self.radius)))
            th = 2 * np.pi * (np.arange(m) + shift) / m
            pts.append(self.center + rr * np.exp(1j * th))
        pts.append(np.array([self.center + 0j]))
        return np.concatenate(pts)

    def fit_points(self):
        return self._rings(self.n_boundary, 0.0)

    def validation_points(self):
        # offset half a step and denser, so no validation point is a fit point
        return self._rings(2 * self.n_boundary + 1, 0.5)


@dataclass(frozen=True)
class PointSet:
    fit: np.ndarray
    validation: np.ndarray = None

    def fit_points(self):
        return np.asarray(self.fit, dtype=complex)

    def validation_points(self):
        return np.asarray(self.fit if self.validation is None else self.validation, dtype=complex)

    def contains(self, z, tol=0.0):
        return np.ones(np.shape(z), dtype=bool)


def _curve_points(curve):
    v = curve.vertices
    return v[:, 0] + 1j * v[:, 1]


def _curve_mid(curve):
    m = curve.edge_midpoints()
    return m[:, 0] + 1j * m[:, 1]


@dataclass
class CurveFamilyRegion:
    """Union of insd(gamma_t) for t in a time window, sampled on the curves.

    Holomorphic differences attain their maximum modulus on each gamma_t, so
    curve samples suffice for sup norms over the union of interiors.
    """

    family: object
    t_lo: float = 0.0
    t_hi: float = 1.0
    n_times: int = 17

    def _times(self, n):
        return np.linspace(self.t_lo, self.t_hi, n)

    def fit_points(self):
        return np.concatenate([_curve_points(self.family(t)) for t in self._times(self.n_times)])

    def validation_points(self):
        ts = self._times(2 * self.n_times - 1)
        return np.concatenate([_curve_mid(self.family(t)) for t in ts])

    def contains(self, z, tol=0.0):
        return np.ones(np.shape(z), dtype=bool)


@dataclass
class SampledHolomorphicFunction:
    """Holomorphic f given by an evaluator, with the region where it is declared analytic.

    ``evaluator(z)`` or, when ``time_dependent``, ``evaluator(t, z)``.
    """

    evaluator: object
    region: object = None
    time_dependent: bool = False

    def __call__(self, *args):
        z = np.asarray(args[-1])
        if self.region is not None and not np.all(self.region.contains(z)):
            raise ValueError("point outside the declared analyticity region")
        return np.asarray(self.evaluator(*args), dtype=complex)


def cauchy_riemann_field(f, point):
    """V_f = (Re f, -Im f) at ``point = (x, y)``."""
    x, y = point
    z = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
    w = f(z)
    if np.ndim(w) == 0:
        return float(np.real(w)), float(-np.imag(w))
    return np.real(w), -np.imag(w)


# -- rational functions ------------------------------------------------------

@dataclass
class RationalFunction:
    """poly(w) + sum_s sum_m weights[s][m-1] (z - s)^-m with w = (z - center) / scale."""

    poles: list
    weights: list
    poly: np.ndarray
    center: complex = 0.0
    scale: float = 1.0

    def __post_init__(self):
        self.poles = [complex(s) for s in self.poles]
        self.weights = [np.asarray(w, dtype=complex) for w in self.weights]
        self.poly = np.asarray(self.poly, dtype=complex)
        if len(self.poles) != len(self.weights):
            raise ValueError("one weight vector per pole")
        coeffs = np.concatenate([self.poly] + self.weights) if self.weights else self.poly
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")

    @property
    def orders(self):
        return [w.size for w in self.weights]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        w = (z - self.center) / self.scale
        out = np.zeros(z.shape, dtype=complex)
        for c in self.poly[::-1]:
            out = out * w + c
        for s, ws in zip(self.poles, self.weights):
            inv = 1.0 / (z - s)
            acc = np.zeros(z.shape, dtype=complex)
            for c in ws[::-1]:
                acc = (acc + c) * inv
            out = out + acc
        return out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        w = (z - self.center) / self.scale
        out = np.zeros(z.shape, dtype=complex)
        n = self.poly.size
        for j in range(n - 1, 0, -1):
            out = out * w + j * self.poly[j]
        out = out / self.scale
        for s, ws in zip(self.poles, self.weights):
            inv = 1.0 / (z - s)
            for m, c in enumerate(ws, start=1):
                out = out - m * c * inv ** (m + 1)
        return out

    def to_dict(self):
        return {
            "poles": [
                {"re": s.real, "im": s.imag, "order": int(w.size)} for s, w in zip(self.poles, self.weights)
            ],
            "coeffs": [[[c.real, c.imag] for c in w] for w in self.weights],
            "poly": [[c.real, c.imag] for c in self.poly],
            "center": [complex(self.center).real, complex(self.center).imag],
            "scale": self.scale,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        poles = [complex(p["re"], p["im"]) for p in d["poles"]]
        weights = [np.array([complex(a, b) for a, b in w]) for w in d["coeffs"]]
        poly = np.array([complex(a, b) for a, b in d["poly"]])
        c = d.get("center", [0.0, 0.0])
        return cls(poles, weights, poly, complex(c[0], c[1]), float(d.get("scale", 1.0)))


def _design(z, center, scale, degree, poles, pole_order):
    w = (z - center) / scale
    cols = [w**j for j in range(degree + 1)]
    for s in poles:
        q = scale / (z - s)
        cols += [q**m for m in range(1, pole_order + 1)]
    return np.column_stack(cols)


def fit_rational(f, region, poles=(), degree=8, pole_order=None):
    """One least-squares fit at fixed degree; returns (R, fit error, validation error)."""
    poles = [complex(s) for s in poles]
    pole_order = degree if pole_order is None else pole_order
    zf = region.fit_points()
    zv = region.validation_points()
    zall = np.concatenate([zf, zv])
    center = complex(np.mean(zall))
    scale = float(np.max(np.abs(zall - center))) or 1.0
    for s in poles:
        if np.min(np.abs(zall - s)) <= 1e-12 * scale:
            raise ValueError(f"pole {s} lies on the sample set")
    A = _design(zf, center, scale, degree, poles, pole_order)
    b = np.asarray(f(zf), dtype=complex)
    # equilibrate columns before the solve
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    c, *_ = np.linalg.lstsq(A / norms, b, rcond=None)
    c = c / norms
    poly = c[: degree + 1]
    weights = []
    off = degree + 1
    for _ in poles:
        ws = c[off : off + pole_order] * scale ** np.arange(1, pole_order + 1)
        weights.append(ws)
        off += pole_order
    R = RationalFunction(poles, weights, poly, center, scale)
    fit_err = float(np.max(np.abs(R(zf) - b)))
    val_err = float(np.max(np.abs(R(zv) - np.asarray(f(zv), dtype=complex))))
    return R, fit_err, val_err


def runge_approximate(f, region, poles=(), degree_budget=40, eps_target=1e-10, degree_start=1, degree_step=1):
    """Raise the degree until the held-out error meets ``eps_target``.

    Returns ``(R, validated_error)``.  Raises :class:`ApproximationFailure`
    carrying the best fit if ``degree_budget`` runs out first.
    """
    best = None
    best_err = np.inf
    d = degree_start
    while d <= degree_budget:
        R, _, err = fit_rational(f, region, poles, d)
        if err < best_err:
            best, best_err = R, err
        if err <= eps_target:
            return R, err
        d += degree_step
    raise ApproximationFailure(f"no fit within degree {degree_budget}", best_err, best)


# -- bump functions ----------------------------------------------------------

def Psi(x):
    """Psi(x) = int_{-inf}^x psi, psi(s) = exp(-1/s) for s > 0 and 0 otherwise.

    Closed form x e^{-1/x} - E1(1/x) for x > 0.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    pos = x > 0
    xp = x[pos]
    with np.errstate(over="ignore", under="ignore"):
        out[pos] = xp * np.exp(-1.0 / xp) - exp1(1.0 / xp)
    # the difference loses relative accuracy once it is far below its terms; clip rounding
    out[pos] = np.maximum(out[pos], 0.0)
    return out if out.ndim else float(out)


def _raw_bump(x):
    x = np.asarray(x, dtype=float)
    return Psi(x) * Psi(1.0 - x)


def smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = Psi(x)
    b = Psi(1.0 - x)
    out = np.where(x >= 1.0, 1.0, np.where(x <= 0.0, 0.0, a / np.where(a + b > 0, a + b, 1.0)))
    return out if out.ndim else float(out)


@dataclass
class Partition:
    nodes: np.ndarray
    kappa: float

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)

    def raw(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = (t[None, :] - (self.nodes[:, None] - self.kappa)) / (2.0 * self.kappa)
        return _raw_bump(x)

    def __call__(self, t):
        """Rows phi_j(t); columns follow ``t``."""
        B = self.raw(t)
        return B / np.sum(B, axis=0, keepdims=True)

    def support(self, j):
        return max(0.0, self.nodes[j] - self.kappa), min(1.0, self.nodes[j] + self.kappa)


def _covers(nodes, kappa):
    # open intervals must cover [0, 1]: check gaps between consecutive intervals and both ends
    lo = nodes - kappa
    hi = nodes + kappa
    if lo[0] >= 0.0 or hi[-1] <= 1.0:
        return False
    return bool(np.all(lo[1:] < hi[:-1]))


def bump_partition(nodes, kappa):
    """Partition of unity on [0, 1] subordinate to the intervals (t_j - kappa, t_j + kappa)."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size == 0:
        raise ValueError("need at least one node")
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("nodes must be strictly increasing")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if not _covers(nodes, kappa):
        raise ValueError("intervals (t_j - kappa, t_j + kappa) do not cover [0, 1]")
    return Partition(nodes, float(kappa))


# -- time-varying blend ------------------------------------------------------

@dataclass
class TimeVaryingRational:
    partition: Partition
    pieces: list
    validated_sup: float = np.nan
    info: dict = field(default_factory=dict)

    def __call__(self, t, z):
        w = self.partition(t)[:, 0]
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for wj, R in zip(w, self.pieces):
            if wj != 0.0:
                out = out + wj * R(z)
        return out

    def derivative(self, t, z):
        w = self.partition(t)[:, 0]
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for wj, R in zip(w, self.pieces):
            if wj != 0.0:
                out = out + wj * R.derivative(z)
        return out


def _uniform_nodes(n):
    return (np.arange(n) + 0.5) / n


class _CurveCache:
    """Curves of the family on dyadic times i / (4 n), reused across refinements."""

    def __init__(self, family):
        self.family = family
        self.store = {}

    def get(self, t):
        c = self.store.get(t)
        if c is None:
            curve = self.family(t)
            c = (_curve_points(curve), _curve_mid(curve))
            self.store[t] = c
        return c

    def window(self, n, lo, hi):
        # every window end is a multiple of 1 / (4 n), so it is on the grid
        i0, i1 = int(round(lo * 4 * n)), int(round(hi * 4 * n))
        return [i / (4 * n) for i in range(i0, i1 + 1)]


def time_varying_runge(
    f,
    curve_family,
    poles=(),
    eps=1e-3,
    n_start=1,
    n_budget=1024,
    degree_budget=40,
    validation_times=101,
):
    """Smooth-in-time rational approximation of f(t, .) on the moving interiors.

    Nodes are uniform, t_j = (j + 1/2) / n, with kappa = 0.75 / n; n doubles
    until the time-modulus test passes on curves sampled at times i / (4 n).
    Each node gets a Runge fit to eps / 2 on the curves of its window, and
    the blend is validated on a (t, z) product grid.
    """
    cache = _CurveCache(curve_family)
    n = n_start
    worst = np.inf
    while True:
        if n > n_budget:
            raise ApproximationFailure("time-modulus refinement exhausted", worst)
        nodes = _uniform_nodes(n)
        kappa = 0.75 / n
        worst = 0.0
        for tj in nodes:
            ts = cache.window(n, max(0.0, tj - kappa), min(1.0, tj + kappa))
            z = np.concatenate([cache.get(s)[0] for s in ts])
            fj = f(tj, z)
            for t in ts:
                worst = max(worst, float(np.max(np.abs(f(t, z) - fj))))
        if worst <= eps / 2:
            break
        n *= 2
    part = bump_partition(nodes, kappa)
    pieces = []
    degree = 1
    for tj in nodes:
        ts = cache.window(n, max(0.0, tj - kappa), min(1.0, tj + kappa))
        region = PointSet(
            np.concatenate([cache.get(s)[0] for s in ts]),
            np.concatenate([cache.get(s)[1] for s in ts]),
        )
        R, _ = runge_approximate(
            lambda z, tj=tj: f(tj, z), region, poles, degree_budget, eps / 2, degree_start=max(1, degree - 1)
        )
        degree = R.poly.size - 1
        pieces.append(R)
    blend = TimeVaryingRational(part, pieces, info={"n": n, "kappa": kappa, "time_modulus": worst})
    sup = 0.0
    for t in np.linspace(0.0, 1.0, validation_times):
        c = curve_family(t)
        z = np.concatenate([_curve_points(c), _curve_mid(c)])
        sup = max(sup, float(np.max(np.abs(blend(t, z) - f(t, z)))))
    blend.validated_sup = sup
    if sup > eps:
        raise ApproximationFailure("blend failed validation", sup, blend)
    return blend


# -- Mergelyan cutoff --------------------------------------------------------

@dataclass
class CutoffPolynomial:
    coeffs: np.ndarray
    center: complex
    scale: float
    err_U: float
    err_V: float

    def __call__(self, z):
        w = (np.asarray(z, dtype=complex) - self.center) / self.scale
        out = np.zeros(w.shape, dtype=complex)
        for c in self.coeffs[::-1]:
            out = out * w + c
        return out

    def derivative(self, z):
        w = (np.asarray(z, dtype=complex) - self.center) / self.scale
        out = np.zeros(w.shape, dtype=complex)
        for j in range(self.coeffs.size - 1, 0, -1):
            out = out * w + j * self.coeffs[j]
        return out / self.scale


def _as_region(x):
    if hasattr(x, "fit_points"):
        return x
    return PointSet(np.asarray(x, dtype=complex))


def mergelyan_cutoff(U, V, tol, degree_budget=60, degree_start=0):
    """Polynomial close to 1 on U and to 0 on V, both within ``tol`` on validation samples.

    ``tol`` plays the role of eps / ||R||; U and V are regions or point arrays.
    """
    U = _as_region(U)
    V = _as_region(V)
    zu, zv = U.fit_points(), V.fit_points()
    if zv.size == 0:
        return CutoffPolynomial(np.array([1.0 + 0j]), 0.0, 1.0, 0.0, 0.0)
    vu, vv = U.validation_points(), V.validation_points()
    allz = np.concatenate([zu, zv, vu, vv])
    center = complex(np.mean(allz))
    scale = float(np.max(np.abs(allz - center)))
    z = np.concatenate([zu, zv])
    b = np.concatenate([np.ones(zu.size), np.zeros(zv.size)]).astype(complex)
    best = None
    for d in range(degree_start, degree_budget + 1):
        A = ((z - center) / scale)[:, None] ** np.arange(d + 1)[None, :]
        c, *_ = np.linalg.lstsq(A, b, rcond=None)
        P = CutoffPolynomial(c, center, scale, 0.0, 0.0)
        P.err_U = float(np.max(np.abs(P(vu) - 1.0)))
        P.err_V = float(np.max(np.abs(P(vv))))
        if best is None or max(P.err_U, P.err_V) < max(best.err_U, best.err_V):
            best = P
        if P.err_U <= tol and P.err_V <= tol:
            return P
    raise ApproximationFailure("cutoff targets unreachable", max(best.err_U, best.err_V), best)


# -- boundary correction -----------------------------------------------------

def _on_arc(theta, arc):
    t = np.mod(theta, 2 * np.pi)
    return (t >= arc[0]) & (t <= arc[1])


def extend_complement_data(geometry, values, theta, taper=0.25):
    """Extend data given off the control arc onto the arc, with zero mean.

    ``values(theta)`` is only read on the complement and at the two arc
    endpoints.  On the arc the endpoint values fade out with cosine tapers
    over ``taper`` times the arc length; the mean is then removed by a
    sin^2 bump supported inside the arc, so the complement data are kept.
    """
    a, b = geometry.arc
    L = geometry.arc_length
    theta = np.asarray(theta, dtype=float)
    t = np.mod(theta, 2 * np.pi)
    inside = _on_arc(t, geometry.arc)
    va, vb = float(values(np.array([a]))[0]), float(values(np.array([b]))[0])
    width = taper * L

    def taper_fn(s):
        return np.where(s < width, 0.5 * (1.0 + np.cos(np.pi * np.clip(s, 0, width) / width)), 0.0)

    ext = np.where(inside, 0.0, np.asarray(values(t), dtype=float))
    ext = np.where(inside, va * taper_fn(t - a) + vb * taper_fn(b - t), ext)
    # mean of the data so far, by the same grid on the full circle
    mean = _circle_mean(geometry, values, a, b, va, vb, taper_fn)
    bump = np.where(inside, np.sin(np.pi * (t - a) / L) ** 2, 0.0)
    # int over the arc of sin^2 = L / 2, so this bump carries mean 2 pi mean
    return ext - bump * (2.0 * np.pi * mean) / (L / 2.0)


def _circle_mean(geometry, values, a, b, va, vb, taper_fn, n=8192):
    t = (np.arange(n) + 0.5) * 2 * np.pi / n
    inside = _on_arc(t, geometry.arc)
    ext = np.where(inside, va * taper_fn(t - a) + vb * taper_fn(b - t), np.asarray(values(t), dtype=float))
    return float(np.mean(ext))


@dataclass
class BoundaryCorrection:
    t_grid: np.ndarray
    fields: list
    constant: float
    data_norm: float
    theta: np.ndarray = field(default=None, repr=False)
    neumann_data: list = field(default_factory=list, repr=False)

    def at(self, t):
        """Field at time t, linear in t between grid nodes."""
        tg = self.t_grid
        if len(tg) == 1:
            return self.fields[0]
        i = int(np.clip(np.searchsorted(tg, t) - 1, 0, len(tg) - 2))
        w = (t - tg[i]) / (tg[i + 1] - tg[i])
        f0, f1 = self.fields[i], self.fields[i + 1]
        return AnnulusField(f0.geometry, "disk", (1 - w) * f0.a + w * f1.a, np.zeros_like(f0.a))


def _neumann_disk(geometry, samples, K):
    """Harmonic zeta in r < R with d zeta / dr = data on r = R, zero boundary mean."""
    M = samples.size
    c = np.fft.rfft(samples) / M
    k = np.arange(1, K + 1)
    a = np.empty(2 * K)
    a[0::2] = 2.0 * c[1 : K + 1].real
    a[1::2] = -2.0 * c[1 : K + 1].imag
    R = geometry.R
    kk = np.repeat(k, 2)
    return AnnulusField(geometry, "disk", a / (kk * R ** (kk - 1)), np.zeros(2 * K))


def boundary_correction(geometry, data, t_grid=(0.0,), K=128, M=4096, taper=0.25):
    """zeta(t, .) harmonic in the disk with normal derivative the extended data.

    ``data(t, theta)`` gives the normal data; only its values off the arc
    matter.  Returns a :class:`BoundaryCorrection` whose ``constant`` is the
    observed ratio sup|zeta| / sup|data| over the time grid.
    """
    theta = 2 * np.pi * np.arange(M) / M
    a, L = geometry.arc[0], geometry.arc_length
    bump = np.where(_on_arc(theta, geometry.arc), np.sin(np.pi * (theta - a) / L) ** 2, 0.0)
    fields = []
    exts = []
    ratio = 0.0
    dnorm = 0.0
    for t in t_grid:
        vals = lambda th, t=t: np.asarray(data(t, th), dtype=float)
        ext = extend_complement_data(geometry, vals, theta, taper)
        # the extension's mean is zero up to quadrature error; clear the rest on this grid
        ext = ext - bump * (np.mean(ext) / np.mean(bump))
        z = _neumann_disk(geometry, ext, K)
        fields.append(z)
        exts.append(ext)
        comp = ~_on_arc(theta, geometry.arc)
        dn = float(np.max(np.abs(ext[comp]))) if comp.any() else 0.0
        zn = float(np.max(np.abs(z(geometry.R, theta))))
        dnorm = max(dnorm, dn)
        if dn > 0:
            ratio = max(ratio, zn / dn)
    return BoundaryCorrection(np.asarray(t_grid, dtype=float), fields, ratio, dnorm, theta, exts)


# -- assembled potential -----------------------------------------------------

def cutoff_rho(t, eta):
    """rho(t) = S(t / eta) S((1 - t) / eta): 0 at both ends, 1 on [eta, 1 - eta]."""
    if not 0.0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 1/2)")
    t = np.asarray(t, dtype=float)
    return smoothstep(t / eta) * smoothstep((1.0 - t) / eta)


@dataclass
class ControlPotential:
    """phi(t, x, y) with grad phi = rho(t) (V_f(t) - grad zeta(t)).

    ``f(t, z)`` is the complex velocity, so V_f = (Re f, -Im f).  The
    potential of V_f is the real part of a contour integral of f from
    ``z0`` along the straight segment, which presumes the region is
    star-shaped about z0.
    """

    f: object
    zeta: object
    eta: float
    z0: complex = 0.0
    nodes: int = 24

    def rho(self, t):
        return float(cutoff_rho(t, self.eta))

    def _zeta(self, t):
        if self.zeta is None:
            return None
        return self.zeta.at(t) if hasattr(self.zeta, "at") else self.zeta(t)

    def gradient(self, t, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        r = self.rho(t)
        if r == 0.0:
            return np.zeros(x.shape), np.zeros(x.shape)
        w = np.asarray(self.f(t, x + 1j * y), dtype=complex)
        gx, gy = w.real, -w.imag
        zf = self._zeta(t)
        if zf is not None:
            rr = np.hypot(x, y)
            th = np.arctan2(y, x)
            dr = zf.dr(rr, th)
            with np.errstate(invalid="ignore", divide="ignore"):
                dth = np.where(rr > 0, zf.dtheta(rr, th) / np.where(rr > 0, rr, 1.0), 0.0)
            c, s = np.cos(th), np.sin(th)
            gx = gx - (c * dr - s * dth)
            gy = gy - (s * dr + c * dth)
        return r * gx, r * gy

    def __call__(self, t, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        r = self.rho(t)
        if r == 0.0:
            return np.zeros(x.shape) if x.ndim else 0.0
        z = x + 1j * y
        u, w = np.polynomial.legendre.leggauss(self.nodes)
        s = 0.5 * (u + 1.0)
        path = self.z0 + s[:, None] * (z.ravel() - self.z0)[None, :]
        fv = np.asarray(self.f(t, path), dtype=complex)
        integral = (0.5 * w) @ fv * (z.ravel() - self.z0)
        val = integral.real.reshape(x.shape)
        zf = self._zeta(t)
        if zf is not None:
            val = val - zf(np.hypot(x, y), np.arctan2(y, x))
        out = r * val
        return float(out) if out.ndim == 0 else out


def assemble_control_potential(f_eps, zeta, eta, z0=0.0, nodes=24):
    """Evaluator of the cut-off control potential and its gradient."""
    if not 0.0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 1/2)")
    return ControlPotential(f_eps, zeta, float(eta), complex(z0), nodes)
