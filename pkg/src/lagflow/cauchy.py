"""Series solutions of mixed and Cauchy problems for the Laplacian on a rectangle.

A harmonic function is stored as two coefficient vectors over the Steklov
families of :mod:`lagflow.steklov`::

    u = sum_k coeffs0[k] psi_{0,k} + sum_k coeffs1[k] psi_{1,k}

Boundary data are coefficient vectors against the orthonormal trace basis
phi_k of the edge they live on.  Everything is truncated at a caller-chosen
``N``: the exponential growth of the Cauchy coefficients is the object of
study here, so nothing is filtered or regularised behind the caller's back.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .steklov import (
    NEUMANN,
    InvalidInput,
    LateralCondition,
    RectangleDomain,
    _phi,
    _sinh_ratio,
    profile,
    transverse,
)

log = logging.getLogger(__name__)

__all__ = [
    "BoundaryData",
    "SeriesField",
    "CompatibilityReport",
    "DesignReport",
    "project_boundary",
    "solve_mixed",
    "normal_derivative_gamma0",
    "mixed_normal_derivative_closed_form",
    "solve_cauchy",
    "compatibility",
    "normal_derivative_at",
    "design_control_for_target",
    "amplification_factor",
    "eval_field",
    "eval_gradient",
    "h1_norm_sq",
]

SEGMENTS = ("Gamma0", "Gamma1", "GammaStar")
_LOG_MAX = np.log(np.finfo(float).max)


@dataclass(frozen=True)
class BoundaryData:
    segment: str
    coeffs: np.ndarray
    basis_variant: LateralCondition = NEUMANN

    def __post_init__(self):
        if self.segment not in SEGMENTS:
            raise InvalidInput(f"unknown segment {self.segment!r}")
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise InvalidInput("coeffs must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("coeffs must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self):
        return self.coeffs.size - 1

    def truncated(self, N):
        c = np.zeros(N + 1)
        m = min(N + 1, self.coeffs.size)
        c[:m] = self.coeffs[:m]
        return c

    @classmethod
    def zeros(cls, segment, N, basis_variant=NEUMANN):
        return cls(segment, np.zeros(N + 1), basis_variant)

    @classmethod
    def single_mode(cls, segment, k, value=1.0, N=None, basis_variant=NEUMANN):
        N = k if N is None else N
        c = np.zeros(N + 1)
        c[k] = value
        return cls(segment, c, basis_variant)


@dataclass
class SeriesField:
    domain: RectangleDomain
    lateral: LateralCondition
    coeffs0: np.ndarray
    coeffs1: np.ndarray

    def __post_init__(self):
        self.coeffs0 = np.asarray(self.coeffs0, dtype=float)
        self.coeffs1 = np.asarray(self.coeffs1, dtype=float)
        if self.coeffs0.shape != self.coeffs1.shape:
            raise InvalidInput("coefficient vectors must have equal length")

    @property
    def truncation(self):
        return self.coeffs0.size - 1

    @property
    def largest_coeff1(self):
        """Conditioning witness: magnitude of the largest psi_{1,k} weight."""
        return float(np.max(np.abs(self.coeffs1))) if self.coeffs1.size else 0.0

    def __call__(self, x, y):
        return eval_field(self, (x, y))

    def gradient(self, x, y):
        return eval_gradient(self, (x, y))

    def to_dict(self):
        d = self.domain
        return {
            "coeffs0": self.coeffs0.tolist(),
            "coeffs1": self.coeffs1.tolist(),
            "domain": {"l1": d.l1, "l2": d.l2, "lstar": d.lstar},
            "variant": self.lateral.variant,
            "alpha": self.lateral.alpha,
        }

    @classmethod
    def from_dict(cls, data):
        dom = data["domain"]
        lateral = LateralCondition.robin(float(data.get("alpha", 1.0)))
        if data.get("variant", "neumann") != lateral.variant:
            raise InvalidInput("variant and alpha disagree")
        return cls(
            RectangleDomain(float(dom["l1"]), float(dom["l2"]), dom.get("lstar")),
            lateral,
            np.asarray(data["coeffs0"], dtype=float),
            np.asarray(data["coeffs1"], dtype=float),
        )


@dataclass
class CompatibilityReport:
    partial_sums: np.ndarray
    star_norm_sq: float
    verdict: str
    growth_exponent_estimate: float
    summands: np.ndarray = field(repr=False)

    @property
    def compatible(self):
        return self.verdict == "CompatibleAtTruncation"


@dataclass
class DesignReport:
    compatibility: CompatibilityReport
    dropped: list
    f0_norm: float
    log10_max_f0: float


# -- helpers -----------------------------------------------------------------

def _cross_gain(s, k, l2, lateral):
    """Outward normal derivative of psi_{1,k} on the bottom edge, trace units.

    Equals -d/dy psi_{1,k}(x, 0) / phi_k(x) with the sign of the outward
    normal -e_y absorbed, i.e. 1/l2 for the linear mode and s / sinh(s l2)
    otherwise.
    """
    if lateral.is_neumann and k == 0:
        return 1.0 / l2
    return 2.0 * s * np.exp(-s * l2) / -np.expm1(-2.0 * s * l2)


def _self_gain(s, k, l2, lateral):
    """Steklov eigenvalue of family 0 (outward derivative on y = 0)."""
    if lateral.is_neumann:
        return 0.0 if k == 0 else s * np.tanh(s * l2)
    return s / np.tanh(s * l2)


def _gains(domain, lateral, N):
    s, _, _ = transverse(domain, lateral, N)
    mu0 = np.array([_self_gain(s[k], k, domain.l2, lateral) for k in range(N + 1)])
    w = np.array([_cross_gain(s[k], k, domain.l2, lateral) for k in range(N + 1)])
    return s, mu0, w


def _expect(data, segment, name):
    if data.segment != segment:
        raise InvalidInput(f"{name} must live on {segment}, got {data.segment}")


def _lateral_of(*data):
    lat = data[0].basis_variant
    for d in data[1:]:
        if d.basis_variant != lat:
            raise InvalidInput("boundary data use different trace bases")
    return lat


# -- operations --------------------------------------------------------------

def project_boundary(samples, segment, domain, lateral=NEUMANN, N=0):
    """Trace-basis coefficients of sampled boundary data.

    ``samples`` is a sequence of ``(x, value)`` pairs covering [0, l1]; the
    trapezoid rule on the sample grid computes the projections.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] != 2:
        raise InvalidInput("need at least two (x, value) samples")
    order = np.argsort(arr[:, 0])
    x, v = arr[order, 0], arr[order, 1]
    span = domain.l1
    if x[0] > 1e-12 * span or x[-1] < span * (1 - 1e-12):
        raise InvalidInput("samples must cover [0, l1]")
    s, a, b = transverse(domain, lateral, N)
    basis = _phi(s[:, None], a[:, None], b[:, None], x[None, :])
    return BoundaryData(segment, np.trapezoid(basis * v[None, :], x, axis=1), lateral)


def solve_mixed(f0, g1, domain, N):
    """Harmonic v with v = f0 on the bottom, dv/dn = g1 on the top, Neumann sides."""
    _expect(f0, "Gamma0", "f0")
    _expect(g1, "Gamma1", "g1")
    lateral = _lateral_of(f0, g1)
    if not lateral.is_neumann:
        raise InvalidInput("solve_mixed supports the Neumann lateral condition only")
    s, _, _ = transverse(domain, lateral, N)
    g = g1.truncated(N)
    c1 = np.empty(N + 1)
    c1[0] = domain.l2 * g[0]
    c1[1:] = np.tanh(s[1:] * domain.l2) / s[1:] * g[1:]
    return SeriesField(domain, lateral, f0.truncated(N), c1)


def normal_derivative_gamma0(field):
    """Outward normal derivative on the bottom edge, as trace coefficients."""
    N = field.truncation
    _, mu0, w = _gains(field.domain, field.lateral, N)
    return BoundaryData("Gamma0", mu0 * field.coeffs0 - w * field.coeffs1, field.lateral)


def mixed_normal_derivative_closed_form(f0, g1, domain, N):
    """dv/dn on the bottom edge straight from the data of the mixed problem.

    k = 0 gives -g_{1,0}; k >= 1 gives s tanh(s l2) f_{0,k} - g_{1,k} / cosh(s l2).
    """
    s, _, _ = transverse(domain, NEUMANN, N)
    f = f0.truncated(N)
    g = g1.truncated(N)
    out = np.empty(N + 1)
    out[0] = -g[0]
    out[1:] = s[1:] * np.tanh(s[1:] * domain.l2) * f[1:] - g[1:] / np.cosh(s[1:] * domain.l2)
    return BoundaryData("Gamma0", out, NEUMANN)


def solve_cauchy(f0, g0, domain, N):
    """Harmonic u with trace f0 and outward normal derivative g0 on the bottom.

    The lateral condition is taken from the data's trace basis.  Always
    returns the truncated series; whether it converges is a question for
    :func:`compatibility`.  ``largest_coeff1`` of the result is the
    conditioning witness.
    """
    _expect(f0, "Gamma0", "f0")
    _expect(g0, "Gamma0", "g0")
    lateral = _lateral_of(f0, g0)
    _, mu0, w = _gains(domain, lateral, N)
    f = f0.truncated(N)
    g = g0.truncated(N)
    bracket = mu0 * f - g
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        c1 = np.where(bracket == 0.0, 0.0, bracket / w)
    return SeriesField(domain, lateral, f, c1)


def _clcns_summands(f, g, s, l2, lateral, form):
    # CLCNS summand per mode; log-space so huge weights do not overflow early
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if lateral.is_neumann and form == "mixed":
            kk = s[1:]
            br = f[1:] - g[1:] / (kk * np.tanh(kk * l2))
            logw = np.log(kk) + 2.0 * (kk * l2 + np.log1p(-np.exp(-2.0 * kk * l2)) - np.log(2.0))
            out = np.zeros_like(f)
            out[1:] = np.where(br == 0.0, 0.0, np.exp(logw + 2.0 * np.log(np.abs(br))))
            return out
        if lateral.is_neumann and form == "dirichlet_top":
            kk = s[1:]
            br = f[1:] - np.tanh(kk * l2) / kk * g[1:]
            logw = np.log(kk) + 2.0 * (kk * l2 + np.log1p(np.exp(-2.0 * kk * l2)) - np.log(2.0))
            out = np.zeros_like(f)
            out[1:] = np.where(br == 0.0, 0.0, np.exp(logw + 2.0 * np.log(np.abs(br))))
            return out
        if form != "mixed":
            raise InvalidInput(f"form {form!r} is only defined for the Neumann lateral condition")
        br = f - np.tanh(s * l2) / s * g
        logw = np.log(s) + 2.0 * (s * l2 + np.log1p(np.exp(-2.0 * s * l2)) - np.log(2.0))
        return np.where(br == 0.0, 0.0, np.exp(logw + 2.0 * np.log(np.abs(br))))


def _tail_verdict(summands, first):
    """Geometric ratio test over the last quartile of mode indices."""
    idx = np.arange(first, summands.size)
    if idx.size < 2:
        return "CompatibleAtTruncation", 0.0
    tail = idx[idx >= idx[0] + int(np.floor(0.75 * (idx.size - 1)))]
    if tail.size < 2:
        tail = idx[-2:]
    t = summands[tail]
    nz = t > 0
    growth = 0.0
    if np.count_nonzero(nz) >= 2:
        growth = float(np.polyfit(tail[nz], np.log(t[nz]), 1)[0])
    pairs = (t[:-1] > 0) & (t[1:] > 0)
    if not np.any(pairs):
        return "CompatibleAtTruncation", growth
    ratio = np.median(t[1:][pairs] / t[:-1][pairs])
    verdict = "DivergenceIndicated" if ratio > 1.5 else "CompatibleAtTruncation"
    return verdict, growth


def compatibility(f0, g0, domain, N=None, form="mixed"):
    """Partial sums of the compatibility series and the Cauchy-data norm.

    ``form="dirichlet_top"`` uses the equivalent cosh-weighted series that
    arises when the auxiliary problem carries Dirichlet data on the top edge.
    """
    _expect(f0, "Gamma0", "f0")
    _expect(g0, "Gamma0", "g0")
    lateral = _lateral_of(f0, g0)
    if N is None:
        N = max(f0.N, g0.N)
    s, _, _ = transverse(domain, lateral, N)
    f = f0.truncated(N)
    g = g0.truncated(N)
    terms = _clcns_summands(f, g, s, domain.l2, lateral, form)
    partial = np.cumsum(terms)
    first = 1 if lateral.is_neumann else 0
    if lateral.is_neumann:
        star = f[0] ** 2 + g[0] ** 2 + np.sum(s[1:] * f[1:] ** 2) + partial[-1]
    else:
        star = np.sum(s * f**2) + partial[-1]
    verdict, growth = _tail_verdict(terms, first)
    return CompatibilityReport(partial, float(star), verdict, growth, terms)


def normal_derivative_at(field, lstar):
    """Coefficients of du/dy on the line y = lstar in the transverse basis."""
    l2 = field.domain.l2
    if not (0.0 < lstar <= l2):
        raise InvalidInput(f"lstar must lie in (0, {l2}], got {lstar}")
    N = field.truncation
    s, _, _ = transverse(field.domain, field.lateral, N)
    d0 = np.array([profile(s[k], 0, k, lstar, l2, field.lateral, derivative=True) for k in range(N + 1)])
    d1 = np.array([profile(s[k], 1, k, lstar, l2, field.lateral, derivative=True) for k in range(N + 1)])
    return BoundaryData("GammaStar", d0 * field.coeffs0 + d1 * field.coeffs1, field.lateral)


def amplification_factor(k, domain):
    """Data-to-control gain |sinh(s l2) / sinh(s (l2 - lstar))| of mode k.

    Grows like exp(s lstar) for large k.
    """
    if k < 1:
        raise InvalidInput("k must be at least 1")
    if domain.lstar is None:
        raise InvalidInput("domain needs lstar")
    s = k * np.pi / domain.l1
    return float(1.0 / _sinh_ratio(s, domain.l2 - domain.lstar, domain.l2))


def design_control_for_target(gstar, domain, N=None):
    """Cauchy data on the bottom edge whose solution has du/dy = gstar on y = lstar.

    Uses the choice g_{0,k} = mu_{0,k} f_{0,k}, for which the psi_{1,k}
    weights vanish and only the family-0 modes carry the target.  Modes
    whose f_{0,k} would exceed the floating-point range are dropped and
    listed in the report.
    """
    if domain.lstar is None:
        raise InvalidInput("domain needs lstar")
    if gstar.segment != "GammaStar":
        raise InvalidInput("target must live on GammaStar")
    if not gstar.basis_variant.is_neumann:
        raise InvalidInput("control design supports the Neumann lateral condition only")
    N = gstar.N if N is None else N
    a = gstar.truncated(N)
    l2, ls = domain.l2, domain.lstar
    s, _, _ = transverse(domain, NEUMANN, N)
    f = np.zeros(N + 1)
    g = np.zeros(N + 1)
    g[0] = -a[0]
    dropped = []
    logmax = -np.inf
    for k in range(1, N + 1):
        if a[k] == 0.0:
            continue
        sk = s[k]
        # log |cosh(s l2) / (s sinh(s (l2 - lstar)))|
        log_f = (
            sk * ls
            + np.log1p(np.exp(-2 * sk * l2))
            - np.log(-np.expm1(-2 * sk * (l2 - ls)))
            - np.log(sk)
            + np.log(abs(a[k]))
        )
        log_g = log_f + np.log(sk * np.tanh(sk * l2))
        if max(log_f, log_g) >= _LOG_MAX:
            dropped.append(k)
            log.warning("design: mode %d dropped, |f0| ~ exp(%.1f) overflows", k, log_f)
            continue
        logmax = max(logmax, log_f)
        f[k] = -np.sign(a[k]) * np.exp(log_f)
        g[k] = sk * np.tanh(sk * l2) * f[k]
    f0 = BoundaryData("Gamma0", f, NEUMANN)
    g0 = BoundaryData("Gamma0", g, NEUMANN)
    report = DesignReport(
        compatibility(f0, g0, domain, N),
        dropped,
        float(np.linalg.norm(f)),
        float(logmax / np.log(10.0)) if np.isfinite(logmax) else float("-inf"),
    )
    return f0, g0, report


# -- pointwise evaluation ----------------------------------------------------

def _prepare(field, point):
    x, y = (np.asarray(c, dtype=float) for c in point)
    if not np.all(field.domain.contains(x, y)):
        raise InvalidInput("point lies outside the closed rectangle")
    x, y = np.broadcast_arrays(x, y)
    s, a, b = transverse(field.domain, field.lateral, field.truncation)
    return x, y, s, a, b


def eval_field(field, point):
    """Value of the series at ``point = (x, y)`` (arrays broadcast)."""
    x, y, s, a, b = _prepare(field, point)
    l2, lat = field.domain.l2, field.lateral
    out = np.zeros(x.shape)
    for k in range(field.truncation + 1):
        c0, c1 = field.coeffs0[k], field.coeffs1[k]
        if c0 == 0.0 and c1 == 0.0:
            continue
        prof = c0 * profile(s[k], 0, k, y, l2, lat) + c1 * profile(s[k], 1, k, y, l2, lat)
        out += _phi(s[k], a[k], b[k], x) * prof
    return out if out.ndim else float(out)


def eval_gradient(field, point):
    """Termwise analytic gradient (d/dx, d/dy) of the series."""
    x, y, s, a, b = _prepare(field, point)
    l2, lat = field.domain.l2, field.lateral
    gx = np.zeros(x.shape)
    gy = np.zeros(x.shape)
    for k in range(field.truncation + 1):
        c0, c1 = field.coeffs0[k], field.coeffs1[k]
        if c0 == 0.0 and c1 == 0.0:
            continue
        prof = c0 * profile(s[k], 0, k, y, l2, lat) + c1 * profile(s[k], 1, k, y, l2, lat)
        dprof = c0 * profile(s[k], 0, k, y, l2, lat, derivative=True) + c1 * profile(
            s[k], 1, k, y, l2, lat, derivative=True
        )
        gx += _phi(s[k], a[k], b[k], x, derivative=True) * prof
        gy += _phi(s[k], a[k], b[k], x) * dprof
    if gx.ndim == 0:
        return float(gx), float(gy)
    return gx, gy


def h1_norm_sq(field, nodes=64):
    """||u||_{H^1}^2 by tensor Gauss-Legendre quadrature over the rectangle."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    d = field.domain
    x = 0.5 * d.l1 * (t + 1)
    y = 0.5 * d.l2 * (t + 1)
    wx = 0.5 * d.l1 * w
    wy = 0.5 * d.l2 * w
    X, Y = np.meshgrid(x, y, indexing="ij")
    W = np.outer(wx, wy)
    u = eval_field(field, (X, Y))
    gx, gy = eval_gradient(field, (X, Y))
    return float(np.sum(W * (u**2 + gx**2 + gy**2)))
