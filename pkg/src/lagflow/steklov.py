"""Separable Steklov eigenpairs on the rectangle (0, l1) x (0, l2).

Two families of harmonic modes are used throughout the package.  Family
``j = 0`` carries the Steklov condition on the bottom edge ``y = 0`` and family
``j = 1`` on the top edge ``y = l2``.  Every mode factors as

    psi_{j,k}(x, y) = phi_k(x) * Y_{j,k}(y)

where ``phi_k`` is an L2-normalised transverse eigenfunction on (0, l1) and
``Y_{j,k}`` is a hyperbolic profile equal to one on the Steklov edge.

Lateral conditions
------------------
``neumann``
    phi_k = cos(k pi x / l1).  Family 0 is Neumann on the top edge
    (cosh profile), family 1 vanishes on the bottom edge (sinh profile).
    With ``top_dirichlet=True`` family 1 instead uses a cosh profile that is
    Neumann on the bottom edge.
``dirichlet`` / ``robin``
    phi_k solves -phi'' = lambda phi with the Robin conditions
    -a phi'(0) + (1 - a) phi(0) = 0 and a phi'(l1) + (1 - a) phi(l1) = 0.
    Both families vanish on the opposite edge (sinh profiles) and share the
    eigenvalue sqrt(lambda) coth(sqrt(lambda) l2).

All hyperbolic ratios are evaluated in exponential form, so nothing
overflows for large frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "InvalidInput",
    "SpectralSolveError",
    "RectangleDomain",
    "LateralCondition",
    "NEUMANN",
    "DIRICHLET",
    "SteklovMode",
    "RobinSpectrum",
    "robin_spectrum",
    "robin_secular",
    "transverse",
    "eigenvalue",
    "mode",
    "eval_mode",
    "eval_mode_gradient",
    "profile",
    "orthonormality_gram",
]


class InvalidInput(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class SpectralSolveError(RuntimeError):
    """Raised when a transverse eigenvalue cannot be bracketed or refined."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class RectangleDomain:
    """The rectangle (0, l1) x (0, l2) with an optional interior line y = lstar."""

    l1: float = np.pi
    l2: float = 1.0
    lstar: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.l1) and self.l1 > 0):
            raise InvalidInput(f"l1 must be positive, got {self.l1}")
        if not (np.isfinite(self.l2) and self.l2 > 0):
            raise InvalidInput(f"l2 must be positive, got {self.l2}")
        if self.lstar is not None and not (0.0 < self.lstar < self.l2):
            raise InvalidInput(f"lstar must lie in (0, {self.l2}), got {self.lstar}")

    def contains(self, x, y, tol=1e-12):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sx = tol * max(1.0, self.l1)
        sy = tol * max(1.0, self.l2)
        return (x >= -sx) & (x <= self.l1 + sx) & (y >= -sy) & (y <= self.l2 + sy)

    def with_lstar(self, lstar):
        return RectangleDomain(self.l1, self.l2, lstar)


@dataclass(frozen=True)
class LateralCondition:
    """Boundary condition on the vertical sides.

    ``alpha`` interpolates between Dirichlet (0) and Neumann (1); values in
    between give the Robin condition alpha du/dn + (1 - alpha) u = 0.
    """

    variant: str = "neumann"
    alpha: float = 1.0

    def __post_init__(self):
        if self.variant not in ("neumann", "dirichlet", "robin"):
            raise InvalidInput(f"unknown lateral variant {self.variant!r}")
        if not (0.0 <= self.alpha <= 1.0):
            raise InvalidInput(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.variant == "neumann" and self.alpha != 1.0:
            raise InvalidInput("neumann lateral condition requires alpha = 1")
        if self.variant == "dirichlet" and self.alpha != 0.0:
            raise InvalidInput("dirichlet lateral condition requires alpha = 0")
        if self.variant == "robin" and not (0.0 < self.alpha < 1.0):
            raise InvalidInput("robin lateral condition requires 0 < alpha < 1")

    @classmethod
    def robin(cls, alpha):
        if alpha == 1.0:
            return NEUMANN
        if alpha == 0.0:
            return DIRICHLET
        return cls("robin", float(alpha))

    @property
    def is_neumann(self):
        return self.variant == "neumann"


NEUMANN = LateralCondition("neumann", 1.0)
DIRICHLET = LateralCondition("dirichlet", 0.0)


@dataclass(frozen=True)
class SteklovMode:
    side: int
    index: int
    eigenvalue: float
    lateral: LateralCondition
    transverse_frequency: float


@dataclass(frozen=True)
class RobinSpectrum:
    """First ``count`` transverse Robin eigenvalues on (0, l1).

    ``cos_coeffs`` / ``sin_coeffs`` give the normalised eigenfunctions
    phi_k(x) = cos_coeffs[k] cos(s_k x) + sin_coeffs[k] sin(s_k x) with
    s_k = sqrt(lambdas[k]).
    """

    l1: float
    alpha: float
    lambdas: np.ndarray
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    residuals: np.ndarray = field(repr=False)

    @property
    def count(self):
        return len(self.lambdas)

    @property
    def frequencies(self):
        return np.sqrt(self.lambdas)


def robin_secular(s, l1, alpha):
    """Normalised secular function of the two-point Robin problem.

    For phi(x) = alpha s cos(s x) + (1 - alpha) sin(s x) the right-hand
    condition reads

        sin(s l1) ((1-a)^2 - a^2 s^2) + 2 a (1-a) s cos(s l1) = 0,

    and dividing by (1-a)^2 + a^2 s^2 leaves a function bounded by one.
    """
    s = np.asarray(s, dtype=float)
    a = alpha
    num = np.sin(s * l1) * ((1 - a) ** 2 - a**2 * s**2) + 2 * a * (1 - a) * s * np.cos(s * l1)
    return num / ((1 - a) ** 2 + a**2 * s**2)


def _robin_phase(s, l1, alpha, k):
    # s l1 + 2 atan(a s / (1 - a)) is increasing and crosses (k + 1) pi once.
    return s * l1 + 2.0 * np.arctan2(alpha * s, 1.0 - alpha) - (k + 1) * np.pi


def _robin_norm(s, l1, a_c, b_s):
    # closed-form L2 norm of a cos(sx) + b sin(sx) over (0, l1)
    two = 2.0 * s * l1
    # sin(2 s l1) / (4 s) and (1 - cos(2 s l1)) / (2 s) written to survive s -> 0
    sin_term = 0.5 * l1 * np.sinc(two / np.pi)
    cos_term = l1 * np.sin(s * l1) ** 2 / (s * l1) if s > 0 else 0.0
    sq = 0.5 * (a_c**2 + b_s**2) * l1 + (a_c**2 - b_s**2) * sin_term + a_c * b_s * cos_term
    return np.sqrt(sq)


@lru_cache(maxsize=256)
def _robin_spectrum_cached(l1, alpha, count):
    lambdas = np.empty(count)
    cc = np.empty(count)
    ss = np.empty(count)
    res = np.empty(count)
    for k in range(count):
        lo = k * np.pi / l1
        hi = (k + 1) * np.pi / l1
        flo = _robin_phase(lo, l1, alpha, k)
        fhi = _robin_phase(hi, l1, alpha, k)
        if flo > 0 or fhi < 0:
            raise SpectralSolveError(f"failed to bracket Robin root {k}", index=k)
        if fhi == 0.0:
            s = hi
        elif flo == 0.0:
            s = lo
        else:
            s = brentq(_robin_phase, lo, hi, args=(l1, alpha, k), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        r = abs(float(robin_secular(s, l1, alpha)))
        if r > 1e-12:
            raise SpectralSolveError(f"Robin root {k} residual {r:.3e} above 1e-12", index=k)
        a_c = alpha * s
        b_s = 1.0 - alpha
        nrm = _robin_norm(s, l1, a_c, b_s)
        lambdas[k] = s * s
        cc[k] = a_c / nrm
        ss[k] = b_s / nrm
        res[k] = r
    return lambdas, cc, ss, res


def robin_spectrum(l1, alpha, count):
    """Transverse eigenvalues for 0 < alpha < 1.

    Each root of the secular equation is isolated in [k pi / l1, (k+1) pi / l1]
    through the monotone phase form and refined by Brent's method.
    """
    if not (0.0 < alpha < 1.0):
        raise InvalidInput("robin_spectrum needs 0 < alpha < 1; endpoints have closed forms")
    if count < 1:
        raise InvalidInput("count must be at least 1")
    if not l1 > 0:
        raise InvalidInput("l1 must be positive")
    lam, cc, ss, res = _robin_spectrum_cached(float(l1), float(alpha), int(count))
    return RobinSpectrum(float(l1), float(alpha), lam.copy(), cc.copy(), ss.copy(), res.copy())


def transverse(domain, lateral, kmax):
    """Frequencies and cos/sin weights of phi_0 .. phi_kmax."""
    n = kmax + 1
    l1 = domain.l1
    k = np.arange(n)
    if lateral.variant == "neumann":
        s = k * np.pi / l1
        a = np.full(n, np.sqrt(2.0 / l1))
        a[0] = 1.0 / np.sqrt(l1)
        b = np.zeros(n)
    elif lateral.variant == "dirichlet":
        s = (k + 1) * np.pi / l1
        a = np.zeros(n)
        b = np.full(n, np.sqrt(2.0 / l1))
    else:
        spec = robin_spectrum(l1, lateral.alpha, n)
        s = spec.frequencies
        a = spec.cos_coeffs
        b = spec.sin_coeffs
    return s, a, b


def _check_kj(j, k):
    if j not in (0, 1):
        raise InvalidInput(f"side must be 0 or 1, got {j}")
    if k < 0:
        raise InvalidInput(f"index must be nonnegative, got {k}")


def _eigen_from_s(s, j, k, l2, lateral, top_dirichlet):
    if lateral.variant != "neumann":
        # s coth(s l2), s > 0 always
        return s / np.tanh(s * l2)
    if k == 0:
        if j == 0 or top_dirichlet:
            return 0.0
        return 1.0 / l2
    if j == 0 or top_dirichlet:
        return s * np.tanh(s * l2)
    return s / np.tanh(s * l2)


def eigenvalue(domain, lateral, j, k, top_dirichlet=False):
    """Steklov eigenvalue mu_{j,k}."""
    _check_kj(j, k)
    s, _, _ = transverse(domain, lateral, k)
    return float(_eigen_from_s(s[k], j, k, domain.l2, lateral, top_dirichlet))


def mode(domain, lateral, j, k, top_dirichlet=False):
    _check_kj(j, k)
    s, _, _ = transverse(domain, lateral, k)
    mu = _eigen_from_s(s[k], j, k, domain.l2, lateral, top_dirichlet)
    return SteklovMode(j, k, float(mu), lateral, float(s[k]))


# -- vertical profiles -------------------------------------------------------

def _cosh_ratio(s, d, l2):
    """cosh(s d) / cosh(s l2) for 0 <= d <= l2."""
    return np.exp(-s * (l2 - d)) * (1.0 + np.exp(-2.0 * s * d)) / (1.0 + np.exp(-2.0 * s * l2))


def _sinh_ratio(s, d, l2):
    """sinh(s d) / sinh(s l2) for 0 <= d <= l2, s > 0."""
    return np.exp(-s * (l2 - d)) * np.expm1(-2.0 * s * d) / np.expm1(-2.0 * s * l2)


def _dcosh_ratio(s, d, l2):
    """s sinh(s d) / cosh(s l2)."""
    return -s * np.exp(-s * (l2 - d)) * np.expm1(-2.0 * s * d) / (1.0 + np.exp(-2.0 * s * l2))


def _dsinh_ratio(s, d, l2):
    """s cosh(s d) / sinh(s l2)."""
    return s * np.exp(-s * (l2 - d)) * (1.0 + np.exp(-2.0 * s * d)) / (-np.expm1(-2.0 * s * l2))


def profile(s, j, k, y, l2, lateral, top_dirichlet=False, derivative=False):
    """Vertical factor Y_{j,k}(y) (or its y-derivative) for frequency s."""
    y = np.asarray(y, dtype=float)
    neumann = lateral.variant == "neumann"
    if neumann and k == 0:
        if j == 0 or top_dirichlet:
            return np.zeros_like(y) if derivative else np.ones_like(y)
        return np.full_like(y, 1.0 / l2) if derivative else y / l2
    if neumann:
        if j == 0:
            d = l2 - y
            return -_dcosh_ratio(s, d, l2) if derivative else _cosh_ratio(s, d, l2)
        if top_dirichlet:
            return _dcosh_ratio(s, y, l2) if derivative else _cosh_ratio(s, y, l2)
        return _dsinh_ratio(s, y, l2) if derivative else _sinh_ratio(s, y, l2)
    if j == 0:
        d = l2 - y
        return -_dsinh_ratio(s, d, l2) if derivative else _sinh_ratio(s, d, l2)
    return _dsinh_ratio(s, y, l2) if derivative else _sinh_ratio(s, y, l2)


def _phi(s, a, b, x, derivative=False):
    if derivative:
        return -a * s * np.sin(s * x) + b * s * np.cos(s * x)
    return a * np.cos(s * x) + b * np.sin(s * x)


def _check_points(domain, x, y):
    if not np.all(domain.contains(x, y)):
        raise InvalidInput("point lies outside the closed rectangle")


def eval_mode(domain, lateral, j, k, point, top_dirichlet=False):
    """Evaluate psi_{j,k} at ``point = (x, y)``; x and y may be arrays."""
    _check_kj(j, k)
    x, y = (np.asarray(c, dtype=float) for c in point)
    _check_points(domain, x, y)
    s, a, b = transverse(domain, lateral, k)
    val = _phi(s[k], a[k], b[k], x) * profile(s[k], j, k, y, domain.l2, lateral, top_dirichlet)
    return val if val.ndim else float(val)


def eval_mode_gradient(domain, lateral, j, k, point, top_dirichlet=False):
    _check_kj(j, k)
    x, y = (np.asarray(c, dtype=float) for c in point)
    _check_points(domain, x, y)
    s, a, b = transverse(domain, lateral, k)
    sk, ak, bk = s[k], a[k], b[k]
    l2 = domain.l2
    gx = _phi(sk, ak, bk, x, derivative=True) * profile(sk, j, k, y, l2, lateral, top_dirichlet)
    gy = _phi(sk, ak, bk, x) * profile(sk, j, k, y, l2, lateral, top_dirichlet, derivative=True)
    return gx, gy


def _gauss_panels(a, b, npts, panel_nodes=32):
    panels = max(1, int(np.ceil(npts / panel_nodes)))
    t, w = np.polynomial.legendre.leggauss(panel_nodes)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + 0.5 * h[:, None] * t[None, :]).ravel()
    wx = (0.5 * h[:, None] * w[None, :]).ravel()
    return x, wx


def orthonormality_gram(domain, lateral, j, kmax, quadrature_points, top_dirichlet=False):
    """Gram matrix of the traces of psi_{j,0..kmax} on their Steklov edge.

    Uses composite Gauss-Legendre quadrature with at least
    ``quadrature_points`` nodes.
    """
    if kmax < 0:
        raise InvalidInput("kmax must be nonnegative")
    if quadrature_points < 4 * kmax:
        raise InvalidInput("quadrature_points must be at least 4 * kmax")
    x, w = _gauss_panels(0.0, domain.l1, max(quadrature_points, 32))
    y = 0.0 if j == 0 else domain.l2
    traces = np.array(
        [eval_mode(domain, lateral, j, k, (x, np.full_like(x, y)), top_dirichlet) for k in range(kmax + 1)]
    )
    return (traces * w) @ traces.T
