"""Boundary operators on a concentric-disk geometry.

Omega is the disk r < R, gamma the circle r = rho, Omega_2 the disk inside
gamma and Omega_1 the annulus between.  Controls live on an arc Gamma of the
outer circle.  Every operator acts diagonally on angular Fourier modes except
Lambda_gamma, which becomes dense once a control is confined to the arc.

Mode layout.  A mean-zero function on a circle truncated at K is stored as a
real vector of length 2K ordered ``[c_1, s_1, c_2, s_2, ..., c_K, s_K]`` for
``sum_k c_k cos(k theta) + s_k sin(k theta)``.  Controls on Gamma are stored
in the arc basis

    b_{2m-2}(theta) = sqrt(2 pi / L) cos(2 pi m tau),
    b_{2m-1}(theta) = sqrt(2 pi / L) sin(2 pi m tau),    tau = (theta - theta_a) / L,

extended by zero off the arc.  Both families are orthonormal for the inner
product int f g dtheta / pi on their circle; the boundary pairings used in
the duality identity are arc-length integrals, i.e. rho * pi * (f . g) on
gamma and R * pi * (f . g) for arc coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "InvalidGeometry",
    "DiskGeometry",
    "SpectralOperator",
    "AnnulusField",
    "ControlResult",
    "LemmaABReport",
    "lambda1",
    "lambda2",
    "t12",
    "lambda_gamma",
    "lambda_gamma_adjoint",
    "lambda_gamma_singular_values",
    "arc_to_fourier",
    "arc_quadrature",
    "eval_arc_control",
    "annulus_neumann_field",
    "disk_dirichlet_field",
    "control_potential",
    "pairing_gamma",
    "pairing_arc",
    "duality_identity_residual",
    "t12_solve",
    "lemma_ab_invertibility",
    "approximate_control",
    "mode_vector",
]

TWO_PI = 2.0 * np.pi


class InvalidGeometry(ValueError):
    pass


@dataclass(frozen=True)
class DiskGeometry:
    R: float = 1.0
    rho: float = 0.3
    arc: tuple = (0.0, np.pi)

    def __post_init__(self):
        R, rho = float(self.R), float(self.rho)
        if not (np.isfinite(R) and np.isfinite(rho)) or not (0.0 < rho < R):
            raise InvalidGeometry(f"need 0 < rho < R, got rho={rho}, R={R}")
        a, b = (float(t) for t in self.arc)
        if not (0.0 <= a < b <= TWO_PI):
            raise InvalidGeometry(f"arc must satisfy 0 <= theta_a < theta_b <= 2 pi, got {self.arc}")
        if b - a >= TWO_PI:
            raise InvalidGeometry("the arc must be a strict part of the outer circle")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "arc", (a, b))

    @property
    def arc_length(self):
        """Angular length L of Gamma (radians)."""
        return self.arc[1] - self.arc[0]

    @property
    def ratio(self):
        return self.rho / self.R


@dataclass
class SpectralOperator:
    """Truncated operator.  Diagonal ones store one entry per layout slot."""

    kind: str
    modes: int
    diagonal: np.ndarray = None
    matrix: np.ndarray = None

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if self.diagonal is not None:
            return self.diagonal * x
        return self.matrix @ x

    def as_matrix(self):
        return np.diag(self.diagonal) if self.diagonal is not None else self.matrix


def mode_vector(K, k, kind="cos", value=1.0):
    """Layout vector with a single cos or sin mode."""
    if not 1 <= k <= K:
        raise ValueError(f"mode {k} outside 1..{K}")
    v = np.zeros(2 * K)
    v[2 * (k - 1) + (kind == "sin")] = value
    return v


def _orders(K):
    return np.repeat(np.arange(1, K + 1), 2)


def _check_K(K):
    if int(K) != K or K < 1:
        raise ValueError(f"truncation must be a positive integer, got {K}")
    return int(K)


# -- diagonal operators ------------------------------------------------------

def _lambda1_entries(rho, R, k):
    q = (rho / R) ** (2 * k)
    return (rho / k) * (1.0 + q) / (1.0 - q)


def lambda1(geometry, K):
    """Neumann-to-Dirichlet map of the annulus, data on gamma, insulated outer circle."""
    K = _check_K(K)
    return SpectralOperator("Lambda1", K, diagonal=_lambda1_entries(geometry.rho, geometry.R, _orders(K)))


def lambda2(geometry, K):
    """Dirichlet-to-Neumann map of the inner disk: |k| / rho."""
    K = _check_K(K)
    return SpectralOperator("Lambda2", K, diagonal=_orders(K) / geometry.rho)


def t12(geometry, K):
    d = 1.0 + lambda1(geometry, K).diagonal * lambda2(geometry, K).diagonal
    return SpectralOperator("T12", _check_K(K), diagonal=d)


def t12_solve(geometry, K, rhs):
    """Solve (I + Lambda1 Lambda2) x = rhs."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (2 * K,):
        raise ValueError(f"rhs must have length {2 * K}")
    return rhs / t12(geometry, K).diagonal


# -- arc basis ---------------------------------------------------------------

@lru_cache(maxsize=64)
def _arc_nodes(a, b, npanels, per_panel=32):
    t, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(a, b, npanels + 1)
    h = np.diff(edges)
    x = (edges[:-1, None] + 0.5 * h[:, None] * (t[None, :] + 1.0)).ravel()
    wts = (0.5 * h[:, None] * w[None, :]).ravel()
    x.setflags(write=False)
    wts.setflags(write=False)
    return x, wts


def arc_quadrature(geometry, K_control, K_target):
    """Composite Gauss-Legendre nodes and weights (in theta) on the arc.

    The panel count grows with the highest frequency present so products of
    arc and circle modes are integrated to rounding error.
    """
    L = geometry.arc_length
    top = K_target * L + TWO_PI * K_control
    npanels = max(4, int(np.ceil(top / 6.0)))
    return _arc_nodes(geometry.arc[0], geometry.arc[1], npanels)


def _arc_basis(geometry, Kc, theta):
    L = geometry.arc_length
    tau = (theta - geometry.arc[0]) / L
    m = np.arange(1, Kc + 1)[:, None]
    scale = np.sqrt(TWO_PI / L)
    out = np.empty((2 * Kc, np.size(theta)))
    out[0::2] = scale * np.cos(TWO_PI * m * tau)
    out[1::2] = scale * np.sin(TWO_PI * m * tau)
    return out


def _circle_basis(K, theta):
    k = np.arange(1, K + 1)[:, None]
    out = np.empty((2 * K, np.size(theta)))
    out[0::2] = np.cos(k * theta)
    out[1::2] = np.sin(k * theta)
    return out


def eval_arc_control(geometry, coeffs, theta):
    """Values of the zero-extended arc control at angles ``theta``."""
    coeffs = np.asarray(coeffs, dtype=float)
    theta = np.asarray(theta, dtype=float)
    Kc = coeffs.size // 2
    t = np.mod(theta, TWO_PI)
    inside = (t >= geometry.arc[0]) & (t <= geometry.arc[1])
    vals = coeffs @ _arc_basis(geometry, Kc, t.ravel())
    return np.where(inside.ravel(), vals, 0.0).reshape(theta.shape)


def arc_to_fourier(geometry, K_control, K_target):
    """Matrix E taking arc coefficients to full-circle Fourier coefficients.

    E[i, j] = (1/pi) int_Gamma c_i(theta) b_j(theta) dtheta.  The mean is zero
    because every arc basis function has zero mean on Gamma.
    """
    x, w = arc_quadrature(geometry, K_control, K_target)
    B = _arc_basis(geometry, K_control, x)
    C = _circle_basis(K_target, x)
    return (C * w[None, :]) @ B.T / np.pi


# -- Lambda_gamma ------------------------------------------------------------

def _decay(geometry, K):
    return -(geometry.ratio ** (_orders(K) - 1))


def lambda_gamma(geometry, K_control, K_target):
    """Arc control v to the normal derivative of Psi_v on gamma along n_12 = -e_r.

    A full-circle Neumann mode v_k yields Psi = v_k r^k / (k R^(k-1)) and
    therefore -(rho/R)^(k-1) v_k on gamma.
    """
    Kc, Kt = _check_K(K_control), _check_K(K_target)
    M = _decay(geometry, Kt)[:, None] * arc_to_fourier(geometry, Kc, Kt)
    return SpectralOperator("LambdaGamma", Kt, matrix=M)


def lambda_gamma_adjoint(geometry, K_control, K_target):
    """Adjoint for the arc-length pairings on gamma and Gamma."""
    M = lambda_gamma(geometry, K_control, K_target).matrix
    return SpectralOperator("LambdaGammaAdjoint", _check_K(K_control), matrix=(geometry.rho / geometry.R) * M.T)


def lambda_gamma_singular_values(geometry, K_control, K_target):
    """Singular values in the orthonormal (dtheta / pi) coordinates of both circles."""
    return np.linalg.svd(lambda_gamma(geometry, K_control, K_target).matrix, compute_uv=False)


def pairing_gamma(geometry, h, phi):
    """Arc-length pairing on gamma of two layout vectors."""
    return geometry.rho * np.pi * float(np.dot(h, phi))


def pairing_arc(geometry, v, w):
    """Arc-length pairing on Gamma of two arc-basis vectors."""
    return geometry.R * np.pi * float(np.dot(v, w))


# -- harmonic fields ---------------------------------------------------------

@dataclass
class AnnulusField:
    """sum_k (a_k r^k + b_k r^-k) (cos or sin)(k theta) + mean, layout as above.

    ``region`` is ``"annulus"`` (rho < r < R), ``"inner"`` (r < rho, b = 0)
    or ``"disk"`` (r < R, b = 0).
    """

    geometry: DiskGeometry
    region: str
    a: np.ndarray
    b: np.ndarray
    mean: float = 0.0

    def __post_init__(self):
        if self.region not in ("annulus", "inner", "disk"):
            raise ValueError(f"unknown region {self.region!r}")
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.region != "annulus" and np.any(self.b != 0.0):
            raise ValueError("r^-k terms are only allowed on the annulus")

    @property
    def K(self):
        return self.a.size // 2

    def _radial(self, r, derivative=False):
        k = _orders(self.K)[:, None]
        r = np.atleast_1d(r)[None, :]
        if derivative:
            return self.a[:, None] * k * r ** (k - 1) - self.b[:, None] * k * r ** (-k - 1)
        return self.a[:, None] * r**k + self.b[:, None] * r ** (-k)

    def __call__(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        rad = self._radial(r.ravel())
        ang = _circle_basis(self.K, theta.ravel())
        return (self.mean + np.sum(rad * ang, axis=0)).reshape(r.shape)

    def dr(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        rad = self._radial(r.ravel(), derivative=True)
        ang = _circle_basis(self.K, theta.ravel())
        return np.sum(rad * ang, axis=0).reshape(r.shape)

    def dtheta(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        rad = self._radial(r.ravel())
        k = _orders(self.K)[:, None]
        th = theta.ravel()[None, :]
        dang = np.empty((2 * self.K, th.shape[1]))
        dang[0::2] = -k[0::2] * np.sin(k[0::2] * th)
        dang[1::2] = k[1::2] * np.cos(k[1::2] * th)
        return np.sum(rad * dang, axis=0).reshape(r.shape)

    def trace(self, r):
        """Layout coefficients of the restriction to the circle of radius r."""
        return self._radial(np.array([r]))[:, 0]


def annulus_neumann_field(geometry, psi):
    """xi in the annulus with d xi / d n_12 = psi on gamma and zero flux at r = R.

    Solved mode by mode as a 2-by-2 linear system; the free constant is 0.
    """
    psi = np.asarray(psi, dtype=float)
    K = psi.size // 2
    rho, R = geometry.rho, geometry.R
    a = np.zeros(2 * K)
    b = np.zeros(2 * K)
    for i, k in enumerate(_orders(K)):
        if psi[i] == 0.0:
            continue
        # unknowns: al = a R^k and be = b rho^-k, each term at the radius where it
        # is largest, so neither is lost to cancellation.
        # row 1: -d/dr at rho equals psi (times rho/k); row 2: d/dr at R vanishes (times R/k)
        t = (rho / R) ** k
        A = np.array([[-t, 1.0], [1.0, -t]])
        al, be = np.linalg.solve(A, [rho * psi[i] / k, 0.0])
        a[i] = al / R**k
        b[i] = be * rho**k
    return AnnulusField(geometry, "annulus", a, b)


def disk_dirichlet_field(geometry, phi):
    """zeta in the inner disk equal to phi on gamma."""
    phi = np.asarray(phi, dtype=float)
    k = _orders(phi.size // 2)
    return AnnulusField(geometry, "inner", phi / geometry.rho**k, np.zeros_like(phi))


def control_potential(geometry, v, K_target):
    """Psi_v on the whole disk for an arc control v (arc coefficients)."""
    Kc = np.asarray(v).size // 2
    vk = arc_to_fourier(geometry, Kc, K_target) @ np.asarray(v, dtype=float)
    k = _orders(K_target)
    return AnnulusField(geometry, "disk", vk / (k * geometry.R ** (k - 1)), np.zeros_like(vk))


# -- duality identity --------------------------------------------------------

def duality_identity_residual(geometry, K, v, phi):
    """|<Lambda_gamma v, phi + Lambda1 Lambda2 phi> - <v, xi>| for xi = xi(-Lambda2 phi).

    The left side goes through the assembled operators; the right side
    builds xi from its own 2-by-2 mode solves and integrates v xi over the
    arc by quadrature.  ``v`` holds arc coefficients, ``phi`` K circle modes.
    """
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (2 * K,):
        raise ValueError(f"phi must have length {2 * K}")
    if v.size % 2 or v.size == 0:
        raise ValueError("v must hold cos/sin pairs")
    Kc = v.size // 2
    L1, L2 = lambda1(geometry, K), lambda2(geometry, K)
    lhs = pairing_gamma(geometry, lambda_gamma(geometry, Kc, K).apply(v), phi + L1.apply(L2.apply(phi)))
    xi = annulus_neumann_field(geometry, -L2.apply(phi))
    x, w = arc_quadrature(geometry, Kc, K)
    vals = eval_arc_control(geometry, v, x) * xi(geometry.R, x)
    rhs = geometry.R * float(np.dot(w, vals))
    return abs(lhs - rhs)


# -- lemma audit -------------------------------------------------------------

@dataclass
class LemmaABReport:
    n: int
    trials: int
    lambdas: tuple
    min_singular: dict
    max_residual: dict
    failures: int
    details: list = field(default_factory=list, repr=False)

    @property
    def ok(self):
        return self.failures == 0


def _random_spsd(rng, n, rank):
    G = rng.standard_normal((rank, n)) / np.sqrt(n)
    return G.T @ G


def lemma_ab_invertibility(n=200, trials=50, lambdas=(0.1, 1.0, 10.0), seed=0, residual_tol=1e-8):
    """Randomised audit that I + lambda A B is invertible for SPSD A, B, lambda >= 0.

    Half the trials use rank-deficient factors.  A trial fails when the
    smallest singular value drops below 1e-10 times max(1, ||lambda A B||)
    or the relative residual of a direct solve exceeds ``residual_tol``.
    """
    if n > 400 or n < 1:
        raise ValueError("n must lie in 1..400")
    rng = np.random.default_rng(seed)
    lambdas = tuple(float(x) for x in lambdas)
    if any(l < 0 for l in lambdas):
        raise ValueError("lambdas must be nonnegative")
    min_sv = {l: np.inf for l in lambdas}
    max_res = {l: 0.0 for l in lambdas}
    failures = 0
    details = []
    for t in range(trials):
        deficient = t % 2 == 1
        ra = int(rng.integers(1, n)) if deficient else n
        rb = int(rng.integers(1, n)) if deficient else n
        A = _random_spsd(rng, n, ra)
        B = _random_spsd(rng, n, rb)
        AB = A @ B
        rhs = rng.standard_normal(n)
        for lam in lambdas:
            M = np.eye(n) + lam * AB
            sv = np.linalg.svd(M, compute_uv=False)
            x = np.linalg.solve(M, rhs)
            res = np.linalg.norm(M @ x - rhs) / np.linalg.norm(rhs)
            scale = max(1.0, sv[0] - 1.0)
            bad = sv[-1] <= 1e-10 * scale or res > residual_tol
            failures += bool(bad)
            min_sv[lam] = min(min_sv[lam], float(sv[-1]))
            max_res[lam] = max(max_res[lam], float(res))
            details.append((t, lam, ra, rb, float(sv[-1]), float(res)))
    return LemmaABReport(n, trials, lambdas, min_sv, max_res, failures, details)


# -- approximate control -----------------------------------------------------

@dataclass
class ControlResult:
    coeffs: np.ndarray
    residual: float
    achieved: np.ndarray
    target: np.ndarray
    dropped: int = 0
    singular_values: np.ndarray = field(default=None, repr=False)

    @property
    def relative_residual(self):
        ref = _weighted_norm(self.target)
        return self.residual / ref if ref > 0 else self.residual


def _weights(K):
    return 1.0 / np.sqrt(_orders(K))


def _weighted_norm(h):
    h = np.asarray(h, dtype=float)
    return float(np.linalg.norm(_weights(h.size // 2) * h))


def approximate_control(geometry, K_control, K_target, h, reg=0.0):
    """Tikhonov control: minimise ||W (Lambda_gamma v - h)||^2 + reg ||v||^2.

    W weights circle mode k by 1/sqrt(k), so the first term is the squared
    H^{-1/2}-type norm.  The minimiser comes from the SVD of W Lambda_gamma.
    With reg = 0 singular values below 1e-12 times the largest are dropped
    and their count is reported.
    """
    if reg < 0:
        raise ValueError("reg must be nonnegative")
    h = np.asarray(h, dtype=float)
    if h.shape != (2 * K_target,):
        raise ValueError(f"target must have length {2 * K_target}")
    M = lambda_gamma(geometry, K_control, K_target).matrix
    W = _weights(K_target)
    U, s, Vt = np.linalg.svd(W[:, None] * M, full_matrices=False)
    beta = U.T @ (W * h)
    dropped = 0
    if reg > 0:
        filt = s / (s**2 + reg)
    else:
        keep = s > 1e-12 * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
        dropped = int(np.count_nonzero(~keep))
        filt = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
        if dropped:
            log.info("approximate_control: dropped %d singular values", dropped)
    v = Vt.T @ (filt * beta)
    achieved = M @ v
    res = _weighted_norm(achieved - h)
    return ControlResult(v, res, achieved, h, dropped, s)
