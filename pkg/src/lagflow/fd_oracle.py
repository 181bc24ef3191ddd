"""Finite-difference Laplace solvers used as an independent check on the series code.

Both solvers assemble a symmetric (finite-volume scaled) five-point operator
and iterate with conjugate gradients.  Neumann and Robin sides enter through
ghost nodes; Dirichlet nodes are eliminated.  When every side is Neumann the
system is singular but consistent, and the solution is pinned to zero mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

__all__ = [
    "OracleFailure",
    "SideBC",
    "GridField",
    "solve_rectangle",
    "solve_polar",
    "compare",
    "one_sided_derivative",
]


class OracleFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SideBC:
    """Boundary condition on one side.

    ``kind`` is ``"dirichlet"``, ``"neumann"`` or ``"robin"``.  ``value`` is a
    scalar, an array matching the side's nodes, or a callable of the side
    coordinate.  For Neumann it is the outward normal derivative.  Robin
    sides impose alpha du/dn + (1 - alpha) u = 0.
    """

    kind: str
    value: object = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann", "robin"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "robin" and not (0.0 < self.alpha <= 1.0):
            raise ValueError("robin alpha must lie in (0, 1]")

    def values(self, s):
        v = self.value
        if callable(v):
            return np.asarray(v(s), dtype=float) * np.ones_like(s)
        return np.broadcast_to(np.asarray(v, dtype=float), s.shape).astype(float)


def dirichlet(value=0.0):
    return SideBC("dirichlet", value)


def neumann(value=0.0):
    return SideBC("neumann", value)


@dataclass
class GridField:
    """Nodal solution on a tensor grid.

    For rectangles ``coords = (x, y)`` and ``values[i, j] = u(x[i], y[j])``;
    for polar grids ``coords = (r, theta)``.
    """

    coords: tuple
    values: np.ndarray
    bc: dict
    iterations: int = 0
    residual: float = 0.0
    kind: str = "rectangle"
    extra: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.values.shape


def _cg(A, b, rtol, maxiter, singular):
    b = np.asarray(b, dtype=float)
    if singular:
        b = b - b.mean()
    bn = np.linalg.norm(b)
    if bn == 0.0:
        return np.zeros_like(b), 0, 0.0
    d = A.diagonal()
    M = sp.diags(1.0 / d)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = cg(A, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=M, callback=cb)
    r = b - A @ x
    if singular:
        r = r - r.mean()
    rel = float(np.linalg.norm(r) / bn)
    if info != 0 or rel > 10 * rtol:
        raise OracleFailure(f"CG did not converge: info={info}, relative residual {rel:.2e}")
    return x, count[0], rel


def _axis_1d(n, h, lo, hi):
    """Half-cell weighted 1-d operator for -d2/dx2 (symmetric) and the weights.

    Non-Dirichlet ends use a ghost node, and the boundary row is halved so
    the matrix stays symmetric.  Robin ends add h (1 - alpha) / alpha to
    that row's diagonal (before the 1/h**2 scaling).
    """
    main = np.full(n, 2.0)
    off = np.full(n - 1, -1.0)
    w = np.ones(n)
    for end, bc in ((0, lo), (n - 1, hi)):
        if bc.kind != "dirichlet":
            w[end] = 0.5
            main[end] = 1.0
            if bc.kind == "robin":
                main[end] += h * (1.0 - bc.alpha) / bc.alpha
    A = sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2
    return A, w


def solve_rectangle(nx, ny, l1, l2, bc, rtol=1e-10, maxiter=200000):
    """Solve Laplace's equation on (0, l1) x (0, l2) on an nx-by-ny node grid.

    ``bc`` maps ``"left"``, ``"right"``, ``"bottom"``, ``"top"`` to
    :class:`SideBC`.  Corners belong to a Dirichlet side when one touches
    them.
    """
    if nx < 17 or ny < 17:
        raise ValueError("need at least 17 nodes per direction")
    bc = {k: bc[k] for k in ("left", "right", "bottom", "top")}
    x = np.linspace(0.0, l1, nx)
    y = np.linspace(0.0, l2, ny)
    hx, hy = x[1] - x[0], y[1] - y[0]
    Ax, wx = _axis_1d(nx, hx, bc["left"], bc["right"])
    Ay, wy = _axis_1d(ny, hy, bc["bottom"], bc["top"])
    # Ax, Ay already carry their own half-cell weights; the other axis' weights multiply in
    A = (sp.kron(Ax, sp.diags(wy)) + sp.kron(sp.diags(wx), Ay)).tocsr()
    b = np.zeros((nx, ny))
    # Neumann data: ghost node gives 2 g / h on the boundary row, halved by the weight
    for name, axis, h, idx in (("left", 0, hx, 0), ("right", 0, hx, -1), ("bottom", 1, hy, 0), ("top", 1, hy, -1)):
        side = bc[name]
        if side.kind != "neumann":
            continue
        if axis == 0:
            g = side.values(y)
            b[idx, :] += (g / hx) * wy
        else:
            g = side.values(x)
            b[:, idx] += (g / hy) * wx

    u = np.zeros((nx, ny))
    fixed = np.zeros((nx, ny), dtype=bool)
    for name in ("left", "right", "bottom", "top"):
        side = bc[name]
        if side.kind != "dirichlet":
            continue
        if name == "left":
            u[0, :], fixed[0, :] = side.values(y), True
        elif name == "right":
            u[-1, :], fixed[-1, :] = side.values(y), True
        elif name == "bottom":
            u[:, 0], fixed[:, 0] = side.values(x), True
        else:
            u[:, -1], fixed[:, -1] = side.values(x), True
    free = ~fixed.ravel()
    Aff = A[free][:, free]
    rhs = b.ravel()[free] - A[free][:, fixed.ravel()] @ u.ravel()[fixed.ravel()]
    singular = not fixed.any() and all(bc[k].kind == "neumann" for k in bc)
    sol, its, rel = _cg(Aff, rhs, rtol, maxiter, singular)
    flat = u.ravel()
    flat[free] = sol
    u = flat.reshape(nx, ny)
    if singular:
        u -= _trapz_mean(u, x, y)
    return GridField((x, y), u, bc, its, rel)


def _trapz_mean(u, x, y):
    return np.trapezoid(np.trapezoid(u, y, axis=1), x) / ((x[-1] - x[0]) * (y[-1] - y[0]))


def solve_polar(nr, ntheta, outer, bc, inner=0.0, rtol=1e-10, maxiter=200000):
    """Laplace's equation on a disk (``inner == 0``) or annulus in polar coordinates.

    Finite-volume five-point scheme, periodic in theta.  For the disk the
    radial nodes are offset by half a cell so no node sits at the origin;
    the last node is on r = outer.  ``bc`` maps ``"outer"`` (and
    ``"inner"`` for annuli) to :class:`SideBC` whose values are functions of
    theta.  Neumann values are outward normal derivatives of the region.
    """
    if nr < 33 or ntheta < 64:
        raise ValueError("need nr >= 33 and ntheta >= 64")
    if inner < 0 or inner >= outer:
        raise ValueError("need 0 <= inner < outer")
    disk = inner == 0.0
    if disk:
        dr = outer / (nr - 0.5)
        r = (np.arange(nr) + 0.5) * dr
        r[-1] = outer
    else:
        r = np.linspace(inner, outer, nr)
        dr = r[1] - r[0]
    th = np.arange(ntheta) * 2.0 * np.pi / ntheta
    dth = th[1]
    faces = np.empty(nr + 1)
    faces[1:-1] = 0.5 * (r[:-1] + r[1:])
    faces[0] = 0.0 if disk else inner
    faces[-1] = outer
    width = np.diff(faces)

    # -Laplacian integrated over control volumes: symmetric positive semidefinite
    rows, cols, vals = [], [], []
    N = nr * ntheta

    def idx(i, j):
        return i * ntheta + (j % ntheta)

    radial = faces[1:-1] * dth / dr
    for i in range(nr):
        ang = width[i] / (r[i] * dth)
        for j in range(ntheta):
            p = idx(i, j)
            diag = 2.0 * ang
            rows += [p, p]
            cols += [idx(i, j + 1), idx(i, j - 1)]
            vals += [-ang, -ang]
            if i > 0:
                rows.append(p)
                cols.append(idx(i - 1, j))
                vals.append(-radial[i - 1])
                diag += radial[i - 1]
            if i < nr - 1:
                rows.append(p)
                cols.append(idx(i + 1, j))
                vals.append(-radial[i])
                diag += radial[i]
            rows.append(p)
            cols.append(p)
            vals.append(diag)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    b = np.zeros((nr, ntheta))
    u = np.zeros((nr, ntheta))
    fixed = np.zeros((nr, ntheta), dtype=bool)
    sides = [("outer", nr - 1, outer)] + ([] if disk else [("inner", 0, inner)])
    for name, i, rad in sides:
        side = bc[name]
        if side.kind == "dirichlet":
            u[i], fixed[i] = side.values(th), True
        elif side.kind == "neumann":
            b[i] += rad * dth * side.values(th)
        else:
            raise ValueError("polar solver supports dirichlet and neumann sides")
    free = ~fixed.ravel()
    Aff = A[free][:, free]
    rhs = b.ravel()[free] - A[free][:, fixed.ravel()] @ u.ravel()[fixed.ravel()]
    singular = not fixed.any()
    sol, its, rel = _cg(Aff, rhs, rtol, maxiter, singular)
    flat = u.ravel()
    flat[free] = sol
    u = flat.reshape(nr, ntheta)
    return GridField((r, th), u, dict(bc), its, rel, kind="polar", extra={"dr": dr})


def one_sided_derivative(values, h, axis=0, at="end"):
    """Second-order one-sided first derivative at the first or last node."""
    v = np.moveaxis(np.asarray(values), axis, 0)
    if at == "end":
        return (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)


def compare(result, oracle, norm="L2", mean_align=False):
    """Relative discrete norm of ``result - oracle``.

    Normalised by the oracle's norm when that is nonzero.  With
    ``mean_align`` both fields are centred first, which is the right
    comparison for solutions defined up to a constant.
    """
    a = np.asarray(result, dtype=float)
    b = np.asarray(oracle, dtype=float)
    if mean_align:
        a = a - a.mean()
        b = b - b.mean()
    d = a - b
    if norm == "L2":
        num, den = np.sqrt(np.mean(d**2)), np.sqrt(np.mean(b**2))
    elif norm == "max":
        num, den = np.max(np.abs(d)), np.max(np.abs(b))
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return float(num / den) if den > 0 else float(num)
