"""Transport of closed polylines by planar velocity fields.

A field is any callable ``X(t, pts) -> (n, 2) array``; :class:`VectorFieldSpec`
wraps the kinds the rest of the package produces.  Integration is classical
fixed-step RK4 applied to every vertex at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidCurve",
    "TransportEscape",
    "JordanCurve",
    "VectorFieldSpec",
    "circle",
    "ellipse",
    "rotation_field",
    "shear_field",
    "zero_field",
    "series_gradient_field",
    "cauchy_riemann_rational_field",
    "potential_field",
    "advect",
    "enclosed_area",
    "curve_distance",
    "pressure_from_potential",
    "disk_domain",
    "rectangle_domain",
]


class InvalidCurve(ValueError):
    pass


class TransportEscape(RuntimeError):
    """A trajectory left the declared domain."""

    def __init__(self, vertex, time, position):
        self.vertex = int(vertex)
        self.time = float(time)
        self.position = tuple(float(c) for c in position)
        super().__init__(f"vertex {self.vertex} left the domain at t={self.time:.6g}, position {self.position}")


def _signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _self_intersects(v, chunk=512):
    """Segment-pair test over all non-adjacent edges, vectorised in row blocks."""
    n = len(v)
    p = v
    q = np.roll(v, -1, axis=0)
    idx = np.arange(n)
    for start in range(0, n, chunk):
        i = idx[start : start + chunk][:, None]
        j = idx[None, :]
        adjacent = (j == i) | (j == (i + 1) % n) | (i == (j + 1) % n)
        mask = (j > i) & ~adjacent
        if not mask.any():
            continue
        pi, qi = p[i[:, 0]], q[i[:, 0]]
        ax, ay = pi[:, 0:1], pi[:, 1:2]
        bx, by = qi[:, 0:1], qi[:, 1:2]
        cx, cy = p[None, :, 0], p[None, :, 1]
        dx, dy = q[None, :, 0], q[None, :, 1]
        d1 = _orient(ax, ay, bx, by, cx, cy)
        d2 = _orient(ax, ay, bx, by, dx, dy)
        d3 = _orient(cx, cy, dx, dy, ax, ay)
        d4 = _orient(cx, cy, dx, dy, bx, by)
        proper = (d1 * d2 < 0) & (d3 * d4 < 0)
        # collinear touching counts as an intersection too
        touch = (d1 == 0) | (d2 == 0) | (d3 == 0) | (d4 == 0)
        if np.any(proper & mask):
            return True
        if np.any(touch & mask):
            ii, jj = np.nonzero(touch & mask)
            for a, b in zip(ii + start, jj):
                if _segments_touch(p[a], q[a], p[b], q[b]):
                    return True
    return False


def _on_segment(a, b, c):
    return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])


def _segments_touch(a, b, c, d):
    for (s0, s1, pt) in ((a, b, c), (a, b, d), (c, d, a), (c, d, b)):
        if _orient(*s0, *s1, *pt) == 0 and _on_segment(s0, s1, pt):
            return True
    return False


@dataclass(frozen=True)
class JordanCurve:
    """Closed polyline; the last vertex connects back to the first."""

    vertices: np.ndarray
    orientation: str = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise InvalidCurve("vertices must be an (n, 2) array")
        if len(v) >= 2 and np.allclose(v[0], v[-1], rtol=0, atol=0):
            v = v[:-1]
        if len(v) < 8:
            raise InvalidCurve("a curve needs at least 8 vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidCurve("vertices must be finite")
        area = _signed_area(v)
        if area == 0.0:
            raise InvalidCurve("degenerate curve with zero area")
        actual = "CCW" if area > 0 else "CW"
        orient = actual if self.orientation is None else self.orientation
        if orient not in ("CCW", "CW"):
            raise InvalidCurve(f"orientation must be CCW or CW, got {orient!r}")
        if orient != actual:
            raise InvalidCurve(f"vertices run {actual} but orientation says {orient}")
        if _self_intersects(v):
            raise InvalidCurve("curve intersects itself")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "orientation", orient)

    def __len__(self):
        return len(self.vertices)

    def reversed(self):
        return JordanCurve(self.vertices[::-1].copy())

    @property
    def signed_area(self):
        return _signed_area(self.vertices)

    def contains(self, pts):
        """Even-odd point-in-polygon test; points on an edge may go either way."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[:, 0:1], pts[:, 1:2]
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        ax, ay, bx, by = a[None, :, 0], a[None, :, 1], b[None, :, 0], b[None, :, 1]
        crosses = (ay > y) != (by > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (y - ay) * (bx - ax) / (by - ay)
        return (np.count_nonzero(crosses & (x < xint), axis=1) % 2) == 1

    def edge_midpoints(self):
        return 0.5 * (self.vertices + np.roll(self.vertices, -1, axis=0))


def circle(n=256, radius=1.0, center=(0.0, 0.0)):
    th = 2 * np.pi * np.arange(n) / n
    return JordanCurve(np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)]))


def ellipse(n=256, a=1.0, b=0.5, angle=0.0, center=(0.0, 0.0)):
    th = 2 * np.pi * np.arange(n) / n
    x, y = a * np.cos(th), b * np.sin(th)
    c, s = np.cos(angle), np.sin(angle)
    return JordanCurve(np.column_stack([center[0] + c * x - s * y, center[1] + s * x + c * y]))


# -- fields ------------------------------------------------------------------

@dataclass
class VectorFieldSpec:
    """Velocity field X(t, pts) with a tag saying where it came from."""

    kind: str
    func: object
    time_dependent: bool = False
    divergence_free: bool = True
    label: str = ""

    KINDS = ("GradientOfSeriesField", "CauchyRiemannOfRational", "TimeModulatedPotential", "Analytic")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")

    def __call__(self, t, pts):
        return np.asarray(self.func(t, np.asarray(pts, dtype=float)), dtype=float)


def rotation_field(omega=1.0):
    return VectorFieldSpec("Analytic", lambda t, p: omega * np.column_stack([-p[:, 1], p[:, 0]]), label="rotation")


def shear_field(rate=1.0):
    return VectorFieldSpec(
        "Analytic", lambda t, p: np.column_stack([rate * p[:, 1], np.zeros(len(p))]), label="shear"
    )


def zero_field():
    return VectorFieldSpec("Analytic", lambda t, p: np.zeros_like(p), label="zero")


def series_gradient_field(field):
    """Gradient of a harmonic rectangle series; divergence free."""

    def f(t, p):
        gx, gy = field.gradient(p[:, 0], p[:, 1])
        return np.column_stack([np.atleast_1d(gx), np.atleast_1d(gy)])

    return VectorFieldSpec("GradientOfSeriesField", f, label="series gradient")


def cauchy_riemann_rational_field(rational):
    """V_f = (Re f, -Im f) of a rational function; divergence and curl free off the poles."""

    def f(t, p):
        w = rational(p[:, 0] + 1j * p[:, 1])
        return np.column_stack([w.real, -w.imag])

    return VectorFieldSpec("CauchyRiemannOfRational", f, label="Cauchy-Riemann")


def potential_field(gradient, time_dependent=True):
    """Wrap a callable ``gradient(t, x, y) -> (gx, gy)``, e.g. an assembled control potential."""

    def f(t, p):
        gx, gy = gradient(t, p[:, 0], p[:, 1])
        return np.column_stack([gx, gy])

    return VectorFieldSpec("TimeModulatedPotential", f, time_dependent=time_dependent)


def disk_domain(R=1.0, center=(0.0, 0.0)):
    c = np.asarray(center, dtype=float)
    return lambda p: np.sum((p - c) ** 2, axis=1) < R * R


def rectangle_domain(l1, l2):
    return lambda p: (p[:, 0] > 0) & (p[:, 0] < l1) & (p[:, 1] > 0) & (p[:, 1] < l2)


# -- transport ---------------------------------------------------------------

def _rk4(X, t0, t1, steps, pts, domain):
    h = (t1 - t0) / steps
    y = pts.copy()
    for n in range(steps):
        t = t0 + n * h
        k1 = X(t, y)
        k2 = X(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = X(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = X(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if domain is not None:
            bad = ~np.asarray(domain(y), dtype=bool)
            if bad.any():
                i = int(np.argmax(bad))
                raise TransportEscape(i, t + h, y[i])
        if not np.all(np.isfinite(y)):
            i = int(np.argmax(~np.all(np.isfinite(y), axis=1)))
            raise TransportEscape(i, t + h, y[i])
    return y


def advect(curve, field, t0, t1, steps, domain=None, check=True):
    """Transport every vertex from t0 to t1 with ``steps`` RK4 steps.

    ``domain`` is an optional predicate on an (n, 2) array; the first vertex
    found outside raises :class:`TransportEscape`.  With ``check`` the result
    is revalidated as a simple closed curve.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if t0 == t1:
        return curve
    y = _rk4(field, float(t0), float(t1), int(steps), np.asarray(curve.vertices), domain)
    if not check:
        out = object.__new__(JordanCurve)
        object.__setattr__(out, "vertices", y)
        object.__setattr__(out, "orientation", curve.orientation)
        return out
    return JordanCurve(y, curve.orientation)


def advect_points(pts, field, t0, t1, steps, domain=None):
    if steps < 1:
        raise ValueError("steps must be at least 1")
    return _rk4(field, float(t0), float(t1), int(steps), np.atleast_2d(np.asarray(pts, dtype=float)), domain)


def enclosed_area(curve):
    if not isinstance(curve, JordanCurve):
        curve = JordanCurve(curve)
    return abs(curve.signed_area)


def _point_to_polyline(pts, poly):
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    L2 = np.sum(ab**2, axis=1)
    out = np.empty(len(pts))
    for s in range(0, len(pts), 256):
        p = pts[s : s + 256, None, :]
        t = np.clip(np.sum((p - a[None]) * ab[None], axis=2) / np.where(L2 > 0, L2, 1.0)[None], 0.0, 1.0)
        proj = a[None] + t[..., None] * ab[None]
        out[s : s + 256] = np.sqrt(np.min(np.sum((p - proj) ** 2, axis=2), axis=1))
    return out


def curve_distance(c1, c2):
    """Symmetric Hausdorff distance between the vertex sets and the other polyline."""
    v1 = np.asarray(c1.vertices)
    v2 = np.asarray(c2.vertices)
    return float(max(_point_to_polyline(v1, v2).max(), _point_to_polyline(v2, v1).max()))


def pressure_from_potential(psi, point, t, dt=1e-4, gradient=None, h=1e-5):
    """p = -d psi / dt - |grad psi|^2 / 2 at ``point``.

    The time derivative is a central difference with step ``dt``; the
    gradient is ``gradient(t, x, y)`` when given, central differences
    with step ``h`` otherwise.  ``psi(t, x, y)`` takes scalar or array x, y.
    """
    x, y = (np.asarray(c, dtype=float) for c in point)
    dpsi = (psi(t + dt, x, y) - psi(t - dt, x, y)) / (2.0 * dt)
    if gradient is not None:
        gx, gy = gradient(t, x, y)
    else:
        gx = (psi(t, x + h, y) - psi(t, x - h, y)) / (2.0 * h)
        gy = (psi(t, x, y + h) - psi(t, x, y - h)) / (2.0 * h)
    p = -dpsi - 0.5 * (np.asarray(gx) ** 2 + np.asarray(gy) ** 2)
    return float(p) if np.ndim(p) == 0 else p
