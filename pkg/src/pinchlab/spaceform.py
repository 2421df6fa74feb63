"""Ambient space forms of non-negative curvature.

A space form of curvature ``delta`` is Euclidean space R^{n+1} when
``delta == 0`` and the round sphere S^{n+1}(delta) otherwise.  Spherical
points are stored as vectors of norm ``1/sqrt(delta)`` in R^{n+2}; tangent
vectors at a point are orthogonal to it.

All functions broadcast over leading axes: a batch of points has shape
``(..., D)`` where ``D`` is the coordinate dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError

POINT_TOL = 1e-12
DEGENERATE_RADIUS = 1e-12


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected space form of constant curvature ``delta >= 0``.

    Parameters
    ----------
    delta : float
        Sectional curvature.  Negative values are rejected.
    ambient_dim : int
        Dimension n+1 of the space form (not of the coordinate space).
    """

    delta: float = 0.0
    ambient_dim: int = 3

    def __post_init__(self):
        if not math.isfinite(self.delta) or self.delta < 0:
            raise DomainError(f"curvature must be finite and >= 0, got {self.delta}")
        if self.ambient_dim < 2:
            raise DomainError(f"ambient dimension must be >= 2, got {self.ambient_dim}")
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def n(self) -> int:
        """Dimension of hypersurfaces in this space."""
        return self.ambient_dim - 1

    @property
    def spherical(self) -> bool:
        return self.delta > 0

    @property
    def coord_dim(self) -> int:
        return self.ambient_dim + 1 if self.spherical else self.ambient_dim

    @property
    def sqrt_delta(self) -> float:
        return math.sqrt(self.delta)

    @property
    def hemisphere_radius(self) -> float:
        """pi / (2 sqrt(delta)), the radius of an open hemisphere (inf if flat)."""
        return math.pi / (2 * self.sqrt_delta) if self.spherical else math.inf

    def s(self, t):
        t = np.asarray(t, dtype=float)
        if not self.spherical:
            return t.copy()
        a = self.sqrt_delta
        return np.sin(a * t) / a

    def c(self, t):
        t = np.asarray(t, dtype=float)
        if not self.spherical:
            return np.ones_like(t)
        return np.cos(self.sqrt_delta * t)

    def t(self, t):
        t = np.asarray(t, dtype=float)
        if not self.spherical:
            return t.copy()
        if np.any(t >= self.hemisphere_radius):
            raise DomainError("tangent warping function requested beyond pi/(2 sqrt(delta))")
        a = self.sqrt_delta
        return np.tan(a * t) / a

    def scaled(self, factor: float) -> "SpaceForm":
        """Space form after multiplying all lengths by ``factor``."""
        return SpaceForm(self.delta / factor**2, self.ambient_dim)

    def check_points(self, x, tol: float = POINT_TOL) -> np.ndarray:
        """Validate coordinate shape and, for spheres, the norm constraint."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.coord_dim:
            raise DomainError(
                f"points must have {self.coord_dim} coordinates, got {x.shape[-1]}"
            )
        if self.spherical:
            dev = np.abs(np.einsum("...i,...i->...", x, x) * self.delta - 1.0)
            if np.any(dev > tol):
                raise DomainError(
                    f"point off the sphere |x|^2 = 1/delta (max deviation {np.max(dev):.3e})"
                )
        return x


def warping(space: SpaceForm, t, with_tan: bool = True):
    """Return ``(s_delta(t), c_delta(t), t_delta(t))``.

    ``tan`` is ``None`` when ``with_tan`` is false.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("warping functions are evaluated at t >= 0")
    tan = space.t(t) if with_tan else None
    return space.s(t), space.c(t), tan


def geodesic_distance(space: SpaceForm, p, q):
    """Geodesic distance between points (broadcasting over leading axes).

    For spheres the angle is computed as ``2*atan2(|p-q|, |p+q|)``, which is
    the arccos of the normalized inner product without its cancellation near
    0 and pi.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if not space.spherical:
        return np.linalg.norm(q - p, axis=-1)
    a = space.sqrt_delta
    pu, qu = a * p, a * q
    ang = 2.0 * np.arctan2(np.linalg.norm(pu - qu, axis=-1), np.linalg.norm(pu + qu, axis=-1))
    return ang / a


def position_field(space: SpaceForm, p0, x):
    """Distance ``r`` to ``p0``, the unit radial gradient and ``Z = s(r) grad r``.

    For spheres ``Z = c(r) x - p0`` is tangent to the sphere at ``x``.
    """
    p0 = np.asarray(p0, dtype=float)
    x = np.asarray(x, dtype=float)
    r = geodesic_distance(space, p0, x)
    if np.any(r < DEGENERATE_RADIUS):
        raise DegenerateError("position field undefined at the base point")
    c = space.c(r)
    Z = c[..., None] * x - p0
    s = space.s(r)
    grad = Z / s[..., None]
    return r, grad, Z


def _radial_direction(space, p0, x):
    """Unit direction at ``p0`` of the geodesic towards ``x`` and its raw length."""
    if not space.spherical:
        w = x - p0
    else:
        a = space.sqrt_delta
        q = a * p0
        xu = a * x
        w = xu - np.einsum("...i,...i->...", xu, q)[..., None] * q
    wn = np.linalg.norm(w, axis=-1)
    if np.any(wn < DEGENERATE_RADIUS):
        raise DegenerateError("radial projection undefined at the base point")
    return w / wn[..., None], wn


def radial_project(space: SpaceForm, p0, R: float, x):
    """Point at distance ``R`` from ``p0`` on the geodesic ray through ``x``."""
    p0 = np.asarray(p0, dtype=float)
    x = np.asarray(x, dtype=float)
    u, _ = _radial_direction(space, p0, x)
    if not space.spherical:
        return p0 + R * u
    if R >= space.hemisphere_radius:
        raise DomainError("projection radius must stay below pi/(2 sqrt(delta))")
    return space.c(R) * p0 + space.s(R) * u


def radial_project_differential(space: SpaceForm, p0, R: float, x):
    """Ambient Jacobian of :func:`radial_project` with respect to ``x``.

    Returns an array of shape ``(..., D, D)``.  Applied to a vector tangent
    to the space form at ``x`` it gives the differential of the projection.
    """
    p0 = np.asarray(p0, dtype=float)
    x = np.asarray(x, dtype=float)
    u, wn = _radial_direction(space, p0, x)
    D = x.shape[-1]
    eye = np.eye(D)
    proj_u = eye - u[..., :, None] * u[..., None, :]
    if not space.spherical:
        return (R / wn)[..., None, None] * proj_u
    a = space.sqrt_delta
    q = a * p0
    proj_q = eye - np.outer(q, q)
    return (math.sin(a * R) / wn)[..., None, None] * (proj_u @ proj_q)
