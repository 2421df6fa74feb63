"""Analytic hypersurfaces, quadrature sampling and point-cloud ingestion.

Every catalog shape is parametrized over hyperspherical angles
``(theta_1, ..., theta_{n-1}, phi)``.  Polar angles are sampled at
Gauss-Jacobi nodes in ``cos(theta)`` (Gauss-Legendre for n = 2) so poles
are never hit; the azimuth uses the periodic trapezoid rule.  Charts return
exact first and second derivatives ("jets"); user charts without a jet fall
back to central finite differences.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import roots_jacobi

from .errors import DomainError, ImmersionError, ParseError
from .spaceform import SpaceForm, position_field

MIN_NODES = 8
IMMERSION_TOL = 1e-10

_TRIG = {
    "sin": (np.sin, np.cos, lambda t: -np.sin(t)),
    "cos": (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)),
}


def _sphere_factors(n):
    """Factor lists of the hyperspherical embedding of S^n, last entry = cos(theta_1)."""
    comps = []
    for k in range(n - 1):
        comps.append([(j, "sin") for j in range(k)] + [(k, "cos")])
    polar_sins = [(j, "sin") for j in range(n - 1)]
    comps.append(polar_sins + [(n - 1, "cos")])
    comps.append(polar_sins + [(n - 1, "sin")])
    return comps[1:] + comps[:1]


def sphere_jet(angles):
    """Unit direction ``omega(angles)`` with its first and second derivatives.

    Parameters
    ----------
    angles : (N, n) array
        Polar angles followed by the azimuth.

    Returns
    -------
    w : (N, n+1) array
    dw : (N, n, n+1) array
    ddw : (N, n, n, n+1) array
    """
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    N, n = angles.shape
    vals = {}
    for kind, fns in _TRIG.items():
        for order, fn in enumerate(fns):
            vals[kind, order] = fn(angles)
    w = np.empty((N, n + 1))
    dw = np.zeros((N, n, n + 1))
    ddw = np.zeros((N, n, n, n + 1))
    for c, factors in enumerate(_sphere_factors(n)):
        axes = {axis: kind for axis, kind in factors}

        def product(orders):
            out = np.ones(N)
            for axis, kind in axes.items():
                out = out * vals[kind, orders.get(axis, 0)][:, axis]
            return out

        w[:, c] = product({})
        for i in axes:
            dw[:, i, c] = product({i: 1})
            for j in axes:
                ddw[:, i, j, c] = product({i: 2} if i == j else {i: 1, j: 1})
    return w, dw, ddw


def profile_matrix(name: str, n: int) -> np.ndarray:
    """Traceless quadratic form defining a degree-2 angular profile on S^n."""
    Q = np.zeros((n + 1, n + 1))
    if name == "zonal":
        Q[np.diag_indices(n + 1)] = -1.0 / n
        Q[n, n] = 1.0
    elif name == "sectoral":
        Q[0, 0], Q[1, 1] = 1.0, -1.0
    else:
        raise DomainError(f"unknown profile {name!r} (expected 'zonal' or 'sectoral')")
    return Q


def _quadratic_jet(Q, w, dw, ddw):
    """Jet of ``P(angles) = w^T Q w``."""
    Qw = w @ Q
    P = np.einsum("ni,ni->n", Qw, w)
    dP = 2 * np.einsum("nai,ni->na", dw, Qw)
    ddP = 2 * (np.einsum("nai,ij,nbj->nab", dw, Q, dw) + np.einsum("nabi,ni->nab", ddw, Qw))
    return P, dP, ddP


def _radial_graph_jet(rho, drho, ddrho, w, dw, ddw):
    """Jet of ``rho * w`` for a scalar radius function ``rho``."""
    x = rho[:, None] * w
    dx = drho[:, :, None] * w[:, None, :] + rho[:, None, None] * dw
    ddx = (
        ddrho[:, :, :, None] * w[:, None, None, :]
        + drho[:, :, None, None] * dw[:, None, :, :]
        + drho[:, None, :, None] * dw[:, :, None, :]
        + rho[:, None, None, None] * ddw
    )
    return x, dx, ddx


class ParametricShape:
    """Immersed hypersurface given by a chart on hyperspherical angles.

    Subclasses implement :meth:`jet`.  ``center`` is the descriptor center
    used to orient the normal outward.
    """

    name = "chart"

    def __init__(self, space: SpaceForm, n: int, center):
        if n < 2:
            raise DomainError("intrinsic dimension must be >= 2")
        if space.n != n:
            raise DomainError(f"space form of dimension {space.ambient_dim} hosts n={space.n}, not {n}")
        self.space = space
        self.n = n
        self.center = space.check_points(np.asarray(center, dtype=float), tol=1e-9)

    @property
    def param_ranges(self):
        return np.array([math.pi] * (self.n - 1) + [2 * math.pi])

    def chart(self, u) -> np.ndarray:
        return self.jet(u)[0]

    def jet(self, u):
        raise NotImplementedError

    def descriptor(self) -> dict:
        return {"name": self.name}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.descriptor().items() if k != "name")
        return f"{type(self).__name__}({args})"


class ChartShape(ParametricShape):
    """User-supplied chart, optionally with an analytic jet.

    Without a jet, derivatives come from central finite differences with
    steps ``eps**(1/3)`` (first order) and ``eps**(1/4)`` (second order)
    scaled by the parameter range.
    """

    def __init__(self, space, n, center, chart: Callable, jet: Optional[Callable] = None):
        super().__init__(space, n, center)
        self._chart = chart
        self._jet = jet

    def chart(self, u):
        return np.asarray(self._chart(np.atleast_2d(u)), dtype=float)

    def jet(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self._jet is not None:
            return self._jet(u)
        return finite_difference_jet(self.chart, u, self.param_ranges)


def finite_difference_jet(chart, u, ranges):
    """Central-difference first and second derivatives of ``chart`` at ``u``."""
    eps = np.finfo(float).eps
    u = np.atleast_2d(u)
    N, n = u.shape
    x = chart(u)
    D = x.shape[1]
    h1 = eps ** (1 / 3) * np.asarray(ranges)
    h2 = eps ** (1 / 4) * np.asarray(ranges)
    dx = np.empty((N, n, D))
    ddx = np.empty((N, n, n, D))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h1[i]
        dx[:, i] = (chart(u + e) - chart(u - e)) / (2 * h1[i])
        e = np.zeros(n)
        e[i] = h2[i]
        ddx[:, i, i] = (chart(u + e) - 2 * x + chart(u - e)) / h2[i] ** 2
        for j in range(i):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i], ej[j] = h2[i], h2[j]
            mixed = (
                chart(u + ei + ej) - chart(u + ei - ej) - chart(u - ei + ej) + chart(u - ei - ej)
            ) / (4 * h2[i] * h2[j])
            ddx[:, i, j] = mixed
            ddx[:, j, i] = mixed
    return x, dx, ddx


class PerturbedSphere(ParametricShape):
    """Radial graph ``center + radius * (1 + amplitude * P(w)) * w`` in R^{n+1}."""

    name = "perturbed_sphere"

    def __init__(self, radius=1.0, amplitude=0.0, center=None, n=2, profile="zonal"):
        space = SpaceForm(0.0, n + 1)
        if center is None:
            center = np.zeros(n + 1)
        super().__init__(space, n, center)
        if radius <= 0:
            raise DomainError("radius must be positive")
        Q = profile_matrix(profile, n)
        lo, hi = np.linalg.eigvalsh(Q)[[0, -1]]
        if amplitude * hi <= -1 or amplitude * lo <= -1 or abs(amplitude) >= 1:
            raise DomainError("amplitude must satisfy |t| < 1 and keep the radial graph positive")
        self.radius = float(radius)
        self.amplitude = float(amplitude)
        self.profile = profile
        self._Q = Q

    def jet(self, u):
        w, dw, ddw = sphere_jet(u)
        P, dP, ddP = _quadratic_jet(self._Q, w, dw, ddw)
        r0, t = self.radius, self.amplitude
        x, dx, ddx = _radial_graph_jet(r0 * (1 + t * P), r0 * t * dP, r0 * t * ddP, w, dw, ddw)
        return x + self.center, dx, ddx

    def descriptor(self):
        return {
            "name": self.name,
            "radius": self.radius,
            "amplitude": self.amplitude,
            "profile": self.profile,
            "center": self.center.tolist(),
            "n": self.n,
        }


class RoundSphere(PerturbedSphere):
    name = "round_sphere"

    def __init__(self, radius=1.0, center=None, n=2):
        super().__init__(radius=radius, amplitude=0.0, center=center, n=n)

    def descriptor(self):
        return {"name": self.name, "radius": self.radius, "center": self.center.tolist(), "n": self.n}


class Ellipsoid(ParametricShape):
    """Ellipsoid ``center + diag(semiaxes) w``; the first semi-axis is along x."""

    name = "ellipsoid"

    def __init__(self, semiaxes=(2.0, 1.0, 1.0), center=None):
        a = np.asarray(semiaxes, dtype=float)
        if a.ndim != 1 or a.size < 3 or np.any(a <= 0):
            raise DomainError("ellipsoid needs >= 3 positive semi-axes")
        n = a.size - 1
        if center is None:
            center = np.zeros(n + 1)
        super().__init__(SpaceForm(0.0, n + 1), n, center)
        self.semiaxes = a

    def jet(self, u):
        w, dw, ddw = sphere_jet(u)
        a = self.semiaxes
        return w * a + self.center, dw * a, ddw * a

    def descriptor(self):
        return {"name": self.name, "semiaxes": self.semiaxes.tolist(), "center": self.center.tolist()}


def _orthonormal_complement(q):
    """Deterministic orthonormal basis (columns) of the complement of unit ``q``."""
    D = q.size
    M = np.column_stack([q, np.eye(D)])
    Qm, _ = np.linalg.qr(M)
    basis = Qm[:, 1:D]
    return basis - np.outer(q, q @ basis)


class PerturbedGeodesicSphere(ParametricShape):
    """Geodesic radial graph ``exp_{p0}(rho0 (1 + amplitude P(w)) E w)`` in S^{n+1}(delta)."""

    name = "perturbed_geodesic_sphere"

    def __init__(self, radius=math.pi / 4, amplitude=0.0, delta=1.0, center=None, n=2, profile="zonal"):
        space = SpaceForm(delta, n + 1)
        if not space.spherical:
            raise DomainError("geodesic spheres live in a sphere (delta > 0)")
        a = space.sqrt_delta
        if center is None:
            center = np.zeros(n + 2)
            center[-1] = 1.0 / a
        center = np.asarray(center, dtype=float)
        super().__init__(space, n, center)
        Q = profile_matrix(profile, n)
        lo, hi = np.linalg.eigvalsh(Q)[[0, -1]]
        if abs(amplitude) >= 1 or amplitude * lo <= -1 or amplitude * hi <= -1:
            raise DomainError("amplitude must satisfy |t| < 1 and keep the radial graph positive")
        if radius <= 0 or radius * (1 + abs(amplitude) * max(abs(lo), abs(hi))) >= space.hemisphere_radius:
            raise DomainError("geodesic radius must stay inside the open hemisphere")
        self.radius = float(radius)
        self.amplitude = float(amplitude)
        self.profile = profile
        self._Q = Q
        self._q = self.center * a
        self._E = _orthonormal_complement(self._q)

    def jet(self, u):
        a = self.space.sqrt_delta
        w, dw, ddw = sphere_jet(u)
        P, dP, ddP = _quadratic_jet(self._Q, w, dw, ddw)
        scale = a * self.radius
        t = self.amplitude
        al, dal, ddal = scale * (1 + t * P), scale * t * dP, scale * t * ddP
        E, q = self._E, self._q
        m, dm, ddm = w @ E.T, dw @ E.T, ddw @ E.T
        ca, sa = np.cos(al), np.sin(al)
        radial = ca[:, None] * m - sa[:, None] * q
        x = (ca[:, None] * q + sa[:, None] * m) / a
        dx = (dal[:, :, None] * radial[:, None, :] + sa[:, None, None] * dm) / a
        back = -(ca[:, None] * q + sa[:, None] * m)
        ddx = (
            ddal[:, :, :, None] * radial[:, None, None, :]
            + (dal[:, :, None] * dal[:, None, :])[..., None] * back[:, None, None, :]
            + (ca[:, None, None, None] * dal[:, :, None, None]) * dm[:, None, :, :]
            + (ca[:, None, None, None] * dal[:, None, :, None]) * dm[:, :, None, :]
            + sa[:, None, None, None] * ddm
        ) / a
        return x, dx, ddx

    def descriptor(self):
        return {
            "name": self.name,
            "radius": self.radius,
            "amplitude": self.amplitude,
            "profile": self.profile,
            "delta": self.space.delta,
            "center": self.center.tolist(),
            "n": self.n,
        }


class GeodesicSphere(PerturbedGeodesicSphere):
    name = "geodesic_sphere"

    def __init__(self, radius=math.pi / 4, delta=1.0, center=None, n=2):
        super().__init__(radius=radius, amplitude=0.0, delta=delta, center=center, n=n)

    def descriptor(self):
        return {
            "name": self.name,
            "radius": self.radius,
            "delta": self.space.delta,
            "center": self.center.tolist(),
            "n": self.n,
        }


@dataclass(frozen=True)
class CatalogEntry:
    cls: type
    space: str
    params: dict
    summary: str


CATALOG = {
    "round_sphere": CatalogEntry(
        RoundSphere, "euclidean",
        {"radius": "float > 0 (default 1)", "center": "list of n+1 floats (default origin)", "n": "int >= 2 (default 2)"},
        "Round sphere of radius rho in R^{n+1}",
    ),
    "ellipsoid": CatalogEntry(
        Ellipsoid, "euclidean",
        {"semiaxes": "list of n+1 positive floats (default [2,1,1])", "center": "list of n+1 floats"},
        "Axis-aligned ellipsoid in R^{n+1}",
    ),
    "perturbed_sphere": CatalogEntry(
        PerturbedSphere, "euclidean",
        {
            "radius": "float > 0 (default 1)",
            "amplitude": "float, |t| < 1 (default 0)",
            "profile": "'zonal' | 'sectoral' (default zonal)",
            "center": "list of n+1 floats",
            "n": "int >= 2 (default 2)",
        },
        "Radial graph rho0 (1 + t P(w)) over the unit sphere, P a degree-2 harmonic",
    ),
    "geodesic_sphere": CatalogEntry(
        GeodesicSphere, "spherical",
        {
            "radius": "float in (0, pi/(2 sqrt(delta))) (default pi/4)",
            "delta": "float > 0 (default 1)",
            "center": "list of n+2 floats on the sphere (default north pole)",
            "n": "int >= 2 (default 2)",
        },
        "Geodesic sphere S(p0, rho) in S^{n+1}(delta)",
    ),
    "perturbed_geodesic_sphere": CatalogEntry(
        PerturbedGeodesicSphere, "spherical",
        {
            "radius": "float (default pi/4)",
            "amplitude": "float, |t| < 1 (default 0)",
            "profile": "'zonal' | 'sectoral'",
            "delta": "float > 0 (default 1)",
            "center": "list of n+2 floats on the sphere",
            "n": "int >= 2 (default 2)",
        },
        "Geodesic radial graph exp_p0(rho0 (1 + t P(w)) w) in S^{n+1}(delta)",
    ),
}


def make_shape(name: str, **params) -> ParametricShape:
    try:
        entry = CATALOG[name]
    except KeyError:
        raise DomainError(f"unknown shape {name!r}; known: {', '.join(CATALOG)}") from None
    unknown = set(params) - set(entry.params)
    if unknown:
        raise DomainError(f"unknown parameters for {name}: {', '.join(sorted(unknown))}")
    return entry.cls(**params)


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid: ``nodes * 2**level`` polar nodes per polar angle, twice that in azimuth."""

    nodes: int = 64
    rule: str = "gauss-legendre"
    level: int = 0

    def __post_init__(self):
        if self.nodes < MIN_NODES:
            raise DomainError(f"need at least {MIN_NODES} nodes per axis")
        if self.rule != "gauss-legendre":
            raise DomainError(f"unsupported quadrature rule {self.rule!r}")
        if self.level < 0:
            raise DomainError("refinement level must be >= 0")

    @property
    def polar_nodes(self) -> int:
        return self.nodes * 2**self.level

    @property
    def azimuth_nodes(self) -> int:
        return 2 * self.polar_nodes

    def refined(self) -> "GridSpec":
        return replace(self, level=self.level + 1)


def polar_rule(N: int, power: int):
    """Nodes and weights integrating ``f(theta) * sin(theta)**power`` over (0, pi).

    Gauss-Jacobi in ``cos(theta)`` with exponent ``(power-1)/2``; the
    returned weights are divided by ``sin(theta)**power`` so that they
    multiply the full integrand.
    """
    alpha = (power - 1) / 2.0
    x, w = roots_jacobi(N, alpha, alpha)
    order = np.argsort(-x)
    x, w = x[order], w[order]
    theta = np.arccos(x)
    return theta, w / np.sin(theta) ** power


def parameter_grid(n: int, grid: GridSpec):
    """Tensor-grid parameters ``(N, n)``, raw rule weights and the grid shape."""
    axes, weights = [], []
    for j in range(n - 1):
        th, w = polar_rule(grid.polar_nodes, n - 1 - j)
        axes.append(th)
        weights.append(w)
    M = grid.azimuth_nodes
    axes.append(2 * np.pi * np.arange(M) / M)
    weights.append(np.full(M, 2 * np.pi / M))
    mesh = np.meshgrid(*axes, indexing="ij")
    wmesh = np.meshgrid(*weights, indexing="ij")
    params = np.stack([m.ravel() for m in mesh], axis=1)
    rule = np.prod(np.stack([w.ravel() for w in wmesh]), axis=0)
    return params, rule, tuple(len(a) for a in axes)


@dataclass(frozen=True, eq=False)
class SampledHypersurface:
    """Quadrature-weighted samples of an immersed hypersurface.

    Arrays are indexed by sample first.  ``weights`` already contain
    ``sqrt(det g)`` so integrals are plain weighted sums.  Radial fields
    (``r``, ``Z``, ``Z_tan``) are ``None`` until a base point is set with
    :meth:`with_center`.
    """

    space: SpaceForm
    params: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    ddx: np.ndarray
    metric: np.ndarray
    normal: np.ndarray
    weights: np.ndarray
    grid_shape: tuple
    shape: Optional[ParametricShape] = None
    grid: Optional[GridSpec] = None
    scale: float = 1.0
    center: Optional[np.ndarray] = None
    r: Optional[np.ndarray] = None
    Z: Optional[np.ndarray] = None
    Z_tan: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params.shape[1]

    @property
    def size(self) -> int:
        return self.x.shape[0]

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    @cached_property
    def spacing(self) -> float:
        """Largest nearest-neighbour distance between samples."""
        d, _ = cKDTree(self.x).query(self.x, k=2)
        return float(np.max(d[:, 1]))

    @property
    def support_normal(self) -> np.ndarray:
        """<Z, nu> at every sample."""
        self._require_center()
        return np.einsum("ni,ni->n", self.Z, self.normal)

    def _require_center(self):
        if self.center is None:
            raise DomainError("base point not set; call with_center() or extrinsic_radius() first")

    def chart_points(self, u) -> np.ndarray:
        """Surface points at arbitrary parameters, in this sample's scale."""
        if self.shape is None:
            raise DomainError("no chart attached to this sample")
        return self.scale * self.shape.chart(u)

    def chart_jet(self, u):
        x, dx, ddx = self.shape.jet(np.atleast_2d(u))
        return self.scale * x, self.scale * dx, self.scale * ddx

    def with_center(self, p0) -> "SampledHypersurface":
        """Copy with radial data ``r``, ``Z`` and ``Z_tan`` about ``p0``."""
        p0 = self.space.check_points(np.asarray(p0, dtype=float), tol=1e-9)
        r, _, Z = position_field(self.space, p0, self.x)
        Zn = np.einsum("ni,ni->n", Z, self.normal)
        Z_tan = Z - Zn[:, None] * self.normal
        return replace(self, center=p0, r=r, Z=Z, Z_tan=Z_tan)

    def scaled(self, factor: float) -> "SampledHypersurface":
        """Homothety by ``factor`` (curvature scales by ``1/factor``)."""
        f = float(factor)
        out = replace(
            self,
            space=self.space.scaled(f),
            x=self.x * f,
            dx=self.dx * f,
            ddx=self.ddx * f,
            metric=self.metric * f**2,
            weights=self.weights * f**self.n,
            scale=self.scale * f,
            center=None,
            r=None,
            Z=None,
            Z_tan=None,
        )
        if self.center is not None:
            out = out.with_center(self.center * f)
        return out


def _normals(dx, x, spherical):
    rows = dx
    if spherical:
        rows = np.concatenate([dx, x[:, None, :]], axis=1)
    _, _, vh = np.linalg.svd(rows)
    return vh[:, -1, :]


def sample_jet(shape: ParametricShape, params, jet, rule_weights, grid_shape, grid=None):
    """Build a :class:`SampledHypersurface` from a precomputed jet."""
    x, dx, ddx = jet
    space = shape.space
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(dx)) and np.all(np.isfinite(ddx))):
        bad = int(np.argmax(~np.isfinite(dx).reshape(len(x), -1).all(axis=1)))
        raise ImmersionError(f"non-finite chart derivative at sample {bad}", params[bad])
    g = np.einsum("nai,nbi->nab", dx, dx)
    lam = np.linalg.eigvalsh(g)[:, 0]
    if np.any(lam <= IMMERSION_TOL):
        bad = int(np.argmin(lam))
        raise ImmersionError(
            f"singular first fundamental form (min eigenvalue {lam[bad]:.3e}) at parameters {params[bad].tolist()}",
            params[bad],
        )
    nu = _normals(dx, x, space.spherical)
    sign = np.sign(np.einsum("ni,ni->n", nu, x - shape.center))
    sign[sign == 0] = 1.0
    nu = nu * sign[:, None]
    sqrt_det = np.sqrt(np.linalg.det(g))
    return SampledHypersurface(
        space=space,
        params=params,
        x=x,
        dx=dx,
        ddx=ddx,
        metric=g,
        normal=nu,
        weights=rule_weights * sqrt_det,
        grid_shape=grid_shape,
        shape=shape,
        grid=grid,
    )


def sample_shape(shape: ParametricShape, grid: GridSpec = GridSpec()) -> SampledHypersurface:
    """Sample ``shape`` on the tensor grid ``grid``."""
    params, rule, grid_shape = parameter_grid(shape.n, grid)
    return sample_jet(shape, params, shape.jet(params), rule, grid_shape, grid)


def ingest_point_cloud(path, delta: float = 0.0, dim: Optional[int] = None, tol: float = 1e-6) -> np.ndarray:
    """Read a comma-separated point list.

    Lines starting with ``#`` are skipped.  All rows must have the same
    number of fields (``dim`` if given).  For ``delta > 0`` each row must
    satisfy ``|x| = 1/sqrt(delta)`` to within ``tol`` relative and is then
    renormalized exactly.
    """
    path = Path(path)
    rows, linenos = [], []
    with path.open(newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or not "".join(rec).strip():
                continue
            if rec[0].lstrip().startswith("#"):
                continue
            if dim is None:
                dim = len(rec)
            if len(rec) != dim:
                raise ParseError(f"expected {dim} fields, got {len(rec)}", lineno)
            try:
                rows.append([float(v) for v in rec])
                linenos.append(lineno)
            except ValueError:
                raise ParseError(f"non-numeric field in {rec!r}", lineno) from None
            if not all(math.isfinite(v) for v in rows[-1]):
                raise ParseError("non-finite coordinate", lineno)
    if not rows:
        raise ParseError(f"{path}: no points")
    pts = np.array(rows)
    if delta > 0:
        target = 1.0 / math.sqrt(delta)
        norms = np.linalg.norm(pts, axis=1)
        bad = np.flatnonzero(np.abs(norms / target - 1.0) > tol)
        if bad.size:
            raise ParseError(f"point not on the sphere of radius {target:g}", linenos[int(bad[0])])
        pts = pts * (target / norms)[:, None]
    return pts
