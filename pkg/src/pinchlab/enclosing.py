"""Extrinsic radius: smallest enclosing balls in R^d and in open hemispheres.

Euclidean balls use Welzl's move-to-front recursion (depth bounded by the
support size d+1) driven by a pivoting loop that feeds the farthest
outside point into the active list.  Spherical balls reduce to the
minimum-norm point of the convex hull of the unit vectors, found with
Wolfe's active-set method.

For sampled hypersurfaces the discrete ball is refined against the
continuous chart: distance maxima are polished with a trust-region Newton
solve and added as extra points until the ball stops growing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, HemisphereError, SolverError
from .shapes import SampledHypersurface
from .spaceform import SpaceForm, geodesic_distance

log = logging.getLogger(__name__)

MAX_DIM = 8
RANK_TOL = 1e-12
WOLFE_TOL = 1e-11
HEMISPHERE_TOL = 1e-9
REFINE_STARTS = 16
REFINE_ROUNDS = 10


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed geodesic ball ``B(center, radius)`` enclosing a point set."""

    center: np.ndarray
    radius: float
    support: tuple = ()
    support_points: Optional[np.ndarray] = None
    iterations: int = 0
    residual: float = 0.0
    contacts: tuple = ()
    stats: dict = field(default_factory=dict)

    def scaled(self, factor: float) -> "Ball":
        sp = None if self.support_points is None else self.support_points * factor
        return replace(self, center=self.center * factor, radius=self.radius * factor, support_points=sp)


def circumball(points):
    """Center and squared radius of the smallest sphere through ``points``.

    The center lies in the affine hull of the points; affinely dependent
    inputs are handled by a rank-revealing least-squares solve.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    q0 = points[0]
    if len(points) == 1:
        return q0.copy(), 0.0
    A = points[1:] - q0
    M = 2.0 * A @ A.T
    rhs = np.einsum("ij,ij->i", A, A)
    lam, *_ = np.linalg.lstsq(M, rhs, rcond=RANK_TOL)
    c = q0 + lam @ A
    r2 = float(np.max(np.einsum("ij,ij->i", points - c, points - c)))
    return c, r2


class _Welzl:
    """Move-to-front Welzl recursion on a list of point indices."""

    def __init__(self, P, tol):
        self.P = P
        self.d = P.shape[1]
        self.tol = tol
        self.center = None
        self.r2 = -1.0
        self.support = []
        self.calls = 0

    def outside(self, i):
        if self.center is None:
            return True
        v = self.P[i] - self.center
        return math.sqrt(float(v @ v)) > math.sqrt(max(self.r2, 0.0)) + self.tol

    def run(self, L, end, boundary):
        self.calls += 1
        if boundary:
            self.center, self.r2 = circumball(self.P[boundary])
        else:
            self.center, self.r2 = None, -1.0
        self.support = list(boundary)
        if len(boundary) == self.d + 1:
            return
        i = 0
        while i < end:
            k = L[i]
            if self.outside(k):
                boundary.append(k)
                self.run(L, i, boundary)
                boundary.pop()
                del L[i]
                L.insert(0, k)
            i += 1


def euclidean_miniball(points, seed: int = 0) -> Ball:
    """Smallest enclosing ball of a point set in R^d (d <= 8)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0 or P.shape[0] < 1:
        raise DomainError("need at least one point")
    d = P.shape[1]
    if d > MAX_DIM:
        raise DomainError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(P)):
        raise DomainError("non-finite coordinates")
    scale = max(float(np.max(np.ptp(P, axis=0))), 1.0)
    tol = 1e-12 * scale
    rng = np.random.default_rng(seed)
    first = int(rng.integers(len(P)))
    L = [first]
    solver = _Welzl(P, tol)
    rounds = 0
    while True:
        rounds += 1
        solver.run(L, len(L), [])
        dist = np.linalg.norm(P - solver.center, axis=1)
        R = math.sqrt(max(solver.r2, 0.0))
        k = int(np.argmax(dist))
        if dist[k] <= R + tol:
            break
        if k in L:
            log.debug("pivot %d already active; stopping with excess %.3e", k, dist[k] - R)
            break
        L.insert(0, k)
        if rounds > 10 * len(P) + 100:
            raise SolverError("pivoting did not terminate")
    center = solver.center
    dist = np.linalg.norm(P - center, axis=1)
    R = float(np.max(dist))
    support = tuple(sorted(solver.support))
    return Ball(
        center=center,
        radius=R,
        support=support,
        support_points=P[list(support)],
        iterations=rounds,
        residual=float(R - math.sqrt(max(solver.r2, 0.0))),
        stats={"welzl_calls": solver.calls},
    )


def min_norm_point(P, tol: float = WOLFE_TOL, max_iter: int = 10000):
    """Minimum-norm point of the convex hull of the rows of ``P`` (Wolfe).

    Returns ``(x, weights, active, gap, iterations)`` where ``x`` is the
    hull point, ``weights`` the convex weights on the ``active`` rows and
    ``gap = |x|^2 - min_i <x, p_i>`` the duality gap at termination.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    j = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    S = [j]
    lam = np.array([1.0])
    x = P[j].copy()
    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        dots = P @ x
        j = int(np.argmin(dots))
        xx = float(x @ x)
        gap = xx - float(dots[j])
        if gap <= tol or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            alpha = _affine_min(P[S])
            if np.all(alpha > 1e-15):
                lam = alpha
                break
            neg = alpha <= 1e-15
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, lam / (lam - alpha), np.inf)
            theta = float(np.clip(np.min(ratios), 0.0, 1.0))
            lam = lam + theta * (alpha - lam)
            keep = lam > 1e-15
            keep[np.argmin(np.where(neg, ratios, np.inf))] = False
            if not np.any(keep):
                keep[int(np.argmax(lam))] = True
            S = [s for s, k in zip(S, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ P[S]
    else:
        raise SolverError(f"minimum-norm point did not converge (gap {gap:.3e})")
    return x, lam, S, gap, it


def _affine_min(Q):
    """Weights of the minimum-norm point of the affine hull of the rows of ``Q``."""
    m = len(Q)
    if m == 1:
        return np.ones(1)
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = Q @ Q.T
    K[:m, m] = 1.0
    K[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=RANK_TOL)
    return sol[:m]


def spherical_miniball(points, delta: float = 1.0) -> Ball:
    """Smallest enclosing geodesic ball of points on S(delta) in an open hemisphere.

    ``max_{|c|=1} min_i <x_i, c>`` equals the distance from the origin to
    the convex hull of the unit vectors ``x_i``; the optimal center is the
    normalized minimum-norm hull point.
    """
    if delta <= 0:
        raise DomainError("spherical miniball needs delta > 0")
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        raise DomainError("need at least one point")
    a = math.sqrt(delta)
    U = a * P
    x, lam, S, gap, it = min_norm_point(U)
    dstar = float(np.linalg.norm(x))
    if dstar <= HEMISPHERE_TOL:
        raise HemisphereError("points are not hemisphere-contained")
    c = x / dstar
    space = SpaceForm(delta, P.shape[1] - 1)
    center = c / a
    R = float(np.max(geodesic_distance(space, center, P)))
    if R >= space.hemisphere_radius:
        raise HemisphereError("points are not hemisphere-contained")
    support = tuple(sorted(S))
    return Ball(
        center=center,
        radius=R,
        support=support,
        support_points=P[list(support)],
        iterations=it,
        residual=gap,
        stats={"min_norm": dstar, "weights": [float(v) for v in lam]},
    )


def miniball(space: SpaceForm, points, seed: int = 0) -> Ball:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if space.spherical:
        return spherical_miniball(points, space.delta)
    return euclidean_miniball(points, seed=seed)


def _grid_local_maxima(values, grid_shape):
    v = values.reshape(grid_shape)
    mask = np.ones(v.shape, dtype=bool)
    last = v.ndim - 1
    for ax in range(v.ndim):
        for shift in (1, -1):
            if ax == last:
                nb = np.roll(v, shift, axis=ax)
            else:
                pad = [(0, 0)] * v.ndim
                pad[ax] = (1, 1)
                vp = np.pad(v, pad, constant_values=-np.inf)
                sl = [slice(None)] * v.ndim
                sl[ax] = slice(1 - shift, v.shape[ax] + 1 - shift)
                nb = vp[tuple(sl)]
            mask &= v >= nb
    return np.flatnonzero(mask.ravel())


def _polish_maximum(surface: SampledHypersurface, center, u0):
    """Locally maximize the distance from ``center`` over the chart, from ``u0``."""
    space = surface.space

    def f(u):
        x, dx, ddx = surface.chart_jet(u)
        x, dx, ddx = x[0], dx[0], ddx[0]
        if space.spherical:
            val = float(x @ center)
            grad = dx @ center
            hess = ddx @ center
        else:
            v = x - center
            val = -0.5 * float(v @ v)
            grad = -(dx @ v)
            hess = -(dx @ dx.T + ddx @ v)
        return val, grad, hess

    res = minimize(
        lambda u: f(u)[0],
        u0,
        jac=lambda u: f(u)[1],
        hess=lambda u: f(u)[2],
        method="trust-exact",
        options={"gtol": 1e-13, "maxiter": 200},
    )
    return res.x


def extrinsic_radius(surface: SampledHypersurface, refine: bool = True, seed: int = 0):
    """Extrinsic radius and center of a sampled hypersurface.

    Returns ``(ball, surface_with_center)``; the second value carries the
    radial data ``r, Z, Z_tan`` about the ball center.  With ``refine`` and
    a chart attached, distance maxima between grid nodes are located on the
    continuous surface so the radius is not limited by grid resolution.
    """
    space = surface.space
    pts = surface.x
    ball = miniball(space, pts, seed=seed)
    extra = np.empty((0, surface.n))
    rounds = 0
    if refine and surface.shape is not None:
        scale = max(ball.radius, 1.0)
        for rounds in range(1, REFINE_ROUNDS + 1):
            d = geodesic_distance(space, ball.center, surface.x)
            if np.ptp(d) <= 1e-13 * scale:
                break
            idx = _grid_local_maxima(d, surface.grid_shape)
            idx = idx[np.argsort(-d[idx], kind="stable")[:REFINE_STARTS]]
            starts = np.concatenate([surface.params[idx], extra])
            polished = np.array([_polish_maximum(surface, ball.center, u) for u in starts])
            new_pts = surface.chart_points(polished)
            dn = geodesic_distance(space, ball.center, new_pts)
            extra = polished
            if np.max(dn) <= ball.radius + 1e-12 * scale:
                break
            pts = np.concatenate([surface.x, new_pts])
            ball = miniball(space, pts, seed=seed)
        else:
            log.warning("radius refinement stopped after %d rounds", REFINE_ROUNDS)
    if space.spherical and ball.radius >= space.hemisphere_radius:
        raise HemisphereError("surface not contained in an open hemisphere")
    surf = surface.with_center(ball.center)
    contact_tol = surface.spacing**2 / max(ball.radius, 1e-300)
    contacts = tuple(int(i) for i in np.flatnonzero(surf.r > ball.radius - contact_tol))
    stats = dict(ball.stats)
    stats.update(refine_rounds=rounds, refined_points=int(len(extra)))
    return replace(ball, contacts=contacts, stats=stats), surf
