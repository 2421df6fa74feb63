"""Integral curvature bounds on the extrinsic radius and pinching diagnostics.

All integrals are weighted sums over quadrature samples.  Tolerances
below are absolute unless stated otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma
from scipy.stats import norm, qmc

from .curvature import (
    CurvatureData,
    compute_curvature,
    maclaurin_slack,
    positivity_report,
    scalar_curvature,
)
from .enclosing import Ball, extrinsic_radius
from .errors import ClassViolation, DegenerateError, DomainError, HemisphereError
from .shapes import SampledHypersurface, _orthonormal_complement
from .spaceform import SpaceForm, geodesic_distance, radial_project, radial_project_differential

MINKOWSKI_TOL = 1e-8
DEFICIT_TOL = 1e-6
TOTAL_CURVATURE_TOL = 1e-5
DISTORTION_SLACK = 1e-9
MACLAURIN_TOL = 1e-10
PROJECTION_TOL = 1e-9
COVERING_POINTS = 4096


@dataclass(frozen=True)
class AnalysisConfig:
    """Curvature order ``k``, norm exponent ``p`` and predicate thresholds.

    ``epsilon=None`` means five times the grid spacing.
    """

    k: int = 2
    p: float = 1.0
    normalize: bool = True
    epsilon: Optional[float] = None
    theta: float = 0.5

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k}")
        if not self.p >= 1 or not math.isfinite(self.p):
            raise DomainError(f"p must be a finite real >= 1, got {self.p}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if not 0 < self.theta < 1:
            raise DomainError("theta must lie in (0, 1)")

    def validate_for(self, n: int):
        if self.k > n:
            raise DomainError(f"k = {self.k} exceeds the dimension n = {n}")


def lp_norm(f, p: float, weights) -> float:
    """``(sum w |f|^p)^(1/p)``; ``p = inf`` gives the max of ``|f|``."""
    f = np.abs(np.asarray(f, dtype=float))
    if p == math.inf:
        return float(np.max(f))
    if p < 1:
        raise DomainError("p must be >= 1")
    return float(np.sum(weights * f**p) ** (1.0 / p))


def volume(surface: SampledHypersurface) -> float:
    return surface.volume


def integrate(surface: SampledHypersurface, f) -> float:
    return float(np.sum(surface.weights * f))


def normalize_to_unit_volume(surface: SampledHypersurface, ball: Optional[Ball] = None):
    """Rescale to volume 1: lengths by ``V^{-1/n}``, ``delta`` by ``V^{2/n}``.

    Returns ``(surface', ball', factor)``; ``ball'`` is ``None`` if no ball
    was given.
    """
    V = surface.volume
    if not V > 0:
        raise DomainError("volume must be positive")
    factor = V ** (-1.0 / surface.n)
    if factor == 1.0:
        return surface, ball, 1.0
    out = surface.scaled(factor)
    return out, (ball.scaled(factor) if ball is not None else None), factor


def _require_class(curv: CurvatureData, k: int):
    rep = positivity_report(curv, k)
    if not rep["class_member"]:
        raise ClassViolation(f"H_{k} is not positive (min {rep['min_H'][k]:.3e})")
    return rep


def _require_hemisphere(space: SpaceForm, R: float):
    if space.spherical and not R < space.hemisphere_radius:
        raise HemisphereError(f"extrinsic radius {R:g} violates the open-hemisphere condition")


def minkowski_gaps(surface: SampledHypersurface, curv: CurvatureData, k: int) -> np.ndarray:
    """``G_j = int H_j s(r) - int H_{j-1} c(r)`` for ``j = 1..k`` (non-negative)."""
    _require_class(curv, k)
    s, c = surface.space.s(surface.r), surface.space.c(surface.r)
    return np.array(
        [integrate(surface, curv.H[:, j] * s) - integrate(surface, curv.H[:, j - 1] * c) for j in range(1, k + 1)]
    )


def minkowski_residuals(surface: SampledHypersurface, curv: CurvatureData, k: int) -> np.ndarray:
    """``int H_j <Z, nu> - int H_{j-1} c(r)`` for ``j = 1..k``.

    These vanish identically (Hsiung-Minkowski formulas for the Newton
    tensors), so they measure quadrature and curvature error.
    """
    zn = surface.support_normal
    c = surface.space.c(surface.r)
    return np.array(
        [integrate(surface, curv.H[:, j] * zn) - integrate(surface, curv.H[:, j - 1] * c) for j in range(1, k + 1)]
    )


@dataclass
class RadiusBounds:
    deficit_p: float
    deficit_inf: float
    deficit_mean: float
    deficits_by_p: dict
    scal_deficit: Optional[float]
    Hk_norm_p: float
    Hk_norm_inf: float
    H_inf: float


def radius_bound_report(surface, curv, ball, cfg: AnalysisConfig, p_values=(1.0, 2.0, 4.0)) -> RadiusBounds:
    """Deficits of the lower bounds on ``t(R)^k`` (non-negative on the class).

    ``deficit_p = t(R)^k - V^{1/p} / ||H_k||_p``, ``deficit_inf`` uses the
    sup norm and ``deficit_mean = t(R) - 1/||H||_inf``.  For ``k = 2`` the
    scalar-curvature form ``t(R)^2 - n(n-1) V / ||Scal - n(n-1) delta||_1``
    is added.
    """
    space = surface.space
    R = ball.radius
    _require_hemisphere(space, R)
    k, n = cfg.k, surface.n
    _require_class(curv, k)
    V = surface.volume
    w = surface.weights
    tR = float(space.t(R))
    Hk = curv.H[:, k]

    def deficit(p):
        return tR**k - V ** (1.0 / p) / lp_norm(Hk, p, w)

    by_p = {}
    for p in sorted(set(p_values) | {float(cfg.p)}):
        by_p[repr(float(p))] = deficit(p)
    scal_def = None
    if k == 2:
        scal = scalar_curvature(space, curv.H[:, 2], n)
        scal_def = tR**2 - n * (n - 1) * V / lp_norm(scal - n * (n - 1) * space.delta, 1, w)
    Hk_inf = lp_norm(Hk, math.inf, w)
    return RadiusBounds(
        deficit_p=deficit(cfg.p),
        deficit_inf=tR**k - 1.0 / Hk_inf,
        deficit_mean=tR - 1.0 / curv.H_inf,
        deficits_by_p=by_p,
        scal_deficit=scal_def,
        Hk_norm_p=lp_norm(Hk, cfg.p, w),
        Hk_norm_inf=Hk_inf,
        H_inf=curv.H_inf,
    )


@dataclass
class Pinching:
    C: float
    Hk_norm_2p: float
    phi_sq: float
    psi_sq: float
    phi_inf: float
    psi_inf: float
    A1: Optional[float]
    A2: Optional[float]
    bounds_applicable: bool
    bounds_reason: str
    phi_bound_ok: Optional[bool]
    psi_bound_ok: Optional[bool]


def pinching_fields(surface: SampledHypersurface, R: float):
    """``phi = s(R)^2 - s(r)^2`` and ``psi = c(r) |Z_tan|`` per sample."""
    space = surface.space
    r = surface.r
    phi = float(space.s(R)) ** 2 - space.s(r) ** 2
    psi = space.c(r) * np.linalg.norm(surface.Z_tan, axis=1)
    return phi, psi


def l2_constants(space: SpaceForm, k: int, Hk_norm_2p: float, H_inf: float):
    """Explicit constants ``(A1, A2)`` bounding ``||phi||_2^2`` and ``||psi||_2^2`` by ``A C``."""
    A2 = H_inf ** (2 * k - 2) + 2 * H_inf ** (k - 2)
    if space.spherical:
        A1 = A2 / space.delta
    else:
        A1 = Hk_norm_2p ** ((2 * k - 4) / k) + 2 * Hk_norm_2p ** ((k - 4) / k)
    return A1, A2


def pinching_quantities(surface, curv, ball, cfg: AnalysisConfig, check_bounds: bool = True) -> Pinching:
    """Pinching deficit ``C`` and the L2 size of ``phi`` and ``psi``.

    ``C = t(R)^k - 1/||H_k||_{2p}``.  The bounds ``||phi||^2 <= A1 C`` and
    ``||psi||^2 <= A2 C`` are evaluated when ``0 < C < 1``, the volume is 1
    and ``k >= 2``; otherwise they are marked not applicable.
    """
    space = surface.space
    k = cfg.k
    R = ball.radius
    _require_hemisphere(space, R)
    _require_class(curv, k)
    if check_bounds and k < 2:
        raise DomainError("the explicit L2 constants are derived for k >= 2 only")
    w = surface.weights
    Hk_2p = lp_norm(curv.H[:, k], 2 * cfg.p, w)
    C = float(space.t(R)) ** k - 1.0 / Hk_2p
    phi, psi = pinching_fields(surface, R)
    phi_sq = lp_norm(phi, 2, w) ** 2
    psi_sq = lp_norm(psi, 2, w) ** 2
    A1 = A2 = None
    phi_ok = psi_ok = None
    reason = ""
    if k < 2:
        reason = "constants derived for k >= 2"
    elif abs(surface.volume - 1.0) > 1e-8:
        reason = "volume not normalized to 1"
        A1, A2 = l2_constants(space, k, Hk_2p, curv.H_inf)
    else:
        A1, A2 = l2_constants(space, k, Hk_2p, curv.H_inf)
        if not 0 < C < 1:
            reason = "pinching deficit outside (0, 1)"
        else:
            phi_ok = bool(phi_sq <= A1 * C)
            psi_ok = bool(psi_sq <= A2 * C)
    return Pinching(
        C=C,
        Hk_norm_2p=Hk_2p,
        phi_sq=phi_sq,
        psi_sq=psi_sq,
        phi_inf=float(np.max(np.abs(phi))),
        psi_inf=float(np.max(psi)),
        A1=A1,
        A2=A2,
        bounds_applicable=phi_ok is not None,
        bounds_reason=reason,
        phi_bound_ok=phi_ok,
        psi_bound_ok=psi_ok,
    )


def sphere_lattice(n: int, count: int) -> np.ndarray:
    """Deterministic quasi-uniform unit vectors in R^{n+1}.

    Fibonacci lattice for n = 2, fixed-seed scrambled Sobol points pushed
    through the Gaussian quantile function otherwise.
    """
    if n == 2:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        phi = math.pi * (3 - math.sqrt(5)) * i
        rho = np.sqrt(1 - z**2)
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    m = max(int(math.ceil(math.log2(count + 1))), 1)
    pts = qmc.Sobol(n + 1, scramble=True, seed=0).random_base2(m)[:count]
    g = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def geodesic_sphere_points(space: SpaceForm, p0, R: float, count: int = COVERING_POINTS) -> np.ndarray:
    """Quasi-uniform points on ``S(p0, R)`` (exponential map of a unit lattice)."""
    dirs = sphere_lattice(space.n, count)
    p0 = np.asarray(p0, dtype=float)
    if not space.spherical:
        return p0 + R * dirs
    a = space.sqrt_delta
    q = a * p0
    E = _orthonormal_complement(q)
    y = math.cos(a * R) * q + math.sin(a * R) * (dirs @ E.T)
    return y / a


def _chord_to_geodesic(space, chord):
    if not space.spherical:
        return chord
    a = space.sqrt_delta
    return 2.0 / a * np.arcsin(np.clip(a * chord / 2.0, 0.0, 1.0))


@dataclass
class Proximity:
    epsilon: float
    annulus_margin: float
    annulus_ok: bool
    covering_radius: float
    covering_ok: bool
    hausdorff: float
    hausdorff_bracket: tuple
    grid_spacing: float
    test_points: int


def proximity_predicates(surface, ball, epsilon: float, count: int = COVERING_POINTS) -> Proximity:
    """Annulus and covering conclusions at scale ``epsilon`` plus a Hausdorff estimate.

    ``annulus_ok``: every sample has ``r >= R - epsilon``.  ``covering_ok``:
    every test point of ``S(p0, R)`` is within ``epsilon`` of a sample.
    The Hausdorff estimate is bracketed by the grid spacing.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    space = surface.space
    R = ball.radius
    margin = float(R - np.min(surface.r))
    test = geodesic_sphere_points(space, ball.center, R, count)
    chord, _ = cKDTree(surface.x).query(test)
    cover = float(np.max(_chord_to_geodesic(space, chord)))
    h = surface.spacing
    est = max(margin, cover)
    return Proximity(
        epsilon=float(epsilon),
        annulus_margin=margin,
        annulus_ok=bool(margin <= epsilon),
        covering_radius=cover,
        covering_ok=bool(cover <= epsilon),
        hausdorff=est,
        hausdorff_bracket=(max(margin, cover - h), est + h),
        grid_spacing=h,
        test_points=len(test),
    )


@dataclass
class QuasiIsometryReport:
    """Distortion of the radial projection onto ``S(p0, R)``.

    Per-sample arrays: ``F``, ``stretch`` (eigenvalues of the pulled-back
    metric in an orthonormal frame, i.e. the extreme ``|dF(u)|^2``),
    ``distortion = max |stretch - 1|`` and ``bound`` (the pointwise
    majorant from ``r``, ``R`` and ``||psi||_inf``).
    """

    F: np.ndarray
    stretch: np.ndarray
    distortion: np.ndarray
    bound: np.ndarray
    psi_inf: float
    max_distortion: float
    max_bound: float
    max_excess: float
    violations: int
    projection_error: float
    theta: Optional[float] = None
    within_theta: Optional[bool] = None

    def summary(self) -> dict:
        return {
            "max_distortion": self.max_distortion,
            "max_bound": self.max_bound,
            "max_excess": self.max_excess,
            "violations": self.violations,
            "psi_inf": self.psi_inf,
            "projection_error": self.projection_error,
            "theta": self.theta,
            "within_theta": self.within_theta,
        }


def _inv_sqrt(g):
    lam, V = np.linalg.eigh(g)
    return (V / np.sqrt(lam)[:, None, :]) @ np.swapaxes(V, -1, -2)


def quasi_isometry_report(surface, ball, theta: Optional[float] = None) -> QuasiIsometryReport:
    space = surface.space
    R = ball.radius
    _require_hemisphere(space, R)
    r = surface.r
    if np.min(r) <= 1e-6:
        raise DegenerateError("surface passes through the ball center; projection undefined")
    p0 = ball.center
    F = radial_project(space, p0, R, surface.x)
    DF = radial_project_differential(space, p0, R, surface.x)
    dF = np.einsum("nij,naj->nai", DF, surface.dx)
    GF = np.einsum("nai,nbi->nab", dF, dF)
    gi = _inv_sqrt(surface.metric)
    M = gi @ GF @ gi
    stretch = np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, 1, 2)))
    distortion = np.max(np.abs(stretch - 1.0), axis=1)
    _, psi = pinching_fields(surface, R)
    psi_inf = float(np.max(psi))
    sR2 = float(space.s(R)) ** 2
    sr = space.s(r)
    bound = np.abs(sR2 - sr**2) / sr**2 + sR2 / (space.c(r) * sr**3) * psi_inf
    excess = distortion - bound
    proj_err = float(np.max(np.abs(geodesic_distance(space, p0, F) - R)))
    maxd = float(np.max(distortion))
    return QuasiIsometryReport(
        F=F,
        stretch=stretch,
        distortion=distortion,
        bound=bound,
        psi_inf=psi_inf,
        max_distortion=maxd,
        max_bound=float(np.max(bound)),
        max_excess=float(np.max(excess)),
        violations=int(np.sum(excess > DISTORTION_SLACK)),
        projection_error=proj_err,
        theta=theta,
        within_theta=None if theta is None else bool(maxd <= theta),
    )


def sphere_volume(n: int) -> float:
    """Volume of the unit n-sphere, 2 pi^{(n+1)/2} / Gamma((n+1)/2)."""
    return float(2 * math.pi ** ((n + 1) / 2) / gamma((n + 1) / 2))


@dataclass
class TotalCurvature:
    integral: float
    omega_n: float
    margin: float


def total_curvature_check(surface, curv, k: int) -> TotalCurvature:
    """``int H_k^{n/k} - omega_n`` (non-negative for closed hypersurfaces of R^{n+1})."""
    if surface.space.spherical:
        raise DomainError("total curvature bound is stated for Euclidean hypersurfaces only")
    _require_class(curv, k)
    n = surface.n
    val = integrate(surface, curv.H[:, k] ** (n / k))
    om = sphere_volume(n)
    return TotalCurvature(integral=val, omega_n=om, margin=val - om)


@dataclass
class Check:
    name: str
    value: Optional[float]
    threshold: Optional[float]
    passed: Optional[bool]


@dataclass
class PinchingReport:
    """Everything computed for one hypersurface."""

    shape: dict
    n: int
    k: int
    p: float
    delta: float
    normalized: bool
    scale_factor: float
    volume_original: float
    volume: float
    radius: float
    center: list
    contacts: int
    grid: dict
    min_H: list
    maclaurin_slack: float
    minkowski_gaps: list
    minkowski_residuals: list
    bounds: RadiusBounds
    pinching: Pinching
    proximity: Proximity
    quasi_isometry: dict
    total_curvature: Optional[TotalCurvature]
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def failed_checks(self) -> list:
        return [c.name for c in self.checks if c.passed is False]

    def to_dict(self) -> dict:
        return _jsonable(self)


def _jsonable(obj):
    if is_dataclass(obj):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def analyze(surface: SampledHypersurface, cfg: AnalysisConfig = AnalysisConfig(), seed: int = 0) -> PinchingReport:
    """Run the whole pipeline on a sampled hypersurface.

    Raises :class:`ClassViolation` if ``H_k`` is not positive and
    :class:`HemisphereError` if a spherical surface leaves the open
    hemisphere.
    """
    n = surface.n
    cfg.validate_for(n)
    k = cfg.k
    ball, surf = extrinsic_radius(surface, seed=seed)
    V0 = surf.volume
    factor = 1.0
    if cfg.normalize:
        surf, ball, factor = normalize_to_unit_volume(surf, ball)
    space = surf.space
    _require_hemisphere(space, ball.radius)
    curv = compute_curvature(surf)
    pos = positivity_report(curv, k)
    if not pos["class_member"]:
        raise ClassViolation(f"H_{k} is not positive (min {pos['min_H'][k]:.3e}); shape outside the admissible class")

    checks = []
    slack = maclaurin_slack(curv, k)
    checks.append(Check("maclaurin_chain", slack, -MACLAURIN_TOL, bool(slack >= -MACLAURIN_TOL)))
    checks.append(Check("positivity_implication", None, None, pos["implication_ok"]))

    gaps = minkowski_gaps(surf, curv, k)
    V = surf.volume
    checks.append(Check("minkowski_gaps", float(gaps.min()), -MINKOWSKI_TOL * V, bool(gaps.min() >= -MINKOWSKI_TOL * V)))
    resid = minkowski_residuals(surf, curv, k)

    bounds = radius_bound_report(surf, curv, ball, cfg)
    for name, val in (
        ("deficit_p", bounds.deficit_p),
        ("deficit_inf", bounds.deficit_inf),
        ("deficit_mean", bounds.deficit_mean),
        ("scal_deficit", bounds.scal_deficit),
    ):
        if val is not None:
            checks.append(Check(name, val, -DEFICIT_TOL, bool(val >= -DEFICIT_TOL)))
    for p, val in bounds.deficits_by_p.items():
        checks.append(Check(f"deficit_p={p}", val, -DEFICIT_TOL, bool(val >= -DEFICIT_TOL)))

    pin = pinching_quantities(surf, curv, ball, cfg, check_bounds=k >= 2)
    if pin.bounds_applicable:
        checks.append(Check("phi_l2_bound", pin.phi_sq - pin.A1 * pin.C, 0.0, pin.phi_bound_ok))
        checks.append(Check("psi_l2_bound", pin.psi_sq - pin.A2 * pin.C, 0.0, pin.psi_bound_ok))

    eps = cfg.epsilon if cfg.epsilon is not None else 5.0 * surf.spacing
    prox = proximity_predicates(surf, ball, eps)

    qi = quasi_isometry_report(surf, ball, cfg.theta)
    checks.append(Check("distortion_bound", qi.max_excess, DISTORTION_SLACK, qi.violations == 0))
    checks.append(Check("projection_on_sphere", qi.projection_error, PROJECTION_TOL, qi.projection_error <= PROJECTION_TOL))

    tc = None
    if not space.spherical:
        tc = total_curvature_check(surf, curv, k)
        checks.append(Check("total_curvature", tc.margin, -TOTAL_CURVATURE_TOL, bool(tc.margin >= -TOTAL_CURVATURE_TOL)))

    grid = {}
    if surf.grid is not None:
        grid = {"nodes": surf.grid.nodes, "level": surf.grid.level, "rule": surf.grid.rule,
                "polar_nodes": surf.grid.polar_nodes, "azimuth_nodes": surf.grid.azimuth_nodes}
    grid["samples"] = surf.size
    return PinchingReport(
        shape=surface.shape.descriptor() if surface.shape is not None else {"name": "samples"},
        n=n,
        k=k,
        p=float(cfg.p),
        delta=space.delta,
        normalized=cfg.normalize,
        scale_factor=factor,
        volume_original=V0,
        volume=V,
        radius=ball.radius,
        center=ball.center.tolist(),
        contacts=len(ball.contacts),
        grid=grid,
        min_H=[pos["min_H"][j] for j in range(1, k + 1)],
        maclaurin_slack=slack,
        minkowski_gaps=gaps.tolist(),
        minkowski_residuals=resid.tolist(),
        bounds=bounds,
        pinching=pin,
        proximity=prox,
        quasi_isometry=qi.summary(),
        total_curvature=tc,
        checks=checks,
    )
