"""Acceptance criteria.

Run ``pytest -s tests/test_acceptance.py`` or ``python tests/test_acceptance.py``
to see one PASS/FAIL line per criterion.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pinchlab import AnalysisConfig, GridSpec, analyze, make_shape, sample_shape  # noqa: E402
from pinchlab.analysis import (  # noqa: E402
    lp_norm,
    minkowski_gaps,
    normalize_to_unit_volume,
    pinching_quantities,
    quasi_isometry_report,
    total_curvature_check,
)
from pinchlab.cli import main  # noqa: E402
from pinchlab.shapes import CATALOG  # noqa: E402
from pinchlab.curvature import compute_curvature, newton_traces  # noqa: E402
from pinchlab.enclosing import euclidean_miniball, extrinsic_radius, spherical_miniball  # noqa: E402

from conftest import CATALOG_CASES, CATALOG_CASES_3D  # noqa: E402
from test_enclosing import brute_force_radius, cap_points, grid_search_radius  # noqa: E402

# pinned tolerances
EQUALITY_TOL = 1e-6
STRICT_DEFICIT = 1e-3
REFINE_REL_TOL = 1e-4
TRACE_TOL = 1e-8
MINKOWSKI_REL_TOL = 1e-8
MINKOWSKI_EQ_TOL = 1e-6
MACLAURIN_TOL = 1e-10
EUCLID_ORACLE_TOL = 1e-9
SPHERE_ORACLE_TOL = 1e-5
DISTORTION_SLACK = 1e-9
SPHERE_DISTORTION_TOL = 1e-8
TOTAL_CURVATURE_TOL = 1e-5
TOTAL_CURVATURE_EQ_TOL = 1e-6

GRID = GridSpec(nodes=64)  # 64 x 128
AMPLITUDES = [0.2, 0.1, 0.05, 0.025]


def surface(name, grid=GRID, **params):
    ball, s = extrinsic_radius(sample_shape(make_shape(name, **params), grid))
    return s, ball, compute_curvature(s)


def in_class(curv, k):
    return bool(np.min(curv.H[:, k]) > 0)


def report(num, ok, detail):
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def criterion_1():
    """Equality cases of the radius lower bound on spheres."""
    cases = [("round_sphere", {"radius": r}) for r in (0.5, 1.0, 2.0)]
    cases += [("geodesic_sphere", {"radius": r, "delta": 1.0}) for r in (math.pi / 6, math.pi / 4, math.pi / 3)]
    worst = 0.0
    for name, params in cases:
        s, ball, c = surface(name, **params)
        tR = float(s.space.t(ball.radius))
        for k in (1, 2):
            for p in (1, 2, 4):
                d = tR**k - s.volume ** (1 / p) / lp_norm(c.H[:, k], p, s.weights)
                worst = max(worst, abs(d))
    return report(1, worst < EQUALITY_TOL, f"max |deficit| = {worst:.2e} (tol {EQUALITY_TOL:g})")


def criterion_2():
    """Strict deficit for the ellipsoid, stable under refinement."""
    cfg = AnalysisConfig(k=2, p=1)
    d0 = analyze(sample_shape(make_shape("ellipsoid", semiaxes=[2, 1, 1]), GRID), cfg).bounds.deficit_p
    d1 = analyze(sample_shape(make_shape("ellipsoid", semiaxes=[2, 1, 1]), GRID.refined()), cfg).bounds.deficit_p
    rel = abs(d1 - d0) / abs(d1)
    ok = d0 > STRICT_DEFICIT and rel < REFINE_REL_TOL
    return report(2, ok, f"deficit = {d0:.6f}, refined {d1:.6f}, rel change {rel:.1e}")


def criterion_3():
    """Trace identities of the Newton tensors at every sample."""
    worst = 0.0
    for name, params in CATALOG_CASES + CATALOG_CASES_3D:
        grid = GRID if params.get("n", 2) == 2 else GridSpec(nodes=16)
        c = compute_curvature(sample_shape(make_shape(name, **params), grid))
        n = c.n
        m = np.array([(n - k) * math.comb(n, k) for k in range(n)], dtype=float)
        # identity route against H_k and the independent recursion route
        worst = max(
            worst,
            np.max(np.abs(c.trace_T - m * c.H[:, :n])),
            np.max(np.abs(c.H_T - m * c.H[:, 1 : n + 1])),
            np.max(np.abs(c.trace_T - c.trace_T_rec)),
            np.max(np.abs(c.H_T - c.H_T_rec)),
        )
        tr = newton_traces(c.S)
        worst = max(worst, np.max(np.abs(tr["trace_rec"] - c.trace_T_rec)))
    return report(3, worst < TRACE_TOL, f"max trace error = {worst:.2e} (tol {TRACE_TOL:g})")


def criterion_4():
    """Iterated Minkowski inequalities, equality on centered spheres."""
    worst_rel = math.inf
    checked = 0
    for name, params in CATALOG_CASES:
        s, _, c = surface(name, **params)
        k = max(j for j in (1, 2) if in_class(c, j)) if in_class(c, 1) else 0
        if k == 0:
            continue
        g = minkowski_gaps(s, c, k)
        worst_rel = min(worst_rel, float(g.min() / s.volume))
        checked += 1
    eq = 0.0
    for r in (0.5, 1.0, 2.0):
        s, _, c = surface("round_sphere", radius=r, center=[0.3, -0.1, 0.2])
        eq = max(eq, float(np.max(np.abs(minkowski_gaps(s, c, 2)))))
    ok = worst_rel >= -MINKOWSKI_REL_TOL and eq < MINKOWSKI_EQ_TOL
    return report(4, ok, f"min G_j/V = {worst_rel:.2e} over {checked} shapes; sphere |G_j| = {eq:.2e}")


def criterion_5():
    """Maclaurin chain H_2^(1/2) <= H where H_2 > 0."""
    worst = math.inf
    for name, params in CATALOG_CASES + CATALOG_CASES_3D:
        grid = GRID if params.get("n", 2) == 2 else GridSpec(nodes=16)
        c = compute_curvature(sample_shape(make_shape(name, **params), grid))
        mask = c.H[:, 2] > 0
        if mask.any():
            worst = min(worst, float(np.min(c.H[mask, 1] - np.sqrt(c.H[mask, 2]))))
    return report(5, worst >= -MACLAURIN_TOL, f"min slack = {worst:.2e} (tol {-MACLAURIN_TOL:g})")


def criterion_6():
    """Enclosing-ball solvers against exhaustive and grid-search oracles."""
    rng = np.random.default_rng(6)
    e_worst = 0.0
    for trial in range(500):
        dim = 3 if trial % 2 else 4
        P = rng.normal(size=(int(rng.integers(1, 13)), dim))
        e_worst = max(e_worst, abs(euclidean_miniball(P, seed=trial).radius - brute_force_radius(P)))
    s_worst = 0.0
    for trial in range(50):
        delta = float(rng.choice([1.0, 4.0]))
        x, pole = cap_points(rng, int(rng.integers(2, 60)), rng.uniform(0.1, 1.3), delta=delta)
        s_worst = max(s_worst, abs(spherical_miniball(x, delta=delta).radius - grid_search_radius(x, pole, delta)))
    ok = e_worst < EUCLID_ORACLE_TOL and s_worst < SPHERE_ORACLE_TOL
    return report(6, ok, f"euclidean max err = {e_worst:.1e} (500 sets), spherical max err = {s_worst:.1e} (50 sets)")


def criterion_7():
    """L2 bounds on the pinching fields along the perturbed-sphere family."""
    cfg = AnalysisConfig(k=2, p=1)
    rows = []
    ok = True
    for t in AMPLITUDES:
        s, ball, _ = surface("perturbed_sphere", amplitude=t)
        s, ball, _ = normalize_to_unit_volume(s, ball)
        pin = pinching_quantities(s, compute_curvature(s), ball, cfg)
        ok &= 0 < pin.C < 1 and pin.phi_sq <= pin.A1 * pin.C and pin.psi_sq <= pin.A2 * pin.C
        rows.append((pin.C, pin.phi_sq, pin.psi_sq))
    for col in zip(*rows):
        ok &= all(a > b for a, b in zip(col, col[1:]))
    C = ", ".join(f"{r[0]:.4f}" for r in rows)
    return report(7, bool(ok), f"C = [{C}]; bounds hold and all three decrease")


def criterion_8():
    """Pointwise distortion of the radial projection below its majorant."""
    violations = 0
    checked = 0
    for name, params in CATALOG_CASES:
        s, ball, c = surface(name, **params)
        if not in_class(c, 2):
            continue
        q = quasi_isometry_report(s, ball)
        violations += int(np.sum(q.distortion > q.bound + DISTORTION_SLACK))
        checked += 1
    sph = 0.0
    for name, params in [("round_sphere", {"radius": 2.0, "center": [1.0, 0, 0]}), ("geodesic_sphere", {"radius": 1.0})]:
        s, ball, _ = surface(name, **params)
        sph = max(sph, quasi_isometry_report(s, ball).max_distortion)
    ok = violations == 0 and sph < SPHERE_DISTORTION_TOL
    return report(8, ok, f"{violations} violations over {checked} shapes; sphere distortion = {sph:.1e}")


def criterion_9():
    """Total curvature of Euclidean class members at least omega_n."""
    worst = math.inf
    for name, params in CATALOG_CASES + CATALOG_CASES_3D:
        if CATALOG[name].space != "euclidean":
            continue
        grid = GRID if params.get("n", 2) == 2 else GridSpec(nodes=16)
        s = sample_shape(make_shape(name, **params), grid)
        c = compute_curvature(s)
        for k in range(1, s.n + 1):
            if in_class(c, k):
                worst = min(worst, total_curvature_check(s, c, k).margin)
    eq = 0.0
    for r in (0.5, 1.0, 3.0):
        s, _, c = surface("round_sphere", radius=r)
        for k in (1, 2):
            eq = max(eq, abs(total_curvature_check(s, c, k).margin))
    ok = worst >= -TOTAL_CURVATURE_TOL and eq < TOTAL_CURVATURE_EQ_TOL
    return report(9, ok, f"min margin = {worst:.2e}; sphere |margin| = {eq:.1e}")


def criterion_10(tmp_dir):
    """Byte-identical JSON from repeated runs."""
    cfg = Path(tmp_dir) / "run.toml"
    cfg.write_text('seed = 3\n[shape]\nname = "perturbed_sphere"\namplitude = 0.1\nprofile = "sectoral"\n'
                   "[analysis]\nk = 2\np = 2.0\n")
    codes = [main(["analyze", "--config", str(cfg), "--out", str(Path(tmp_dir) / d)]) for d in ("a", "b")]
    a, b = ((Path(tmp_dir) / d / "report.json").read_bytes() for d in ("a", "b"))
    ok = codes == [0, 0] and a == b
    return report(10, ok, f"exit codes {codes}, identical = {a == b}, {len(a)} bytes")


@pytest.mark.parametrize("num", range(1, 10))
def test_criterion(num):
    assert globals()[f"criterion_{num}"]()


def test_criterion_10(tmp_path):
    assert criterion_10(tmp_path)


if __name__ == "__main__":
    import tempfile

    results = [globals()[f"criterion_{i}"]() for i in range(1, 10)]
    with tempfile.TemporaryDirectory() as d:
        results.append(criterion_10(d))
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
