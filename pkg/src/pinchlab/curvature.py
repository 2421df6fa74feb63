"""Second fundamental form, higher-order mean curvatures and Newton tensors.

Sign convention: ``B(X, Y) = <D_X nu, Y>`` with the outward normal, so a
round sphere of radius rho has principal curvatures ``1/rho > 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .shapes import SampledHypersurface
from .spaceform import SpaceForm

POSITIVITY_TOL = 1e-10


def binomials(n: int) -> np.ndarray:
    return np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)


def newton_multiplicity(n: int, k: int) -> int:
    """m(k) = (n - k) * C(n, k)."""
    return (n - k) * math.comb(n, k)


def elementary_symmetric(kappa) -> np.ndarray:
    """sigma_0..sigma_n of the last axis, expanding prod(1 + s*kappa_i) one root at a time."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    e = np.zeros(kappa.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        ki = kappa[..., i : i + 1]
        e[..., 1 : i + 2] = e[..., 1 : i + 2] + ki * e[..., 0 : i + 1]
    return e


def mean_curvatures(kappa):
    """Normalized mean curvatures ``H_0..H_n`` and ``sigma_0..sigma_n``.

    ``H_k = sigma_k / C(n, k)``.
    """
    sigma = elementary_symmetric(kappa)
    n = sigma.shape[-1] - 1
    return sigma / binomials(n), sigma


def permutation_symbol_Hk(B, k: int) -> float:
    """H_k from the generalized permutation-symbol sum over index tuples.

    Literal O(n^{2k}) evaluation, only meant as an independent check for
    small matrices (n <= 4).  The sum counts every k-subset k! times, so it
    is divided by ``k! * C(n, k)``.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    if n > 4:
        raise DomainError("permutation-symbol evaluation limited to n <= 4")
    if not 0 <= k <= n:
        raise DomainError("need 0 <= k <= n")
    if k == 0:
        return 1.0
    total = 0.0
    for i in itertools.product(range(n), repeat=k):
        for j in itertools.product(range(n), repeat=k):
            eps = _perm_symbol(i, j)
            if eps:
                total += eps * np.prod([B[a, b] for a, b in zip(i, j)])
    return total / (math.factorial(k) * math.comb(n, k))


def permutation_symbol_newton(B, k: int) -> np.ndarray:
    """Newton tensor ``T_k`` from its permutation-symbol expression (n <= 4)."""
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    if n > 4:
        raise DomainError("permutation-symbol evaluation limited to n <= 4")
    T = np.zeros((n, n))
    for i, j in itertools.product(range(n), repeat=2):
        acc = 0.0
        for ii in itertools.product(range(n), repeat=k):
            for jj in itertools.product(range(n), repeat=k):
                eps = _perm_symbol((i,) + ii, (j,) + jj)
                if eps:
                    acc += eps * np.prod([B[a, b] for a, b in zip(ii, jj)])
        T[i, j] = acc / math.factorial(k)
    return T


def _perm_symbol(top, bottom) -> int:
    if len(set(top)) < len(top) or sorted(top) != sorted(bottom):
        return 0
    perm = [top.index(b) for b in bottom]
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def newton_traces(S, sigma=None):
    """Traces of the Newton tensors by two independent routes.

    Parameters
    ----------
    S : (..., n, n) array
        Shape operator in an orthonormal frame.
    sigma : optional (..., n+1) array
        Elementary symmetric functions of the eigenvalues of ``S``;
        computed if omitted.

    Returns
    -------
    dict with keys ``trace``, ``H_T`` (identity route, ``m(k) H_k`` and
    ``m(k) H_{k+1}``) and ``trace_rec``, ``H_T_rec`` (recursion
    ``P_0 = I, P_k = sigma_k I - S P_{k-1}``), each of shape ``(..., n)``
    for ``k = 0..n-1``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[-1]
    if sigma is None:
        sigma = elementary_symmetric(np.linalg.eigvalsh(S))
    H = sigma / binomials(n)
    m = np.array([newton_multiplicity(n, k) for k in range(n)], dtype=float)
    trace = m * H[..., :n]
    H_T = m * H[..., 1 : n + 1]

    eye = np.broadcast_to(np.eye(n), S.shape)
    P = eye.copy()
    trace_rec = np.empty(S.shape[:-2] + (n,))
    H_T_rec = np.empty_like(trace_rec)
    for k in range(n):
        if k > 0:
            P = sigma[..., k, None, None] * eye - S @ P
        trace_rec[..., k] = np.trace(P, axis1=-2, axis2=-1)
        H_T_rec[..., k] = np.trace(S @ P, axis1=-2, axis2=-1)
    return {"trace": trace, "H_T": H_T, "trace_rec": trace_rec, "H_T_rec": H_T_rec}


def scalar_curvature(space: SpaceForm, H2, n: int):
    """Scal = n(n-1)(delta + H_2) (Gauss equation)."""
    if n < 2:
        raise DomainError("scalar curvature needs n >= 2")
    return n * (n - 1) * (space.delta + np.asarray(H2, dtype=float))


@dataclass(frozen=True, eq=False)
class CurvatureData:
    """Per-sample curvature of a sampled hypersurface.

    ``H`` and ``sigma`` have columns ``0..n+1`` with ``H_{n+1} = 0``;
    ``trace_T``/``H_T`` have columns ``k = 0..n-1``.
    """

    B: np.ndarray
    shape_operator: np.ndarray
    S: np.ndarray
    kappa: np.ndarray
    sigma: np.ndarray
    H: np.ndarray
    trace_T: np.ndarray
    H_T: np.ndarray
    trace_T_rec: np.ndarray
    H_T_rec: np.ndarray

    @property
    def n(self) -> int:
        return self.kappa.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.H[:, 1]

    def Hk(self, k: int) -> np.ndarray:
        return self.H[:, k]

    @property
    def H_inf(self) -> float:
        return float(np.max(np.abs(self.mean)))

    @property
    def B_inf(self) -> float:
        """Largest spectral radius of the shape operator over samples."""
        return float(np.max(np.abs(self.kappa)))


def _inv_sqrt(g):
    lam, V = np.linalg.eigh(g)
    return (V / np.sqrt(lam)[:, None, :]) @ np.swapaxes(V, -1, -2)


def second_fundamental_form(surface: SampledHypersurface):
    """``B_ij = <d_i nu, d_j x> = -<nu, d_ij x>`` and the symmetrized shape operator.

    For spherical ambients ``nu`` is orthogonal to the position vector, so
    the tangential projection of the ambient derivative drops out.

    Returns
    -------
    B : (N, n, n) array
    shape_operator : (N, n, n) array, ``g^{-1} B``
    S : (N, n, n) array, ``g^{-1/2} B g^{-1/2}``
    """
    B = -np.einsum("ni,nabi->nab", surface.normal, surface.ddx)
    if not np.all(np.isfinite(B)):
        bad = int(np.argmax(~np.isfinite(B).reshape(len(B), -1).all(axis=1)))
        raise DomainError(f"non-finite second fundamental form at sample {bad}")
    B = 0.5 * (B + np.swapaxes(B, 1, 2))
    gi = _inv_sqrt(surface.metric)
    S = gi @ B @ gi
    S = 0.5 * (S + np.swapaxes(S, 1, 2))
    shape_op = np.linalg.solve(surface.metric, B)
    return B, shape_op, S


def compute_curvature(surface: SampledHypersurface) -> CurvatureData:
    B, shape_op, S = second_fundamental_form(surface)
    kappa = np.linalg.eigvalsh(S)
    H, sigma = mean_curvatures(kappa)
    N = len(kappa)
    H = np.concatenate([H, np.zeros((N, 1))], axis=1)
    sigma = np.concatenate([sigma, np.zeros((N, 1))], axis=1)
    tr = newton_traces(S, sigma[:, :-1])
    return CurvatureData(
        B=B,
        shape_operator=shape_op,
        S=S,
        kappa=kappa,
        sigma=sigma,
        H=H,
        trace_T=tr["trace"],
        H_T=tr["H_T"],
        trace_T_rec=tr["trace_rec"],
        H_T_rec=tr["H_T_rec"],
    )


def positivity_report(curv: CurvatureData, k: int) -> dict:
    """Minimum of ``H_j`` for ``j <= k`` and the positivity implication.

    If ``min H_k`` exceeds the tolerance, every ``H_j`` with ``j <= k`` is
    expected to be positive as well; ``implication_ok`` records whether the
    samples agree.
    """
    n = curv.n
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n = {n}")
    scale = max(curv.B_inf, 1e-300)
    mins = {j: float(np.min(curv.H[:, j])) for j in range(1, k + 1)}
    positive = {j: mins[j] > POSITIVITY_TOL * scale**j for j in mins}
    implication_ok = (not positive[k]) or all(positive.values())
    return {"min_H": mins, "positive": positive, "class_member": positive[k], "implication_ok": implication_ok}


def maclaurin_slack(curv: CurvatureData, k: int) -> float:
    """Smallest ``H_j^{1/j} - H_{j+1}^{1/(j+1)}`` over ``j < k`` at samples in the positive cone.

    Returns ``inf`` if no sample has ``H_1..H_k`` all positive or ``k == 1``.
    """
    H = curv.H
    cone = np.all(H[:, 1 : k + 1] > 0, axis=1)
    if k < 2 or not np.any(cone):
        return math.inf
    roots = np.stack([H[cone, j] ** (1.0 / j) for j in range(1, k + 1)], axis=1)
    return float(np.min(roots[:, :-1] - roots[:, 1:]))
