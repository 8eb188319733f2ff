"""
Dense linear algebra used throughout the package.

Everything here works on small dense ``float64`` arrays (``d <= 10``).  A single
relative rank tolerance, :data:`RANK_TOL`, decides numerical rank for the
projector, kernel and affine-set constructions so that all of them agree on
what "zero" means.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    InconsistentSystemError,
    InvalidInputError,
    SolverFailureError,
    UnboundedError,
)

RANK_TOL = 1e-10


def _as_matrix(M, name="M"):
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def _as_vector(v, name="v"):
    v = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return v


class RankFactor(NamedTuple):
    rank: int
    row_space_basis: np.ndarray
    kernel_basis: np.ndarray


def rank_factor(M, tol=RANK_TOL):
    """
    Rank-revealing factorization of `M` through the SVD.

    Parameters
    ----------
    M : array_like, shape (m, d)
    tol : float
        Singular values at or below ``tol * sigma_max`` count as zero.

    Returns
    -------
    RankFactor
        ``rank``, an orthonormal basis of the row space (``d x rank``) and an
        orthonormal basis of the kernel (``d x (d - rank)``).
    """
    M = _as_matrix(M)
    d = M.shape[1]
    if M.shape[0] == 0 or d == 0:
        return RankFactor(0, np.zeros((d, 0)), np.eye(d))
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    rank = 0 if s[0] == 0 else int(np.sum(s > tol * s[0]))
    return RankFactor(rank, Vt[:rank].T.copy(), Vt[rank:].T.copy())


def pinv(M, tol=RANK_TOL):
    """Moore-Penrose inverse with the package-wide rank tolerance."""
    M = _as_matrix(M)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros(M.T.shape)
    keep = s > tol * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def min_norm_ls_solve(A, b, tol=RANK_TOL):
    """
    Minimum-norm least-squares solution of ``A x = b``.

    Equals ``pinv(A) @ b`` and also ``pinv(A.T @ A) @ A.T @ b``.
    """
    A = _as_matrix(A, "A")
    b = _as_vector(b, "b")
    if b.shape[0] != A.shape[0]:
        raise InvalidInputError(
            f"b has {b.shape[0]} entries but A has {A.shape[0]} rows")
    return pinv(A, tol) @ b


def kernel_projector(A, tol=RANK_TOL):
    """Orthogonal projector onto ``ker A``, i.e. ``I - pinv(A) @ A``."""
    K = rank_factor(A, tol).kernel_basis
    P = K @ K.T
    return 0.5 * (P + P.T)


@dataclass
class AffineSet:
    """
    The set ``{point + kernel_basis @ z}``.

    `point` is always the minimum-norm member, so two representations of the
    same set differ only by a rotation of `kernel_basis`.
    """

    dim: int
    point: np.ndarray
    kernel_basis: np.ndarray = field(default=None)

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float).reshape(self.dim)
        if self.kernel_basis is None:
            self.kernel_basis = np.zeros((self.dim, 0))
        self.kernel_basis = np.asarray(self.kernel_basis, dtype=float).reshape(self.dim, -1)

    @property
    def codim(self):
        return self.dim - self.kernel_basis.shape[1]

    def direction_projector(self):
        K = self.kernel_basis
        return K @ K.T

    def distance(self, x):
        """Euclidean distance from `x` to the set."""
        r = np.asarray(x, dtype=float) - self.point
        K = self.kernel_basis
        return float(np.linalg.norm(r - K @ (K.T @ r)))

    def project(self, x):
        r = np.asarray(x, dtype=float) - self.point
        K = self.kernel_basis
        return self.point + K @ (K.T @ r)


def affine_set_from_normal_eqs(G, h, tol=RANK_TOL, consistency_tol=1e-8):
    """
    Solution set of ``G x = h`` for a symmetric PSD `G`.

    Raises
    ------
    InconsistentSystemError
        If the min-norm solution leaves a residual above
        ``consistency_tol * (||G|| ||x|| + ||h||)``.
    """
    G = _as_matrix(G, "G")
    h = _as_vector(h, "h")
    d = G.shape[1]
    if G.shape[0] != d or h.shape[0] != d:
        raise InvalidInputError(f"G must be square and match h; got {G.shape}, {h.shape}")
    gnorm = np.linalg.norm(G, 2) if d else 0.0
    if np.linalg.norm(G - G.T) > 1e-8 * max(gnorm, 1.0):
        raise InvalidInputError("G is not symmetric")
    rf = rank_factor(G, tol)
    x = pinv(G, tol) @ h
    resid = np.linalg.norm(G @ x - h)
    if resid > consistency_tol * (gnorm * np.linalg.norm(x) + np.linalg.norm(h)) + 1e-300:
        raise InconsistentSystemError(f"normal equations inconsistent (residual {resid:.3e})")
    # drop any kernel component the pseudo-inverse left behind
    K = rf.kernel_basis
    x = x - K @ (K.T @ x)
    return AffineSet(d, x, K)


def affine_sets_equal(S1, S2, tol=1e-8):
    """
    Compare two affine sets by span and mutual point membership.

    Point residuals are measured relative to ``1 + max(|p1|, |p2|)``; span
    residuals are absolute since the bases are orthonormal.
    """
    if S1.dim != S2.dim:
        raise InvalidInputError("affine sets live in different dimensions")
    K1, K2 = S1.kernel_basis, S2.kernel_basis
    if K1.shape[1] != K2.shape[1]:
        return False
    if K1.shape[1]:
        if np.linalg.norm(K1 - K2 @ (K2.T @ K1)) > tol:
            return False
        if np.linalg.norm(K2 - K1 @ (K1.T @ K2)) > tol:
            return False
    scale = 1.0 + max(np.linalg.norm(S1.point), np.linalg.norm(S2.point))
    return S2.distance(S1.point) <= tol * scale and S1.distance(S2.point) <= tol * scale


# --------------------------------------------------------------------------
# linear programming
# --------------------------------------------------------------------------

@dataclass
class LpProblem:
    """
    ``minimize c @ x  subject to  A_eq @ x = b_eq``, with ``x[j] >= 0``
    wherever ``nonneg[j]`` is true and ``x[j]`` free otherwise.
    """

    A_eq: np.ndarray
    b_eq: np.ndarray
    nonneg: np.ndarray = None
    c: np.ndarray = None

    def __post_init__(self):
        self.A_eq = _as_matrix(self.A_eq, "A_eq")
        self.b_eq = _as_vector(self.b_eq, "b_eq")
        n = self.A_eq.shape[1]
        if self.b_eq.shape[0] != self.A_eq.shape[0]:
            raise InvalidInputError("b_eq length does not match A_eq rows")
        self.nonneg = (np.ones(n, dtype=bool) if self.nonneg is None
                       else np.asarray(self.nonneg, dtype=bool).reshape(n))
        self.c = np.zeros(n) if self.c is None else _as_vector(self.c, "c")
        if self.c.shape[0] != n:
            raise InvalidInputError("objective length does not match A_eq columns")

    @property
    def num_vars(self):
        return self.A_eq.shape[1]


class LpResult(NamedTuple):
    status: str  # "feasible" | "infeasible"
    x: np.ndarray | None
    objective: float | None


_PIVOT_TOL = 1e-9
_COST_TOL = 1e-10


def _basic_solution(A, b, basis):
    return np.linalg.solve(A[:, basis], b)


def _simplex(A, b, c, basis, allowed, max_iter, bounded=False):
    """
    Revised primal simplex with Bland's rule.

    The basis system is re-solved from the original data on every iteration,
    so round-off does not accumulate across pivots.  With `bounded` set (the
    phase-one problem) a column without a usable pivot is numerical noise and
    is dropped instead of signalling unboundedness.
    """
    allowed = allowed.copy()
    cscale = max(1.0, np.abs(c).max(initial=0.0))
    for _ in range(max_iter):
        B = A[:, basis]
        try:
            xb = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError:
            raise SolverFailureError("singular basis") from None
        red = c - A.T @ y
        red[basis] = 0.0
        cand = np.flatnonzero((red < -_COST_TOL * cscale) & allowed)
        if cand.size == 0:
            return
        j = int(cand[0])
        try:
            dB = np.linalg.solve(B, A[:, j])
        except np.linalg.LinAlgError:
            raise SolverFailureError("singular basis") from None
        rows = np.flatnonzero(dB > _PIVOT_TOL)
        if rows.size == 0:
            if bounded:
                allowed[j] = False
                continue
            raise UnboundedError("objective is unbounded below")
        ratios = np.maximum(xb[rows], 0.0) / dB[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        basis[r] = j
    raise SolverFailureError("simplex iteration limit reached")


def lp_solve(problem, feas_tol=1e-9):
    """
    Two-phase simplex with Bland's anti-cycling rule.

    The initial basis is the artificial identity in row order, so identical
    inputs always produce identical outputs.

    Returns
    -------
    LpResult
        ``status`` is ``"feasible"`` or ``"infeasible"``.  On feasibility
        ``x`` is an optimal basic solution.

    Raises
    ------
    UnboundedError
        If the objective is unbounded on the feasible set.
    SolverFailureError
        On a singular basis or iteration-limit breakdown.
    """
    A0, b0, c0, mask = problem.A_eq, problem.b_eq, problem.c, problem.nonneg
    n0 = A0.shape[1]
    free = np.flatnonzero(~mask)
    A = np.hstack([A0, -A0[:, free]])
    c = np.concatenate([c0, -c0[free]])
    m, n = A.shape

    # column then row equilibration keeps pivot tolerances meaningful when
    # entries span many orders of magnitude
    colscale = np.abs(A).max(axis=0)
    colscale[colscale == 0] = 1.0
    A = A / colscale
    c = c / colscale
    scale = np.abs(np.hstack([A, b0[:, None]])).max(axis=1)
    scale[scale == 0] = 1.0
    A = A / scale[:, None]
    b = b0 / scale
    neg = b < 0
    A[neg] *= -1
    b = np.where(neg, -b, b)

    Aa = np.hstack([A, np.eye(m)])
    basis = list(range(n, n + m))
    max_iter = 50 * (n + m) + 1000

    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    allowed = np.ones(n + m, dtype=bool)
    _simplex(Aa, b, cost1, basis, allowed, max_iter, bounded=True)
    xb = _basic_solution(Aa, b, basis)
    infeas = sum(xb[r] for r in range(m) if basis[r] >= n)
    if infeas > feas_tol * max(1.0, b.max(initial=0.0)):
        return LpResult("infeasible", None, None)

    # swap zero-level artificials for structural columns where possible; an
    # artificial that cannot leave marks a redundant row and stays at zero
    for r in range(m):
        if basis[r] < n:
            continue
        row = np.linalg.solve(Aa[:, basis].T, np.eye(m)[r]) @ A
        for j in np.flatnonzero(np.abs(row) > 1e-9):
            if j not in basis:
                basis[r] = int(j)
                break

    cost2 = np.concatenate([c, np.zeros(m)])
    allowed[n:] = False
    _simplex(Aa, b, cost2, basis, allowed, max_iter)

    x = np.zeros(n + m)
    x[basis] = _basic_solution(Aa, b, basis)
    np.clip(x, 0.0, None, out=x)
    x = x[:n] / colscale
    out = x[:n0].copy()
    out[free] -= x[n0:]
    return LpResult("feasible", out, float(c0 @ out))
