"""
Trace metrics, exponential-rate fitting and convergence verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RATE_FLOOR = 1e-12
RATE_SKIP = 0.1
RATE_MIN_POINTS = 10


def disagreement(states):
    """Largest pairwise Euclidean distance among the rows of `states`."""
    X = np.asarray(states, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[0] < 2:
        return 0.0
    diff = X[:, None, :] - X[None, :, :]
    return float(np.sqrt((diff ** 2).sum(-1)).max())


def dist_to_solution_set(x, xstar):
    return xstar.distance(x)


def normal_residual(A, b, x):
    """``||A'A x - A'b||``."""
    return float(np.linalg.norm(A.T @ (A @ x) - A.T @ b))


def metric_series(traj, xstar, A, b):
    """Per-step disagreement, residual of the mean state and max distance to X*."""
    T1 = traj.shape[0]
    out = {k: np.zeros(T1) for k in ("disagreement", "residual", "dist_to_xstar")}
    for t in range(T1):
        X = traj[t]
        out["disagreement"][t] = disagreement(X)
        out["residual"][t] = normal_residual(A, b, X.mean(axis=0))
        out["dist_to_xstar"][t] = max(xstar.distance(x) for x in X)
    return out


@dataclass
class RateFit:
    lambda_hat: float
    r_squared: float
    n_points: int
    start: int

    @property
    def converging(self):
        return self.lambda_hat < 1.0


def fit_rate(series, skip_fraction=RATE_SKIP, floor=RATE_FLOOR, min_points=RATE_MIN_POINTS):
    """
    Fit ``e(t) ~ C * lambda**t`` by least squares on ``log e``.

    The window starts after the first `skip_fraction` of the series and ends
    just before the first value under `floor`.  Returns ``None`` when fewer
    than `min_points` values remain.
    """
    e = np.asarray(series, dtype=float)
    start = int(math.ceil(skip_fraction * len(e)))
    stop = start
    while stop < len(e) and e[stop] >= floor:
        stop += 1
    if stop - start < min_points:
        return None
    t = np.arange(start, stop, dtype=float)
    y = np.log(e[start:stop])
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float((resid ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    return RateFit(float(np.exp(slope)), r2, stop - start, start)


@dataclass
class ConvergenceReport:
    converged: bool
    final_disagreement: float
    final_residual: float
    final_dist_to_xstar: float
    lambda_hat: float | None
    rate_r_squared: float | None
    limit_point: np.ndarray | None
    limit_in_xstar: bool

    def to_dict(self):
        return {
            "converged": self.converged,
            "final_disagreement": self.final_disagreement,
            "final_residual": self.final_residual,
            "final_dist_to_Xstar": self.final_dist_to_xstar,
            "lambda_hat": self.lambda_hat,
            "rate_r_squared": self.rate_r_squared,
            "limit_point": None if self.limit_point is None else self.limit_point.tolist(),
            "limit_in_Xstar": self.limit_in_xstar,
        }

    def lines(self):
        lam = "n/a" if self.lambda_hat is None else f"{self.lambda_hat:.6f} (R^2 {self.rate_r_squared:.4f})"
        return [
            f"converged: {'yes' if self.converged else 'no'}",
            f"final disagreement: {self.final_disagreement:.3e}",
            f"final residual: {self.final_residual:.3e}",
            f"final dist to X*: {self.final_dist_to_xstar:.3e}",
            f"lambda_hat: {lam}",
            f"limit in X*: {'yes' if self.limit_in_xstar else 'no'}",
        ]


def error_series(trace):
    return np.maximum(trace.disagreement, trace.dist_to_xstar)


def report(trace, xstar, A, b, tol=1e-8):
    """
    Convergence verdict for a finished trace.

    The candidate limit is the mean of the final honest states.  The rate is
    fitted on ``max(disagreement, max_i dist(x_i, X*))``.
    """
    X = trace.final_states
    mean = X.mean(axis=0)
    dis = disagreement(X)
    res = normal_residual(A, b, mean)
    dist = max(xstar.distance(x) for x in X)
    fit = fit_rate(error_series(trace))
    lam = r2 = None
    if fit is not None and 0.0 < fit.lambda_hat < 1.0:
        lam, r2 = fit.lambda_hat, fit.r_squared
    return ConvergenceReport(
        converged=bool(dis < tol and res < tol),
        final_disagreement=dis,
        final_residual=res,
        final_dist_to_xstar=dist,
        lambda_hat=lam,
        rate_r_squared=r2,
        limit_point=mean if dis < tol else None,
        limit_in_xstar=bool(xstar.distance(mean) < tol),
    )
