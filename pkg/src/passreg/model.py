"""Data model and penalized least-squares fitting.

The objective throughout is

    (1/n) * sum_i (y_i - x_i' b)^2 + sum_j pen(|b_j|),

fit by cyclic coordinate descent with covariance updates.  Columns are
variance-standardized internally (the penalty applies on that scale, so
one lambda grid is comparable across datasets) and coefficients are
returned on the centered, unstandardized scale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _solver

LASSO = "lasso"
ADAPTIVE_LASSO = "alasso"
SCAD = "scad"
PENALTY_KINDS = (LASSO, ADAPTIVE_LASSO, SCAD)

# Internal KKT stationarity target for the convex penalties; an order of
# magnitude under the 1e-6 certification tolerance.
_KKT_TARGET = 1e-7


class ConstantColumnError(ValueError):
    """A covariate column has zero variance and cannot be standardized."""


class RankDeficiencyError(ValueError):
    """A least-squares subproblem is rank deficient."""


class NumericsError(ArithmeticError):
    """A fit produced non-finite intermediate values."""


class NonConvergenceWarning(UserWarning):
    """Coordinate descent hit max_iter; the last iterate was returned."""


@dataclass
class Dataset:
    """Response vector and design matrix, with n observations of p covariates."""

    x: np.ndarray
    y: np.ndarray
    n: int = field(init=False)
    p: int = field(init=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.ndim != 2:
            raise ValueError("x must be a 2-d array")
        if self.y.ndim != 1:
            raise ValueError("y must be a 1-d array")
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("x and y disagree on the number of rows")
        self.n, self.p = self.x.shape
        if self.n < 2:
            raise ValueError("need at least 2 observations")
        if self.p < 1:
            raise ValueError("need at least 1 covariate")

    def subset(self, rows) -> "Dataset":
        """Dataset restricted to the given row indices (no re-centering)."""
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.x[rows], self.y[rows])


@dataclass
class CenteringInfo:
    """Column means removed from x and the mean removed from y."""

    x_means: np.ndarray
    y_mean: float

    def intercept(self, beta: np.ndarray) -> float:
        """Intercept that maps centered-scale predictions back to the raw scale."""
        return float(self.y_mean - self.x_means @ beta)


def center_data(raw: Dataset) -> tuple[Dataset, CenteringInfo]:
    """Remove column means from x and the mean from y.

    Fails on non-finite entries.  Centering an already-centered dataset is
    a no-op up to rounding.
    """
    if not np.all(np.isfinite(raw.x)):
        raise ValueError("x contains non-finite entries")
    if not np.all(np.isfinite(raw.y)):
        raise ValueError("y contains non-finite entries")
    x_means = raw.x.mean(axis=0)
    y_mean = float(raw.y.mean())
    centered = Dataset(raw.x - x_means, raw.y - y_mean)
    return centered, CenteringInfo(x_means=x_means, y_mean=y_mean)


@dataclass
class PenaltySpec:
    """Which sparsity penalty to apply and its shape parameters.

    kind is one of "lasso", "alasso", "scad".  `a` is the SCAD shape
    parameter (> 2, default 3.7).  `weights` only applies to the adaptive
    lasso: entries are per-coefficient multipliers on lambda, expressed on
    the original coefficient scale; +inf pins a coefficient at zero.  When
    weights is None the adaptive lasso derives them at fit time as
    1/|ols| from the dataset being fit.
    """

    kind: str
    a: float = 3.7
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.kind == SCAD and not self.a > 2.0:
            raise ValueError("SCAD requires a > 2")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.kind != ADAPTIVE_LASSO:
                raise ValueError("weights only apply to the adaptive lasso")
            if self.weights.ndim != 1:
                raise ValueError("weights must be a 1-d vector")
            if np.any(np.isnan(self.weights)) or np.any(self.weights < 0):
                raise ValueError("weights must be >= 0 (inf pins a coefficient at zero)")

    @classmethod
    def lasso(cls) -> "PenaltySpec":
        return cls(kind=LASSO)

    @classmethod
    def adaptive_lasso(cls, weights: np.ndarray | None = None) -> "PenaltySpec":
        return cls(kind=ADAPTIVE_LASSO, weights=weights)

    @classmethod
    def scad(cls, a: float = 3.7) -> "PenaltySpec":
        return cls(kind=SCAD, a=a)


@dataclass
class Coefficients:
    """A fitted coefficient vector and the lambda it was fit at."""

    beta: np.ndarray
    lam: float
    converged: bool = True

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.beta


@dataclass(frozen=True)
class SupportSet:
    """Sorted indices of the nonzero coefficients in an ambient dimension p."""

    indices: tuple[int, ...]
    p: int

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        object.__setattr__(self, "indices", idx)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if idx and (idx[0] < 0 or idx[-1] >= self.p):
            raise ValueError("indices out of range")

    @classmethod
    def from_iterable(cls, indices, p: int) -> "SupportSet":
        return cls(indices=tuple(sorted(set(int(j) for j in indices))), p=p)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def is_empty(self) -> bool:
        return not self.indices

    @property
    def is_full(self) -> bool:
        return len(self.indices) == self.p

    def as_mask(self) -> np.ndarray:
        mask = np.zeros(self.p, dtype=bool)
        mask[list(self.indices)] = True
        return mask

    def __contains__(self, j) -> bool:
        return int(j) in set(self.indices)


@dataclass
class FitOptions:
    """Solver controls: sweep tolerance, sweep cap, and the zero cutoff."""

    tol: float = 1e-7
    max_iter: int = 10_000
    zero_tol: float = 1e-8

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.zero_tol < 0:
            raise ValueError("zero_tol must be >= 0")


def soft_threshold(z: float, t: float) -> float:
    """sign(z) * max(|z| - t, 0) with the boundary mapping to 0."""
    if t < 0:
        raise ValueError("threshold must be >= 0")
    return float(_solver.soft_threshold_scalar(float(z), float(t)))


def scad_univariate(z: float, lam: float, a: float) -> float:
    """Global minimizer of (z - g)^2 + scad(|g|; lam, a) over g.

    The classical rule: zero for |z| <= lam, soft threshold at lam up to
    |z| = 2*lam, the linear blend ((a-1)z - sign(z)*a*lam)/(a-2) on
    (2*lam, a*lam], and exactly z once |z| exceeds the penalty's flat
    region at a*lam.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if not a > 2:
        raise ValueError("SCAD requires a > 2")
    return float(_solver.scad_univariate_scalar(float(z), float(lam), float(a)))


def lambda_grid(min_exp: float = -2.0, max_exp: float = 2.0, count: int = 100) -> np.ndarray:
    """Log-spaced lambda grid 10**linspace(min_exp, max_exp, count), ascending."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not (np.isfinite(min_exp) and np.isfinite(max_exp)):
        raise ValueError("grid exponents must be finite")
    if count == 1:
        return np.array([10.0**min_exp])
    return 10.0 ** np.linspace(min_exp, max_exp, count)


def adaptive_weights(data: Dataset) -> np.ndarray:
    """Adaptive-lasso weights 1/|ols_j| from the full OLS fit of `data`.

    Errors if the design is rank deficient.  An exactly zero OLS
    coefficient yields an infinite weight (coefficient pinned at zero).
    """
    beta, _, rank, _ = np.linalg.lstsq(data.x, data.y, rcond=None)
    if rank < data.p:
        raise RankDeficiencyError(
            f"design has rank {rank} < p={data.p}; cannot form adaptive weights"
        )
    with np.errstate(divide="ignore"):
        return 1.0 / np.abs(beta)


def _standardized_problem(data: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Scale is the root mean square of each (centered) column, so the
    # standardized Gram has unit diagonal without refitting an intercept
    # on subsamples.
    scales = np.sqrt(np.mean(data.x**2, axis=0))
    bad = np.flatnonzero(~(scales > 0))
    if bad.size:
        raise ConstantColumnError(
            f"column {int(bad[0])} is constant and cannot be standardized"
        )
    xs = data.x / scales
    g_mat = (xs.T @ xs) / data.n
    c_vec = (xs.T @ data.y) / data.n
    return g_mat, c_vec, scales


def _standardized_weights(data: Dataset, penalty: PenaltySpec, scales: np.ndarray) -> np.ndarray:
    if penalty.kind != ADAPTIVE_LASSO:
        return np.ones(data.p)
    w = penalty.weights if penalty.weights is not None else adaptive_weights(data)
    if w.shape[0] != data.p:
        raise ValueError("weights length must equal p")
    # lam * w_j * |b_j| == (lam * w_j / s_j) * |s_j b_j| on the standardized scale
    with np.errstate(invalid="ignore"):
        return w / scales


def _solve_path(
    data: Dataset,
    penalty: PenaltySpec,
    grid: np.ndarray,
    opts: FitOptions,
    warm: Coefficients | None,
) -> list[Coefficients]:
    g_mat, c_vec, scales = _standardized_problem(data)
    w_std = _standardized_weights(data, penalty, scales)
    order = np.argsort(-grid, kind="stable")
    desc = np.ascontiguousarray(grid[order])
    beta0 = np.zeros(data.p) if warm is None else warm.beta * scales
    betas_std, status = _solver.cd_path(
        g_mat,
        c_vec,
        w_std,
        desc,
        float(penalty.a),
        penalty.kind == SCAD,
        float(opts.tol),
        int(opts.max_iter),
        _KKT_TARGET,
        beta0,
    )
    if np.any(status == _solver.NON_FINITE):
        k = int(np.flatnonzero(status == _solver.NON_FINITE)[0])
        raise NumericsError(f"non-finite values while fitting at lambda={desc[k]:g}")
    stalled = desc[status == _solver.MAX_ITER]
    if stalled.size:
        warnings.warn(
            f"coordinate descent hit max_iter={opts.max_iter} at lambda(s) "
            + ", ".join(f"{v:g}" for v in stalled),
            NonConvergenceWarning,
            stacklevel=3,
        )
    out: list[Coefficients] = [None] * len(grid)  # type: ignore[list-item]
    for pos, k in enumerate(order):
        out[k] = Coefficients(
            beta=betas_std[pos] / scales,
            lam=float(grid[k]),
            converged=bool(status[pos] == _solver.OK),
        )
    return out


def fit_penalized(
    data: Dataset,
    penalty: PenaltySpec,
    lam: float,
    opts: FitOptions | None = None,
    warm: Coefficients | None = None,
) -> Coefficients:
    """Fit the penalized objective at a single lambda.

    For the convex penalties the result is the global minimizer, certified
    internally by the KKT stationarity conditions on the standardized
    problem; for SCAD it is the stationary point reached by coordinate
    descent from the warm start (zero by default).  Non-convergence is
    flagged on the returned Coefficients and warned about, never silently
    dropped; non-finite intermediates abort.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if warm is not None and warm.beta.shape[0] != data.p:
        raise ValueError("warm start has the wrong length")
    opts = opts if opts is not None else FitOptions()
    return _solve_path(data, penalty, np.array([float(lam)]), opts, warm)[0]


def fit_path(
    data: Dataset,
    penalty: PenaltySpec,
    grid,
    opts: FitOptions | None = None,
) -> list[Coefficients]:
    """Fit the whole lambda grid, sweeping large-to-small with warm starts.

    The grid must be strictly monotone (either direction); the returned
    list is aligned with the input order.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d vector")
    if np.any(grid < 0):
        raise ValueError("lambdas must be >= 0")
    if grid.size > 1:
        d = np.diff(grid)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("grid must be strictly increasing or strictly decreasing")
    opts = opts if opts is not None else FitOptions()
    return _solve_path(data, penalty, grid, opts, warm=None)


def ols_fit(data: Dataset, support: SupportSet) -> Coefficients:
    """Least squares on the support columns, zeros elsewhere.

    Rank deficiency of the selected submatrix is reported explicitly.
    """
    if support.p != data.p:
        raise ValueError("support dimension does not match the dataset")
    beta = np.zeros(data.p)
    if support.indices:
        cols = list(support.indices)
        sol, _, rank, _ = np.linalg.lstsq(data.x[:, cols], data.y, rcond=None)
        if rank < len(cols):
            raise RankDeficiencyError(
                f"selected submatrix has rank {rank} < {len(cols)}"
            )
        beta[cols] = sol
    return Coefficients(beta=beta, lam=0.0)


def active_set(coef: Coefficients, zero_tol: float = 1e-8) -> SupportSet:
    """Indices j with |beta_j| strictly above zero_tol."""
    idx = np.flatnonzero(np.abs(coef.beta) > zero_tol)
    return SupportSet(indices=tuple(int(j) for j in idx), p=coef.beta.shape[0])


def kkt_violation(data: Dataset, coef: Coefficients, penalty: PenaltySpec, lam: float) -> float:
    """Max KKT stationarity violation of a convex fit on the standardized problem.

    Checks |(2/n) x_j' r| <= lam*w_j on inactive coordinates and
    (2/n) x_j' r == lam*w_j*sign(b_j) on active ones, with r the
    standardized-scale residual.  SCAD is rejected (nonconvex).
    """
    if penalty.kind == SCAD:
        raise ValueError("KKT certification applies to the convex penalties only")
    g_mat, c_vec, scales = _standardized_problem(data)
    w_std = _standardized_weights(data, penalty, scales)
    beta_std = coef.beta * scales
    gb = g_mat @ beta_std
    return float(_solver.kkt_violation_std(g_mat, c_vec, w_std, beta_std, float(lam), gb))
