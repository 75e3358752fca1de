"""Tuning-parameter selection: the PASS criterion and its competitors.

PASS scores each lambda by the ratio of summed selection agreement to
summed split cross-validation error over B random half-partitions:

    score(lam) = sum_b kappa_b(lam) / sum_b cv_b(lam)

where kappa is Cohen's kappa between the supports fitted on the two
halves (forced to -1 when both supports are empty or both full) and cv
is the two-fold swap error, each half scored by the model trained on
the other half.  The ratio of sums is the defined aggregation; it is
not the mean of per-partition ratios.

The competitors (BIC, Mallows Cp, GCV, k-fold CV) score the full-data
path and select the argmin, with df(lam) = |active set|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    Coefficients,
    Dataset,
    FitOptions,
    PenaltySpec,
    SupportSet,
    active_set,
    fit_path,
    fit_penalized,
    ols_fit,
)
from .rng import SeedLike, as_seed_sequence, child_seed, generator


class SelectionFailure(RuntimeError):
    """No lambda on the grid admits a valid selection."""


@dataclass
class SplitPair:
    """A partition of {0..n-1} into two halves with |first| = floor(n/2)."""

    first: np.ndarray
    second: np.ndarray

    def __post_init__(self):
        self.first = np.asarray(self.first, dtype=int)
        self.second = np.asarray(self.second, dtype=int)
        n = self.first.size + self.second.size
        if self.first.size != n // 2:
            raise ValueError("first half must hold floor(n/2) indices")
        merged = np.concatenate([self.first, self.second])
        if not np.array_equal(np.sort(merged), np.arange(n)):
            raise ValueError("halves must partition 0..n-1")


@dataclass
class PassResult:
    """Per-lambda PASS traces and the selected lambda."""

    grid: np.ndarray
    kappa_sum: np.ndarray
    cv_sum: np.ndarray
    score: np.ndarray
    lambda_hat: float
    b_used: int
    kappa_by_split: np.ndarray = field(repr=False, default=None)  # (b, len(grid))
    cv_by_split: np.ndarray = field(repr=False, default=None)


@dataclass
class CriterionScore:
    """Per-lambda trace of one selection criterion and its optimizer."""

    grid: np.ndarray
    value: np.ndarray
    lambda_hat: float
    criterion_name: str


def random_half_split(n: int, rng) -> SplitPair:
    """Uniformly random half-partition; deterministic given the stream state."""
    if n < 4:
        raise ValueError("need n >= 4 to fit on both halves")
    rng = rng if isinstance(rng, np.random.Generator) else generator(rng)
    perm = rng.permutation(n)
    m = n // 2
    return SplitPair(first=np.sort(perm[:m]), second=np.sort(perm[m:]))


def cohens_kappa(a1: SupportSet, a2: SupportSet) -> float:
    """Chance-corrected agreement between two supports over p coordinates.

    Both-empty and both-full pairs are degenerate and return -1; those are
    the only cases where the 1 - Pr(e) denominator vanishes.
    """
    if a1.p != a2.p:
        raise ValueError("supports live in different dimensions")
    p = a1.p
    if p < 1:
        raise ValueError("need p >= 1")
    n1, n2 = a1.size, a2.size
    if (n1 == 0 and n2 == 0) or (n1 == p and n2 == p):
        return -1.0
    both = len(set(a1.indices) & set(a2.indices))
    neither = p - n1 - n2 + both
    pr_a = (both + neither) / p
    pr_e = (n1 * n2 + (p - n1) * (p - n2)) / (p * p)
    return (pr_a - pr_e) / (1.0 - pr_e)


def cv_error(data: Dataset, split: SplitPair, beta1: Coefficients, beta2: Coefficients) -> float:
    """Two-fold swap error: each half scored by the other half's fit, over n."""
    pred2 = data.x[split.first] @ beta2.beta
    pred1 = data.x[split.second] @ beta1.beta
    sse = float(np.sum((data.y[split.first] - pred2) ** 2))
    sse += float(np.sum((data.y[split.second] - pred1) ** 2))
    if not math.isfinite(sse):
        raise ArithmeticError("non-finite prediction in cv_error")
    return sse / data.n


def _argbest(grid: np.ndarray, value: np.ndarray, maximize: bool) -> float:
    # Ties resolve to the largest lambda (the sparser model); NaN entries
    # mark invalid grid points.
    valid = np.isfinite(value)
    if not valid.any():
        raise SelectionFailure("criterion is undefined at every grid point")
    vals = value[valid]
    lams = grid[valid]
    best = vals.max() if maximize else vals.min()
    return float(lams[vals == best].max())


def pass_aggregate(kappa_by_split: np.ndarray, cv_by_split: np.ndarray) -> np.ndarray:
    """Ratio-of-sums PASS score per lambda from (b, n_grid) traces.

    Columns with a nonpositive cv sum get NaN (no valid score there).
    Sums are exactly rounded, so any reordering of the b partitions leaves
    the score bit-identical.
    """
    kappa_by_split = np.atleast_2d(np.asarray(kappa_by_split, dtype=float))
    cv_by_split = np.atleast_2d(np.asarray(cv_by_split, dtype=float))
    if kappa_by_split.shape != cv_by_split.shape:
        raise ValueError("kappa and cv traces disagree in shape")
    n_grid = kappa_by_split.shape[1]
    score = np.empty(n_grid)
    for k in range(n_grid):
        ks = math.fsum(kappa_by_split[:, k])
        cs = math.fsum(cv_by_split[:, k])
        score[k] = ks / cs if cs > 0 else np.nan
    return score


def pass_score(
    data: Dataset,
    penalty: PenaltySpec,
    grid,
    b: int = 20,
    opts: FitOptions | None = None,
    rng: SeedLike = None,
) -> PassResult:
    """Run the PASS procedure over b random half-partitions.

    Each partition fits both halves across the whole grid (warm-started
    paths), accumulates kappa and the swap CV error per lambda, and the
    score is the ratio of sums.  Partition i draws from substream i of
    the given seed, so the b partitions are reproducible independently of
    evaluation order.

    Raises SelectionFailure when every lambda is degenerate (kappa -1 on
    every split everywhere) or no lambda has a positive cv sum.
    """
    if b < 1:
        raise ValueError("need b >= 1 partitions")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if data.n < 4:
        raise ValueError("need n >= 4")
    opts = opts if opts is not None else FitOptions()
    seed = as_seed_sequence(rng)

    n_grid = grid.size
    kappa_by_split = np.empty((b, n_grid))
    cv_by_split = np.empty((b, n_grid))
    for ib in range(b):
        split = random_half_split(data.n, generator(child_seed(seed, ib)))
        half1 = data.subset(split.first)
        half2 = data.subset(split.second)
        path1 = fit_path(half1, penalty, grid, opts)
        path2 = fit_path(half2, penalty, grid, opts)
        for k in range(n_grid):
            s1 = active_set(path1[k], opts.zero_tol)
            s2 = active_set(path2[k], opts.zero_tol)
            kappa_by_split[ib, k] = cohens_kappa(s1, s2)
            cv_by_split[ib, k] = cv_error(data, split, path1[k], path2[k])

    kappa_sum = np.array([math.fsum(kappa_by_split[:, k]) for k in range(n_grid)])
    cv_sum = np.array([math.fsum(cv_by_split[:, k]) for k in range(n_grid)])
    if np.all(kappa_sum == -float(b)):
        raise SelectionFailure(
            "every lambda is degenerate: kappa = -1 on every split at every grid point"
        )
    score = pass_aggregate(kappa_by_split, cv_by_split)
    lambda_hat = _argbest(grid, score, maximize=True)
    return PassResult(
        grid=grid,
        kappa_sum=kappa_sum,
        cv_sum=cv_sum,
        score=score,
        lambda_hat=lambda_hat,
        b_used=b,
        kappa_by_split=kappa_by_split,
        cv_by_split=cv_by_split,
    )


def select_final_model(
    data: Dataset,
    penalty: PenaltySpec,
    lambda_hat: float,
    opts: FitOptions | None = None,
) -> tuple[SupportSet, Coefficients]:
    """Full-data fit at lambda_hat, support extraction, and OLS refit."""
    opts = opts if opts is not None else FitOptions()
    coef = fit_penalized(data, penalty, lambda_hat, opts)
    support = active_set(coef, opts.zero_tol)
    return support, ols_fit(data, support)


def _path_rss_df(data: Dataset, path: list[Coefficients], zero_tol: float):
    rss = np.array([float(np.sum((data.y - data.x @ c.beta) ** 2)) for c in path])
    df = np.array([active_set(c, zero_tol).size for c in path], dtype=float)
    return rss, df


def _resolve_path(data, penalty, grid, opts, path):
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if path is None:
        path = fit_path(data, penalty, grid, opts)
    if len(path) != grid.size:
        raise ValueError("path length does not match the grid")
    return grid, path


def bic_select(
    data: Dataset,
    penalty: PenaltySpec,
    grid,
    opts: FitOptions | None = None,
    path: list[Coefficients] | None = None,
) -> CriterionScore:
    """BIC(lam) = n*log(RSS/n) + log(n)*df, from the penalized full-data path."""
    opts = opts if opts is not None else FitOptions()
    grid, path = _resolve_path(data, penalty, grid, opts, path)
    rss, df = _path_rss_df(data, path, opts.zero_tol)
    tiny = np.finfo(float).tiny
    value = data.n * np.log(np.maximum(rss, tiny) / data.n) + np.log(data.n) * df
    return CriterionScore(grid, value, _argbest(grid, value, maximize=False), "bic")


def cp_select(
    data: Dataset,
    penalty: PenaltySpec,
    grid,
    opts: FitOptions | None = None,
    path: list[Coefficients] | None = None,
) -> CriterionScore:
    """Mallows Cp(lam) = RSS/sigma2 - n + 2*df with sigma2 from the full OLS."""
    if data.n <= data.p:
        raise ValueError("Cp needs n > p to estimate the noise variance")
    opts = opts if opts is not None else FitOptions()
    grid, path = _resolve_path(data, penalty, grid, opts, path)
    full_ols = ols_fit(data, SupportSet(indices=tuple(range(data.p)), p=data.p))
    rss_full = float(np.sum((data.y - data.x @ full_ols.beta) ** 2))
    sigma2 = rss_full / (data.n - data.p)
    rss, df = _path_rss_df(data, path, opts.zero_tol)
    value = rss / sigma2 - data.n + 2.0 * df
    return CriterionScore(grid, value, _argbest(grid, value, maximize=False), "cp")


def gcv_select(
    data: Dataset,
    penalty: PenaltySpec,
    grid,
    opts: FitOptions | None = None,
    path: list[Coefficients] | None = None,
) -> CriterionScore:
    """GCV(lam) = (RSS/n) / (1 - df/n)^2; df = n scores +inf."""
    opts = opts if opts is not None else FitOptions()
    grid, path = _resolve_path(data, penalty, grid, opts, path)
    rss, df = _path_rss_df(data, path, opts.zero_tol)
    denom = (1.0 - df / data.n) ** 2
    with np.errstate(divide="ignore"):
        value = np.where(denom > 0, (rss / data.n) / np.where(denom > 0, denom, 1.0), np.inf)
    return CriterionScore(grid, value, _argbest(grid, value, maximize=False), "gcv")


def kfold_cv_select(
    data: Dataset,
    penalty: PenaltySpec,
    grid,
    k: int = 10,
    opts: FitOptions | None = None,
    rng: SeedLike = None,
) -> CriterionScore:
    """k-fold cross-validation over the grid with seeded folds.

    Folds are a random near-equal-size partition; each held-out fold is
    scored in squared error against the path fit on the remaining folds,
    and the criterion is the total held-out squared error over n.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if k < 2:
        raise ValueError("need k >= 2 folds")
    if k > data.n:
        raise ValueError(f"k={k} folds on n={data.n} rows would leave a fold empty")
    opts = opts if opts is not None else FitOptions()
    perm = generator(rng).permutation(data.n)
    folds = np.array_split(perm, k)
    sse = np.zeros(grid.size)
    for fold in folds:
        train = np.setdiff1d(perm, fold)
        path = fit_path(data.subset(train), penalty, grid, opts)
        x_te, y_te = data.x[fold], data.y[fold]
        for i, coef in enumerate(path):
            sse[i] += float(np.sum((y_te - x_te @ coef.beta) ** 2))
    value = sse / data.n
    return CriterionScore(grid, value, _argbest(grid, value, maximize=False), "cv")
