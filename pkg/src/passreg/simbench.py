"""Monte Carlo benchmark harness for the selection criteria.

Generates AR(1)-correlated Gaussian designs, runs every configured
(criterion x penalty) cell on shared per-replicate datasets, and
aggregates exact-recovery rate (pct), relative prediction error (rpe),
correctly / incorrectly selected zeros (c, i), and selected model size.

Seed discipline: master seed -> per-replicate substream -> per-partition
substream, all derived functionally, so tables are bit-reproducible and
independent of execution order or parallelism.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .model import (
    Coefficients,
    Dataset,
    FitOptions,
    PenaltySpec,
    SupportSet,
    active_set,
    center_data,
    fit_path,
    lambda_grid,
    ols_fit,
)
from .rng import child_seed, generator
from .selection import (
    bic_select,
    cp_select,
    gcv_select,
    kfold_cv_select,
    pass_score,
)

PENALTY_NAMES = ("lasso", "alasso", "scad")
CRITERION_NAMES = ("pass", "bic", "cp", "cv", "gcv")

WORKERS_ENV_VAR = "PASSREG_WORKERS"

REPLICATE_CSV_COLUMNS = (
    "scenario",
    "criterion",
    "penalty",
    "replicate",
    "lambda_hat",
    "size",
    "exact_match",
    "c",
    "i",
    "rpe",
)


def penalty_from_name(name: str, scad_a: float = 3.7) -> PenaltySpec:
    if name == "lasso":
        return PenaltySpec.lasso()
    if name == "alasso":
        return PenaltySpec.adaptive_lasso()
    if name == "scad":
        return PenaltySpec.scad(a=scad_a)
    raise ValueError(f"unknown penalty {name!r}")


@dataclass
class TrueModel:
    """Generating model: coefficients, AR(1) correlation, noise level."""

    beta: np.ndarray
    rho: float
    sigma: float

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        if self.beta.ndim != 1 or self.beta.size < 1:
            raise ValueError("beta must be a nonempty vector")
        if not abs(self.rho) < 1:
            raise ValueError("need |rho| < 1")
        if not self.sigma > 0:
            raise ValueError("need sigma > 0")

    @property
    def p(self) -> int:
        return self.beta.size

    @property
    def true_support(self) -> SupportSet:
        idx = np.flatnonzero(self.beta != 0)
        return SupportSet(indices=tuple(int(j) for j in idx), p=self.p)

    def covariance(self) -> np.ndarray:
        idx = np.arange(self.p)
        return self.rho ** np.abs(idx[:, None] - idx[None, :])


@dataclass
class ScenarioConfig:
    """One simulation setting: generating model, sizes, grid, and seeds."""

    true_model: TrueModel
    n: int
    name: str = "custom"
    replicates: int = 100
    grid: np.ndarray = field(default_factory=lambda_grid)
    b: int = 20
    kfold: int = 10
    penalties: tuple[str, ...] = PENALTY_NAMES
    criteria: tuple[str, ...] = CRITERION_NAMES
    master_seed: int = 0
    scad_a: float = 3.7
    opts: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.penalties = tuple(self.penalties)
        self.criteria = tuple(self.criteria)
        if self.replicates < 1:
            raise ValueError("need replicates >= 1")
        if self.n < 4:
            raise ValueError("need n >= 4")
        if self.grid.size == 0:
            raise ValueError("grid must be nonempty")
        for name in self.penalties:
            if name not in PENALTY_NAMES:
                raise ValueError(f"unknown penalty {name!r}")
        for name in self.criteria:
            if name not in CRITERION_NAMES:
                raise ValueError(f"unknown criterion {name!r}")


@dataclass
class CellResult:
    """Metrics of one (criterion, penalty) cell within one replicate."""

    lambda_hat: float
    support: SupportSet
    refit: Coefficients
    rpe: float
    exact_match: bool
    c_zeros: int
    i_zeros: int
    size: int


@dataclass
class ReplicateResult:
    index: int
    cells: dict[tuple[str, str], CellResult]
    failures: dict[tuple[str, str], str]


@dataclass
class CellSummary:
    pct: float
    mean_rpe: float
    mean_c: float
    mean_i: float
    mean_size: float
    ok: int
    failures: int


@dataclass
class SummaryTable:
    config: ScenarioConfig
    cells: dict[tuple[str, str], CellSummary]
    replicates: list[ReplicateResult]


def gen_ar1_design(n: int, p: int, rho: float, rng) -> np.ndarray:
    """n rows from N(0, Sigma) with Sigma_kl = rho^|k-l|, via the AR(1) recursion."""
    if not abs(rho) < 1:
        raise ValueError("need |rho| < 1")
    rng = rng if isinstance(rng, np.random.Generator) else generator(rng)
    z = rng.standard_normal((n, p))
    x = np.empty((n, p))
    x[:, 0] = z[:, 0]
    innov = math.sqrt(1.0 - rho * rho)
    for k in range(1, p):
        x[:, k] = rho * x[:, k - 1] + innov * z[:, k]
    return x


def gen_response(x: np.ndarray, true_model: TrueModel, rng) -> np.ndarray:
    """y = x beta + sigma * eps with standard normal noise."""
    x = np.asarray(x, dtype=float)
    if x.shape[1] != true_model.p:
        raise ValueError("design width does not match beta")
    rng = rng if isinstance(rng, np.random.Generator) else generator(rng)
    return x @ true_model.beta + true_model.sigma * rng.standard_normal(x.shape[0])


def rpe(refit: Coefficients, true_model: TrueModel) -> float:
    """Relative prediction error (d' Sigma d) / sigma^2 evaluated in closed form."""
    if refit.beta.shape[0] != true_model.p:
        raise ValueError("coefficient length does not match the generating model")
    d = refit.beta - true_model.beta
    return float(d @ true_model.covariance() @ d) / (true_model.sigma**2)


def zero_counts(support: SupportSet, true_support: SupportSet) -> tuple[int, int]:
    """(correctly selected zeros, incorrectly selected zeros)."""
    if support.p != true_support.p:
        raise ValueError("supports live in different dimensions")
    sel = support.as_mask()
    true = true_support.as_mask()
    c = int(np.sum(~true & ~sel))
    i = int(np.sum(true & ~sel))
    return c, i


def _select_lambda(criterion, data, penalty, cfg, path, pass_seed, cv_seed) -> float:
    if criterion == "pass":
        return pass_score(data, penalty, cfg.grid, b=cfg.b, opts=cfg.opts, rng=pass_seed).lambda_hat
    if criterion == "bic":
        return bic_select(data, penalty, cfg.grid, cfg.opts, path=path).lambda_hat
    if criterion == "cp":
        return cp_select(data, penalty, cfg.grid, cfg.opts, path=path).lambda_hat
    if criterion == "gcv":
        return gcv_select(data, penalty, cfg.grid, cfg.opts, path=path).lambda_hat
    if criterion == "cv":
        return kfold_cv_select(data, penalty, cfg.grid, k=cfg.kfold, opts=cfg.opts, rng=cv_seed).lambda_hat
    raise ValueError(f"unknown criterion {criterion!r}")


def run_replicate(cfg: ScenarioConfig, replicate_index: int) -> ReplicateResult:
    """One dataset, every configured (criterion x penalty) cell.

    The dataset comes from a substream keyed by (master_seed, index) and is
    shared across all cells; per-cell failures are recorded without
    touching the other cells.
    """
    rep_seed = child_seed(np.random.SeedSequence(cfg.master_seed), replicate_index)
    rng_data = generator(child_seed(rep_seed, 0))
    pass_seed = child_seed(rep_seed, 1)
    cv_seed = child_seed(rep_seed, 2)

    tm = cfg.true_model
    x = gen_ar1_design(cfg.n, tm.p, tm.rho, rng_data)
    y = gen_response(x, tm, rng_data)
    data, _ = center_data(Dataset(x, y))

    truth = tm.true_support
    cells: dict[tuple[str, str], CellResult] = {}
    failures: dict[tuple[str, str], str] = {}
    for pen_name in cfg.penalties:
        penalty = penalty_from_name(pen_name, cfg.scad_a)
        try:
            path = fit_path(data, penalty, cfg.grid, cfg.opts)
        except Exception as exc:
            for crit in cfg.criteria:
                failures[(crit, pen_name)] = f"path fit failed: {exc}"
            continue
        at = {float(lam): k for k, lam in enumerate(cfg.grid)}
        for crit in cfg.criteria:
            try:
                lam = _select_lambda(crit, data, penalty, cfg, path, pass_seed, cv_seed)
                coef = path[at[lam]]
                support = active_set(coef, cfg.opts.zero_tol)
                refit = ols_fit(data, support)
                c, i = zero_counts(support, truth)
                cells[(crit, pen_name)] = CellResult(
                    lambda_hat=lam,
                    support=support,
                    refit=refit,
                    rpe=rpe(refit, tm),
                    exact_match=support == truth,
                    c_zeros=c,
                    i_zeros=i,
                    size=support.size,
                )
            except Exception as exc:
                failures[(crit, pen_name)] = str(exc)
    return ReplicateResult(index=replicate_index, cells=cells, failures=failures)


def _job(args):
    cfg, index = args
    return run_replicate(cfg, index)


def run_scenario(cfg: ScenarioConfig, workers: int | None = None) -> SummaryTable:
    """Run all replicates and aggregate per-cell means.

    Output is identical for any worker count: replicates own index-keyed
    substreams and are aggregated in index order.
    """
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    indices = range(cfg.replicates)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(_job, ((cfg, i) for i in indices)))
    else:
        reps = [run_replicate(cfg, i) for i in indices]
    reps.sort(key=lambda r: r.index)

    cells: dict[tuple[str, str], CellSummary] = {}
    for crit in cfg.criteria:
        for pen in cfg.penalties:
            key = (crit, pen)
            oks = [r.cells[key] for r in reps if key in r.cells]
            n_fail = sum(1 for r in reps if key in r.failures)
            if oks:
                cells[key] = CellSummary(
                    pct=float(np.mean([c.exact_match for c in oks])),
                    mean_rpe=float(np.mean([c.rpe for c in oks])),
                    mean_c=float(np.mean([c.c_zeros for c in oks])),
                    mean_i=float(np.mean([c.i_zeros for c in oks])),
                    mean_size=float(np.mean([c.size for c in oks])),
                    ok=len(oks),
                    failures=n_fail,
                )
            else:
                cells[key] = CellSummary(
                    pct=math.nan,
                    mean_rpe=math.nan,
                    mean_c=math.nan,
                    mean_i=math.nan,
                    mean_size=math.nan,
                    ok=0,
                    failures=n_fail,
                )
    return SummaryTable(config=cfg, cells=cells, replicates=reps)


# ---------------------------------------------------------------------------
# Scenario presets
# ---------------------------------------------------------------------------

_BETA_I = (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0)
_BETA_II = {
    "II.1": (3.0, 2.0, 1.5, 0.05, 0.04, 0.03, 0.02, 0.01),
    "II.2": (3.0, 2.0, 1.5, 0.1, 0.08, 0.06, 0.04, 0.02),
    "II.3": (3.0, 2.0, 1.5, 0.2, 0.16, 0.12, 0.08, 0.04),
}
_BETA_III_HEAD = (5.0, 4.0, 3.0, 2.0, 1.0)


def _beta_iii(p: int) -> np.ndarray:
    beta = np.zeros(p)
    beta[: len(_BETA_III_HEAD)] = _BETA_III_HEAD
    return beta


def resolve_scenario(name: str, n: int | None = None, **overrides) -> ScenarioConfig:
    """Build a ScenarioConfig from a preset name, optionally overriding n.

    Accepts family names ("I", "II.1", "III") and the fully qualified
    presets ("I-40", "III-200", ...).  Scenario III derives p = floor(sqrt(n)).
    Remaining keyword overrides go straight into ScenarioConfig.
    """
    family, _, suffix = name.partition("-")
    if suffix:
        if n is not None and int(suffix) != n:
            raise ValueError(f"preset {name!r} conflicts with n={n}")
        n = int(suffix)
    if family == "I":
        n = 40 if n is None else n
        tm = TrueModel(beta=np.array(_BETA_I), rho=0.5, sigma=1.0)
    elif family in _BETA_II:
        n = 40 if n is None else n
        tm = TrueModel(beta=np.array(_BETA_II[family]), rho=0.5, sigma=1.0)
    elif family == "III":
        n = 100 if n is None else n
        p = math.isqrt(n)
        if p < len(_BETA_III_HEAD):
            raise ValueError("scenario III needs n >= 25 so that floor(sqrt(n)) covers the signal")
        tm = TrueModel(beta=_beta_iii(p), rho=0.5, sigma=1.0)
    else:
        raise ValueError(f"unknown scenario {name!r}")
    resolved = family if family in _BETA_II else f"{family}-{n}"
    return ScenarioConfig(true_model=tm, n=n, name=resolved, **overrides)


def scenario_presets() -> dict[str, ScenarioConfig]:
    """The printed simulation settings: I at n in {40,60,80}, II.1-II.3, III cases."""
    presets = {}
    for n in (40, 60, 80):
        presets[f"I-{n}"] = resolve_scenario("I", n=n)
    for name in _BETA_II:
        presets[name] = resolve_scenario(name)
    for n in (100, 200, 400):
        presets[f"III-{n}"] = resolve_scenario("III", n=n)
    return presets


# ---------------------------------------------------------------------------
# Emission: CSV and aligned text
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".10g")
    return str(v)


def _config_header(cfg: ScenarioConfig) -> list[str]:
    grid = cfg.grid
    return [
        "# passreg summary v1",
        f"# scenario={cfg.name} n={cfg.n} p={cfg.true_model.p} "
        f"rho={_fmt(cfg.true_model.rho)} sigma={_fmt(cfg.true_model.sigma)}",
        f"# replicates={cfg.replicates} b={cfg.b} kfold={cfg.kfold} seed={cfg.master_seed} scad_a={_fmt(cfg.scad_a)}",
        f"# grid_min={_fmt(float(grid.min()))} grid_max={_fmt(float(grid.max()))} grid_count={grid.size}",
        f"# penalties={','.join(cfg.penalties)} criteria={','.join(cfg.criteria)}",
        "# beta=" + ",".join(_fmt(float(v)) for v in cfg.true_model.beta),
    ]


def summary_csv(table: SummaryTable) -> str:
    """Aggregated metrics as CSV with the effective configuration as # headers."""
    cfg = table.config
    out = io.StringIO()
    for line in _config_header(cfg):
        out.write(line + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["criterion", "penalty", "pct", "mean_rpe", "mean_c", "mean_i", "mean_size", "ok", "failures"])
    for crit in cfg.criteria:
        for pen in cfg.penalties:
            s = table.cells[(crit, pen)]
            writer.writerow(
                [crit, pen, _fmt(s.pct), _fmt(s.mean_rpe), _fmt(s.mean_c), _fmt(s.mean_i), _fmt(s.mean_size), s.ok, s.failures]
            )
    return out.getvalue()


def load_summary_csv(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse summary_csv output back into (header metadata, rows)."""
    meta: dict[str, str] = {}
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, _, value = token.partition("=")
                    meta[key] = value
        elif line.strip():
            body.append(line)
    rows = list(csv.DictReader(body))
    return meta, rows


def replicate_csv(table: SummaryTable) -> str:
    """Per-replicate records; failed cells keep their key columns, metrics empty."""
    cfg = table.config
    out = io.StringIO()
    for line in _config_header(cfg):
        out.write(line + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPLICATE_CSV_COLUMNS)
    for rep in table.replicates:
        for crit in cfg.criteria:
            for pen in cfg.penalties:
                key = (crit, pen)
                if key in rep.cells:
                    cell = rep.cells[key]
                    writer.writerow(
                        [
                            cfg.name,
                            crit,
                            pen,
                            rep.index,
                            _fmt(cell.lambda_hat),
                            cell.size,
                            int(cell.exact_match),
                            cell.c_zeros,
                            cell.i_zeros,
                            _fmt(cell.rpe),
                        ]
                    )
                elif key in rep.failures:
                    writer.writerow([cfg.name, crit, pen, rep.index, "", "", "", "", "", ""])
    return out.getvalue()


def format_table(table: SummaryTable) -> str:
    """Aligned text report with criteria as column groups and penalties as rows."""
    cfg = table.config
    lines = _config_header(cfg)

    def block(title: str, pick) -> list[str]:
        width = 14
        head = "penalty".ljust(9) + "".join(c.rjust(width) for c in cfg.criteria)
        rows = [f"== {title} ==", head]
        for pen in cfg.penalties:
            row = pen.ljust(9)
            for crit in cfg.criteria:
                s = table.cells[(crit, pen)]
                row += pick(s).rjust(width)
            rows.append(row)
        return rows

    lines += [""]
    lines += block("PCT / RPE", lambda s: f"{s.pct:.2f}/{s.mean_rpe:.3f}")
    lines += [""]
    lines += block("C / I", lambda s: f"{s.mean_c:.2f}/{s.mean_i:.2f}")
    lines += [""]
    lines += block("SIZE / RPE", lambda s: f"{s.mean_size:.2f}/{s.mean_rpe:.3f}")
    failed = {k: s.failures for k, s in table.cells.items() if s.failures}
    if failed:
        lines += [""]
        lines += ["failures: " + " ".join(f"{c}/{p}={v}" for (c, p), v in sorted(failed.items()))]
    return "\n".join(lines) + "\n"
