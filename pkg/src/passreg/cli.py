"""Command-line front end for dataset-driven selection and scenario benchmarks.

Progress goes to stderr; results go to stdout or --output.  Every run
echoes its full effective configuration (defaults included) in # header
lines, so any output is reproducible from its own header.  Outputs carry
no timestamps: the same seed yields byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

import numpy as np

from .model import (
    ConstantColumnError,
    Dataset,
    FitOptions,
    center_data,
    lambda_grid,
)
from .selection import (
    bic_select,
    cp_select,
    gcv_select,
    kfold_cv_select,
    pass_score,
    select_final_model,
)
from .simbench import (
    CRITERION_NAMES,
    PENALTY_NAMES,
    ScenarioConfig,
    TrueModel,
    format_table,
    penalty_from_name,
    replicate_csv,
    resolve_scenario,
    run_scenario,
    summary_csv,
)


@dataclass
class RunConfig:
    """Validated CLI configuration for one run."""

    mode: str
    input_path: str | None = None
    response: str | None = None
    penalties: tuple[str, ...] = ("scad",)
    criteria: tuple[str, ...] = ("pass",)
    grid_min_exp: float = -2.0
    grid_max_exp: float = 2.0
    grid_count: int = 100
    b: int = 20
    seed: int = 0
    scad_a: float = 3.7
    output_path: str | None = None
    output_format: str = "table"
    scenario: str | None = None
    n: int | None = None
    replicates: int = 100
    replicate_out: str | None = None
    beta: tuple[float, ...] | None = None
    rho: float = 0.5
    sigma: float = 1.0

    def grid(self) -> np.ndarray:
        return lambda_grid(self.grid_min_exp, self.grid_max_exp, self.grid_count)


def _comma_list(raw: str, allowed: tuple[str, ...], flag: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in raw.split(",") if s.strip())
    if not names:
        raise argparse.ArgumentTypeError(f"{flag}: empty list")
    for name in names:
        if name not in allowed:
            raise argparse.ArgumentTypeError(f"{flag}: unknown value {name!r} (choose from {', '.join(allowed)})")
    return names


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-min-exp", type=float, default=-2.0, help="log10 of the smallest lambda")
    parser.add_argument("--grid-max-exp", type=float, default=2.0, help="log10 of the largest lambda")
    parser.add_argument("--grid-count", type=int, default=100, help="number of grid points")
    parser.add_argument("--b", type=int, default=20, help="number of random half-partitions")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--scad-a", type=float, default=3.7, help="SCAD shape parameter")
    parser.add_argument("--output", default=None, help="write results here instead of stdout")
    parser.add_argument("--format", choices=("csv", "table"), default="table", help="output format")


def parse_args(argv) -> RunConfig:
    parser = argparse.ArgumentParser(prog="passreg", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)

    p_sel = sub.add_parser("select", help="select lambda on a CSV dataset")
    p_sel.add_argument("--input", required=True, help="CSV file with one header row")
    p_sel.add_argument("--response", required=True, help="response column name or zero-based index")
    p_sel.add_argument("--penalty", default="scad", help="penalty: lasso, alasso, or scad")
    p_sel.add_argument("--criterion", default="pass", help="comma-separated criteria to run")
    _add_common(p_sel)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    p_sim.add_argument("--scenario", default=None, help="preset name: I, I-40, II.1, III, III-200, ...")
    p_sim.add_argument("--n", type=int, default=None, help="sample size (overrides the preset)")
    p_sim.add_argument("--replicates", type=int, default=100)
    p_sim.add_argument("--penalty", default=",".join(PENALTY_NAMES), help="comma-separated penalties")
    p_sim.add_argument("--criterion", default=",".join(CRITERION_NAMES), help="comma-separated criteria")
    p_sim.add_argument("--beta", default=None, help="custom true coefficients, comma-separated")
    p_sim.add_argument("--rho", type=float, default=0.5, help="AR(1) correlation of the design")
    p_sim.add_argument("--sigma", type=float, default=1.0, help="noise standard deviation")
    p_sim.add_argument("--replicate-out", default=None, help="also write per-replicate records here")
    _add_common(p_sim)

    ns = parser.parse_args(argv)
    if ns.grid_count < 1:
        parser.error("--grid-count must be >= 1")
    if not (math.isfinite(ns.grid_min_exp) and math.isfinite(ns.grid_max_exp)):
        parser.error("--grid-min-exp/--grid-max-exp must be finite")
    if ns.b < 1:
        parser.error("--b must be >= 1")

    if ns.mode == "select":
        try:
            penalties = _comma_list(ns.penalty, PENALTY_NAMES, "--penalty")
            criteria = _comma_list(ns.criterion, CRITERION_NAMES, "--criterion")
        except argparse.ArgumentTypeError as exc:
            parser.error(str(exc))
        if len(penalties) != 1:
            parser.error("--penalty: select mode takes exactly one penalty")
        return RunConfig(
            mode="select",
            input_path=ns.input,
            response=ns.response,
            penalties=penalties,
            criteria=criteria,
            grid_min_exp=ns.grid_min_exp,
            grid_max_exp=ns.grid_max_exp,
            grid_count=ns.grid_count,
            b=ns.b,
            seed=ns.seed,
            scad_a=ns.scad_a,
            output_path=ns.output,
            output_format=ns.format,
        )

    try:
        penalties = _comma_list(ns.penalty, PENALTY_NAMES, "--penalty")
        criteria = _comma_list(ns.criterion, CRITERION_NAMES, "--criterion")
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    beta = None
    if ns.beta is not None:
        try:
            beta = tuple(float(v) for v in ns.beta.split(","))
        except ValueError:
            parser.error("--beta: expected comma-separated numbers")
    if ns.scenario is None and beta is None:
        parser.error("simulate needs --scenario or a custom --beta")
    if ns.scenario is not None and beta is not None:
        parser.error("--scenario and --beta are mutually exclusive")
    if beta is not None and ns.n is None:
        parser.error("--beta needs --n")
    if ns.replicates < 1:
        parser.error("--replicates must be >= 1")
    return RunConfig(
        mode="simulate",
        penalties=penalties,
        criteria=criteria,
        grid_min_exp=ns.grid_min_exp,
        grid_max_exp=ns.grid_max_exp,
        grid_count=ns.grid_count,
        b=ns.b,
        seed=ns.seed,
        scad_a=ns.scad_a,
        output_path=ns.output,
        output_format=ns.format,
        scenario=ns.scenario,
        n=ns.n,
        replicates=ns.replicates,
        replicate_out=ns.replicate_out,
        beta=beta,
        rho=ns.rho,
        sigma=ns.sigma,
    )


def _load_csv(path: str, response: str) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Parse a delimited file with one header row into (x, y, covariate names)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        values = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
            parsed = []
            for name, raw in zip(header, row):
                try:
                    parsed.append(float(raw))
                except ValueError:
                    raise ValueError(
                        f"{path}: row {lineno}: could not parse {raw.strip()!r} in column {name!r}"
                    ) from None
            values.append(parsed)
    if not values:
        raise ValueError(f"{path}: no data rows")
    matrix = np.array(values, dtype=float)

    try:
        resp_idx = int(response)
    except ValueError:
        if response not in header:
            raise ValueError(f"response column {response!r} not found (columns: {', '.join(header)})") from None
        resp_idx = header.index(response)
    if not 0 <= resp_idx < len(header):
        raise ValueError(f"response index {resp_idx} out of range for {len(header)} columns")
    keep = [j for j in range(len(header)) if j != resp_idx]
    if not keep:
        raise ValueError("no covariate columns besides the response")
    names = [header[j] for j in keep]
    return matrix[:, keep], matrix[:, resp_idx], names


def _criterion_trace(criterion, data, penalty, grid, opts, b, seed):
    if criterion == "pass":
        res = pass_score(data, penalty, grid, b=b, opts=opts, rng=seed)
        return res.score, res.lambda_hat
    if criterion == "bic":
        res = bic_select(data, penalty, grid, opts)
    elif criterion == "cp":
        res = cp_select(data, penalty, grid, opts)
    elif criterion == "gcv":
        res = gcv_select(data, penalty, grid, opts)
    elif criterion == "cv":
        res = kfold_cv_select(data, penalty, grid, opts=opts, rng=seed)
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    return res.value, res.lambda_hat


def _g(v: float) -> str:
    return format(float(v), ".10g")


def _select_header(cfg: RunConfig) -> list[str]:
    return [
        "# passreg select v1",
        f"# input={cfg.input_path} response={cfg.response} penalty={cfg.penalties[0]} "
        f"criteria={','.join(cfg.criteria)}",
        f"# grid_min_exp={_g(cfg.grid_min_exp)} grid_max_exp={_g(cfg.grid_max_exp)} "
        f"grid_count={cfg.grid_count} b={cfg.b} seed={cfg.seed} scad_a={_g(cfg.scad_a)}",
        "# note: coefficients are on the centered scale (no intercept)",
    ]


def run_select(cfg: RunConfig) -> int:
    x, y, names = _load_csv(cfg.input_path, cfg.response)
    if x.shape[0] < 4:
        raise ValueError(f"need at least 4 rows, got {x.shape[0]}")
    data, _ = center_data(Dataset(x, y))
    spreads = np.sqrt(np.mean(data.x**2, axis=0))
    flat = np.flatnonzero(~(spreads > 0))
    if flat.size:
        raise ConstantColumnError(
            f"column {names[int(flat[0])]!r} is constant and cannot be standardized"
        )

    penalty = penalty_from_name(cfg.penalties[0], cfg.scad_a)
    grid = cfg.grid()
    opts = FitOptions()
    lines = _select_header(cfg)
    results = []
    for crit in cfg.criteria:
        print(f"passreg: running criterion {crit}", file=sys.stderr)
        trace, lam_hat = _criterion_trace(crit, data, penalty, grid, opts, cfg.b, cfg.seed)
        support, refit = select_final_model(data, penalty, lam_hat, opts)
        sel_names = [names[j] for j in support.indices]
        lines.append(f"# selected {crit} lambda={_g(lam_hat)} support={','.join(sel_names)}")
        results.append((crit, trace, lam_hat, support, refit, sel_names))

    out = io.StringIO()
    for line in lines:
        out.write(line + "\n")
    if cfg.output_format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["criterion", "kind", "lambda", "column", "value"])
        for crit, trace, lam_hat, support, refit, sel_names in results:
            for lam, val in zip(grid, trace):
                writer.writerow([crit, "trace", _g(lam), "", _g(val)])
            for j, name in zip(support.indices, sel_names):
                writer.writerow([crit, "coef", "", name, _g(refit.beta[j])])
    else:
        for crit, trace, lam_hat, support, refit, sel_names in results:
            out.write(f"\ncriterion {crit}: lambda_hat={_g(lam_hat)}\n")
            out.write("selected: " + (" ".join(sel_names) if sel_names else "(none)") + "\n")
            for j, name in zip(support.indices, sel_names):
                out.write(f"  coef {name} = {_g(refit.beta[j])}\n")
            out.write("trace (lambda, value):\n")
            for lam, val in zip(grid, trace):
                out.write(f"  {_g(lam)}  {_g(val)}\n")
    _emit(out.getvalue(), cfg.output_path)
    return 0


def run_simulate(cfg: RunConfig) -> int:
    overrides = dict(
        replicates=cfg.replicates,
        b=cfg.b,
        penalties=cfg.penalties,
        criteria=cfg.criteria,
        master_seed=cfg.seed,
        scad_a=cfg.scad_a,
        grid=cfg.grid(),
    )
    if cfg.scenario is not None:
        scenario = resolve_scenario(cfg.scenario, n=cfg.n, **overrides)
    else:
        tm = TrueModel(beta=np.array(cfg.beta), rho=cfg.rho, sigma=cfg.sigma)
        scenario = ScenarioConfig(true_model=tm, n=cfg.n, name="custom", **overrides)

    print(
        f"passreg: scenario {scenario.name} n={scenario.n} p={scenario.true_model.p} "
        f"replicates={scenario.replicates} seed={scenario.master_seed}",
        file=sys.stderr,
    )
    table = run_scenario(scenario)
    text = summary_csv(table) if cfg.output_format == "csv" else format_table(table)
    _emit(text, cfg.output_path)
    if cfg.replicate_out:
        with open(cfg.replicate_out, "w") as fh:
            fh.write(replicate_csv(table))
    n_failures = sum(s.failures for s in table.cells.values())
    if n_failures:
        print(f"passreg: {n_failures} failed cell(s)", file=sys.stderr)
        return 1
    return 0


def _emit(text: str, output_path: str | None) -> None:
    if output_path:
        with open(output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    cfg = parse_args(argv if argv is not None else sys.argv[1:])
    try:
        if cfg.mode == "select":
            return run_select(cfg)
        return run_simulate(cfg)
    except (ValueError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"passreg: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
