"""Config-driven experiments: evolve, write CSV outputs and a JSON summary."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import emit_csv, fmt, position_distribution, spread_series, write_atomic
from .config import ConfigError, ExperimentConfig, build_model, initial_state, output_dir
from .correspondence import check_equivalence, embed, embedding_for, project
from .errors import TruncationError
from .oracle import dense_operator, windowed_comparison
from .qlga import global_step
from .state import max_deviation, to_vector

__all__ = ["RunResult", "run_experiment", "run_oracle"]

NORM_TOL = 1e-9


@dataclass
class RunResult:
    """What a run produced; ``passed`` decides the exit code."""

    files: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _distribution_name(t: int) -> str:
    return f"distribution_t{t:04d}.csv"


def _write_summary(out: Path, result: RunResult, name: str = "summary.json") -> None:
    result.files.append(name)
    text = json.dumps(result.summary, indent=2, sort_keys=True) + "\n"
    write_atomic(out / name, text)


def _embedding(cfg: ExperimentConfig, model):
    try:
        return embedding_for(model)
    except ValueError as exc:
        raise ConfigError("representation", str(exc)) from None


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run one experiment and write its outputs.

    Raises
    ------
    ConfigError
        When the model and representation do not fit together.
    OSError
        When outputs cannot be written.
    """
    model = build_model(cfg)
    init = initial_state(cfg, model)
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    result = RunResult()
    e = _embedding(cfg, model) if cfg.representation in ("qlga", "both") else None

    # evolve the requested representation; distributions come from the walk
    # labels (directly, or by projecting the lattice-gas state)
    max_drift = abs(init.norm2() - 1)
    max_leak = 0.0
    walk = model.fresh()
    state = init if cfg.representation != "qlga" else embed(e, init)
    for t in range(1, cfg.t_max + 1):
        if cfg.representation == "qlga":
            state = global_step(state, e.rule, t - 1)
            proj = project(e, state, strict=False)
            max_leak = max(max_leak, proj.leakage)
            dist = position_distribution(proj.state)
        else:
            state = walk.step(state)
            dist = position_distribution(state)
        max_drift = max(max_drift, abs(state.norm2() - 1))
        if "distribution_per_step" in cfg.outputs:
            emit_csv(dist, out / _distribution_name(t))
            result.files.append(_distribution_name(t))

    summary = {
        "name": cfg.name,
        "model": model.kind,
        "representation": cfg.representation,
        "t_max": cfg.t_max,
        "prune_epsilon": fmt(cfg.prune_epsilon),
        "final_norm2": fmt(state.norm2()),
        "max_norm_drift": fmt(max_drift),
    }
    if cfg.prune_epsilon == 0 and max_drift >= NORM_TOL:
        result.failures.append(f"norm drift {max_drift:.3e} exceeds {NORM_TOL:g}")
    if cfg.representation == "qlga":
        summary["max_sector_leakage"] = fmt(max_leak)
        if max_leak > 1e-10:
            result.failures.append(f"sector leakage {max_leak:.3e}")

    if "spread_series" in cfg.outputs:
        series = spread_series(model, init, cfg.t_max, cfg.spread_window)
        emit_csv(series, out / "spread_series.csv")
        result.files.append("spread_series.csv")
        summary["spread_fit"] = {"window": list(series.window), "slope": fmt(series.slope),
                                 "intercept": fmt(series.intercept), "r2": fmt(series.r2)}

    if "equivalence_report" in cfg.outputs:
        report = check_equivalence(model, e, init, cfg.t_max, cfg.tolerance)
        emit_csv(report, out / "equivalence_report.csv")
        result.files.append("equivalence_report.csv")
        summary["equivalence"] = {"tolerance": fmt(cfg.tolerance),
                                  "max_deviation": fmt(report.max_deviation),
                                  "max_sector_leakage": fmt(report.max_leakage),
                                  "passed": report.passed,
                                  "diagnosis": report.diagnosis}
        if not report.passed:
            result.failures.append(report.diagnosis or
                                   f"equivalence deviation {report.max_deviation:.3e} "
                                   f">= {cfg.tolerance:g}")

    summary["passed"] = not result.failures
    summary["failures"] = list(result.failures)
    summary["files"] = sorted(result.files + ["summary.json"])
    result.summary = summary
    _write_summary(out, result)
    return result


def run_oracle(cfg: ExperimentConfig) -> RunResult:
    """Compare sparse stepping against the dense operator along the configured run.

    Periodic models use the dense matrix on the full space; 1D walks on
    ``Z`` use a ring window just wide enough to hold the support.
    Writes ``oracle_report.csv`` and ``oracle_summary.json``.
    """
    model = build_model(cfg)
    init = initial_state(cfg, model)
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    result = RunResult()
    if model.period is None:
        if model.kind == "two_d":
            raise ConfigError("model.torus", "the dense oracle needs a finite torus")
        reach = max(abs(k.x) for k in init.labels())
        radius = reach + cfg.t_max + 1
        try:
            devs = windowed_comparison(model, init, cfg.t_max, radius)
        except TruncationError as exc:
            raise ConfigError("model.period", str(exc)) from None
        mode = f"window radius {radius}"
    else:
        try:
            dense_operator(model, 0)
        except TruncationError as exc:
            raise ConfigError("model", str(exc)) from None
        walk = model.fresh()
        state = init
        vec_state = init
        devs = []
        for _ in range(cfg.t_max):
            op = dense_operator(model, walk.step_index)
            state = walk.step(state)
            vec_state = op.vector_to_state(op.matrix @ to_vector(vec_state, op.basis))
            devs.append(max_deviation(state, vec_state))
        mode = "full periodic space"
    text = "t,max_deviation\n" + "".join(f"{t},{fmt(d)}\n" for t, d in enumerate(devs, 1))
    write_atomic(out / "oracle_report.csv", text)
    result.files.append("oracle_report.csv")
    worst = max(devs, default=0.0)
    if not worst < cfg.tolerance:
        result.failures.append(f"oracle deviation {worst:.3e} >= {cfg.tolerance:g}")
    result.summary = {"name": cfg.name, "model": model.kind, "mode": mode,
                      "t_max": cfg.t_max, "tolerance": fmt(cfg.tolerance),
                      "max_deviation": fmt(worst), "passed": not result.failures,
                      "failures": list(result.failures),
                      "files": ["oracle_report.csv", "oracle_summary.json"]}
    _write_summary(out, result, "oracle_summary.json")
    return result
