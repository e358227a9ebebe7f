"""Experiment orchestration and CSV emission for the batch harness."""

from __future__ import annotations

import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .action import SmearedActionParams, action_for, bd_truncated
from .causet import CausalSet, abundance_counts, enumerate_causal_sets, is_transitive, read_sets
from .config import ExperimentConfig
from .errors import ResourceLimitError, UsageError
from .exactbd import verify_encoding
from .mcmc import AcceptanceRule, run_chain, target_distribution
from .proposals import ParameterSample, ProposalStrategy
from .spectral import fit_scaling, gap_for, thermalization_bounds

WORKERS_ENV = "QCAUSET_WORKERS"
THERMALIZATION_ALPHA = 0.01


def package_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "0+unknown"


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def to_csv(self, cfg: ExperimentConfig) -> str:
        buf = io.StringIO()
        buf.write(
            f"# config_hash={cfg.config_hash()}, seed={cfg.seed}, version={package_version()}\n"
        )
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()


@dataclass
class ExperimentResult:
    status: int
    table: Table
    messages: list[str] = field(default_factory=list)

    def csv(self, cfg: ExperimentConfig) -> str:
        return self.table.to_csv(cfg)


def make_rule(cfg: ExperimentConfig, temperature: float) -> AcceptanceRule:
    if cfg.rule == "uniform":
        return AcceptanceRule.uniform()
    return AcceptanceRule.metropolis(
        temperature, cfg.epsilon, cfg.dimension, action_kind=cfg.action_kind
    )


def shared_samples(cfg: ExperimentConfig, index: int, strategy: ProposalStrategy) -> list[ParameterSample] | None:
    """One parameter-sample list per strategy, reused for every N and T."""
    if not strategy.is_quantum:
        return None
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, index]))
    return strategy.draw_parameter_samples(rng)


def _map(fn: Callable, jobs: Sequence) -> list:
    workers = min(worker_count(), len(jobs))
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _gap_job(job: tuple) -> tuple[float, float, float]:
    n, strategy, rule, samples = job
    g = gap_for(n, strategy, rule, samples)
    nu = target_distribution(n, rule)
    return g.delta, g.error, float(nu.min())


def _gap_rows(cfg: ExperimentConfig) -> list[tuple]:
    jobs, keys = [], []
    for i, (name, strategy) in enumerate(cfg.proposal_strategies()):
        samples = shared_samples(cfg, i, strategy)
        for n in cfg.cardinalities:
            for t in cfg.temperatures if cfg.weighted else (None,):
                rule = make_rule(cfg, t)
                jobs.append((n, strategy, rule, samples))
                keys.append((name, n, t))
    return [k + r for k, r in zip(keys, _map(_gap_job, jobs))]


def _temperature_cell(t: float | None) -> Any:
    return "" if t is None else t


def run_spectral_gap(cfg: ExperimentConfig) -> ExperimentResult:
    table = Table(("strategy", "n", "temperature", "delta", "delta_err", "t_lower", "t_upper"))
    for name, n, t, delta, err, min_nu in _gap_rows(cfg):
        if delta > 0:
            lo, hi = thermalization_bounds(min(delta, 1.0), THERMALIZATION_ALPHA, min_nu)
        else:
            lo = hi = float("inf")
        table.rows.append((name, n, _temperature_cell(t), delta, err, lo, hi))
    return ExperimentResult(0, table)


def run_sweep_n(cfg: ExperimentConfig) -> ExperimentResult:
    table = Table(("strategy", "n", "temperature", "delta", "delta_err", "k", "k_err"))
    rows = _gap_rows(cfg)
    temps = cfg.temperatures if cfg.weighted else (None,)
    msgs = []
    for name, _ in cfg.proposal_strategies():
        for t in temps:
            sel = [r for r in rows if r[0] == name and r[2] == t]
            fit = fit_scaling([r[1] for r in sel], [r[3] for r in sel])
            msgs.append(f"{name} T={t}: k = {fit.k:.4g} +/- {fit.k_error:.2g}")
            for r in sel:
                table.rows.append((name, r[1], _temperature_cell(t), r[3], r[4], fit.k, fit.k_error))
    return ExperimentResult(0, table, msgs)


def run_sweep_t(cfg: ExperimentConfig) -> ExperimentResult:
    if not cfg.weighted:
        raise UsageError("sweep-T needs rule: metropolis")
    table = Table(("strategy", "n", "temperature", "delta", "delta_err"))
    for name, n, t, delta, err, _ in _gap_rows(cfg):
        table.rows.append((name, n, t, delta, err))
    return ExperimentResult(0, table)


def run_sample(cfg: ExperimentConfig) -> ExperimentResult:
    table = Table(("strategy", "n", "temperature", "step", "set", "action", "accepted"))
    msgs = []
    for i, (name, strategy) in enumerate(cfg.proposal_strategies()):
        for n in cfg.cardinalities:
            init = CausalSet.from_string(cfg.initial) if cfg.initial else CausalSet.antichain(n)
            if init.n != n:
                raise UsageError(f"initial set has {init.n} elements, expected {n}")
            for j, t in enumerate(cfg.temperatures if cfg.weighted else (None,)):
                rule = make_rule(cfg, t)
                seed = np.random.SeedSequence([cfg.seed, i, n, j])
                res = run_chain(
                    init, strategy, rule, cfg.steps, cfg.burn_in, cfg.thin, seed, record_trace=True
                )
                msgs.append(
                    f"{name} n={n} T={t}: acceptance {res.acceptance_rate:.3f}, "
                    f"invalid {res.invalid_rate:.3f}"
                )
                for step, bits, act, acc in res.trace:
                    s = CausalSet.from_bits(n, bits)
                    table.rows.append((name, n, _temperature_cell(t), step, s, act, int(acc)))
    return ExperimentResult(0, table, msgs)


def run_enumerate(cfg: ExperimentConfig) -> ExperimentResult:
    table = Table(("n", "index", "set", "relations"))
    for n in cfg.cardinalities:
        for idx, s in enumerate(enumerate_causal_sets(n, cfg.max_cardinality)):
            table.rows.append((n, idx, s, bin(s.bits).count("1")))
    return ExperimentResult(0, table)


def run_action(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.input:
        raw = read_sets(Path(cfg.input).read_text())
        bad = [str(m) for m in raw if not is_transitive(m)]
        if bad:
            raise UsageError(f"input contains non-transitive configurations: {', '.join(bad[:5])}")
        sets = [CausalSet(m) for m in raw]
    else:
        sets = [s for n in cfg.cardinalities for s in enumerate_causal_sets(n, cfg.max_cardinality)]
    params = SmearedActionParams(epsilon=cfg.epsilon, dimension=cfg.dimension)
    smeared = action_for(params, "smeared")
    table = Table(("set", "n", "abundances", "action", "truncated", "truncation_error"))
    for s in sets:
        exact = smeared(s)
        trunc = bd_truncated(s, cfg.epsilon, cfg.dimension)
        counts = ";".join(str(c) for c in abundance_counts(s.bits, s.n))
        table.rows.append((s, s.n, counts, exact, trunc, trunc - exact))
    return ExperimentResult(0, table)


def run_exactbd(cfg: ExperimentConfig) -> ExperimentResult:
    table = Table(
        ("n", "qubits", "lambda", "sets", "corruptions", "min_increase", "min_safe_lambda", "status")
    )
    status, msgs = 0, []
    for n in cfg.cardinalities:
        rep = verify_encoding(n, cfg.lam)
        table.rows.append(
            (n, rep.qubit_count, rep.lam, rep.sets_checked, rep.corruptions_checked,
             rep.min_energy_increase, rep.min_safe_lambda, "PASS" if rep.passed else "FAIL")
        )
        msgs.append(rep.summary())
        if not rep.passed:
            status = 3
            msgs.extend(f"  mismatch {s}: {a} != {b}" for s, a, b in rep.mismatches)
            msgs.extend(f"  corruption {s} bit {b}: dE = {d}" for s, b, d in rep.corruption_failures)
    return ExperimentResult(status, table, msgs)


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "enumerate": run_enumerate,
    "action": run_action,
    "sample": run_sample,
    "spectral-gap": run_spectral_gap,
    "sweep-N": run_sweep_n,
    "sweep-T": run_sweep_t,
    "exactbd-verify": run_exactbd,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run one configured experiment; the CSV is written when ``cfg.output`` is set."""
    for n in cfg.cardinalities:
        if n > cfg.max_cardinality:
            raise ResourceLimitError(
                f"n={n} exceeds the configured cardinality cap {cfg.max_cardinality}"
            )
    result = RUNNERS[cfg.experiment](cfg)
    if cfg.output:
        Path(cfg.output).write_text(result.csv(cfg))
    return result
