"""Experiment runner: algorithm x benchmark x seeds under a virtual clock.

Trace CSVs use the shortest round-trip decimal representation (Python
``repr``), UTF-8 and LF line endings so reruns diff byte-for-byte.
Virtual time advances as ``t_next = (t + cost) + compute`` in exactly
that float order; consumers reconstructing the clock walk must use the
same expression to match bit-exactly.
"""

import dataclasses
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import benchmarks, kernels, theory
from .algorithms import (OptimizerConfig, SimulatedClock, WallClock,
                         make_optimizer, optimizer_names)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ClockConfig:
    mode: str = "simulated"          # "simulated" | "measured"
    r0: float = 0.05                 # modeled compute floor, seconds
    gamma: float = 1e-6              # cubic compute coefficient

    def __post_init__(self):
        if self.mode not in ("simulated", "measured"):
            raise ValueError("clock mode must be 'simulated' or 'measured'")

    def make(self):
        if self.mode == "measured":
            return WallClock()
        return SimulatedClock(theory.cubic_response(self.r0, self.gamma))


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: str
    algorithm: str
    seeds: tuple
    horizon: float = benchmarks.HORIZON
    warmup: int = 15
    clock: ClockConfig = field(default_factory=ClockConfig)
    algorithm_params: dict = field(default_factory=dict)
    output_dir: str = "results"

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.warmup < 0:
            raise ValueError("warmup must be non-negative")
        if self.algorithm.lower() not in optimizer_names():
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        benchmarks.get_benchmark(self.benchmark)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    schema = raw.pop("schema", None)
    if schema != SCHEMA_VERSION:
        raise ValueError(
            f"config schema {schema!r} not supported (expected {SCHEMA_VERSION})")
    clock = ClockConfig(**raw.pop("clock", {}))
    algorithm = raw.pop("algorithm")
    if isinstance(algorithm, dict):
        params = algorithm.get("params", {})
        name = algorithm["name"]
    else:
        name, params = algorithm, raw.pop("algorithm_params", {})
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(algorithm=name, algorithm_params=params,
                            clock=clock, seeds=tuple(raw.pop("seeds")), **raw)


def _optimizer_config(config):
    params = dict(config.algorithm_params)
    params.setdefault("warmup", config.warmup)
    params.setdefault("init_temporal_lengthscale", config.horizon / 10.0)
    known = {f.name for f in dataclasses.fields(OptimizerConfig)}
    unknown = set(params) - known
    if unknown:
        raise ValueError(f"unknown algorithm params: {sorted(unknown)}")
    for key in ("spatial_family", "temporal_family"):
        if key in params and isinstance(params[key], str):
            params[key] = kernels.family_from_name(params[key])
    return OptimizerConfig(**params)


@dataclass
class RegretTrace:
    """Per-iteration records of one replication."""

    benchmark: str
    algorithm: str
    seed: int
    columns: list
    rows: list

    def final_average_regret(self):
        if not self.rows:
            return math.nan
        cum = self.rows[-1][self.columns.index("cum_regret")]
        return cum / len(self.rows)


def run_single_seed(config, seed):
    """One deterministic replication; returns its trace."""
    spec = benchmarks.get_benchmark(config.benchmark)
    truth = benchmarks.GroundTruth(spec)
    clock = config.clock.make()
    opt_config = _optimizer_config(config)
    root = np.random.SeedSequence(seed)
    noise_seq, opt_seq = root.spawn(2)
    noise_rng = np.random.default_rng(noise_seq)
    optimizer = make_optimizer(config.algorithm, spec.dim, opt_config,
                               seed=opt_seq)

    def objective(x, t):
        clock.advance(spec.cost)
        return spec.evaluate(x, t, noise_rng)

    columns = (["iteration", "virtual_t"]
               + [f"x{i}" for i in range(1, spec.dim + 1)]
               + ["y", "regret", "cum_regret", "dataset_size",
                  "response_seconds"])
    rows = []
    cum = 0.0
    iteration = 0

    def do_step():
        nonlocal cum, iteration
        result = optimizer.step(objective, clock)
        regret = benchmarks.instantaneous_regret(spec, truth, result.x,
                                                 result.t)
        cum += regret
        iteration += 1
        rows.append([iteration, result.t, *[float(v) for v in result.x],
                     result.y, regret, cum, result.dataset_size,
                     result.compute_seconds])

    for _ in range(config.warmup):
        do_step()
    while clock.now() < config.horizon:
        do_step()

    return RegretTrace(benchmark=config.benchmark, algorithm=config.algorithm,
                       seed=seed, columns=columns, rows=rows)


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _atomic_write(path, text):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_to_csv(trace):
    lines = [",".join(trace.columns)]
    for row in trace.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_trace(trace, output_dir):
    name = f"{trace.benchmark}_{trace.algorithm}_seed{trace.seed}.csv"
    path = os.path.join(output_dir, name)
    _atomic_write(path, trace_to_csv(trace))
    return path


def run(config):
    """All replications of one experiment; writes one trace CSV per seed
    plus a summary JSON with the mean final average regret and its
    standard error across seeds."""
    os.makedirs(config.output_dir, exist_ok=True)
    traces = [run_single_seed(config, seed) for seed in config.seeds]
    for trace in traces:
        write_trace(trace, config.output_dir)
    finals = np.array([t.final_average_regret() for t in traces])
    stderr = (float(finals.std(ddof=1) / math.sqrt(len(finals)))
              if len(finals) > 1 else 0.0)
    summary = {
        "schema": SCHEMA_VERSION,
        "benchmark": config.benchmark,
        "algorithm": config.algorithm,
        "seeds": list(config.seeds),
        "final_average_regret_per_seed": [float(v) for v in finals],
        "mean_final_average_regret": float(finals.mean()),
        "stderr_final_average_regret": stderr,
    }
    path = os.path.join(config.output_dir,
                        f"{config.benchmark}_{config.algorithm}_summary.json")
    _atomic_write(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return traces


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

class AggregationError(ValueError):
    pass


def aggregate(summaries):
    """Min-max normalize mean final average regret per benchmark (best
    algorithm 0, worst 1; all 0 on a zero range) and average across
    benchmarks.  ``summaries`` maps (benchmark, algorithm) -> mean regret.
    Returns (per-benchmark dict, per-algorithm averages dict)."""
    by_benchmark = {}
    for (bench, algo), value in summaries.items():
        by_benchmark.setdefault(bench, {})[algo] = value
    normalized = {}
    for bench, scores in by_benchmark.items():
        if len(scores) < 2:
            raise AggregationError(
                f"benchmark {bench!r} has fewer than 2 algorithms; "
                "normalization undefined")
        lo, hi = min(scores.values()), max(scores.values())
        span = hi - lo
        normalized[bench] = {
            algo: 0.0 if span == 0 else (value - lo) / span
            for algo, value in scores.items()
        }
    algorithms = sorted({a for scores in normalized.values() for a in scores})
    averages = {}
    for algo in algorithms:
        values = [scores[algo] for scores in normalized.values()
                  if algo in scores]
        averages[algo] = float(np.mean(values))
    return normalized, averages


def read_summaries(input_dir):
    summaries = {}
    for root, _, files in os.walk(input_dir):
        for fname in files:
            if not fname.endswith("_summary.json"):
                continue
            with open(os.path.join(root, fname), encoding="utf-8") as fh:
                data = json.load(fh)
            key = (data["benchmark"], data["algorithm"])
            summaries[key] = data["mean_final_average_regret"]
    if not summaries:
        raise AggregationError(f"no *_summary.json files under {input_dir!r}")
    return summaries


def write_aggregate_csv(normalized, averages, path):
    lines = ["benchmark,algorithm,normalized_regret"]
    for bench in sorted(normalized):
        for algo in sorted(normalized[bench]):
            lines.append(f"{bench},{algo},{_format_cell(normalized[bench][algo])}")
    for algo in sorted(averages):
        lines.append(f"overall,{algo},{_format_cell(averages[algo])}")
    _atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Theory curves
# ---------------------------------------------------------------------------

_CURVE_FAMILIES = [
    ("matern12", kernels.MATERN12),
    ("matern32", kernels.MATERN32),
    ("matern52", kernels.MATERN52),
    ("rbf", kernels.RBF),
    ("rq2", kernels.rational_quadratic(2.0)),
]


def slope_curve_rows(frequencies=None, d=4, lipschitz=1.0):
    """Regret-slope sweep against sampling frequency, one curve per
    temporal family (unit lengthscales and signal variance)."""
    if frequencies is None:
        frequencies = np.logspace(-2, 3, 101)
    rows = []
    for name, family in _CURVE_FAMILIES:
        spec = kernels.KernelSpec(
            spatial_family=kernels.RBF, spatial_lengthscale=1.0,
            temporal_family=family, temporal_lengthscale=1.0,
            signal_variance=1.0, noise_variance=0.0)
        for f in frequencies:
            params = theory.TheoryParams(d=d, lipschitz=lipschitz, spec=spec,
                                         cost=1.0 / f)
            rows.append((float(f), theory.regret_slope(params), name))
    return rows


def usize_curve_rows(n_values=None, lengthscale=20.0):
    """Retained-correlation-norm sweep against dataset size, per temporal
    family under a cubic response time and per response model under RBF."""
    if n_values is None:
        n_values = list(range(1, 201))
    cubic = theory.cubic_response(0.05, 1e-5)
    responses = {
        "constant": theory.constant_response(0.5),
        "linear": lambda n: 0.05 + 0.05 * n,
        "cubic": cubic,
    }
    rows = []
    for name, family in _CURVE_FAMILIES:
        for n in n_values:
            rows.append((n, theory.u_norm_sq(family, lengthscale, cubic, n),
                         name, "cubic"))
    for rname, response in responses.items():
        for n in n_values:
            rows.append((n, theory.u_norm_sq(kernels.RBF, lengthscale,
                                             response, n), "rbf", rname))
    return rows


def emit_theory_curves(figure, path):
    if figure == "slope":
        lines = ["frequency_hz,epsilon_c,kernel"]
        for f, eps, name in slope_curve_rows():
            lines.append(f"{_format_cell(f)},{_format_cell(eps)},{name}")
    elif figure == "usize":
        lines = ["n,u_norm_sq,kernel,response_model"]
        for n, u, name, rname in usize_curve_rows():
            lines.append(f"{n},{_format_cell(u)},{name},{rname}")
    else:
        raise ValueError("figure must be 'slope' or 'usize'")
    _atomic_write(path, "\n".join(lines) + "\n")
