"""Experiment engine: seeded Monte Carlo, statistics and threshold fits.

One experiment sweeps a grid of physical error rates for one code and
schedule, running independent trials whose RNG streams derive from
(seed, grid index, trial index) alone, so failure counts are identical for
any worker count. Three experiment kinds are supported:

* ``circuit``: full syndrome-extraction circuit under circuit-level noise,
  decoded on both check bases of the gauge-fixing-aware matching graph.
* ``perfect``: iid data errors with perfect measurements (2D graph).
* ``phenomenological``: iid data and measurement errors (3D graph).

Results are emitted as CSV rows with a fixed column set plus a JSON sidecar
echoing the full configuration.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats

from .circuits import Circuit, homogeneous_circuit, inhomogeneous_circuit, alternating_row_assignment
from .code import PauliOperator, SubsystemCode, build_subsystem_code
from .decoder import (
    InfeasibleMatching,
    MatchingGraph,
    build_matching_graph,
    build_perfect_graph,
    build_phenomenological_graph,
    decode,
    difference_syndrome,
    judge_failure,
)
from .noise_sim import NoiseModel, depolarising, independent, sample_run
from .symmetry import bundled_group_path, load_group
from .tessellation import build_planar, build_toric, from_group, refine_semi_hyperbolic

__all__ = [
    "ConfigError",
    "NoCrossingInRange",
    "ExperimentConfig",
    "TrialStats",
    "clopper_pearson",
    "build_code",
    "build_circuit",
    "run_experiment",
    "write_rows",
    "read_rows",
    "fit_threshold",
    "bias_threshold_combine",
    "k_adjusted_rate",
    "CSV_COLUMNS",
]

CSV_COLUMNS = [
    "family", "L_or_code", "l", "schedule", "parallelised", "noise", "p",
    "eta", "rounds", "trials", "fail_z", "fail_x", "rate_z", "rate_x",
    "ci_low", "ci_high", "seed", "wall_ms",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class NoCrossingInRange(RuntimeError):
    """The failure-rate curves do not cross inside the swept interval."""


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "toric"  # toric | planar | hyperbolic | semi_hyperbolic
    L: Optional[int] = None
    group: Optional[str] = None  # bundled name or path for hyperbolic families
    l: int = 1  # semi-hyperbolic refinement
    schedule: str = "ZX"
    inhomogeneous: bool = False  # alternating-row two-phase schedule
    parallelised: bool = True
    gauge_fixing: bool = True  # circuit graphs: split fixable detectors
    experiment: str = "circuit"  # circuit | perfect | phenomenological
    fixed: bool = False  # abstract graphs: per-triangle checks instead of stabilisers
    noise: str = "depolarising"  # depolarising | independent
    p_values: Tuple[float, ...] = ()
    eta: Optional[float] = None
    rounds: int = 1
    trials: int = 1000
    m: int = 20
    seed: int = 0
    basis: str = "both"  # circuit experiments: which matching graphs to decode
    workers: Optional[int] = None
    output: Optional[str] = None

    def validate(self) -> None:
        if self.experiment not in ("circuit", "perfect", "phenomenological"):
            raise ConfigError("unknown experiment kind %r" % self.experiment)
        if self.family not in ("toric", "planar", "hyperbolic", "semi_hyperbolic"):
            raise ConfigError("unknown code family %r" % self.family)
        if self.family in ("toric", "planar") and not self.L:
            raise ConfigError("family %r needs --L" % self.family)
        if self.family in ("hyperbolic", "semi_hyperbolic") and not self.group:
            raise ConfigError("family %r needs a symmetry group" % self.family)
        if not self.p_values:
            raise ConfigError("empty error-rate sweep")
        if any(not 0.0 <= p < 0.5 for p in self.p_values):
            raise ConfigError("error rates must lie in [0, 0.5)")
        if self.noise == "independent" and self.eta is None:
            raise ConfigError("independent noise needs --eta")
        if self.noise not in ("depolarising", "independent"):
            raise ConfigError("unknown noise model %r" % self.noise)
        if self.trials < 1 or self.rounds < 1 or self.m < 1:
            raise ConfigError("trials, rounds and m must be positive")
        if self.basis not in ("both", "z", "x"):
            raise ConfigError("basis must be both, z or x")


@dataclass(frozen=True)
class TrialStats:
    failures_z: int
    failures_x: int
    trials: int

    @property
    def rate_z(self) -> float:
        return self.failures_z / self.trials

    @property
    def rate_x(self) -> float:
        return self.failures_x / self.trials

    def interval(self, basis: str = "z", alpha: float = 0.05) -> Tuple[float, float]:
        k = self.failures_z if basis == "z" else self.failures_x
        return clopper_pearson(k, self.trials, alpha)


def clopper_pearson(k: int, n: int, alpha: float = 0.05) -> Tuple[float, float]:
    """Exact binomial proportion confidence interval."""
    if n <= 0 or not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n with n > 0")
    lo = 0.0 if k == 0 else float(stats.beta.ppf(alpha / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - alpha / 2, k + 1, n - k))
    return lo, hi


def build_code(config: ExperimentConfig) -> Tuple[SubsystemCode, str]:
    """Construct the code for a config; returns (code, size descriptor)."""
    if config.family == "toric":
        return build_subsystem_code(build_toric(config.L)), str(config.L)
    if config.family == "planar":
        return build_subsystem_code(build_planar(config.L)), str(config.L)
    path = config.group
    if not os.path.exists(path):
        path = bundled_group_path(path)
    tess = from_group(load_group(path))
    name = os.path.splitext(os.path.basename(str(path)))[0]
    if config.family == "semi_hyperbolic":
        tess = refine_semi_hyperbolic(tess, config.l)
        name = "%s_l%d" % (name, config.l)
    return build_subsystem_code(tess), name


def build_circuit(config: ExperimentConfig, code: SubsystemCode) -> Circuit:
    if config.inhomogeneous:
        if config.family != "planar":
            raise ConfigError("inhomogeneous schedules are defined for planar codes")
        assignment = alternating_row_assignment(code, config.L)
        return inhomogeneous_circuit(code, assignment, config.rounds)
    return homogeneous_circuit(
        code, config.schedule, config.rounds, parallelised=config.parallelised
    )


def _noise(config: ExperimentConfig, p: float) -> NoiseModel:
    if config.noise == "independent":
        return independent(p, config.eta)
    return depolarising(p)


def _trial_seed(seed: int, grid: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(grid, trial))


# Per-process context for worker pools, inherited via fork.
_CTX: Dict[str, object] = {}


def _decode_with_retry(graph: MatchingGraph, defects, m: int):
    while True:
        try:
            return decode(graph, defects, m)
        except InfeasibleMatching:
            if m >= len(defects):
                raise
            m = min(2 * m, len(defects))


def _circuit_trial(seed: np.random.SeedSequence) -> Tuple[bool, bool]:
    code: SubsystemCode = _CTX["code"]
    circuit = _CTX["circuit"]
    noise = _CTX["noise"]
    m = _CTX["m"]
    record, rx, rz = sample_run(circuit, noise, seed)
    fail_z = fail_x = False
    gx: Optional[MatchingGraph] = _CTX.get("graph_x")
    gz: Optional[MatchingGraph] = _CTX.get("graph_z")
    if gx is not None:
        defects = difference_syndrome(record, gx, rx, rz)
        result = _decode_with_retry(gx, defects, m)
        total = rz ^ result.residual_z
        fail_z = judge_failure(code, PauliOperator(code.n, x=0, z=total), "z")
    if gz is not None:
        defects = difference_syndrome(record, gz, rx, rz)
        result = _decode_with_retry(gz, defects, m)
        total = rx ^ result.residual_x
        fail_x = judge_failure(code, PauliOperator(code.n, x=total, z=0), "x")
    return fail_z, fail_x


def _abstract_trial(seed: np.random.SeedSequence) -> Tuple[bool, bool]:
    graph: MatchingGraph = _CTX["graph_x"]
    m = _CTX["m"]
    probs: np.ndarray = _CTX["edge_probs"]
    rng = np.random.default_rng(seed)
    flipped = np.flatnonzero(rng.random(len(probs)) < probs)
    if len(flipped) == 0:
        return False, False
    acc: Dict[int, int] = {}
    crossing = 0
    for eid in flipped:
        e = graph.edges[int(eid)]
        crossing ^= e.logical_crossing_mask
        acc[e.u] = acc.get(e.u, 0) ^ 1
        acc[e.v] = acc.get(e.v, 0) ^ 1
    defects = sorted(
        d for d, v in acc.items() if v and not graph.detectors[d].is_boundary
    )
    result = _decode_with_retry(graph, defects, m)
    return crossing != result.logical_crossing_mask, False


def _run_batch(args: Tuple[int, int, int]) -> Tuple[int, int]:
    grid, start, stop = args
    seed = _CTX["seed"]
    trial = _CTX["trial_fn"]
    fz = fx = 0
    for t in range(start, stop):
        z, x = trial(_trial_seed(seed, grid, t))
        fz += bool(z)
        fx += bool(x)
    return fz, fx


def _worker_count(config: ExperimentConfig) -> int:
    if config.workers is not None:
        return max(1, config.workers)
    env = os.environ.get("GAUGEFIX_WORKERS")
    return max(1, int(env)) if env else 1


def _grid_context(config: ExperimentConfig, code: SubsystemCode,
                  circuit: Optional[Circuit], p: float) -> Dict[str, object]:
    ctx: Dict[str, object] = {"code": code, "m": config.m, "seed": config.seed}
    if config.experiment == "circuit":
        noise = _noise(config, p)
        ctx["circuit"] = circuit
        ctx["noise"] = noise
        if config.basis in ("both", "z"):
            ctx["graph_x"] = build_matching_graph(
                code, circuit, noise, "x", config.gauge_fixing)
        if config.basis in ("both", "x"):
            ctx["graph_z"] = build_matching_graph(
                code, circuit, noise, "z", config.gauge_fixing)
        ctx["trial_fn"] = _circuit_trial
    else:
        pauli = "x" if config.basis in ("both", "z") else "z"
        if config.experiment == "perfect":
            graph = build_perfect_graph(code, pauli, p, config.fixed)
        else:
            graph = build_phenomenological_graph(
                code, pauli, p, config.rounds, config.fixed
            )
        ctx["graph_x"] = graph
        ctx["edge_probs"] = np.array([e.flip_probability for e in graph.edges])
        ctx["trial_fn"] = _abstract_trial
    return ctx


def _result_row(config: ExperimentConfig, descriptor: str, p: float,
                fail_z: int, fail_x: int, t0: float) -> Dict[str, object]:
    st = TrialStats(fail_z, fail_x, config.trials)
    ci = st.interval("z" if config.basis != "x" else "x")
    return {
        "family": config.family,
        "L_or_code": descriptor,
        "l": config.l,
        "schedule": "L0L1" if config.inhomogeneous else config.schedule,
        "parallelised": int(config.parallelised),
        "noise": config.noise,
        "p": p,
        "eta": "" if config.eta is None else config.eta,
        "rounds": config.rounds,
        "trials": config.trials,
        "fail_z": fail_z,
        "fail_x": fail_x,
        "rate_z": st.rate_z,
        "rate_x": st.rate_x,
        "ci_low": ci[0],
        "ci_high": ci[1],
        "seed": config.seed,
        "wall_ms": round((time.monotonic() - t0) * 1000.0, 3),
    }


def run_experiment(config: ExperimentConfig) -> List[Dict[str, object]]:
    """Run the sweep and return one result row per error rate."""
    config.validate()
    code, descriptor = build_code(config)
    circuit = None
    if config.experiment == "circuit":
        circuit = build_circuit(config, code)
    workers = _worker_count(config)
    rows: List[Dict[str, object]] = []
    for grid, p in enumerate(config.p_values):
        t0 = time.monotonic()
        if p == 0.0:
            # Noiseless grid point: nothing to decode, failures are zero.
            rows.append(_result_row(config, descriptor, p, 0, 0, t0))
            continue
        global _CTX
        _CTX = _grid_context(config, code, circuit, p)
        nbatch = workers * 4 if workers > 1 else 1
        size = -(-config.trials // nbatch)
        batches = [
            (grid, start, min(start + size, config.trials))
            for start in range(0, config.trials, size)
        ]
        if workers == 1:
            results = [_run_batch(b) for b in batches]
        else:
            import multiprocessing

            with multiprocessing.get_context("fork").Pool(workers) as pool:
                results = pool.map(_run_batch, batches)
        fail_z = sum(r[0] for r in results)
        fail_x = sum(r[1] for r in results)
        rows.append(_result_row(config, descriptor, p, fail_z, fail_x, t0))
    if config.output:
        write_rows(rows, config.output, config)
    return rows


def write_rows(rows: Iterable[Dict[str, object]], path: str,
               config: Optional[ExperimentConfig] = None) -> None:
    """Write result rows as CSV, plus a JSON sidecar echoing the config."""
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in CSV_COLUMNS})
    if config is not None:
        sidecar = os.path.splitext(path)[0] + ".json"
        with open(sidecar, "w") as fh:
            json.dump(dataclasses.asdict(config), fh, indent=2, default=str)
            fh.write("\n")


def read_rows(path: str) -> List[Dict[str, object]]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            for key in ("p", "rate_z", "rate_x", "ci_low", "ci_high"):
                row[key] = float(row[key])
            for key in ("trials", "fail_z", "fail_x", "rounds",
                        "l", "parallelised", "seed"):
                row[key] = int(row[key])
            row["wall_ms"] = float(row["wall_ms"])
            if row["eta"]:
                row["eta"] = float(row["eta"])
            out.append(row)
    return out


def _curves(rows: Sequence[Dict[str, object]], rate_key: str):
    curves: Dict[str, Dict[float, float]] = {}
    for row in rows:
        curves.setdefault(str(row["L_or_code"]), {})[float(row["p"])] = float(row[rate_key])
    return {
        size: (np.array(sorted(pts)), np.array([pts[p] for p in sorted(pts)]))
        for size, pts in curves.items()
    }


def fit_threshold(rows: Sequence[Dict[str, object]], model: str = "crossing",
                  nu: Optional[float] = None, rate_key: str = "rate_z",
                  quadratic: bool = True) -> Tuple[float, float]:
    """Estimate the threshold from result rows; returns (p_th, uncertainty).

    ``crossing`` intersects each pair of per-size log-rate curves by linear
    interpolation and aggregates. ``critical_exponent`` fits
    rate = A + B x + C x^2 with x = (p - p_th) L^(1/nu) by least squares;
    pass ``nu`` to pin the exponent instead of fitting it.
    """
    curves = _curves(rows, rate_key)
    if len(curves) < 2:
        raise ConfigError("need at least two code sizes to fit a threshold")
    if model == "crossing":
        return _fit_crossing(curves)
    if model == "critical_exponent":
        return _fit_critical(curves, nu, quadratic)
    raise ConfigError("unknown fit model %r" % model)


def _fit_crossing(curves) -> Tuple[float, float]:
    sizes = sorted(curves)
    crossings = []
    for i in range(len(sizes)):
        for j in range(i + 1, len(sizes)):
            p1, r1 = curves[sizes[i]]
            p2, r2 = curves[sizes[j]]
            shared = np.intersect1d(p1, p2)
            shared = np.array([
                p for p in shared
                if r1[np.searchsorted(p1, p)] > 0 and r2[np.searchsorted(p2, p)] > 0
            ])
            if len(shared) < 2:
                continue
            d = np.log([dict(zip(p1, r1))[p] for p in shared]) \
                - np.log([dict(zip(p2, r2))[p] for p in shared])
            for k in range(len(shared) - 1):
                if d[k] == 0.0:
                    crossings.append(float(shared[k]))
                elif d[k] * d[k + 1] < 0:
                    f = d[k] / (d[k] - d[k + 1])
                    crossings.append(float(shared[k] + f * (shared[k + 1] - shared[k])))
    if not crossings:
        raise NoCrossingInRange("no curve pair crosses inside the sweep")
    arr = np.array(crossings)
    if len(arr) > 1:
        spread = float(arr.std(ddof=1))
    else:
        grid = next(iter(curves.values()))[0]
        spread = float(np.diff(grid).min())
    return float(arr.mean()), spread


def _fit_critical(curves, nu: Optional[float], quadratic: bool) -> Tuple[float, float]:
    ps, rates, sizes = [], [], []
    for size, (p, r) in curves.items():
        ps.append(p)
        rates.append(r)
        sizes.append(np.full(len(p), float(size)))
    p = np.concatenate(ps)
    r = np.concatenate(rates)
    L = np.concatenate(sizes)

    def residuals(theta):
        pth = theta[0]
        inv_nu = 1.0 / theta[1] if nu is None else 1.0 / nu
        x = (p - pth) * L ** inv_nu
        cols = [np.ones_like(x), x] + ([x * x] if quadratic else [])
        A = np.stack(cols, axis=1)
        coef, *_ = np.linalg.lstsq(A, r, rcond=None)
        return A @ coef - r

    p0 = [float(np.median(p))] + ([] if nu is not None else [1.0])
    fit = optimize.least_squares(residuals, p0, method="lm")
    if not fit.success:
        raise NoCrossingInRange("critical-exponent fit did not converge")
    res = fit.fun
    dof = max(1, len(res) - (len(p0) + (3 if quadratic else 2)))
    try:
        cov = np.linalg.inv(fit.jac.T @ fit.jac) * (res @ res) / dof
        err = float(math.sqrt(abs(cov[0, 0])))
    except np.linalg.LinAlgError:
        err = float("nan")
    return float(fit.x[0]), err


def bias_threshold_combine(p_z_th: float, p_x_th: float, eta: float) -> float:
    """Total-error-rate threshold of a biased schedule pair.

    Converts each single-type threshold to the total error rate at which it
    is reached under bias eta and returns the smaller (the failing branch).
    """
    if not 0.0 < p_z_th < 1.0 or not 0.0 < p_x_th < 1.0:
        raise ValueError("thresholds must lie in (0, 1)")
    if eta <= 0:
        raise ValueError("bias must be positive")
    if math.isinf(eta):
        return p_z_th
    total_z = p_z_th + p_z_th * (1.0 - p_z_th) / eta
    total_x = p_x_th + p_x_th * (1.0 - p_x_th) * eta
    return min(total_z, total_x)


def k_adjusted_rate(p_log: float, copies: int) -> float:
    """Failure rate of `copies` independent code blocks, for comparing
    families at equal logical-qubit count."""
    return 1.0 - (1.0 - p_log) ** copies
