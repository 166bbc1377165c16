"""Named experiments comparing the coherent and incoherent protocols.

Each experiment returns an ``ExperimentReport``.  Everything outside the
``runtime`` section is a pure function of the config (including the master
seed), so two runs produce byte-identical JSON once ``runtime`` is dropped.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import _kernels, rng
from .circuit import GATES_PER_BIT, N_ANCILLA, build_step_circuit, invert
from .coherent import (NoiseModel, QuantumState, apply_circuit_coherent, born_distribution,
                       from_density, sample_shots)
from .errors import NotApplicableError, ValidationError
from .lattice import LatticeSize, parse_density, pushforward
from .observables import (chi_square_two_sample, coarse_grain, coarse_grain_counts,
                          harmonics_gap, harmonics_sampling_bound, spectrum_gap, tv_distance)
from .stochastic import estimate_density, run_trajectories, sample_initial_cells, sample_trajectories

EXACT_TOL = 1e-12
P_VALUE_FLOOR = 1e-3
SPECTRUM_GAP_MIN = 0.4
HARMONICS_DELTA = 1e-3
BYTES_PER_AMPLITUDE = 16
BYTES_PER_TRAJECTORY = 8


@dataclass(frozen=True)
class ExperimentConfig:
    nq: int = 5
    steps: int = 10
    shots: int = 100_000
    initial: str = "gauss"
    px: float = 0.0
    pz: float = 0.0
    seed: int = 0
    coarse: int = 4
    phases: str = "zero"
    repeats: int = 1
    tv_threshold: float = 0.12
    epsilon: float = 0.05
    coherent_cap: int = 10
    fmt: str = "json"

    def validate(self, coherent: bool = True) -> "ExperimentConfig":
        if self.nq < 1:
            raise ValidationError("nq must be >= 1")
        if coherent and self.nq > self.coherent_cap:
            raise ValidationError(f"nq={self.nq} exceeds the coherent memory cap {self.coherent_cap}")
        if self.shots < 1 or self.repeats < 1:
            raise ValidationError("shots and repeats must be >= 1")
        if self.steps < 0:
            raise ValidationError("steps must be >= 0")
        for p in (self.px, self.pz):
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"probability {p!r} outside [0, 1]")
        if self.fmt not in ("json", "csv"):
            raise ValidationError(f"unknown format {self.fmt!r}")
        if self.phases not in ("zero", "random"):
            raise ValidationError(f"unknown phase policy {self.phases!r}")
        n = 1 << self.nq
        if self.coarse < 1 or n % self.coarse:
            raise ValidationError(f"coarse factor {self.coarse} does not divide N={n}")
        return self

    @property
    def min_passes(self) -> int:
        """Repeats that must pass a statistical check: 18 of 20, 9 of 10, 1 of 1."""
        return self.repeats - self.repeats // 10

    def density(self) -> np.ndarray:
        spec = self.initial
        if spec.strip().lower() == "gauss":
            n = 1 << self.nq
            spec = f"gauss:{n / 4},{n / 4},{max(n / 8, 0.5)}"
        return parse_density(spec, self.nq)


@dataclass
class ExperimentReport:
    name: str
    config: dict
    metrics: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    runtime: dict = field(default_factory=dict)
    table: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self, include_runtime: bool = True) -> dict:
        out = {"name": self.name, "config": self.config, "metrics": self.metrics,
               "verdicts": self.verdicts}
        if self.table:
            out["table"] = self.table
        if include_runtime:
            out["runtime"] = self.runtime
        return out

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.table:
            # timing columns are for plotting only; JSON keeps them under runtime
            timing = self.runtime.get("per_nq", [])
            rows = [{**row, **{k: v for k, v in t.items() if k not in row}}
                    for row, t in zip(self.table, timing)] if timing else self.table
            w.writerow(list(rows[0]))
            for row in rows:
                w.writerow(list(row.values()))
            return buf.getvalue()
        w.writerow(["section", "key", "value"])
        for section in ("metrics", "verdicts"):
            for key, value in _flatten(getattr(self, section)):
                w.writerow([section, key, value])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _flatten(d: dict, prefix: str = ""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list):
            for n, item in enumerate(v):
                if isinstance(item, dict):
                    yield from _flatten(item, f"{key}.{n}.")
                else:
                    yield f"{key}.{n}", item
        else:
            yield key, v


def _r(x: float) -> float:
    # repr round-trips; plain float keeps json output stable
    return float(x)


def _two_sample(cells_a: np.ndarray, cells_b: np.ndarray, size: LatticeSize, coarse: int) -> dict:
    ea, eb = estimate_density(cells_a, size), estimate_density(cells_b, size)
    da, db = ea.normalize(), eb.normalize()
    out = {"tv": _r(tv_distance(da, db)),
           "tv_coarse": _r(tv_distance(coarse_grain(da, coarse), coarse_grain(db, coarse))),
           "harmonics_gap": _r(harmonics_gap(da, db))}
    for tag, (x, y) in (("", (ea, eb)),
                        ("_coarse", (coarse_grain_counts(ea, coarse), coarse_grain_counts(eb, coarse)))):
        try:
            stat, p = chi_square_two_sample(x, y)
        except NotApplicableError:
            # a single occupied cell: only identical histograms count as agreement
            stat, p = None, (1.0 if np.array_equal(x.counts, y.counts) else 0.0)
        out[f"chi2{tag}"] = None if stat is None else _r(stat)
        out[f"p_value{tag}"] = _r(p)
    return out


def _protocol_samples(cfg: ExperimentConfig, d0, program, state: QuantumState, repeat: int,
                      workers: int):
    """One repeat of both protocols with independent, seed-derived randomness."""
    seed_r = rng.derive_key(cfg.seed, repeat)
    q_noise = NoiseModel(cfg.px, cfg.pz, rng.derive_key(seed_r, rng.QUANTUM))
    c_noise = NoiseModel(cfg.px, cfg.pz, rng.derive_key(seed_r, rng.CLASSICAL))
    q = sample_shots(state, program, q_noise, cfg.shots, rng.derive_key(seed_r, rng.QUANTUM, rng.SHOT),
                     workers=workers)
    c = sample_trajectories(d0, program, c_noise, cfg.shots, rng.derive_key(seed_r, rng.CLASSICAL),
                            workers=workers)
    return q.outcomes, c


def _calibrate(cfg: ExperimentConfig, exact: np.ndarray, size: LatticeSize) -> dict:
    """Same-distribution self-run: two independent seeds of the exact sampler."""
    a = sample_initial_cells(exact, cfg.shots, rng.derive_key(cfg.seed, rng.CALIBRATION, 0))
    b = sample_initial_cells(exact, cfg.shots, rng.derive_key(cfg.seed, rng.CALIBRATION, 1))
    return _two_sample(a, b, size, cfg.coarse)


def _summaries(runs: list[dict], cfg: ExperimentConfig, bound: float) -> tuple[dict, dict]:
    p_ok = sum(r["p_value"] > P_VALUE_FLOOR for r in runs)
    p_ok_coarse = sum(r["p_value_coarse"] > P_VALUE_FLOOR for r in runs)
    metrics = {
        "p_value_passes": p_ok,
        "p_value_passes_coarse": p_ok_coarse,
        "required_passes": cfg.min_passes,
        "max_tv": max(r["tv"] for r in runs),
        "max_tv_coarse": max(r["tv_coarse"] for r in runs),
        "max_harmonics_gap": max(r["harmonics_gap"] for r in runs),
    }
    verdicts = {
        "indistinguishable_chi2": p_ok >= cfg.min_passes,
        "indistinguishable_chi2_coarse": p_ok_coarse >= cfg.min_passes,
        "tv_within_threshold": metrics["max_tv"] <= cfg.tv_threshold,
        "coarse_tv_within_threshold": metrics["max_tv_coarse"] <= cfg.tv_threshold,
        "harmonics_within_bound": metrics["max_harmonics_gap"] <= bound,
    }
    return metrics, verdicts


def run_equivalence(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    cfg.validate()
    t0 = time.perf_counter()
    size = LatticeSize(cfg.nq)
    d0 = cfg.density()
    step = build_step_circuit(size)
    state = from_density(d0, cfg.phases, rng.derive_key(cfg.seed, rng.QUANTUM))
    report = ExperimentReport("equivalence", asdict(cfg))

    exact_c = pushforward(d0, cfg.steps)
    exact_q = born_distribution(apply_circuit_coherent(state, step, steps=cfg.steps))
    bound = harmonics_sampling_bound(size.N, cfg.shots, cfg.shots, HARMONICS_DELTA)
    calib = _calibrate(cfg, exact_c, size)
    m = report.metrics
    m["gates_per_step"] = len(step)
    m["exact"] = {
        "tv": _r(tv_distance(exact_q, exact_c)),
        "tv_coarse": _r(tv_distance(coarse_grain(exact_q, cfg.coarse), coarse_grain(exact_c, cfg.coarse))),
        "harmonics_gap": _r(harmonics_gap(exact_q, exact_c)),
    }
    m["calibration"] = calib
    m["harmonics_bound"] = _r(bound)
    t1 = time.perf_counter()
    runs = []
    for r in range(cfg.repeats):
        q, c = _protocol_samples(cfg, d0, step.repeat(cfg.steps), state, r, workers)
        run = _two_sample(q, c, size, cfg.coarse)
        run["classical_tv_to_noiseless"] = _r(tv_distance(estimate_density(c, size).normalize(), exact_c))
        runs.append(run)
    m["runs"] = runs
    summary, verdicts = _summaries(runs, cfg, bound)
    m.update(summary)
    v = report.verdicts
    v["calibration_tv_within_threshold"] = calib["tv"] <= cfg.tv_threshold
    v["calibration_harmonics_within_bound"] = calib["harmonics_gap"] <= bound
    if cfg.px == 0.0 and cfg.pz == 0.0:
        v["exact_tv"] = m["exact"]["tv"] <= EXACT_TOL
        v["exact_tv_coarse"] = m["exact"]["tv_coarse"] <= EXACT_TOL
        v["exact_harmonics"] = m["exact"]["harmonics_gap"] <= EXACT_TOL
    v.update(verdicts)
    report.runtime = {"workers": workers, "backend": _kernels.active_backend(),
                      "exact_seconds": t1 - t0, "sampling_seconds": time.perf_counter() - t1}
    return report


def reversal_program(size: LatticeSize, steps: int):
    if steps % 2:
        raise ValidationError(f"reversal needs an even number of steps, got {steps}")
    fwd = build_step_circuit(size)
    half = steps // 2
    return fwd.repeat(half).then(invert(fwd).repeat(half))


def run_reversal(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    cfg.validate()
    t0 = time.perf_counter()
    size = LatticeSize(cfg.nq)
    d0 = cfg.density()
    program = reversal_program(size, cfg.steps)
    state = from_density(d0, cfg.phases, rng.derive_key(cfg.seed, rng.QUANTUM))
    report = ExperimentReport("reversal", asdict(cfg))
    m, v = report.metrics, report.verdicts
    m["gates"] = len(program)

    # perfect gates: coherent Born density and the classical cell map, exhaustively
    born = born_distribution(apply_circuit_coherent(state, program))
    n = size.N
    cells = np.stack(np.meshgrid(np.arange(n), np.arange(n), indexing="ij"), -1).reshape(-1, 2)
    image = run_trajectories(cells, program, workers=workers)
    classical = np.zeros_like(d0)
    classical[image[:, 0], image[:, 1]] = d0[cells[:, 0], cells[:, 1]]
    m["perfect"] = {"coherent_tv": _r(tv_distance(born, d0)),
                    "classical_tv": _r(tv_distance(classical, d0))}
    v["perfect_coherent_restores"] = m["perfect"]["coherent_tv"] <= EXACT_TOL
    v["perfect_classical_restores"] = m["perfect"]["classical_tv"] == 0.0

    if cfg.pz > 0.0 and cfg.px == 0.0:
        gaps = []
        for k in range(min(cfg.repeats * 5, 100)):
            noise = NoiseModel(0.0, cfg.pz, rng.derive_key(cfg.seed, rng.QUANTUM, k))
            out = born_distribution(apply_circuit_coherent(state, program, noise, trajectory_seed=k))
            gaps.append(float(np.max(np.abs(out - d0))))
        m["phase_noise_max_born_gap"] = _r(max(gaps))
        v["phase_noise_irrelevant"] = max(gaps) <= EXACT_TOL

    if cfg.px > 0.0 or cfg.pz > 0.0:
        runs = []
        for r in range(cfg.repeats):
            q, c = _protocol_samples(cfg, d0, program, state, r, workers)
            run = _two_sample(q, c, size, cfg.coarse)
            run["coherent_tv_to_initial"] = _r(tv_distance(estimate_density(q, size).normalize(), d0))
            run["classical_tv_to_initial"] = _r(tv_distance(estimate_density(c, size).normalize(), d0))
            runs.append(run)
        m["runs"] = runs
        p_ok = sum(r["p_value"] > P_VALUE_FLOOR for r in runs)
        m["p_value_passes"] = p_ok
        m["required_passes"] = cfg.min_passes
        v["noisy_indistinguishable_chi2"] = p_ok >= cfg.min_passes
    report.runtime = {"workers": workers, "backend": _kernels.active_backend(),
                      "seconds": time.perf_counter() - t0}
    return report


def spectrum_pair() -> tuple[QuantumState, QuantumState]:
    """``(|0,0> + |1,0>)/sqrt2`` and ``(|0,0> - |1,0>)/sqrt2`` on the 2x2 lattice."""
    h = 1.0 / math.sqrt(2.0)
    plus = np.zeros(4, dtype=np.complex128)
    minus = np.zeros(4, dtype=np.complex128)
    plus[0] = minus[0] = h
    plus[1], minus[1] = h, -h  # flat index i + N*j: (1, 0) -> 1
    return QuantumState(1, plus), QuantumState(1, minus)


def _pair_metrics(s1: QuantumState, s2: QuantumState) -> dict:
    return {"harmonics_gap": _r(harmonics_gap(born_distribution(s1), born_distribution(s2))),
            "spectrum_gap": _r(spectrum_gap(s1, s2))}


def run_spectrum_demo(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    cfg.validate()
    t0 = time.perf_counter()
    report = ExperimentReport("spectrum", asdict(cfg))
    m, v = report.metrics, report.verdicts
    m["sign_pair_n2"] = _pair_metrics(*spectrum_pair())
    d0 = cfg.density()
    zero = from_density(d0, "zero")
    rand = from_density(d0, "random", rng.derive_key(cfg.seed, rng.QUANTUM))
    m["zero_vs_zero"] = _pair_metrics(zero, zero)
    m["random_vs_zero"] = _pair_metrics(rand, zero)
    v["sign_pair_harmonics_equal"] = m["sign_pair_n2"]["harmonics_gap"] <= EXACT_TOL
    v["sign_pair_spectra_differ"] = m["sign_pair_n2"]["spectrum_gap"] >= SPECTRUM_GAP_MIN
    v["zero_vs_zero_identical"] = (m["zero_vs_zero"]["harmonics_gap"] == 0.0
                                   and m["zero_vs_zero"]["spectrum_gap"] == 0.0)
    v["random_phase_harmonics_equal"] = m["random_vs_zero"]["harmonics_gap"] <= EXACT_TOL
    report.runtime = {"workers": workers, "backend": _kernels.active_backend(),
                      "seconds": time.perf_counter() - t0}
    return report


def _time_call(fn, min_seconds: float = 0.02, max_reps: int = 50) -> float:
    fn()  # warm-up (jit compile, caches)
    reps, t0 = 0, time.perf_counter()
    while True:
        fn()
        reps += 1
        elapsed = time.perf_counter() - t0
        if elapsed >= min_seconds or reps >= max_reps:
            return elapsed / reps


def run_resources(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Memory and time per step of both protocols for ``nq = 1 .. cfg.nq``.

    Classical sample counts target total-variation accuracy ``epsilon`` with
    ``M = ceil(K / epsilon**2)`` trajectories for ``K = N**2`` cells.
    """
    cfg.validate(coherent=False)
    report = ExperimentReport("resources", asdict(cfg))
    timing = []
    ok_gates = ok_slots = True
    for nq in range(1, cfg.nq + 1):
        size = LatticeSize(nq)
        step = build_step_circuit(size)
        coherent = nq <= cfg.coherent_cap
        width = 2 * nq + N_ANCILLA
        matched = math.ceil(size.cells / cfg.epsilon**2)
        row = {
            "nq": nq,
            "gates_per_step": len(step),
            "gate_bound": GATES_PER_BIT * nq,
            "coherent_amplitude_slots": size.cells if coherent else None,
            "coherent_working_slots": (1 << width) if coherent else None,
            "coherent_bytes": BYTES_PER_AMPLITUDE * (1 << width) if coherent else None,
            "classical_bytes_per_trajectory": BYTES_PER_TRAJECTORY,
            "classical_matched_trajectories": matched,
        }
        ok_gates &= row["gates_per_step"] <= row["gate_bound"]
        ok_slots &= (not coherent) or row["coherent_amplitude_slots"] == 4**nq
        report.table.append(row)

        t = {"nq": nq}
        if coherent:
            state = from_density(parse_density("uniform", size), "zero")
            t["coherent_step_seconds"] = _time_call(lambda: apply_circuit_coherent(state, step))
        else:
            t["coherent_step_seconds"] = None
        probe = min(cfg.shots, 10_000)
        starts = sample_initial_cells(parse_density("uniform", size), probe, cfg.seed)
        noise = NoiseModel(cfg.px, 0.0, cfg.seed)
        per = _time_call(lambda: run_trajectories(starts, step, 1, noise, workers=workers)) / probe
        t["classical_trajectory_step_seconds"] = per
        t["classical_matched_step_seconds"] = per * matched
        timing.append(t)
    report.metrics["gate_constant"] = GATES_PER_BIT
    report.metrics["rows"] = len(report.table)
    report.verdicts["gate_count_linear"] = bool(ok_gates)
    report.verdicts["amplitude_slots_n_squared"] = bool(ok_slots)
    report.verdicts["classical_memory_constant"] = len({r["classical_bytes_per_trajectory"]
                                                        for r in report.table}) == 1
    coh = [t["coherent_step_seconds"] for t in timing if t["coherent_step_seconds"] is not None]
    report.runtime = {"workers": workers, "backend": _kernels.active_backend(), "per_nq": timing,
                      "coherent_time_monotone": all(a <= b for a, b in zip(coh, coh[1:]))}
    return report


EXPERIMENTS = {
    "equivalence": run_equivalence,
    "reversal": run_reversal,
    "spectrum": run_spectrum_demo,
    "resources": run_resources,
}
