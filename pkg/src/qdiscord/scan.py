"""Experiment harness: random-state deviation scans, step-size sensitivity
profiles, and the perturbed-MDMS transition search.

Scans are reproducible by construction: each state's seed derives from the
base seed plus the state index, per-state computations are independent, and
aggregation is an ordered fold over the state index, so worker count never
changes the output.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .discord import DEFAULT_FLOOR_M3, DEFAULT_FLOOR_M4, StepSchedule, deviation, discord_minimize
from .states import mdms_state, perturbed_mdms, random_state
from .tolerances import POLICY

SCAN_CSV_HEADER = "state_index,seed,rank,delta2,delta3,delta4,dev3,dev4"


@dataclass
class ScanConfig:
    """Configuration of a random-state deviation scan."""

    n_states: int = 500
    rank: int | str = 3  # 1..4 or "mixed" (alternating 3, 4)
    floor3: float = DEFAULT_FLOOR_M3
    floor4: float = DEFAULT_FLOOR_M4
    polish: bool = True
    threshold: float = POLICY.deviation_threshold
    base_seed: int = 20260801
    workers: int = 1
    polish_starts: int = 8

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("n_states must be at least 1")
        if self.rank not in (1, 2, 3, 4, "mixed"):
            raise ValueError(f"rank must be 1..4 or 'mixed', got {self.rank!r}")

    def rank_for(self, index: int) -> int:
        if self.rank == "mixed":
            return 3 if index % 2 == 0 else 4
        return int(self.rank)

    def to_dict(self) -> dict:
        return {
            "n_states": self.n_states,
            "rank": self.rank,
            "floor3": self.floor3,
            "floor4": self.floor4,
            "polish": self.polish,
            "threshold": self.threshold,
            "base_seed": self.base_seed,
            "workers": self.workers,
            "polish_starts": self.polish_starts,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScanConfig":
        kwargs = {}
        for key in (
            "n_states",
            "rank",
            "floor3",
            "floor4",
            "polish",
            "threshold",
            "base_seed",
            "workers",
            "polish_starts",
        ):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str) -> "ScanConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ScanRecord:
    state_index: int
    seed: int
    rank: int
    delta2: float
    delta3: float
    delta4: float
    dev3: float
    dev4: float

    def csv_row(self) -> str:
        return ",".join(
            [
                str(self.state_index),
                str(self.seed),
                str(self.rank),
                repr(self.delta2),
                repr(self.delta3),
                repr(self.delta4),
                repr(self.dev3),
                repr(self.dev4),
            ]
        )


@dataclass
class DeviationStats:
    """Abundance and moments of the positive deviations in a scan."""

    deviant_count: int
    abundance: float
    mean_deviation: float | None
    sigma_deviation: float | None

    def to_dict(self) -> dict:
        return {
            "deviant_count": self.deviant_count,
            "abundance": self.abundance,
            "mean_deviation": self.mean_deviation,
            "sigma_deviation": self.sigma_deviation,
        }


@dataclass
class ScanSummary:
    config: ScanConfig
    records: list[ScanRecord] = field(default_factory=list)

    def stats(self, which: str) -> DeviationStats:
        devs = np.array([getattr(r, which) for r in self.records])
        positive = devs[devs > 0.0]
        n = len(self.records)
        if positive.size == 0:
            return DeviationStats(0, 0.0, None, None)
        return DeviationStats(
            deviant_count=int(positive.size),
            abundance=float(positive.size / n),
            mean_deviation=float(positive.mean()),
            sigma_deviation=float(positive.std()),
        )

    def to_csv(self) -> str:
        lines = [SCAN_CSV_HEADER]
        lines.extend(r.csv_row() for r in self.records)
        return "\n".join(lines) + "\n"

    def summary_dict(self) -> dict:
        return {
            "n_states": len(self.records),
            "threshold": self.config.threshold,
            "delta3": self.stats("dev3").to_dict(),
            "delta4": self.stats("dev4").to_dict(),
        }


def _schedules(floor3: float, floor4: float) -> dict[int, StepSchedule]:
    return {
        2: StepSchedule.default(2),
        3: StepSchedule.default(3, floor3),
        4: StepSchedule.default(4, floor4),
    }


def _scan_one(args) -> ScanRecord:
    index, cfg_dict = args
    cfg = ScanConfig.from_dict(cfg_dict)
    seed = cfg.base_seed + index
    rank = cfg.rank_for(index)
    rho = random_state(rank, seed)
    dev = deviation(
        rho,
        schedules=_schedules(cfg.floor3, cfg.floor4),
        polish_enabled=cfg.polish,
        workers=1,
        polish_starts=cfg.polish_starts,
        threshold=cfg.threshold,
    )
    return ScanRecord(
        state_index=index,
        seed=seed,
        rank=rank,
        delta2=dev.delta2,
        delta3=dev.delta3,
        delta4=dev.delta4,
        dev3=dev.dev3,
        dev4=dev.dev4,
    )


def run_scan(cfg: ScanConfig, progress=None) -> ScanSummary:
    """Generate seeded random states, compute their deviations, and aggregate.

    ``progress`` is an optional callback invoked with each finished record
    (advisory and unordered); the returned records are always in state-index
    order regardless of execution order.
    """
    tasks = [(i, cfg.to_dict()) for i in range(cfg.n_states)]
    records: list[ScanRecord] = []
    if cfg.workers <= 1:
        for task in tasks:
            rec = _scan_one(task)
            if progress is not None:
                progress(rec)
            records.append(rec)
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for rec in pool.map(_scan_one, tasks):
                if progress is not None:
                    progress(rec)
                records.append(rec)
    records.sort(key=lambda r: r.state_index)
    return ScanSummary(config=cfg, records=records)


# ---------------------------------------------------------------------------
# Step-size sensitivity profile


@dataclass
class ProfileRow:
    step: float
    delta2: float
    delta3: float
    delta4: float
    run2: float
    run3: float
    run4: float

    def csv_row(self) -> str:
        return ",".join(
            repr(v)
            for v in (
                self.step,
                self.delta2,
                self.delta3,
                self.delta4,
                self.run2,
                self.run3,
                self.run4,
            )
        )


PROFILE_CSV_HEADER = "step,delta2,delta3,delta4,run2,run3,run4"
# running minima reproduce the [w, 0.25 pi] box
_RUN_BOX_TOP = 0.25 * math.pi


def step_size_profile(
    rho: np.ndarray,
    steps: StepSchedule | None = None,
    m4_floor: float = DEFAULT_FLOOR_M4,
    workers: int = 1,
) -> list[ProfileRow]:
    """Per-step raw grid discord values (no polish) plus running minima.

    The running minimum at step w is taken over the box [w, 0.25 pi]; steps
    above the box top carry NaN running minima. delta4 is evaluated only for
    steps at or above ``m4_floor`` (finer 4-element grids are far more
    expensive than the 2- and 3-element ones) and is NaN below it.
    """
    if steps is None:
        steps = StepSchedule.default(3, floor=0.05 * math.pi)
    values: dict[int, list[float]] = {2: [], 3: [], 4: []}
    for step in steps.steps:
        for m in (2, 3, 4):
            if m == 4 and step < m4_floor * (1 - 1e-12):
                values[m].append(math.nan)
                continue
            res = discord_minimize(
                rho,
                m,
                StepSchedule((step,)),
                polish_enabled=False,
                workers=workers,
            )
            values[m].append(res.value)
    rows = []
    for i, step in enumerate(steps.steps):
        runs = {}
        for m in (2, 3, 4):
            box = [
                v
                for s, v in zip(steps.steps, values[m])
                if step <= s <= _RUN_BOX_TOP * (1 + 1e-12) and not math.isnan(v)
            ]
            runs[m] = min(box) if box else math.nan
        rows.append(
            ProfileRow(
                step=step,
                delta2=values[2][i],
                delta3=values[3][i],
                delta4=values[4][i],
                run2=runs[2],
                run3=runs[3],
                run4=runs[4],
            )
        )
    return rows


def profile_to_csv(rows: list[ProfileRow]) -> str:
    lines = [PROFILE_CSV_HEADER]
    lines.extend(r.csv_row() for r in rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# MDMS perturbation transition


@dataclass
class TransitionResult:
    lambda_star: float | None
    bracket: tuple[float, float] | None
    sweep: list[tuple[float, float]]
    threshold: float
    message: str

    def to_dict(self) -> dict:
        return {
            "lambda_star": self.lambda_star,
            "bracket": list(self.bracket) if self.bracket else None,
            "sweep": [[lam, dev] for lam, dev in self.sweep],
            "threshold": self.threshold,
            "message": self.message,
        }


def mdms_transition_search(
    m: float,
    eps: float,
    threshold: float = 1e-8,
    lam_max: float = 0.05,
    sweep_points: int = 50,
    tol: float = 1e-4,
    floor3: float = DEFAULT_FLOOR_M3,
    polish: bool = True,
    polish_starts: int = 8,
    workers: int = 1,
) -> TransitionResult:
    """Largest lambda at which 3-element POVMs still beat orthogonal ones.

    The perturbed state (1 - lambda) MDMS + lambda |phi+><phi+| is swept on
    an initial grid over [0, lam_max]; monotonicity is not assumed, so the
    bisection brackets the last sign change found on the sweep and refines
    it to ``tol``.
    """
    base = mdms_state(m, eps)
    schedules = {
        2: StepSchedule.default(2),
        3: StepSchedule.default(3, floor3),
    }

    def dev3(lam: float) -> float:
        rho = perturbed_mdms(base, lam)
        r2 = discord_minimize(
            rho, 2, schedules[2], polish, workers, polish_starts
        )
        r3 = discord_minimize(
            rho, 3, schedules[3], polish, workers, polish_starts
        )
        return r2.value - r3.value

    lams = [i * lam_max / (sweep_points - 1) for i in range(sweep_points)]
    sweep = [(lam, dev3(lam)) for lam in lams]
    last_pos = None
    for i, (lam, d) in enumerate(sweep):
        if d > threshold:
            last_pos = i
    if last_pos is None:
        return TransitionResult(
            lambda_star=None,
            bracket=None,
            sweep=sweep,
            threshold=threshold,
            message="no deviation at lambda=0",
        )
    if last_pos == len(sweep) - 1:
        return TransitionResult(
            lambda_star=lams[-1],
            bracket=None,
            sweep=sweep,
            threshold=threshold,
            message=f"deviation persists at lambda={lam_max}; no transition bracketed",
        )
    lo, hi = lams[last_pos], lams[last_pos + 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if dev3(mid) > threshold:
            lo = mid
        else:
            hi = mid
    return TransitionResult(
        lambda_star=lo,
        bracket=(lo, hi),
        sweep=sweep,
        threshold=threshold,
        message="transition bracketed",
    )
