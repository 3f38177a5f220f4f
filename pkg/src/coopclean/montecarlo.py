"""Seeded replications of clean-then-spread runs and their aggregation."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from statistics import NormalDist

import numpy as np

from .bounds import BoundCurve, growth_term, step_probability
from .region import SHAPES, generate_shape, is_connected
from .spreading import RngStream, SpreadPolicy, sample_spread_counts, spread_step
from .sweep import perfect_cleaner_step, place_team, protocol_step

CLEANERS = ("sweep", "perfect")


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    """A simulation invariant broke; the run is aborted, not failed."""


@dataclass(frozen=True)
class RunConfig:
    shape: str
    s0: int
    k: int
    policy: SpreadPolicy
    cleaner: str = "sweep"
    cutoff: int = 3000
    seed: int = 0
    replications: int = 1000
    trajectory_every: int = 0  # 0 disables trajectory recording

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError(f"shape must be one of {SHAPES} (got {self.shape!r})")
        if self.cleaner not in CLEANERS:
            raise ConfigError(f"cleaner must be one of {CLEANERS} (got {self.cleaner!r})")
        if self.s0 < 1:
            raise ConfigError("s0 must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.cutoff < 1:
            raise ConfigError("cutoff must be >= 1")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.trajectory_every < 0:
            raise ConfigError("trajectory_every must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class RunRecord:
    stream: int
    seed: int
    success: bool
    t_success: int | None
    final_s: int
    holes: int
    steps: int
    trajectory: tuple | None = None
    stopped_early: bool = False

    @property
    def outcome(self) -> str:
        return "success" if self.success else "cutoff_failure"


@dataclass(frozen=True)
class AbortedRun:
    stream: int
    error: str


@dataclass
class AggregateStats:
    n_runs: int
    n_success: int
    success_pct: float
    ci_low: float
    ci_high: float
    mean_t_success: float
    std_t_success: float
    mean_trajectory: list | None = None
    aborted: list = field(default_factory=list)
    records: list = field(default_factory=list)


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    phat = successes / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


@lru_cache(maxsize=32)
def _initial_region(shape: str, s0: int):
    return generate_shape(shape, s0)


def initial_region(shape: str, s0: int):
    """A fresh copy of the generated start shape (built once per process)."""
    return _initial_region(shape, s0).copy()


def run_one(config: RunConfig, stream_id: int, check_invariants: bool = False,
            stop_when_hopeless: bool = False) -> RunRecord:
    """One replication: clean, spread, advance the clock, until empty or cutoff.

    Deterministic in ``(config, stream_id)``.  With ``check_invariants`` the
    region is flood-filled after every cleaning step and an
    :class:`InvariantError` is raised if it came apart.

    With ``stop_when_hopeless`` a run ends as a failure once
    ``S_t > k * (cutoff - t)``: at most ``k`` tiles go per step and spread
    never removes any, so the outcome is already fixed.  ``final_s`` and
    ``steps`` then describe the stopping point rather than the cutoff.
    """
    region = initial_region(config.shape, config.s0)
    rng = RngStream(config.seed, stream_id).generator()
    team = place_team(region, config.k) if config.cleaner == "sweep" else None
    every = config.trajectory_every
    traj = [(0, len(region))] if every else None
    t = 0
    early = False
    while region.tiles and t < config.cutoff:
        if stop_when_hopeless and len(region) > config.k * (config.cutoff - t):
            early = True
            break
        if team is not None:
            protocol_step(region, team)
        else:
            perfect_cleaner_step(region, config.k)
        if check_invariants and not is_connected(region.tiles):
            raise InvariantError(f"region disconnected at t={t} (stream {stream_id})")
        if region.tiles:
            spread_step(region, config.policy, rng)
        t += 1
        region.step = t
        if every and (t % every == 0 or not region.tiles):
            traj.append((t, len(region)))
    success = not region.tiles
    return RunRecord(stream_id, config.seed, success, t if success else None,
                     len(region), region.holes_created, t,
                     tuple(traj) if traj is not None else None, early)


def area_reaches(config: RunConfig, stream_id: int, level: int) -> bool:
    """Whether ``S_cutoff >= level`` in replication ``stream_id``.

    Same dynamics as :func:`run_one`, stopped as soon as the answer is fixed:
    an empty region stays empty, and ``S_t - k * (cutoff - t) >= level``
    cannot be undone by cleaning.
    """
    region = initial_region(config.shape, config.s0)
    rng = RngStream(config.seed, stream_id).generator()
    team = place_team(region, config.k) if config.cleaner == "sweep" else None
    for t in range(config.cutoff):
        if not region.tiles:
            return level <= 0
        if len(region) - config.k * (config.cutoff - t) >= level:
            return True
        if team is not None:
            protocol_step(region, team)
        else:
            perfect_cleaner_step(region, config.k)
        if region.tiles:
            spread_step(region, config.policy, rng)
        region.step = t + 1
    return len(region) >= level


def _run_chunk(args):
    config, streams, check, hopeless = args
    out = []
    for s in streams:
        try:
            out.append(run_one(config, s, check, hopeless))
        except Exception as exc:  # reported per run, never folded into failures
            out.append(AbortedRun(s, f"{type(exc).__name__}: {exc}"))
    return out


def worker_count() -> int:
    raw = os.environ.get("SWEEP_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def run_batch(config: RunConfig, workers: int | None = None,
              check_invariants: bool = False, streams=None,
              stop_when_hopeless: bool = False) -> AggregateStats:
    """Runs streams ``0..replications-1`` (or ``streams``) and aggregates.

    ``workers`` defaults to ``SWEEP_THREADS`` (1 when unset); any value gives
    the same result.
    """
    if streams is None:
        streams = range(config.replications)
    streams = list(streams)
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(streams) < 2:
        results = _run_chunk((config, streams, check_invariants, stop_when_hopeless))
    else:
        chunks = [streams[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [(config, c, check_invariants, stop_when_hopeless)
                                          for c in chunks if c])
            results = [r for part in parts for r in part]
    return aggregate(results)


def aggregate(results, trajectory_over: str = "success") -> AggregateStats:
    """Order-independent summary: results are sorted by stream first.

    Times are averaged over successes only.  The mean trajectory pads each
    successful run with zeros after it empties; ``trajectory_over="all"``
    includes failures as well.
    """
    results = sorted(results, key=lambda r: r.stream)
    records = [r for r in results if isinstance(r, RunRecord)]
    aborted = [r for r in results if isinstance(r, AbortedRun)]
    n = len(records)
    wins = [r for r in records if r.success]
    lo, hi = wilson_interval(len(wins), n)
    times = [r.t_success for r in wins]
    mean_t = math.fsum(times) / len(times) if times else math.nan
    if len(times) > 1:
        std_t = math.sqrt(math.fsum((x - mean_t) ** 2 for x in times) / (len(times) - 1))
    else:
        std_t = 0.0 if times else math.nan
    pool = wins if trajectory_over == "success" else records
    return AggregateStats(
        n_runs=n, n_success=len(wins),
        success_pct=len(wins) / n if n else math.nan,
        ci_low=lo, ci_high=hi,
        mean_t_success=mean_t, std_t_success=std_t,
        mean_trajectory=_mean_trajectory(pool),
        aborted=aborted, records=records)


def _mean_trajectory(records) -> list | None:
    trajs = [r.trajectory for r in records if r.trajectory]
    if not trajs:
        return None
    horizon = sorted({t for tr in trajs for t, _ in tr})
    rows = []
    for t in horizon:
        vals = np.array([_value_at(tr, t) for tr in trajs], dtype=float)
        rows.append((t, float(vals.mean()), float(np.percentile(vals, 5)),
                     float(np.percentile(vals, 95))))
    return rows


def _value_at(traj, t):
    # last recorded value at or before t; an emptied region stays empty
    last = traj[0][1]
    for ti, s in traj:
        if ti > t:
            break
        last = s
    if t > traj[-1][0] and traj[-1][1] == 0:
        return 0
    return last


def overlay_bounds(stats: AggregateStats, curves: list[BoundCurve]) -> tuple[list[str], list[list]]:
    """Joins the empirical mean trajectory with analytic curves on ``t``.

    Returns ``(header, rows)``; a curve with no point at some ``t`` leaves an
    empty cell.
    """
    if stats.mean_trajectory is None:
        raise ValueError("no trajectories were recorded for this batch")
    header = ["t", "empirical_mean_S"]
    lookups = []
    for i, c in enumerate(curves):
        name = c.label or f"curve{i}"
        header.append(name if name == "frontier" else f"bound_S[{name}]")
        lookups.append(dict(zip(c.t, c.s_lower)))
    rows = []
    for t, mean, _, _ in stats.mean_trajectory:
        rows.append([t, mean] + [lk.get(t, "") for lk in lookups])
    return header, rows


@dataclass(frozen=True)
class CheckpointResult:
    t: int
    s_t: int
    q_t: float
    threshold: int
    trials: int
    hits: int

    @property
    def frequency(self) -> float:
        return self.hits / self.trials

    @property
    def margin(self) -> float:
        return 3.0 * math.sqrt(self.q_t * (1 - self.q_t) / self.trials)

    @property
    def passed(self) -> bool:
        return self.frequency > self.q_t - self.margin


def bound_step_check(s0: int, k: int, p: float, delta: float, checkpoints,
                     trials: int = 10_000, seed: int = 0,
                     shape: str = "digital_sphere") -> list[CheckpointResult]:
    """Empirical frequency of the one-step lower bound, conditioned on ``S_t``.

    One trajectory (perfect cleaner, uniform spread) is run up to each
    checkpoint; from the frozen state the cleaning step is applied once
    (it is deterministic) and the spread step is resampled ``trials`` times.
    """
    checkpoints = sorted(set(checkpoints))
    region = generate_shape(shape, s0)
    policy = SpreadPolicy.uniform(p)
    rng = RngStream(seed, 0).generator()
    probe_rng = RngStream(seed, 1).generator()
    out = []
    t = 0
    for cp in checkpoints:
        while t < cp:
            perfect_cleaner_step(region, k)
            spread_step(region, policy, rng)
            t += 1
            region.step = t
        s_t = len(region)
        frozen = region.copy()
        perfect_cleaner_step(frozen, k)
        gains = sample_spread_counts(frozen, policy, probe_rng, trials)
        floor_s = s_t - k + growth_term(s_t, k, p, delta)
        hits = int(np.count_nonzero(len(frozen) + gains >= floor_s))
        out.append(CheckpointResult(cp, s_t, step_probability(s_t, k, p, delta),
                                    floor_s, trials, hits))
    return out
