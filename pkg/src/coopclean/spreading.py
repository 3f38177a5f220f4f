"""Contamination spreading policies and the seeded random streams driving them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .region import RegionState

RNG_ALGORITHM = "numpy.random.Philox-4x64-10/SeedSequence(seed,spawn_key=(stream,))"
RNG_VERSION = f"numpy-{np.__version__}"


class SpreadError(ValueError):
    pass


@dataclass(frozen=True)
class SpreadPolicy:
    """How the potential boundary turns contaminated.

    ``uniform``: every potential-boundary tile flips independently with
    probability ``p`` on every step.  ``deterministic``: the whole potential
    boundary flips on steps ``t`` with ``t % d == 0`` (``t = 0`` included).
    """

    kind: str
    p: float | None = None
    d: int | None = None
    neighborhood_radius: int = 1

    def __post_init__(self):
        if self.kind == "uniform":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise SpreadError(f"uniform spread needs 0 <= p <= 1 (got p={self.p})")
            if self.d is not None:
                raise SpreadError("uniform spread takes no period d")
        elif self.kind == "deterministic":
            if self.d is None or int(self.d) != self.d or self.d < 1:
                raise SpreadError(f"deterministic spread needs integer d >= 1 (got d={self.d})")
            if self.p is not None:
                raise SpreadError("deterministic spread takes no probability p")
        else:
            raise SpreadError(f"unknown spread kind {self.kind!r}")
        if self.neighborhood_radius < 1:
            raise SpreadError("neighborhood_radius must be positive")

    @classmethod
    def uniform(cls, p: float) -> "SpreadPolicy":
        return cls("uniform", p=float(p))

    @classmethod
    def deterministic(cls, d: int) -> "SpreadPolicy":
        return cls("deterministic", d=int(d))

    def as_dict(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform", "p": self.p}
        return {"kind": "deterministic", "d": self.d}


@dataclass(frozen=True)
class RngStream:
    """One replication's private random stream.

    The same ``(seed, stream_id)`` always produces the same draws: Philox is a
    counter-based generator and the key is derived by SeedSequence from the
    pair alone.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))


def _check(region: RegionState, policy: SpreadPolicy) -> None:
    if not region.tiles:
        raise SpreadError("an empty region cannot spread")
    if policy.neighborhood_radius != 1:
        raise SpreadError("only radius-1 neighbourhoods are supported")


def draw_spread(region: RegionState, policy: SpreadPolicy,
                rng: np.random.Generator) -> list[tuple[int, int]]:
    """Tiles that would become contaminated this step, without applying them.

    Uniform spread draws one uniform per potential-boundary tile, in row-major
    tile order, whatever ``p`` is; this keeps the stream position independent
    of the outcome.
    """
    _check(region, policy)
    cand = region.sorted_potential()
    if policy.kind == "uniform":
        hits = np.flatnonzero(rng.random(len(cand)) < policy.p)
        return [cand[i] for i in hits]
    if region.step % policy.d == 0:
        return cand
    return []


def spread_step(region: RegionState, policy: SpreadPolicy,
                rng: np.random.Generator) -> tuple[RegionState, set]:
    """Apply one spreading step in place; returns the region and the new tiles.

    ``region.step`` is read (deterministic timing) but not advanced; the
    simulation loop owns the clock.
    """
    new = draw_spread(region, policy, rng)
    region.add_many(new)
    return region, set(new)


def sample_spread_counts(region: RegionState, policy: SpreadPolicy,
                         rng: np.random.Generator, trials: int) -> np.ndarray:
    """Number of new tiles in ``trials`` independent spread steps from a frozen region.

    Consumes the stream exactly as ``trials`` consecutive calls to
    :func:`draw_spread` would.
    """
    _check(region, policy)
    n = len(region.potential)
    if policy.kind == "deterministic":
        return np.full(trials, n if region.step % policy.d == 0 else 0)
    u = rng.random((trials, n))
    return (u < policy.p).sum(axis=1)
