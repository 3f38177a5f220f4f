"""Probabilistic lower bounds on the contaminated area and on cleaning time.

All probabilities use the Chernoff lower-tail form ``exp(-delta**2 * mu / 2)``
with ``mu = p * 2 * sqrt(2*(S - k) - 1)``, so a per-step guarantee is

    q(S) = 1 - exp(-delta**2 * p * sqrt(2*(S - k) - 1)).

The same exponent is used for the per-step, floor (``q_hat**T``) and
time-bound probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CHERNOFF_CONVENTION = "half: q = 1 - exp(-delta^2 * mu / 2), mu = 2 p sqrt(2(S-k)-1), used for q_t, q_hat and the time bound"


class BoundDomainError(ValueError):
    """Parameters outside the region where a bound is defined."""


def growth_term(s: float, k: int, p: float, delta: float) -> int:
    """``floor(2*(1-delta)*p*sqrt(2*(s-k)-1))``: guaranteed new tiles per step."""
    m = 2 * (s - k) - 1
    if m < 1:
        raise BoundDomainError(f"s - k must be >= 1 (s={s}, k={k})")
    return math.floor(2.0 * (1.0 - delta) * p * math.sqrt(m))


@dataclass(frozen=True)
class BoundParams:
    s0: int
    k: int
    p: float
    delta: float
    s_hat: int = 0

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise BoundDomainError(f"delta must lie in [0, 1) (got {self.delta})")
        if not 0.0 < self.p <= 1.0:
            raise BoundDomainError(f"p must lie in (0, 1] (got {self.p})")
        if self.k < 0:
            raise BoundDomainError(f"k must be >= 0 (got {self.k})")
        if self.s0 <= self.k:
            raise BoundDomainError(f"s0 must exceed k (s0={self.s0}, k={self.k})")

    @property
    def admissible_limit(self) -> int:
        """Every admissible target area is strictly below this."""
        return self.s0 - self.k + growth_term(self.s0, self.k, self.p, self.delta)

    @property
    def admissible(self) -> bool:
        return self.k + 1 <= self.s_hat < self.admissible_limit

    @property
    def varpi(self) -> float:
        return 2.0 * (1.0 - self.delta) ** 2 * self.p ** 2


@dataclass
class BoundCurve:
    """Lower-bound trajectory.  Row ``t`` holds the bound on ``S_t``, the
    guarantee of the step into ``t`` and the cumulative guarantee."""

    t: list[int] = field(default_factory=list)
    s_lower: list[float] = field(default_factory=list)
    q_step: list[float] = field(default_factory=list)
    q_cum: list[float] = field(default_factory=list)
    label: str = ""
    guarantee: float | None = None

    def __len__(self) -> int:
        return len(self.t)

    def points(self) -> list[tuple]:
        return list(zip(self.t, self.s_lower, self.q_step, self.q_cum))

    def first_passage(self, level: float) -> int | None:
        for t, s in zip(self.t, self.s_lower):
            if s <= level:
                return t
        return None


def step_probability(s: float, k: int, p: float, delta: float) -> float:
    """Guarantee that one step adds at least ``(1-delta)`` of the expected spread."""
    m = 2 * (s - k) - 1
    if s - k < 1:
        raise BoundDomainError(f"s - k must be >= 1 (s={s}, k={k})")
    q = -math.expm1(-delta * delta * p * math.sqrt(m))
    return min(1.0, max(0.0, q))


def recursive_bound_trajectory(params: BoundParams, max_steps: int) -> BoundCurve:
    """Iterate ``s <- s - k + floor(2(1-delta) p sqrt(2(s-k)-1))`` from ``s0``.

    Stops after ``max_steps`` steps, once ``s <= s_hat``, or when ``s - k < 1``
    (the remainder is cleaned within one step).
    """
    if max_steps < 1:
        raise BoundDomainError("max_steps must be >= 1")
    k, p, delta = params.k, params.p, params.delta
    s = params.s0
    curve = BoundCurve([0], [s], [1.0], [1.0], label=f"delta={delta:g}")
    q_cum = 1.0
    for t in range(1, max_steps + 1):
        if s <= params.s_hat or s - k < 1:
            break
        q = step_probability(s, k, p, delta)
        s = s - k + growth_term(s, k, p, delta)
        q_cum *= q
        curve.t.append(t)
        curve.s_lower.append(s)
        curve.q_step.append(q)
        curve.q_cum.append(q_cum)
    return curve


def deterministic_trajectory(s0: int, k: int, d: int, max_steps: int) -> list[tuple[int, int]]:
    """Area under periodic full spread: ``k`` cleaned each step, and on steps
    ``t`` with ``t % d == 0`` the smallest possible potential boundary of the
    remaining ``s - k`` tiles is added."""
    if d < 1:
        raise BoundDomainError("d must be >= 1")
    s = s0
    out = [(0, s)]
    for t in range(max_steps):
        if s - k < 1:
            break
        s = s - k
        if t % d == 0:
            s += math.isqrt(4 * (2 * s - 1))
        out.append((t + 1, s))
    return out


def naive_trajectory(s0: int, k: int, max_steps: int) -> list[tuple[int, int]]:
    """No spread at all: ``s0 - t*k`` down to zero."""
    out = []
    for t in range(max_steps + 1):
        s = s0 - t * k
        out.append((t, max(s, 0)))
        if s <= 0:
            break
    return out


def lemma_floor_probability(s_hat: float, k: int, p: float, delta: float, T: int) -> float:
    """``q_hat**T`` with ``q_hat`` the per-step guarantee at area ``s_hat``."""
    if T < 0:
        raise BoundDomainError("T must be >= 0")
    return step_probability(s_hat, k, p, delta) ** T


def log_floor_probability(s_hat: float, k: int, p: float, delta: float, T: int) -> float:
    q = step_probability(s_hat, k, p, delta)
    if T == 0:
        return 0.0
    return -math.inf if q == 0.0 else T * math.log(q)


def closed_form_time(params: BoundParams) -> tuple[float, float]:
    """Time for the continuous bound to shrink the area from ``s0`` to ``s_hat``.

    Returns ``(tau_hat, q_bound)`` where ``q_bound = q_hat**ceil(tau_hat)``.
    Only the shrinking regime is defined: both ``sqrt(varpi*(S-k-1/2))``
    terms must lie below ``k/2``.
    """
    k, s0, s_hat = params.k, params.s0, params.s_hat
    w = params.varpi
    a_hat = w * (s_hat - k - 0.5)
    a_0 = w * (s0 - k - 0.5)
    if a_hat < 0 or a_0 < 0:
        raise BoundDomainError(f"negative radicand (s_hat={s_hat}, s0={s0}, k={k})")
    u_hat = math.sqrt(a_hat)
    u_0 = math.sqrt(a_0)
    half_k = k / 2.0
    if not (u_hat < half_k and u_0 < half_k):
        raise BoundDomainError(
            "region does not shrink under these parameters "
            f"(sqrt terms {u_hat:.6g}, {u_0:.6g} vs k/2={half_k:g})")
    tau = (u_hat - u_0 + half_k * math.log((u_hat - half_k) / (u_0 - half_k))) / w
    if tau < 0:
        tau = 0.0 if math.isclose(tau, 0.0, abs_tol=1e-9) else tau
    q_bound = lemma_floor_probability(s_hat, k, params.p, params.delta,
                                      max(0, math.ceil(tau)))
    return tau, q_bound


def _s_hat_feasible(s0, k, p, delta, s_hat, log_q) -> bool:
    tau, _ = closed_form_time(BoundParams(s0, k, p, delta, s_hat))
    T = max(1, math.ceil(tau))
    return log_floor_probability(s_hat, k, p, delta, T) >= log_q


def minimal_s_hat(s0: int, k: int, p: float, q_target: float, delta: float) -> int | None:
    """Smallest admissible target area whose time-bound guarantee reaches ``q_target``.

    The predicate is monotone in ``s_hat`` (larger targets have larger per-step
    guarantees and shorter horizons); the result is re-checked against its
    predecessor after the binary search.  None when nothing qualifies.
    """
    if not 0.0 < q_target < 1.0:
        raise BoundDomainError("q_target must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise BoundDomainError("delta must lie in (0, 1)")
    try:
        params = BoundParams(s0, k, p, delta)
        hi = min(params.admissible_limit - 1, s0)
        closed_form_time(BoundParams(s0, k, p, delta, s0))
    except BoundDomainError:
        return None
    lo = k + 1
    if hi < lo:
        return None
    log_q = math.log(q_target)
    if not _s_hat_feasible(s0, k, p, delta, hi, log_q):
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if _s_hat_feasible(s0, k, p, delta, mid, log_q):
            hi = mid
        else:
            lo = mid + 1
    if lo > k + 1 and _s_hat_feasible(s0, k, p, delta, lo - 1, log_q):
        raise RuntimeError(f"feasibility not monotone near s_hat={lo}")
    return lo


def default_delta_grid(n: int = 200, lo: float = 0.01, hi: float = 0.99) -> list[float]:
    return [float(d) for d in np.linspace(lo, hi, n)]


def combined_frontier(s0: int, k: int, p: float, q_target: float,
                      delta_grid, max_steps: int = 100_000) -> BoundCurve:
    """Pointwise maximum over the per-delta trajectories, each stopped at its
    minimal target area.  Infeasible deltas are skipped."""
    delta_grid = list(delta_grid)
    if not delta_grid:
        raise BoundDomainError("delta_grid is empty")
    curves = []
    for delta in delta_grid:
        s_hat = minimal_s_hat(s0, k, p, q_target, delta)
        if s_hat is None:
            continue
        curves.append(recursive_bound_trajectory(BoundParams(s0, k, p, delta, s_hat), max_steps))
    if not curves:
        raise BoundDomainError(f"no delta in the grid is feasible at Q={q_target}")
    return pointwise_max(curves, q_target)


def pointwise_max(curves: list[BoundCurve], guarantee: float | None = None) -> BoundCurve:
    horizon = max(c.t[-1] for c in curves)
    best = [-math.inf] * (horizon + 1)
    for c in curves:
        for t, s in zip(c.t, c.s_lower):
            if s > best[t]:
                best[t] = s
    out = BoundCurve(label="frontier", guarantee=guarantee)
    for t, s in enumerate(best):
        if s == -math.inf:
            continue
        out.t.append(t)
        out.s_lower.append(s)
        out.q_step.append(guarantee if guarantee is not None else math.nan)
        out.q_cum.append(guarantee if guarantee is not None else math.nan)
    return out


def impossibility_threshold(k: int, p: float, delta: float = 0.0) -> int:
    """``floor(k^2 / (8 (1-delta)^2 p^2) + k + 1/2)``; larger regions keep growing."""
    if k < 1 or not 0.0 < p <= 1.0 or not 0.0 <= delta < 1.0:
        raise BoundDomainError(f"invalid (k={k}, p={p}, delta={delta})")
    return math.floor(k * k / (8.0 * (1.0 - delta) ** 2 * p * p) + k + 0.5)


def impossibility_probability(s0: int, k: int, p: float, delta: float, t: int) -> float:
    """Lower bound on ``Pr[S_t >= s0]`` for a region past the growth threshold."""
    if s0 <= impossibility_threshold(k, p, delta):
        raise BoundDomainError(
            f"s0={s0} does not exceed the growth threshold "
            f"{impossibility_threshold(k, p, delta)} at delta={delta}")
    if t < 0:
        raise BoundDomainError("t must be >= 0")
    return step_probability(s0, k, p, delta) ** t
