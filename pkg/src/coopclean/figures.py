"""Curve families for external plotting.

Each builder returns ``(header, rows, params)`` in long format, one row per
curve point, ready for :func:`coopclean.csvio.write_csv`.  Infeasible
parameter points are kept as rows with a ``status`` message instead of
stopping the sweep.
"""

from __future__ import annotations

from .bounds import (
    BoundDomainError, BoundParams, closed_form_time, combined_frontier,
    default_delta_grid, deterministic_trajectory, impossibility_probability,
    impossibility_threshold, minimal_s_hat, naive_trajectory,
    recursive_bound_trajectory,
)

CURVE_HEADER = ["curve", "t", "s_lower", "q_step", "q_cum"]


class AllInfeasible(BoundDomainError):
    """Every point of a sweep was outside the bound's domain."""


def _curve_rows(name, curve):
    return [[name, t, s, qs, qc] for t, s, qs, qc in curve.points()]


def _series_rows(name, pairs):
    return [[name, t, s, "", ""] for t, s in pairs]


def trajectory_family(s0, k_values, p, deltas, max_steps, det_d=None):
    """Recursive lower bounds over a grid of (k, delta), plus an optional
    deterministic zig-zag for the first ``k``."""
    rows = []
    ok = 0
    for k in k_values:
        for delta in deltas:
            name = f"k={k},delta={delta:g}"
            try:
                curve = recursive_bound_trajectory(BoundParams(s0, k, p, delta), max_steps)
            except BoundDomainError as exc:
                rows.append([name, "", "", "", "", f"infeasible: {exc}"])
                continue
            ok += 1
            rows += [r + ["ok"] for r in _curve_rows(name, curve)]
    if det_d is not None:
        name = f"deterministic d={det_d}"
        rows += [r + ["ok"] for r in _series_rows(
            name, deterministic_trajectory(s0, k_values[0], det_d, max_steps))]
    if not ok:
        raise AllInfeasible("no (k, delta) point produced a trajectory")
    params = {"s0": s0, "k": ",".join(map(str, k_values)), "p": p,
              "delta": ",".join(f"{d:g}" for d in deltas), "max_steps": max_steps,
              "deterministic_d": det_d}
    return CURVE_HEADER + ["status"], rows, params


def time_bound_family(s0, k_values, p_values, deltas, s_hats):
    """``tau_hat`` and its guarantee as functions of the target area."""
    header = ["curve", "k", "p", "delta", "s_hat", "tau_hat", "q_bound", "status"]
    rows = []
    ok = 0
    for k in k_values:
        for p in p_values:
            for delta in deltas:
                name = f"k={k},p={p:g},delta={delta:g}"
                for s_hat in s_hats:
                    try:
                        params = BoundParams(s0, k, p, delta, s_hat)
                        if not params.admissible:
                            raise BoundDomainError("s_hat is not admissible")
                        tau, q = closed_form_time(params)
                    except BoundDomainError as exc:
                        rows.append([name, k, p, delta, s_hat, "", "", f"infeasible: {exc}"])
                        continue
                    ok += 1
                    rows.append([name, k, p, delta, s_hat, tau, q, "ok"])
    if not ok:
        raise AllInfeasible("no point of the time-bound sweep is feasible")
    params = {"s0": s0, "k": ",".join(map(str, k_values)),
              "p": ",".join(f"{p:g}" for p in p_values),
              "delta": ",".join(f"{d:g}" for d in deltas),
              "s_hat": f"{s_hats[0]}..{s_hats[-1]} ({len(s_hats)} points)"}
    return header, rows, params


def s_hat_family(s0, k, p, q_values, deltas):
    """Minimal target area as a function of ``delta`` for each guarantee level."""
    header = ["q_target", "delta", "s_hat", "status"]
    rows = []
    ok = 0
    for q in q_values:
        for delta in deltas:
            s_hat = minimal_s_hat(s0, k, p, q, delta)
            if s_hat is None:
                rows.append([q, delta, "", "infeasible"])
            else:
                ok += 1
                rows.append([q, delta, s_hat, "ok"])
    if not ok:
        raise AllInfeasible("no delta reaches any of the requested guarantees")
    params = {"s0": s0, "k": k, "p": p, "q": ",".join(f"{q:g}" for q in q_values),
              "delta_grid": f"{deltas[0]:g}..{deltas[-1]:g} ({len(deltas)} points)"}
    return header, rows, params


def frontier_family(s0, k, p, q_values, deltas, max_steps, det_d=10):
    """Combined frontier per guarantee level, with the deterministic and naive
    comparison lines."""
    rows = []
    ok = 0
    for q in q_values:
        name = f"frontier Q={q:g}"
        try:
            curve = combined_frontier(s0, k, p, q, deltas, max_steps)
        except BoundDomainError as exc:
            rows.append([name, "", "", "", "", f"infeasible: {exc}"])
            continue
        ok += 1
        rows += [r + ["ok"] for r in _curve_rows(name, curve)]
    if not ok:
        raise AllInfeasible("no guarantee level has a feasible frontier")
    rows += [r + ["ok"] for r in _series_rows(
        f"deterministic d={det_d}", deterministic_trajectory(s0, k, det_d, max_steps))]
    rows += [r + ["ok"] for r in _series_rows("naive", naive_trajectory(s0, k, max_steps))]
    params = {"s0": s0, "k": k, "p": p, "q": ",".join(f"{q:g}" for q in q_values),
              "delta_grid": f"{deltas[0]:g}..{deltas[-1]:g} ({len(deltas)} points)",
              "max_steps": max_steps, "deterministic_d": det_d}
    return CURVE_HEADER + ["status"], rows, params


def impossibility_family(k_values, p_values, delta, t):
    """Growth threshold (at zero slack) and the guarantee at the slack-``delta``
    threshold plus one, for every (k, p)."""
    header = ["k", "p", "threshold", "s0", "delta", "t", "probability", "status"]
    rows = []
    for p in p_values:
        for k in k_values:
            thr = impossibility_threshold(k, p)
            s0 = impossibility_threshold(k, p, delta) + 1
            try:
                q = impossibility_probability(s0, k, p, delta, t)
                rows.append([k, p, thr, s0, delta, t, q, "ok"])
            except BoundDomainError as exc:
                rows.append([k, p, thr, s0, delta, t, "", f"infeasible: {exc}"])
    params = {"k": f"{k_values[0]}..{k_values[-1]}",
              "p": ",".join(f"{p:g}" for p in p_values), "delta": delta, "t": t}
    return header, rows, params


def parameter_family(s0, k_values, p_values, s_hat, deltas):
    """Time-bound guarantee as a function of ``delta`` for fixed target area."""
    header = ["k", "p", "delta", "s_hat", "tau_hat", "q_bound", "status"]
    rows = []
    ok = 0
    for k in k_values:
        for p in p_values:
            for delta in deltas:
                try:
                    params = BoundParams(s0, k, p, delta, s_hat)
                    if not params.admissible:
                        raise BoundDomainError("s_hat is not admissible")
                    tau, q = closed_form_time(params)
                except BoundDomainError as exc:
                    rows.append([k, p, delta, s_hat, "", "", f"infeasible: {exc}"])
                    continue
                ok += 1
                rows.append([k, p, delta, s_hat, tau, q, "ok"])
    if not ok:
        raise AllInfeasible("no point of the parameter sweep is feasible")
    params = {"s0": s0, "k": ",".join(map(str, k_values)),
              "p": ",".join(f"{p:g}" for p in p_values), "s_hat": s_hat,
              "delta_grid": f"{deltas[0]:g}..{deltas[-1]:g} ({len(deltas)} points)"}
    return header, rows, params


def s_hat_grid(s0, k, lo=None, points=200):
    lo = k + 1 if lo is None else lo
    step = max(1, (s0 - lo) // (points - 1))
    return list(range(lo, s0 + 1, step))


def delta_grid(n):
    return default_delta_grid(n) if n else default_delta_grid()


def frange(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def irange(text: str) -> list[int]:
    """``"1..60"`` or ``"5,10,20"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            out += list(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out
