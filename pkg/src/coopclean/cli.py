"""``coopclean`` command line.

Exit codes: 0 success, 2 configuration error, 3 every sweep point
infeasible, 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import figures as fg
from .bounds import BoundDomainError
from .config import config_table, emit_config, parse_config
from .csvio import write_csv
from .montecarlo import (
    ConfigError, InvariantError, RunConfig, bound_step_check, run_batch,
)
from .region import RegionError
from .spreading import SpreadError, SpreadPolicy
from .sweep import ProtocolError

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_INVARIANT = 0, 2, 3, 4

FIG1A = dict(s0=20000, k=[150], p=1 / 3, deltas=[0.01, 0.1, 0.2, 0.3, 0.5], det_d=3)
FIG1B = dict(s0=20000, k=[150, 160, 170, 180, 190], p=0.5, deltas=[0.3], det_d=None)
FIG2A = dict(s0=20000, k=[150], p=[0.5], deltas=[0.27, 0.3, 0.4, 0.5, 0.6, 0.7])
FIG2B = dict(s0=20000, k=[150, 160, 170, 180, 190], p=[0.5], deltas=[0.3])
FIG3A = dict(s0=20000, k=[150], p=[0.5], deltas=[0.4, 0.3, 0.25, 0.2])
FIG3B = dict(s0=20000, k=[150], p=[0.6, 0.5, 0.4, 0.3], deltas=[0.3])
FIG4 = dict(s0=20000, k=50, p=0.1)


def _flat(d: dict) -> dict:
    out = {}
    for key, value in d.items():
        if isinstance(value, dict):
            out.update({f"{key}.{k}": v for k, v in _flat(value).items()})
        else:
            out[key] = value
    return out


def _out(args, name) -> Path:
    return Path(args.out) / name


def _report(path: Path) -> None:
    print(f"wrote {path}")


# ---- simulate ----

def _run_configs(args) -> list[RunConfig]:
    if args.config:
        base = parse_config(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(base, RunConfig):
            raise ConfigError("simulate needs a simulation config (with a 'shape' key)")
        fields = dict(shape=base.shape, s0=base.s0, k=base.k, policy=base.policy,
                      cleaner=base.cleaner, cutoff=base.cutoff, seed=base.seed,
                      replications=base.replications,
                      trajectory_every=base.trajectory_every)
        shapes = [base.shape]
        ks = [base.k]
    else:
        if args.s0 is None or args.k is None:
            raise ConfigError("simulate needs --config or both --s0 and --k")
        if (args.p is None) == (args.d is None):
            raise ConfigError("give exactly one of --p or --d")
        try:
            policy = (SpreadPolicy.uniform(args.p) if args.p is not None
                      else SpreadPolicy.deterministic(args.d))
        except SpreadError as exc:
            raise ConfigError(str(exc)) from None
        fields = dict(s0=args.s0, policy=policy, cleaner=args.cleaner, cutoff=3000,
                      seed=0, replications=1000, trajectory_every=0)
        shapes = args.shape.split(",")
        ks = fg.irange(args.k)
    for key in ("seed", "replications", "cutoff", "trajectory_every"):
        value = getattr(args, key)
        if value is not None:
            fields[key] = value
    out = []
    for shape in shapes:
        for k in ks:
            out.append(RunConfig(**{**fields, "shape": shape, "k": k}))
    return out


def cmd_simulate(args) -> int:
    configs = _run_configs(args)
    agg_rows = []
    aborted = 0
    for cfg in configs:
        stats = run_batch(cfg, check_invariants=args.check_invariants)
        tag = f"{cfg.shape}_k{cfg.k}"
        params = _flat(config_table(cfg))
        write_csv(_out(args, f"runs_{tag}.csv"),
                  ["stream", "outcome", "t_success", "final_s", "holes"],
                  [[r.stream, r.outcome, r.t_success, r.final_s, r.holes]
                   for r in stats.records], params)
        if stats.mean_trajectory is not None:
            write_csv(_out(args, f"trajectory_{tag}.csv"), ["t", "mean_s", "p05", "p95"],
                      stats.mean_trajectory, params)
        for a in stats.aborted:
            print(f"aborted: {tag} stream {a.stream}: {a.error}", file=sys.stderr)
        aborted += len(stats.aborted)
        agg_rows.append([cfg.shape, cfg.k, stats.n_runs, stats.n_success, stats.success_pct,
                         stats.ci_low, stats.ci_high, stats.mean_t_success,
                         stats.std_t_success, len(stats.aborted)])
        print(f"{tag}: success {stats.n_success}/{stats.n_runs}"
              f" mean T_success {stats.mean_t_success:.1f}")
    params = _flat(config_table(configs[0]))
    params["shape"] = ",".join(dict.fromkeys(c.shape for c in configs))
    params["agents.k"] = ",".join(str(k) for k in dict.fromkeys(c.k for c in configs))
    name = "fig5_agents.csv" if len(configs) > 1 else "aggregate.csv"
    _report(write_csv(_out(args, name),
                      ["shape", "k", "n_runs", "n_success", "success_pct", "ci_low",
                       "ci_high", "mean_t_success", "std_t_success", "n_aborted"],
                      agg_rows, params))
    return EXIT_INVARIANT if aborted else EXIT_OK


# ---- analytic verbs ----

def _deltas(args, default):
    return fg.frange(args.delta) if args.delta else default


def cmd_bound(args) -> int:
    if args.fig1a or args.fig1b:
        for flag, preset, name in ((args.fig1a, FIG1A, "fig1_delta.csv"),
                                   (args.fig1b, FIG1B, "fig1_agents.csv")):
            if flag:
                h, rows, params = fg.trajectory_family(
                    preset["s0"], preset["k"], preset["p"], preset["deltas"],
                    args.max_steps, preset["det_d"])
                _report(write_csv(_out(args, name), h, rows, params))
        return EXIT_OK
    _need(args, "s0", "k", "p")
    h, rows, params = fg.trajectory_family(args.s0, fg.irange(args.k), args.p,
                                           _deltas(args, [0.3]), args.max_steps, args.d)
    _report(write_csv(_out(args, "bound.csv"), h, rows, params))
    return EXIT_OK


def cmd_time_bound(args) -> int:
    presets = [(args.fig2a, FIG2A, "fig2_delta.csv"), (args.fig2b, FIG2B, "fig2_agents.csv"),
               (args.fig3a, FIG3A, "fig3_delta.csv"), (args.fig3b, FIG3B, "fig3_p.csv")]
    if any(flag for flag, _, _ in presets):
        for flag, pr, name in presets:
            if flag:
                s_hats = fg.s_hat_grid(pr["s0"], max(pr["k"]), points=args.points)
                h, rows, params = fg.time_bound_family(pr["s0"], pr["k"], pr["p"],
                                                       pr["deltas"], s_hats)
                _report(write_csv(_out(args, name), h, rows, params))
        return EXIT_OK
    _need(args, "s0", "k", "p")
    ks = fg.irange(args.k)
    s_hats = fg.irange(args.s_hat) if args.s_hat else fg.s_hat_grid(args.s0, max(ks), points=args.points)
    h, rows, params = fg.time_bound_family(args.s0, ks, fg.frange(args.p),
                                           _deltas(args, [0.3]), s_hats)
    _report(write_csv(_out(args, "time_bound.csv"), h, rows, params))
    return EXIT_OK


def cmd_frontier(args) -> int:
    s0 = args.s0 if args.s0 is not None else FIG4["s0"]
    k = int(args.k) if args.k is not None else FIG4["k"]
    p = float(args.p) if args.p is not None else FIG4["p"]
    qs = fg.frange(args.q)
    deltas = _deltas(args, fg.delta_grid(args.delta_points))
    h, rows, params = fg.s_hat_family(s0, k, p, qs, deltas)
    _report(write_csv(_out(args, "fig4_shat.csv"), h, rows, params))
    h, rows, params = fg.frontier_family(s0, k, p, qs, deltas, args.max_steps, args.d or 10)
    _report(write_csv(_out(args, "fig4_frontier.csv"), h, rows, params))
    return EXIT_OK


def cmd_impossibility(args) -> int:
    h, rows, params = fg.impossibility_family(fg.irange(args.k), fg.frange(args.p),
                                              args.delta_slack, args.t)
    _report(write_csv(_out(args, "fig7_threshold.csv"),
                      ["k", "p", "threshold"], [r[:3] for r in rows], params))
    _report(write_csv(_out(args, "fig7_probability.csv"), h, rows, params))
    if all(r[-1] != "ok" for r in rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep_params(args) -> int:
    deltas = _deltas(args, fg.delta_grid(args.delta_points))
    if args.p_sweep:
        h, rows, params = fg.parameter_family(args.s0, [150], fg.frange(args.p_sweep),
                                              args.s_hat, deltas)
        _report(write_csv(_out(args, "fig6_p.csv"), h, rows, params))
    if args.k_sweep:
        h, rows, params = fg.parameter_family(args.s0, fg.irange(args.k_sweep), [0.4],
                                              args.s_hat, deltas)
        _report(write_csv(_out(args, "fig6_agents.csv"), h, rows, params))
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.config:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        sys.stdout.write(emit_config(cfg))
        return EXIT_OK
    results = bound_step_check(args.s0, int(args.k), args.p, args.delta_slack,
                               fg.irange(args.checkpoints), args.trials,
                               args.seed or 0)
    rows = [[r.t, r.s_t, r.threshold, r.q_t, r.frequency, r.q_t - r.margin, r.passed]
            for r in results]
    params = {"s0": args.s0, "k": args.k, "p": args.p, "delta": args.delta_slack,
              "trials": args.trials, "seed": args.seed or 0, "cleaner": "perfect"}
    _report(write_csv(_out(args, "validate_bound.csv"),
                      ["t", "s_t", "floor_s", "q_t", "frequency", "lower_limit", "passed"],
                      rows, params))
    for r in results:
        print(f"t={r.t}: frequency {r.frequency:.4f} vs q_t {r.q_t:.4f}"
              f" -> {'ok' if r.passed else 'VIOLATED'}")
    return EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError("missing " + ", ".join(f"--{n.replace('_', '-')}" for n in missing))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coopclean",
                                 description="Cooperative cleaners under stochastic spread.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--replications", type=int)
        p.add_argument("--cutoff", type=int)
        return p

    s = common(sub.add_parser("simulate", help="Monte Carlo runs"))
    s.add_argument("--shape", default="digital_sphere", help="comma list of shapes")
    s.add_argument("--s0", type=int)
    s.add_argument("--k", help="agent count, list or range (5,10,20,40)")
    s.add_argument("--p", type=float)
    s.add_argument("--d", type=int)
    s.add_argument("--cleaner", default="sweep", choices=["sweep", "perfect"])
    s.add_argument("--trajectory-every", type=int, dest="trajectory_every")
    s.add_argument("--check-invariants", action="store_true")
    s.set_defaults(func=cmd_simulate)

    b = common(sub.add_parser("bound", help="recursive lower-bound trajectories"))
    b.add_argument("--s0", type=int)
    b.add_argument("--k")
    b.add_argument("--p", type=float)
    b.add_argument("--delta", help="comma list")
    b.add_argument("--d", type=int, help="add a deterministic zig-zag with this period")
    b.add_argument("--max-steps", type=int, default=2000, dest="max_steps")
    b.add_argument("--fig1a", action="store_true")
    b.add_argument("--fig1b", action="store_true")
    b.set_defaults(func=cmd_bound)

    t = common(sub.add_parser("time-bound", help="closed-form cleaning-time bound"))
    t.add_argument("--s0", type=int)
    t.add_argument("--k")
    t.add_argument("--p", help="comma list")
    t.add_argument("--delta", help="comma list")
    t.add_argument("--s-hat", dest="s_hat", help="list or range of target areas")
    t.add_argument("--points", type=int, default=200)
    for f in ("fig2a", "fig2b", "fig3a", "fig3b"):
        t.add_argument(f"--{f}", action="store_true")
    t.set_defaults(func=cmd_time_bound)

    f = common(sub.add_parser("frontier", help="combined frontier at given guarantees"))
    f.add_argument("--s0", type=int)
    f.add_argument("--k")
    f.add_argument("--p", type=float)
    f.add_argument("--q", default="0.95", help="comma list of guarantee levels")
    f.add_argument("--delta", help="explicit comma list of slack values")
    f.add_argument("--delta-points", type=int, default=200, dest="delta_points")
    f.add_argument("--d", type=int, help="deterministic comparison period (10)")
    f.add_argument("--max-steps", type=int, default=2000, dest="max_steps")
    f.set_defaults(func=cmd_frontier)

    i = common(sub.add_parser("impossibility", help="growth threshold and its guarantee"))
    i.add_argument("--k", default="1..60")
    i.add_argument("--p", default="0.1,0.2,0.3,0.4")
    i.add_argument("--delta", type=float, default=0.3, dest="delta_slack")
    i.add_argument("--t", type=int, default=10)
    i.set_defaults(func=cmd_impossibility)

    w = common(sub.add_parser("sweep-params", help="guarantee against slack for p and k sweeps"))
    w.add_argument("--s0", type=int, default=20000)
    w.add_argument("--s-hat", type=int, default=10000, dest="s_hat")
    w.add_argument("--p-sweep", default="0.4,0.3,0.2,0.1", dest="p_sweep")
    w.add_argument("--k-sweep", default="150,250,350,450,550,650", dest="k_sweep")
    w.add_argument("--delta", help="explicit comma list")
    w.add_argument("--delta-points", type=int, default=200, dest="delta_points")
    w.set_defaults(func=cmd_sweep_params)

    v = common(sub.add_parser("validate", help="check a config, or test the one-step bound"))
    v.add_argument("--s0", type=int, default=2000)
    v.add_argument("--k", default="50")
    v.add_argument("--p", type=float, default=0.3)
    v.add_argument("--delta", type=float, default=0.3, dest="delta_slack")
    v.add_argument("--checkpoints", default="1,5,10,20")
    v.add_argument("--trials", type=int, default=10_000)
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except fg.AllInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, BoundDomainError, RegionError, SpreadError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantError, ProtocolError) as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
