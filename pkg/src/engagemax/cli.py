"""Command-line scenario runner.

    engagemax <subcommand> --config <path> [--seed N] [--samples N] [--out DIR]

Each subcommand writes CSV files into the output directory and prints one
``name = value`` line per solved quantity.  The output directory is taken
from ``--out``, then the config's ``output.directory``, then the
``ENGAGEMAX_OUT`` environment variable, then ``./engagemax-out``.

Exit codes: 0 success, 2 bad input, 3 unsupported problem, 4 numerical
failure, 5 audit failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .dynamics import (REPORT_HEADER, FixedDeadline, StopAtFirstJump, StopImmediately, audit_feasibility,
                       audit_garbling, audit_stopping, mean_se, sample_dilution)
from .errors import AuditFailure, EngagemaxError, InputError
from .principal import SweepRow, solve_principal, sweep_prior, verify_extreme_beliefs
from .static_ri import agent_benchmark
from .tabular import FLOAT_FORMAT, format_cell, write_csv

ENV_OUT = "ENGAGEMAX_OUT"
DEFAULT_OUT = "engagemax-out"
SUBCOMMANDS = ("solve", "benchmark", "sweep", "simulate", "audit", "increasing", "bounded", "unlimited",
               "teacher", "example-1-1")

log = logging.getLogger("engagemax")


class Run:
    """Output directory, file prefix and the summary printer for one invocation."""

    def __init__(self, out_dir: Path, prefix: str, stream=None):
        self.out_dir = out_dir
        self.prefix = prefix
        self.stream = stream or sys.stdout
        self.written: list[Path] = []

    def csv(self, name, header, rows) -> Path:
        p = write_csv(self.out_dir / f"{self.prefix}{name}.csv", header, rows)
        self.written.append(p)
        return p

    def say(self, name, value):
        print(f"{name} = {format_cell(value)}", file=self.stream)


def _posterior_rows(label, pi, states):
    for i, (q, w) in enumerate(pi.atoms):
        yield (label, i, w, *q)


def _posterior_header(states):
    return ["policy", "atom", "weight", *[f"q_{s}" for s in states]]


def _summary(run, name, items):
    run.csv(name, ["quantity", "value"], items)
    for k, v in items:
        run.say(k, v)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_solve(cfg, run, args):
    """Agent benchmark and principal solution."""
    P = cfg.decision_problem()
    bench = agent_benchmark(P)
    sol = solve_principal(P, bench)
    run.csv("solve_posterior", _posterior_header(P.states),
            [*_posterior_rows("agent", bench.posterior, P.states),
             *_posterior_rows("principal", sol.pi_star, P.states)])
    _summary(run, "solve_summary", [
        ("V_B", bench.value), ("agent_engagement", bench.engagement),
        ("J", sol.engagement), ("lambda", sol.lam), ("cost_coeff", sol.cost_coeff),
        ("alpha_star", sol.alpha_star), ("agent_value", sol.agent_value),
        ("u_hat_prior", float(P.payoff(P.prior))), ("residual", sol.residual),
        ("degenerate", sol.degenerate),
    ])


def cmd_benchmark(cfg, run, args):
    """Agent-optimal benchmark only."""
    P = cfg.decision_problem()
    bench = agent_benchmark(P)
    run.csv("benchmark_posterior", _posterior_header(P.states), _posterior_rows("agent", bench.posterior, P.states))
    _summary(run, "benchmark_summary", [
        ("V_B", bench.value), ("engagement", bench.engagement), ("expected_tau", bench.expected_tau),
        ("continuation", bool(bench.continuation)),
    ])


def cmd_sweep(cfg, run, args):
    """Agent and principal solutions over a prior grid."""
    P = cfg.decision_problem()
    priors = cfgmod.grid_values(cfg.params["priors"])
    rows = sweep_prior(P, priors)
    run.csv("sweep", SweepRow.FIELDS, [r.as_tuple() for r in rows])
    J = np.array([r.J for r in rows])
    A = np.array([r.agent_engagement for r in rows])
    run.say("priors", len(rows))
    run.say("max_J", float(J.max()))
    run.say("max_agent_engagement", float(A.max()))


def _policy(P, policy):
    bench = agent_benchmark(P)
    if policy == "agent":
        if not bench.continuation:
            raise InputError("$.command.params.policy: agent benchmark stops immediately; nothing to sample")
        return bench.posterior, bench.alpha, bench
    sol = solve_principal(P, bench)
    if sol.degenerate:
        raise InputError("$.command.params.policy: principal solution is degenerate; nothing to sample")
    return sol.pi_star, sol.alpha_star, sol


def _seed_samples(cfg, args):
    seed = args.seed if args.seed is not None else cfg.params["seed"]
    n = args.samples if args.samples is not None else cfg.params["samples"]
    return int(seed), int(n)


def cmd_simulate(cfg, run, args):
    """Sample dilution paths."""
    P = cfg.decision_problem()
    seed, n = _seed_samples(cfg, args)
    pi, alpha, _ = _policy(P, cfg.params["policy"])
    ens = sample_dilution(pi, alpha, n, seed, chi=P.chi)
    p = ens.to_csv(run.out_dir / f"{run.prefix}paths.csv", P.states)
    run.written.append(p)
    m, se = mean_se(ens.tau)
    items = [("samples", n), ("seed", seed), ("alpha", alpha), ("mean_tau", m), ("se_tau", se),
             ("exact_tau", pi.information(P) / P.chi)]
    items += [(f"freq_atom{i}", float(f)) for i, f in enumerate(ens.frequencies())]
    _summary(run, "simulate_summary", items)


def cmd_audit(cfg, run, args):
    """Monte-Carlo feasibility, stopping and garbling audits."""
    P = cfg.decision_problem()
    seed, n = _seed_samples(cfg, args)
    policy = cfg.params["policy"]
    pi, alpha, sol = _policy(P, policy)
    ens = sample_dilution(pi, alpha, n, seed, chi=P.chi)
    reports = [audit_feasibility(ens, P, cfg.params.get("probe_times"))]
    devs = (StopImmediately(), StopAtFirstJump(), FixedDeadline(cfg.params["deadline"]))
    reports.append(audit_stopping(pi, alpha, P, devs, n=n, seed=seed))
    if policy == "principal":
        reports.append(audit_garbling(pi, alpha, P, cfg.params["garbles"], seed))
    rows = [r for rep in reports for r in rep.rows()]
    if policy == "principal":
        ext = verify_extreme_beliefs(P, sol)
        rows.append(("extreme-beliefs", "outside-agent-hull", min(ext.margins, default=0.0), 0.0, 0.0, ext.passed))
    run.csv("audit", REPORT_HEADER, rows)
    for audit, check, value, bound, tol, ok in rows:
        run.say(f"{audit}.{check}", "pass" if ok else "FAIL")
    bad = [f"{r[0]}.{r[1]}" for r in rows if not r[5]]
    if bad:
        raise AuditFailure("audit failed: " + ", ".join(bad))


def cmd_increasing(cfg, run, args):
    """Policy under a rising delay cost."""
    from .extensions.increasing_cost import CostSchedule, solve_increasing_cost

    P = cfg.decision_problem()
    sched = cfg.params.get("schedule")
    if sched is None:
        raise InputError("$.command.params.schedule: required for the increasing subcommand")
    try:
        schedule = CostSchedule(sched["times"], sched["values"])
    except InputError as exc:
        raise InputError(f"$.command.params.{exc}") from None
    sol = solve_increasing_cost(P, schedule, ode_step=cfg.params.get("ode_step"), nodes=cfg.params["nodes"])
    stride = int(cfg.params["grid_stride"])
    rows = list(sol.rows())
    keep = rows[::stride]
    if (len(rows) - 1) % stride:
        keep.append(rows[-1])
    run.csv("increasing", sol.header(P.states), keep)
    d = sol.support_distance()
    _summary(run, "increasing_summary", [
        ("t0", sol.t0), ("Gamma_T", sol.Gamma_T), ("gamma_T", float(sol.gamma[-1])),
        ("foc_residual", sol.foc_residual), ("ode_step", sol.step), ("refinements", sol.refinements),
        ("support_distance_start", float(d[0])), ("support_distance_end", float(d[-1])),
    ])


def cmd_bounded(cfg, run, args):
    """Engagement under bounded belief jumps."""
    from .extensions.bounded import bounded_jump_solve

    P = cfg.decision_problem()
    rows = []
    for d in cfgmod.grid_values(cfg.params["d"]):
        s = bounded_jump_solve(P, d)
        lo, hi = s.posterior.binary_support() if s.posterior.size == 2 else (np.nan, np.nan)
        b_lo, b_hi = s.support_bound if s.support_bound is not None else (np.nan, np.nan)
        rows.append((d, s.engagement, lo, hi, b_lo, b_hi, s.method))
        run.say(f"J_d[{FLOAT_FORMAT % d}]", s.engagement)
    run.csv("bounded", ["d", "engagement", "support_lo", "support_hi", "bound_lo", "bound_hi", "method"], rows)


def cmd_unlimited(cfg, run, args):
    """Time maximization without a capacity bound."""
    from .extensions.unlimited import unlimited_capacity_solve

    P = cfg.decision_problem()
    s = unlimited_capacity_solve(P)
    run.csv("unlimited_posterior", _posterior_header(P.states), _posterior_rows("full-information", s.pi_max, P.states))
    _summary(run, "unlimited_summary", [
        ("alpha", s.alpha), ("expected_tau", s.expected_tau), ("value_of_information", s.value_of_information),
        ("bound_gap", s.bound_gap), ("degenerate", s.degenerate),
    ])


def cmd_teacher(cfg, run, args):
    """Teacher and student scenarios."""
    from .extensions.teacher import STATES, teacher_engagement_max, teacher_knowledge_max

    seed = args.seed if args.seed is not None else cfg.params["seed"]
    eng = teacher_engagement_max(trials=cfg.params["trials"], seed=int(seed))
    kn = teacher_knowledge_max()
    run.csv("teacher_knowledge", ["action", *STATES], kn.rows())
    run.csv("teacher_engagement", _posterior_header(STATES), _posterior_rows("principal", eng.pi_star, STATES))
    _summary(run, "teacher_summary", [
        ("lambda", kn.lam), ("ic_residual", kn.ic_residual), ("marginal_error", kn.marginal_error),
        ("J_four_state", eng.four_state.engagement), ("J_binary", eng.binary.engagement),
        ("engagement_gap", eng.engagement_gap), ("t2_marginal_error", eng.t2_marginal_error),
        ("compression_worst", eng.compression_worst),
    ])


def cmd_example(cfg, run, args):
    """Built-in two-state example (no config needed)."""
    from .scenarios import example_1_1

    _summary(run, "example_1_1", example_1_1().rows())


HANDLERS = {
    "solve": cmd_solve, "benchmark": cmd_benchmark, "sweep": cmd_sweep, "simulate": cmd_simulate,
    "audit": cmd_audit, "increasing": cmd_increasing, "bounded": cmd_bounded, "unlimited": cmd_unlimited,
    "teacher": cmd_teacher, "example-1-1": cmd_example,
}

NEEDS_CONFIG = set(SUBCOMMANDS) - {"example-1-1", "teacher"}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="engagemax", description="Engagement-maximizing information design scenarios.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HANDLERS[name].__doc__)
        p.add_argument("--config", type=Path, required=name in NEEDS_CONFIG, help="JSON scenario file")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (overrides the config)")
        p.add_argument("--samples", type=int, default=None, help="Monte-Carlo paths (overrides the config)")
        p.add_argument("--out", type=Path, default=None, help="output directory")
    return ap


def output_dir(cli_out, cfg) -> Path:
    if cli_out is not None:
        return Path(cli_out)
    if cfg.directory is not None:
        return Path(cfg.directory)
    return Path(os.environ.get(ENV_OUT) or DEFAULT_OUT)


def run(argv=None, stream=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.seed is not None and args.seed < 0:
            raise InputError("--seed: must be nonnegative")
        if args.samples is not None and args.samples < 1:
            raise InputError("--samples: must be at least 1")
        if args.config is not None:
            cfg = cfgmod.load(args.config)
        else:
            cfg = cfgmod.ScenarioConfig(None, None)
        cfg = cfg.with_command(args.subcommand)
        r = Run(output_dir(args.out, cfg), cfg.prefix, stream)
        HANDLERS[args.subcommand](cfg, r, args)
        for p in r.written:
            log.info("wrote %s", p)
        return 0
    except EngagemaxError as exc:
        print(f"engagemax: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FloatingPointError as exc:
        print(f"engagemax: error: {exc}", file=sys.stderr)
        return 4


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
