"""Command line front end: gen, solve, verify, oracle, bench.

Exit status is nonzero whenever a contractual verdict fails: a solve whose
report is not successful, a verify that finds a stored report inconsistent,
or an oracle run contradicting a requested property.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ChorefairError
from .harness import (GenParams, bench, equilibrium_from_parts, gen_instance,
                      instance_digest, instance_text, load_instance,
                      load_report, parse_rational, replay_report,
                      report_fingerprint, report_text, run_pipeline,
                      save_instance, save_report)
from .model import Instance, RawInstance, normalize_instance
from .oracle import DEFAULT_BUDGET, best_efx_beta_over_po, exists_efx_po
from .verify import check_EF1, check_equilibrium, check_pEF1, min_beta_EFX


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_gen(args) -> int:
    params = GenParams(n=args.n, m=args.m, k=parse_rational(args.k, "--k"),
                       high_prob=parse_rational(args.high_prob, "--high-prob"),
                       seed=args.seed)
    raw = gen_instance(params)
    if args.normalized:
        _write(args.out, instance_text(normalize_instance(raw)))
    else:
        _write(args.out, instance_text(raw))
    return 0


def _load_normalized(path: str) -> Instance:
    inst = load_instance(path)
    return normalize_instance(inst) if isinstance(inst, RawInstance) else inst


def _cmd_solve(args) -> int:
    inst = _load_normalized(args.instance)
    report = run_pipeline(inst, args.mode, oracle_budget=args.oracle_budget)
    text = report_text(report)
    if args.out:
        save_report(args.out, report)
        if args.trace:
            sys.stdout.write(text)
    else:
        sys.stdout.write(text)
    if not report.success:
        print(f"solve failed: {report.error or 'verdict failed'}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    """Re-derive every verdict of a stored report from its stored states."""
    inst = _load_normalized(args.instance)
    report = load_report(args.report)
    problems: list[str] = []
    if report.digest != instance_digest(inst):
        problems.append("digest mismatch: report was made for a different instance")
    if report.verdicts is None:
        problems.append("report carries no verdicts")
    else:
        perm = report.new_to_old
        if sorted(perm) != list(range(inst.n)):
            problems.append("new-to-old is not a permutation")
        else:
            reindexed = Instance(inst.n, inst.m, inst.k,
                                 tuple(inst.high[old] for old in perm))
            final = equilibrium_from_parts(reindexed, report.owner,
                                           report.pay_high)
            v = report.verdicts
            checks = [
                ("final-equilibrium", check_equilibrium(final).holds,
                 v.final_equilibrium),
                ("final-pef1", check_pEF1(final).holds, v.final_pef1),
                ("beta-efx", min_beta_EFX(reindexed, final.allocation).value,
                 v.beta_efx),
            ]
            entry = equilibrium_from_parts(reindexed, report.entry_owner,
                                           report.entry_pay_high)
            checks += [
                ("entry-equilibrium", check_equilibrium(entry).holds,
                 v.entry_equilibrium),
                ("entry-pef1", check_pEF1(entry).holds, v.entry_pef1),
                ("entry-ef1", check_EF1(reindexed, entry.allocation).holds,
                 v.entry_ef1),
            ]
            for name, fresh, stored in checks:
                if fresh != stored:
                    problems.append(
                        f"{name}: recomputed {fresh}, report says {stored}")
            owner, pay = replay_report(report)
            if owner != report.owner or pay != report.pay_high:
                problems.append("trace replay does not reach the final state")
    if problems:
        for p in problems:
            print(f"verify: {p}", file=sys.stderr)
        return 1
    print(f"verify: ok (fingerprint {report_fingerprint(report)[:16]})")
    return 0


def _cmd_oracle(args) -> int:
    inst = _load_normalized(args.instance)
    witness = exists_efx_po(inst, budget=args.oracle_budget,
                            prune_identical_agents=args.prune)
    if witness is None:
        print("efx-po: none")
    else:
        print("efx-po: " + " ".join(map(str, witness.owner)))
    value, best = best_efx_beta_over_po(inst, budget=args.oracle_budget,
                                        prune_identical_agents=args.prune)
    print(f"best-beta-over-po: {value} with "
          + " ".join(map(str, best.owner)))
    if args.expect_efx and witness is None:
        return 1
    return 0


def _cmd_bench(args) -> int:
    k_values = [parse_rational(t, "--k") for t in args.k.split(",")]
    n_values = [int(t) for t in args.n.split(",")]
    m_values = [int(t) for t in args.m.split(",")]
    high_prob = parse_rational(args.high_prob, "--high-prob")
    grid = [
        GenParams(n=n, m=m, k=k, high_prob=high_prob, seed=seed)
        for k in k_values for n in n_values for m in m_values
        for seed in range(args.seed, args.seed + args.seeds)
    ]
    _write(args.out, bench(grid, mode=args.mode))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chorefair",
        description="Fair chore division: equilibrium computation, "
                    "envy-bounded reallocation, verification, ground truth.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", required=True, help="cost ratio, NUM/DEN or integer")
    p.add_argument("--high-prob", default="1/2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalized", action="store_true",
                   help="emit the normalized form instead of raw costs")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="run the pipeline on an instance file")
    p.add_argument("instance")
    p.add_argument("--mode", default="auto",
                   choices=["auto", "pef1", "approx", "exact2"])
    p.add_argument("--trace", action="store_true",
                   help="print the report even when writing to --out")
    p.add_argument("--oracle-budget", type=int, default=None,
                   help="also decide Pareto optimality when n^m is below this")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="recheck a stored report")
    p.add_argument("instance")
    p.add_argument("report")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("oracle", help="exhaustive search on a small instance")
    p.add_argument("instance")
    p.add_argument("--oracle-budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--prune", action="store_true",
                   help="skip relabelings of agents with identical cost rows")
    p.add_argument("--expect-efx", action="store_true",
                   help="exit nonzero when no exact EFX + PO allocation exists")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("bench", help="grid benchmark to CSV")
    p.add_argument("--n", default="4")
    p.add_argument("--m", default="8")
    p.add_argument("--k", default="2")
    p.add_argument("--high-prob", default="1/2")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--mode", default="auto",
                   choices=["auto", "pef1", "approx", "exact2"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ChorefairError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
