"""Command-line front end: campaign orchestration and report emission.

Exit codes: 0 when every expectation of the requested suite holds, 1 when a
mathematical expectation is violated (a potential finding), 2 for usage or
configuration errors.  Every command is deterministic given its full flag
set including --seed; --dump-config emits the effective configuration as
JSON and --config reads one back, with explicit flags taking precedence.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import chains, dsl, verify
from .chains import Family
from .verify import (
    CampaignReport,
    ParamTemplate,
    PGrid,
    SearchConfig,
    WeightPolicy,
    check_hypotheses,
    check_reduction_chain,
    gen_suite_tuple,
    gen_unordered_tuple,
    limit_probe,
    merge_reports,
    reduction_scalar_interior,
    scalar_tuple,
    search_counterexample,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

_CHECK_DEFAULTS = {
    "k": 3,
    "dim": 3,
    "seed": 0,
    "count": 10,
    "p_grid": "1,1.5,2,4",
    "s_grid": "1,10,100,1000,10000",
    "tol_rel": 1e-9,
    "suite_tol_rel": 1e-7,
    "weights": "necessity",
    "jobs": 1,
    "field": "real",
    "t": None,
    "r": None,
    "scalar_fixture": None,
    "report": None,
    "mode": None,
}

_SEARCH_DEFAULTS = {
    "budget": 200,
    "k": 3,
    "dim": "2,3,4",
    "seed": 0,
    "p_grid": "1,1.5,2,4,8",
    "weights": None,
    "findings": None,
    "emit_stats": False,
    "tol_rel": 1e-9,
    "field": "real",
}


class UsageError(Exception):
    pass


def _csv_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in str(text).split(","))
    except ValueError as exc:
        raise UsageError(f"malformed number list {text!r}") from exc


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in str(text).split(","))
    except ValueError as exc:
        raise UsageError(f"malformed integer list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oporder",
        description="Numerical laboratory for operator-order chain inequalities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser(
        "exponent",
        help="aggregate chain exponent and the necessity weight for given t, p, r",
    )
    p_exp.add_argument("--t", required=True, help="comma-separated t values")
    p_exp.add_argument("--p", required=True, help="comma-separated p values")
    p_exp.add_argument("--r", type=float, default=None,
                       help="also print the necessity weight for this r")

    p_pc = sub.add_parser("print-chain", help="emit chain inequalities in DSL syntax")
    p_pc.add_argument("--k", type=int, required=True)
    p_pc.add_argument("--family", choices=["asc", "desc"], default="asc")
    p_pc.add_argument("--member", type=int, default=1)
    p_pc.add_argument("--all", action="store_true",
                      help="print the whole hypothesis set, one per line")

    p_chk = sub.add_parser("check", help="run a verification campaign")
    p_chk.add_argument("--mode", choices=[
        "necessity", "contrapositive", "proof-steps", "limit",
    ])
    p_chk.add_argument("--k", type=int)
    p_chk.add_argument("--dim", type=int)
    p_chk.add_argument("--seed", type=int)
    p_chk.add_argument("--count", type=int, help="number of generated instances")
    p_chk.add_argument("--p-grid", dest="p_grid")
    p_chk.add_argument("--s-grid", dest="s_grid",
                       help="exponent samples for the limit mode")
    p_chk.add_argument("--tol-rel", dest="tol_rel", type=float)
    p_chk.add_argument("--suite-tol-rel", dest="suite_tol_rel", type=float)
    p_chk.add_argument("--weights", help="necessity | fixed:<csv>")
    p_chk.add_argument("--t", help="fixed t values (csv); sampled per instance if absent")
    p_chk.add_argument("--r", type=float)
    p_chk.add_argument("--scalar-fixture",
                       help="csv scalars for a 1x1 fixture tuple (contrapositive mode)")
    p_chk.add_argument("--report", help="write campaign rows to this CSV path")
    p_chk.add_argument("--jobs", type=int)
    p_chk.add_argument("--field", choices=["real", "complex"])
    p_chk.add_argument("--config", help="JSON config file; flags override its entries")
    p_chk.add_argument("--dump-config", action="store_true",
                       help="print the effective config as JSON and exit")

    p_s = sub.add_parser("search", help="randomized counterexample hunt")
    p_s.add_argument("--budget", type=int)
    p_s.add_argument("--k", type=int)
    p_s.add_argument("--dim", help="comma-separated candidate dimensions")
    p_s.add_argument("--seed", type=int)
    p_s.add_argument("--p-grid", dest="p_grid")
    p_s.add_argument("--weights", help="necessity | fixed:<csv>; random fixed if absent")
    p_s.add_argument("--findings", help="write findings JSON to this path")
    p_s.add_argument("--emit-stats", dest="emit_stats", action="store_true",
                     default=None)
    p_s.add_argument("--tol-rel", dest="tol_rel", type=float)
    p_s.add_argument("--field", choices=["real", "complex"])
    p_s.add_argument("--config", help="JSON config file; flags override its entries")
    p_s.add_argument("--dump-config", action="store_true")
    return parser


def _effective_config(args, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    config = dict(defaults)
    path = getattr(args, "config", None)
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            config[key] = flag
    return config


def _cmd_exponent(args) -> int:
    t = _csv_floats(args.t)
    p = _csv_floats(args.p)
    try:
        psi = chains.chain_exponent(t, p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"chain_exponent = {psi:.12g}")
    if args.r is not None:
        try:
            w = chains.necessity_weight_from(t, p, args.r)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print(f"necessity_weight = {w:.12g}")
    return EXIT_OK


def _cmd_print_chain(args) -> int:
    try:
        params = chains.placeholder_params(args.k)
        if args.all:
            for chain in chains.hypothesis_set(params):
                print(dsl.pretty_print(chain))
            return EXIT_OK
        family = Family.ASCENDING if args.family == "asc" else Family.DESCENDING
        chain = chains.build_chain(family, args.member, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(dsl.pretty_print(chain))
    return EXIT_OK


def _sample_template(cfg, rng, n: int) -> ParamTemplate:
    if cfg["t"] is not None:
        t = _csv_floats(cfg["t"])
        if len(t) != n:
            raise UsageError(f"--t needs {n} values for k={cfg['k']}, got {len(t)}")
    else:
        t = tuple(rng.uniform(0.05, 0.95) for _ in range(n))
    r = cfg["r"] if cfg["r"] is not None else t[-1] + rng.uniform(0.1, 2.0)
    if not r > t[-1]:
        raise UsageError(f"--r must exceed t_n = {t[-1]}, got {r}")
    return ParamTemplate(t=t, r=r)


def _check_instances(cfg) -> list[int]:
    return list(range(int(cfg["count"])))


def _run_parallel(jobs: int, work, indices):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(work, indices))
    return [work(i) for i in indices]


def _campaign_grid(cfg) -> PGrid:
    return PGrid(values=_csv_floats(cfg["p_grid"]))


def _cmd_check(args) -> int:
    cfg = _effective_config(args, _CHECK_DEFAULTS)
    if args.dump_config:
        print(json.dumps(cfg, indent=2, sort_keys=True))
        return EXIT_OK
    if not cfg["mode"]:
        raise UsageError("--mode is required (or supply it via --config)")
    if cfg["k"] < 2:
        raise UsageError(f"--k must be at least 2, got {cfg['k']}")
    if cfg["k"] == 2 and cfg["mode"] in ("necessity", "contrapositive", "proof-steps"):
        raise UsageError("chain campaigns need k >= 3")
    mode = cfg["mode"]
    grid = _campaign_grid(cfg)
    policy = WeightPolicy.parse(cfg["weights"])
    seed = int(cfg["seed"])
    n = int(cfg["k"]) // 2
    suite_tol = float(cfg["suite_tol_rel"])

    violations: list[str] = []
    reports: list[CampaignReport] = []

    if mode in ("necessity", "contrapositive"):
        fixture = cfg["scalar_fixture"]

        def make_instance(idx: int):
            rng = verify._rng(seed, idx, 99)
            if fixture is not None:
                tup = scalar_tuple(_csv_floats(fixture))
                if tup.k != cfg["k"]:
                    raise UsageError(
                        f"fixture has {tup.k} scalars but --k is {cfg['k']}"
                    )
            elif mode == "necessity":
                tup = gen_suite_tuple(cfg["k"], cfg["dim"], [seed, idx],
                                      field_kind=cfg["field"])
            else:
                tup = gen_unordered_tuple(cfg["k"], cfg["dim"], [seed, idx],
                                          field_kind=cfg["field"])
            return tup, _sample_template(cfg, rng, n)

        def run_instance(idx: int):
            tup, template = make_instance(idx)
            report = check_hypotheses(
                tup, template, grid, policy,
                tol_rel=float(cfg["tol_rel"]), instance_id=str(idx),
                master_seed=seed, instance_index=idx, suite_tol_rel=suite_tol,
            )
            return idx, tup, template, report

        count = 1 if fixture is not None else int(cfg["count"])
        instances = _run_parallel(int(cfg["jobs"]), run_instance, range(count))
        reports = [rep for _, _, _, rep in instances]
        for idx, tup, template, rep in instances:
            bad = rep.violations(suite_tol)
            if mode == "necessity":
                for row in bad:
                    violations.append(
                        f"instance {idx}: {row.family} member {row.member} at "
                        f"p={row.p_vector} margin {row.margin:.6e} "
                        f"({row.error or row.verdict})"
                    )
            else:
                genuine = [r for r in bad if r.error is None]
                if genuine:
                    worst = min(genuine, key=lambda r: r.margin)
                    print(f"instance {idx}: hypothesis-failure found "
                          f"(margin {worst.margin:.6f})")
                    continue
                # nothing failed on the sampled grid; the violation may hide
                # beyond it, so probe the member cores (including t = 1)
                implied = verify.implied_core_violation(
                    tup, template, grid,
                    master_seed=seed, instance_index=idx, suite_tol_rel=suite_tol,
                )
                if implied is not None:
                    print(f"instance {idx}: hypothesis-failure implied "
                          f"(core margin {implied['core_margin']:.6f} at "
                          f"t={implied['t']})")
                else:
                    violations.append(
                        f"instance {idx}: no hypothesis violation found on or "
                        f"beyond the sampled grid"
                    )

    elif mode == "proof-steps":
        def run_instance(idx: int):
            rng = verify._rng(seed, idx, 99)
            tup = gen_suite_tuple(cfg["k"], cfg["dim"], [seed, idx],
                                  field_kind=cfg["field"])
            if cfg["t"] is not None:
                template = _sample_template(cfg, rng, n)
            else:
                t = (rng.uniform(0.75, 0.95),) + tuple(
                    rng.uniform(0.05, 0.15) for _ in range(n - 1)
                )
                template = ParamTemplate(t=t, r=t[-1] + rng.uniform(0.3, 1.2))
            return check_reduction_chain(
                tup, template, grid, policy=policy,
                tol_rel=float(cfg["tol_rel"]), suite_tol_rel=suite_tol,
                master_seed=seed, instance_index=idx, instance_id=str(idx),
            )

        results = _run_parallel(int(cfg["jobs"]), run_instance, _check_instances(cfg))
        for idx, rep in enumerate(results):
            if not rep.premise_pass:
                violations.append(f"instance {idx}: premise member failed on the grid")
            violations.extend(rep.red_flags)
            for row in rep.rows:
                if not all(row.holds(suite_tol)):
                    violations.append(
                        f"instance {idx}: reduction margins "
                        f"({row.margin_core:.3e}, {row.margin_peel:.3e}, "
                        f"{row.margin_scalar:.3e}) at p={row.p_vector}"
                        + (f" [{row.error}]" if row.error else "")
                    )

    elif mode == "limit":
        p2_values = _csv_floats(cfg["s_grid"])

        def run_instance(idx: int):
            rng = verify._rng(seed, idx, 99)
            tup = gen_suite_tuple(cfg["k"], cfg["dim"], [seed, idx],
                                  field_kind=cfg["field"])
            template = _sample_template(cfg, rng, n)
            limit_t = (1.0,) + template.t[1:]
            interior = reduction_scalar_interior(tup, limit_t, (1.0,) * (2 * n), n)
            rep = limit_probe(
                tup.matrices[0], tup.matrices[1], c=max(1.0, interior),
                p2_values=p2_values, tol_rel=float(cfg["tol_rel"]),
            )
            return rep

        results = _run_parallel(int(cfg["jobs"]), run_instance, _check_instances(cfg))
        for idx, rep in enumerate(results):
            if not rep.monotone_nonincreasing:
                violations.append(f"instance {idx}: bound sequence is not monotone")
            if rep.order_consistent != rep.conclusion.ge:
                violations.append(
                    f"instance {idx}: limit declaration {rep.order_consistent} "
                    f"disagrees with direct comparison {rep.conclusion.relation.value}"
                )
            print(f"instance {idx}: c={rep.c:.6g} final={rep.sequence[-1]:.8g} "
                  f"consistent={rep.order_consistent}")

    if cfg["report"] and reports:
        merged = merge_reports(reports, {k: v for k, v in cfg.items()}, seed)
        merged.write_csv(cfg["report"])

    if violations:
        for line in violations:
            print(f"VIOLATION: {line}", file=sys.stderr)
        return EXIT_VIOLATION
    print("all expectations met")
    return EXIT_OK


def _cmd_search(args) -> int:
    cfg = _effective_config(args, _SEARCH_DEFAULTS)
    if args.dump_config:
        print(json.dumps(cfg, indent=2, sort_keys=True))
        return EXIT_OK
    if cfg["budget"] < 0:
        raise UsageError(f"--budget must be nonnegative, got {cfg['budget']}")
    if cfg["k"] < 3:
        raise UsageError(f"--k must be at least 3, got {cfg['k']}")
    policy = WeightPolicy.parse(cfg["weights"]) if cfg["weights"] else None
    config = SearchConfig(
        budget=int(cfg["budget"]),
        k=int(cfg["k"]),
        dims=_csv_ints(cfg["dim"]),
        master_seed=int(cfg["seed"]),
        grid=PGrid(values=_csv_floats(cfg["p_grid"])),
        policy=policy,
        field_kind=cfg["field"],
    )
    report = search_counterexample(config)
    if not cfg["emit_stats"]:
        report.stats.pop("margin_histogram", None)
    if cfg["findings"]:
        report.write_json(cfg["findings"])
    print(json.dumps({"findings": len(report.findings),
                      "counters": report.stats["counters"]}, indent=2))
    if report.findings:
        print("candidate counterexamples emitted; grid passing does not "
              "certify the universal hypothesis", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        if args.command == "exponent":
            return _cmd_exponent(args)
        if args.command == "print-chain":
            return _cmd_print_chain(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "search":
            return _cmd_search(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
