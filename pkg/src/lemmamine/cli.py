"""Command-line interface.

Exit codes: 0 when the command ran to completion (whether or not anything
was proved), 2 for configuration or input errors, 3 for internal errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from .checker.engine import bmc, check_strengthening, kinduction
from .config import Config, load_config
from .errors import ConfigError, LemmaMineError, SolverCrash
from .hdl.design import load_design
from .prompting.drivers import MiningTask
from .report import emit_report, groups_to_csv
from .suite import load_manifest, run_suite, run_task

log = logging.getLogger("lemmamine")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _add_budget(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--bound", type=int, help="BMC bound: last frame index searched")
    p.add_argument("--timeout", type=float, help="per-query solver timeout in seconds")
    p.add_argument("--k", type=int, help="induction depth")
    p.add_argument("--solver", help="external DIMACS solver command (default: built-in)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lemmamine", description="Mine helper lemmas for hardware safety proofs.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="search for an inductive strengthening of one property")
    mine.add_argument("--design", required=True, help="Verilog/SystemVerilog design file")
    mine.add_argument("--property", help="property name (default: the asserted or only property)")
    mine.add_argument("--mode", choices=("agentic", "nonagentic"))
    mine.add_argument("--samples", type=int, help="samples (nonagentic) or rounds (agentic), at most 5")
    mine.add_argument("--fewshot", type=int, help="number of worked examples in the prompt")
    mine.add_argument("--generator", choices=("mock", "llm", "templates"))
    mine.add_argument("--mock-script", help="JSON array of scripted responses for --generator mock")
    mine.add_argument("--max-literals", type=int, help="clause size for --generator templates")
    mine.add_argument("--out", help="directory for the run log and certificate")
    mine.add_argument("--json", action="store_true", help="print the full outcome as JSON")
    _add_budget(mine)

    suite = sub.add_parser("suite", help="run every task of a manifest and write reports")
    suite.add_argument("--manifest", required=True, help="suite manifest (JSON)")
    suite.add_argument("--out", required=True, help="output directory")
    suite.add_argument("--workers", type=int, help="parallel worker processes (default: cores, at most 8)")
    _add_budget(suite)

    check = sub.add_parser("check", help="bounded and inductive checks of one property")
    check.add_argument("--design", required=True)
    check.add_argument("--property")
    check.add_argument("--lemma", action="append", default=[], help="lemma text (repeatable)")
    check.add_argument("--json", action="store_true")
    _add_budget(check)
    return parser


def _config(args: argparse.Namespace) -> Config:
    config = load_config(args.config)
    overrides = {"bmc_bound": args.bound, "timeout": args.timeout, "k": args.k, "external_solver": args.solver}
    for name in ("mode", "samples", "fewshot", "generator", "mock_script", "max_literals"):
        if hasattr(args, name):
            overrides[name] = getattr(args, name)
    try:
        return config.with_overrides(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _task(path: str, prop: str | None, config: Config) -> MiningTask:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"design file {path} does not exist")
    design = load_design(p.read_text(encoding="utf-8"), str(p), config.depth_cap)
    return MiningTask(design, prop)


def cmd_mine(args: argparse.Namespace) -> int:
    config = _config(args)
    task = _task(args.design, args.property, config)
    outcome = run_task(config, task, out_dir=args.out)
    if args.json:
        print(outcome.to_json())
        return EXIT_OK
    print(f"task: {outcome.task}  mode: {outcome.mode}  generator: {outcome.generator}")
    if outcome.note:
        print(f"note: {outcome.note}")
    if outcome.error:
        print(f"generator error: {outcome.error}")
    print(f"total lemmas: {outcome.total_lemmas}  correct: {outcome.correct}  "
          f"1-inductive: {outcome.one_inductive}  solved: {str(outcome.solved).lower()}")
    for text in outcome.lemmas:
        print(f"  lemma: {text}")
    return EXIT_OK


def cmd_suite(args: argparse.Namespace) -> int:
    config = _config(args)
    manifest = load_manifest(args.manifest)
    if args.workers is not None and args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    report = run_suite(config, manifest, args.out, args.workers)
    out = Path(args.out)
    emit_report(report, "csv", out / "results.csv")
    emit_report(report, "json", out / "results.json")
    emit_report(report, "text", out / "results.txt")
    (out / "groups.csv").write_text(groups_to_csv(report), encoding="utf-8")
    print((out / "results.txt").read_text(encoding="utf-8"), end="")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    config = _config(args)
    task = _task(args.design, args.property, config)
    budget = config.budget
    b = bmc(task.compiled, budget)
    k = kinduction(task.compiled, budget)
    result = {"task": task.id, "bmc": b.as_dict(), "kinduction": k.as_dict(with_trace=False)}
    if args.lemma:
        lemmas = [task.design.compile_text(t, task.property_name) for t in args.lemma]
        result["certificate"] = check_strengthening(task.compiled, lemmas, budget).as_dict()
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"task: {task.id}")
    print(f"bmc (bound {budget.bmc_bound}): {b.status.value}" + (f" at depth {b.depth}" if b.trace else ""))
    for i, step in enumerate(b.trace or ()):
        state = " ".join(f"{n}={v}" for n, v in step.state.items if not n.startswith("$"))
        inputs = " ".join(f"{n}={v}" for n, v in step.inputs)
        print(f"  frame {i}: {state}" + (f" | {inputs}" if inputs else ""))
    print(f"{budget.k}-induction: {k.status.value}")
    if "certificate" in result:
        cert = result["certificate"]
        print(f"strengthening: {cert['status']}" + (f" ({cert['failed']} fails)" if "failed" in cert else ""))
    return EXIT_OK


COMMANDS = {"mine": cmd_mine, "suite": cmd_suite, "check": cmd_check}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except SolverCrash as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except LemmaMineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # top-level guard: report and map to the internal-error code
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
