"""Command line front end.

Commands::

    nbrv check scover|ccover|synchro FILE [--target CONF]
         [--method explore|abstract|auto] [--max-procs N] [--max-steps B]
    nbrv abstract FILE [--trace]
    nbrv explore protocol FILE --procs N [--list]
    nbrv explore machine FILE --loc L --cap C [--budget B]
    nbrv explore vas FILE --cap C [--budget B]
    nbrv translate p2cm|cm2p|cm2vas|minsky2p IN OUT [--target CONF | --target-loc L]
    nbrv gen lipton --levels N IN OUT [--target-loc L]
    nbrv gen rst --levels N --level I OUT

Exit codes: 0 the analysis ran (whatever the verdict), 2 parse error in an
input file, 3 precondition violation (bad flag combination, wrong model
class for the requested method...).

The first result line is ``RESULT YES|NO|UNKNOWN``; YES verdicts found by
search are followed by ``STEP <label> <config>`` lines that replay the
witness.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import explore, fileio, gadgets, machines, reductions, waitonly
from .explore import Problem, Verdict
from .model import Protocol

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3


class PreconditionError(Exception):
    """Raised for bad flag combinations or wrong model classes."""


def _load_protocol(path: str) -> Protocol:
    return fileio.parse_protocol(Path(path).read_text(), file=path)


def _load_machine(path: str) -> machines.CounterMachine:
    return fileio.parse_machine(Path(path).read_text(), file=path)


def _load_vas(path: str) -> machines.Vas:
    return fileio.parse_vas(Path(path).read_text(), file=path)


def _machine_config_literal(m: machines.CounterMachine, cfg: machines.MachineConfig) -> str:
    vals = ",".join(f"{x}={v}" for x, v in zip(m.counters, cfg.values))
    return f"{cfg.loc};{vals}" if vals else cfg.loc


def _print_verdict(verdict: Verdict, render_step) -> None:
    print(f"RESULT {verdict.answer.upper()}")
    if verdict.is_yes() and verdict.witness is not None:
        for label, state in verdict.witness.steps:
            print(f"STEP {render_step(label, state)}")


def _cmd_check(args: argparse.Namespace) -> int:
    p = _load_protocol(args.file)
    if args.problem == "ccover":
        if args.target is None:
            raise PreconditionError("ccover requires --target")
        target = fileio.parse_config(args.target, p)
        problem = Problem("ccover", target)
    else:
        if args.target is not None:
            raise PreconditionError(f"{args.problem} takes no --target")
        problem = Problem(args.problem)

    method = args.method
    if method == "auto":
        if args.problem != "synchro" and waitonly.is_wait_only(p):
            method = "abstract"
        else:
            method = "explore"

    if method == "abstract":
        if args.problem == "synchro":
            raise PreconditionError("the abstract analysis does not decide synchro")
        try:
            if args.problem == "scover":
                verdict = waitonly.decide_state_cover(p)
            else:
                assert problem.target is not None
                verdict = waitonly.decide_cover(p, problem.target)
        except waitonly.NotWaitOnlyError as exc:
            raise PreconditionError(str(exc)) from exc
    else:
        verdict = explore.decide_sweep(p, problem, args.max_procs, args.max_steps)
    _print_verdict(verdict, lambda label, cfg: f"{label} {cfg}")
    return EXIT_OK


def _cmd_abstract(args: argparse.Namespace) -> int:
    p = _load_protocol(args.file)
    try:
        _gamma, trace = waitonly.fixpoint(p)
    except waitonly.NotWaitOnlyError as exc:
        raise PreconditionError(str(exc)) from exc
    shown = trace if args.trace else trace[-1:]
    for gamma in shown:
        states = ",".join(gamma.sorted_states())
        toks = ",".join(f"({q},{m})" for q, m in gamma.sorted_tokens())
        print(f"S = {{{states}}} Toks = {{{toks}}}")
    return EXIT_OK


def _cmd_explore(args: argparse.Namespace) -> int:
    if args.kind == "protocol":
        p = _load_protocol(args.file)
        configs = explore.reachable(p, args.procs, args.budget)
        print(f"REACHABLE {len(configs)}")
        if args.list:
            for c in sorted(configs, key=lambda c: c.items):
                print(f"CONFIG {c}")
        return EXIT_OK
    if args.kind == "machine":
        m = _load_machine(args.file)
        if args.loc is None:
            raise PreconditionError("explore machine requires --loc")
        verdict = machines.cover_bounded(m, args.loc, args.cap, args.budget)
        _print_verdict(verdict, lambda t, cfg: f"{t[1]} {_machine_config_literal(m, cfg)}")
        return EXIT_OK
    v = _load_vas(args.file)
    verdict = machines.vas_cover_bounded(v, args.cap, args.budget)
    _print_verdict(
        verdict,
        lambda t, vec: "{} ; {} -> {}".format(
            " ".join(str(x) for x in t[0]),
            " ".join(str(x) for x in t[1]),
            " ".join(str(x) for x in vec),
        ),
    )
    return EXIT_OK


def _cmd_translate(args: argparse.Namespace) -> int:
    kind = args.kind
    out = Path(args.out)
    if kind == "p2cm":
        if args.target is None:
            raise PreconditionError("p2cm requires --target")
        p = _load_protocol(args.infile)
        target = fileio.parse_config(args.target, p)
        machine, final_loc, report = reductions.protocol_to_machine(p, target)
        out.write_text(fileio.serialize_machine(machine))
        print(f"TARGET {final_loc}")
    elif kind == "cm2p":
        if args.target_loc is None:
            raise PreconditionError("cm2p requires --target-loc")
        m = _load_machine(args.infile)
        try:
            protocol, report = reductions.machine_to_protocol(m, args.target_loc)
        except machines.MachineError as exc:
            raise PreconditionError(str(exc)) from exc
        out.write_text(fileio.serialize_protocol(protocol))
    elif kind == "cm2vas":
        if args.target_loc is None:
            raise PreconditionError("cm2vas requires --target-loc")
        m = _load_machine(args.infile)
        try:
            vas = reductions.machine_to_vas(m, args.target_loc)
        except machines.MachineError as exc:
            raise PreconditionError(str(exc)) from exc
        out.write_text(fileio.serialize_vas(vas))
        print(f"SIZE dim={vas.dim} transitions={len(vas.transitions)}")
        return EXIT_OK
    else:
        if args.target_loc is None:
            raise PreconditionError("minsky2p requires --target-loc")
        m = _load_machine(args.infile)
        if m.nonblocking or m.restore:
            raise PreconditionError(
                "minsky2p takes a plain two-counter machine "
                "(no nbdec transitions, restore off)")
        try:
            mm = reductions.MinskyMachine(
                name=m.name,
                locations=m.locations,
                init=m.init,
                final=args.target_loc,
                counters=tuple(m.counters),  # type: ignore[arg-type]
                transitions=m.blocking,
            )
            protocol, report = reductions.minsky_to_protocol(mm)
        except machines.MachineError as exc:
            raise PreconditionError(str(exc)) from exc
        out.write_text(fileio.serialize_protocol(protocol))
    print(f"SIZE source={report.source_size} target={report.target_size}")
    return EXIT_OK


def _cmd_gen(args: argparse.Namespace) -> int:
    out = Path(args.out)
    if args.kind == "lipton":
        m = _load_machine(args.infile)
        target = args.target_loc or m.init
        try:
            shell = gadgets.restore_shell(m, args.levels, target)
        except (machines.MachineError, gadgets.LevelError) as exc:
            raise PreconditionError(str(exc)) from exc
        out.write_text(fileio.serialize_machine(shell))
        print(f"TARGET {target}")
        print(f"SIZE locations={len(shell.locations)} counters={len(shell.counters)}")
    else:
        try:
            ctx = gadgets.LevelContext.create(args.levels)
            pm = gadgets.reset_level(ctx, args.level)
        except gadgets.LevelError as exc:
            raise PreconditionError(str(exc)) from exc
        out.write_text(fileio.serialize_machine(pm.to_machine()))
        print(f"SIZE locations={len(pm.locations)} counters={len(pm.counters)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nbrv",
        description="Coverability analyses for networks with non-blocking rendez-vous.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="decide a verification question")
    check.add_argument("problem", choices=["scover", "ccover", "synchro"])
    check.add_argument("file")
    check.add_argument("--target", help="configuration literal for ccover")
    check.add_argument("--method", choices=["explore", "abstract", "auto"], default="auto")
    check.add_argument("--max-procs", type=int, default=8)
    check.add_argument("--max-steps", type=int, default=explore.DEFAULT_BUDGET)
    check.set_defaults(func=_cmd_check)

    abstract = sub.add_parser("abstract", help="run the wait-only abstraction")
    abstract.add_argument("file")
    abstract.add_argument("--trace", action="store_true")
    abstract.set_defaults(func=_cmd_abstract)

    explore_cmd = sub.add_parser("explore", help="bounded exhaustive exploration")
    explore_cmd.add_argument("kind", choices=["protocol", "machine", "vas"])
    explore_cmd.add_argument("file")
    explore_cmd.add_argument("--procs", type=int, default=2)
    explore_cmd.add_argument("--list", action="store_true")
    explore_cmd.add_argument("--loc")
    explore_cmd.add_argument("--cap", type=int, default=8)
    explore_cmd.add_argument("--budget", type=int, default=explore.DEFAULT_BUDGET)
    explore_cmd.set_defaults(func=_cmd_explore)

    translate = sub.add_parser("translate", help="compile between model classes")
    translate.add_argument("kind", choices=["p2cm", "cm2p", "cm2vas", "minsky2p"])
    translate.add_argument("infile")
    translate.add_argument("out")
    translate.add_argument("--target", help="configuration literal (p2cm)")
    translate.add_argument("--target-loc", help="target location (cm2p, cm2vas, minsky2p)")
    translate.set_defaults(func=_cmd_translate)

    gen = sub.add_parser("gen", help="generate bounding gadget machines")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    lipton = gen_sub.add_parser("lipton", help="wrap a machine in the restore shell")
    lipton.add_argument("infile")
    lipton.add_argument("out")
    lipton.add_argument("--levels", type=int, required=True)
    lipton.add_argument("--target-loc")
    lipton.set_defaults(func=_cmd_gen, kind="lipton")
    rst = gen_sub.add_parser("rst", help="emit one reset gadget")
    rst.add_argument("out")
    rst.add_argument("--levels", type=int, required=True)
    rst.add_argument("--level", type=int, required=True)
    rst.set_defaults(func=_cmd_gen, kind="rst")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except fileio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (
        explore.ResourceLimitError,
        machines.MachineError,
        machines.VasError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
