"""``cesc`` command line: synth, check, oracle, gen, viz.

Exit codes: 0 ok, 1 property-negative (no detection, a FAIL, a
counterexample), 2 usage or enumeration cap, 3 parse/validation, 4
synthesis or generation.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from .chart import Mode, SpecFile
from .errors import CescError, ParseError, SynthesisError, TraceFormatError, ValidationError
from .gen import GenConfig, conforming, mutated
from .oracle import DEFAULT_ENUM_CAP, exhaustive_equiv, expected_verdicts
from .parser import read_spec
from .runtime import run
from .serialize import dump_net, load_net, net_to_dot
from .synth import DEFAULT_SAT_CAP, MonitorNet, synthesize
from .trace import Trace, read_trace, write_trace

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_PARSE, EXIT_SYNTH = 0, 1, 2, 3, 4

_PARSE_CODES = {"E_TRACE_FORMAT", "E_NONMONOTONIC_INDEX", "E_MONITOR_FORMAT", "E_MODE"}
_USAGE_CODES = {"E_ENUMERATION_TOO_LARGE"}
_SYNTH_CODES = {"E_UNSATISFIABLE_GEN", "E_VACUOUS", "E_UNIVERSE_TOO_LARGE"}


@dataclass
class Config:
    spec: str | None = None
    traces: tuple[str, ...] = ()
    mode: str | None = None
    monitor: str | None = None
    out: str | None = None
    dot: str | None = None
    seed: int = 0
    sat_cap: int = DEFAULT_SAT_CAP
    enum_cap: int = DEFAULT_ENUM_CAP


def exit_code_for(err: CescError) -> int:
    if isinstance(err, (ParseError, ValidationError, TraceFormatError)):
        return EXIT_PARSE
    if isinstance(err, SynthesisError) or err.code in _SYNTH_CODES:
        return EXIT_SYNTH
    if err.code in _USAGE_CODES:
        return EXIT_USAGE
    if err.code in _PARSE_CODES:
        return EXIT_PARSE
    return EXIT_PARSE


def _net(spec: SpecFile, monitor: str | None, cap: int) -> MonitorNet:
    if monitor:
        with open(monitor) as fh:
            return load_net(fh.read())
    return synthesize(spec, cap)


def _mode(spec: SpecFile, override: str | None) -> str:
    mode = override or spec.mode.value
    if Mode(mode) is not spec.mode:
        raise CescError(f"spec is written for {spec.mode.value} mode, not {mode}", code="E_MODE")
    return mode


def _load_trace(path: str, spec: SpecFile) -> Trace:
    with open(path) as fh:
        return read_trace(fh, spec.symbols)


def cmd_synth(cfg: Config) -> int:
    spec = read_spec(cfg.spec)
    net = synthesize(spec, cfg.sat_cap)
    text = dump_net(net)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.dot:
        with open(cfg.dot, "w") as fh:
            fh.write(net_to_dot(net))
    return EXIT_OK


def cmd_check(cfg: Config) -> int:
    spec = read_spec(cfg.spec)
    mode = _mode(spec, cfg.mode)
    net = _net(spec, cfg.monitor, cfg.sat_cap)
    status = EXIT_OK
    for path in cfg.traces:
        report = run(net, _load_trace(path, spec), mode, spec.symbols.events)
        if len(cfg.traces) > 1:
            sys.stdout.write(f"# {path}\n")
        sys.stdout.write(report.format())
        status = max(status, report.exit_status)
    return status


def _observed(net: MonitorNet, t: Trace, mode: str, events) -> list[tuple]:
    report = run(net, t, mode, events)
    return sorted((v.global_tick, v.kind, v.chart, v.detail) for v in report.verdicts)


def cmd_oracle(cfg: Config, exhaustive: int | None, cex_out: str) -> int:
    spec = read_spec(cfg.spec)
    mode = _mode(spec, cfg.mode)
    net = _net(spec, cfg.monitor, cfg.sat_cap) if (cfg.monitor or exhaustive is not None) else None
    if exhaustive is not None:
        rep = exhaustive_equiv(spec.top, exhaustive, spec.symbols, net=net,
                               name=spec.top_name, cap=cfg.enum_cap)
        sys.stdout.write(rep.format())
        if rep.ok:
            return EXIT_OK
        with open(cex_out, "w") as fh:
            write_trace(rep.counterexample, spec.symbols, fh)
        sys.stdout.write(f"counterexample written to {cex_out}\n")
        return EXIT_NEGATIVE
    if not cfg.traces:
        raise _Usage("oracle needs a trace or --exhaustive")
    if net is None:
        net = synthesize(spec, cfg.sat_cap)
    status = EXIT_OK
    for path in cfg.traces:
        t = _load_trace(path, spec)
        want, pending = expected_verdicts(spec.top, t, spec.top_name)
        for g, kind, chart, detail in want:
            sys.stdout.write(f"{kind} {g} {chart} {detail}".rstrip() + "\n")
        if pending:
            sys.stdout.write(f"pending {pending}\n")
        got = _observed(net, t, mode, spec.symbols.events)
        if got != sorted(want):
            sys.stdout.write(f"mismatch on {path}\n  oracle:  {sorted(want)}\n  monitor: {got}\n")
            with open(cex_out, "w") as fh:
                write_trace(t, spec.symbols, fh)
            sys.stdout.write(f"counterexample written to {cex_out}\n")
            status = EXIT_NEGATIVE
        else:
            sys.stdout.write(f"agree on {path}\n")
    return status


def cmd_gen(cfg: Config, n_conf: int | None, n_mut: int | None) -> int:
    spec = read_spec(cfg.spec)
    gcfg = GenConfig(seed=cfg.seed)
    items = conforming(spec, n_conf, gcfg) if n_conf is not None else mutated(spec, n_mut, gcfg)
    stem = os.path.splitext(os.path.basename(cfg.spec))[0]
    tag = "conforming" if n_conf is not None else "mutated"
    out_dir = cfg.out or "."
    os.makedirs(out_dir, exist_ok=True)
    for i, g in enumerate(items):
        path = os.path.join(out_dir, f"{stem}.{tag}.{i:03d}.trace")
        with open(path, "w") as fh:
            fh.write(f"# {g.kind} window={g.window[0]}..{g.window[1]} seed={cfg.seed}\n")
            write_trace(g.trace, spec.symbols, fh)
        sys.stdout.write(f"{path} {g.kind}\n")
    return EXIT_OK


def cmd_viz(cfg: Config) -> int:
    with open(cfg.monitor) as fh:
        net = load_net(fh.read())
    text = net_to_dot(net)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cesc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a monitor net from a chart file")
    s.add_argument("spec")
    s.add_argument("-o", "--out", help="write the .monitor file here (default: stdout)")
    s.add_argument("--dot", help="also write Graphviz DOT")
    s.add_argument("--sat-cap", type=int, default=DEFAULT_SAT_CAP)

    c = sub.add_parser("check", help="run a monitor over traces and report verdicts")
    c.add_argument("spec")
    c.add_argument("traces", nargs="+")
    c.add_argument("--mode", choices=[m.value for m in Mode])
    c.add_argument("--monitor", help="use this .monitor file instead of synthesizing")

    o = sub.add_parser("oracle", help="compare monitor against the reference semantics")
    o.add_argument("spec")
    o.add_argument("traces", nargs="*")
    o.add_argument("--exhaustive", type=int, metavar="MAXLEN")
    o.add_argument("--monitor")
    o.add_argument("--mode", choices=[m.value for m in Mode])
    o.add_argument("--cex-out", default="counterexample.trace")
    o.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP, help="enumeration cap")

    g = sub.add_parser("gen", help="generate conforming or mutated traces")
    g.add_argument("spec")
    kind = g.add_mutually_exclusive_group(required=True)
    kind.add_argument("--conforming", type=int, metavar="K")
    kind.add_argument("--mutated", type=int, metavar="K")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", default=".", help="output directory")

    v = sub.add_parser("viz", help="render a .monitor file as DOT")
    v.add_argument("monitor")
    v.add_argument("-o", "--out")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = Config(spec=getattr(args, "spec", None), traces=tuple(getattr(args, "traces", ()) or ()),
                 mode=getattr(args, "mode", None), monitor=getattr(args, "monitor", None),
                 out=getattr(args, "out", None), dot=getattr(args, "dot", None),
                 seed=getattr(args, "seed", 0),
                 sat_cap=getattr(args, "sat_cap", DEFAULT_SAT_CAP),
                 enum_cap=getattr(args, "cap", DEFAULT_ENUM_CAP))
    try:
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "oracle":
            return cmd_oracle(cfg, args.exhaustive, args.cex_out)
        if args.command == "gen":
            for k in (args.conforming, args.mutated):
                if k is not None and k < 0:
                    raise _Usage("trace count must be nonnegative")
            return cmd_gen(cfg, args.conforming, args.mutated)
        return cmd_viz(cfg)
    except _Usage as exc:
        print(f"cesc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cesc {args.command}: {exc.strerror}: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        for d in exc.diagnostics:
            where = f"{d.line}: " if d.line is not None else ""
            print(f"{d.code}: {where}{d.message}", file=sys.stderr)
        return EXIT_PARSE
    except CescError as exc:
        print(str(exc), file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
