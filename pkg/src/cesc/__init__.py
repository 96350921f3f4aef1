"""Monitor synthesis for clocked event sequence charts.

Typical use::

    from cesc import load_spec, synthesize, read_trace, run

    spec = load_spec(open("handshake.cesc").read())
    net = synthesize(spec)
    report = run(net, read_trace(open("run.trace"), spec.symbols), spec.mode.value)
"""

from .chart import Mode, SpecFile, SymbolTable, validate
from .errors import CescError, ParseError, SynthesisError, TraceFormatError, ValidationError
from .expr import FALSE, TRUE, And, Const, Not, Or, Sym, evaluate, format_expr, parse_expr
from .oracle import exhaustive_equiv, expected_verdicts, window_match
from .parser import format_spec, load_spec, parse_spec, read_spec
from .runtime import Verdict, VerdictReport, run, step
from .scoreboard import Scoreboard
from .serialize import dump_net, load_net, net_to_dot, to_dot
from .synth import (
    Monitor,
    MonitorNet,
    Pattern,
    add_causality_check,
    build_monitor,
    compose,
    extract_pattern,
    integer_state_view,
    synthesize,
)
from .trace import Trace, TickRecord, Valuation, read_trace, write_trace

__all__ = [
    "And", "CescError", "Const", "FALSE", "Mode", "Monitor", "MonitorNet", "Not", "Or",
    "ParseError", "Pattern", "Scoreboard", "SpecFile", "Sym", "SymbolTable", "SynthesisError",
    "TRUE", "TickRecord", "Trace", "TraceFormatError", "Valuation", "ValidationError",
    "Verdict", "VerdictReport", "add_causality_check", "build_monitor", "compose",
    "dump_net", "evaluate", "exhaustive_equiv", "expected_verdicts", "extract_pattern",
    "format_expr", "format_spec", "integer_state_view", "load_net", "load_spec", "net_to_dot",
    "parse_expr", "parse_spec", "read_spec", "read_trace", "run", "step", "synthesize",
    "to_dot", "validate", "window_match", "write_trace",
]
