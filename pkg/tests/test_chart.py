import itertools
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesc.chart import (
    AsyncPar,
    Leaf,
    Loop,
    Par,
    Polarity,
    Scesc,
    Seq,
    SpecFile,
    SymbolTable,
    flatten_seq,
    reduce_chart,
    validate,
)
from cesc.errors import CescError, ValidationError
from cesc.expr import Not, Sym
from cesc.families import RandomChartConfig, random_chart
from cesc.oracle import window_match
from cesc.parser import format_spec, load_spec, parse_spec
from cesc.trace import Trace

from .conftest import load_fixture
from .strategies import random_specs

MINIMAL = ("events req, ack; props busy;\n"
           "chart H on c1 ticks 2 { @0 master!req; @1 [!busy]: slave!ack; arrow req -> ack; }")


def codes(src):
    return [d.code for d in validate(parse_spec(src))]


def test_minimal_chart():
    spec = parse_spec(MINIMAL)
    s = spec.charts["H"]
    assert (s.clock, s.tick_count) == ("c1", 2)
    assert len(s.occurrences) == 2 and len(s.arrows) == 1
    ack = s.occurrences[1]
    assert ack.guard == Not(Sym("busy")) and ack.instance == "slave"
    assert str(s.arrows[0].source) == "req@0" and str(s.arrows[0].target) == "ack@1"
    assert validate(spec) == []


def test_arrow_backwards_is_rejected():
    src = "events req, ack;\nchart H on c1 ticks 2 { @0 req; @1 ack; arrow ack -> req; }"
    assert codes(src) == ["E_ARROW_ORDER"]
    with pytest.raises(ValidationError) as err:
        load_spec(src)
    assert err.value.code == "E_ARROW_ORDER"


def test_same_tick_arrow_is_rejected():
    assert codes("events a, b;\nchart H on c ticks 1 { @0 a, b; arrow a@0 -> b@0; }") == \
        ["E_ARROW_ORDER"]


def test_ocp_simple_read_fixture():
    spec = load_fixture("ocp_simple_read")
    s = spec.charts["ocp_simple_read"]
    assert {o.event for o in s.occurrences} == {"mcmd_rd", "scmdaccept", "sresp_dva"}
    assert s.tick_count == 3
    present = {(o.event, o.tick) for o in s.occurrences if o.polarity is Polarity.PRESENT}
    assert present == {("mcmd_rd", 0), ("mcmd_rd", 1), ("scmdaccept", 1), ("sresp_dva", 2)}


ASYNC_TWO = "events a, b;\nchart A on {ca} ticks 1 {{ @0 a; }}\nchart B on {cb} ticks 1 {{ @0 b; }}\n"


@pytest.mark.parametrize("src, expected", [
    (ASYNC_TWO.format(ca="c1", cb="c1") + "top async(A, B);", ["E_ASYNC_SAME_CLOCK"]),
    (ASYNC_TWO.format(ca="c1", cb="c2") + "top async(A, B) { arrow A.a -> A.a; };",
     ["E_ARROW_SCOPE"]),
    (ASYNC_TWO.format(ca="c1", cb="c1") + "top seq(A, alt(A, B));", ["E_NESTING"]),
    (ASYNC_TWO.format(ca="c1", cb="c1") + "top implies(A, B);", ["E_MODE"]),
    ("mode assert;\n" + ASYNC_TWO.format(ca="c1", cb="c1") + "top seq(A, B);", ["E_MODE"]),
    (ASYNC_TWO.format(ca="c1", cb="c2") + "top seq(A, B);", ["E_CLOCK_MISMATCH"]),
    ("events a;\nchart A on c ticks 0 { }", ["E_TICK_COUNT"]),
    ("events a;\nchart A on c ticks 1 { @3 a; }", ["E_TICK_RANGE"]),
    ("events a; clocks c2;\nchart A on c1 ticks 1 { @0 a; }", ["E_UNKNOWN_CLOCK"]),
    ("events a;\nchart A on c ticks 1 { @0 a; }\ntop loop(0, A);", ["E_LOOP_COUNT"]),
])
def test_validate_diagnostics(src, expected):
    assert codes(src) == expected


def test_par_length_needs_pad():
    src = "events a, b;\nchart A on c ticks 1 { @0 a; }\nchart B on c ticks 2 { @0 b; }\n"
    assert codes(src + "top par(A, B);") == ["E_PAR_LENGTH"]
    assert codes(src + "top par[pad](A, B);") == []


@pytest.mark.parametrize("src, code", [
    ("events a;\nchart A on c ticks 1 { @0 a }", "E_PARSE"),
    ("events a;\nchart A on c ticks 1 { @0 b; }", "E_UNDECLARED_SYMBOL"),
    ("events a; props p;\nchart A on c ticks 1 { @0 p; }", "E_NOT_EVENT"),
    ("events a;\nchart A on c ticks 1 { @0 a; }\nchart A on c ticks 1 { @0 a; }",
     "E_DUPLICATE_NAME"),
    ("events a, a;\nchart A on c ticks 1 { @0 a; }", "E_DUPLICATE_NAME"),
    ("events a;\nchart A on c ticks 1 { @0 a; }\ncompose X = seq(X, A);\ntop X;", "E_CYCLE"),
    ("events a;\nchart A on c ticks 1 { @0 a; }\nchart B on c ticks 1 { @0 a; }", "E_NO_TOP"),
])
def test_parse_errors(src, code):
    with pytest.raises(CescError) as err:
        parse_spec(src)
    assert err.value.code == code


def test_parse_error_position():
    with pytest.raises(CescError) as err:
        parse_spec("events a;\nchart A on c ticks 1 { @0 a }")
    assert err.value.line == 2 and err.value.col is not None


def test_env_events_are_flagged():
    spec = parse_spec("events a, b;\nchart A on c ticks 1 { @0 env!a, b; }")
    a, b = spec.charts["A"].occurrences
    assert a.is_env and not b.is_env


def test_fixture_specs_validate_and_round_trip(fixture_spec):
    name, spec = fixture_spec
    assert validate(spec) == []
    assert parse_spec(format_spec(spec)) == spec


@given(random_specs)
@settings(max_examples=60, deadline=None)
def test_random_specs_round_trip(spec):
    assert parse_spec(format_spec(spec)) == spec


def _rename(spec, name):
    s = spec.top.scesc
    return Scesc(name, s.clock, s.tick_count, s.occurrences, s.arrows), spec.symbols


def _merged(tables):
    events = tuple(sorted({e for t in tables for e in t.events}))
    props = tuple(sorted({p for t in tables for p in t.props}))
    return SymbolTable(events=events, props=props, clocks=("clk",))


composite_trees = st.deferred(lambda: st.one_of(
    st.sampled_from(["A", "B", "C"]),
    st.tuples(st.just("seq"), composite_trees, composite_trees),
    st.tuples(st.just("par"), composite_trees, composite_trees),
    st.tuples(st.just("loop"), st.integers(1, 3), composite_trees),
))


def _build(tree, leaves):
    if isinstance(tree, str):
        return Leaf(leaves[tree])
    if tree[0] == "seq":
        return Seq(_build(tree[1], leaves), _build(tree[2], leaves))
    if tree[0] == "par":
        return Par(_build(tree[1], leaves), _build(tree[2], leaves), pad=True)
    return Loop(_build(tree[2], leaves), tree[1])


@given(st.integers(0, 10 ** 6), composite_trees)
@settings(max_examples=60, deadline=None)
def test_composite_specs_round_trip(seed, tree):
    rng = random.Random(seed)
    parts = [_rename(random_chart(rng, RandomChartConfig(max_n=3, max_symbols=3)), n)
             for n in "ABC"]
    leaves = {s.name: s for s, _ in parts}
    top = _build(tree, leaves)
    if not isinstance(top, Leaf):
        top = replace(top, name="R")  # a compose binding names its node
    spec = SpecFile(_merged([t for _, t in parts]), leaves, {"R": top}, top, "R")
    assert parse_spec(format_spec(spec)) == spec


def test_flatten_seq_index_arithmetic():
    a = Scesc("A", "c", 2, ())
    b = parse_spec("events x;\nchart B on c ticks 3 { @0 x; }").charts["B"]
    flat = flatten_seq(Seq(Leaf(a), Leaf(b)))
    assert isinstance(flat, Leaf) and flat.scesc.tick_count == 5
    assert [o.tick for o in flat.scesc.occurrences] == [2]


def test_flatten_seq_associative_length():
    src = ("events x;\nchart A on c ticks 1 { @0 x; }\nchart B on c ticks 2 { @0 x; }\n"
           "chart C on c ticks 3 { @0 x; }\ntop seq(seq(A, B), C);")
    spec = parse_spec(src)
    assert flatten_seq(spec.top).scesc.tick_count == 6


def test_flatten_seq_matches_hand_merged_ocp_read():
    spec = load_fixture("ocp_phases")
    flat = flatten_seq(spec.top).scesc
    merged = spec.charts["merged"]
    assert flat.tick_count == merged.tick_count
    assert set(flat.occurrences) == set(merged.occurrences)
    assert set(flat.arrows) == set(merged.arrows)


def test_flatten_seq_clock_mismatch():
    a, b = Scesc("A", "c1", 1), Scesc("B", "c2", 1)
    with pytest.raises(CescError) as err:
        flatten_seq(Seq(Leaf(a), Leaf(b)))
    assert err.value.code == "E_CLOCK_MISMATCH"


def test_flatten_seq_inside_loop_and_async():
    a, b = Scesc("A", "c1", 1), Scesc("B", "c1", 2)
    assert isinstance(flatten_seq(Loop(Seq(Leaf(a), Leaf(b)), None)).body, Leaf)
    c = Scesc("C", "c2", 1)
    out = flatten_seq(AsyncPar((Seq(Leaf(a), Leaf(b)), Leaf(c))))
    assert isinstance(out.children[0], Leaf)


def _all_traces(symtab, maxlen):
    names = symtab.symbols
    for length in range(1, maxlen + 1):
        for rows in itertools.product(itertools.product((False, True), repeat=len(names)),
                                      repeat=length):
            yield Trace.from_steps(symtab, [[n for n, b in zip(names, r) if b] for r in rows])


@given(st.integers(0, 10 ** 6))
@settings(max_examples=15, deadline=None)
def test_seq_language_preserved_by_flattening(seed):
    rng = random.Random(seed)
    cfg = RandomChartConfig(max_n=2, max_symbols=2)
    (a, ta), (b, tb), (c, tc) = (_rename(random_chart(rng, cfg), n) for n in "ABC")
    symtab = _merged([ta, tb, tc])
    left = Seq(Seq(Leaf(a), Leaf(b)), Leaf(c))
    right = Seq(Leaf(a), Seq(Leaf(b), Leaf(c)))
    flat = flatten_seq(left)
    maxlen = 5 if len(symtab.symbols) <= 2 else 3
    for t in _all_traces(symtab, maxlen):
        ends = [m.end for m in window_match(left, t, "x")]
        assert ends == [m.end for m in window_match(flat, t, "x")]
        assert ends == [m.end for m in window_match(right, t, "x")]


def test_reduce_par_conjoins_ticks():
    spec = parse_spec("events a, b, c, d;\nchart P on k ticks 2 { @0 a; @1 b; }\n"
                      "chart Q on k ticks 2 { @0 c; @1 d; }\ntop par(P, Q);")
    s = reduce_chart(spec.top)
    assert sorted((o.event, o.tick) for o in s.occurrences) == \
        [("a", 0), ("b", 1), ("c", 0), ("d", 1)]
