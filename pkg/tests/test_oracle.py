import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesc.chart import reduce_chart
from cesc.errors import CescError
from cesc.families import random_chart, random_trace
from cesc.oracle import alphabet, exhaustive_equiv, expected_verdicts, window_match
from cesc.parser import parse_spec
from cesc.runtime import run
from cesc import synth
from cesc.synth import MonitorNet, synthesize, with_retarget
from cesc.trace import TickRecord, Trace, Valuation

from .conftest import load_fixture


def spec_of(body: str, events: str = "a, b", props: str = ""):
    decl = f"events {events};" + (f" props {props};" if props else "")
    return parse_spec(f"{decl}\nclocks clk;\nchart P on clk ticks {body}")


def ends(spec, steps):
    t = Trace.from_steps(spec.symbols, steps)
    return [m.end for m in window_match(spec.top, t)]


def test_single_element_scan():
    spec = spec_of("1 { @0 a; }")
    assert ends(spec, [["a"], [], ["a"]]) == [0, 2]


def test_overlapping_windows_are_all_reported():
    spec = spec_of("2 { @0 a; @1 a; }")
    assert ends(spec, [["a"], ["a"], ["a"]]) == [1, 2]


def test_arrow_needs_its_source_to_occur():
    spec = parse_spec("events req, ack;\nprops busy, sel;\nclocks c1;\n"
                      "chart h on c1 ticks 2 { @0 [sel]: req; @1 [!busy]: ack; arrow req -> ack; }")
    assert ends(spec, [[], ["ack"]]) == []
    assert ends(spec, [["sel", "req"], ["ack"]]) == [1]
    # the same chart without the arrow matches element-wise
    plain = parse_spec("events req, ack;\nprops busy, sel;\nclocks c1;\n"
                       "chart h on c1 ticks 2 { @0 [sel]: req; @1 [!busy]: ack; }")
    assert ends(plain, [[], ["ack"]]) == [1]


def test_match_record_spans_pattern_length():
    spec = load_fixture("ocp_burst_read")
    n = reduce_chart(spec.top).tick_count
    rng = random.Random(3)
    for _ in range(50):
        t = random_trace(rng, spec.symbols, 12, 0.6)
        for m in window_match(spec.top, t):
            assert m.end - m.start + 1 == n


def test_impl_has_no_matches():
    spec = load_fixture("req_grant_assert")
    with pytest.raises(CescError) as err:
        window_match(spec.top, Trace.from_steps(spec.symbols, [[]]))
    assert err.value.code == "E_MODE"


def test_async_windows_are_per_domain():
    spec = load_fixture("multiclock_read")
    # mclk on even ticks, sclk on every tick
    steps = [["req"], [], ["req_ack"], ["resp_start"], ["resp_end"], []]
    clocks = [["mclk", "sclk"], ["sclk"], ["mclk", "sclk"], ["sclk"], ["mclk", "sclk"], ["sclk"]]
    t = Trace.from_steps(spec.symbols, steps, clocks)
    got = [(m.chart, m.start, m.end) for m in window_match(spec.top, t)]
    assert got == [("request", 0, 2), ("response", 3, 4)]
    # response before request: the cross arrow fails
    t2 = Trace.from_steps(spec.symbols, [["resp_start"], ["resp_end"], ["req"], [], ["req_ack"]],
                          [["sclk"], ["sclk"], ["mclk"], ["sclk"], ["mclk"]])
    assert [m.chart for m in window_match(spec.top, t2)] == ["request"]


def test_exhaustive_single_element():
    spec = spec_of("1 { @0 a; }", events="a")
    rep = exhaustive_equiv(spec.top, 4, spec.symbols, name=spec.top_name)
    assert rep.ok and rep.traces == 2 + 4 + 8 + 16


def test_exhaustive_two_elements():
    spec = spec_of("2 { @0 a; @1 b; }")
    rep = exhaustive_equiv(spec.top, 5, spec.symbols, name=spec.top_name)
    assert rep.ok and rep.traces == sum(4 ** k for k in range(1, 6))


@pytest.mark.parametrize("name", ["handshake", "ocp_simple_read", "write_or_read",
                                  "beat_loop", "req_grant_assert"])
def test_exhaustive_on_fixtures(name):
    spec = load_fixture(name)
    rep = exhaustive_equiv(spec.top, 4, spec.symbols, name=spec.top_name)
    assert rep.ok, rep.format()


def _corrupt(net: MonitorNet, index: int, dst: int) -> MonitorNet:
    return replace(net, monitors=(with_retarget(net.monitors[0], index, dst),))


def test_corrupted_monitor_gives_shortest_counterexample():
    spec = spec_of("2 { @0 a; @1 b; }")
    net = synthesize(spec)
    m = net.monitors[0]
    final = m.finals[0]
    # send the initial state's a-transition straight to the final state
    idx = next(i for i, tr in enumerate(m.transitions)
               if tr.src == m.initial and tr.dst != m.initial and tr.dst != final)
    bad = _corrupt(net, idx, final)
    rep = exhaustive_equiv(spec.top, 5, spec.symbols, net=bad, name=spec.top_name)
    assert not rep.ok
    assert len(rep.counterexample) == 1
    assert rep.expected == [] and rep.observed
    assert "counterexample" in rep.format()


def test_corruption_deep_in_the_chart_found_at_its_depth():
    spec = spec_of("3 { @0 a; @1 b; @2 a; }")
    net = synthesize(spec)
    m = net.monitors[0]
    final = set(m.finals)
    # retarget a transition into a final state to the initial state instead
    idx = next(i for i, tr in enumerate(m.transitions) if tr.dst in final)
    rep = exhaustive_equiv(spec.top, 6, spec.symbols, net=_corrupt(net, idx, m.initial),
                           name=spec.top_name)
    assert not rep.ok
    assert len(rep.counterexample) == 3


def test_corrupted_scoreboard_monitor():
    spec = load_fixture("handshake")
    net = synthesize(spec)
    m = net.monitors[0]
    final = set(m.finals)
    idx = next(i for i, tr in enumerate(m.transitions) if tr.dst in final)
    rep = exhaustive_equiv(spec.top, 4, spec.symbols, net=_corrupt(net, idx, m.initial),
                           name=spec.top_name)
    assert not rep.ok and len(rep.counterexample) == 2


def test_enumeration_cap():
    spec = spec_of("1 { @0 a, b, c, d, e, f; }", events="a, b, c, d, e, f")
    with pytest.raises(CescError) as err:
        exhaustive_equiv(spec.top, 4, spec.symbols, name=spec.top_name)
    assert err.value.code == "E_ENUMERATION_TOO_LARGE"
    # a lower cap trips on small cases too
    with pytest.raises(CescError):
        exhaustive_equiv(spec_of("1 { @0 a; }").top, 3, spec.symbols, cap=10)


def test_alphabet_covers_support_only():
    spec = spec_of("1 { @0 a; }", events="a, b, c")
    letters = alphabet(spec.top, spec.symbols)
    assert len(letters) == 2
    assert {v["a"] for _, v in letters} == {False, True}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 6))
def test_matches_invariant_under_suffix(seed, extra):
    rng = random.Random(seed)
    spec = random_chart(rng)
    t = random_trace(rng, spec.symbols, rng.randint(1, 10), rng.random())
    longer = random_trace(rng, spec.symbols, len(t) + extra, rng.random())
    recs = t.records + longer.records[len(t):]
    t2 = Trace(recs, t.clocks)
    before = window_match(spec.top, t)
    after = [m for m in window_match(spec.top, t2) if m.end < len(t)]
    assert before == after


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_oracle_ignores_the_automaton(seed):
    """Verdicts come out the same whatever monitor happens to be around."""
    rng = random.Random(seed)
    spec = random_chart(rng)
    t = random_trace(rng, spec.symbols, rng.randint(1, 10), rng.random())
    saved = synth.compose
    try:
        synth.compose = None  # any call into synthesis would now fail
        want = expected_verdicts(spec.top, t, spec.top_name)
    finally:
        synth.compose = saved
    assert want == expected_verdicts(spec.top, t, spec.top_name)


def test_counterexample_replays_through_runtime():
    spec = spec_of("2 { @0 a; @1 b; }")
    net = synthesize(spec)
    m = net.monitors[0]
    idx = next(i for i, tr in enumerate(m.transitions)
               if tr.src == m.initial and tr.dst != m.initial)
    bad = _corrupt(net, idx, m.finals[0])
    rep = exhaustive_equiv(spec.top, 4, spec.symbols, net=bad, name=spec.top_name)
    got = sorted((v.global_tick, v.kind, v.chart, v.detail) for v in run(bad, rep.counterexample).verdicts)
    assert got == rep.observed


def test_single_letter_alphabet_ticks_every_record():
    spec = spec_of("1 { @0 a; }", events="a")
    for cs, v in alphabet(spec.top, spec.symbols):
        assert cs == frozenset(["clk"]) and isinstance(v, Valuation)
    assert TickRecord(0, cs, v).global_index == 0
