import glob
import os

import pytest

from cesc.cli import main
from cesc.expr import evaluate, valuations
from cesc.parser import read_spec
from cesc.serialize import load_net
from cesc.trace import read_trace

from .conftest import CASE_STUDIES, fixture_path


def spec_path(name: str) -> str:
    return fixture_path(name + ".cesc")


def write(path, text: str) -> str:
    path.write_text(text)
    return str(path)


def test_synth_handshake(tmp_path, capsys):
    out = tmp_path / "h.monitor"
    dot = tmp_path / "h.dot"
    assert main(["synth", spec_path("handshake"), "-o", str(out), "--dot", str(dot)]) == 0
    net = load_net(out.read_text())
    m = net.monitors[0]
    # deterministic partition: out of every state, exactly one guard holds per valuation
    for s in m.states:
        for v in valuations(m.universe):
            assert sum(evaluate(tr.guard, v) for tr in m.outgoing(s.id)) == 1
    assert dot.read_text().startswith('digraph "handshake"')


def test_synth_to_stdout(capsys):
    assert main(["synth", spec_path("beat_loop")]) == 0
    assert capsys.readouterr().out.startswith("net loop ")


def test_synth_vacuous_exit_4(tmp_path, capsys):
    spec = write(tmp_path / "v.cesc", "events e;\nclocks clk;\nchart V on clk ticks 1 { @0 e, absent e; }\n")
    assert main(["synth", spec]) == 4
    assert "E_VACUOUS" in capsys.readouterr().err


def test_synth_parse_error_exit_3(tmp_path, capsys):
    spec = write(tmp_path / "p.cesc", "events e;\nchart V on clk ticks { }\n")
    assert main(["synth", spec]) == 3
    assert "E_" in capsys.readouterr().err


def test_synth_validation_error_exit_3(tmp_path, capsys):
    spec = write(tmp_path / "u.cesc", "events e;\nclocks clk;\nchart V on clk ticks 1 { @0 f; }\n")
    assert main(["synth", spec]) == 3


def test_ocp_burst_dot_matches_golden(tmp_path):
    dot = tmp_path / "b.dot"
    assert main(["synth", spec_path("ocp_burst_read"), "-o", str(tmp_path / "b.monitor"),
                 "--dot", str(dot)]) == 0
    with open(fixture_path("golden", "ocp_burst_read.dot")) as fh:
        assert dot.read_text() == fh.read()


def test_check_conforming_and_mutated(capsys):
    spec = spec_path("ocp_simple_read")
    assert main(["check", spec, fixture_path("traces", "ocp_simple_read.handwritten.trace")]) == 0
    out = capsys.readouterr().out
    assert out.count("DETECTED") == 1
    assert main(["check", spec, fixture_path("traces", "ocp_simple_read.resp_before_accept.trace")]) == 1
    assert "DETECTED" not in capsys.readouterr().out


def test_check_assert_fail_exit_1(tmp_path, capsys):
    t = write(tmp_path / "f.trace",
              '{"i": 0, "clk": ["clk"], "ev": ["req"], "prop": {}}\n'
              '{"i": 1, "clk": ["clk"], "ev": [], "prop": {}}\n'
              '{"i": 2, "clk": ["clk"], "ev": [], "prop": {}}\n')
    assert main(["check", spec_path("req_grant_assert"), t]) == 1
    assert "FAIL 2 " in capsys.readouterr().out


def test_check_mode_mismatch_exit_3(capsys):
    t = fixture_path("traces", "ocp_simple_read.handwritten.trace")
    assert main(["check", spec_path("ocp_simple_read"), t, "--mode", "assert"]) == 3
    assert "E_MODE" in capsys.readouterr().err


def test_check_bad_trace_exit_3(tmp_path, capsys):
    t = write(tmp_path / "bad.trace", '{"i": 1, "clk": ["clk"], "ev": [], "prop": {}}\n'
                                      '{"i": 0, "clk": ["clk"], "ev": [], "prop": {}}\n')
    assert main(["check", spec_path("ocp_simple_read"), t]) == 3
    assert "E_NONMONOTONIC_INDEX" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main([]) == 2
    assert main(["check", spec_path("handshake")]) == 2
    assert main(["check", spec_path("handshake"), str(tmp_path / "missing.trace")]) == 2
    assert main(["oracle", spec_path("handshake")]) == 2
    capsys.readouterr()


def test_oracle_exhaustive_handshake(capsys):
    assert main(["oracle", spec_path("handshake"), "--exhaustive", "4"]) == 0


def test_oracle_fault_injected_monitor(tmp_path, capsys):
    mon = tmp_path / "h.monitor"
    assert main(["synth", spec_path("handshake"), "-o", str(mon)]) == 0
    text = mon.read_text()
    # retarget the transition that completes the window back to the initial state
    lines = text.splitlines()
    i = next(k for k, line in enumerate(lines) if line.startswith("trans 1 -> 2"))
    lines[i] = lines[i].replace("trans 1 -> 2", "trans 1 -> 0")
    mon.write_text("\n".join(lines) + "\n")
    cex = tmp_path / "cex.trace"
    code = main(["oracle", spec_path("handshake"), "--exhaustive", "4",
                 "--monitor", str(mon), "--cex-out", str(cex)])
    assert code == 1
    spec = read_spec(spec_path("handshake"))
    with open(cex) as fh:
        t = read_trace(fh, spec.symbols)
    assert 1 <= len(t) <= 4
    # the counterexample replays: the faulty monitor and the chart now disagree on it
    assert main(["oracle", spec_path("handshake"), str(cex), "--monitor", str(mon),
                 "--cex-out", str(tmp_path / "again.trace")]) == 1


def test_oracle_enumeration_cap_exit_2(capsys):
    assert main(["oracle", spec_path("amba_ahb"), "--exhaustive", "12"]) == 2
    assert "E_ENUMERATION_TOO_LARGE" in capsys.readouterr().err


def test_oracle_on_traces(capsys):
    paths = sorted(glob.glob(fixture_path("traces", "ocp_burst_read.*.trace")))
    assert main(["oracle", spec_path("ocp_burst_read"), *paths]) == 0
    assert capsys.readouterr().out.count("agree on") == len(paths)


def test_gen_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["gen", spec_path("handshake"), "--conforming", "5", "--seed", "7", "-o", str(d)]) == 0
    names = sorted(os.listdir(a))
    assert len(names) == 5 and names == sorted(os.listdir(b))
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    c = tmp_path / "c"
    assert main(["gen", spec_path("handshake"), "--conforming", "5", "--seed", "8", "-o", str(c)]) == 0
    assert any((a / n).read_bytes() != (c / n).read_bytes() for n in names)


def test_gen_unsat_exit_4(tmp_path, capsys):
    spec = write(tmp_path / "q.cesc", "events a;\nclocks clk;\nchart Q on clk ticks 1 { @0 absent a; }\n")
    assert main(["gen", spec, "--mutated", "1", "-o", str(tmp_path)]) == 4
    assert "E_UNSATISFIABLE_GEN" in capsys.readouterr().err


@pytest.mark.parametrize("name", CASE_STUDIES + ("handshake", "multiclock_read", "req_grant_assert"))
def test_pipeline_closure(tmp_path, capsys, name):
    out = tmp_path / "gen"
    assert main(["gen", spec_path(name), "--conforming", "2", "--seed", "5", "-o", str(out)]) == 0
    assert main(["gen", spec_path(name), "--mutated", "3", "--seed", "5", "-o", str(out)]) == 0
    conf = sorted(glob.glob(str(out / "*.conforming.*.trace")))
    mut = sorted(glob.glob(str(out / "*.mutated.*.trace")))
    assert len(conf) == 2 and len(mut) == 3
    for p in conf:
        assert main(["check", spec_path(name), p]) == 0
    for p in mut:
        assert main(["check", spec_path(name), p]) == 1
    assert main(["oracle", spec_path(name), *conf, *mut,
                 "--cex-out", str(tmp_path / "cex.trace")]) == 0


def test_viz(tmp_path, capsys):
    mon = tmp_path / "w.monitor"
    assert main(["synth", spec_path("write_or_read"), "-o", str(mon)]) == 0
    capsys.readouterr()
    assert main(["viz", str(mon)]) == 0
    with open(fixture_path("golden", "write_or_read.dot")) as fh:
        assert capsys.readouterr().out == fh.read()


def test_viz_bad_monitor_exit_3(tmp_path, capsys):
    mon = write(tmp_path / "x.monitor", "net single x\nmonitor m clock c\nstate 0 {0} initial\ntrans 0 -> 3 : a\nend\n")
    assert main(["viz", mon]) == 3
    assert "E_MONITOR_FORMAT" in capsys.readouterr().err
