import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cesc.errors import CescError
from cesc.scoreboard import Scoreboard


def test_same_tick_add_is_invisible():
    sb = Scoreboard({"e"})
    sb.add_evt("e", 3, "c1", attempt=1)
    assert not sb.chk_evt("e")
    sb.commit()
    assert sb.chk_evt("e")


def test_add_then_check_later():
    sb = Scoreboard({"e"})
    sb.add_evt("e", 3, "c1", attempt=1)
    sb.commit()  # end of tick 3
    sb.commit()  # tick 4
    assert sb.chk_evt("e")  # tick 5


def test_cross_domain_visibility():
    sb = Scoreboard({"e"})
    sb.add_evt("e", 0, "c1", attempt=("m0", 0), position=0)
    assert not sb.chk_evt("e", domain="c1", position=0)
    sb.commit()
    assert sb.chk_evt("e", domain="c1", position=0)
    assert not sb.chk_evt("e", domain="c2")


def test_check_examples():
    sb = Scoreboard({"e"})
    assert not sb.chk_evt("e")
    sb.add_evt("e", 0, "c", attempt=1)
    sb.commit()
    assert sb.chk_evt("e")
    sb.del_evt("e", attempt=1)
    sb.commit()
    assert not sb.chk_evt("e")


def test_not_event():
    sb = Scoreboard({"e"})
    for op in (lambda: sb.add_evt("p", 0, "c", 1), lambda: sb.chk_evt("p")):
        with pytest.raises(CescError) as err:
            op()
        assert err.value.code == "E_NOT_EVENT"


def test_delete_examples():
    sb = Scoreboard()
    sb.del_evt("e", attempt=1)  # no-op
    assert sb.entries() == [] and sb.balance(1) == 0
    sb.add_evt("e", 0, "c", attempt=1)
    sb.del_evt("e", attempt=2)
    sb.commit()
    assert [x.attempt for x in sb.entries()] == [1]
    sb.add_evt("e", 1, "c", attempt=3)
    sb.del_evt("e", attempt=3)  # pending add cancelled
    sb.commit()
    assert [x.attempt for x in sb.entries()] == [1]


def test_attempt_scoped_check():
    sb = Scoreboard()
    sb.add_evt("e", 0, "c", attempt=("m", 0), position=0)
    sb.commit()
    assert sb.chk_evt("e", attempt=("m", 0), position=0)
    assert not sb.chk_evt("e", attempt=("m", 1), position=0)
    assert not sb.chk_evt("e", attempt=("m", 0), position=1)


def test_abandon_balances_and_complete_keeps_exports():
    sb = Scoreboard()
    sb.add_evt("x", 0, "c", attempt="A", position=0)
    sb.add_evt("y", 0, "c", attempt="A", position=1)
    sb.commit()
    sb.add_evt("x", 1, "c", attempt="A", position=2)
    sb.abandon("A")
    sb.commit()
    assert sb.balance("A") == 0 and sb.live("A") == []
    sb.add_evt("x", 2, "c", attempt="B", position=0)
    sb.add_evt("y", 2, "c", attempt="B", position=1)
    sb.commit()
    sb.complete("B", keep=[("x", 0)])
    sb.commit()
    assert [(e.event, e.position) for e in sb.entries()] == [("x", 0)]


def test_dump():
    sb = Scoreboard()
    sb.add_evt("x", 4, "c1", attempt=("m", 2), position=0)
    sb.commit()
    assert sb.dump() == "entry x@0 tick=4 domain=c1 attempt=('m', 2)\n"
    assert Scoreboard().dump() == ""


ops = st.lists(st.tuples(st.sampled_from(["add", "del", "chk"]), st.sampled_from("xy"),
                         st.integers(0, 2)), max_size=8)


@given(ops, st.randoms())
def test_checks_ignore_order_within_a_tick(tick_ops, rnd):
    """Reads in one tick see the same snapshot however the tick's writes are ordered."""
    def play(order):
        sb = Scoreboard()
        for e, att in [("x", 0), ("y", 1)]:
            sb.add_evt(e, 0, "c", attempt=att)
        sb.commit()
        seen = []
        for kind, e, att in order:
            if kind == "add":
                sb.add_evt(e, 1, "c", attempt=att)
            elif kind == "del":
                sb.del_evt(e, attempt=att)
            else:
                seen.append((e, att, sb.chk_evt(e, attempt=att)))
        return sorted(seen)
    shuffled = list(tick_ops)
    rnd.shuffle(shuffled)
    assert play(tick_ops) == play(shuffled)


@given(st.lists(st.tuples(st.sampled_from("xy"), st.integers(0, 3)), max_size=10))
def test_distinct_attempts_do_not_interfere(adds):
    sb = Scoreboard()
    for e, att in adds:
        sb.add_evt(e, 0, "c", attempt=att)
    sb.commit()
    for att in {att for _, att in adds}:
        sb.abandon(att)
        sb.commit()
        assert sb.balance(att) == 0
        for e, other in itertools.product("xy", {o for _, o in adds} - {att}):
            assert sb.chk_evt(e, attempt=other) == ((e, other) in adds and
                                                     other not in sb.abandoned)
