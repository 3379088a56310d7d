import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synprog.errors import EmptyWindow, NotSyndeticInWindow, PreconditionViolated, RuleSyntaxError, SetFileError
from synprog.synsets import (
    RuleWindow,
    SyndeticWindow,
    format_set_file,
    load_set,
    materialize,
    parse_rule,
    save_set,
    syndetic_gap,
)

RULES = [
    "ap(1,2)",
    "union(ap(0,3),ap(1,3))",
    "intersect(odds,complement(list(3,9,27)))",
    "random-syndetic(density=0.25,l=3,seed=11)",
    "union(squares,interval(5,40),primes)",
    "full",
    "evens",
]


@pytest.mark.parametrize("text", RULES)
def test_render_round_trip(text):
    rule = parse_rule(text)
    assert parse_rule(rule.render()) == rule


@pytest.mark.parametrize(
    "text, offset",
    [("ap(1,", 5), ("ap(1,2", 6), ("nope(1)", 0), ("ap(1,2))", 7), ("random-syndetic(l=2)", 0), ("squares(", 8)],
)
def test_syntax_errors_carry_offsets(text, offset):
    with pytest.raises(RuleSyntaxError) as info:
        parse_rule(text)
    assert info.value.offset == offset
    assert f"offset {offset}" in str(info.value)


def test_default_seed_is_forwarded():
    rule = parse_rule("random-syndetic(l=2)", default_seed=7)
    assert rule.kw("seed") == 7
    assert parse_rule("random-syndetic(l=2,seed=3)", default_seed=7).kw("seed") == 3


def test_materialize_examples():
    w = materialize("ap(1,2)", 10)
    assert list(w.members) == [1, 3, 5, 7, 9]
    assert w.l == 2
    with pytest.raises(NotSyndeticInWindow):
        materialize("squares", 100)
    assert materialize("squares", 100, max_gap=None).measured_gap == 19
    with pytest.raises(EmptyWindow):
        materialize("list(50)", 10)


def test_union_of_residues_is_everything():
    w = materialize("union(ap(0,3),ap(1,3),ap(2,3))", 300)
    assert len(w) == 300 and w.l == 1


@pytest.mark.parametrize("seed", range(50))
@pytest.mark.parametrize("l", [1, 2, 3, 5])
def test_random_syndetic_respects_l(seed, l):
    w = materialize(f"random-syndetic(l={l},seed={seed})", 2000)
    assert syndetic_gap(w) <= l


def test_random_syndetic_is_deterministic():
    a = materialize("random-syndetic(l=2,seed=42,density=0.1)", 100)
    b = materialize("random-syndetic(l=2,seed=42,density=0.1)", 100)
    assert np.array_equal(a.bits, b.bits)
    assert a.measured_gap <= 2


def test_gap_examples():
    assert syndetic_gap(materialize("ap(1,2)", 100)) == 2
    assert syndetic_gap(materialize("full", 57)) == 1
    w = SyndeticWindow.from_members(30, [1] + list(range(5, 31)))
    assert syndetic_gap(w) == 4
    # the tail after the last member does not count
    assert syndetic_gap(SyndeticWindow.from_members(100, [1, 2, 3])) == 1
    with pytest.raises(EmptyWindow):
        syndetic_gap(SyndeticWindow.from_members(10, []))


def test_rule_and_bitmap_agree():
    for text in RULES[:3] + RULES[4:]:
        rule = parse_rule(text)
        w = materialize(rule, 500, max_gap=None)
        rw = RuleWindow(rule, l=w.l, upper=500)
        assert [x for x in range(1, 501) if x in rw] == list(w.members)


def test_rule_window_refuses_prefix_rules():
    with pytest.raises(PreconditionViolated):
        RuleWindow("random-syndetic(l=2,seed=1)", l=2)


def test_rule_window_handles_huge_values():
    rw = RuleWindow("union(odds,list(4))", l=2)
    assert 3**5000 in rw and 4 in rw and 2 ** 5000 not in rw


def test_save_load_round_trip(tmp_path):
    w = materialize("random-syndetic(l=3,seed=5,density=0.2)", 5000)
    path = tmp_path / "w.synset"
    save_set(w, path)
    back = load_set(path)
    assert np.array_equal(back.bits, w.bits)
    assert (back.upper, back.l) == (w.upper, w.l)
    assert path.read_text().startswith(f"# synset v1 N=5000 l={w.l}\n")
    assert format_set_file(back) == path.read_text()


@pytest.mark.parametrize(
    "body, error",
    [
        ("# synset v2 N=10 l=2\n1\n", SetFileError),
        ("# synset v1 N=10 l=2\n3\n1\n", SetFileError),
        ("# synset v1 N=10 l=2\n1\n11\n", SetFileError),
        ("# synset v1 N=10 l=2\n1\nx\n", SetFileError),
        ("", SetFileError),
        ("# synset v1 N=10 l=2\n1\n5\n", NotSyndeticInWindow),
    ],
)
def test_load_rejects_bad_files(tmp_path, body, error):
    path = tmp_path / "bad.synset"
    path.write_text(body)
    with pytest.raises(error):
        load_set(path)


@settings(max_examples=100)
@given(st.sets(st.integers(1, 200), min_size=1))
def test_gap_matches_definition(members):
    w = SyndeticWindow.from_members(200, sorted(members))
    ms = sorted(members)
    expected = max([ms[0]] + [b - a for a, b in zip(ms, ms[1:])])
    assert syndetic_gap(w) == expected
    # every block of `expected` consecutive integers up to the last member hits the set
    for start in range(1, ms[-1] - expected + 2):
        assert any(x in w for x in range(start, start + expected))
