import pytest
from hypothesis import given, settings

from conftest import plain_exprs
from regbg.plain import (CONCAT, LETTER, ONE_E, STAR, UNION, ZERO_E, ParseError, alphabets,
                         lift, parse, size, to_text)
from regbg.semantics import lang_plain

A, B = (LETTER, 0), (LETTER, 1)


def test_concat_parses_right_nested():
    e = parse("b(a + b(1 + a + b*b))((a + b)a*)*")
    assert e[0] == CONCAT
    assert e[1] == B
    rest = e[2]
    assert rest[0] == CONCAT
    assert rest[1][0] == UNION
    assert rest[2][0] == STAR


def test_parse_small_cases():
    assert parse("0*") == (STAR, ZERO_E)
    assert parse("a + b + a") == (UNION, A, (UNION, B, A))
    assert parse("ab*") == (CONCAT, A, (STAR, B))
    assert parse("a**") == (STAR, (STAR, A))
    assert parse(" ( a ) ") == A


@pytest.mark.parametrize("text, column", [
    ("a+", 2), ("+a", 1), ("()", 2), ("(a", 1), ("a)", 2), ("*", 1), ("a?b", 2), ("", 1),
])
def test_parse_errors_carry_column(text, column):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert exc.value.column == column


def test_letters_outside_alphabet():
    with pytest.raises(ParseError):
        parse("c", nl=2)


@given(plain_exprs(max_leaves=20))
def test_text_round_trip(e):
    assert parse(to_text(e)) == e


def test_size_counts_letters_and_operators():
    assert size(parse("1")) == 0
    assert size(parse("(a + b)*")) == 4
    assert size(parse("(ab*)*")) == 5
    assert size(parse("0 + 1")) == 1


def test_alphabets():
    assert alphabets(parse("a + ab")) == (0b11, 0b01, 0)
    assert alphabets(parse("(a + b)*")) == (0b11, 0b11, 1)
    assert alphabets(parse("1")) == (0, 0, 1)
    assert alphabets(parse("b(1 + a)")) == (0b11, 0b10, 0)


def test_lift_rules():
    assert lift(parse("(a + b + ab)*")) == parse("(a + b)*")
    assert lift(parse("(1 + a)(a + b)*")) == parse("(a + b)*")
    assert lift(parse("ab + (a + b)*")) == parse("(a + b)*")
    assert lift(parse("(a + b)* + ab")) == parse("(a + b)*")
    assert lift(parse("(aa)*")) == parse("(aa)*")
    # rule 2 needs a nullable partner
    assert lift(parse("a(a + b)*")) == parse("a(a + b)*")
    # the partner's letters must be covered
    assert lift(parse("b + a*")) == parse("b + a*")


@settings(max_examples=300)
@given(plain_exprs(max_leaves=14))
def test_lift_preserves_language(e):
    assert lang_plain(lift(e), 6) == lang_plain(e, 6)


@settings(max_examples=300)
@given(plain_exprs(max_leaves=14))
def test_lift_is_idempotent(e):
    once = lift(e)
    assert lift(once) == once


@given(plain_exprs(max_leaves=14))
def test_lift_never_grows(e):
    assert size(lift(e)) <= size(e)


def test_language_oracle_basics():
    assert lang_plain(ZERO_E, 3) == frozenset()
    assert lang_plain(parse("a*"), 2) == {"", "a", "aa"}
    assert lang_plain(ONE_E, 0) == {""}
    assert lang_plain(parse("(a + b)b"), 2) == {"ab", "bb"}


def test_lift_on_generated_corpus():
    from regbg.gen import ExprGenerator

    g = ExprGenerator(2, 32, seed=5)
    for i in range(1000):
        e = g.generate(1 + i % 32)
        once = lift(e)
        assert lift(once) == once
        assert lang_plain(once, 6) == lang_plain(e, 6)
