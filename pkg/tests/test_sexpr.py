import pytest
from hypothesis import given, strategies as st

from hazardctl import sexpr
from hazardctl.sexpr import Keyword, SexprError


def test_basic_forms():
    assert sexpr.parse_one("(a b 3)") == ["a", "b", 3]
    assert sexpr.parse_one("(a (b 1) ())") == ["a", ["b", 1], []]


def test_keywords_and_punct():
    form = sexpr.parse_one("(edge pc.q -> ir.d :role data)")
    assert form == ["edge", "pc", ".", "q", "->", "ir", ".", "d", Keyword("role"), "data"]
    assert isinstance(form[8], Keyword)


def test_dot_with_spaces_equivalent():
    a = sexpr.parse_one("(edge pc . q -> ir . d :role data)")
    b = sexpr.parse_one("(edge pc.q->ir.d :role data)")
    assert a == b


def test_comments_skipped():
    forms = sexpr.parse_many("; header\n(a 1) ; trailing\n(b)")
    assert forms == [["a", 1], ["b"]]


@pytest.mark.parametrize("bad", ["(a", ")", "(:)", "(a @)"])
def test_errors_are_positioned(bad):
    with pytest.raises(SexprError):
        sexpr.parse_many(bad)


def test_error_position_reported():
    with pytest.raises(SexprError, match="2:3"):
        sexpr.parse_many("(ok)\n  @")


atoms = st.one_of(
    st.integers(min_value=-999, max_value=9999),
    st.from_regex(r"[a-zA-Z_][a-zA-Z0-9_]{0,8}", fullmatch=True),
    st.from_regex(r"[a-zA-Z_][a-zA-Z0-9_]{0,8}", fullmatch=True).map(Keyword),
)
forms = st.recursive(atoms, lambda inner: st.lists(inner, max_size=5), max_leaves=25)


@given(forms)
def test_dumps_roundtrip(form):
    text = sexpr.dumps(form)
    assert sexpr.parse_one(text) == form


@given(st.lists(forms, min_size=1, max_size=4))
def test_parse_many_roundtrip(items):
    text = "\n".join(sexpr.dumps(x) for x in items)
    assert sexpr.parse_many(text) == items
