"""S-expression reader/writer shared by the PSG format, queries, and dumps.

Atoms are ints, plain symbols (str) and keywords (Keyword, printed as
``:name``).  ``.`` and ``->`` are standalone punctuation symbols so that
``(edge pc.q -> ir.d :role data)`` tokenizes the same with or without
spaces around the dot.
"""

from __future__ import annotations


class Keyword(str):
    """A ``:keyword`` atom; compares equal to its bare name."""

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f":{str.__str__(self)}"


class SexprError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_PUNCT = {"(", ")", "."}
_SYMBOL_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_SYMBOL_BODY = _SYMBOL_START | set("0123456789")


def tokenize(text: str):
    """Yield (token, line, col) triples; tokens are str or int."""
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c in _PUNCT:
            yield c, start_line, start_col
            i += 1
            col += 1
            continue
        if text.startswith("->", i):
            yield "->", start_line, start_col
            i += 2
            col += 2
            continue
        if c == ":":
            j = i + 1
            while j < n and text[j] in _SYMBOL_BODY:
                j += 1
            if j == i + 1:
                raise SexprError("empty keyword", line, col)
            yield Keyword(text[i + 1 : j]), start_line, start_col
            col += j - i
            i = j
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1 if c != "-" else i + 2
            while j < n and text[j].isdigit():
                j += 1
            yield int(text[i:j]), start_line, start_col
            col += j - i
            i = j
            continue
        if c in _SYMBOL_START:
            j = i
            while j < n:
                if text[j] in _SYMBOL_BODY:
                    j += 1
                elif text[j] == "-" and not text.startswith("->", j):
                    j += 1
                else:
                    break
            yield text[i:j], start_line, start_col
            col += j - i
            i = j
            continue
        raise SexprError(f"unexpected character {c!r}", line, col)


def parse_many(text: str) -> list:
    """Parse every top-level form in *text*."""
    toks = list(tokenize(text))
    pos = 0

    def parse_one():
        nonlocal pos
        if pos >= len(toks):
            raise SexprError("unexpected end of input", 0, 0)
        tok, line, col = toks[pos]
        pos += 1
        if tok == "(":
            items = []
            while True:
                if pos >= len(toks):
                    raise SexprError("missing )", line, col)
                if toks[pos][0] == ")":
                    pos += 1
                    return items
                items.append(parse_one())
        if tok == ")":
            raise SexprError("unexpected )", line, col)
        return tok

    forms = []
    while pos < len(toks):
        forms.append(parse_one())
    return forms


def parse_one(text: str):
    forms = parse_many(text)
    if len(forms) != 1:
        raise SexprError(f"expected one form, found {len(forms)}", 1, 1)
    return forms[0]


def dumps(value, indent: int | None = None) -> str:
    """Render *value* back to s-expression text."""

    def atom(v) -> str:
        if isinstance(v, Keyword):
            return f":{str.__str__(v)}"
        if isinstance(v, bool):
            return "1" if v else "0"
        return str(v)

    def flat(v) -> str:
        if isinstance(v, list):
            return "(" + " ".join(flat(x) for x in v) + ")"
        return atom(v)

    if indent is None:
        return flat(value)

    def pretty(v, depth: int) -> str:
        if not isinstance(v, list):
            return atom(v)
        text = flat(v)
        if len(text) + depth * indent <= 100:
            return text
        pad = " " * ((depth + 1) * indent)
        head = atom(v[0]) if v and not isinstance(v[0], list) else None
        parts = []
        rest = v[1:] if head is not None else v
        for x in rest:
            parts.append(pad + pretty(x, depth + 1))
        opener = "(" + (head + "\n" if head is not None else "\n")
        return opener + "\n".join(parts) + ")"

    return pretty(value, 0)
