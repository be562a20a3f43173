"""Plain (unnormalized) regular expressions as nested tuples.

Nodes are tuples whose first slot is the type tag:

    (ZERO,)  (ONE,)  (LETTER, x)  (UNION, l, r)  (CONCAT, l, r)  (STAR, c)

Trees can be thousands of nodes deep, so every traversal here uses an
explicit stack instead of recursion.
"""

from __future__ import annotations

from typing import Tuple

ZERO, ONE, LETTER, UNION, CONCAT, STAR = range(6)
TYPE_NAMES = ("ZERO", "ONE", "LETTER", "UNION", "CONCAT", "STAR")

Plain = Tuple  # a nested tuple as described above

ZERO_E = (ZERO,)
ONE_E = (ONE,)
LETTERS = "abcdefghijklmnopqrstuvwxyz"


class ParseError(ValueError):
    """Syntax error in expression text; `column` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


def letter(x: int) -> Plain:
    return (LETTER, x)


def union(l: Plain, r: Plain) -> Plain:
    return (UNION, l, r)


def concat(l: Plain, r: Plain) -> Plain:
    return (CONCAT, l, r)


def star(c: Plain) -> Plain:
    return (STAR, c)


def union_all(terms: list) -> Plain:
    """Right-associated union of a non-empty list."""
    e = terms[-1]
    for t in reversed(terms[:-1]):
        e = (UNION, t, e)
    return e


def concat_all(factors: list) -> Plain:
    """Right-associated concatenation of a non-empty list."""
    e = factors[-1]
    for f in reversed(factors[:-1]):
        e = (CONCAT, f, e)
    return e


# ---------------------------------------------------------------- parsing

def parse(text: str, nl: int = 26) -> Plain:
    """Parse one expression. '+' and juxtaposition both associate right."""
    # one frame per open parenthesis: [terms, factors, column of '(']
    frames = [[[], [], 0]]
    last_op_col = 0
    for col, ch in enumerate(text, 1):
        if ch.isspace():
            continue
        frame = frames[-1]
        if ch == "0":
            frame[1].append(ZERO_E)
        elif ch == "1":
            frame[1].append(ONE_E)
        elif "a" <= ch <= "z":
            x = ord(ch) - 97
            if x >= nl:
                raise ParseError(f"letter {ch!r} outside the {nl}-letter alphabet", col)
            frame[1].append((LETTER, x))
        elif ch == "*":
            if not frame[1]:
                raise ParseError("'*' without an operand", col)
            frame[1][-1] = (STAR, frame[1][-1])
        elif ch == "+":
            if not frame[1]:
                raise ParseError("'+' without a left operand", col)
            frame[0].append(concat_all(frame[1]))
            frame[1] = []
            last_op_col = col
        elif ch == "(":
            frames.append([[], [], col])
        elif ch == ")":
            if len(frames) == 1:
                raise ParseError("unmatched ')'", col)
            if not frame[1]:
                what = "empty parentheses" if not frame[0] else "'+' without a right operand"
                raise ParseError(what, col)
            frame[0].append(concat_all(frame[1]))
            frames.pop()
            frames[-1][1].append(union_all(frame[0]))
        else:
            raise ParseError(f"unexpected character {ch!r}", col)
    if len(frames) > 1:
        raise ParseError("unclosed '('", frames[-1][2])
    terms, factors, _ = frames[0]
    if not factors:
        if terms:
            raise ParseError("'+' without a right operand", last_op_col)
        raise ParseError("empty expression", len(text) + 1)
    terms.append(concat_all(factors))
    return union_all(terms)


# --------------------------------------------------------------- printing

def to_text(e: Plain) -> str:
    """Infix text that parses back to exactly the same tree."""
    out: list[str] = []
    stack: list = [e]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        t = item[0]
        if t == ZERO:
            out.append("0")
        elif t == ONE:
            out.append("1")
        elif t == LETTER:
            out.append(LETTERS[item[1]])
        elif t == UNION:
            l, r = item[1], item[2]
            # '+' is right-associative: only a union on the left needs parens
            stack.append(r)
            stack.append(" + ")
            _push_wrapped(stack, l, l[0] == UNION)
        elif t == CONCAT:
            l, r = item[1], item[2]
            _push_wrapped(stack, r, r[0] == UNION)
            _push_wrapped(stack, l, l[0] in (UNION, CONCAT))
        else:
            stack.append("*")
            c = item[1]
            _push_wrapped(stack, c, c[0] in (UNION, CONCAT))
    return "".join(out)


def _push_wrapped(stack: list, e: Plain, wrap: bool) -> None:
    if wrap:
        stack.append(")")
        stack.append(e)
        stack.append("(")
    else:
        stack.append(e)


# ---------------------------------------------------- bottom-up attributes

def postorder(e: Plain):
    """Yield the nodes of e children-first (shared subtrees visited again)."""
    stack = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        t = node[0]
        if expanded or t <= LETTER:
            yield node
            continue
        stack.append((node, True))
        if t == STAR:
            stack.append((node[1], False))
        else:
            stack.append((node[2], False))
            stack.append((node[1], False))


def size(e: Plain) -> int:
    """Letters plus operators; 0 and 1 count nothing."""
    n = 0
    stack = [e]
    while stack:
        node = stack.pop()
        t = node[0]
        if t == LETTER:
            n += 1
        elif t == STAR:
            n += 1
            stack.append(node[1])
        elif t >= UNION:
            n += 1
            stack.append(node[1])
            stack.append(node[2])
    return n


def alphabets(e: Plain) -> tuple[int, int, int]:
    """(letters occurring, single letters in the language, nullable) as bitmasks."""
    vals: list = []
    for node in postorder(e):
        vals.append(_attrs(node, vals))
    return vals[-1]


def _attrs(node: Plain, vals: list) -> tuple[int, int, int]:
    t = node[0]
    if t == ZERO:
        return (0, 0, 0)
    if t == ONE:
        return (0, 0, 1)
    if t == LETTER:
        bit = 1 << node[1]
        return (bit, bit, 0)
    if t == STAR:
        a, a1, _ = vals.pop()
        return (a, a1, 1)
    ra, ra1, rn = vals.pop()
    la, la1, ln = vals.pop()
    if t == UNION:
        return (la | ra, la1 | ra1, ln | rn)
    a1 = (la1 if rn else 0) | (ra1 if ln else 0)
    return (la | ra, a1, ln & rn)


def universal(mask: int) -> Plain:
    """(x1 + ... + xl)* over the letters of mask, or 1 when mask is empty."""
    letters = [(LETTER, x) for x in range(mask.bit_length()) if mask >> x & 1]
    if not letters:
        return ONE_E
    return (STAR, union_all(letters))


def lift(e: Plain) -> Plain:
    """One bottom-up pass of the three lifting rules.

    Each value on the work stack is (tree, letters, single letters, nullable,
    universal mask) where the last slot is non-zero only for a node that is
    exactly a universal star built by this pass.
    """
    vals: list = []
    for node in postorder(e):
        t = node[0]
        if t == ZERO:
            vals.append((node, 0, 0, 0, 0))
        elif t == ONE:
            vals.append((node, 0, 0, 1, 0))
        elif t == LETTER:
            bit = 1 << node[1]
            vals.append((node, bit, bit, 0, 0))
        elif t == STAR:
            c, a, a1, _, _ = vals.pop()
            if a == a1:
                # rule 1: every occurring letter is itself a word of the body
                u = universal(a)
                vals.append((u, a, a, 1, a))
            else:
                vals.append(((STAR, c), a, a1, 1, 0))
        else:
            r = vals.pop()
            l = vals.pop()
            rt, ra, ra1, rn, ru = r
            lt, la, la1, ln, lu = l
            if t == UNION:
                # rule 3: a union absorbed by a universal star
                if ru and la & ~ru == 0:
                    vals.append(r)
                elif lu and ra & ~lu == 0:
                    vals.append(l)
                else:
                    vals.append(((UNION, lt, rt), la | ra, la1 | ra1, ln | rn, 0))
            else:
                # rule 2: a nullable factor absorbed by a universal star
                if ru and ln and la & ~ru == 0:
                    vals.append(r)
                elif lu and rn and ra & ~lu == 0:
                    vals.append(l)
                else:
                    a1 = (la1 if rn else 0) | (ra1 if ln else 0)
                    vals.append(((CONCAT, lt, rt), la | ra, a1, ln & rn, 0))
    return vals[-1][0]

