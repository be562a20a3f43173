"""Brute-force language oracle and random congruence rewrites.

Both are test helpers: lang_up_to enumerates every string of length <= d of
an expression's language, and apply_congruence_rewrite applies one identity
from the congruence that normalization must respect (unit and zero laws,
idempotence, associativity, commutativity, 0* = 1* = 1 and E** = E*).
"""

from __future__ import annotations

import random

from .expr import ExprStore
from .plain import CONCAT, LETTER, LETTERS, ONE, ONE_E, STAR, UNION, ZERO, ZERO_E, Plain

Lang = frozenset


def _cat(s1: frozenset, s2: frozenset, d: int) -> frozenset:
    if not s1 or not s2:
        return frozenset()
    return frozenset(u + w for u in s1 for w in s2 if len(u) + len(w) <= d)


def _iterate(s: frozenset, d: int) -> frozenset:
    base = [w for w in s if w]
    out = {""}
    frontier = {""}
    while frontier:
        new = set()
        for u in frontier:
            for w in base:
                if len(u) + len(w) <= d:
                    v = u + w
                    if v not in out:
                        new.add(v)
        out |= new
        frontier = new
    return frozenset(out)


def lang_plain(e: Plain, d: int) -> frozenset:
    """Strings of length <= d in the language of a plain tree."""
    vals: list[frozenset] = []
    stack: list = [(e, False)]
    while stack:
        node, done = stack.pop()
        t = node[0]
        if t == ZERO:
            vals.append(frozenset())
        elif t == ONE:
            vals.append(frozenset([""]))
        elif t == LETTER:
            vals.append(frozenset([LETTERS[node[1]]] if d >= 1 else []))
        elif not done:
            stack.append((node, True))
            for c in reversed(node[1:]):
                stack.append((c, False))
        elif t == STAR:
            vals.append(_iterate(vals.pop(), d))
        else:
            r = vals.pop()
            l = vals.pop()
            vals.append(l | r if t == UNION else _cat(l, r, d))
    return vals[0]


def lang_up_to(store: ExprStore, iE: int, d: int, memo: dict | None = None) -> frozenset:
    """Strings of length <= d in the language of a stored expression."""
    if memo is None:
        memo = {}
    kind = store.kind
    kids = store.kids
    stack = [iE]
    while stack:
        x = stack[-1]
        if x in memo:
            stack.pop()
            continue
        t = kind[x]
        if t == ZERO:
            memo[x] = frozenset()
        elif t == ONE:
            memo[x] = frozenset([""])
        elif t == LETTER:
            memo[x] = frozenset([LETTERS[x - 2]] if d >= 1 else [])
        else:
            missing = [c for c in kids[x] if c not in memo]
            if missing:
                stack.extend(missing)
                continue
            ks = kids[x]
            if t == UNION:
                acc: frozenset = frozenset()
                for c in ks:
                    acc = acc | memo[c]
                memo[x] = acc
            elif t == CONCAT:
                memo[x] = _cat(memo[ks[0]], memo[ks[1]], d)
            else:
                memo[x] = _iterate(memo[ks[0]], d)
        stack.pop()
    return memo[iE]


# -- congruence rewrites ---------------------------------------------------

# expansions that copy a subtree are limited to small subtrees so repeated
# rewriting does not blow up the expression
MAX_DUP_NODES = 8


def _nodes(e: Plain) -> list[tuple[tuple, Plain]]:
    """(path, node) for every node; a path is a tuple of child indices."""
    out = []
    stack = [((), e)]
    while stack:
        path, node = stack.pop()
        out.append((path, node))
        t = node[0]
        if t == STAR:
            stack.append((path + (1,), node[1]))
        elif t in (UNION, CONCAT):
            stack.append((path + (2,), node[2]))
            stack.append((path + (1,), node[1]))
    return out


def _replace(e: Plain, path: tuple, new: Plain) -> Plain:
    spine = [e]
    for i in path[:-1]:
        spine.append(spine[-1][i])
    for i in reversed(path):
        parent = spine.pop()
        new = parent[:i] + (new,) + parent[i + 1:]
    return new


def _count(e: Plain, limit: int) -> int:
    n = 0
    stack = [e]
    while stack and n <= limit:
        x = stack.pop()
        n += 1
        stack.extend(x[1:] if x[0] >= UNION else ())
    return n


def _small_random(rng: random.Random, nl: int) -> Plain:
    pick = rng.randrange(5)
    a = (LETTER, rng.randrange(nl))
    if pick == 0:
        return ZERO_E
    if pick == 1:
        return ONE_E
    if pick == 2:
        return a
    if pick == 3:
        return (STAR, a)
    return (CONCAT, a, (LETTER, rng.randrange(nl)))


def _rewrites(node: Plain, rng: random.Random, nl: int) -> tuple[list, list]:
    """(generic, specific) replacements for one node, as thunks.

    Generic ones are the unit-law expansions valid at every node; specific
    ones depend on the node's shape.
    """
    t = node[0]
    g: list = [
        lambda: (UNION, ZERO_E, node),
        lambda: (UNION, node, ZERO_E),
        lambda: (CONCAT, ONE_E, node),
        lambda: (CONCAT, node, ONE_E),
    ]
    if _count(node, MAX_DUP_NODES) <= MAX_DUP_NODES:
        g.append(lambda: (UNION, node, node))
    c: list = []
    if t == ZERO:
        c.append(lambda: (CONCAT, ZERO_E, _small_random(rng, nl)))
        c.append(lambda: (CONCAT, _small_random(rng, nl), ZERO_E))
    elif t == ONE:
        c.append(lambda: (STAR, ZERO_E))
        c.append(lambda: (STAR, ONE_E))
    elif t == UNION:
        l, r = node[1], node[2]
        c.append(lambda: (UNION, r, l))
        if l == r:
            c.append(lambda: l)
        if l == ZERO_E:
            c.append(lambda: r)
        if r == ZERO_E:
            c.append(lambda: l)
        if r[0] == UNION:
            c.append(lambda: (UNION, (UNION, l, r[1]), r[2]))
        if l[0] == UNION:
            c.append(lambda: (UNION, l[1], (UNION, l[2], r)))
    elif t == CONCAT:
        l, r = node[1], node[2]
        if l == ZERO_E or r == ZERO_E:
            c.append(lambda: ZERO_E)
        if l == ONE_E:
            c.append(lambda: r)
        if r == ONE_E:
            c.append(lambda: l)
        if r[0] == CONCAT:
            c.append(lambda: (CONCAT, (CONCAT, l, r[1]), r[2]))
        if l[0] == CONCAT:
            c.append(lambda: (CONCAT, l[1], (CONCAT, l[2], r)))
    elif t == STAR:
        inner = node[1]
        if inner == ZERO_E or inner == ONE_E:
            c.append(lambda: ONE_E)
        if inner[0] == STAR:
            c.append(lambda: inner)
        else:
            c.append(lambda: (STAR, node))
    return g, c


def apply_congruence_rewrite(e: Plain, rng: random.Random | int, nl: int = 2) -> Plain:
    """Apply one congruence identity, in either direction, at a random node.

    A node is chosen uniformly, then an identity matching it; shape-specific
    identities are preferred two times out of three so that reductions are
    exercised as often as expansions. Every node admits the unit-law
    expansions, so some rewrite always applies. rng may be a seed.
    """
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    nodes = _nodes(e)
    path, node = nodes[rng.randrange(len(nodes))]
    generic, specific = _rewrites(node, rng, nl)
    options = specific if specific and rng.random() < 2 / 3 else generic
    new = options[rng.randrange(len(options))]()
    if not path:
        return new
    return _replace(e, path, new)
