"""Syntactic derivatives and derivative-based DFA construction.

Rules, all built with the normalizing operators of the store:

    d(0) = d(1) = 0            d(y) = 1 if y = x else 0
    d(E1 + ... + En) = d(E1) + ... + d(En)
    d(E1 E2) = d(E1) E2 + (d(E2) if E1 is nullable)
    d(E*) = d(E) E*
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .expr import N_ATOMS, ExprStore
from .idpool import NIL
from .plain import CONCAT, LETTER, STAR, UNION


class DerivRow(NamedTuple):
    source: int
    o: int
    next: tuple


@dataclass
class DfaStats:
    """Counters filled by the DFA builders."""

    derived: int = 0   # states whose derivatives were computed
    skipped: int = 0   # states skipped because they already had an equation
    states: list = field(default_factory=list)


def derivative(store: ExprStore, iE: int, x: int) -> int:
    """Syntactic derivative of iE with respect to letter x, memoized per (iE, x)."""
    memo = store.dmemo[x]
    r = memo.get(iE)
    if r is not None:
        return r
    kind = store.kind
    t = kind[iE]
    if t == LETTER:
        return 1 if iE == 2 + x else 0
    if t <= LETTER:
        return 0
    allk = store.kids
    if t == UNION:
        r = store.union_n([derivative(store, c, x) for c in allk[iE]])
    elif t == STAR:
        r = store.concat2(derivative(store, allk[iE][0], x), iE)
    else:
        # walk the concat chain; every tail is itself a concat and memoized
        chain = [iE]
        null = store.null
        cur = iE
        while True:
            l, rest = allk[cur]
            if not null[l] or kind[rest] != CONCAT or rest in memo:
                break
            chain.append(rest)
            cur = rest
        l, rest = allk[cur]
        r = store.concat2(derivative(store, l, x), rest)
        if null[l]:
            r = store.union2(r, derivative(store, rest, x))
        memo[cur] = r
        chain.pop()
        while chain:
            cur = chain.pop()
            l, rest = allk[cur]
            r = store.union2(store.concat2(derivative(store, l, x), rest), r)
            memo[cur] = r
        return r
    memo[iE] = r
    return r


class EquationDerivatives:
    """Derivatives that reuse the successors stored in a background.

    A subexpression whose class has an equation contributes that equation's
    successor, which denotes the same language as its derivative. Terms
    built here remember how they were built: concat2 and union_n flatten
    their operands, and without the record the flattened pieces would have
    no equations and derivation would fall back to syntax, whose closure
    can be far larger than the product of the known minimal DFAs.
    One instance serves one DFA construction.
    """

    def __init__(self, bg):
        self.bg = bg
        self.store = bg.store
        self.memo: list[dict] = [dict() for _ in range(self.store.nl)]
        self.parts: dict[int, tuple] = {}
        self.made: set[int] = set()

    # parts are recorded only for ids this instance produces first, after
    # their operands, so decompositions never form a cycle

    def _concat(self, a: int, b: int) -> int:
        r = self.store.concat2(a, b)
        if r not in self.made:
            self.made.add(r)
            if self.store.kind[a] == CONCAT:
                self.parts[r] = (CONCAT, a, b)
        return r

    def _union(self, terms: list) -> int:
        rep = self.bg.rep
        terms = [rep(t) for t in terms]
        r = self.store.union_n(terms)
        if r not in self.made:
            self.made.add(r)
            if r >= N_ATOMS and r not in terms:
                self.parts[r] = (UNION, tuple(terms))
        return r

    def __call__(self, iE: int, x: int) -> int:
        store = self.store
        kind = store.kind
        t = kind[iE]
        if t == LETTER:
            return 1 if iE == 2 + x else 0
        if t <= LETTER:
            return 0
        memo = self.memo[x]
        r = memo.get(iE)
        if r is not None:
            return r
        bg = self.bg
        q = bg.eq_by_ie.first[bg.rep(iE)]
        if q != NIL:
            r = bg.tab_tie[bg.tab_ir[q]][1 + x]
            memo[iE] = r
            return r
        p = self.parts.get(iE)
        if p is not None:
            t = p[0]
            ks = p[1:] if t == CONCAT else p[1]
        else:
            ks = store.kids[iE]
        if t == UNION:
            r = self._union([self(c, x) for c in ks])
        elif t == STAR:
            r = self._concat(self(ks[0], x), iE)
        else:
            l, rest = ks
            r = self._concat(self(l, x), rest)
            if store.null[l]:
                r = self._union([r, self(rest, x)])
        memo[iE] = r
        return r


def row(store: ExprStore, iE: int) -> tuple[int, tuple]:
    """(nullable bit, derivative per letter)."""
    return store.null[iE], tuple(derivative(store, iE, x) for x in range(store.nl))


def build_dfa_e(store: ExprStore, iE: int, stats: DfaStats | None = None) -> list[DerivRow]:
    """Worklist closure of derivatives from iE, breadth first.

    The start state always gets a row; other atoms reached as targets do not,
    since their rows are fixed.
    """
    rows: list[DerivRow] = []
    seen = {iE}
    queue = deque([iE])
    while queue:
        s = queue.popleft()
        o, nxt = row(store, s)
        rows.append(DerivRow(s, o, nxt))
        for t in nxt:
            if t >= N_ATOMS and t not in seen:
                seen.add(t)
                queue.append(t)
    if stats is not None:
        stats.derived += len(rows)
    return rows


def atom_row(iE: int, nl: int) -> tuple[int, tuple]:
    """Fixed rows of the atoms: 0 is a sink, 1 accepts only the empty word."""
    if iE == 0:
        return 0, (0,) * nl
    if iE == 1:
        return 1, (0,) * nl
    x = iE - 2
    return 0, tuple(1 if y == x else 0 for y in range(nl))


def derivative_row_fn(store: ExprStore):
    """Row function over raw expressions, for product walks."""
    nl = store.nl

    def fn(s: int) -> tuple[int, tuple]:
        if s < N_ATOMS:
            return atom_row(s, nl)
        return row(store, s)

    return fn


class DerivationLimit(RuntimeError):
    """A DFA construction derived more rows than its limit allows."""


def build_dfa_b(bg, iE: int, check_seen: bool = False, stats: DfaStats | None = None,
                through_equations: bool = False, max_rows: int | None = None) -> int:
    """Derivative closure of iE written into the background.

    Each state's row is rewritten through rep and added as an equation, then
    the background is reduced. With check_seen (algorithm O) a state whose
    representative already has an equation is not derived again; the walk
    continues through that equation's right part instead. With
    through_equations, a subexpression that already has an equation
    contributes its stored successor instead of its syntactic derivative,
    which keeps the closure close to the product of known minimal DFAs.
    With max_rows, DerivationLimit is raised once that many rows have been
    derived; the equations added so far stay (they are all true) but the
    DFA of iE is incomplete. Returns rep(iE).
    """
    store = bg.store
    rep = bg.rep
    nl = store.nl
    if iE < N_ATOMS:
        return iE
    if through_equations:
        deriv = EquationDerivatives(bg)
    visited: set[int] = set()
    rows = 0
    queue = deque([iE])
    while queue:
        s = queue.popleft()
        r = rep(s)
        if r in visited or r < N_ATOMS:
            continue
        visited.add(r)
        if check_seen and bg.has_equation(r):
            if stats is not None:
                stats.skipped += 1
            for t in bg.right_part(r)[1:]:
                if t >= N_ATOMS:
                    queue.append(t)
            continue
        if max_rows is not None and rows >= max_rows:
            raise DerivationLimit(f"more than {max_rows} derivative rows")
        rows += 1
        if through_equations:
            # r has no equation yet, so derivation enters r and stops at
            # subexpressions that have one
            nxt = tuple(deriv(r, x) for x in range(nl))
            o = store.null[r]
        else:
            o, nxt = row(store, r)
        tab = (o,) + tuple(rep(t) for t in nxt)
        bg.add_eq(r, tab)
        bg.reduce()
        if stats is not None:
            stats.derived += 1
        for t in nxt:
            if t >= N_ATOMS:
                queue.append(t)
    return rep(iE)

