"""Minimal DFAs read off the background, equivalence checks, shape hashing.

A DFA here is a set of equations closed under successors. Atoms (0, 1 and
the letters) need no equation; their rows are fixed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .background import Background, InvariantViolation
from .deriv import atom_row
from .expr import N_ATOMS
from .plain import LETTERS

RowFn = Callable[[int], tuple]
HASH_MASK = (1 << 64) - 1


class IncompleteDfa(LookupError):
    """A state reached during a walk has no equation."""


def bg_row_fn(bg: Background) -> RowFn:
    nl = bg.nl
    right_part = bg.right_part

    def fn(s: int) -> tuple:
        if s < N_ATOMS:
            return atom_row(s, nl)
        try:
            tab = right_part(s)
        except KeyError:
            raise IncompleteDfa(f"state {s} has no equation") from None
        return tab[0], tab[1:]

    return fn


def reachable(row: RowFn, starts: Iterable[int]) -> list[int]:
    """States reachable from starts, breadth first, letters in order."""
    order = []
    seen = set()
    queue = deque()
    for s in starts:
        if s not in seen:
            seen.add(s)
            queue.append(s)
    while queue:
        s = queue.popleft()
        order.append(s)
        for t in row(s)[1]:
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return order


def equiv_classes(row: RowFn, seeds: Iterable[int]) -> list[list[int]]:
    """Language classes of the states reachable from seeds (Moore refinement)."""
    states = reachable(row, seeds)
    rows = {s: row(s) for s in states}
    block = {s: rows[s][0] for s in states}
    n_blocks = len(set(block.values()))
    while True:
        sigs: dict[tuple, int] = {}
        new = {}
        for s in states:
            o, nxt = rows[s]
            key = (block[s],) + tuple(block[t] for t in nxt)
            new[s] = sigs.setdefault(key, len(sigs))
        block = new
        if len(sigs) == n_blocks:
            break
        n_blocks = len(sigs)
    groups: dict[int, list[int]] = {}
    for s in states:
        groups.setdefault(block[s], []).append(s)
    return list(groups.values())


@dataclass
class Mdfa:
    start: int
    states: list = field(default_factory=list)   # non-atom states, canonical order
    rows: dict = field(default_factory=dict)     # state -> (o, successors)

    def canonical(self) -> tuple:
        """Rows with states renumbered by discovery order; atoms keep their ids."""
        if self.start < N_ATOMS:
            return (("atom", self.start),)
        num = {s: N_ATOMS + i for i, s in enumerate(self.states)}
        out = []
        for s in self.states:
            o, nxt = self.rows[s]
            out.append((o,) + tuple(t if t < N_ATOMS else num[t] for t in nxt))
        return tuple(out)

    def dump(self) -> str:
        """One line per state: 'stateN: o=1 a->state1 b->0'."""
        def name(t: int) -> str:
            if t < N_ATOMS:
                return "0" if t == 0 else "1" if t == 1 else LETTERS[t - 2]
            return f"state{num[t]}"

        # an atom start has no equation; its fixed row is printed as state0
        states = [self.start] if self.start < N_ATOMS else self.states
        num = {s: i for i, s in enumerate(states)}
        lines = []
        for s in states:
            o, nxt = self.rows[s]
            arrows = " ".join(f"{LETTERS[k]}->{name(t)}" for k, t in enumerate(nxt))
            lines.append(f"state{num[s]}: o={o} {arrows}")
        return "\n".join(lines)

    def __len__(self) -> int:
        return len(self.states)


def mdfa_of(bg: Background, iE: int) -> Mdfa:
    """The DFA of rep(iE) as currently stored, in canonical breadth-first order."""
    start = bg.rep(iE)
    row = bg_row_fn(bg)
    if start < N_ATOMS:
        return Mdfa(start, [], {start: atom_row(start, bg.nl)})
    states = [s for s in reachable(row, [start]) if s >= N_ATOMS]
    return Mdfa(start, states, {s: row(s) for s in states})


def minimize(bg: Background, iE: int) -> Mdfa:
    """Unify the equivalent states of rep(iE)'s DFA; returns the minimal DFA."""
    start = bg.rep(iE)
    if start >= N_ATOMS:
        sizes = bg.store.sizes
        for blk in equiv_classes(bg_row_fn(bg), [start]):
            if len(blk) < 2:
                continue
            if any(x < N_ATOMS for x in blk):
                raise InvariantViolation(f"atom equivalent to other states: {blk}")
            keep = min(blk, key=lambda x: (sizes[x], x))
            for x in blk:
                if x != keep:
                    bg.unify(keep, x)
    return mdfa_of(bg, iE)


def equivalent_rows(row1: RowFn, s1: int, row2: RowFn, s2: int) -> bool:
    """Product walk: languages equal iff o agrees on every reachable pair."""
    same = row1 is row2
    seen = set()
    stack = [(s1, s2)]
    while stack:
        pair = stack.pop()
        if pair in seen:
            continue
        seen.add(pair)
        p, q = pair
        if same and p == q:
            continue
        o1, n1 = row1(p)
        o2, n2 = row2(q)
        if o1 != o2:
            return False
        stack.extend(zip(n1, n2))
    return True


def equivalent(bg: Background, iE1: int, iE2: int) -> bool:
    a = bg.rep(iE1)
    b = bg.rep(iE2)
    if a == b:
        return True
    fn = bg_row_fn(bg)
    return equivalent_rows(fn, a, fn, b)


def shape_hash(m: Mdfa) -> int:
    return hash(m.canonical()) & HASH_MASK


class GlobalIndex:
    """Shape-hash buckets of representatives with known minimal DFAs.

    Registered as a merge hook on the background, so an entry that stops
    being a representative is replaced by (or folded into) its new one.
    """

    def __init__(self, bg: Background):
        self.bg = bg
        self.buckets: dict[int, list[int]] = {}
        self.hash_of: dict[int, int] = {}
        bg.merge_hooks.append(self._on_merge)

    def _on_merge(self, loser: int, winner: int) -> None:
        h = self.hash_of.pop(loser, None)
        if h is None:
            return
        lst = self.buckets[h]
        if winner in self.hash_of:
            lst.remove(loser)
        else:
            lst[lst.index(loser)] = winner
            self.hash_of[winner] = h

    def __contains__(self, iE: int) -> bool:
        return iE in self.hash_of

    def __len__(self) -> int:
        return len(self.hash_of)

    def bucket(self, h: int) -> list[int]:
        return self.buckets.get(h, [])

    def add(self, h: int, iE: int) -> None:
        self.buckets.setdefault(h, []).append(iE)
        self.hash_of[iE] = h

    def entries(self) -> list[int]:
        return list(self.hash_of)

    def detach(self) -> None:
        self.bg.merge_hooks.remove(self._on_merge)


def unify_into_global(bg: Background, index: GlobalIndex, m: Mdfa) -> int:
    """Merge every state of m with an equivalent indexed one, or index it."""
    for s in m.states:
        r = bg.rep(s)
        if r in index:
            continue
        h = shape_hash(mdfa_of(bg, r))
        hit = None
        for y in index.bucket(h):
            if equivalent(bg, r, y):
                hit = y
                break
        if hit is None:
            index.add(h, r)
        else:
            bg.unify(hit, r)
    return bg.rep(m.start)
