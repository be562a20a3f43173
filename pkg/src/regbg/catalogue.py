"""Bottom-up enumeration of minimal expressions, one per language.

Every subexpression of a minimal expression is minimal, and swapping a
subexpression for another minimal expression of the same language keeps
size and language. So the languages of minimal size s are all reached by
combining catalogued expressions of smaller sizes: stars of size s - 1,
and unions and concatenations of sizes s1 + s2 + 1 = s. A candidate is new
when no catalogued expression with the same minimal-DFA shape hash is
equivalent to it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from .background import Background
from .deriv import build_dfa_b
from .dfa import equivalent, minimize, shape_hash
from .expr import N_ATOMS, ExprStore
from .simplify import Workbench
from .snapshot import load_file, save_file


@dataclass
class Catalogue:
    by_size: list = field(default_factory=list)     # size -> minimal ids
    by_hash: dict = field(default_factory=dict)     # shape hash -> ids
    tested: int = 0                                 # candidates that needed a DFA
    added: int = 0                                  # entries found by enumeration

    @property
    def max_size(self) -> int:
        return len(self.by_size) - 1

    def counts(self) -> list[int]:
        return [len(x) for x in self.by_size]

    def cumulative(self) -> list[int]:
        out = []
        total = 0
        for c in self.counts():
            total += c
            out.append(total)
        return out

    def entries(self) -> list[int]:
        return [x for lst in self.by_size for x in lst]

    def add(self, h: int, iE: int, size: int) -> None:
        while len(self.by_size) <= size:
            self.by_size.append([])
        self.by_size[size].append(iE)
        self.by_hash.setdefault(h, []).append(iE)


def _candidates(store: ExprStore, cat: Catalogue, s: int):
    """Expressions of size s built from catalogued pieces (may repeat)."""
    by_size = cat.by_size
    for c in by_size[s - 1]:
        yield store.star(c)
    for s1 in range(0, s - 1):
        s2 = s - 1 - s1
        left = by_size[s1]
        right = by_size[s2]
        for i, e1 in enumerate(left):
            for e2 in right:
                yield store.concat2(e1, e2)
            if s1 < s2:
                for e2 in right:
                    yield store.union2(e1, e2)
            elif s1 == s2:
                for e2 in right[i + 1:]:
                    yield store.union2(e1, e2)


def _entry_hash(bg: Background, iE: int) -> int:
    if iE < N_ATOMS:
        return hash(("atom", iE))
    build_dfa_b(bg, iE, check_seen=True, through_equations=True)
    return shape_hash(minimize(bg, iE))


def catalogue_from_entries(store: ExprStore, bg: Background, entries) -> Catalogue:
    """Rebuild a catalogue (sizes and hash buckets) from loaded entry ids."""
    cat = Catalogue()
    for x in entries:
        r = bg.rep(x)
        cat.add(_entry_hash(bg, r), r, store.sizes[r])
    return cat


def enumerate_minimal(store: ExprStore, bg: Background, max_size: int,
                      start: Catalogue | None = None,
                      progress: Callable[[int, int, float], None] | None = None) -> Catalogue:
    """Catalogue of one minimal expression per language of size <= max_size.

    With start, enumeration extends that catalogue; entries it already
    holds are not added again (cat.added counts the new ones).
    """
    nl = store.nl
    cat = start if start is not None else Catalogue()
    sizes = store.sizes
    seen: set[int] = set(cat.entries())
    t0 = time.perf_counter()
    for s in range(max_size + 1):
        while len(cat.by_size) <= s:
            cat.by_size.append([])
        if s <= 1:
            atoms = [0, 1] if s == 0 else [2 + x for x in range(nl)]
            for x in atoms:
                if x not in seen:
                    cat.add(hash(("atom", x)), x, s)
                    cat.added += 1
                    seen.add(x)
        else:
            for c in _candidates(store, cat, s):
                if c in seen or sizes[c] != s:
                    continue
                seen.add(c)
                cat.tested += 1
                build_dfa_b(bg, c, check_seen=True, through_equations=True)
                h = shape_hash(minimize(bg, c))
                hit = None
                for y in cat.by_hash.get(h, ()):
                    if equivalent(bg, y, c):
                        hit = y
                        break
                if hit is not None:
                    bg.unify(hit, c)
                    continue
                r = bg.rep(c)
                if r < N_ATOMS or sizes[r] < s:
                    # a smaller equivalent exists that the catalogue missed
                    raise AssertionError(
                        f"candidate {store.to_text(c)} has a smaller equivalent {store.to_text(r)}")
                cat.add(h, r, s)
                cat.added += 1
        if progress:
            progress(s, len(cat.by_size[s]), time.perf_counter() - t0)
    return cat


def save_catalogue(path, store: ExprStore, bg: Background, cat: Catalogue) -> dict:
    return save_file(path, store, bg, cat.entries())


def preload_catalogue(wb: Workbench, path) -> int:
    """Load a catalogue snapshot into the workbench's global index.

    Entries equivalent to something already indexed are unified with it
    instead of being added. Returns the number of entries newly indexed.
    """
    store = wb.store
    bg = wb.bg
    info = load_file(path, store, bg)
    index = wb.index
    added = 0
    for x in info["entries"]:
        r = bg.rep(x)
        wb.catalogue_entries.append(r)
        if r < N_ATOMS or r in index:
            continue
        h = _entry_hash(bg, r)
        r = bg.rep(r)
        hit = None
        for y in index.bucket(h):
            if equivalent(bg, y, r):
                hit = y
                break
        if hit is None:
            index.add(h, r)
            added += 1
        else:
            bg.unify(hit, r)
    if info["entries"]:
        top = max(store.sizes[bg.rep(x)] for x in info["entries"])
        wb.catalogue_max = max(top, wb.catalogue_max or 0)
    elif wb.catalogue_max is None:
        wb.catalogue_max = -1
    return added
