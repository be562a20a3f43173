"""Binary snapshots of a store and its background.

Layout, all little-endian:

    header      b"RLBG", version u32, nl u32, M u64
    expressions count u64, then per expression
                id u64, type u8, child count u16, child ids u64 ...
                children always precede parents; atoms are implicit
    classes     count u64, then (id u64, representative u64) pairs
    equations   count u64, then (left id u64, o u8, nl successor ids u64)
    entries     count u64, then ids u64 (catalogue or index entries)

Identifiers in the file are the saver's; the loader re-interns every
expression and maps old ids to its own, so a snapshot can be loaded into a
store that already holds other expressions.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Iterable

from .background import Background
from .expr import N_ATOMS, ExprStore
from .plain import CONCAT, STAR, UNION

MAGIC = b"RLBG"
VERSION = 1

_HEADER = struct.Struct("<4sIIQ")
_U64 = struct.Struct("<Q")
_REC = struct.Struct("<QBH")
_PAIR = struct.Struct("<QQ")


class SnapshotError(ValueError):
    """Malformed, truncated or incompatible snapshot."""


def _live_order(store: ExprStore, roots: Iterable[int]) -> list[int]:
    """Non-atom ids reachable from roots, children first."""
    order: list[int] = []
    seen: set[int] = set(range(N_ATOMS))
    kids = store.kids
    for root in roots:
        if root in seen:
            continue
        stack: list = [(root, False)]
        while stack:
            x, expanded = stack.pop()
            if expanded:
                order.append(x)
                continue
            if x in seen:
                continue
            seen.add(x)
            stack.append((x, True))
            for c in kids[x]:
                if c not in seen:
                    stack.append((c, False))
    return order


def save(fh: BinaryIO, store: ExprStore, bg: Background | None, entries: Iterable[int] = ()) -> dict:
    """Write every live expression, class and equation. Returns section counts."""
    entries = list(entries)
    nl = store.nl
    order = _live_order(store, store.ids.in_use_ids())
    fh.write(_HEADER.pack(MAGIC, VERSION, nl, store.M))
    fh.write(_U64.pack(len(order)))
    kind = store.kind
    kids = store.kids
    for x in order:
        ks = kids[x]
        if len(ks) > 0xFFFF:
            raise SnapshotError(f"expression {x} has {len(ks)} children, more than the format allows")
        fh.write(_REC.pack(x, kind[x], len(ks)))
        fh.write(struct.pack(f"<{len(ks)}Q", *ks))
    pairs = []
    eqs = []
    if bg is not None:
        tree = bg.tree
        pairs = [(x, bg.rep(x)) for x in order if tree[x] >= 0]
        eqs = [(iE, tab) for _, iE, tab in bg.equations()]
    fh.write(_U64.pack(len(pairs)))
    for x, r in pairs:
        fh.write(_PAIR.pack(x, r))
    fh.write(_U64.pack(len(eqs)))
    row = struct.Struct(f"<QB{nl}Q")
    for iE, tab in eqs:
        fh.write(row.pack(iE, tab[0], *tab[1:]))
    fh.write(_U64.pack(len(entries)))
    fh.write(struct.pack(f"<{len(entries)}Q", *entries))
    return {"expressions": len(order), "classes": len(pairs), "equations": len(eqs), "entries": len(entries)}


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, st: struct.Struct) -> tuple:
        end = self.pos + st.size
        if end > len(self.data):
            raise SnapshotError("snapshot is truncated")
        out = st.unpack_from(self.data, self.pos)
        self.pos = end
        return out

    def ids(self, n: int) -> tuple:
        return self.take(struct.Struct(f"<{n}Q")) if n else ()

    def count(self) -> int:
        return self.take(_U64)[0]


def read_header(data: bytes) -> tuple[int, int, int]:
    """(version, nl, M) of a snapshot, checking the magic and version."""
    if len(data) < _HEADER.size:
        raise SnapshotError("snapshot is truncated")
    magic, version, nl, M = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotError("not a background snapshot (bad magic)")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    return version, nl, M


def load(data: bytes, store: ExprStore, bg: Background | None) -> dict:
    """Merge a snapshot into store/bg.

    Returns {"entries": mapped entry ids, "map": old id -> new id, and
    section counts}. The background is reduced afterwards.
    """
    _, nl, _ = read_header(data)
    if nl != store.nl:
        raise SnapshotError(f"snapshot alphabet has {nl} letters, store has {store.nl}")
    rd = _Reader(data)
    rd.pos = _HEADER.size
    mapping: dict[int, int] = {}

    def m(x: int) -> int:
        if x < N_ATOMS:
            return x
        try:
            return mapping[x]
        except KeyError:
            raise SnapshotError(f"id {x} used before it is defined") from None

    n_expr = rd.count()
    for _ in range(n_expr):
        x, t, k = rd.take(_REC)
        ks = [m(c) for c in rd.ids(k)]
        if t == UNION and k >= 2:
            mapping[x] = store.union_n(ks)
        elif t == CONCAT and k == 2:
            mapping[x] = store.concat2(ks[0], ks[1])
        elif t == STAR and k == 1:
            mapping[x] = store.star(ks[0])
        else:
            raise SnapshotError(f"bad record for id {x}: type {t} with {k} children")
    n_pairs = rd.count()
    pairs = [rd.take(_PAIR) for _ in range(n_pairs)]
    n_eq = rd.count()
    row = struct.Struct(f"<QB{nl}Q")
    eqs = [rd.take(row) for _ in range(n_eq)]
    entries = [m(x) for x in rd.ids(rd.count())]
    if rd.pos != len(data):
        raise SnapshotError("trailing bytes after the snapshot")
    if bg is not None:
        for x, r in pairs:
            bg.unify(m(x), m(r))
        rep = bg.rep
        for rec in eqs:
            iE, o, nxt = rec[0], rec[1], rec[2:]
            bg.add_eq(rep(m(iE)), (o,) + tuple(rep(m(t)) for t in nxt))
            bg.reduce()
    return {"entries": entries, "map": mapping, "expressions": n_expr,
            "classes": n_pairs, "equations": n_eq}


def save_file(path, store: ExprStore, bg: Background | None, entries: Iterable[int] = ()) -> dict:
    with open(path, "wb") as fh:
        return save(fh, store, bg, entries)


def load_file(path, store: ExprStore, bg: Background | None) -> dict:
    with open(path, "rb") as fh:
        data = fh.read()
    return load(data, store, bg)
