"""Hash-consed store of normalized regular expressions.

Every normalized expression gets one integer identifier. Identifiers 0 and 1
are the expressions 0 and 1, identifiers 2..27 the letters a..z. Structure is
kept in flat per-identifier arrays and structural sharing is enforced through
hash buckets implemented with a MultiList.

Normalized form:
    UNION   two or more children, none 0 or a union, strictly increasing ids
    CONCAT  exactly two children, neither 0 nor 1, left child not a concat
    STAR    child not 0, 1 or a star
"""

from __future__ import annotations

from array import array
from typing import Iterable, Sequence

from .idpool import NIL, MultiList, TwoLists, int_array
from .plain import (
    CONCAT,
    LETTER,
    LETTERS,
    ONE,
    STAR,
    TYPE_NAMES,
    UNION,
    ZERO,
    Plain,
    parse,
)

N_ATOMS = 28
DEFAULT_MAX_IDS = 5_000_000


class StoreAuditError(AssertionError):
    pass


def letter_id(x: int) -> int:
    return 2 + x


def is_atom(iE: int) -> bool:
    return iE < N_ATOMS


class ExprStore:
    """Normalized expressions, each identified by a unique integer."""

    def __init__(self, nl: int = 2, max_ids: int = DEFAULT_MAX_IDS):
        if not 1 <= nl <= 26:
            raise ValueError(f"nl must be in 1..26, got {nl}")
        if max_ids <= N_ATOMS:
            raise ValueError(f"max_ids must exceed {N_ATOMS}")
        self.nl = nl
        self.M = max_ids
        self.kind = bytearray(max_ids)
        self.kids: list[tuple] = [()] * max_ids
        self.code = array("q", [0]) * max_ids
        self.sizes = int_array(max_ids)
        self.null = bytearray(max_ids)
        self.ids = TwoLists(max_ids)
        nb = 1
        while nb < max_ids // 2:
            nb <<= 1
        self.mask = nb - 1
        self.table = MultiList(nb, max_ids)
        # derivative memo, one dict per letter (filled by the deriv module)
        self.dmemo: list[dict] = [dict() for _ in range(nl)]
        self.n_empty = 0
        self.n_nempty = 0
        self.n_iter = 0
        self.n_dejavu = 0
        for iE in range(N_ATOMS):
            self.ids.acquire(iE)
            if iE == 0:
                t, key = ZERO, ()
            elif iE == 1:
                t, key = ONE, ()
                self.null[1] = 1
            else:
                t, key = LETTER, (iE,)
                self.sizes[iE] = 1
            self.kind[iE] = t
            h = hash((t, key))
            self.code[iE] = h
            self.table.add(h & self.mask, iE)

    # ------------------------------------------------------------ interning

    def intern(self, t: int, kids: tuple) -> int:
        """Identifier of the normalized expression (t, kids), created if new."""
        h = hash((t, kids))
        b = h & self.mask
        table = self.table
        x = table.first[b]
        if x == NIL:
            self.n_empty += 1
        else:
            self.n_nempty += 1
            allk = self.kids
            kind = self.kind
            succ = table.succ
            while x != NIL:
                self.n_iter += 1
                if kind[x] == t and (allk[x] == kids or (t == LETTER and kids == (x,))):
                    self.n_dejavu += 1
                    return x
                x = succ[x]
        if t <= LETTER:
            raise ValueError(f"atoms are preallocated, cannot intern {TYPE_NAMES[t]}")
        iE = self.ids.acquire()
        self.kind[iE] = t
        self.kids[iE] = kids
        self.code[iE] = h
        sizes = self.sizes
        null = self.null
        if t == UNION:
            s = len(kids) - 1
            n = 0
            for c in kids:
                s += sizes[c]
                n |= null[c]
        elif t == CONCAT:
            l, r = kids
            s = sizes[l] + sizes[r] + 1
            n = null[l] & null[r]
        else:
            s = sizes[kids[0]] + 1
            n = 1
        sizes[iE] = s
        null[iE] = n
        table.add(b, iE)
        return iE

    def lookup(self, t: int, kids: tuple) -> int:
        """Identifier of (t, kids) if it exists, else NIL. Never creates."""
        h = hash((t, kids))
        x = self.table.first[h & self.mask]
        succ = self.table.succ
        while x != NIL:
            if self.kind[x] == t and (self.kids[x] == kids or (t == LETTER and kids == (x,))):
                return x
            x = succ[x]
        return NIL

    # ------------------------------------------------------------ operators

    def union2(self, e1: int, e2: int) -> int:
        if e1 == 0 or e1 == e2:
            return e2
        if e2 == 0:
            return e1
        kind = self.kind
        t1 = self.kids[e1] if kind[e1] == UNION else (e1,)
        t2 = self.kids[e2] if kind[e2] == UNION else (e2,)
        terms = sorted(set(t1).union(t2))
        if len(terms) == 1:
            return terms[0]
        return self.intern(UNION, tuple(terms))

    def union_n(self, ids: Iterable[int]) -> int:
        kind = self.kind
        allk = self.kids
        terms: set[int] = set()
        for e in ids:
            if kind[e] == UNION:
                terms.update(allk[e])
            elif e != 0:
                terms.add(e)
        if not terms:
            return 0
        if len(terms) == 1:
            return terms.pop()
        return self.intern(UNION, tuple(sorted(terms)))

    def concat2(self, e1: int, e2: int) -> int:
        if e1 == 0 or e2 == 0:
            return 0
        if e1 == 1:
            return e2
        if e2 == 1:
            return e1
        kind = self.kind
        if kind[e1] != CONCAT:
            return self.intern(CONCAT, (e1, e2))
        # (F1 F2) . E = F1 (F2 . E), unrolled over the whole chain
        allk = self.kids
        factors = []
        x = e1
        while kind[x] == CONCAT:
            l, x = allk[x]
            factors.append(l)
        factors.append(x)
        r = e2
        for f in reversed(factors):
            r = self.intern(CONCAT, (f, r))
        return r

    def concat_n(self, ids: Sequence[int]) -> int:
        if not ids:
            return 1
        r = ids[-1]
        for e in reversed(ids[:-1]):
            r = self.concat2(e, r)
        return r

    def star(self, e: int) -> int:
        if e <= 1:
            return 1
        if self.kind[e] == STAR:
            return e
        return self.intern(STAR, (e,))

    # --------------------------------------------------------------- queries

    def size(self, iE: int) -> int:
        return self.sizes[iE]

    def nullable(self, iE: int) -> int:
        return self.null[iE]

    def in_use(self, iE: int) -> bool:
        return self.ids.in_use(iE)

    def count_in_use(self) -> int:
        return self.ids.count_in_use()

    def factors(self, iE: int) -> list[int]:
        """The concatenation chain of iE as a list (a single item if not a concat)."""
        out = []
        kind = self.kind
        while kind[iE] == CONCAT:
            l, iE = self.kids[iE]
            out.append(l)
        out.append(iE)
        return out

    def letters_of(self, iE: int) -> int:
        """Bitmask of the letters occurring in iE."""
        mask = 0
        seen = set()
        stack = [iE]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            if self.kind[x] == LETTER:
                mask |= 1 << (x - 2)
            else:
                stack.extend(self.kids[x])
        return mask

    def subexpressions(self, iE: int) -> list[int]:
        """All distinct identifiers reachable from iE, children before parents."""
        order: list[int] = []
        seen = set()
        stack: list = [(iE, False)]
        while stack:
            x, expanded = stack.pop()
            if expanded:
                order.append(x)
                continue
            if x in seen:
                continue
            seen.add(x)
            stack.append((x, True))
            for c in self.kids[x]:
                if c not in seen:
                    stack.append((c, False))
        return order

    # --------------------------------------------------- plain <-> normalized

    def normalize(self, e: Plain, nary: bool = True) -> int:
        """Bottom-up normalization of a plain tree.

        With nary set, maximal chains of + and of concatenation are flattened
        and built by union_n / concat_n; otherwise every binary node is built
        by union2 / concat2.
        """
        nl = self.nl
        out: list[int] = []
        stack: list = [e]
        while stack:
            node = stack.pop()
            if node.__class__ is int:
                # a pending operator: (code, operand count) packed as code*2**32+k
                code, k = divmod(node, 1 << 32)
                if code == UNION:
                    vals = out[-k:]
                    del out[-k:]
                    out.append(self.union_n(vals) if nary else self.union2(vals[0], vals[1]))
                elif code == CONCAT:
                    vals = out[-k:]
                    del out[-k:]
                    out.append(self.concat_n(vals) if nary else self.concat2(vals[0], vals[1]))
                else:
                    out[-1] = self.star(out[-1])
                continue
            t = node[0]
            if t == ZERO:
                out.append(0)
            elif t == ONE:
                out.append(1)
            elif t == LETTER:
                x = node[1]
                if not 0 <= x < nl:
                    raise ValueError(f"letter index {x} outside the {nl}-letter alphabet")
                out.append(2 + x)
            elif t == STAR:
                stack.append((STAR << 32) | 1)
                stack.append(node[1])
            else:
                if nary:
                    ops = []
                    pending = [node]
                    while pending:
                        n = pending.pop()
                        if n[0] == t:
                            pending.append(n[2])
                            pending.append(n[1])
                        else:
                            ops.append(n)
                else:
                    ops = [node[1], node[2]]
                stack.append((t << 32) | len(ops))
                stack.extend(reversed(ops))
        return out[0]

    def parse(self, text: str, nary: bool = True) -> int:
        return self.normalize(parse(text, self.nl), nary)

    def to_plain(self, iE: int) -> Plain:
        """A plain tree for iE (unions and concatenations right-nested)."""
        memo: dict[int, Plain] = {}
        for x in self.subexpressions(iE):
            t = self.kind[x]
            if t == ZERO:
                memo[x] = (ZERO,)
            elif t == ONE:
                memo[x] = (ONE,)
            elif t == LETTER:
                memo[x] = (LETTER, x - 2)
            elif t == STAR:
                memo[x] = (STAR, memo[self.kids[x][0]])
            else:
                parts = [memo[c] for c in self.kids[x]]
                r = parts[-1]
                for p in reversed(parts[:-1]):
                    r = (t, p, r)
                memo[x] = r
        return memo[iE]

    def to_text(self, iE: int) -> str:
        """Infix text; parsing and normalizing it gives back iE."""
        kind = self.kind
        allk = self.kids
        out: list[str] = []
        stack: list = [iE]
        while stack:
            item = stack.pop()
            if item.__class__ is str:
                out.append(item)
                continue
            t = kind[item]
            if t == ZERO:
                out.append("0")
            elif t == ONE:
                out.append("1")
            elif t == LETTER:
                out.append(LETTERS[item - 2])
            elif t == UNION:
                terms = allk[item]
                for i in range(len(terms) - 1, -1, -1):
                    stack.append(terms[i])
                    if i:
                        stack.append(" + ")
            elif t == CONCAT:
                fs = self.factors(item)
                for f in reversed(fs):
                    if kind[f] == UNION:
                        stack.append(")")
                        stack.append(f)
                        stack.append("(")
                    else:
                        stack.append(f)
            else:
                c = allk[item][0]
                stack.append("*")
                if kind[c] in (UNION, CONCAT):
                    stack.append(")")
                    stack.append(c)
                    stack.append("(")
                else:
                    stack.append(c)
        return "".join(out)

    # ---------------------------------------------------------------- audit

    def audit(self) -> None:
        """Check normalized form, sizes and hash-bucket indexing of every id."""
        seen: dict = {}
        kind = self.kind
        for iE in self.ids.in_use_ids():
            t = kind[iE]
            kids = self.kids[iE]
            if iE < N_ATOMS:
                expect = ZERO if iE == 0 else ONE if iE == 1 else LETTER
                if t != expect:
                    raise StoreAuditError(f"atom {iE} has type {t}")
                key = (t, (iE,) if t == LETTER else ())
            else:
                key = (t, kids)
                for c in kids:
                    if not self.ids.in_use(c):
                        raise StoreAuditError(f"{iE} has free child {c}")
                if t == UNION:
                    ok = (len(kids) >= 2 and all(kind[c] not in (ZERO, UNION) for c in kids)
                          and all(kids[i] < kids[i + 1] for i in range(len(kids) - 1)))
                    s = sum(self.sizes[c] for c in kids) + len(kids) - 1
                elif t == CONCAT:
                    ok = (len(kids) == 2 and kids[0] > 1 and kids[1] > 1
                          and kind[kids[0]] != CONCAT)
                    s = self.sizes[kids[0]] + self.sizes[kids[1]] + 1 if len(kids) == 2 else -1
                elif t == STAR:
                    ok = len(kids) == 1 and kids[0] > 1 and kind[kids[0]] != STAR
                    s = self.sizes[kids[0]] + 1 if kids else -1
                else:
                    ok = False
                    s = -1
                if not ok:
                    raise StoreAuditError(f"{iE} is not normalized: {TYPE_NAMES[t]} {kids}")
                if s != self.sizes[iE]:
                    raise StoreAuditError(f"{iE} has cached size {self.sizes[iE]}, expected {s}")
            if key in seen:
                raise StoreAuditError(f"{iE} duplicates {seen[key]}")
            seen[key] = iE
            h = hash(key)
            if self.code[iE] != h:
                raise StoreAuditError(f"{iE} has a stale hash code")
            if iE not in self.table.iter(h & self.mask):
                raise StoreAuditError(f"{iE} missing from its hash bucket")
        total = self.table.count()
        if total != len(seen):
            raise StoreAuditError(f"{total} bucketed ids but {len(seen)} in use")
