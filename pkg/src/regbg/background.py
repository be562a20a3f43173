"""Equivalence classes of expressions and the derivative equations between them.

An equation says E = o + a.E_a + b.E_b + ... where every expression in it
is the representative of its class. Its right part (o, E_a, E_b, ...) is
interned separately so equal right parts share one identifier. Two
equations that share a left part or a right part overlap; reducing the
background merges the classes those overlaps prove equal until none is left.

Identifier spaces: iE for expressions, iEq for equations, iR for right parts.
"""

from __future__ import annotations

import random
from typing import Callable, Iterator

from .expr import N_ATOMS, ExprStore
from .idpool import NIL, MultiList, OneList, PoolUsageError, TwoLists, int_array


class InvariantViolation(RuntimeError):
    """The background was asked to merge languages that differ."""


class AuditError(AssertionError):
    pass


def _buckets_for(cap: int) -> int:
    nb = 1
    while nb < cap // 2:
        nb <<= 1
    return nb


class Background:
    def __init__(self, store: ExprStore, max_eqs: int | None = None):
        M = store.M
        cap = max_eqs or M
        nl = store.nl
        self.store = store
        self.nl = nl
        self.cap = cap
        self.tab_ie = int_array(cap)     # iEq -> left part
        self.tab_ir = int_array(cap)     # iEq -> right part id
        self.tab_tie: list = [None] * cap  # iR -> (o, E_a, E_b, ...)
        nb = _buckets_for(cap)
        self.bmask = nb - 1
        self.hash_eq = MultiList(nb, cap)
        self.hash_tie = MultiList(nb, cap)
        self.next_ir = TwoLists(cap)
        self.next_ieq = TwoLists(cap)
        self.eq_by_ie = MultiList(M, cap)                        # iE -> equations with left part iE
        self.eq_by_ir = MultiList(cap, cap)                      # iR -> equations with right part iR
        self.eq_by_ex = [MultiList(M, cap) for _ in range(nl)]   # iE -> equations with E_x = iE
        self.ie_overlaps = OneList(M)    # iE with two or more equations
        self.ir_overlaps = OneList(cap)  # iR shared by two or more equations
        self.tree = int_array(M, -1)     # union-find parent, negative at roots
        self.merge_hooks: list[Callable[[int, int], None]] = []
        self.merges = 0

    # --------------------------------------------------------------- lookup

    def find_ir(self, tab: tuple) -> int:
        x = self.hash_tie.first[hash(tab) & self.bmask]
        succ = self.hash_tie.succ
        tie = self.tab_tie
        while x != NIL:
            if tie[x] == tab:
                return x
            x = succ[x]
        return NIL

    def find_ieq(self, iE: int, iR: int) -> int:
        x = self.hash_eq.first[hash((iE, iR)) & self.bmask]
        succ = self.hash_eq.succ
        while x != NIL:
            if self.tab_ie[x] == iE and self.tab_ir[x] == iR:
                return x
            x = succ[x]
        return NIL

    def has_equation(self, iE: int) -> bool:
        return self.eq_by_ie.first[iE] != NIL

    def right_part(self, iE: int) -> tuple:
        """Right part of the (first) equation whose left part is iE."""
        q = self.eq_by_ie.first[iE]
        if q == NIL:
            raise KeyError(f"no equation for {iE}")
        return self.tab_tie[self.tab_ir[q]]

    def equations(self) -> Iterator[tuple[int, int, tuple]]:
        """(iEq, left part, right part) for every stored equation."""
        for q in self.next_ieq.in_use_ids():
            yield q, self.tab_ie[q], self.tab_tie[self.tab_ir[q]]

    def count_equations(self) -> int:
        return self.next_ieq.count_in_use()

    def is_reduced(self) -> bool:
        return self.ie_overlaps.is_empty() and self.ir_overlaps.is_empty()

    # ------------------------------------------------------- add and remove

    def add_eq(self, iE: int, tab: tuple) -> int:
        """Store iE = tab unless already present; returns the equation id."""
        assert iE >= N_ATOMS and self.tree[iE] < 0, f"left part {iE} is not a representative"
        assert all(t < N_ATOMS or self.tree[t] < 0 for t in tab[1:]), f"right part {tab} has non-representatives"
        h = hash(tab)
        iR = self.find_ir(tab)
        if iR != NIL:
            q = self.find_ieq(iE, iR)
            if q != NIL:
                return q
        else:
            iR = self.next_ir.acquire()
            self.tab_tie[iR] = tab
            self.hash_tie.add(h & self.bmask, iR)
        q = self.next_ieq.acquire()
        self.tab_ie[q] = iE
        self.tab_ir[q] = iR
        self.hash_eq.add(hash((iE, iR)) & self.bmask, q)
        self.eq_by_ie.add(iE, q)
        self.eq_by_ir.add(iR, q)
        if self.eq_by_ie.has_two(iE):
            self.ie_overlaps.add(iE)
        if self.eq_by_ir.has_two(iR):
            self.ir_overlaps.add(iR)
        for k, lst in enumerate(self.eq_by_ex, 1):
            lst.add(tab[k], q)
        return q

    def remove_eq(self, q: int) -> None:
        if not self.next_ieq.in_use(q):
            raise PoolUsageError(f"equation {q} is not in use")
        iE = self.tab_ie[q]
        iR = self.tab_ir[q]
        self.hash_eq.remove(q)
        self.eq_by_ie.remove(q)
        self.eq_by_ir.remove(q)
        for lst in self.eq_by_ex:
            lst.remove(q)
        self.next_ieq.release(q)
        self.tab_ie[q] = 0
        self.tab_ir[q] = 0
        if self.eq_by_ir.is_empty(iR):
            self.hash_tie.remove(iR)
            self.next_ir.release(iR)
            self.tab_tie[iR] = None
        if not self.eq_by_ie.has_two(iE):
            self.ie_overlaps.remove(iE)
        if not self.eq_by_ir.has_two(iR):
            self.ir_overlaps.remove(iR)

    def substitute(self, iE1: int, iE2: int) -> None:
        """Replace iE2 by iE1 everywhere in the stored equations."""
        by_ie = self.eq_by_ie
        tab_ir = self.tab_ir
        tie = self.tab_tie
        while by_ie.first[iE2] != NIL:
            q = by_ie.first[iE2]
            tab = tie[tab_ir[q]]
            self.remove_eq(q)
            self.add_eq(iE1, tab)
        for lst in self.eq_by_ex:
            while lst.first[iE2] != NIL:
                q = lst.first[iE2]
                iE = self.tab_ie[q]
                tab = tie[tab_ir[q]]
                new = (tab[0],) + tuple(iE1 if t == iE2 else t for t in tab[1:])
                self.remove_eq(q)
                self.add_eq(iE, new)

    # ------------------------------------------------------ union-find part

    def rep(self, iE: int) -> int:
        tree = self.tree
        if tree[iE] < 0:
            return iE
        r = tree[iE]
        while tree[r] >= 0:
            r = tree[r]
        while iE != r:
            nxt = tree[iE]
            tree[iE] = r
            iE = nxt
        return r

    def _merge(self, a: int, b: int) -> None:
        """Merge the classes of representatives a and b; smaller size wins."""
        if a < N_ATOMS or b < N_ATOMS:
            raise InvariantViolation(f"equations force {a} and {b} together, but atoms are never merged")
        sizes = self.store.sizes
        if sizes[b] < sizes[a] or (sizes[b] == sizes[a] and b < a):
            a, b = b, a
        self.substitute(a, b)
        self.tree[b] = a
        self.merges += 1
        for hook in self.merge_hooks:
            hook(b, a)

    def _overlap_pair(self, chooser: random.Random | None) -> tuple[int, int] | None:
        """Two representatives some overlap proves equal, or None if reduced."""
        if chooser is None:
            if not self.ie_overlaps.is_empty():
                iE = self.ie_overlaps.head()
                q1 = self.eq_by_ie.first[iE]
                q2 = self.eq_by_ie.succ[q1]
                return self._differing(q1, q2, None)
            if not self.ir_overlaps.is_empty():
                iR = self.ir_overlaps.head()
                q1 = self.eq_by_ir.first[iR]
                q2 = self.eq_by_ir.succ[q1]
                return self.tab_ie[q1], self.tab_ie[q2]
            return None
        choices = [(0, x) for x in self.ie_overlaps.iter()] + [(1, x) for x in self.ir_overlaps.iter()]
        if not choices:
            return None
        side, x = chooser.choice(choices)
        if side == 0:
            q1, q2 = chooser.sample(self.eq_by_ie.to_list(x), 2)
            return self._differing(q1, q2, chooser)
        q1, q2 = chooser.sample(self.eq_by_ir.to_list(x), 2)
        return self.tab_ie[q1], self.tab_ie[q2]

    def _differing(self, q1: int, q2: int, chooser: random.Random | None) -> tuple[int, int]:
        t1 = self.tab_tie[self.tab_ir[q1]]
        t2 = self.tab_tie[self.tab_ir[q2]]
        if t1[0] != t2[0]:
            raise InvariantViolation(
                f"equations {q1} and {q2} share left part {self.tab_ie[q1]} but disagree on the empty word")
        diffs = [(a, b) for a, b in zip(t1[1:], t2[1:]) if a != b]
        if chooser is not None:
            return chooser.choice(diffs)
        return diffs[0]

    def reduce(self, chooser: random.Random | None = None) -> None:
        """Merge classes until no two equations overlap.

        The chooser, when given, picks overlaps and differing positions at
        random instead of first-in-list; the final partition is the same.
        """
        while True:
            pair = self._overlap_pair(chooser)
            if pair is None:
                return
            a, b = pair
            self._merge(self.rep(a), self.rep(b))

    def unify(self, iE1: int, iE2: int) -> None:
        """Declare two expressions language-equal (the caller must know so)."""
        a = self.rep(iE1)
        b = self.rep(iE2)
        if a == b:
            return
        self._merge(a, b)
        self.reduce()

    def prune_equations(self, keep) -> int:
        """Remove every equation whose left part's class has no member in keep.

        Removing equations never makes the background wrong, only less
        informative. Returns the number removed.
        """
        rep = self.rep
        kept = {rep(x) for x in keep}
        doomed = [q for q, iE, _ in self.equations() if rep(iE) not in kept]
        for q in doomed:
            self.remove_eq(q)
        return len(doomed)

    def partition(self, ids) -> frozenset:
        """The classes of ids as a set of frozensets."""
        classes: dict[int, set] = {}
        for x in ids:
            classes.setdefault(self.rep(x), set()).add(x)
        return frozenset(frozenset(c) for c in classes.values())

    # ---------------------------------------------------------------- audit

    def audit(self) -> None:
        """Recompute every index from the equation tables and compare."""
        nl = self.nl
        by_ie: dict[int, set] = {}
        by_ir: dict[int, set] = {}
        by_ex: list[dict[int, set]] = [dict() for _ in range(nl)]
        used_ir = set()
        n_eq = 0
        pairs = set()
        for q in self.next_ieq.in_use_ids():
            n_eq += 1
            iE = self.tab_ie[q]
            iR = self.tab_ir[q]
            if not self.next_ir.in_use(iR):
                raise AuditError(f"equation {q} uses free right part {iR}")
            tab = self.tab_tie[iR]
            if (iE, iR) in pairs:
                raise AuditError(f"duplicate equation {q}")
            pairs.add((iE, iR))
            if iE < N_ATOMS:
                raise AuditError(f"equation {q} has atom left part {iE}")
            for e in (iE,) + tab[1:]:
                if e >= N_ATOMS and (self.tree[e] >= 0 or not self.store.in_use(e)):
                    raise AuditError(f"equation {q} mentions {e}, not a live representative")
            if tab[0] not in (0, 1) or len(tab) != nl + 1:
                raise AuditError(f"right part {iR} malformed: {tab}")
            by_ie.setdefault(iE, set()).add(q)
            by_ir.setdefault(iR, set()).add(q)
            for k in range(nl):
                by_ex[k].setdefault(tab[k + 1], set()).add(q)
            used_ir.add(iR)
            if q not in self.hash_eq.iter(hash((iE, iR)) & self.bmask):
                raise AuditError(f"equation {q} missing from its hash bucket")
        if self.hash_eq.count() != n_eq:
            raise AuditError("equation hash table holds stale ids")
        in_use_ir = set(self.next_ir.in_use_ids())
        if in_use_ir != used_ir:
            raise AuditError(f"right parts in use {sorted(in_use_ir ^ used_ir)} disagree with equations")
        for iR in used_ir:
            tab = self.tab_tie[iR]
            if iR not in self.hash_tie.iter(hash(tab) & self.bmask):
                raise AuditError(f"right part {iR} missing from its hash bucket")
        if self.hash_tie.count() != len(used_ir):
            raise AuditError("right-part hash table holds stale ids")
        self._audit_lists(self.eq_by_ie, by_ie, n_eq, "left-part lists")
        self._audit_lists(self.eq_by_ir, by_ir, n_eq, "right-part lists")
        for k in range(nl):
            self._audit_lists(self.eq_by_ex[k], by_ex[k], n_eq, f"letter {k} lists")
        want_ie = {x for x, s in by_ie.items() if len(s) >= 2}
        want_ir = {x for x, s in by_ir.items() if len(s) >= 2}
        if set(self.ie_overlaps.iter()) != want_ie:
            raise AuditError("left-part overlap worklist is wrong")
        if set(self.ir_overlaps.iter()) != want_ir:
            raise AuditError("right-part overlap worklist is wrong")
        for x in range(N_ATOMS):
            if self.tree[x] >= 0:
                raise AuditError(f"atom {x} is not its own representative")

    @staticmethod
    def _audit_lists(ml: MultiList, want: dict[int, set], total: int, what: str) -> None:
        for key, members in want.items():
            got = ml.to_list(key)
            if len(got) != len(members) or set(got) != members:
                raise AuditError(f"{what}: list {key} holds {sorted(got)}, expected {sorted(members)}")
        if ml.member.count(1) != total:
            raise AuditError(f"{what}: {ml.member.count(1)} members, expected {total}")


def gc(store: ExprStore, bg: Background | None, roots=()) -> int:
    """Free every expression not reachable from roots or from an equation.

    Representatives of surviving expressions survive too, and paths to them
    are compressed so no survivor points at a freed identifier.
    Returns the number of identifiers freed.
    """
    marked = bytearray(store.M)
    marked[:N_ATOMS] = b"\x01" * N_ATOMS
    kids = store.kids
    stack = list(roots)
    if bg is not None:
        for _, iE, tab in bg.equations():
            stack.append(iE)
            stack.extend(tab[1:])
    while True:
        while stack:
            x = stack.pop()
            if marked[x]:
                continue
            marked[x] = 1
            stack.extend(kids[x])
        if bg is None:
            break
        tree = bg.tree
        for x in store.ids.in_use_ids():
            if marked[x] and tree[x] >= 0:
                r = bg.rep(x)
                if not marked[r]:
                    stack.append(r)
        if not stack:
            break
    freed = 0
    for x in list(store.ids.in_use_ids()):
        if marked[x]:
            continue
        store.table.remove(x)
        store.ids.release(x)
        store.kids[x] = ()
        store.kind[x] = 0
        store.code[x] = 0
        store.sizes[x] = 0
        store.null[x] = 0
        if bg is not None:
            bg.tree[x] = -1
        freed += 1
    if freed:
        for memo in store.dmemo:
            dead = [k for k, v in memo.items() if not marked[k] or not marked[v]]
            for k in dead:
                del memo[k]
    return freed
