"""Reference models and corpus builders shared by the tests."""

import random

from regbg.background import Background
from regbg.deriv import derivative_row_fn
from regbg.dfa import equivalent_rows
from regbg.expr import ExprStore
from regbg.idpool import MultiList
from regbg.plain import CONCAT, LETTER, ONE_E, STAR, UNION, ZERO_E
from regbg.semantics import lang_up_to


def multilist_model_check(n_ops: int, n: int = 8, m: int = 256, seed: int = 0) -> int:
    """Random add/remove/contains/iter on a MultiList against a list-of-lists model.

    Returns the number of discrepancies.
    """
    rng = random.Random(seed)
    ml = MultiList(n, m)
    model = [[] for _ in range(n)]
    where = {}
    bad = 0
    for _ in range(n_ops):
        op = rng.randrange(4)
        v = rng.randrange(m)
        if op == 0:
            i = rng.randrange(n)
            got = ml.add(i, v)
            want = v not in where
            if want:
                model[i].insert(0, v)
                where[v] = i
            bad += got != want
        elif op == 1:
            got = ml.remove(v)
            want = v in where
            if want:
                model[where.pop(v)].remove(v)
            bad += got != want
        elif op == 2:
            bad += ml.contains(v) != (v in where)
        else:
            i = rng.randrange(n)
            bad += ml.to_list(i) != model[i]
    # the lists plus the non-members cover [0, m) exactly once
    members = [v for i in range(n) for v in ml.to_list(i)]
    bad += len(members) != len(set(members))
    bad += set(members) != set(where)
    bad += any((ml.pred[v], ml.succ[v]) != (0, 0) for v in range(m) if v not in where)
    return bad


def plain_of_size(s: int, nl: int) -> list:
    """Every plain tree of exactly size s (0 and 1 cost nothing, the rest 1)."""
    by = [[ZERO_E, ONE_E]]
    for k in range(1, s + 1):
        out = [(LETTER, x) for x in range(nl)] if k == 1 else []
        out += [(STAR, c) for c in by[k - 1]]
        for k1 in range(k):
            for a in by[k1]:
                for b in by[k - 1 - k1]:
                    out.append((UNION, a, b))
                    out.append((CONCAT, a, b))
        by.append(out)
    return by[s]


def brute_force_language_counts(nl: int, max_size: int, max_ids: int = 400_000) -> list:
    """Languages first reached at each size, by exhaustive enumeration.

    Every plain tree up to max_size is normalized; ids are grouped into
    languages with a product walk over syntactic derivatives (exact, no
    background involved).
    """
    store = ExprStore(nl, max_ids)
    row = derivative_row_fn(store)
    classes = {}      # truncated language -> list of class representatives
    counts = []
    for s in range(max_size + 1):
        new = 0
        seen_ids = set()
        for e in plain_of_size(s, nl):
            iE = store.normalize(e)
            if iE in seen_ids:
                continue
            seen_ids.add(iE)
            key = lang_up_to(store, iE, 4)
            bucket = classes.setdefault(key, [])
            if any(equivalent_rows(row, y, row, iE) for y in bucket):
                continue
            bucket.append(iE)
            new += 1
        counts.append(new)
    return counts


class SyntheticBackground:
    """A replayable script of equations over two worlds of plain ids.

    World 0 left parts have o = 0 and world 1 left parts o = 1, and targets
    stay inside their world, so every merge that reduce can force is
    between members of one world and never trips the empty-word check.
    Languages are fictitious; only the index structures matter.
    """

    def __init__(self, seed: int, per_world: int = 8, n_eqs: int = 10, overlaps: int = 3):
        rng = random.Random(seed)
        self.seed = seed
        self.worlds = [list(range(i * per_world, (i + 1) * per_world)) for i in range(2)]
        self.script = []
        for _ in range(n_eqs):
            self.script.append(self._random_eq(rng))
        # forced overlaps: reuse a left part or a right part of an earlier equation
        for k in range(overlaps):
            w, left, targets = rng.choice(self.script)
            if k % 2 == 0:
                fresh = tuple(rng.choice(self.worlds[w]) for _ in targets)
                while fresh == targets:
                    fresh = tuple(rng.choice(self.worlds[w]) for _ in targets)
                self.script.append((w, left, fresh))
            else:
                other = [x for x in self.worlds[w] if x != left]
                self.script.append((w, rng.choice(other), targets))

    def _random_eq(self, rng: random.Random) -> tuple:
        w = rng.randrange(2)
        ids = self.worlds[w]
        return w, rng.choice(ids), (rng.choice(ids), rng.choice(ids))

    def build(self) -> tuple:
        """Fresh store and unreduced background holding the script; returns (bg, ids)."""
        store = ExprStore(2, 2_000)
        n = sum(len(w) for w in self.worlds)
        ids = [store.concat_n([2] * (k + 2)) for k in range(n)]
        bg = Background(store)
        for w, left, targets in self.script:
            bg.add_eq(ids[left], (w,) + tuple(ids[t] for t in targets))
        return bg, ids

    def overlap_count(self, bg: Background) -> int:
        by_left = {}
        by_right = {}
        for q, iE, tab in bg.equations():
            by_left.setdefault(iE, []).append(q)
            by_right.setdefault(tab, []).append(q)
        return (sum(len(v) - 1 for v in by_left.values() if len(v) > 1)
                + sum(len(v) - 1 for v in by_right.values() if len(v) > 1))


def random_background_ops(n_ops: int, seed: int = 0, pool_size: int = 2000) -> Background:
    """Random addEq / removeEq / unify / reduce over true derivative equations.

    addEq stores the syntactic derivative row of a random pooled expression
    (rewritten through rep), so every equation is true and reduce only ever
    merges equal languages. unify is applied to pairs proven equal by a
    product walk over syntactic derivatives.
    """
    from regbg.deriv import derivative
    from regbg.expr import N_ATOMS
    from regbg.gen import ExprGenerator

    rng = random.Random(seed)
    store = ExprStore(2, 200_000)
    gen = ExprGenerator(2, 10, seed)
    row = derivative_row_fn(store)
    pool = [store.normalize(gen.generate(rng.randint(3, 10))) for _ in range(pool_size // 2)]
    pool = [x for x in pool if x >= N_ATOMS]
    by_key = {}
    for x in pool:
        by_key.setdefault(lang_up_to(store, x, 4), []).append(x)
    bg = Background(store)
    rep = bg.rep
    for _ in range(n_ops):
        op = rng.random()
        if op < 0.7:
            r = rep(rng.choice(pool))
            nxt = tuple(derivative(store, r, x) for x in range(2))
            bg.add_eq(r, (store.null[r],) + tuple(rep(t) for t in nxt))
            for t in nxt:
                if t >= N_ATOMS and len(pool) < pool_size:
                    pool.append(t)
                    by_key.setdefault(lang_up_to(store, t, 4), []).append(t)
        elif op < 0.8:
            qs = list(bg.next_ieq.in_use_ids())
            if qs:
                bg.remove_eq(rng.choice(qs))
        elif op < 0.95:
            group = by_key[lang_up_to(store, rng.choice(pool), 4)]
            a, b = rng.choice(group), rng.choice(group)
            if equivalent_rows(row, a, row, b):
                bg.unify(a, b)
        else:
            bg.reduce()
    return bg
