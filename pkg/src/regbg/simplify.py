"""Simplification pipelines driven by the background.

Every subexpression of an input is visited children first. Depending on the
algorithm, a visit (1) rebuilds the expression over its children's
representatives and unifies the two, (2) builds and minimizes its DFA in the
background, and (3) unifies each minimal-DFA state with an equivalent
state already known to the global index. The result is the representative
of the root, the smallest expression of its class.

    N    normalize only             M    step 2
    L    lift + normalize           P    steps 1, 2
                                    U    steps 2, 3
    PU   steps 1, 2, 3              R    PU over a preloaded catalogue
    PUI, RI   a second PU/R pass over the outputs of the first
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .background import Background, gc
from .deriv import DerivationLimit, DfaStats, build_dfa_b
from .dfa import GlobalIndex, minimize, unify_into_global
from .expr import N_ATOMS, ExprStore
from .idpool import IdentifiersExhausted
from .plain import CONCAT, STAR, UNION, Plain, lift

ALGORITHMS = ("N", "L", "M", "P", "U", "PU", "R", "RI", "PUI")
DEFAULT_BOUND = 512
# derivative rows allowed for one subexpression's DFA; a few inputs in a
# thousand need more, and past this they dominate the run time
DEFAULT_ROW_LIMIT = 30_000


class Exhausted(RuntimeError):
    """Identifiers ran out and garbage collection freed nothing."""


@dataclass
class PipelineConfig:
    lift: bool = True
    minimize: bool = True        # step 2
    propagate: bool = False      # step 1
    unify: bool = False          # step 3
    preload: bool = False        # R: needs a catalogue
    iterate: bool = False        # second pass over the outputs
    mdfa_bound: int | None = None
    row_limit: int | None = DEFAULT_ROW_LIMIT
    nary: bool = True

    @property
    def uses_background(self) -> bool:
        return self.minimize


def config_for(algo: str, nl: int = 2, mdfa_bound: int | None = -1, nary: bool = True,
               row_limit: int | None = DEFAULT_ROW_LIMIT) -> PipelineConfig:
    """The configuration of a named algorithm.

    mdfa_bound = -1 picks the default: no bound for two letters, 512 above.
    row_limit None lets a single DFA construction grow without limit.
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {', '.join(ALGORITHMS)}")
    if mdfa_bound == -1:
        mdfa_bound = None if nl <= 2 else DEFAULT_BOUND
    if algo in ("N", "L"):
        return PipelineConfig(lift=algo == "L", minimize=False, nary=nary)
    base = algo.rstrip("I") if algo in ("RI", "PUI") else algo
    return PipelineConfig(
        lift=True,
        minimize=True,
        propagate=base in ("P", "PU", "R"),
        unify=base in ("U", "PU", "R"),
        preload=base == "R",
        iterate=algo in ("RI", "PUI"),
        mdfa_bound=mdfa_bound,
        row_limit=row_limit,
        nary=nary,
    )


def propagate(store: ExprStore, bg: Background, iE: int) -> int:
    """iE rebuilt with every direct child replaced by its representative."""
    t = store.kind[iE]
    kids = store.kids[iE]
    rep = bg.rep
    if t == UNION:
        reps = [rep(c) for c in kids]
        if reps == list(kids):
            return iE
        return store.union_n(reps)
    if t == CONCAT:
        l, r = kids
        rl, rr = rep(l), rep(r)
        if rl == l and rr == r:
            return iE
        return store.concat2(rl, rr)
    if t == STAR:
        c = kids[0]
        rc = rep(c)
        return iE if rc == c else store.star(rc)
    return iE


class DepGraph:
    """Children-first scheduling of the subexpressions of one root.

    An expression becomes ready when all its direct non-atom children are
    processed; ready expressions are taken last-in first-out. The processed
    set is shared across roots, so nothing is visited twice in a run.
    """

    def __init__(self, store: ExprStore, processed: set):
        self.store = store
        self.processed = processed
        self.counter: dict[int, int] = {}
        self.parents: dict[int, list[int]] = {}
        self.ready: list[int] = []

    def add_root(self, root: int) -> None:
        processed = self.processed
        counter = self.counter
        kids = self.store.kids
        for x in self.store.subexpressions(root):
            if x < N_ATOMS or x in processed or x in counter:
                continue
            pending = {c for c in kids[x] if c >= N_ATOMS and c not in processed}
            counter[x] = len(pending)
            for c in pending:
                self.parents.setdefault(c, []).append(x)
            if not pending:
                self.ready.append(x)

    def pop(self) -> int | None:
        return self.ready.pop() if self.ready else None

    def done(self, x: int) -> None:
        self.processed.add(x)
        del self.counter[x]
        for p in self.parents.pop(x, ()):
            self.counter[p] -= 1
            if self.counter[p] == 0:
                self.ready.append(p)

    def pending(self) -> int:
        return len(self.counter)


@dataclass
class RunStats:
    expressions: int = 0
    visited: int = 0          # subexpressions processed
    derived: int = 0          # derivative rows computed
    skipped_dfa: int = 0      # states that already had an equation
    over_bound: int = 0       # subexpressions too large for step 2
    over_limit: int = 0       # subexpressions whose DFA hit the row limit
    pruned: int = 0           # equations dropped by collections
    gc_runs: int = 0
    gc_freed: int = 0
    skipped: list = field(default_factory=list)   # inputs abandoned after GC


class Workbench:
    """One store, its background and global index, and a configuration."""

    def __init__(self, cfg: PipelineConfig, nl: int = 2, max_ids: int | None = None,
                 store: ExprStore | None = None):
        if store is None:
            store = ExprStore(nl, max_ids) if max_ids else ExprStore(nl)
        self.store = store
        self.cfg = cfg
        self.bg = Background(store) if cfg.uses_background else None
        self.index = GlobalIndex(self.bg) if self.bg is not None else None
        self.processed: set[int] = set()
        self.capped: set[int] = set()      # visited ids whose DFA hit the row limit
        self.catalogue_entries: list[int] = []
        self.catalogue_max: int | None = None
        self.stats = RunStats()
        self._dfa_stats = DfaStats()

    # ----------------------------------------------------------- one input

    def simplify(self, e: Plain) -> int:
        """Simplified id of a plain expression (no GC handling)."""
        cfg = self.cfg
        store = self.store
        if cfg.lift:
            e = lift(e)
        root = store.normalize(e, cfg.nary)
        if not cfg.minimize:
            return root
        bg = self.bg
        graph = DepGraph(store, self.processed)
        graph.add_root(root)
        while True:
            x = graph.pop()
            if x is None:
                break
            self._visit(x)
            graph.done(x)
        assert graph.pending() == 0, "dependency graph left unprocessed expressions"
        return bg.rep(root)

    def _visit(self, x: int) -> None:
        cfg = self.cfg
        store = self.store
        bg = self.bg
        self.stats.visited += 1
        if cfg.propagate:
            y = propagate(store, bg, x)
            if y != x:
                bg.unify(x, y)
        r = bg.rep(x)
        if r < N_ATOMS:
            return
        capped = self.capped
        if capped and any(c in capped for c in store.kids[x]):
            # its derivatives would run into the same unfinished DFA
            capped.add(x)
            self.stats.over_limit += 1
            return
        if cfg.mdfa_bound is not None and store.sizes[r] > cfg.mdfa_bound:
            self.stats.over_bound += 1
            return
        ds = self._dfa_stats
        try:
            build_dfa_b(bg, r, check_seen=True, stats=ds, through_equations=True,
                        max_rows=cfg.row_limit)
        except DerivationLimit:
            # the partial equations are true, so they stay; r is left as is
            self.capped.add(x)
            self.stats.over_limit += 1
            return
        finally:
            self.stats.derived = ds.derived
            self.stats.skipped_dfa = ds.skipped
        m = minimize(bg, r)
        if cfg.unify:
            unify_into_global(bg, self.index, m)

    # ---------------------------------------------------- with GC recovery

    def run(self, e: Plain, tag=None) -> int | None:
        """simplify with the recovery protocol.

        On identifier exhaustion, collect garbage and restart the input once;
        if it runs out again the input is skipped (recorded, None returned).
        Raises Exhausted when a collection frees nothing.
        """
        self.stats.expressions += 1
        for attempt in range(2):
            try:
                return self.simplify(e)
            except IdentifiersExhausted:
                if self.collect() == 0:
                    raise Exhausted("identifiers exhausted and nothing could be collected") from None
        self.stats.skipped.append(tag)
        return None

    def gc_roots(self) -> list[int]:
        roots = list(self.catalogue_entries)
        if self.index is not None:
            roots.extend(self.index.entries())
        return roots

    def collect(self, extra_roots=()) -> int:
        """Free identifiers, keeping the catalogue and the global MDFA.

        Equations outside the global MDFA are dropped first, so the
        background keeps only what later inputs can reuse directly.
        """
        roots = self.gc_roots() + list(extra_roots)
        if self.bg is not None:
            self.stats.pruned += self.bg.prune_equations(roots)
        freed = gc(self.store, self.bg, roots)
        if freed:
            in_use = self.store.in_use
            self.processed = {x for x in self.processed if in_use(x)}
            self.capped = {x for x in self.capped if in_use(x)}
        self.stats.gc_runs += 1
        self.stats.gc_freed += freed
        return freed

    def start_second_pass(self) -> None:
        """Forget which expressions were processed (RI/PUI second pass)."""
        self.processed = set()

    def is_minimal(self, out: int) -> bool | None:
        """True when the catalogue proves out minimal, None when unknown.

        A catalogue complete up to size s holds a minimal expression of every
        language of minimal size <= s, so R returns exactly that expression
        whenever its language has one; any output of size <= s is therefore
        minimal. Larger outputs are undecided.
        """
        if self.catalogue_max is None:
            return None
        if self.store.sizes[out] <= self.catalogue_max:
            return True
        return None
