"""Command line front end.

    regbg gen --size 8K --count 10000 --seed 1 --out f.txt
    regbg normalize --in f.txt [--opt|--no-opt]
    regbg lift --in f.txt
    regbg dfa --algo M --lift --in f.txt
    regbg simplify --algo PU --in f.txt --out results.tsv
    regbg enum-minimal --size 8 --out cat.bin
    regbg snapshot-save --algo PU --in f.txt --out bg.bin
    regbg snapshot-load --in bg.bin

Tables go to stdout as TSV (or LaTeX with --latex); per-expression streams
go to --out. Every input file is processed by its own store and background,
which is what lets --jobs spread files over processes.

Exit codes: 0 success, 1 usage, 2 I/O or bad snapshot, 3 identifiers
exhausted beyond recovery, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import plain
from .background import AuditError, Background, InvariantViolation, gc
from .catalogue import (Catalogue, catalogue_from_entries, enumerate_minimal,
                        preload_catalogue, save_catalogue)
from .deriv import DfaStats, build_dfa_b, build_dfa_e, derivative_row_fn
from .dfa import bg_row_fn, equiv_classes, minimize, reachable
from .expr import DEFAULT_MAX_IDS, N_ATOMS, ExprStore, StoreAuditError
from .gen import ExprGenerator
from .idpool import IdentifiersExhausted
from .report import bucket_label, bucket_of, geo_mean, pct, render
from .simplify import ALGORITHMS, DEFAULT_ROW_LIMIT, Exhausted, Workbench, config_for
from .snapshot import SnapshotError, load_file, save_file

EXIT_USAGE, EXIT_IO, EXIT_EXHAUSTED, EXIT_INVARIANT = 1, 2, 3, 4
DFA_ALGORITHMS = ("E", "B", "O", "M")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def parse_size(text: str) -> int:
    """'8K' -> 8192; plain integers pass through."""
    t = text.strip().upper()
    try:
        if t.endswith("K"):
            return int(t[:-1]) * 1024
        return int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size {text!r}") from None


# ------------------------------------------------------------ input files

@dataclass
class ReadResult:
    items: list = field(default_factory=list)    # (line number, plain tree)
    errors: list = field(default_factory=list)   # (line number, message)
    t_read: float = 0.0
    t_parse: float = 0.0


def read_expressions(path: str, nl: int) -> ReadResult:
    out = ReadResult()
    t0 = time.perf_counter()
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    out.t_read = time.perf_counter() - t0
    t0 = time.perf_counter()
    for no, line in enumerate(lines, 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            out.items.append((no, plain.parse(text, nl)))
        except (plain.ParseError, ValueError) as exc:
            out.errors.append((no, str(exc)))
    out.t_parse = time.perf_counter() - t0
    return out


def _report_errors(path: str, errors: list) -> None:
    for no, msg in errors:
        print(f"{path}:{no}: {msg}", file=sys.stderr)


def _us(seconds: float, n: int) -> float:
    return 1e6 * seconds / n if n else 0.0


def _map_files(fn, paths: list, args) -> list:
    """fn(path, args) for every file, in order, over --jobs processes."""
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            return list(pool.map(fn, paths, [args] * len(paths)))
    return [fn(p, args) for p in paths]


# -------------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    g = ExprGenerator(args.nl, args.size, args.seed, with_one=args.with_one)
    lines = [plain.to_text(g.generate(args.size)) for _ in range(args.count)]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ------------------------------------------------------- normalize / lift

NORMALIZE_HEADER = ("file", "n", "errors", "size", "t_r", "t_T", "t_N", "|sub|", "#iE",
                    "#empty", "#nempty", "#iter", "#dejaVu", "out/in")


def _normalize_file(path: str, args) -> dict:
    rd = read_expressions(path, args.nl)
    store = ExprStore(args.nl, args.max_ids)
    outs = []
    in_size = out_size = 0
    t0 = time.perf_counter()
    for _, e in rd.items:
        if args.command == "lift":
            e = plain.lift(e)
        iE = store.normalize(e, args.opt)
        outs.append(iE)
    t_norm = time.perf_counter() - t0
    for (_, e), iE in zip(rd.items, outs):
        in_size += plain.size(e)
        out_size += store.sizes[iE]
    non_atoms = [x for x in store.ids.in_use_ids() if x >= N_ATOMS]
    sub = sum(len(store.kids[x]) for x in non_atoms) / len(non_atoms) if non_atoms else 0.0
    n = len(rd.items)
    sizes = {plain.size(e) for _, e in rd.items}
    row = (os.path.basename(path), n, len(rd.errors),
           sizes.pop() if len(sizes) == 1 else "mixed",
           _us(rd.t_read, n), _us(rd.t_parse, n), _us(t_norm, n), sub,
           store.count_in_use(), store.n_empty, store.n_nempty, store.n_iter,
           store.n_dejavu, pct(out_size, in_size))
    stream = [f"{no}\t{store.to_text(iE)}" for (no, _), iE in zip(rd.items, outs)]
    return {"row": row, "stream": stream, "errors": rd.errors, "path": path}


# -------------------------------------------------------------------- dfa

DFA_HEADER = ("file", "algo", "n", "#D", "#C", "#Eq", "Max", "ma", "vu", "skipped")


def _dfa_file(path: str, args) -> dict:
    rd = read_expressions(path, args.nl)
    algo = args.algo
    store = ExprStore(args.nl, args.max_ids)
    bg = Background(store) if algo != "E" else None
    seen: set[int] = set()
    tot_d = tot_c = tot_eq = maxi = minimal = vu = 0
    skipped: list[int] = []
    items = rd.items

    def one(e) -> tuple[int, int, int, bool] | None:
        if args.lift:
            e = plain.lift(e)
        root = store.normalize(e)
        if root in seen:
            return None
        seen.add(root)
        if root < N_ATOMS:
            return 0, 0, 0, True
        ds = DfaStats()
        if algo == "E":
            rows = build_dfa_e(store, root, ds)
            n_min = sum(1 for blk in equiv_classes(derivative_row_fn(store), [root])
                        if all(x >= N_ATOMS for x in blk))
            return len(rows), 0, len(rows), len(rows) == n_min
        r = build_dfa_b(bg, root, check_seen=algo in ("O", "M"), stats=ds)
        row = bg_row_fn(bg)
        n_eq = sum(1 for s in reachable(row, [r]) if s >= N_ATOMS)
        if algo == "M":
            n_min = len(minimize(bg, r))
            return ds.derived, ds.skipped, n_min, n_eq == n_min
        n_min = sum(1 for blk in equiv_classes(row, [r]) if all(x >= N_ATOMS for x in blk))
        return ds.derived, ds.skipped, n_eq, n_eq == n_min

    for no, e in items:
        res = None
        for attempt in range(2):
            try:
                res = one(e)
                break
            except IdentifiersExhausted:
                # keep only the roots read so far and the equations
                seen_alive = [x for x in seen if store.in_use(x)]
                if gc(store, bg, seen_alive) == 0:
                    raise Exhausted("identifiers exhausted and nothing could be collected")
                seen = {x for x in seen if store.in_use(x)}
                store.dmemo = [dict() for _ in range(store.nl)]
        else:
            skipped.append(no)
            continue
        if res is None:
            vu += 1
            continue
        d, c, eq, is_min = res
        tot_d += d
        tot_c += c
        tot_eq += eq
        maxi = max(maxi, eq)
        minimal += is_min
    n = len(items)
    done = n - vu - len(skipped)
    row = (os.path.basename(path), algo, n, tot_d / n if n else 0.0, tot_c / n if n else 0.0,
           tot_eq / done if done else 0.0, maxi, pct(minimal, done), pct(vu, n), len(skipped))
    return {"row": row, "stream": [], "errors": rd.errors, "path": path,
            "skipped": skipped}


# --------------------------------------------------------------- simplify

SIMPLIFY_HEADER = ("file", "algo", "n", "size", "ssize_arith", "ssize_geo", "out/in",
                   "#univ", "#min", "#pmin", "skipped", "t_us")


def _workbench(args, algo: str) -> Workbench:
    cfg = config_for(algo, args.nl, args.bound if args.bound is not None else -1,
                     nary=args.opt, row_limit=args.row_limit or None)
    wb = Workbench(cfg, args.nl, args.max_ids)
    if cfg.preload:
        if not args.catalogue:
            raise UsageError(f"algorithm {algo} needs --catalogue")
        preload_catalogue(wb, args.catalogue)
    return wb


def _run_pass(wb: Workbench, items: list) -> list:
    """(line number, output plain tree or None) for every input."""
    out = []
    store = wb.store
    for no, e in items:
        r = wb.run(e, no)
        out.append((no, None if r is None else store.to_plain(r)))
    return out


def _simplify_file(path: str, args) -> dict:
    rd = read_expressions(path, args.nl)
    algo = args.algo
    items = rd.items
    t0 = time.perf_counter()
    if algo in ("N", "L"):
        store = ExprStore(args.nl, args.max_ids)
        outs = []
        for no, e in items:
            if algo == "L":
                e = plain.lift(e)
            outs.append((no, store.to_plain(store.normalize(e, args.opt))))
        wb = None
    else:
        wb = _workbench(args, algo)
        outs = _run_pass(wb, items)
        if algo in ("RI", "PUI"):
            wb.start_second_pass()
            again = _run_pass(wb, [(no, o) for no, o in outs if o is not None])
            final = dict(again)
            outs = [(no, final.get(no) if o is not None else None) for no, o in outs]
    elapsed = time.perf_counter() - t0

    # minimality: R proves it up to the catalogue size; other algorithms
    # are compared against an R run when a catalogue is given
    judge = None
    if wb is not None and wb.cfg.preload:
        judge = wb
    elif args.catalogue:
        judge = _workbench(args, "R")

    universal = plain.to_text(plain.universal((1 << args.nl) - 1))
    stream = []
    sizes_out = []
    buckets_expr: dict[int, int] = {}
    buckets_diff: dict[int, int] = {}
    n_univ = n_min = n_pmin = 0
    in_total = out_total = 0
    for (no, e), (_, o) in zip(items, outs):
        in_size = plain.size(e)
        if o is None:
            stream.append(f"{no}\t{in_size}\t-\t-\t-")
            continue
        text = plain.to_text(o)
        out_size = plain.size(o)
        sizes_out.append(out_size)
        in_total += in_size
        out_total += out_size
        if text == universal:
            n_univ += 1
        flag = "-"
        if judge is not None:
            try:
                r = judge.run(o, no)
            except Exhausted:
                r = None
            if r is not None:
                r_size = judge.store.sizes[r]
                if r_size < out_size:
                    flag = "0"
                elif judge.is_minimal(r):
                    flag = "1"
        n_min += flag == "1"
        n_pmin += flag != "0"
        k = bucket_of(out_size)
        buckets_expr[k] = buckets_expr.get(k, 0) + 1
        if flag == "0":
            buckets_diff[k] = buckets_diff.get(k, 0) + 1
        stream.append(f"{no}\t{in_size}\t{out_size}\t{text}\t{flag}")
    n = len(items)
    sizes_in = {plain.size(e) for _, e in items}
    done = len(sizes_out)
    skipped = [no for no, o in outs if o is None]
    row = (os.path.basename(path), algo, n, sizes_in.pop() if len(sizes_in) == 1 else "mixed",
           sum(sizes_out) / done if done else 0.0, geo_mean(sizes_out),
           pct(out_total, in_total), n_univ,
           n_min if judge is not None else "-", n_pmin if judge is not None else "-",
           len(skipped), _us(elapsed, n))
    return {"row": row, "stream": stream, "errors": rd.errors, "path": path,
            "buckets": (buckets_expr, buckets_diff), "skipped": skipped}


def _distribution(results: list, latex: bool) -> str:
    top = max((k for r in results for k in r["buckets"][0]), default=0)
    header = ("file", "row") + tuple(bucket_label(k) for k in range(top + 1))
    rows = []
    for r in results:
        be, bd = r["buckets"]
        name = os.path.basename(r["path"])
        rows.append((name, "#expr") + tuple(be.get(k, 0) for k in range(top + 1)))
        rows.append((name, "#diff") + tuple(bd.get(k, 0) for k in range(top + 1)))
    return render(header, rows, latex)


# ----------------------------------------------------------- enum-minimal

def cmd_enum_minimal(args) -> int:
    store = ExprStore(args.nl, args.max_ids)
    bg = Background(store)
    start = None
    if args.catalogue:
        info = load_file(args.catalogue, store, bg)
        start = catalogue_from_entries(store, bg, info["entries"])
        start.added = 0
    t0 = time.perf_counter()
    cat = enumerate_minimal(store, bg, args.size, start)
    elapsed = time.perf_counter() - t0
    if args.out:
        save_catalogue(args.out, store, bg, cat)
    counts = cat.counts()
    cum = cat.cumulative()
    rows = [(s, counts[s], cum[s]) for s in range(len(counts))]
    sys.stdout.write(render(("size", "#lang", "#lang<=size"), rows, args.latex))
    print(f"# tested {cat.tested} candidates, added {cat.added} entries in {elapsed:.1f}s",
          file=sys.stderr)
    return 0


# -------------------------------------------------------------- snapshots

def cmd_snapshot_save(args) -> int:
    if not args.out:
        raise UsageError("snapshot-save needs --out")
    algo = args.algo or "PU"
    if algo not in ALGORITHMS or algo in ("N", "L"):
        raise UsageError(f"snapshot-save needs a background algorithm, not {algo}")
    wb = _workbench(args, algo)
    n_err = 0
    for path in args.inputs:
        rd = read_expressions(path, args.nl)
        _report_errors(path, rd.errors)
        n_err += len(rd.errors)
        _run_pass(wb, rd.items)
    counts = save_file(args.out, wb.store, wb.bg, wb.gc_roots())
    rows = [(k, v) for k, v in counts.items()]
    sys.stdout.write(render(("section", "count"), rows, args.latex))
    if n_err:
        print(f"# {n_err} lines could not be parsed", file=sys.stderr)
    return 0


def cmd_snapshot_load(args) -> int:
    store = ExprStore(args.nl, args.max_ids)
    bg = Background(store)
    rows = []
    for path in args.inputs:
        info = load_file(path, store, bg)
        store.audit()
        bg.audit()
        rows.append((os.path.basename(path), info["expressions"], info["classes"],
                     info["equations"], len(info["entries"]), store.count_in_use(),
                     bg.count_equations()))
    header = ("file", "expressions", "classes", "equations", "entries", "#iE", "#Eq")
    sys.stdout.write(render(header, rows, args.latex))
    return 0


# ------------------------------------------------------------------ main

def _file_command(args, fn, header) -> int:
    if not args.inputs:
        raise UsageError(f"{args.command} needs at least one --in file")
    results = _map_files(fn, args.inputs, args)
    n_err = 0
    for r in results:
        _report_errors(r["path"], r["errors"])
        n_err += len(r["errors"])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for r in results:
                for line in r["stream"]:
                    fh.write(line + "\n")
    sys.stdout.write(render(header, [r["row"] for r in results], args.latex))
    if args.command == "simplify":
        sys.stdout.write(_distribution(results, args.latex))
    skipped = sum(len(r.get("skipped", ())) for r in results)
    if n_err or skipped:
        print(f"# {n_err} lines could not be parsed, {skipped} expressions skipped",
              file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="regbg", description="Normalized regular expressions with a background of equations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--nl", type=int, default=2, help="number of letters (1..26)")
        sp.add_argument("--max-ids", type=int, default=DEFAULT_MAX_IDS, help="identifier capacity M")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--in", dest="inputs", action="append", default=[], help="input file (repeatable)")
        sp.add_argument("--out", help="output file")
        sp.add_argument("--latex", action="store_true", help="LaTeX array rows instead of TSV")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes, one file each")
        sp.add_argument("--opt", action=argparse.BooleanOptionalAction, default=True,
                        help="n-ary union/concatenation during normalization")
        return sp

    sp = common(sub.add_parser("gen", help="random expressions of one size"))
    sp.add_argument("--size", type=parse_size, required=True)
    sp.add_argument("--count", type=int, default=10000)
    sp.add_argument("--with-one", action="store_true", help="allow 1 as a leaf")

    common(sub.add_parser("normalize", help="normalization statistics"))
    common(sub.add_parser("lift", help="lifting + normalization statistics"))

    sp = common(sub.add_parser("dfa", help="DFA construction statistics"))
    sp.add_argument("--algo", choices=DFA_ALGORITHMS, default="M")
    sp.add_argument("--lift", action="store_true")

    for name, helptext in (("simplify", "simplify expressions"),
                           ("snapshot-save", "run a pipeline and save its background")):
        sp = common(sub.add_parser(name, help=helptext))
        sp.add_argument("--algo", choices=ALGORITHMS, default=None if name == "snapshot-save" else "PU")
        sp.add_argument("--catalogue", help="catalogue snapshot (algorithms R, RI; minimality flags)")
        sp.add_argument("--bound", type=int, default=None,
                        help="largest subexpression size given a DFA (default: none for nl<=2, 512 above)")
        sp.add_argument("--row-limit", type=int, default=DEFAULT_ROW_LIMIT,
                        help=f"derivative rows allowed per subexpression DFA, 0 for none (default {DEFAULT_ROW_LIMIT})")

    sp = common(sub.add_parser("enum-minimal", help="catalogue of minimal expressions"))
    sp.add_argument("--size", type=parse_size, required=True, help="largest minimal size")
    sp.add_argument("--catalogue", help="catalogue to extend")

    common(sub.add_parser("snapshot-load", help="load, audit and count snapshots"))
    return p


def _dispatch(args) -> int:
    if not 1 <= args.nl <= 26:
        raise UsageError("--nl must be in 1..26")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    c = args.command
    if c == "gen":
        return cmd_gen(args)
    if c in ("normalize", "lift"):
        return _file_command(args, _normalize_file, NORMALIZE_HEADER)
    if c == "dfa":
        return _file_command(args, _dfa_file, DFA_HEADER)
    if c == "simplify":
        if args.algo in ("R", "RI") and not args.catalogue:
            raise UsageError(f"algorithm {args.algo} needs --catalogue")
        return _file_command(args, _simplify_file, SIMPLIFY_HEADER)
    if c == "enum-minimal":
        return cmd_enum_minimal(args)
    if c == "snapshot-save":
        if not args.inputs:
            raise UsageError("snapshot-save needs at least one --in file")
        return cmd_snapshot_save(args)
    if not args.inputs:
        raise UsageError("snapshot-load needs at least one --in file")
    return cmd_snapshot_load(args)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, SnapshotError) as exc:
        print(f"regbg: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exhausted as exc:
        print(f"regbg: {exc}; raise --max-ids", file=sys.stderr)
        return EXIT_EXHAUSTED
    except IdentifiersExhausted as exc:
        print(f"regbg: identifiers exhausted ({exc}); raise --max-ids", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (InvariantViolation, AuditError, StoreAuditError) as exc:
        print(f"regbg: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
