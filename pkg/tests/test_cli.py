import pytest

from regbg import plain
from regbg.background import Background
from regbg.cli import DFA_HEADER, NORMALIZE_HEADER, SIMPLIFY_HEADER, main, parse_size
from regbg.expr import ExprStore
from regbg.gen import node_count
from regbg.snapshot import save_file

SMALL = ["--max-ids", "200000"]


def table(text):
    """First TSV table of a command's stdout as a list of dicts."""
    lines = text.strip("\n").split("\n")
    header = lines[0].split("\t")
    rows = []
    for line in lines[1:]:
        cells = line.split("\t")
        if len(cells) != len(header):
            break
        rows.append(dict(zip(header, cells)))
    return header, rows


@pytest.fixture
def corpus(tmp_path, capsys):
    path = tmp_path / "in.txt"
    assert main(["gen", "--size", "24", "--count", "60", "--seed", "3", "--out", str(path)]) == 0
    return path


def test_parse_size():
    assert parse_size("8K") == 8192
    assert parse_size("16") == 16


def test_gen_is_deterministic_and_exact(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert main(["gen", "--size", "8", "--count", "3", "--seed", "1", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert len(lines) == 3
    assert all(plain.size(plain.parse(x, 2)) == 8 for x in lines)
    c = tmp_path / "c.txt"
    main(["gen", "--size", "8", "--count", "3", "--seed", "2", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_gen_to_stdout(capsys):
    assert main(["gen", "--size", "5", "--count", "4", "--with-one"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    # 1 leaves carry no letter-or-operator size, but count as generator nodes
    assert all(node_count(plain.parse(x, 2)) == 5 for x in lines)


def test_normalize_table_and_stream(corpus, tmp_path, capsys):
    out = tmp_path / "norm.txt"
    assert main(["normalize", "--in", str(corpus), "--out", str(out)] + SMALL) == 0
    header, rows = table(capsys.readouterr().out)
    assert tuple(header) == NORMALIZE_HEADER
    (row,) = rows
    assert row["n"] == "60" and row["errors"] == "0" and row["size"] == "24"
    assert 0 <= int(row["#dejaVu"])
    stream = out.read_text().splitlines()
    assert len(stream) == 60
    assert stream[0].split("\t")[0] == "1"


def test_opt_uses_fewer_ids(corpus, capsys):
    counts = {}
    for flag in ("--opt", "--no-opt"):
        main(["normalize", "--in", str(corpus), flag] + SMALL)
        counts[flag] = int(table(capsys.readouterr().out)[1][0]["#iE"])
    assert counts["--opt"] <= counts["--no-opt"]


def test_lift_shrinks(corpus, capsys):
    main(["normalize", "--in", str(corpus)] + SMALL)
    norm = table(capsys.readouterr().out)[1][0]["out/in"]
    main(["lift", "--in", str(corpus)] + SMALL)
    lifted = table(capsys.readouterr().out)[1][0]["out/in"]
    assert float(lifted.rstrip("%")) <= float(norm.rstrip("%"))


def test_parse_errors_are_reported_and_skipped(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("ab\n(a +\n# comment\n\nb*\n")
    assert main(["normalize", "--in", str(path)] + SMALL) == 0
    captured = capsys.readouterr()
    row = table(captured.out)[1][0]
    assert row["n"] == "2" and row["errors"] == "1"
    assert f"{path}:2:" in captured.err


def test_dfa_on_the_worked_example(tmp_path, capsys):
    path = tmp_path / "trio.txt"
    path.write_text("(ab*)*\n(1 + a)(ab*)*\n(a + b)*\n")
    assert main(["dfa", "--algo", "M", "--in", str(path)] + SMALL) == 0
    header, (row,) = table(capsys.readouterr().out)
    assert tuple(header) == DFA_HEADER
    # F and E share the two-state minimal DFA, U has one state
    assert row["n"] == "3" and row["Max"] == "2" and row["skipped"] == "0"
    assert float(row["#Eq"]) == pytest.approx(5 / 3, abs=0.01)
    assert row["ma"] == "100.0%"


def test_dfa_e_rows_at_least_m_equations(corpus, capsys):
    eq = {}
    for algo in ("E", "B", "O", "M"):
        assert main(["dfa", "--algo", algo, "--lift", "--in", str(corpus)] + SMALL) == 0
        eq[algo] = float(table(capsys.readouterr().out)[1][0]["#Eq"])
    assert eq["E"] >= eq["M"]
    assert eq["B"] >= eq["M"] and eq["O"] >= eq["M"]


def test_simplify_stream_and_tables(corpus, tmp_path, capsys):
    out = tmp_path / "res.tsv"
    assert main(["simplify", "--algo", "PU", "--in", str(corpus), "--out", str(out)] + SMALL) == 0
    text = capsys.readouterr().out
    header, (row,) = table(text)
    assert tuple(header) == SIMPLIFY_HEADER
    assert row["algo"] == "PU" and row["n"] == "60" and row["#min"] == "-"
    assert "#expr" in text and "#diff" in text
    stream = [line.split("\t") for line in out.read_text().splitlines()]
    assert len(stream) == 60
    for no, in_size, out_size, text_out, flag in stream:
        assert in_size == "24"
        assert plain.size(plain.parse(text_out, 2)) == int(out_size) <= 24
        assert flag == "-"


def test_simplify_is_deterministic(corpus, tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.tsv"
        main(["simplify", "--algo", "PUI", "--in", str(corpus), "--out", str(out)] + SMALL)
        outs.append(out.read_text())
    assert outs[0] == outs[1]


def test_latex_output(corpus, capsys):
    assert main(["simplify", "--algo", "M", "--latex", "--in", str(corpus)] + SMALL) == 0
    text = capsys.readouterr().out
    assert text.startswith("\\begin{array}")
    assert "\\end{array}" in text


def test_enum_minimal_and_catalogue_flags(tmp_path, capsys, corpus):
    cat = tmp_path / "cat.bin"
    assert main(["enum-minimal", "--size", "5", "--out", str(cat)] + SMALL) == 0
    header, rows = table(capsys.readouterr().out)
    assert [r["#lang"] for r in rows] == ["2", "2", "4", "5", "24", "41"]
    assert rows[4]["#lang<=size"] == "37"
    # extending the saved catalogue to the same size adds nothing
    assert main(["enum-minimal", "--size", "5", "--catalogue", str(cat)] + SMALL) == 0
    assert "added 0 entries" in capsys.readouterr().err
    out = tmp_path / "r.tsv"
    assert main(["simplify", "--algo", "R", "--catalogue", str(cat), "--in", str(corpus),
                 "--out", str(out)] + SMALL) == 0
    row = table(capsys.readouterr().out)[1][0]
    assert int(row["#min"]) <= int(row["#pmin"]) <= 60
    flags = [line.split("\t")[4] for line in out.read_text().splitlines()]
    assert set(flags) <= {"0", "1", "-"}
    # an output no larger than the catalogue size is minimal
    for line in out.read_text().splitlines():
        f = line.split("\t")
        if int(f[2]) <= 5:
            assert f[4] == "1"


def test_snapshot_save_and_load(corpus, tmp_path, capsys):
    snap = tmp_path / "bg.bin"
    assert main(["snapshot-save", "--in", str(corpus), "--out", str(snap)] + SMALL) == 0
    saved = dict(r.values() for r in [dict(zip(("k", "v"), x.split("\t")))
                                      for x in capsys.readouterr().out.splitlines()[1:]])
    assert main(["snapshot-load", "--in", str(snap)] + SMALL) == 0
    row = table(capsys.readouterr().out)[1][0]
    assert row["expressions"] == saved["expressions"]
    assert row["equations"] == saved["equations"]


def test_usage_errors(corpus, capsys):
    assert main([]) == 1
    assert main(["gen", "--count", "3"]) == 1
    assert main(["normalize"]) == 1
    assert main(["normalize", "--nl", "0", "--in", str(corpus)]) == 1
    assert main(["simplify", "--algo", "R", "--in", str(corpus)]) == 1
    assert main(["simplify", "--algo", "X", "--in", str(corpus)]) == 1
    assert main(["snapshot-save", "--in", str(corpus)]) == 1


def test_io_errors(tmp_path, capsys):
    assert main(["normalize", "--in", str(tmp_path / "missing.txt")] + SMALL) == 2
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"not a snapshot")
    assert main(["snapshot-load", "--in", str(bad)] + SMALL) == 2


def test_exhausted_exit_code(capsys):
    assert main(["enum-minimal", "--size", "5", "--max-ids", "100"]) == 3
    assert "max-ids" in capsys.readouterr().err


def test_invariant_violation_exit_code(tmp_path, capsys):
    store = ExprStore(2, 1000)
    bg = Background(store)
    F = store.parse("(ab*)*")
    G = store.parse("b*(ab*)*")
    bg.add_eq(F, (1, G, 0))
    bg.add_eq(F, (0, G, 0))   # contradicts the first equation
    path = tmp_path / "broken.bin"
    save_file(path, store, bg)
    assert main(["snapshot-load", "--in", str(path)] + SMALL) == 4
    assert "invariant" in capsys.readouterr().err


def test_jobs_match_serial(tmp_path, capsys):
    paths = []
    for seed in (1, 2):
        p = tmp_path / f"s{seed}.txt"
        main(["gen", "--size", "16", "--count", "20", "--seed", str(seed), "--out", str(p)])
        paths.append(p)
    args = ["normalize"] + [x for p in paths for x in ("--in", str(p))] + SMALL
    main(args)
    serial = capsys.readouterr().out
    main(args + ["--jobs", "2"])
    parallel = capsys.readouterr().out

    def no_times(text):
        return [[c for k, c in r.items() if not k.startswith("t_")] for r in table(text)[1]]
    assert no_times(serial) == no_times(parallel)
