import csv
import io
import math
import random
import subprocess
import sys

import pytest

from conftest import SAMPLE_TREE
from treentropy.cli import main
from treentropy.codec import read_container
from treentropy.trees import format_term, parse_tree, perfect_tree, random_tree
from treentropy.tslp import val
from treentropy.unranked import random_xml_document


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def sample_file(tmp_path):
    p = tmp_path / "sample_tree.tree"
    p.write_text(SAMPLE_TREE + "\n")
    return p


def test_entropy_command(sample_file, capsys):
    assert main(["entropy", str(sample_file), "--k", "0,1"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert rows[0] == ["document", "n", "sigma", "k", "Hk_bits"]
    assert rows[2] == [str(sample_file), "5", "2", "1", f"{3 * math.log2(3) + 6:.6f}"]


def test_entropy_output_file_and_bad_input(sample_file, tmp_path, capsys):
    bad = tmp_path / "bad.tree"
    bad.write_text("a(b")
    out = tmp_path / "out.csv"
    assert main(["entropy", str(sample_file), str(bad), "-o", str(out)]) == 2
    err = capsys.readouterr().err
    assert "bad.tree" in err
    rows = rows_of(out.read_text())
    assert len(rows) == 1 + 3
    assert main(["entropy", str(tmp_path / "missing.tree")]) == 2


def test_bad_k_argument(sample_file):
    with pytest.raises(SystemExit) as exc:
        main(["entropy", str(sample_file), "--k", "1,x"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["entropy", str(sample_file), "--k", "-1"])


@pytest.mark.parametrize("method", ["dag", "digram"])
def test_compress_decompress(method, sample_file, tmp_path, capsys):
    blob = tmp_path / "sample_tree.tslp"
    assert main(["compress", str(sample_file), "-o", str(blob), "--method", method, "-v"]) == 0
    assert "m=" in capsys.readouterr().err
    assert main(["decompress", str(blob)]) == 0
    assert capsys.readouterr().out.strip() == SAMPLE_TREE
    text = tmp_path / "back.tree"
    assert main(["decompress", str(blob), "-o", str(text)]) == 0
    assert text.read_text().strip() == SAMPLE_TREE


def test_compress_is_deterministic(tmp_path):
    t = random_tree(500, "abc", random.Random(8))
    src = tmp_path / "t.tree"
    src.write_text(format_term(t))
    a, b = tmp_path / "a.tslp", tmp_path / "b.tslp"
    for method in ("dag", "digram"):
        main(["compress", str(src), "-o", str(a), "--method", method])
        main(["compress", str(src), "-o", str(b), "--method", method])
        assert a.read_bytes() == b.read_bytes()


def test_corpus_round_trip(tmp_path):
    rng = random.Random(21)
    for i in range(100):
        t = random_tree(rng.randint(1, 300), "abcd"[: rng.randint(1, 4)], rng)
        src = tmp_path / f"t{i}.tree"
        src.write_text(format_term(t))
        blob = tmp_path / f"t{i}.tslp"
        method = ("dag", "digram")[i % 2]
        assert main(["compress", str(src), "-o", str(blob), "--method", method]) == 0
        g, _ = read_container(blob.read_bytes())
        assert val(g) == t


def test_compress_errors(tmp_path, capsys):
    bad = tmp_path / "bad.tree"
    bad.write_text("a(b,c")
    assert main(["compress", str(bad), "-o", str(tmp_path / "x.tslp")]) == 2
    broken = tmp_path / "broken.tslp"
    broken.write_bytes(b"TSLP\x01\x02")
    assert main(["decompress", str(broken)]) == 3
    assert main(["decompress", str(tmp_path / "missing.tslp")]) == 2


def test_xml_input(tmp_path, capsys):
    text, _ = random_xml_document(40, ["a", "b"], random.Random(3))
    doc = tmp_path / "doc.xml"
    doc.write_text(text)
    assert main(["entropy", str(doc), "--k", "1"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert rows[1][1] == "41"
    blob = tmp_path / "doc.tslp"
    assert main(["compress", str(doc), "-o", str(blob)]) == 0
    assert read_container(blob.read_bytes())[1].box == "□"


def test_measure(sample_file, tmp_path, capsys):
    png = tmp_path / "m.png"
    assert main(["measure", str(sample_file), "--k", "1", "--plot", str(png)]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert rows[0] == ["document", "n", "sigma", "m", "code_bits", "HG_bits", "k", "Hk_bits", "code_le_Hk"]
    assert rows[1][1:3] == ["5", "2"] and rows[1][6] == "1"
    assert png.stat().st_size > 0 and png.read_bytes()[:4] == b"\x89PNG"


def test_measure_jobs_keep_input_order(tmp_path, capsys):
    paths = []
    for h in (3, 1, 4, 2):
        p = tmp_path / f"p{h}.tree"
        p.write_text(format_term(perfect_tree(h)))
        paths.append(str(p))
    assert main(["measure", *paths, "--k", "0", "--jobs", "2"]) == 0
    parallel = capsys.readouterr().out
    assert main(["measure", *paths, "--k", "0"]) == 0
    serial = capsys.readouterr().out
    assert parallel == serial
    assert [r[0] for r in rows_of(parallel)[1:]] == paths


def test_xml_profile(tmp_path, capsys):
    rng = random.Random(6)
    docs = []
    for i in range(3):
        text, _ = random_xml_document(60, ["a", "b", "c"], rng)
        p = tmp_path / f"d{i}.xml"
        p.write_text(text)
        docs.append(str(p))
    png = tmp_path / "profile.png"
    assert main(["xml-profile", *docs, "--plot", str(png)]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert rows[0] == ["document", "n", "sigma", "w_bits", "k", "Hk_bits", "quotient_pct"]
    assert len(rows) == 1 + 3 * 4
    assert rows[1][0] == "d0" and rows[1][1] == "60"
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_xml_profile_rejects_bad_documents(tmp_path):
    bad = tmp_path / "bad.xml"
    bad.write_text("<a>")
    assert main(["xml-profile", str(bad)]) == 2


def test_sn_table_command(tmp_path, capsys):
    png = tmp_path / "sn.png"
    assert main(["sn-table", "--n-max", "6", "--plot", str(png)]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert rows[0] == ["n", "k", "Hk_bits", "bound", "holds"]
    assert len(rows) == 1 + sum(n - 1 for n in range(2, 7))
    assert all(r[4] == "1" for r in rows[1:])
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_selfcheck(capsys):
    assert main(["selfcheck"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3 and "FAIL" not in out


def test_selfcheck_detects_injected_codec_fault(capsys):
    assert main(["selfcheck", "--inject-fault", "codec"]) == 1
    assert "FAIL codec" in capsys.readouterr().out


def test_module_entry_point(sample_file):
    proc = subprocess.run(
        [sys.executable, "-m", "treentropy", "entropy", str(sample_file), "--k", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].endswith(f"{3 * math.log2(3) + 6:.6f}")


def test_decompressed_text_parses(sample_file, tmp_path, capsys):
    blob = tmp_path / "x.tslp"
    main(["compress", str(sample_file), "-o", str(blob)])
    capsys.readouterr()
    main(["decompress", str(blob)])
    assert parse_tree(capsys.readouterr().out) == parse_tree(SAMPLE_TREE)
