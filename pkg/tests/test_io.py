import numpy as np
import pytest

from bayespoly import io
from bayespoly.errors import AlignmentError, ParseError
from bayespoly.genetics import MISSING


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_small_genotype_file(tmp_path):
    p = _write(tmp_path / "g.tsv", "snp_id\ta\tb\tc\nrs1\t0\t1\t2\nrs2\t2\tNA\t1\n")
    gm = io.load_genotypes(p)
    assert (gm.n_snps, gm.n_samples) == (2, 3)
    assert gm.snp_ids == ["rs1", "rs2"] and gm.sample_ids == ["a", "b", "c"]
    assert gm.dosages.tolist() == [[0, 1, 2], [2, MISSING, 1]]


def test_crlf_and_blank_lines(tmp_path):
    p = _write(tmp_path / "g.tsv", "snp_id\ta\tb\r\nrs1\t0\t1\r\n\nrs2\t2\t2\r\n")
    assert io.load_genotypes(p).dosages.tolist() == [[0, 1], [2, 2]]


@pytest.mark.parametrize("body,line,column", [
    ("rs1\t0\t3\n", 2, 3),
    ("rs1\t0\t1\nrs2\t0\tx\n", 3, 3),
    ("rs1\t0\t1.0\n", 2, 3),
])
def test_bad_token_reports_position(tmp_path, body, line, column):
    p = _write(tmp_path / "g.tsv", "snp_id\ta\tb\n" + body)
    with pytest.raises(ParseError) as exc:
        io.load_genotypes(p)
    assert exc.value.line == line and exc.value.column == column
    assert f"line {line}" in str(exc.value)


@pytest.mark.parametrize("text,line", [
    ("id\ta\tb\nrs1\t0\t1\n", 1),
    ("snp_id\ta\ta\nrs1\t0\t1\n", 1),
    ("snp_id\n", 1),
    ("snp_id\ta\tb\nrs1\t0\n", 2),
    ("snp_id\ta\tb\nrs1\t0\t1\nrs1\t1\t1\n", 3),
    ("", 1),
])
def test_malformed_files(tmp_path, text, line):
    p = _write(tmp_path / "g.tsv", text)
    with pytest.raises(ParseError) as exc:
        io.load_genotypes(p)
    assert exc.value.line == line


def test_chunks_cover_file(tmp_path):
    rng = np.random.default_rng(0)
    d = rng.integers(-1, 3, (23, 5)).astype(np.int8)
    ids = [f"s{i}" for i in range(23)]
    io.write_genotypes(tmp_path / "g.tsv", ids, list("abcde"), d)
    it = io.iter_genotype_chunks(tmp_path / "g.tsv", 4)
    assert next(it) == list("abcde")
    blocks = list(it)
    assert [len(b[0]) for b in blocks] == [4, 4, 4, 4, 4, 3]
    assert np.array_equal(np.concatenate([b[1] for b in blocks]), d)
    assert io.load_genotypes(tmp_path / "g.tsv").snp_ids == ids


def test_phenotype_realignment(tmp_path):
    p = _write(tmp_path / "p.tsv", "sample_id\tvalue\nc\t3.0\nextra\t9\na\t1.5\nb\t-2\n")
    al = io.load_phenotype(p, ["a", "b", "c"])
    assert al.values.tolist() == [1.5, -2.0, 3.0] and al.columns.tolist() == [0, 1, 2]
    assert al.n_dropped == 0


def test_phenotype_missing_sample_is_dropped(tmp_path, caplog):
    p = _write(tmp_path / "p.tsv", "sample_id\tvalue\nc\t3.0\na\t1.5\n")
    al = io.load_phenotype(p, ["a", "b", "c"])
    assert al.columns.tolist() == [0, 2] and al.n_dropped == 1
    assert "1 genotyped sample" in caplog.text


@pytest.mark.parametrize("text,exc", [
    ("sample_id\tvalue\na\t1\na\t2\n", ParseError),
    ("sample_id\tvalue\na\tabc\n", ParseError),
    ("sample_id\tvalue\na\tnan\n", ParseError),
    ("sample_id\tvalue\na\t1\t2\n", ParseError),
    ("sample_id\tvalue\nzz\t1\n", AlignmentError),
])
def test_phenotype_errors(tmp_path, text, exc):
    p = _write(tmp_path / "p.tsv", text)
    with pytest.raises(exc):
        io.load_phenotype(p, ["a", "b"])


def test_truth_round_trip(tmp_path):
    from bayespoly.sim import TruthTable

    truth = TruthTable(np.array([-1, 0, 1, 2, -1], np.int8))
    ids = [f"snp{j}" for j in range(5)]
    io.write_truth(tmp_path / "t.tsv", ids, truth)
    got_ids, got = io.read_truth(tmp_path / "t.tsv")
    assert got_ids == ids and np.array_equal(got.modes, truth.modes)
