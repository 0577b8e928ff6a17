import math

import numpy as np
import oracles
import pytest

from bayespoly import io, results, scan
from bayespoly.errors import DomainError, ParseError
from bayespoly.genetics import GeneticModel as M

SHORT = {M.GENOTYPIC: "P", M.ADDITIVE: "A", M.DOMINANT: "D", M.RECESSIVE: "R", M.CODOMINANT: "C",
         M.NULL: "N"}


def _dataset(tmp_path, m=300, n=50, seed=0, missing=0.02):
    rng = np.random.default_rng(seed)
    d = rng.integers(0, 3, (m, n)).astype(np.int8)
    d[rng.random((m, n)) < missing] = -1
    d[5] = 0
    samples = [f"ind{i}" for i in range(n)]
    ids = [f"rs{i}" for i in range(m)]
    y = rng.normal(size=n) + 0.8 * (d[7] == 2)
    io.write_genotypes(tmp_path / "g.tsv", ids, samples, d)
    io.write_phenotype(tmp_path / "p.tsv", samples, y)
    return ids, samples, d, y


def test_toy_record_matches_quadrature():
    g = np.array([[0, 1, 2, 1]], np.int8)
    y = np.array([0.0, 1.0, 2.0, 1.0])
    rec = scan.scan_matrix(g, y).record(0)
    for m, v in rec.log_ml.items():
        m0, p0 = oracles.model_prior(SHORT[m])
        assert v == pytest.approx(oracles.quadrature_log_ml(oracles.design(SHORT[m], g[0]), y, m0, p0),
                                  abs=1e-8)
    assert rec.log_bf_max == pytest.approx(
        max(v for k, v in rec.log_ml.items() if k is not M.NULL) - rec.log_ml[M.NULL], abs=1e-12)


def test_write_results_shapes(tmp_path):
    results.write_results([], tmp_path / "empty.tsv")
    assert (tmp_path / "empty.tsv").read_text() == "\t".join(results.HEADER) + "\n"
    res = scan.scan_matrix(np.array([[0, 1, 2, 1, 0]], np.int8), np.arange(5.0))
    results.write_results(res, tmp_path / "one.tsv")
    lines = (tmp_path / "one.tsv").read_text().splitlines()
    assert len(lines) == 2 and len(lines[1].split("\t")) == len(results.HEADER)


@pytest.mark.parametrize("freq", [False, True])
def test_round_trip(tmp_path, freq):
    rng = np.random.default_rng(1)
    g = rng.integers(0, 3, (200, 40)).astype(np.int8)
    res = scan.scan_matrix(g, rng.normal(size=40), options=scan.ScanOptions(run_freq_baseline=freq))
    results.write_results(res, tmp_path / "r.tsv")
    back = results.read_results(tmp_path / "r.tsv")
    assert back == list(res.records())
    results.write_results(back, tmp_path / "r2.tsv")
    if freq:
        assert (tmp_path / "r2.tsv").read_bytes() == (tmp_path / "r.tsv").read_bytes()


def test_schema_and_flags(tmp_path):
    ids, _, d, _ = _dataset(tmp_path)
    scan.scan_files(tmp_path / "g.tsv", tmp_path / "p.tsv", tmp_path / "r.tsv",
                    options=scan.ScanOptions(run_freq_baseline=True))
    lines = (tmp_path / "r.tsv").read_text().splitlines()
    assert len(lines) == len(ids) + 1
    assert all(len(line.split("\t")) == len(results.HEADER) for line in lines)
    recs = results.read_results(tmp_path / "r.tsv")
    assert [r.snp_id for r in recs] == ids
    for r, row in zip(recs, d):
        assert r.n_used == int(np.sum(row >= 0))
        if not all(math.isfinite(v) for v in (*r.log_ml.values(), *r.estimates)):
            assert r.flags
        assert set(r.flags) <= {"monomorphic", "no_het", "no_hom_minor", "perfect_fit", "degenerate_freq"}
    assert "monomorphic" in recs[5].flags
    assert recs[7].best_model in (M.RECESSIVE, M.GENOTYPIC)


def test_workers_give_identical_bytes(tmp_path):
    _dataset(tmp_path, m=1000)
    outs = []
    for w in (1, 3, 8):
        out = tmp_path / f"r{w}.tsv"
        scan.scan_files(tmp_path / "g.tsv", tmp_path / "p.tsv", out,
                        options=scan.ScanOptions(run_freq_baseline=True, workers=w, block_size=37))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_file_scan_equals_matrix_scan(tmp_path):
    ids, _, d, y = _dataset(tmp_path)
    scan.scan_files(tmp_path / "g.tsv", tmp_path / "p.tsv", tmp_path / "r.tsv",
                    options=scan.ScanOptions(block_size=64))
    res = scan.scan_matrix(d, y, snp_ids=ids, options=scan.ScanOptions(workers=4, block_size=50))
    assert results.read_results(tmp_path / "r.tsv") == list(res.records())


def test_missing_phenotype_reduces_n(tmp_path):
    _, samples, _, y = _dataset(tmp_path, missing=0.0)
    io.write_phenotype(tmp_path / "p.tsv", samples[1:], y[1:])
    summary = scan.scan_files(tmp_path / "g.tsv", tmp_path / "p.tsv", tmp_path / "r.tsv")
    assert summary.n_dropped == 1 and summary.n_samples == len(samples) - 1
    assert {r.n_used for r in results.read_results(tmp_path / "r.tsv")} == {len(samples) - 1}


def test_parse_failure_leaves_partial_marker(tmp_path):
    _dataset(tmp_path, m=100)
    text = (tmp_path / "g.tsv").read_text().splitlines()
    text[60] = text[60][:-1] + "7"
    (tmp_path / "g.tsv").write_text("\n".join(text) + "\n")
    with pytest.raises(ParseError):
        scan.scan_files(tmp_path / "g.tsv", tmp_path / "p.tsv", tmp_path / "r.tsv",
                        options=scan.ScanOptions(block_size=16))
    body = (tmp_path / "r.tsv").read_text().splitlines()
    assert body[-1].startswith(scan.PARTIAL_MARKER)
    assert len(body) - 2 == 48


def test_standardize():
    z = scan.standardize(np.array([1.0, 2.0, 3.0, 10.0]))
    assert z.mean() == pytest.approx(0.0, abs=1e-15) and z.std(ddof=1) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        scan.standardize(np.ones(4))


def test_options_validation():
    with pytest.raises(DomainError):
        scan.ScanOptions(workers=0)
    with pytest.raises(DomainError):
        scan.ScanOptions(genotypic_test="wald")


def test_sci_format():
    assert scan.sci(4e-5) == "4.0x10^-5"
    assert scan.sci(1500) == "1.5x10^3"
