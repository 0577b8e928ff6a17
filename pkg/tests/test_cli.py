import subprocess
import sys

import pytest

from bayespoly import __version__, cli, results


def test_version_via_module():
    out = subprocess.run([sys.executable, "-m", "bayespoly", "--version"], capture_output=True,
                         text=True, check=True)
    assert __version__ in out.stdout


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["scan", "--geno", "x"])
    assert exc.value.code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["scan", "--geno", "g", "--pheno", "p", "--out", "o", "--workers", "0"])
    assert exc.value.code == cli.EXIT_USAGE


def test_missing_file_is_io_error(tmp_path, capsys):
    code = cli.main(["scan", "--geno", str(tmp_path / "nope.tsv"), "--pheno", str(tmp_path / "p.tsv"),
                     "--out", str(tmp_path / "r.tsv")])
    assert code == cli.EXIT_IO


def test_parse_error_exit_code(tmp_path, capsys):
    (tmp_path / "g.tsv").write_text("snp_id\ta\tb\nrs1\t0\t9\n")
    (tmp_path / "p.tsv").write_text("sample_id\tvalue\na\t1\nb\t2\n")
    code = cli.main(["scan", "--geno", str(tmp_path / "g.tsv"), "--pheno", str(tmp_path / "p.tsv"),
                     "--out", str(tmp_path / "r.tsv")])
    assert code == cli.EXIT_PARSE
    assert "line 2" in capsys.readouterr().err


def test_simulate_scan_evaluate_pipeline(tmp_path, capsys):
    d = tmp_path / "study"
    assert cli.main(["simulate", "--study", "2", "--seed", "3", "--out-dir", str(d),
                     "--n-individuals", "500", "--n-snps", "400", "--n-causal", "10",
                     "--causal-split", "4", "3", "3", "--total-h2", "0.3"]) == 0
    args = ["scan", "--geno", str(d / "genotypes.tsv"), "--pheno", str(d / "phenotype.tsv"),
            "--freq-baseline", "--standardize"]
    assert cli.main([*args, "--out", str(tmp_path / "r1.tsv")]) == 0
    assert cli.main([*args, "--out", str(tmp_path / "r4.tsv"), "--workers", "4",
                     "--block-size", "33"]) == 0
    assert (tmp_path / "r1.tsv").read_bytes() == (tmp_path / "r4.tsv").read_bytes()
    assert len(results.read_results(tmp_path / "r1.tsv")) == 400
    assert cli.main(["evaluate", "--results", str(tmp_path / "r1.tsv"), "--truth", str(d / "truth.tsv"),
                     "--out", str(tmp_path / "rep.tsv")]) == 0
    assert len((tmp_path / "rep.tsv").read_text().splitlines()) == 5
    out = capsys.readouterr().out
    assert "400 SNPs, 500 samples" in out and "matched BF=" in out


def test_evaluate_rejects_misaligned_truth(tmp_path, capsys):
    d = tmp_path / "s"
    cli.main(["simulate", "--study", "1", "--out-dir", str(d), "--n-snps", "50"])
    cli.main(["scan", "--geno", str(d / "genotypes.tsv"), "--pheno", str(d / "phenotype.tsv"),
              "--freq-baseline", "--out", str(tmp_path / "r.tsv")])
    lines = (d / "truth.tsv").read_text().splitlines()
    (d / "truth.tsv").write_text("\n".join(lines[:-1]) + "\n")
    assert cli.main(["evaluate", "--results", str(tmp_path / "r.tsv"), "--truth", str(d / "truth.tsv"),
                     "--out", str(tmp_path / "rep.tsv")]) == cli.EXIT_PARSE


def test_permute_writes_table(tmp_path, capsys):
    d = tmp_path / "s"
    assert cli.main(["simulate", "--study", "1", "--out-dir", str(d), "--n-snps", "300"]) == 0
    assert cli.main(["permute", "--geno", str(d / "genotypes.tsv"), "--pheno", str(d / "phenotype.tsv"),
                     "--reps", "4", "--out", str(tmp_path / "perm.tsv")]) == 0
    rows = (tmp_path / "perm.tsv").read_text().splitlines()
    assert len(rows) == 5 and rows[0].startswith("rep\tbf_gt_100")
    assert "BF > 1500" in capsys.readouterr().out
