"""Command-line interface: ``bayespoly {scan,simulate,permute,evaluate}``.

Exit codes: 0 success, 1 usage error, 2 parse or alignment error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .bayes import NormalGammaPrior
from .errors import AlignmentError, DomainError, ParseError
from .io import (
    load_genotypes,
    load_phenotype,
    read_truth,
    write_genotype_rows,
    write_phenotype,
    write_truth,
)
from .results import read_results
from .scan import DEFAULT_BLOCK, ScanOptions, scan_files, sci
from .sim import (
    PERM_BF_THRESHOLDS,
    PERM_P_THRESHOLDS,
    STUDIES,
    STUDY2_P_THRESHOLDS,
    TRAIT,
    evaluate,
    iter_genotype_blocks,
    permutation_scan,
    plan_study,
    snp_names,
    study_config,
    study_trait,
    substream,
    write_report,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("bayespoly")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bayespoly",
                description="Bayesian polynomial-regression genetic model selection for SNP scans.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("scan", help="score every SNP under the five genetic models")
    s.add_argument("--geno", required=True, help="genotype TSV (snp_id, then one column per sample)")
    s.add_argument("--pheno", required=True, help="phenotype TSV (sample_id, value)")
    s.add_argument("--out", required=True, help="results TSV to write")
    s.add_argument("--prior-r0-scale", type=_positive_float, default=1.0,
                   help="prior precision scale, R0 = scale * I (default 1)")
    s.add_argument("--standardize", action="store_true", help="centre and scale the trait first")
    s.add_argument("--freq-baseline", action="store_true", help="also run least-squares min-p")
    s.add_argument("--genotypic-test", choices=("indicators", "joint"), default="indicators",
                   help="genotypic p-values: two indicator t-tests (default) or the joint F-test")
    s.add_argument("--bf-threshold", type=_positive_float, default=1500.0)
    s.add_argument("--p-threshold", type=_positive_float, default=1e-5)
    s.add_argument("--workers", type=_positive_int, default=1)
    s.add_argument("--block-size", type=_positive_int, default=DEFAULT_BLOCK)

    m = sub.add_parser("simulate", help="write a simulated study (genotypes, phenotype, truth)")
    m.add_argument("--study", choices=STUDIES, required=True)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out-dir", required=True)
    m.add_argument("--n-individuals", type=_positive_int)
    m.add_argument("--n-snps", type=_positive_int)
    m.add_argument("--n-causal", type=int)
    m.add_argument("--causal-split", type=int, nargs=3, metavar=("A", "D", "R"))
    m.add_argument("--total-h2", type=float)

    r = sub.add_parser("permute", help="null false-positive rates by trait permutation")
    r.add_argument("--geno", required=True)
    r.add_argument("--pheno", required=True)
    r.add_argument("--reps", type=_positive_int, default=200)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", help="per-permutation hit counts TSV")
    r.add_argument("--prior-r0-scale", type=_positive_float, default=1.0)

    e = sub.add_parser("evaluate", help="matched-threshold power against a truth table")
    e.add_argument("--results", required=True, help="results TSV from 'scan --freq-baseline'")
    e.add_argument("--truth", required=True, help="truth TSV from 'simulate'")
    e.add_argument("--out", required=True, help="report TSV")
    e.add_argument("--p-thresholds", type=_positive_float, nargs="+", default=list(STUDY2_P_THRESHOLDS))
    return p


def _cmd_scan(a) -> int:
    opts = ScanOptions(run_freq_baseline=a.freq_baseline, bf_threshold=a.bf_threshold,
                       p_threshold=a.p_threshold, workers=a.workers,
                       genotypic_test=a.genotypic_test, block_size=a.block_size)
    summary = scan_files(a.geno, a.pheno, a.out, NormalGammaPrior.default(a.prior_r0_scale), opts,
                         do_standardize=a.standardize)
    msg = (f"{summary.n_snps} SNPs, {summary.n_samples} samples"
           f" ({summary.n_dropped} without phenotype dropped);"
           f" BF_max > {sci(a.bf_threshold)}: {summary.n_bf_hits}")
    if summary.n_p_hits is not None:
        msg += f"; min p < {sci(a.p_threshold)}: {summary.n_p_hits}"
    print(msg)
    return EXIT_OK


def _cmd_simulate(a) -> int:
    over = {k: v for k, v in (("n_individuals", a.n_individuals), ("n_snps", a.n_snps),
                               ("n_causal", a.n_causal), ("total_h2", a.total_h2)) if v is not None}
    if a.causal_split is not None:
        over["causal_split"] = tuple(a.causal_split)
        over.setdefault("n_causal", sum(a.causal_split))
    cfg = study_config(a.study, seed=a.seed, **over)
    os.makedirs(a.out_dir, exist_ok=True)
    plan = plan_study(cfg)
    samples = [f"ind{i}" for i in range(cfg.n_individuals)]
    if cfg.n_causal:
        trait = study_trait(plan)
    else:
        trait = substream(cfg.seed, TRAIT).standard_normal(cfg.n_individuals)
    with open(os.path.join(a.out_dir, "genotypes.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(["snp_id", *samples]) + "\n")
        for lo, hi, g in iter_genotype_blocks(plan):
            write_genotype_rows(fh, snp_names(lo, hi), g)
    write_phenotype(os.path.join(a.out_dir, "phenotype.tsv"), samples, trait)
    write_truth(os.path.join(a.out_dir, "truth.tsv"), snp_names(0, cfg.n_snps), plan.truth)
    print(f"study {a.study}: {cfg.n_snps} SNPs x {cfg.n_individuals} individuals,"
          f" {cfg.n_causal} causal, written to {a.out_dir}")
    return EXIT_OK


def _cmd_permute(a) -> int:
    geno = load_genotypes(a.geno)
    aligned = load_phenotype(a.pheno, geno.sample_ids)
    dos = geno.dosages[:, aligned.columns]
    rep = permutation_scan(dos, aligned.values, a.reps, a.seed, NormalGammaPrior.default(a.prior_r0_scale))
    if a.out:
        with open(a.out, "w", encoding="utf-8", newline="\n") as fh:
            cols = [f"bf_gt_{t:g}" for t in PERM_BF_THRESHOLDS] + [f"p_lt_{t:g}" for t in PERM_P_THRESHOLDS]
            fh.write("\t".join(["rep", *cols]) + "\n")
            for i in range(a.reps):
                vals = [*rep.bf_hits[i], *rep.p_hits[i]]
                fh.write("\t".join([str(i), *map(str, vals)]) + "\n")
    print("median false positive rate over", a.reps, "permutations of", rep.n_snps, "SNPs")
    for t, v in zip(PERM_BF_THRESHOLDS, rep.median_rate("bf")):
        print(f"  BF > {t:g}\t{sci(v)}")
    for t, v in zip(PERM_P_THRESHOLDS, rep.median_rate("p")):
        print(f"  p < {t:g}\t{sci(v)}")
    return EXIT_OK


def _cmd_evaluate(a) -> int:
    records = read_results(a.results)
    ids, truth = read_truth(a.truth)
    if [r.snp_id for r in records] != ids:
        raise AlignmentError("results and truth list different SNPs or orders")
    report = evaluate(records, records, truth, a.p_thresholds)
    write_report(report, a.out)
    for r in report.rows:
        print(f"p < {sci(r.threshold)}: fp={r.fp_count} matched BF={sci(r.matched_bf)}"
              f" any={r.power_any_bayes}/{r.power_any_freq}"
              f" D+R={r.correct_bayes[1] + r.correct_bayes[2]}/{r.correct_freq[1] + r.correct_freq[2]}")
    return EXIT_OK


_COMMANDS = {"scan": _cmd_scan, "simulate": _cmd_simulate, "permute": _cmd_permute,
             "evaluate": _cmd_evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return _COMMANDS[a.command](a)
    except (ParseError, AlignmentError) as exc:
        print(f"bayespoly: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"bayespoly: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bayespoly: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
