"""Genome scan: blocks of SNPs through the evidence and least-squares kernels.

SNPs are processed in fixed-size blocks whose boundaries do not depend on the
worker count, and each SNP's numbers depend only on its own row, so output is
byte-identical for any ``workers``. Blocks run on a thread pool (the numba
kernels release the GIL) and are written back in input order.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bayes import NormalGammaPrior
from .errors import DomainError
from .io import iter_genotype_chunks, load_phenotype
from .results import ResultWriter, ScanResult

DEFAULT_BLOCK = 2048
PARTIAL_MARKER = "#PARTIAL_OUTPUT"


@dataclass(frozen=True)
class ScanOptions:
    run_freq_baseline: bool = False
    bf_threshold: float = 1500.0
    p_threshold: float = 1e-5
    workers: int = 1
    genotypic_test: str = "indicators"
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.block_size < 1:
            raise DomainError(f"block_size must be >= 1, got {self.block_size}")
        if self.genotypic_test not in ("indicators", "joint"):
            raise DomainError(f"unknown genotypic test {self.genotypic_test!r}")


_DEFAULT_OPTIONS = ScanOptions()


def scan_stats(snp_ids, counts, sums, yty, prior: NormalGammaPrior,
               options: ScanOptions = _DEFAULT_OPTIONS) -> ScanResult:
    """Scan results from precomputed per-SNP class statistics."""
    logml, est = kernels.evidence(counts, sums, yty, prior.tables)
    best, log_bf = kernels.select_best(logml)
    rows = np.arange(len(best))
    flags = kernels.stat_flags(counts)
    min_p = freq_best = pvals = None
    if options.run_freq_baseline:
        pvals, fflags, deg = kernels.frequentist(counts, sums, yty, options.genotypic_test)
        min_p, freq_best = kernels.min_p_select(pvals, deg)
        flags |= fflags
    return ScanResult(list(snp_ids), counts.sum(axis=1), logml, log_bf, best,
                      est[rows, best], flags, min_p, freq_best, pvals)


def scan_block(snp_ids, dosages, trait, prior: NormalGammaPrior,
               options: ScanOptions = _DEFAULT_OPTIONS) -> ScanResult:
    counts, sums, yty = kernels.accumulate(dosages, trait)
    return scan_stats(snp_ids, counts, sums, yty, prior, options)


def _blocks(m: int, size: int):
    return [(s, min(s + size, m)) for s in range(0, m, size)]


def scan_matrix(dosages, trait, prior: NormalGammaPrior | None = None,
                options: ScanOptions = _DEFAULT_OPTIONS, snp_ids=None) -> ScanResult:
    """Scan an in-memory ``(m, n)`` dosage matrix against an aligned trait."""
    prior = prior or NormalGammaPrior.default()
    dosages = np.asarray(dosages, dtype=np.int8)
    trait = np.asarray(trait, dtype=np.float64)
    if dosages.ndim != 2 or dosages.shape[1] != trait.shape[0]:
        raise DomainError(f"dosages {dosages.shape} and trait {trait.shape} are not aligned")
    m = dosages.shape[0]
    if snp_ids is None:
        snp_ids = [f"snp{i}" for i in range(m)]
    spans = _blocks(m, options.block_size)

    def run(span):
        a, b = span
        return scan_block(snp_ids[a:b], dosages[a:b], trait, prior, options)

    if options.workers == 1 or len(spans) <= 1:
        parts = [run(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            parts = list(pool.map(run, spans))
    if not parts:
        return ScanResult.empty(options.run_freq_baseline)
    return ScanResult.concat(parts)


def standardize(trait: np.ndarray) -> np.ndarray:
    sd = trait.std(ddof=1) if trait.size > 1 else 0.0
    if not sd > 0.0:
        raise DomainError("cannot standardize a constant trait")
    return (trait - trait.mean()) / sd


@dataclass(frozen=True)
class ScanSummary:
    n_snps: int
    n_samples: int
    n_dropped: int
    n_bf_hits: int
    n_p_hits: int | None


def scan_files(geno_path, pheno_path, out_path, prior: NormalGammaPrior | None = None,
               options: ScanOptions = _DEFAULT_OPTIONS, do_standardize: bool = False) -> ScanSummary:
    """Stream a genotype file through the scan and write the results TSV.

    At most ``2 * workers`` blocks are in flight. If reading or writing fails
    part-way, a ``#PARTIAL_OUTPUT`` line is appended to whatever was written
    and the exception propagates.
    """
    prior = prior or NormalGammaPrior.default()
    chunks = iter_genotype_chunks(geno_path, options.block_size)
    samples = next(chunks)
    aligned = load_phenotype(pheno_path, samples)
    trait = standardize(aligned.values) if do_standardize else aligned.values
    cols = aligned.columns
    subset = len(cols) != len(samples)
    log_bf_cut = math.log(options.bf_threshold)
    bf_hits = 0
    p_hits = 0
    n_snps = 0

    def run(item):
        ids, dos = item
        if subset:
            dos = dos[:, cols]
        return scan_block(ids, dos, trait, prior, options)

    fh = open(out_path, "w", encoding="utf-8", newline="\n")
    try:
        writer = ResultWriter(fh)

        def sink(res: ScanResult):
            nonlocal bf_hits, p_hits, n_snps
            writer.write(res)
            n_snps += len(res)
            bf_hits += int(np.sum(res.log_bf_max > log_bf_cut))
            if res.has_freq:
                p_hits += int(np.sum(res.min_p < options.p_threshold))

        if options.workers == 1:
            for item in chunks:
                sink(run(item))
        else:
            with ThreadPoolExecutor(max_workers=options.workers) as pool:
                pending: deque = deque()
                for item in chunks:
                    pending.append(pool.submit(run, item))
                    if len(pending) >= 2 * options.workers:
                        sink(pending.popleft().result())
                while pending:
                    sink(pending.popleft().result())
    except BaseException as exc:
        try:
            fh.write(f"{PARTIAL_MARKER}\t{type(exc).__name__}: {exc}\n")
        except OSError:
            pass
        raise
    finally:
        fh.close()
    return ScanSummary(n_snps, len(cols), aligned.n_dropped, bf_hits,
                       p_hits if options.run_freq_baseline else None)


def sci(x: float) -> str:
    """Mantissa times power of ten, e.g. ``4.0x10^-5``."""
    if x == 0 or not math.isfinite(x):
        return str(x)
    k = math.floor(math.log10(abs(x)))
    return f"{x / 10 ** k:.1f}x10^{k}"
