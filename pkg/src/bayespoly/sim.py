"""Simulation studies: data generation for null and causal scenarios plus scoring.

Randomness is drawn from per-SNP substreams keyed by ``(seed, tag, index)``,
so every SNP's draws are reproducible in isolation and do not depend on how
SNPs are blocked or scheduled.

Allele convention: ``p`` is always the minor (B) allele frequency and the
dosage counts B alleles, so ``P(g=2) = p**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bayes import NormalGammaPrior
from .errors import AlignmentError, DomainError
from .genetics import GeneticModel
from .results import ScanResult
from .scan import DEFAULT_BLOCK, ScanOptions, scan_block, scan_stats

# Substream tags.
GENO, MAF, NOISE, CAUSAL, PERM, TRAIT = 1, 2, 3, 4, 5, 6

CAUSAL_MODES = (GeneticModel.ADDITIVE, GeneticModel.DOMINANT, GeneticModel.RECESSIVE)
H2_RULES = ("uniform", "additive_halved", "additive_quartered")
_ADDITIVE_SCALE = {"uniform": 1.0, "additive_halved": 0.5, "additive_quartered": 0.25}

STUDY2_P_THRESHOLDS = (1e-7, 5e-7, 1e-6, 5e-6)


def substream(seed: int, tag: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag, index)))


# --------------------------------------------------------------------------
# Single-draw generators
# --------------------------------------------------------------------------

def draw_maf(rng: np.random.Generator, beta=(2.0, 8.0), floor: float = 0.01) -> float:
    """Beta draw, redrawn until it reaches ``floor``."""
    while True:
        p = rng.beta(*beta)
        if p >= floor:
            return float(p)


def hwe_probabilities(p: float) -> np.ndarray:
    """``(P(g=0), P(g=1), P(g=2))`` for B-allele frequency ``p``."""
    return np.array([(1 - p) ** 2, 2 * p * (1 - p), p * p])


def genotypes_hwe(p_b: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` int8 dosages in Hardy-Weinberg proportions."""
    if not 0.0 < p_b < 1.0:
        raise DomainError(f"allele frequency must lie in (0, 1), got {p_b!r}")
    u = rng.random(n)
    # g = 2 below p^2, g = 1 up to 1 - (1-p)^2, else 0.
    return ((u < p_b * p_b).astype(np.int8) + (u < 1.0 - (1.0 - p_b) ** 2).astype(np.int8))


def heritability_identity(a: float, d: float, p: float, sigma2_total: float = 1.0) -> float:
    """Locus heritability from additive effect ``a``, dominance ``d`` and MAF ``p``."""
    q = 2.0 * p * (1.0 - p)
    return (q * (a + d * (1.0 - 2.0 * p)) ** 2 + (q * d) ** 2) / sigma2_total


def effect_size(h2: float, p: float, mode: GeneticModel) -> tuple[float, float]:
    """Positive ``(a, d)`` giving locus heritability ``h2`` with ``d`` in {0, a, -a}."""
    if not h2 > 0.0:
        raise DomainError(f"h2 must be positive, got {h2!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"allele frequency must lie in (0, 1), got {p!r}")
    mode = GeneticModel(mode)
    q = 2.0 * p * (1.0 - p)
    if mode is GeneticModel.ADDITIVE:
        a = math.sqrt(h2 / q)
        return a, 0.0
    if mode is GeneticModel.DOMINANT:
        a = math.sqrt(h2 / (q * (2.0 - 2.0 * p) ** 2 + q * q))
        return a, a
    if mode is GeneticModel.RECESSIVE:
        a = math.sqrt(h2 / (q * (2.0 * p) ** 2 + q * q))
        return a, -a
    raise DomainError(f"no effect-size rule for {mode.name} causal SNPs")


def causal_coding(mode: GeneticModel, dosages: np.ndarray) -> np.ndarray:
    """Per-mode genotype coding of a causal SNP's contribution."""
    g = np.asarray(dosages)
    mode = GeneticModel(mode)
    if mode is GeneticModel.ADDITIVE:
        return g.astype(np.float64)
    if mode is GeneticModel.DOMINANT:
        return (g >= 1).astype(np.float64)
    if mode is GeneticModel.RECESSIVE:
        return (g == 2).astype(np.float64)
    raise DomainError(f"no causal coding for {mode.name}")


def permute_trait(trait, rng: np.random.Generator) -> np.ndarray:
    y = np.asarray(trait)
    if y.size == 0:
        raise DomainError("cannot permute an empty trait")
    return rng.permutation(y)


# --------------------------------------------------------------------------
# Study configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    n_individuals: int
    n_snps: int
    n_causal: int = 100
    causal_split: tuple = (34, 33, 33)
    total_h2: float = 0.4
    h2_rule: str = "uniform"
    maf_beta: tuple = (2.0, 8.0)
    maf_floor: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if sum(self.causal_split) != self.n_causal or len(self.causal_split) != 3:
            raise DomainError(f"causal_split {self.causal_split} must sum to n_causal={self.n_causal}")
        if self.n_causal > self.n_snps:
            raise DomainError("more causal SNPs than SNPs")
        if self.n_causal > 0 and not 0.0 < self.total_h2 < 1.0:
            raise DomainError(f"total_h2 must lie in (0, 1), got {self.total_h2!r}")
        if self.h2_rule not in H2_RULES:
            raise DomainError(f"h2_rule must be one of {H2_RULES}, got {self.h2_rule!r}")
        if self.n_individuals < 1 or self.n_snps < 1:
            raise DomainError("need at least one individual and one SNP")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")

    def locus_h2(self) -> dict:
        """Per-mode locus heritability.

        Additive loci get ``scale * h2 / n_causal``; dominant and recessive loci
        share the remainder equally so the loci still sum to ``total_h2``.
        """
        n_a, n_d, n_r = self.causal_split
        base = self.total_h2 / self.n_causal if self.n_causal else 0.0
        scale = _ADDITIVE_SCALE[self.h2_rule]
        boost = 1.0 if n_d + n_r == 0 else (self.n_causal - scale * n_a) / (n_d + n_r)
        return {
            GeneticModel.ADDITIVE: scale * base,
            GeneticModel.DOMINANT: boost * base,
            GeneticModel.RECESSIVE: boost * base,
        }


STUDIES = ("1", "2", "3a", "3b")


def study_config(study: str, **overrides) -> SimConfig:
    """Desk-scale defaults for the named study; keyword overrides replace fields."""
    if study not in STUDIES:
        raise DomainError(f"study must be one of {STUDIES}, got {study!r}")
    base = dict(n_individuals=20000, n_snps=50000, n_causal=100, causal_split=(34, 33, 33),
                total_h2=0.4, h2_rule="uniform")
    if study == "1":
        base.update(n_individuals=843, n_causal=0, causal_split=(0, 0, 0))
    elif study == "3a":
        base.update(h2_rule="additive_halved")
    elif study == "3b":
        base.update(h2_rule="additive_quartered")
    base.update(overrides)
    return SimConfig(**base)


@dataclass(frozen=True)
class CausalSpec:
    snp_index: int
    mode: GeneticModel
    maf: float
    h2: float
    a: float
    d: float


@dataclass(frozen=True, eq=False)
class TruthTable:
    """``modes[j]`` is the causal mode (GeneticModel value) of SNP ``j`` or -1."""

    modes: np.ndarray

    @property
    def is_causal(self) -> np.ndarray:
        return self.modes >= 0

    @property
    def n_causal(self) -> int:
        return int(np.sum(self.is_causal))

    def __len__(self) -> int:
        return len(self.modes)


@dataclass(frozen=True, eq=False)
class StudyPlan:
    config: SimConfig
    mafs: np.ndarray
    causal: tuple
    truth: TruthTable


def draw_mafs(config: SimConfig, start: int = 0, stop: int | None = None) -> np.ndarray:
    stop = config.n_snps if stop is None else stop
    return np.array([draw_maf(substream(config.seed, MAF, j), config.maf_beta, config.maf_floor)
                     for j in range(start, stop)])


def plan_study(config: SimConfig) -> StudyPlan:
    """MAFs for every SNP plus the causal SNPs with their modes and effect sizes."""
    mafs = draw_mafs(config)
    rng = substream(config.seed, CAUSAL)
    chosen = rng.choice(config.n_snps, size=config.n_causal, replace=False)
    modes = np.full(config.n_snps, -1, dtype=np.int8)
    h2 = config.locus_h2()
    causal = []
    k = 0
    for mode, count in zip(CAUSAL_MODES, config.causal_split):
        for j in chosen[k:k + count]:
            a, d = effect_size(h2[mode], mafs[j], mode)
            causal.append(CausalSpec(int(j), mode, float(mafs[j]), h2[mode], a, d))
            modes[j] = int(mode)
        k += count
    causal.sort(key=lambda c: c.snp_index)
    return StudyPlan(config, mafs, tuple(causal), TruthTable(modes))


def genotype_block(config: SimConfig, mafs: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Dosages of SNPs ``start:stop`` (``mafs`` indexed by absolute SNP index)."""
    out = np.empty((stop - start, config.n_individuals), dtype=np.int8)
    for r, j in enumerate(range(start, stop)):
        out[r] = genotypes_hwe(mafs[j], config.n_individuals, substream(config.seed, GENO, j))
    return out


def simulate_phenotypes(causal, genotypes, rng_or_seed) -> np.ndarray:
    """Sum of per-locus draws ``N(a_j * G_ij, 1 / n_causal)`` over causal loci.

    ``genotypes[k]`` holds the dosages of ``causal[k]``. ``rng_or_seed`` is a
    Generator (one stream for all loci) or an int seed (per-locus substreams).
    """
    causal = list(causal)
    g = np.asarray(genotypes)
    if g.ndim != 2 or g.shape[0] != len(causal):
        raise DomainError("need one genotype row per causal SNP")
    n = g.shape[1]
    if not causal:
        return np.zeros(n)
    sd = math.sqrt(1.0 / len(causal))
    y = np.zeros(n)
    for k, locus in enumerate(causal):
        rng = (substream(rng_or_seed, NOISE, locus.snp_index)
               if isinstance(rng_or_seed, (int, np.integer)) else rng_or_seed)
        y += rng.normal(locus.a * causal_coding(locus.mode, g[k]), sd)
    return y


def study_trait(plan: StudyPlan) -> np.ndarray:
    cfg = plan.config
    geno = np.array([genotype_block(cfg, plan.mafs, c.snp_index, c.snp_index + 1)[0]
                     for c in plan.causal]).reshape(len(plan.causal), cfg.n_individuals)
    return simulate_phenotypes(plan.causal, geno, cfg.seed)


def iter_genotype_blocks(plan: StudyPlan, block: int = DEFAULT_BLOCK):
    cfg = plan.config
    for a in range(0, cfg.n_snps, block):
        b = min(a + block, cfg.n_snps)
        yield a, b, genotype_block(cfg, plan.mafs, a, b)


def snp_names(start: int, stop: int) -> list:
    return [f"snp{j}" for j in range(start, stop)]


def run_association_study(config: SimConfig, prior: NormalGammaPrior | None = None,
                          block: int = DEFAULT_BLOCK):
    """Generate a Study 2/3 dataset block by block and scan it with both methods.

    Returns ``(ScanResult, StudyPlan, trait)``; genotypes are never held in full.
    """
    prior = prior or NormalGammaPrior.default()
    plan = plan_study(config)
    trait = study_trait(plan)
    opts = ScanOptions(run_freq_baseline=True, block_size=block)
    parts = [scan_block(snp_names(a, b), g, trait, prior, opts)
             for a, b, g in iter_genotype_blocks(plan, block)]
    return ScanResult.concat(parts), plan, trait


# --------------------------------------------------------------------------
# Study 1: permutation null
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PermutationReport:
    """Per-permutation hit counts at each threshold; rows are permutations."""

    n_snps: int
    bf_thresholds: tuple
    p_thresholds: tuple
    bf_hits: np.ndarray
    p_hits: np.ndarray

    def median_rate(self, kind: str) -> np.ndarray:
        hits = self.bf_hits if kind == "bf" else self.p_hits
        return np.median(hits, axis=0) / self.n_snps

    def median_count(self, kind: str) -> np.ndarray:
        hits = self.bf_hits if kind == "bf" else self.p_hits
        return np.median(hits, axis=0)


PERM_BF_THRESHOLDS = (100.0, 500.0, 1000.0, 1500.0, 3000.0, 5000.0)
PERM_P_THRESHOLDS = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)


def permutation_traits(trait, reps: int, seed: int) -> np.ndarray:
    """``(n, reps)`` matrix whose column ``r`` is permutation ``r`` of ``trait``."""
    return np.column_stack([permute_trait(trait, substream(seed, PERM, r)) for r in range(reps)])


def permutation_scan(dosages, trait, reps: int, seed: int, prior: NormalGammaPrior | None = None,
                     bf_thresholds=PERM_BF_THRESHOLDS, p_thresholds=PERM_P_THRESHOLDS,
                     block: int = 512, genotypic_test: str = "indicators") -> PermutationReport:
    """Count BF and p-value hits per trait permutation over a fixed genotype set.

    ``dosages`` is an ``(m, n)`` array or an iterable of such blocks. Class
    counts do not change under permutation, so each block's class sums for all
    permutations come from one indicator-matrix product.
    """
    prior = prior or NormalGammaPrior.default()
    ys = permutation_traits(trait, reps, seed)
    log_bf = np.log(np.asarray(bf_thresholds, dtype=np.float64))
    p_cut = np.asarray(p_thresholds, dtype=np.float64)
    bf_hits = np.zeros((reps, len(log_bf)), dtype=np.int64)
    p_hits = np.zeros((reps, len(p_cut)), dtype=np.int64)
    opts = ScanOptions(run_freq_baseline=True, genotypic_test=genotypic_test)
    blocks = [dosages] if isinstance(dosages, np.ndarray) else dosages
    m_total = 0
    for big in blocks:
        big = np.asarray(big, dtype=np.int8)
        for a in range(0, big.shape[0], block):
            g = big[a:a + block]
            m = g.shape[0]
            counts, sums, yty = kernels.accumulate_multi(g, ys)
            flat_counts = np.repeat(counts, reps, axis=0)
            flat_sums = sums.transpose(0, 2, 1).reshape(m * reps, 3)
            res = scan_stats([""] * (m * reps), flat_counts, flat_sums, yty.reshape(m * reps),
                             prior, opts)
            lbf = res.log_bf_max.reshape(m, reps)
            mp = res.min_p.reshape(m, reps)
            bf_hits += (lbf[:, :, None] > log_bf).sum(axis=0)
            p_hits += (mp[:, :, None] < p_cut).sum(axis=0)
            m_total += m
    return PermutationReport(m_total, tuple(bf_thresholds), tuple(p_thresholds), bf_hits, p_hits)


def run_permutation_study(config: SimConfig, reps: int, trait=None,
                          prior: NormalGammaPrior | None = None, block: int = 512,
                          **kwargs) -> PermutationReport:
    """Study 1 on simulated null genotypes; the base trait defaults to N(0, 1) draws."""
    plan = plan_study(config)
    if trait is None:
        trait = substream(config.seed, TRAIT).standard_normal(config.n_individuals)
    gen = (g for _, _, g in iter_genotype_blocks(plan, 8192))
    return permutation_scan(gen, trait, reps, config.seed, prior, block=block, **kwargs)


# --------------------------------------------------------------------------
# Scoring
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalRow:
    threshold: float
    matched_log_bf: float
    fp_count: int
    power_any_bayes: int
    power_any_freq: int
    correct_bayes: tuple
    correct_freq: tuple
    fp_count_bayes: int

    @property
    def matched_bf(self) -> float:
        try:
            return math.exp(self.matched_log_bf)
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class EvalReport:
    """Matched-threshold power table. Counts, not rates; ``n_snps`` gives the rate base."""

    rows: tuple
    n_snps: int
    n_null: int
    n_causal: int

    def fp_rate(self, i: int) -> float:
        return self.rows[i].fp_count / self.n_snps

    def correct_dr(self, i: int, method: str) -> int:
        c = self.rows[i].correct_bayes if method == "bayes" else self.rows[i].correct_freq
        return c[1] + c[2]


def matched_cutoff(null_log_bf: np.ndarray, k: int) -> float:
    """Log-BF cutoff letting through at most ``k`` null SNPs under ``log_bf > cutoff``.

    This is the (k+1)-th largest null value, or ``-inf`` when there are at most
    ``k`` null SNPs.
    """
    v = np.sort(np.asarray(null_log_bf, dtype=np.float64))[::-1]
    if k >= v.size:
        return -math.inf
    return float(v[k])


def _columns(records):
    if isinstance(records, ScanResult):
        return records
    recs = list(records)
    n = len(recs)
    best = np.array([int(r.best_model) for r in recs], dtype=np.int8).reshape(n)
    lbf = np.array([r.log_bf_max for r in recs], dtype=np.float64).reshape(n)
    has = n > 0 and recs[0].min_p is not None
    mp = np.array([r.min_p if r.min_p is not None else np.nan for r in recs]).reshape(n)
    fb = np.array([int(r.freq_best) if r.freq_best is not None else -1 for r in recs],
                  dtype=np.int8).reshape(n)
    return ScanResult([r.snp_id for r in recs], np.zeros(n, np.int64), np.zeros((n, 6)), lbf, best,
                      np.zeros((n, 3)), np.zeros(n, np.uint8), mp if has else None,
                      fb if has else None)


def evaluate(bayes, freq, truth: TruthTable, p_thresholds=STUDY2_P_THRESHOLDS) -> EvalReport:
    """Match BF cutoffs to frequentist false-positive counts and score both methods.

    ``bayes`` and ``freq`` are :class:`ScanResult` objects (or record lists);
    they may be the same object. Correct-model counts are per causal mode
    (A, D, R) and require an exact match; a genotypic call counts only as a
    detection.
    """
    b = _columns(bayes)
    f = _columns(freq)
    m = len(truth)
    if len(b) != m or len(f) != m:
        raise AlignmentError(f"records ({len(b)}, {len(f)}) and truth ({m}) differ in length")
    if not f.has_freq:
        raise DomainError("frequentist records carry no p-values")
    causal = truth.is_causal
    null = ~causal
    rows = []
    for t in p_thresholds:
        f_hit = f.min_p < t
        k = int(np.sum(f_hit & null))
        cut = matched_cutoff(b.log_bf_max[null], k)
        b_hit = b.log_bf_max > cut
        correct_b = tuple(int(np.sum(b_hit & (truth.modes == int(mode)) & (b.best_model == int(mode))))
                          for mode in CAUSAL_MODES)
        correct_f = tuple(int(np.sum(f_hit & (truth.modes == int(mode)) & (f.freq_best == int(mode))))
                          for mode in CAUSAL_MODES)
        rows.append(EvalRow(float(t), cut, k, int(np.sum(b_hit & causal)), int(np.sum(f_hit & causal)),
                            correct_b, correct_f, int(np.sum(b_hit & null))))
    return EvalReport(tuple(rows), m, int(np.sum(null)), int(np.sum(causal)))


REPORT_COLUMNS = ("threshold", "matched_bf", "fp_count", "power_any_bayes", "power_any_freq",
                  "correct_A_bayes", "correct_D_bayes", "correct_R_bayes",
                  "correct_A_freq", "correct_D_freq", "correct_R_freq")


def write_report(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(REPORT_COLUMNS) + "\n")
        for r in report.rows:
            vals = [format(r.threshold, ".17g"), format(r.matched_bf, ".17g"), str(r.fp_count),
                    str(r.power_any_bayes), str(r.power_any_freq),
                    *map(str, r.correct_bayes), *map(str, r.correct_freq)]
            fh.write("\t".join(vals) + "\n")
