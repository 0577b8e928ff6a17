"""Conjugate normal-gamma evidence for the polynomial model and its five sub-models.

One 3x3 conjugate fit of ``E[y] = b0 + b1*g + b2*g^2`` yields the marginal
likelihood of every genetic model: the genotypic model is an invertible
reparameterisation (identical evidence), and each one-slope model is the
polynomial Gaussian conditioned on ``theta[2] == 0`` after the map
``theta = omega @ beta``.

The functions here are the readable per-SNP reference. Genome scans go
through :mod:`bayespoly.kernels`, which evaluates the same quantities for
whole blocks of SNPs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import DomainError, EmptyDataError, NumericGuardError, SingularMatrixError
from .genetics import (
    ALTERNATIVE_MODELS,
    CONSTRAINED_MODELS,
    MISSING,
    GeneticModel,
    omega,
    omega_inverse,
)
from .mathkit import LOG_2PI, cholesky, log_det_spd, log_gamma, spd_inverse, spd_solve


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NormalGammaPrior:
    """``tau ~ Gamma(shape=a1, scale=a2)``, ``beta | tau ~ N(beta0, (tau*r0)^-1)``."""

    beta0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r0: np.ndarray = field(default_factory=lambda: np.eye(3))
    a1: float = 1.0
    a2: float = 1.0

    def __post_init__(self):
        beta0 = _frozen(self.beta0)
        r0 = _frozen(self.r0)
        if beta0.shape != (3,) or r0.shape != (3, 3):
            raise DomainError("prior needs a 3-vector beta0 and a 3x3 r0")
        if not (np.all(np.isfinite(beta0)) and np.all(np.isfinite(r0))):
            raise DomainError("prior parameters must be finite")
        cholesky(r0)  # raises unless SPD
        if not (self.a1 > 0 and self.a2 > 0 and math.isfinite(self.a1) and math.isfinite(self.a2)):
            raise DomainError(f"a1 and a2 must be positive, got {self.a1!r}, {self.a2!r}")
        object.__setattr__(self, "beta0", beta0)
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "a1", float(self.a1))
        object.__setattr__(self, "a2", float(self.a2))

    @classmethod
    def default(cls, r0_scale: float = 1.0) -> NormalGammaPrior:
        """Zero mean, ``r0 = r0_scale * I``, ``a1 = a2 = 1``."""
        if not r0_scale > 0:
            raise DomainError(f"r0_scale must be positive, got {r0_scale!r}")
        return cls(np.zeros(3), r0_scale * np.eye(3), 1.0, 1.0)

    @property
    def log_norm(self) -> float:
        """``-a1*ln(a2) - lnGamma(a1)``, the prior's gamma normaliser."""
        return -self.a1 * math.log(self.a2) - log_gamma(self.a1)

    def null_slice(self) -> tuple[float, float]:
        """Intercept prior (mean, precision) given zero linear and quadratic terms."""
        r = self.r0[0, 0]
        m = self.beta0[0] + (self.r0[0, 1] * self.beta0[1] + self.r0[0, 2] * self.beta0[2]) / r
        return float(m), float(r)

    @cached_property
    def tables(self) -> EvidenceTables:
        return EvidenceTables.from_prior(self)


@dataclass(frozen=True)
class SnpSuffStats:
    """Per-genotype-class counts and trait sums, plus ``y'y``, for one SNP.

    Every design row is a function of the dosage class, so these seven numbers
    carry ``X'X``, ``X'y`` and ``y'y`` for all models.
    """

    counts: tuple[int, int, int]
    sums: tuple[float, float, float]
    yty: float

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != 3 or min(counts) < 0:
            raise DomainError(f"counts must be three non-negative integers, got {self.counts!r}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "sums", tuple(float(s) for s in self.sums))
        object.__setattr__(self, "yty", float(self.yty))

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def genotype_counts(self) -> tuple[int, int, int]:
        return self.counts

    @property
    def sum_y(self) -> float:
        return self.sums[0] + self.sums[1] + self.sums[2]

    @property
    def xtx(self) -> np.ndarray:
        _, c1, c2 = self.counts
        n = self.n
        return np.array([
            [n, c1 + 2 * c2, c1 + 4 * c2],
            [c1 + 2 * c2, c1 + 4 * c2, c1 + 8 * c2],
            [c1 + 4 * c2, c1 + 8 * c2, c1 + 16 * c2],
        ], dtype=np.float64)

    @property
    def xty(self) -> np.ndarray:
        _, s1, s2 = self.sums
        return np.array([self.sum_y, s1 + 2 * s2, s1 + 4 * s2])

    def __add__(self, other: SnpSuffStats) -> SnpSuffStats:
        return SnpSuffStats(
            tuple(a + b for a, b in zip(self.counts, other.counts)),
            tuple(a + b for a, b in zip(self.sums, other.sums)),
            self.yty + other.yty,
        )

    @classmethod
    def empty(cls) -> SnpSuffStats:
        return cls((0, 0, 0), (0.0, 0.0, 0.0), 0.0)


def accumulate_stats(dosages, trait) -> SnpSuffStats:
    """Reduce one SNP's dosages and the trait to :class:`SnpSuffStats`.

    Missing dosages (negative) drop the paired trait value.
    """
    g = np.asarray(dosages)
    y = np.asarray(trait, dtype=np.float64)
    if g.shape != y.shape or g.ndim != 1:
        raise DomainError(f"dosages and trait must be equal-length vectors, got {g.shape} and {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DomainError("trait values must be finite")
    g = np.where(g == MISSING, MISSING, g).astype(np.int64)
    if np.any((g != MISSING) & ((g < 0) | (g > 2))):
        raise DomainError("dosages must be 0, 1, 2 or missing")
    keep = g >= 0
    if not keep.any():
        raise EmptyDataError("no non-missing individuals")
    counts, sums, yty = kernels.accumulate(g[None, :].astype(np.int8), y)
    return SnpSuffStats(tuple(counts[0]), tuple(sums[0]), yty[0])


@dataclass(frozen=True, eq=False)
class PolynomialPosterior:
    r_n: np.ndarray
    beta_n: np.ndarray
    a1n: float
    a2n: float
    log_ml: float
    n: int


@dataclass(frozen=True, eq=False)
class ConstrainedGaussian:
    """``alpha | tau ~ N(mu, sigma_inv / tau)``; ``sigma_inv`` is a covariance scale."""

    model: GeneticModel
    mu: np.ndarray
    sigma_inv: np.ndarray

    @property
    def precision(self) -> np.ndarray:
        return spd_inverse(self.sigma_inv)


@dataclass(frozen=True, eq=False)
class ModelEvidence:
    model: GeneticModel
    log_ml: float
    point_estimates: np.ndarray
    log_bf_vs_null: float = math.nan
    flags: frozenset = frozenset()


def _log_ml(n, logdet_prior, logdet_post, a1n, inv_a2n, prior: NormalGammaPrior) -> float:
    return (-0.5 * n * LOG_2PI + 0.5 * (logdet_prior - logdet_post)
            - a1n * math.log(inv_a2n) + log_gamma(a1n) + prior.log_norm)


def _inv_a2n(yty, quad_post, quad_prior, prior, model=None) -> float:
    v = 0.5 * (yty - quad_post + quad_prior) + 1.0 / prior.a2
    if not v > 0.0:
        where = f" ({GeneticModel(model).name})" if model is not None else ""
        raise NumericGuardError(f"non-positive a2n denominator {v!r}{where}; sufficient statistics are inconsistent")
    return v


def fit_polynomial(stats: SnpSuffStats, prior: NormalGammaPrior | None = None) -> PolynomialPosterior:
    """Conjugate update of the 3-parameter polynomial regression."""
    prior = prior or NormalGammaPrior.default()
    r_n = prior.r0 + stats.xtx
    rb = prior.r0 @ prior.beta0 + stats.xty
    beta_n = spd_solve(r_n, rb)
    quad_prior = float(prior.beta0 @ prior.r0 @ prior.beta0)
    inv_a2n = _inv_a2n(stats.yty, float(beta_n @ rb), quad_prior, prior)
    a1n = prior.a1 + 0.5 * stats.n
    log_ml = _log_ml(stats.n, log_det_spd(prior.r0), log_det_spd(r_n), a1n, inv_a2n, prior)
    return PolynomialPosterior(r_n, beta_n, a1n, 1.0 / inv_a2n, log_ml, stats.n)


def transform_gaussian(mean, cov_scale, w) -> tuple[np.ndarray, np.ndarray]:
    """Push ``N(mean, cov_scale)`` through ``x -> w @ x``."""
    w = np.asarray(w, dtype=np.float64)
    cov = w @ np.asarray(cov_scale, dtype=np.float64) @ w.T
    return w @ np.asarray(mean, dtype=np.float64), 0.5 * (cov + cov.T)


def condition_theta2_zero(mean, cov_scale, model: GeneticModel | None = None) -> ConstrainedGaussian:
    """Condition a trivariate Gaussian on its last coordinate being zero."""
    theta = np.asarray(mean, dtype=np.float64)
    s = np.asarray(cov_scale, dtype=np.float64)
    s33 = s[2, 2]
    if not s33 > 0.0:
        raise SingularMatrixError(2, model)
    gain = s[:2, 2] / s33
    mu = theta[:2] - gain * theta[2]
    sigma_inv = s[:2, :2] - np.outer(gain, s[2, :2])
    sigma_inv = 0.5 * (sigma_inv + sigma_inv.T)
    try:
        cholesky(sigma_inv)
    except SingularMatrixError as exc:
        raise SingularMatrixError(exc.pivot, model) from None
    return ConstrainedGaussian(model, mu, sigma_inv)


def constrained_prior(model: GeneticModel, prior: NormalGammaPrior) -> ConstrainedGaussian:
    """Prior on ``(alpha0, alpha1)`` induced by conditioning the polynomial prior."""
    mean, cov = transform_gaussian(prior.beta0, spd_inverse(prior.r0), omega(model))
    return condition_theta2_zero(mean, cov, GeneticModel(model))


def degeneracy_flags(stats: SnpSuffStats) -> frozenset:
    c = np.array([stats.counts], dtype=np.int64)
    bits = int(kernels.stat_flags(c)[0])
    return frozenset(name for bit, name in kernels.FLAG_NAMES if bits & bit)


def evidence_constrained(model: GeneticModel, stats: SnpSuffStats, prior: NormalGammaPrior,
                         poly: PolynomialPosterior) -> ModelEvidence:
    """Evidence of a one-slope model by conditioning the polynomial fit on ``theta[2] = 0``."""
    model = GeneticModel(model)
    if model not in CONSTRAINED_MODELS:
        raise DomainError(f"{model.name} is not a constrained model")
    w = omega(model)
    pri = constrained_prior(model, prior)
    mean_n, cov_n = transform_gaussian(poly.beta_n, spd_inverse(poly.r_n), w)
    post = condition_theta2_zero(mean_n, cov_n, model)
    sig0 = pri.precision
    sign = post.precision
    inv_a2n = _inv_a2n(stats.yty, float(post.mu @ sign @ post.mu), float(pri.mu @ sig0 @ pri.mu),
                       prior, model)
    log_ml = _log_ml(stats.n, log_det_spd(sig0), log_det_spd(sign), poly.a1n, inv_a2n, prior)
    return ModelEvidence(model, log_ml, post.mu, flags=degeneracy_flags(stats))


def evidence_genotypic(poly: PolynomialPosterior) -> ModelEvidence:
    """Genotypic evidence: the polynomial evidence itself, with ``gamma_n = omega @ beta_n``."""
    gamma = omega(GeneticModel.GENOTYPIC) @ poly.beta_n
    return ModelEvidence(GeneticModel.GENOTYPIC, poly.log_ml, gamma)


def evidence_null(stats: SnpSuffStats, prior: NormalGammaPrior) -> ModelEvidence:
    """Intercept-only conjugate fit."""
    m, r = prior.null_slice()
    r_n = r + stats.n
    b = r * m + stats.sum_y
    mean_n = b / r_n
    inv_a2n = _inv_a2n(stats.yty, mean_n * b, r * m * m, prior, GeneticModel.NULL)
    log_ml = _log_ml(stats.n, math.log(r), math.log(r_n), prior.a1 + 0.5 * stats.n, inv_a2n, prior)
    return ModelEvidence(GeneticModel.NULL, log_ml, np.array([mean_n]))


def select_model(evidences) -> tuple[GeneticModel, float]:
    """Best alternative by log evidence (ties: A, D, R, C, G) and its log BF over the null."""
    by_model = {GeneticModel(e.model): e for e in evidences}
    null = by_model[GeneticModel.NULL].log_ml
    best = None
    for model in ALTERNATIVE_MODELS:
        e = by_model[model]
        if best is None or e.log_ml > best.log_ml:
            best = e
    return best.model, best.log_ml - null


def evaluate_all(stats: SnpSuffStats, prior: NormalGammaPrior | None = None) -> dict:
    """All six :class:`ModelEvidence` objects for one SNP, keyed by model."""
    prior = prior or NormalGammaPrior.default()
    poly = fit_polynomial(stats, prior)
    out = {m: evidence_constrained(m, stats, prior, poly) for m in CONSTRAINED_MODELS}
    out[GeneticModel.GENOTYPIC] = evidence_genotypic(poly)
    out[GeneticModel.NULL] = evidence_null(stats, prior)
    null = out[GeneticModel.NULL].log_ml
    flags = degeneracy_flags(stats)
    return {
        m: ModelEvidence(m, e.log_ml, e.point_estimates, e.log_ml - null, flags)
        for m, e in out.items()
    }


@dataclass(frozen=True, eq=False)
class EvidenceTables:
    """Prior-dependent constants consumed by :func:`bayespoly.kernels.evidence`."""

    r0: np.ndarray
    rb: np.ndarray
    quad0: float
    logdet_r0: float
    a1: float
    inv_a2: float
    const: float
    omegas: np.ndarray
    omega_invs: np.ndarray
    logdet_sig0: np.ndarray
    quad_mu0: np.ndarray
    omega_g: np.ndarray
    r_null: float
    m_null: float

    @classmethod
    def from_prior(cls, prior: NormalGammaPrior) -> EvidenceTables:
        logdet_sig0 = np.empty(4)
        quad_mu0 = np.empty(4)
        for j, model in enumerate(CONSTRAINED_MODELS):
            pri = constrained_prior(model, prior)
            prec = pri.precision
            logdet_sig0[j] = log_det_spd(prec)
            quad_mu0[j] = pri.mu @ prec @ pri.mu
        m_null, r_null = prior.null_slice()
        return cls(
            r0=np.ascontiguousarray(prior.r0),
            rb=prior.r0 @ prior.beta0,
            quad0=float(prior.beta0 @ prior.r0 @ prior.beta0),
            logdet_r0=log_det_spd(prior.r0),
            a1=prior.a1,
            inv_a2=1.0 / prior.a2,
            const=prior.log_norm,
            omegas=np.stack([omega(m) for m in CONSTRAINED_MODELS]),
            omega_invs=np.stack([omega_inverse(m) for m in CONSTRAINED_MODELS]),
            logdet_sig0=logdet_sig0,
            quad_mu0=quad_mu0,
            omega_g=omega(GeneticModel.GENOTYPIC),
            r_null=r_null,
            m_null=m_null,
        )

    def kernel_args(self) -> tuple:
        return (self.r0, self.rb, self.quad0, self.logdet_r0, self.a1, self.inv_a2, self.const,
                self.omegas, self.omega_invs, self.logdet_sig0, self.quad_mu0, self.omega_g,
                self.r_null, self.m_null)
