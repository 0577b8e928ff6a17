"""Least-squares comparator: five genetic-model regressions and min-p selection.

:func:`ols_fit` is a general small-``k`` OLS used as the per-SNP reference;
genome scans call :func:`bayespoly.kernels.frequentist`, which computes the
same p-values from genotype-class sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularMatrixError
from .genetics import MISSING, GeneticModel, design_matrix, genotypic_indicator_design
from .mathkit import betainc_comp_scalar, cholesky, spd_inverse, spd_solve

P_KEYS = ("G_het", "G_hom", "A", "D", "R", "C")

_RANK_TOL = 1e-10
_PERFECT_RTOL = 1e-12


def p_value_t(t: float, df: float) -> float:
    """Two-sided Student-t p-value, ``I_{df/(df+t^2)}(df/2, 1/2)``."""
    if not df >= 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df!r}")
    t = float(t)
    if math.isinf(t):
        return 0.0
    if math.isnan(t):
        raise DomainError("t statistic is NaN")
    t2 = t * t
    return float(betainc_comp_scalar(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2)))


@dataclass(frozen=True, eq=False)
class OlsFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    residual_df: int
    t_stats: np.ndarray
    p_values: np.ndarray
    rss: float = math.nan
    flags: frozenset = frozenset()


def _degenerate_fit(k: int, df: int) -> OlsFit:
    nan = np.full(k, np.nan)
    return OlsFit(nan, nan.copy(), df, nan.copy(), np.ones(k), math.nan, frozenset({"degenerate_freq"}))


def ols_fit(design, trait) -> OlsFit:
    """Ordinary least squares with two-sided t-tests on every coefficient.

    Rank-deficient designs return p = 1 with the ``degenerate_freq`` flag. A
    zero residual variance returns p = 0 for non-zero coefficients (1 for zero
    ones) with the ``perfect_fit`` flag.
    """
    x = np.asarray(design, dtype=np.float64)
    y = np.asarray(trait, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise DomainError(f"design {x.shape} and trait {y.shape} do not match")
    n, k = x.shape
    df = n - k
    if df < 1:
        return _degenerate_fit(k, df)
    xtx = x.T @ x
    try:
        low = cholesky(xtx)
    except SingularMatrixError:
        return _degenerate_fit(k, df)
    if np.any(np.diag(low) ** 2 <= _RANK_TOL * np.maximum(np.diag(xtx), 1.0)):
        return _degenerate_fit(k, df)
    coef = spd_solve(xtx, x.T @ y)
    resid = y - x @ coef
    rss = float(resid @ resid)
    syy = float(np.sum((y - y.mean()) ** 2))
    diag_inv = np.diag(spd_inverse(xtx))
    if rss <= _PERFECT_RTOL * syy or syy == 0.0:
        se = np.zeros(k)
        nonzero = np.abs(coef) > 1e-12 * max(1.0, float(np.max(np.abs(coef))))
        t = np.where(nonzero, np.copysign(np.inf, coef), 0.0)
        p = np.where(nonzero, 0.0, 1.0)
        return OlsFit(coef, se, df, t, p, rss, frozenset({"perfect_fit"}))
    se = np.sqrt(rss / df * diag_inv)
    t = coef / se
    p = np.array([p_value_t(ti, df) for ti in t])
    return OlsFit(coef, se, df, t, p, rss)


@dataclass(frozen=True, eq=False)
class FreqScanRecord:
    """Per-model p-values, keyed by :data:`P_KEYS`, and the min-p choice."""

    p_values: dict
    min_p: float
    best_model: GeneticModel | None
    flags: frozenset = field(default_factory=frozenset)


def min_p_scan(dosages, trait, genotypic_test: str = "indicators") -> FreqScanRecord:
    """Fit the genotypic, additive, dominant, recessive and co-dominant regressions.

    The genotypic model contributes its two indicator-coefficient p-values
    (or twice the joint F-test p-value when ``genotypic_test="joint"``).
    The winner is the smallest p-value; ties go to A, D, R, C, G in that order.
    """
    g = np.asarray(dosages)
    y = np.asarray(trait, dtype=np.float64)
    if g.shape != y.shape:
        raise DomainError("dosages and trait differ in length")
    keep = g != MISSING
    g = g[keep].astype(np.int64)
    y = y[keep]
    if g.size < 4:
        raise DomainError(f"need at least 4 non-missing individuals, got {g.size}")
    flags = set()
    p = {}
    fits = {}
    for key, model in zip(P_KEYS[2:], (GeneticModel.ADDITIVE, GeneticModel.DOMINANT,
                                       GeneticModel.RECESSIVE, GeneticModel.CODOMINANT)):
        fit = ols_fit(design_matrix(model, g), y)
        fits[model] = fit
        p[key] = float(fit.p_values[1])
        flags |= fit.flags
    geno = ols_fit(genotypic_indicator_design(g), y)
    flags |= geno.flags
    if genotypic_test == "joint" and "degenerate_freq" not in geno.flags:
        pj = _joint_f_p(geno, y)
        p["G_het"] = p["G_hom"] = pj
    else:
        p["G_het"], p["G_hom"] = float(geno.p_values[1]), float(geno.p_values[2])
    per_model = [
        (p["A"], GeneticModel.ADDITIVE, fits[GeneticModel.ADDITIVE]),
        (p["D"], GeneticModel.DOMINANT, fits[GeneticModel.DOMINANT]),
        (p["R"], GeneticModel.RECESSIVE, fits[GeneticModel.RECESSIVE]),
        (p["C"], GeneticModel.CODOMINANT, fits[GeneticModel.CODOMINANT]),
        (min(p["G_het"], p["G_hom"]), GeneticModel.GENOTYPIC, geno),
    ]
    usable = [(pv, m) for pv, m, f in per_model if "degenerate_freq" not in f.flags]
    if not usable:
        return FreqScanRecord({k: p[k] for k in P_KEYS}, 1.0, None, frozenset(flags))
    min_p, best = usable[0]
    for pv, m in usable[1:]:
        if pv < min_p:
            min_p, best = pv, m
    return FreqScanRecord({k: p[k] for k in P_KEYS}, min_p, best, frozenset(flags))


def _joint_f_p(fit: OlsFit, y: np.ndarray) -> float:
    syy = float(np.sum((y - y.mean()) ** 2))
    ess = syy - fit.rss
    if "perfect_fit" in fit.flags:
        return 0.0 if ess > 0.0 else 1.0
    tot = fit.rss + ess
    return float(betainc_comp_scalar(0.5 * fit.residual_df, 1.0, fit.rss / tot, ess / tot))
