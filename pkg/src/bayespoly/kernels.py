"""Per-SNP hot kernels for the genome scan.

Every kernel has two execution paths over a block of SNPs:

* a per-SNP loop compiled with numba (``*_loop``), and
* a vectorised numpy driver (``*_vec``) that feeds whole columns of the block
  through the same elementwise formulas.

``accumulate``, ``evidence`` and ``frequentist`` dispatch on
:data:`bayespoly._accel.USE_NUMBA`. Summary statistics per SNP are the genotype
class counts ``(c0, c1, c2)``, the class trait sums ``(s0, s1, s2)`` and the
sum of squared trait values over non-missing samples; every model's design
row is a function of the genotype class, so these nine numbers determine
every Bayesian and least-squares quantity.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import jit, py
from .mathkit import (
    LOG_2PI,
    _lgamma_np,
    betainc_comp_scalar,
    betainc_vec,
    chol3,
    chol3_logdet,
    chol3_solve,
    congruence3,
    lgamma_kernel,
)

FLAG_MONOMORPHIC = 1
FLAG_NO_HET = 2
FLAG_NO_HOM_MINOR = 4
FLAG_PERFECT_FIT = 8
FLAG_DEGENERATE_FREQ = 16

FLAG_NAMES = (
    (FLAG_MONOMORPHIC, "monomorphic"),
    (FLAG_NO_HET, "no_het"),
    (FLAG_NO_HOM_MINOR, "no_hom_minor"),
    (FLAG_PERFECT_FIT, "perfect_fit"),
    (FLAG_DEGENERATE_FREQ, "degenerate_freq"),
)

# Slope-column coding per dosage for A, D, R, C (rows follow GeneticModel order).
CODINGS = np.array([
    [0.0, 1.0, 2.0],
    [0.0, 1.0, 1.0],
    [0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0],
])

GENO_INDICATORS = 0
GENO_JOINT = 1

_PERFECT_RTOL = 1e-12

# Rows scanned by accumulate(); tests use it to check for a single pass.
rows_visited = 0


# --------------------------------------------------------------------------
# Sufficient statistics
# --------------------------------------------------------------------------

@jit
def _accumulate_loop(dosages, trait, counts, sums, yty):
    m, n = dosages.shape
    for i in range(m):
        c0 = 0
        c1 = 0
        c2 = 0
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        q = 0.0
        for j in range(n):
            g = dosages[i, j]
            if g < 0:
                continue
            y = trait[j]
            q += y * y
            if g == 0:
                c0 += 1
                s0 += y
            elif g == 1:
                c1 += 1
                s1 += y
            else:
                c2 += 1
                s2 += y
        counts[i, 0] = c0
        counts[i, 1] = c1
        counts[i, 2] = c2
        sums[i, 0] = s0
        sums[i, 1] = s1
        sums[i, 2] = s2
        yty[i] = q


def _accumulate_vec(dosages, trait, counts, sums, yty):
    # Row-wise reductions rather than BLAS products: each row's sum then depends
    # only on that row, so results do not change with the block layout.
    for g in range(3):
        mask = dosages == g
        counts[:, g] = mask.sum(axis=1)
        sums[:, g] = np.where(mask, trait, 0.0).sum(axis=1)
    yty[:] = np.where(dosages >= 0, trait * trait, 0.0).sum(axis=1)


def accumulate(dosages: np.ndarray, trait: np.ndarray, use_numba: bool | None = None):
    """Class counts, class sums and ``y'y`` for each row of an int8 dosage block.

    Negative dosages are missing. Returns ``(counts, sums, yty)`` with shapes
    ``(m, 3)``, ``(m, 3)`` and ``(m,)``.
    """
    global rows_visited
    dosages = np.ascontiguousarray(dosages, dtype=np.int8)
    trait = np.ascontiguousarray(trait, dtype=np.float64)
    m = dosages.shape[0]
    counts = np.zeros((m, 3), dtype=np.int64)
    sums = np.zeros((m, 3))
    yty = np.zeros(m)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    if use_numba:
        _accumulate_loop(dosages, trait, counts, sums, yty)
    else:
        _accumulate_vec(dosages, trait, counts, sums, yty)
    rows_visited += m
    return counts, sums, yty


def accumulate_multi(dosages: np.ndarray, traits: np.ndarray):
    """Statistics of one dosage block against many traits at once.

    ``traits`` has shape ``(n_samples, r)`` (e.g. r permutations of one trait).
    Returns counts ``(m, 3)``, sums ``(m, 3, r)``, yty ``(m, r)``. Implemented
    as indicator-matrix products so BLAS does the work on either path.
    """
    global rows_visited
    dosages = np.ascontiguousarray(dosages, dtype=np.int8)
    traits = np.asarray(traits, dtype=np.float64)
    m = dosages.shape[0]
    counts = np.empty((m, 3), dtype=np.int64)
    sums = np.empty((m, 3, traits.shape[1]))
    for g in range(3):
        mask = dosages == g
        counts[:, g] = mask.sum(axis=1)
        sums[:, g, :] = mask.astype(np.float64) @ traits
    yty = (dosages >= 0).astype(np.float64) @ (traits * traits)
    rows_visited += m
    return counts, sums, yty


def stat_flags(counts: np.ndarray) -> np.ndarray:
    present = (counts > 0).sum(axis=1)
    flags = np.zeros(counts.shape[0], dtype=np.uint8)
    flags[present <= 1] |= FLAG_MONOMORPHIC
    flags[counts[:, 1] == 0] |= FLAG_NO_HET
    flags[counts[:, 2] == 0] |= FLAG_NO_HOM_MINOR
    return flags


# --------------------------------------------------------------------------
# Bayesian evidence
# --------------------------------------------------------------------------

@jit
def _poly_core(n, c1, c2, s, s1, s2, yty, r00, r01, r02, r11, r12, r22,
               rb0, rb1, rb2, quad0, logdet_r0, a1n, lg_a1n, inv_a2, const):
    n00 = r00 + n
    n01 = r01 + c1 + 2.0 * c2
    n02 = r02 + c1 + 4.0 * c2
    n11 = r11 + c1 + 4.0 * c2
    n12 = r12 + c1 + 8.0 * c2
    n22 = r22 + c1 + 16.0 * c2
    b0 = rb0 + s
    b1 = rb1 + s1 + 2.0 * s2
    b2 = rb2 + s1 + 4.0 * s2
    l00, l10, l20, l11, l21, l22 = chol3(n00, n01, n02, n11, n12, n22)
    x0, x1, x2 = chol3_solve(l00, l10, l20, l11, l21, l22, b0, b1, b2)
    logdet_rn = chol3_logdet(l00, l11, l22)
    quad_n = x0 * b0 + x1 * b1 + x2 * b2
    inv_a2n = 0.5 * (yty - quad_n + quad0) + inv_a2
    logml = (-0.5 * n * LOG_2PI + 0.5 * (logdet_r0 - logdet_rn)
             - a1n * np.log(inv_a2n) + lg_a1n + const)
    return logml, x0, x1, x2, n00, n01, n02, n11, n12, n22


@jit
def _constrained_core(w, wi, logdet_sig0, quad_mu0, n, yty, x0, x1, x2,
                      n00, n01, n02, n11, n12, n22, a1n, lg_a1n, inv_a2, const):
    # Conditioning theta = w @ beta on theta_2 = 0 in precision form: the
    # conditional precision is the leading 2x2 block of wi' Rn wi.
    th0 = w[0, 0] * x0 + w[0, 1] * x1 + w[0, 2] * x2
    th1 = w[1, 0] * x0 + w[1, 1] * x1 + w[1, 2] * x2
    th2 = w[2, 0] * x0 + w[2, 1] * x1 + w[2, 2] * x2
    p00, p01, p02, p11, p12, _ = congruence3(wi, n00, n01, n02, n11, n12, n22)
    det = p00 * p11 - p01 * p01
    mu0 = th0 + (p11 * p02 - p01 * p12) / det * th2
    mu1 = th1 + (p00 * p12 - p01 * p02) / det * th2
    quad_n = p00 * mu0 * mu0 + 2.0 * p01 * mu0 * mu1 + p11 * mu1 * mu1
    inv_a2n = 0.5 * (yty - quad_n + quad_mu0) + inv_a2
    logml = (-0.5 * n * LOG_2PI + 0.5 * (logdet_sig0 - np.log(det))
             - a1n * np.log(inv_a2n) + lg_a1n + const)
    return logml, mu0, mu1


@jit
def _null_core(n, s, yty, r, m, a1n, lg_a1n, inv_a2, const):
    rn = r + n
    b = r * m + s
    bn = b / rn
    inv_a2n = 0.5 * (yty - bn * b + r * m * m) + inv_a2
    logml = (-0.5 * n * LOG_2PI + 0.5 * (np.log(r) - np.log(rn))
             - a1n * np.log(inv_a2n) + lg_a1n + const)
    return logml, bn


@jit
def _evidence_loop(counts, sums, yty, r0, rb, quad0, logdet_r0, a1, inv_a2, const,
                   omegas, omega_invs, logdet_sig0, quad_mu0, omega_g, r_null, m_null,
                   out_logml, out_est):
    m = counts.shape[0]
    for i in range(m):
        c1 = float(counts[i, 1])
        c2 = float(counts[i, 2])
        n = float(counts[i, 0]) + c1 + c2
        s1 = sums[i, 1]
        s2 = sums[i, 2]
        s = sums[i, 0] + s1 + s2
        q = yty[i]
        a1n = a1 + 0.5 * n
        lg = lgamma_kernel(a1n)
        logml, x0, x1, x2, n00, n01, n02, n11, n12, n22 = _poly_core(
            n, c1, c2, s, s1, s2, q, r0[0, 0], r0[0, 1], r0[0, 2], r0[1, 1], r0[1, 2],
            r0[2, 2], rb[0], rb[1], rb[2], quad0, logdet_r0, a1n, lg, inv_a2, const)
        out_logml[i, 4] = logml
        for k in range(3):
            out_est[i, 4, k] = omega_g[k, 0] * x0 + omega_g[k, 1] * x1 + omega_g[k, 2] * x2
        for j in range(4):
            lm, mu0, mu1 = _constrained_core(
                omegas[j], omega_invs[j], logdet_sig0[j], quad_mu0[j], n, q, x0, x1, x2,
                n00, n01, n02, n11, n12, n22, a1n, lg, inv_a2, const)
            out_logml[i, j] = lm
            out_est[i, j, 0] = mu0
            out_est[i, j, 1] = mu1
            out_est[i, j, 2] = np.nan
        lm, bn = _null_core(n, s, q, r_null, m_null, a1n, lg, inv_a2, const)
        out_logml[i, 5] = lm
        out_est[i, 5, 0] = bn
        out_est[i, 5, 1] = np.nan
        out_est[i, 5, 2] = np.nan


def _evidence_vec(counts, sums, yty, r0, rb, quad0, logdet_r0, a1, inv_a2, const,
                  omegas, omega_invs, logdet_sig0, quad_mu0, omega_g, r_null, m_null,
                  out_logml, out_est):
    poly_core = py(_poly_core)
    constrained_core = py(_constrained_core)
    null_core = py(_null_core)
    c1 = counts[:, 1].astype(np.float64)
    c2 = counts[:, 2].astype(np.float64)
    n = counts[:, 0] + c1 + c2
    s1 = sums[:, 1]
    s2 = sums[:, 2]
    s = sums[:, 0] + s1 + s2
    a1n = a1 + 0.5 * n
    lg = _lgamma_np(a1n)
    with np.errstate(invalid="ignore", divide="ignore"):
        logml, x0, x1, x2, n00, n01, n02, n11, n12, n22 = poly_core(
            n, c1, c2, s, s1, s2, yty, r0[0, 0], r0[0, 1], r0[0, 2], r0[1, 1], r0[1, 2],
            r0[2, 2], rb[0], rb[1], rb[2], quad0, logdet_r0, a1n, lg, inv_a2, const)
        out_logml[:, 4] = logml
        for k in range(3):
            out_est[:, 4, k] = omega_g[k, 0] * x0 + omega_g[k, 1] * x1 + omega_g[k, 2] * x2
        for j in range(4):
            lm, mu0, mu1 = constrained_core(
                omegas[j], omega_invs[j], logdet_sig0[j], quad_mu0[j], n, yty, x0, x1, x2,
                n00, n01, n02, n11, n12, n22, a1n, lg, inv_a2, const)
            out_logml[:, j] = lm
            out_est[:, j, 0] = mu0
            out_est[:, j, 1] = mu1
            out_est[:, j, 2] = np.nan
        lm, bn = null_core(n, s, yty, r_null, m_null, a1n, lg, inv_a2, const)
    out_logml[:, 5] = lm
    out_est[:, 5, 0] = bn
    out_est[:, 5, 1:] = np.nan


def evidence(counts, sums, yty, tables, use_numba: bool | None = None):
    """Log marginal likelihoods and posterior means for a block of SNPs.

    ``tables`` is a :class:`bayespoly.bayes.EvidenceTables`. Returns
    ``logml`` of shape ``(m, 6)`` and ``est`` of shape ``(m, 6, 3)``, both
    indexed by :class:`~bayespoly.genetics.GeneticModel` value.
    """
    m = counts.shape[0]
    out_logml = np.empty((m, 6))
    out_est = np.empty((m, 6, 3))
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    fn = _evidence_loop if use_numba else _evidence_vec
    fn(np.ascontiguousarray(counts, dtype=np.int64), np.ascontiguousarray(sums, dtype=np.float64),
       np.ascontiguousarray(yty, dtype=np.float64), *tables.kernel_args(), out_logml, out_est)
    return out_logml, out_est


def select_best(logml: np.ndarray):
    """Best alternative per row (first maximum in A, D, R, C, G order) and log BF."""
    alt = logml[:, :5]
    alt = np.where(np.isnan(alt), -np.inf, alt)
    best = np.argmax(alt, axis=1)
    top = alt[np.arange(alt.shape[0]), best]
    return best.astype(np.int8), top - logml[:, 5]


# --------------------------------------------------------------------------
# Frequentist least squares
# --------------------------------------------------------------------------

@jit
def _slope_core(x0, x1, x2, n, c0, c1, c2, s0, s1, s2, syy):
    # Returns (x, y, ess, degenerate, perfect): the t-test p-value is I_x(df/2, 1/2)
    # with x = RSS / (RSS + ESS) and y = 1 - x = ESS / (RSS + ESS).
    sx = c0 * x0 + c1 * x1 + c2 * x2
    sxx = c0 * x0 * x0 + c1 * x1 * x1 + c2 * x2 * x2
    sxy = s0 * x0 + s1 * x1 + s2 * x2
    nsxx = n * sxx - sx * sx
    s = s0 + s1 + s2
    cxy = sxy - sx * s / n
    ess = n * cxy * cxy / nsxx
    rss = syy - ess
    rss = rss * (rss > 0.0)
    degenerate = (nsxx <= 0.0) | (n < 3.0)
    perfect = rss <= _PERFECT_RTOL * syy
    x = rss / (rss + ess)
    y = ess / (rss + ess)
    return x, y, ess, degenerate, perfect


@jit
def _genotypic_core(n, c0, c1, c2, s0, s1, s2, syy):
    # Two-indicator regression; coefficients are class-mean contrasts with AA.
    m0 = s0 / c0
    m1 = s1 / c1
    m2 = s2 / c2
    s = s0 + s1 + s2
    ess = c0 * m0 * m0 + c1 * m1 * m1 + c2 * m2 * m2 - s * s / n
    rss = syy - ess
    rss = rss * (rss > 0.0)
    df = n - 3.0
    degenerate = (c0 <= 0.0) | (c1 <= 0.0) | (c2 <= 0.0) | (df < 1.0)
    perfect = rss <= _PERFECT_RTOL * syy
    t_het2 = (m1 - m0) * (m1 - m0) / (1.0 / c0 + 1.0 / c1)
    t_hom2 = (m2 - m0) * (m2 - m0) / (1.0 / c0 + 1.0 / c2)
    # x = df / (df + t^2) with t^2 = diff^2 / (rss / df * (1/ca + 1/cb))
    x_het = rss / (rss + t_het2)
    x_hom = rss / (rss + t_hom2)
    x_joint = rss / (rss + ess)
    y_het = t_het2 / (rss + t_het2)
    y_hom = t_hom2 / (rss + t_hom2)
    y_joint = ess / (rss + ess)
    return (x_het, x_hom, x_joint, y_het, y_hom, y_joint, t_het2, t_hom2, ess,
            degenerate, perfect)


@jit
def _frequentist_loop(counts, sums, yty, geno_mode, out_p, out_flags, out_deg):
    m = counts.shape[0]
    for i in range(m):
        c0 = float(counts[i, 0])
        c1 = float(counts[i, 1])
        c2 = float(counts[i, 2])
        n = c0 + c1 + c2
        s0 = sums[i, 0]
        s1 = sums[i, 1]
        s2 = sums[i, 2]
        s = s0 + s1 + s2
        flag = 0
        if n <= 0.0:
            for k in range(6):
                out_p[i, k] = 1.0
                out_deg[i, k] = True
            out_flags[i] = FLAG_DEGENERATE_FREQ
            continue
        syy = yty[i] - s * s / n
        syy = max(syy, 0.0)
        for j in range(4):
            x, y, ess, degenerate, perfect = _slope_core(
                CODINGS[j, 0], CODINGS[j, 1], CODINGS[j, 2], n, c0, c1, c2, s0, s1, s2, syy)
            out_deg[i, 2 + j] = degenerate
            if degenerate:
                out_p[i, 2 + j] = 1.0
                flag |= FLAG_DEGENERATE_FREQ
            elif perfect:
                out_p[i, 2 + j] = 0.0 if ess > 0.0 else 1.0
                flag |= FLAG_PERFECT_FIT
            else:
                out_p[i, 2 + j] = betainc_comp_scalar(0.5 * (n - 2.0), 0.5, x, y)
        if c0 > 0.0 and c1 > 0.0 and c2 > 0.0 and n >= 4.0:
            (x_het, x_hom, x_joint, y_het, y_hom, y_joint, t_het2, t_hom2, ess,
             degenerate, perfect) = _genotypic_core(n, c0, c1, c2, s0, s1, s2, syy)
            df = n - 3.0
            out_deg[i, 0] = False
            out_deg[i, 1] = False
            if perfect:
                flag |= FLAG_PERFECT_FIT
                if geno_mode == GENO_JOINT:
                    pj = 0.0 if ess > 0.0 else 1.0
                    out_p[i, 0] = pj
                    out_p[i, 1] = pj
                else:
                    out_p[i, 0] = 0.0 if t_het2 > 0.0 else 1.0
                    out_p[i, 1] = 0.0 if t_hom2 > 0.0 else 1.0
            elif geno_mode == GENO_JOINT:
                pj = betainc_comp_scalar(0.5 * df, 1.0, x_joint, y_joint)
                out_p[i, 0] = pj
                out_p[i, 1] = pj
            else:
                out_p[i, 0] = betainc_comp_scalar(0.5 * df, 0.5, x_het, y_het)
                out_p[i, 1] = betainc_comp_scalar(0.5 * df, 0.5, x_hom, y_hom)
        else:
            out_p[i, 0] = 1.0
            out_p[i, 1] = 1.0
            out_deg[i, 0] = True
            out_deg[i, 1] = True
            flag |= FLAG_DEGENERATE_FREQ
        out_flags[i] = flag


def _frequentist_vec(counts, sums, yty, geno_mode, out_p, out_flags, out_deg):
    slope_core = py(_slope_core)
    genotypic_core = py(_genotypic_core)
    c = counts.astype(np.float64)
    c0, c1, c2 = c[:, 0], c[:, 1], c[:, 2]
    n = c0 + c1 + c2
    s0, s1, s2 = sums[:, 0], sums[:, 1], sums[:, 2]
    s = s0 + s1 + s2
    flags = np.zeros(counts.shape[0], dtype=np.uint8)
    empty = n <= 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        syy = np.maximum(yty - s * s / n, 0.0)
        xs, ys, dfs, bs, fixed, degs = [], [], [], [], [], []
        for j in range(4):
            x, y, ess, degenerate, perfect = slope_core(
                CODINGS[j, 0], CODINGS[j, 1], CODINGS[j, 2], n, c0, c1, c2, s0, s1, s2, syy)
            degenerate = degenerate | empty
            perfect = perfect & ~degenerate
            flags[degenerate] |= FLAG_DEGENERATE_FREQ
            flags[perfect] |= FLAG_PERFECT_FIT
            fix = np.where(degenerate, 1.0, np.where(perfect, np.where(ess > 0.0, 0.0, 1.0), np.nan))
            xs.append(x)
            ys.append(y)
            dfs.append(0.5 * (n - 2.0))
            bs.append(np.full(n.shape, 0.5))
            fixed.append(fix)
            degs.append(degenerate)
        (x_het, x_hom, x_joint, y_het, y_hom, y_joint, t_het2, t_hom2, ess,
         degenerate, perfect) = genotypic_core(n, c0, c1, c2, s0, s1, s2, syy)
        degenerate = degenerate | empty | (n < 4.0)
        perfect = perfect & ~degenerate
        flags[degenerate] |= FLAG_DEGENERATE_FREQ
        flags[perfect] |= FLAG_PERFECT_FIT
        half_df = 0.5 * (n - 3.0)
        if geno_mode == GENO_JOINT:
            pj = np.where(ess > 0.0, 0.0, 1.0)
            geno_x = (x_joint, x_joint)
            geno_y = (y_joint, y_joint)
            geno_fix = (pj, pj)
            geno_b = 1.0
        else:
            geno_x = (x_het, x_hom)
            geno_y = (y_het, y_hom)
            geno_fix = (np.where(t_het2 > 0.0, 0.0, 1.0), np.where(t_hom2 > 0.0, 0.0, 1.0))
            geno_b = 0.5
        for x, y, pf in zip(geno_x, geno_y, geno_fix):
            fix = np.where(degenerate, 1.0, np.where(perfect, pf, np.nan))
            xs.insert(len(xs) - 4, x)
            ys.insert(len(ys) - 4, y)
            dfs.insert(len(dfs) - 4, half_df)
            bs.insert(len(bs) - 4, np.full(n.shape, geno_b))
            fixed.insert(len(fixed) - 4, fix)
            degs.insert(len(degs) - 4, degenerate)
    x_all = np.stack(xs, axis=1)
    y_all = np.stack(ys, axis=1)
    a_all = np.stack(dfs, axis=1)
    b_all = np.stack(bs, axis=1)
    fix_all = np.stack(fixed, axis=1)
    todo = np.isnan(fix_all)
    p = fix_all.copy()
    if todo.any():
        p[todo] = betainc_vec(a_all[todo], b_all[todo], x_all[todo], y_all[todo])
    flags[empty] = FLAG_DEGENERATE_FREQ
    out_p[:] = p
    out_flags[:] = flags
    out_deg[:] = np.stack(degs, axis=1)


def frequentist(counts, sums, yty, genotypic_test: str = "indicators",
                use_numba: bool | None = None):
    """Two-sided OLS p-values for every SNP in a block.

    Columns of the returned ``(m, 6)`` array: genotypic heterozygote and
    homozygote indicator coefficients, then additive, dominant, recessive and
    co-dominant slopes. Degenerate designs get p = 1 and ``FLAG_DEGENERATE_FREQ``;
    zero residual variance gets p = 0 (or 1 for a zero effect) and
    ``FLAG_PERFECT_FIT``.
    """
    mode = GENO_JOINT if genotypic_test == "joint" else GENO_INDICATORS
    m = counts.shape[0]
    out_p = np.empty((m, 6))
    out_flags = np.zeros(m, dtype=np.uint8)
    out_deg = np.zeros((m, 6), dtype=np.bool_)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    fn = _frequentist_loop if use_numba else _frequentist_vec
    fn(np.ascontiguousarray(counts, dtype=np.int64), np.ascontiguousarray(sums, dtype=np.float64),
       np.ascontiguousarray(yty, dtype=np.float64), mode, out_p, out_flags, out_deg)
    return out_p, out_flags, out_deg


def min_p_select(pvals: np.ndarray, degenerate: np.ndarray):
    """Minimum p-value over non-degenerate fits and its model.

    Models are GeneticModel values; -1 (with min p = 1) when every fit is
    degenerate. The genotypic model counts as degenerate only when both its
    indicator fits are.
    """
    per_model = np.column_stack([pvals[:, 2], pvals[:, 3], pvals[:, 4], pvals[:, 5],
                                 np.minimum(pvals[:, 0], pvals[:, 1])])
    deg = np.column_stack([degenerate[:, 2:6], degenerate[:, 0] & degenerate[:, 1]])
    masked = np.where(deg, np.inf, per_model)
    m = pvals.shape[0]
    best = np.argmin(masked, axis=1).astype(np.int8)
    min_p = masked[np.arange(m), best]
    none = np.all(deg, axis=1)
    best[none] = -1
    min_p[none] = 1.0
    return min_p, best
