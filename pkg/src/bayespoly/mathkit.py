"""Special functions and 1x1/2x2/3x3 linear algebra.

Two layers live here. The public functions (:func:`log_gamma`,
:func:`reg_inc_beta`, :func:`spd_solve`, :func:`log_det_spd`) validate their
inputs and raise. The underscore kernels are branch-free arithmetic on either
scalars or equally shaped arrays, so the same formula serves the per-SNP numba
loops and the vectorised numpy path. A non-SPD input shows up there as NaN
instead of an exception.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import jit
from .errors import DomainError, SingularMatrixError

LOG_2PI = math.log(2.0 * math.pi)
_HALF_LOG_2PI = 0.5 * LOG_2PI

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXIT = 20000


def _lgamma_np(x):
    # Arguments below 0.5 are shifted up by one: lnG(x) = lnG(x + 1) - ln x.
    shift = (x < 0.5) * 1.0
    z = x + shift - 1.0
    acc = _LANCZOS[0] + 0.0 * z
    for i in range(1, 9):
        acc = acc + _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc) - shift * np.log(x)


lgamma_kernel = jit(_lgamma_np)


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``.

    Accepts a scalar or an array; raises :class:`DomainError` for any
    non-positive or non-finite argument.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"log_gamma requires finite x > 0, got {x!r}")
    out = _lgamma_np(arr)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Regularized incomplete beta
# --------------------------------------------------------------------------

@jit
def _betacf(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return h


@jit
def betainc_comp_scalar(a, b, x, y):
    """I_x(a, b) given both ``x`` and ``y = 1 - x``.

    Callers that can form ``1 - x`` without cancellation (e.g. ``t^2 / (df + t^2)``
    next to ``df / (df + t^2)``) pass it here, which keeps full relative
    accuracy when ``x`` is within rounding of 1.
    """
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (lgamma_kernel(a + b) - lgamma_kernel(a) - lgamma_kernel(b)
                 + a * np.log(x) + b * np.log(y))
    if x < (a + 1.0) / (a + b + 2.0):
        return np.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - np.exp(log_front) * _betacf(b, a, y) / b


@jit
def betainc_scalar(a, b, x):
    """I_x(a, b) for one triple; assumes a, b > 0 and 0 <= x <= 1."""
    return betainc_comp_scalar(a, b, x, 1.0 - x)


def _betacf_vec(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _CF_TINY, _CF_TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _CF_TINY, _CF_TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _CF_EPS
        if not active.any():
            break
    return h


def betainc_vec(a, b, x, y=None):
    """Vectorised I_x(a, b); ``y`` optionally supplies ``1 - x`` as in :func:`betainc_comp_scalar`."""
    x = np.asarray(x, np.float64)
    y = 1.0 - x if y is None else np.asarray(y, np.float64)
    a, b, x, y = np.broadcast_arrays(np.asarray(a, np.float64), np.asarray(b, np.float64), x, y)
    out = np.empty(x.shape)
    lo = x <= 0.0
    hi = ~lo & (y <= 0.0)
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    if mid.any():
        am, bm, xm, ym = a[mid], b[mid], x[mid], y[mid]
        flip = xm >= (am + 1.0) / (am + bm + 2.0)
        pa = np.where(flip, bm, am)
        pb = np.where(flip, am, bm)
        px = np.where(flip, ym, xm)
        py_ = np.where(flip, xm, ym)
        log_front = (_lgamma_np(pa + pb) - _lgamma_np(pa) - _lgamma_np(pb)
                     + pa * np.log(px) + pb * np.log(py_))
        part = np.exp(log_front) * _betacf_vec(pa, pb, px) / pa
        out[mid] = np.where(flip, 1.0 - part, part)
    return out


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not (a > 0.0 and b > 0.0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"reg_inc_beta requires a > 0 and b > 0, got a={a!r}, b={b!r}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"reg_inc_beta requires 0 <= x <= 1, got {x!r}")
    return float(betainc_scalar(float(a), float(b), float(x)))


# --------------------------------------------------------------------------
# Small SPD matrices (public, validating)
# --------------------------------------------------------------------------

def cholesky(m) -> np.ndarray:
    """Lower Cholesky factor of a symmetric 1x1, 2x2 or 3x3 matrix.

    Raises :class:`SingularMatrixError` carrying the 0-based index of the
    first pivot that is not strictly positive.
    """
    m = np.asarray(m, dtype=np.float64)
    k = m.shape[0]
    if m.shape != (k, k) or k not in (1, 2, 3):
        raise DomainError(f"expected a 1x1, 2x2 or 3x3 matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=1e-12, atol=0.0):
        raise DomainError("matrix is not symmetric")
    low = np.zeros_like(m)
    for j in range(k):
        pivot = m[j, j] - low[j, :j] @ low[j, :j]
        if not pivot > 0.0:
            raise SingularMatrixError(j)
        low[j, j] = math.sqrt(pivot)
        for i in range(j + 1, k):
            low[i, j] = (m[i, j] - low[i, :j] @ low[j, :j]) / low[j, j]
    return low


def spd_solve(m, v) -> np.ndarray:
    """Solve ``m @ x = v`` for SPD ``m`` by forward/back substitution."""
    low = cholesky(m)
    v = np.asarray(v, dtype=np.float64)
    k = low.shape[0]
    if v.shape != (k,):
        raise DomainError(f"vector of length {k} expected, got shape {v.shape}")
    z = np.empty(k)
    for i in range(k):
        z[i] = (v[i] - low[i, :i] @ z[:i]) / low[i, i]
    x = np.empty(k)
    for i in range(k - 1, -1, -1):
        x[i] = (z[i] - low[i + 1:, i] @ x[i + 1:]) / low[i, i]
    return x


def log_det_spd(m) -> float:
    low = cholesky(m)
    return float(2.0 * np.sum(np.log(np.diag(low))))


def spd_inverse(m) -> np.ndarray:
    k = np.asarray(m).shape[0]
    return np.column_stack([spd_solve(m, e) for e in np.eye(k)])


# --------------------------------------------------------------------------
# Elementwise fixed-size kernels (scalar or array entries)
# --------------------------------------------------------------------------

@jit
def chol3(a00, a01, a02, a11, a12, a22):
    l00 = np.sqrt(a00)
    l10 = a01 / l00
    l20 = a02 / l00
    l11 = np.sqrt(a11 - l10 * l10)
    l21 = (a12 - l20 * l10) / l11
    l22 = np.sqrt(a22 - l20 * l20 - l21 * l21)
    return l00, l10, l20, l11, l21, l22


@jit
def chol3_solve(l00, l10, l20, l11, l21, l22, b0, b1, b2):
    z0 = b0 / l00
    z1 = (b1 - l10 * z0) / l11
    z2 = (b2 - l20 * z0 - l21 * z1) / l22
    x2 = z2 / l22
    x1 = (z1 - l21 * x2) / l11
    x0 = (z0 - l10 * x1 - l20 * x2) / l00
    return x0, x1, x2


@jit
def chol3_logdet(l00, l11, l22):
    return 2.0 * (np.log(l00) + np.log(l11) + np.log(l22))


@jit
def congruence3(w, a00, a01, a02, a11, a12, a22):
    """Upper triangle of ``w.T @ A @ w`` for symmetric ``A`` and constant ``w``."""
    m00 = a00 * w[0, 0] + a01 * w[1, 0] + a02 * w[2, 0]
    m01 = a00 * w[0, 1] + a01 * w[1, 1] + a02 * w[2, 1]
    m02 = a00 * w[0, 2] + a01 * w[1, 2] + a02 * w[2, 2]
    m10 = a01 * w[0, 0] + a11 * w[1, 0] + a12 * w[2, 0]
    m11 = a01 * w[0, 1] + a11 * w[1, 1] + a12 * w[2, 1]
    m12 = a01 * w[0, 2] + a11 * w[1, 2] + a12 * w[2, 2]
    m20 = a02 * w[0, 0] + a12 * w[1, 0] + a22 * w[2, 0]
    m21 = a02 * w[0, 1] + a12 * w[1, 1] + a22 * w[2, 1]
    m22 = a02 * w[0, 2] + a12 * w[1, 2] + a22 * w[2, 2]
    c00 = w[0, 0] * m00 + w[1, 0] * m10 + w[2, 0] * m20
    c01 = w[0, 0] * m01 + w[1, 0] * m11 + w[2, 0] * m21
    c02 = w[0, 0] * m02 + w[1, 0] * m12 + w[2, 0] * m22
    c11 = w[0, 1] * m01 + w[1, 1] * m11 + w[2, 1] * m21
    c12 = w[0, 1] * m02 + w[1, 1] * m12 + w[2, 1] * m22
    c22 = w[0, 2] * m02 + w[1, 2] * m12 + w[2, 2] * m22
    return c00, c01, c02, c11, c12, c22
