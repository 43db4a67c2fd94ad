"""Special functions behind the closed-form fading statistics.

The kernels here cover the confluent hypergeometric ``1F1``, the modified
Bessel function of the first kind, Humbert's bivariate ``Phi2`` and its
multivariate extension ``Phi2^(N)``, the Lauricella ``F_D^(N)`` and a fixed
Talbot Laplace inversion.  Every evaluator is a pure function; accuracy knobs
are collected in :class:`NumericControl`.

Series are summed in log space (Pochhammer products overflow long before the
series converge for the parameter ranges met in fading analysis), and are only
ever summed where their terms have a stable sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

__all__ = [
    "NumericControl",
    "DEFAULT_CONTROL",
    "PHI2_SERIES_MAX_ARG",
    "ln_gamma",
    "kummer_1f1",
    "log_kummer_1f1",
    "bessel_i",
    "log_bessel_i",
    "phi2",
    "phi2_multi",
    "lauricella_fd",
    "inverse_laplace",
]

# Above this |argument| the general-order Phi2 series (inner 1F1 with a
# non-integer first parameter) is handed to the Laplace-inversion evaluator.
PHI2_SERIES_MAX_ARG = 50.0

_CHUNK = 128
_ROW_BLOCK = 8192
_CONSECUTIVE_SMALL = 3
_TALBOT_CHECK_EXTRA = 8


@dataclass(frozen=True)
class NumericControl:
    """Tolerances and budgets shared by all evaluators.

    Parameters
    ----------
    rel_tol : float
        Relative truncation tolerance for series and quadrature.
    abs_tol : float
        Absolute floor below which values are treated as zero.
    max_terms : int
        Hard cap on the number of series terms.
    quad_points : int
        Gauss-Legendre nodes per panel (doubled once for the error estimate).
    inv_laplace_terms : int
        Number of nodes on the fixed Talbot contour.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-300
    max_terms: int = 100_000
    quad_points: int = 201
    inv_laplace_terms: int = 26

    def __post_init__(self):
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if not (self.abs_tol > 0 and math.isfinite(self.abs_tol)):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms}")
        if int(self.quad_points) != self.quad_points or self.quad_points < 15:
            raise DomainError(f"quad_points must be an integer >= 15, got {self.quad_points}")
        if int(self.inv_laplace_terms) != self.inv_laplace_terms or self.inv_laplace_terms < 10:
            raise DomainError(
                f"inv_laplace_terms must be an integer >= 10, got {self.inv_laplace_terms}")


DEFAULT_CONTROL = NumericControl()


def _finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")


def ln_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for ``x > 0``."""
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"ln_gamma requires a positive finite argument, got {x}")
    return math.lgamma(x)


def _log_poch(a: float, n: int) -> np.ndarray:
    """``log (a)_k`` for ``k = 0..n`` with ``a > 0``, accumulated term by term."""
    return np.concatenate(([0.0], np.cumsum(np.log(a + np.arange(n)))))


def _series_log(log_t0, log_ratio, ctl, sign_ratio=None, label="series"):
    """Sum ``t_0 + t_1 + ...`` for a batch of hypergeometric-type series.

    ``log_ratio(k, idx)`` returns ``log|t_{k+1}/t_k|`` with shape
    ``(len(idx), len(k))`` for the active rows ``idx``; ``sign_ratio(k)``
    returns the sign of that ratio (shared by all rows) or is ``None`` when
    every term is positive.  Summation stops for a row once three consecutive
    decreasing terms fall below ``rel_tol`` times the running sum of
    magnitudes (taken at the start of each chunk of terms).

    Returns ``(sign, log|sum|, terms)`` arrays.
    """
    log_t0 = np.atleast_1d(np.asarray(log_t0, dtype=float)).copy()
    n = log_t0.size
    if n > _ROW_BLOCK:
        # bound the (rows x chunk) work arrays
        parts = [_series_log(log_t0[i:i + _ROW_BLOCK],
                             lambda k, idx, off=i: log_ratio(k, idx + off),
                             ctl, sign_ratio, label)
                 for i in range(0, n, _ROW_BLOCK)]
        return tuple(np.concatenate(x) for x in zip(*parts))
    ref = log_t0.copy()
    acc = np.ones(n)
    mag = log_t0.copy()
    last_log = log_t0.copy()
    last_sign = np.ones(n)
    run = np.zeros(n, dtype=int)
    terms = np.ones(n, dtype=int)
    active = np.ones(n, dtype=bool)
    log_tol = math.log(ctl.rel_tol)
    cols = np.arange(_CHUNK)
    k0 = 0
    while active.any():
        if k0 >= ctl.max_terms:
            raise ConvergenceError(
                f"{label} not converged within {ctl.max_terms} terms",
                partial=float(np.exp(ref[0]) * acc[0]), terms=k0)
        idx = np.flatnonzero(active)
        k = np.arange(k0, k0 + _CHUNK, dtype=float)
        lr = log_ratio(k, idx)
        with np.errstate(invalid="ignore"):
            logs = last_log[idx, None] + np.cumsum(lr, axis=1)
        logs = np.where(np.isnan(logs), -np.inf, logs)
        if sign_ratio is None:
            signs = 1.0
            chunk_sign = np.ones(idx.size)
        else:
            sr = np.cumprod(sign_ratio(k))
            signs = last_sign[idx, None] * sr[None, :]
            chunk_sign = signs[:, -1]
        new_ref = np.maximum(ref[idx], logs.max(axis=1))
        acc[idx] = acc[idx] * np.exp(ref[idx] - new_ref) + np.sum(
            signs * np.exp(logs - new_ref[:, None]), axis=1)
        ref[idx] = new_ref
        # comparing against the magnitude at the chunk start is the stricter test
        small = (logs < log_tol + mag[idx, None]) & (lr < 0)
        last_false = np.maximum.accumulate(np.where(small, -1, cols[None, :]), axis=1)
        runs = np.where(last_false < 0, cols[None, :] + 1 + run[idx, None], cols[None, :] - last_false)
        done = (runs >= _CONSECUTIVE_SMALL).any(axis=1)
        first = np.argmax(runs >= _CONSECUTIVE_SMALL, axis=1)
        terms[idx] = np.where(done, k0 + first + 2, k0 + _CHUNK + 1)
        run[idx] = runs[:, -1]
        mag[idx] = np.logaddexp(mag[idx], special.logsumexp(logs, axis=1))
        last_log[idx] = logs[:, -1]
        last_sign[idx] = chunk_sign
        active[idx[done]] = False
        k0 += _CHUNK
    with np.errstate(divide="ignore"):
        return np.sign(acc), ref + np.log(np.abs(acc)), terms


def _hyp1f1_nonneg(a, b, z, ctl):
    """``(sign, log|1F1(a; b; z)|)`` by direct summation for ``z >= 0``.

    Terms are all positive for ``a > 0``; for negative ``a`` the sign flips only
    while ``a + k < 0``.  Vectorized over ``z``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if a == 0:
        return np.ones(z.shape), np.zeros(z.shape)
    if a < 0 and a == round(a):
        # terminating polynomial
        k = np.arange(int(-a) + 1, dtype=float)
        coef = np.concatenate(([1.0], np.cumprod((a + k[:-1]) / ((b + k[:-1]) * (k[:-1] + 1)))))
        vals = np.array([math.fsum(coef * zi ** k) for zi in z])
        with np.errstate(divide="ignore"):
            return np.sign(vals), np.log(np.abs(vals))
    with np.errstate(divide="ignore"):
        log_z = np.log(z)

    def log_ratio(k, idx):
        return np.log(np.abs(a + k))[None, :] + log_z[idx, None] - np.log((b + k) * (k + 1))[None, :]

    sign_ratio = None if a > 0 else (lambda k: np.sign(a + k))
    sign, log_abs, _ = _series_log(np.zeros(z.size), log_ratio, ctl, sign_ratio, label="1F1 series")
    return sign, log_abs


def _check_b(b):
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"1F1 requires b > 0, got {b}")


def log_kummer_1f1(a: float, b: float, z, ctl: NumericControl = DEFAULT_CONTROL):
    """``log 1F1(a; b; z)`` for parameters where the function is positive.

    Negative ``z`` is folded through Kummer's transformation
    ``1F1(a; b; z) = e^z 1F1(b - a; b; -z)``.  Accepts scalar or array ``z``.
    """
    _finite("a", a)
    _check_b(b)
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z_arr)):
        raise DomainError("1F1 argument must be finite")
    flat = np.atleast_1d(z_arr).ravel()
    out = np.empty(flat.shape)
    neg = flat < 0
    if (~neg).any():
        s, lv = _hyp1f1_nonneg(a, b, flat[~neg], ctl)
        if np.any(s <= 0):
            raise DomainError("1F1 is not positive here; use kummer_1f1")
        out[~neg] = lv
    if neg.any():
        s, lv = _hyp1f1_nonneg(b - a, b, -flat[neg], ctl)
        if np.any(s <= 0):
            raise DomainError("1F1 is not positive here; use kummer_1f1")
        out[neg] = lv + flat[neg]
    out = out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def kummer_1f1(a: float, b: float, z, ctl: NumericControl = DEFAULT_CONTROL):
    """Confluent hypergeometric function ``1F1(a; b; z)`` for real arguments.

    Parameters
    ----------
    a : float
    b : float
        Must be positive.
    z : float or array_like
    ctl : NumericControl

    Raises
    ------
    DomainError
        If ``b <= 0`` or an argument is not finite.
    ConvergenceError
        If the series needs more than ``ctl.max_terms`` terms.
    """
    _finite("a", a)
    _check_b(b)
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z_arr)):
        raise DomainError("1F1 argument must be finite")
    flat = np.atleast_1d(z_arr).ravel()
    out = np.empty(flat.shape)
    neg = flat < 0
    with np.errstate(over="ignore"):
        if (~neg).any():
            s, lv = _hyp1f1_nonneg(a, b, flat[~neg], ctl)
            out[~neg] = s * np.exp(lv)
        if neg.any():
            s, lv = _hyp1f1_nonneg(b - a, b, -flat[neg], ctl)
            out[neg] = s * np.exp(lv + flat[neg])
    out = out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def _log_bessel_series(nu, y, ctl):
    """``log sum_k y^k / (k! Gamma(nu + k + 1))`` for ``y >= 0``, ``nu > -1``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    with np.errstate(divide="ignore"):
        log_y = np.log(y)

    def log_ratio(k, idx):
        return log_y[idx, None] - np.log((k + 1) * (nu + k + 1))[None, :]

    _, lv, _ = _series_log(np.full(y.size, -math.lgamma(nu + 1)), log_ratio, ctl,
                           label="Bessel I series")
    return lv


def log_bessel_i(nu: float, x, ctl: NumericControl = DEFAULT_CONTROL):
    """``log I_nu(x)`` from the ascending series, for ``x > 0`` and ``nu >= -1``."""
    _finite("nu", nu)
    if nu < -1:
        raise DomainError(f"bessel_i requires nu >= -1, got {nu}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or not np.all(np.isfinite(x_arr)):
        raise DomainError("bessel_i requires a finite non-negative argument")
    if nu == -1:
        nu = 1.0
    flat = np.atleast_1d(x_arr).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        out = nu * np.log(flat / 2) + _log_bessel_series(nu, flat * flat / 4, ctl)
    if nu == 0:
        out = np.where(flat == 0, 0.0, out)
    elif nu < 0 and np.any(flat == 0):
        raise DomainError(f"I_nu(0) diverges for nu = {nu}")
    out = out.reshape(x_arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_i(nu: float, x, ctl: NumericControl = DEFAULT_CONTROL):
    """Modified Bessel function of the first kind ``I_nu(x)``, ``x >= 0``."""
    with np.errstate(over="ignore"):
        return np.exp(log_bessel_i(nu, x, ctl)) if np.ndim(x) else math.exp(log_bessel_i(nu, x, ctl))


# ---------------------------------------------------------------------------
# Phi2 (bivariate)
# ---------------------------------------------------------------------------

def _is_int(x, tol=1e-12):
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


def _log_phi2_zero_gap(b2, c, A, delta, ctl):
    """``(sign, log|Phi2|)`` for ``c - b1 - b2 = 0``, where it is ``e^{-A} 1F1(b2; c; delta)``."""
    sign, lv = _hyp1f1_nonneg(b2, c, delta, ctl)
    return sign, lv - A


def _log_phi2_unit_gap(b2, c, A, delta, ctl):
    """``log Phi2`` for ``c - b1 - b2 = 1`` via the positive rearranged series.

    After the Kummer-type shift to non-negative arguments the inner functions
    are ``Q_n = e^{-A} 1F1(1; c+n; A)``, which obey the stable backward
    recurrence ``Q_n = e^{-A} + A/(c+n) Q_{n+1}``.  Points are processed in
    blocks sorted by ``delta`` so each block recurses only as deep as it needs.
    """
    A = np.atleast_1d(np.asarray(A, dtype=float))
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if A.size <= _ROW_BLOCK:
        return _log_phi2_unit_gap_block(b2, c, A, delta, ctl)
    order = np.argsort(delta, kind="stable")
    out = np.empty(A.size)
    for i in range(0, A.size, _ROW_BLOCK):
        blk = order[i:i + _ROW_BLOCK]
        out[blk] = _log_phi2_unit_gap_block(b2, c, A[blk], delta[blk], ctl)
    return out


def _log_phi2_unit_gap_block(b2, c, A, delta, ctl):
    npts = A.size
    with np.errstate(divide="ignore"):
        log_delta = np.log(delta)
    # The coefficient series sum_n (b2)_n delta^n / ((c)_n n!) fixes the depth.
    # With positive coefficients its relative tail grows with delta, so the
    # largest delta decides for the whole block.
    probe = np.array([int(np.argmax(delta))]) if b2 > 0 else np.arange(npts)
    _, _, coef_terms = _series_log(
        np.zeros(probe.size),
        lambda k, idx: (np.log(np.abs(b2 + k)) - np.log((c + k) * (k + 1)))[None, :]
        + log_delta[probe[idx], None],
        ctl,
        sign_ratio=None if b2 > 0 else (lambda k: np.sign(b2 + k)),
        label="Phi2 coefficient series")
    n_max = int(coef_terms.max()) + _CONSECUTIVE_SMALL
    if n_max > ctl.max_terms:
        raise ConvergenceError("Phi2 series depth exceeds max_terms", terms=n_max)
    s_top = c + n_max
    # Q_{n_max} = Gamma(s) A^(1-s) P(s-1, A); short series where P underflows
    with np.errstate(divide="ignore", invalid="ignore"):
        log_A = np.log(A)
        p_reg = special.gammainc(s_top - 1, A)
        log_q = math.lgamma(s_top) + (1 - s_top) * log_A + np.log(p_reg)
    lo = ~(p_reg > 1e-280) | ~np.isfinite(log_q)
    if lo.any():
        log_A_lo = log_A[lo]
        _, lv, _ = _series_log(-A[lo], lambda k, idx: log_A_lo[idx, None] - np.log(s_top + k)[None, :],
                               ctl, label="Phi2 inner series")
        log_q[lo] = lv
    # signed log coefficients log|(b2)_n| - log (c)_n - log n!
    steps = b2 + np.arange(n_max, dtype=float)
    with np.errstate(divide="ignore"):
        log_coef = np.concatenate(([0.0], np.cumsum(np.log(np.abs(steps)))))
    sign_coef = np.concatenate(([1.0], np.cumprod(np.sign(steps))))
    log_coef = log_coef - _log_poch(c, n_max) - special.gammaln(np.arange(n_max + 1) + 1.0)
    # the recurrence runs in linear arithmetic unless e^{-A} or Q_n could underflow
    linear = bool(np.all(A < 500.0)) and bool(np.all(log_q > -600.0))
    exp_neg_A = np.exp(-A)
    q = np.exp(log_q) if linear else None
    pos = np.full(npts, -np.inf)
    neg = np.full(npts, -np.inf)
    for n in range(n_max, -1, -1):
        if n < n_max:
            if linear:
                q = exp_neg_A + A / (c + n) * q
            else:
                log_q = np.logaddexp(-A, log_A - math.log(c + n) + log_q)
        if sign_coef[n] == 0:
            continue
        with np.errstate(invalid="ignore", divide="ignore"):
            lt = log_coef[n] + (n * log_delta if n else 0.0) + (np.log(q) if linear else log_q)
        lt = np.where(np.isnan(lt), -np.inf, lt)
        if sign_coef[n] > 0:
            pos = np.logaddexp(pos, lt)
        else:
            neg = np.logaddexp(neg, lt)
    if np.any(neg >= pos):
        raise DomainError("Phi2 is not positive for these parameters")
    with np.errstate(divide="ignore"):
        return pos + np.log1p(-np.exp(neg - pos))


def _log_phi2_mp(b1, b2, c, A, delta, ctl):
    """Rearranged series in extended precision for mixed-sign cases.

    With ``d = c - b1 - b2 < 0`` the inner ``1F1(d; c+n; A)`` changes sign and
    the outer sum cancels; the working precision is raised until the
    cancellation is covered with 15 spare digits.
    """
    d = c - b1 - b2
    sign = np.ones(A.size)
    out = np.empty(A.size)
    for i, (Ai, di) in enumerate(zip(A, delta)):
        dps = 30
        while True:
            with mpmath.workdps(dps):
                total = mpmath.mpf(0)
                mag = mpmath.mpf(0)
                coef = mpmath.mpf(1)
                small = 0
                prev = mpmath.inf
                tol = mpmath.mpf(ctl.rel_tol) * mpmath.mpf(10) ** -8
                for n in range(ctl.max_terms + 1):
                    term = coef * mpmath.hyp1f1(d, c + n, Ai)
                    total += term
                    mag += abs(term)
                    if abs(term) < tol * mag and abs(term) < prev:
                        small += 1
                        if small >= _CONSECUTIVE_SMALL:
                            break
                    else:
                        small = 0
                    prev = abs(term)
                    coef *= (b2 + n) * mpmath.mpf(di) / ((c + n) * (n + 1))
                    if coef == 0:
                        break
                else:
                    raise ConvergenceError("Phi2 series not converged", terms=ctl.max_terms)
                lost = 0 if total == 0 else float(mpmath.log10(mag / abs(total)))
                if total != 0 and lost + 15 < dps:
                    sign[i] = 1.0 if total > 0 else -1.0
                    out[i] = float(mpmath.log(abs(total))) - Ai
                    break
            if dps > 400:
                raise ConvergenceError("Phi2 series cancels beyond extended precision")
            dps = int(2 * dps + (lost if total != 0 else dps))
    return sign, out


def _log_phi2_general(b1, b2, c, A, delta, ctl):
    """Rearranged series with the inner ``1F1(d; c+n; A)`` summed term by term."""
    d = c - b1 - b2
    if d < 0 or b2 <= 0:
        return _log_phi2_mp(b1, b2, c, A, delta, ctl)
    sign_out = np.ones(A.size)
    out = np.empty(A.size)
    for i, (Ai, di) in enumerate(zip(A, delta)):
        total_terms = []
        log_mag_sum = -np.inf
        small = 0
        log_coef = 0.0
        coef_sign = 1.0
        prev = np.inf
        n = 0
        while True:
            if n > ctl.max_terms:
                raise ConvergenceError("Phi2 series not converged", terms=n)
            s_in, l_in = _hyp1f1_nonneg(d, c + n, np.array([Ai]), ctl)
            if coef_sign == 0:
                break
            lt = log_coef + l_in[0] - Ai
            sign = coef_sign * s_in[0]
            total_terms.append((sign, lt))
            log_mag_sum = np.logaddexp(log_mag_sum, lt)
            if lt < math.log(ctl.rel_tol) + log_mag_sum and lt < prev:
                small += 1
                if small >= _CONSECUTIVE_SMALL:
                    break
            else:
                small = 0
            prev = lt
            if di == 0:
                break
            ratio = (b2 + n) * di / ((c + n) * (n + 1))
            if ratio == 0:
                break
            coef_sign *= math.copysign(1.0, ratio)
            log_coef += math.log(abs(ratio))
            n += 1
        ref = max(t[1] for t in total_terms)
        val = math.fsum(s * math.exp(l - ref) for s, l in total_terms)
        sign_out[i] = math.copysign(1.0, val)
        out[i] = ref + math.log(abs(val)) if val else -math.inf
    return sign_out, out


def _log_phi2_oriented(b1, b2, c, w, z, ctl):
    """``(sign, log|Phi2|)`` for arrays with ``|w| >= |z|`` (both non-positive)."""
    A = -w
    delta = z - w  # >= 0 by orientation
    d = c - b1 - b2
    if _is_int(d) and round(d) == 0:
        return _log_phi2_zero_gap(b2, c, A, delta, ctl)
    if _is_int(d) and round(d) == 1:
        return np.ones(A.size), _log_phi2_unit_gap(b2, c, A, delta, ctl)
    sign = np.ones(A.size)
    out = np.empty(A.size)
    far = A > PHI2_SERIES_MAX_ARG
    if (~far).any():
        sign[~far], out[~far] = _log_phi2_general(b1, b2, c, A[~far], delta[~far], ctl)
    for i in np.flatnonzero(far):
        si, li = _log_phi2_multi_ray([b1, b2], c, [w[i], z[i]], np.array([1.0]), ctl)
        sign[i], out[i] = si[0], li[0]
    return sign, out


def _log_phi2(b1, b2, c, w, z, ctl=DEFAULT_CONTROL):
    """Vectorized ``(sign, log|Phi2(b1, b2; c; w, z)|)`` for ``w, z <= 0``."""
    for name, v in (("b1", b1), ("b2", b2), ("c", c)):
        _finite(name, v)
    if not c > 0:
        raise DomainError(f"Phi2 requires c > 0, got {c}")
    w, z = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(z, dtype=float))
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(z))):
        raise DomainError("Phi2 arguments must be finite")
    if np.any(w > 0) or np.any(z > 0):
        raise DomainError("Phi2 is only evaluated for non-positive arguments")
    shape = w.shape
    w = w.ravel()
    z = z.ravel()
    sign = np.ones(w.size)
    out = np.zeros(w.size)
    swap = np.abs(z) > np.abs(w)
    if (~swap).any():
        sign[~swap], out[~swap] = _log_phi2_oriented(b1, b2, c, w[~swap], z[~swap], ctl)
    if swap.any():
        sign[swap], out[swap] = _log_phi2_oriented(b2, b1, c, z[swap], w[swap], ctl)
    return sign.reshape(shape), out.reshape(shape)


def phi2(b1: float, b2: float, c: float, w, z, ctl: NumericControl = DEFAULT_CONTROL):
    """Humbert's confluent function ``Phi2(b1, b2; c; w, z)`` for ``w, z <= 0``.

    The series ``sum_k (b1)_k w^k / (k! (c)_k) 1F1(b2; c+k; z)`` alternates for
    negative ``w``.  It is evaluated instead after the shift
    ``Phi2(b1, b2; c; w, z) = e^w Phi2(c-b1-b2, b2; c; -w, z-w)`` (taking
    ``|w| >= |z|``), whose arguments are non-negative, so the same series then
    has positive terms whenever ``b2 > 0`` and ``c - b1 - b2 >= 0``.  Other
    parameter combinations (where the function may change sign) are summed in
    extended precision.

    Accepts scalar or array ``w`` and ``z`` (broadcast together).
    """
    sign, lv = _log_phi2(b1, b2, c, w, z, ctl)
    with np.errstate(over="ignore"):
        out = sign * np.exp(lv)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Laplace inversion and Phi2^(N)
# ---------------------------------------------------------------------------

def _talbot_contour(M):
    theta = np.pi * np.arange(1, M) / M
    cot = 1.0 / np.tan(theta)
    nodes = theta * (cot + 1j)
    weights = 1.0 + 1j * (theta + (theta * cot - 1.0) * cot)
    return nodes, weights


def _talbot(F, t, M, log):
    nodes, weights = _talbot_contour(M)
    r = 2.0 * M / (5.0 * t)
    s = r[:, None] * nodes[None, :]
    s0 = r.astype(complex)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        if log:
            g = np.exp(s * t[:, None] + F(s)) * weights[None, :]
            g0 = 0.5 * np.exp(r * t + F(s0[:, None])[:, 0])
        else:
            g = np.exp(s * t[:, None]) * F(s) * weights[None, :]
            g0 = 0.5 * np.exp(r * t) * F(s0[:, None])[:, 0]
        value = r / M * (g0.real + g.real.sum(axis=1))
        mag = r / M * (np.abs(g0) + np.abs(g).sum(axis=1))
    return value, mag


def _talbot_depths(M):
    return [M, (8 * M) // 5, (13 * M) // 5]


def inverse_laplace(F: Callable, t, ctl: NumericControl = DEFAULT_CONTROL, *, log: bool = False):
    """Invert a Laplace transform numerically on the fixed Talbot contour.

    Parameters
    ----------
    F : callable
        Vectorized transform ``F(s)`` for complex ``s``.  It must be analytic
        off the non-positive real axis.  With ``log=True`` it returns
        ``log F(s)`` instead, which avoids overflow for power-law transforms.
    t : float or array_like
        Positive evaluation times.
    ctl : NumericControl
        ``inv_laplace_terms`` sets the number of contour nodes; points that
        fail the depth check are retried with 1.6 and 2.6 times as many.

    Raises
    ------
    ConvergenceError
        If the result is not finite, or two contour depths disagree by more
        than rounding can explain.
    """
    t_arr = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t_arr).ravel()
    if np.any(flat <= 0) or not np.all(np.isfinite(flat)):
        raise DomainError("inverse_laplace requires positive finite t")
    M = int(ctl.inv_laplace_terms)
    value = np.empty(flat.size)
    todo = np.arange(flat.size)
    # points that fail the depth check are retried on deeper contours; strongly
    # oscillating inverses (near-essential singularities) need more nodes
    for depth in _talbot_depths(M):
        tt = flat[todo]
        val, mag = _talbot(F, tt, depth, log)
        check, check_mag = _talbot(F, tt, depth + _TALBOT_CHECK_EXTRA, log)
        slack = np.maximum(1e-7 * np.abs(val), 1e3 * np.finfo(float).eps * (mag + check_mag))
        ok = np.isfinite(val) & np.isfinite(check) & (np.abs(val - check) <= slack)
        value[todo[ok]] = val[ok]
        if ok.all():
            break
        todo = todo[~ok]
        val, check = val[~ok], check[~ok]
    else:
        i = 0
        if not (np.isfinite(val[i]) and np.isfinite(check[i])):
            raise ConvergenceError("Laplace inversion produced a non-finite value", terms=depth)
        raise ConvergenceError(
            f"Laplace inversion unstable at t={flat[todo[i]]:.6g} "
            f"({val[i]:.6g} vs {check[i]:.6g})", partial=float(val[i]), terms=depth)
    value = value.reshape(t_arr.shape)
    return float(value) if value.ndim == 0 else value


def _clog1p(u):
    """Accurate complex ``log(1 + u)``; numpy's version loses digits near 0."""
    x = u.real
    y = u.imag
    return 0.5 * np.log1p(2 * x + x * x + y * y) + 1j * np.arctan2(y, 1.0 + x)


def _log_phi2_multi_ray(betas, nu, xs, t, ctl, log_transform=None, shift=None):
    """``log Phi2^(N)(betas; nu; xs * t)`` for an array of positive scales ``t``.

    Uses ``Phi2^(N)(b; nu; x t) = Gamma(nu) t^{1-nu} L^{-1}[G](t)`` with
    ``G(s) = s^{-nu} prod_k (1 - x_k/s)^{-b_k}``.  When ``nu - sum(b)`` is a
    non-positive integer ``G`` has no branch point at the origin, so the
    contour is shifted onto the rightmost singularity ``max(xs)``; this keeps
    relative accuracy where the function decays exponentially.

    ``log_transform(s, shift)`` may replace the generic ``log G(s + shift)``
    with an algebraically equal but better conditioned form.
    """
    betas = [float(b) for b in betas]
    xs = np.asarray(xs, dtype=float)
    t = np.asarray(t, dtype=float)
    gap = nu - sum(betas)
    if shift is None:
        shift = float(xs.max()) if (_is_int(gap) and round(gap) <= 0) else 0.0
    if log_transform is None:
        power = float(round(-gap)) if shift != 0.0 else -gap
        offsets = shift - xs  # >= 0

        def log_transform(s, sh):
            out = power * np.log(s + sh) if power != 0.0 else np.zeros(s.shape, complex)
            for b, off in zip(betas, offsets):
                out = out - b * np.log(s + off)
            return out

    inv = np.atleast_1d(inverse_laplace(lambda s: log_transform(s, shift), t, ctl, log=True))
    with np.errstate(divide="ignore"):
        return np.sign(inv), math.lgamma(nu) + (1.0 - nu) * np.log(t) + shift * t + np.log(np.abs(inv))


def phi2_multi(betas: Sequence[float], nu: float, xs: Sequence[float],
               ctl: NumericControl = DEFAULT_CONTROL) -> float:
    """Multivariate confluent function ``Phi2^(N)(betas; nu; xs)``, ``xs <= 0``.

    Evaluated as ``Gamma(nu)`` times the inverse Laplace transform at ``t = 1``
    of ``s^{-nu} prod_k (1 - x_k/s)^{-beta_k}``.
    """
    betas = list(betas)
    xs = list(xs)
    if len(betas) != len(xs) or not betas:
        raise DomainError("betas and xs must have the same non-zero length")
    _finite("nu", nu)
    if not nu > 0:
        raise DomainError(f"Phi2^(N) requires nu > 0, got {nu}")
    for v in betas + xs:
        _finite("argument", v)
    if any(x > 0 for x in xs):
        raise DomainError("Phi2^(N) is only evaluated for non-positive arguments")
    if all(x == 0 for x in xs):
        return 1.0
    sign, lv = _log_phi2_multi_ray(betas, nu, xs, np.array([1.0]), ctl)
    return float(sign[0] * np.exp(lv[0]))


# ---------------------------------------------------------------------------
# Lauricella F_D^(N)
# ---------------------------------------------------------------------------

def _gauss_panels(edges, n):
    x, w = np.polynomial.legendre.leggauss(n)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    half = (hi - lo) / 2
    return (lo + half * (x[None, :] + 1)).ravel(), (half * w[None, :]).ravel()


def _graded_edges(top, exponent, cuts=()):
    """Panel edges on ``[0, top]`` graded geometrically toward zero.

    The grading stops once the innermost panel carries less than ``1e-18`` of
    an ``x^(exponent-1)`` weight, so algebraic endpoint behaviour is resolved
    with exponentially convergent Gauss-Legendre panels.
    """
    depth = int(math.ceil(18.0 * math.log(10.0) / (max(exponent, 1e-3) * math.log(4.0)))) + 1
    edges = top * 4.0 ** -np.arange(min(depth, 400), -1, -1)
    edges = np.concatenate(([0.0], edges, [c for c in cuts if 0.0 < c < top]))
    return np.unique(edges)


def _euler_log_integral(a, c, log_factor, x_scale, ctl):
    """``log int_0^1 t^{a-1} (1-t)^{c-a-1} exp(log_factor(t)) dt``.

    The interval is split at ``t = 1/2``.  On the left ``t = u^2`` when
    ``a < 1`` and on the right ``1 - t = v^2`` when ``c - a < 1``, which removes
    square-root endpoint singularities analytically.  Panels are graded
    geometrically toward both endpoints (any remaining non-integer power such
    as ``t^(a-1)`` with ``a = 3/2`` is then harmless) and near ``t = 0`` also
    through ``1/x_scale`` so that factors ``(1 + x t)^{-b}`` with large ``x``
    are resolved.  ``quad_points`` Gauss-Legendre nodes are used per panel and
    the result is checked against a run with twice as many.
    """
    e = c - a
    p_left = 2.0 if a < 1 else 1.0
    p_right = 2.0 if e < 1 else 1.0
    cuts = []
    if x_scale > 2.0:
        edge = 1.0 / x_scale
        while edge < 0.5:
            cuts.append(edge ** (1.0 / p_left))
            edge *= 8.0
    left = _graded_edges(0.5 ** (1.0 / p_left), p_left * a, cuts)
    right = _graded_edges(0.5 ** (1.0 / p_right), p_right * e)

    def integrate(n):
        u, wu = _gauss_panels(left, n)
        t = u ** p_left
        lj = math.log(p_left) + (p_left * a - 1.0) * np.log(u) + (e - 1.0) * np.log1p(-t)
        lv_left = lj + log_factor(t) + np.log(wu)
        v, wv = _gauss_panels(right, n)
        one_minus = v ** p_right
        t = 1.0 - one_minus
        lj = math.log(p_right) + (p_right * e - 1.0) * np.log(v) + (a - 1.0) * np.log1p(-one_minus)
        lv_right = lj + log_factor(t) + np.log(wv)
        return special.logsumexp(np.concatenate([lv_left, lv_right]))

    n = int(ctl.quad_points)
    with np.errstate(divide="ignore"):
        coarse = integrate(n)
        fine = integrate(2 * n)
    if not math.isfinite(fine):
        raise ConvergenceError("Euler integral is not finite", terms=2 * n)
    if abs(math.expm1(coarse - fine)) > max(ctl.rel_tol, 1e-13):
        raise ConvergenceError(
            "Euler integral did not converge under node doubling",
            partial=math.exp(fine), terms=2 * n)
    return fine


def lauricella_fd(a: float, bs: Sequence[float], c: float, xs: Sequence[float],
                  ctl: NumericControl = DEFAULT_CONTROL) -> float:
    """Lauricella ``F_D^(N)(a, b_1..b_N; c; x_1..x_N)`` for ``c > a > 0``, ``x <= 0``.

    Computed from the Euler integral
    ``Gamma(c)/(Gamma(a)Gamma(c-a)) int_0^1 t^{a-1}(1-t)^{c-a-1} prod(1-x_k t)^{-b_k} dt``.
    """
    bs = [float(b) for b in bs]
    xs = [float(x) for x in xs]
    if len(bs) != len(xs) or not bs:
        raise DomainError("bs and xs must have the same non-zero length")
    for v in [a, c] + bs + xs:
        _finite("argument", v)
    if not c > a > 0:
        raise DomainError(f"F_D Euler integral requires c > a > 0, got a={a}, c={c}")
    if any(x > 0 for x in xs):
        raise DomainError("F_D is only evaluated for non-positive arguments")
    if all(x == 0 for x in xs):
        return 1.0
    bs_arr = np.array(bs)
    mags = -np.array(xs)

    def log_factor(t):
        return -(bs_arr[None, :] * np.log1p(mags[None, :] * t[:, None])).sum(axis=1)

    log_norm = math.lgamma(c) - math.lgamma(a) - math.lgamma(c - a)
    return math.exp(log_norm + _euler_log_integral(a, c, log_factor, float(mags.max()), ctl))
