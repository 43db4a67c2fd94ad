"""Sum and maximum of independent kappa-mu shadowed variates.

The sum of ``M`` independent branches has a density proportional to
``gamma^(sum mu - 1)`` times the ``2M``-variate confluent function
``Phi2^(2M)(mu_1 - m_1, ..., m_1, ...; sum mu; -a_1 gamma, ..., -b_1 gamma, ...)``,
evaluated here by Laplace inversion.  For identical branches the same
quantity collapses to the bivariate ``Phi2``.  The maximum follows from the
product of the marginal CDFs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from .distribution import CDF_SLACK, ShadowedParams, _as_gamma, _out, cdf, pdf
from .errors import ConvergenceError, DomainError
from .specialfn import (DEFAULT_CONTROL, NumericControl, _clog1p, _log_phi2_multi_ray,
                        _log_phi2_unit_gap, _log_phi2_zero_gap)

__all__ = [
    "BranchSet",
    "sum_pdf",
    "sum_cdf",
    "sum_pdf_iid",
    "sum_cdf_iid",
    "sum_pdf_asymptotic",
    "sum_cdf_asymptotic",
    "max_cdf",
    "max_pdf",
]


@dataclass(frozen=True)
class BranchSet:
    """Ordered collection of independent branches (``M >= 1``)."""

    branches: Tuple[ShadowedParams, ...]

    def __init__(self, branches: Iterable[ShadowedParams]):
        items = tuple(branches)
        if not items:
            raise DomainError("a BranchSet needs at least one branch")
        for i, b in enumerate(items):
            if not isinstance(b, ShadowedParams):
                raise DomainError(f"branch {i} is not a ShadowedParams instance: {b!r}")
        object.__setattr__(self, "branches", items)

    def __len__(self):
        return len(self.branches)

    def __iter__(self):
        return iter(self.branches)

    def __getitem__(self, i):
        return self.branches[i]

    @property
    def mu_total(self) -> float:
        return math.fsum(b.mu for b in self.branches)

    def log_prefactor(self) -> float:
        """``log prod_k a_k^mu_k (b_k / a_k)^m_k``, the common factor of every sum formula."""
        return math.fsum(b.mu * math.log(b.a) + b.log_shadow_factor for b in self.branches)

    def phi2_arguments(self):
        """Parameters, index and unit-scale arguments of the ``2M``-variate ``Phi2``.

        Order: ``(mu_1 - m_1, ..., mu_M - m_M, m_1, ..., m_M)`` and
        ``(-a_1, ..., -a_M, -b_1, ..., -b_M)``.
        """
        betas = [b.mu - b.m for b in self.branches] + [b.m for b in self.branches]
        xs = [-b.a for b in self.branches] + [-b.b for b in self.branches]
        return betas, self.mu_total, xs


def _paired_log_transform(bs: BranchSet, extra_pole: bool):
    """``log prod_k (s+a_k)^(-mu_k) (1 + a_k q_k / (s + b_k))^m_k``, optionally over ``s``.

    This is ``s^-nu prod (1 - x_j/s)^-beta_j`` for the sum arguments, grouped
    per branch so that the large opposite exponents ``mu - m`` and ``m`` never
    meet.  The returned callable takes the contour variable and a real shift.
    """
    a = np.array([b.a for b in bs])
    bb = np.array([b.b for b in bs])
    gap = a * np.array([b.q for b in bs])
    mus = np.array([b.mu for b in bs])
    ms = np.array([b.m for b in bs])

    def log_transform(s, shift):
        out = -np.log(s) if extra_pole else np.zeros(s.shape, complex)
        for k in range(a.size):
            out = out - mus[k] * np.log(s + (a[k] + shift))
            if gap[k] != 0.0:
                out = out + ms[k] * _clog1p(gap[k] / (s + (bb[k] + shift)))
        return out

    return log_transform


def _context(bs: BranchSet) -> str:
    return "; ".join(f"branch {i}: {b}" for i, b in enumerate(bs))


def _sum_zero_limit(bs, log_gamma_norm, exponent):
    """Value at ``gamma = 0``: zero, the finite prefactor, or divergence."""
    if exponent > 0:
        return 0.0
    if exponent == 0:
        return math.exp(bs.log_prefactor() - log_gamma_norm)
    raise DomainError("the sum density diverges at gamma = 0 when the total mu is below 1")


def sum_pdf(bs: BranchSet, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """Density of the sum of independent kappa-mu shadowed variates.

    Evaluated as the prefactor times ``gamma^(nu-1) Phi2^(2M)(...; nu; ...)``
    with ``nu = sum mu_k``; the ``Phi2^(2M)`` factor comes from a Laplace
    inversion whose contour is moved onto the rightmost singularity
    ``-min b_k``, which keeps relative accuracy in the tail.
    """
    g = _as_gamma(gamma)
    flat = np.atleast_1d(g).ravel()
    betas, nu, xs = bs.phi2_arguments()
    out = np.empty(flat.size)
    zero = flat == 0
    if zero.any():
        out[zero] = _sum_zero_limit(bs, math.lgamma(nu), nu - 1.0)
    pos = ~zero
    if pos.any():
        t = flat[pos]
        shift = -min(b.b for b in bs)
        try:
            sign, log_phi = _log_phi2_multi_ray(betas, nu, xs, t, ctl,
                                                log_transform=_paired_log_transform(bs, False),
                                                shift=shift)
        except ConvergenceError as exc:
            raise ConvergenceError(f"{exc} [{_context(bs)}]", exc.partial, exc.terms) from exc
        if np.any(sign <= 0):
            raise ConvergenceError(f"sum density lost all significant digits [{_context(bs)}]")
        out[pos] = np.exp(bs.log_prefactor() - math.lgamma(nu) + (nu - 1.0) * np.log(t) + log_phi)
    return _out(out.reshape(g.shape))


def sum_cdf(bs: BranchSet, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """CDF of the sum, prefactor times ``gamma^nu Phi2^(2M)(...; 1 + nu; ...)``.

    The inversion contour stays at the origin (the transform has a pole
    there), so the result carries absolute rather than relative accuracy in
    the upper tail.
    """
    g = _as_gamma(gamma)
    flat = np.atleast_1d(g).ravel()
    betas, nu, xs = bs.phi2_arguments()
    out = np.zeros(flat.size)
    pos = flat > 0
    if pos.any():
        t = flat[pos]
        try:
            sign, log_phi = _log_phi2_multi_ray(betas, 1.0 + nu, xs, t, ctl,
                                                log_transform=_paired_log_transform(bs, True),
                                                shift=0.0)
        except ConvergenceError as exc:
            raise ConvergenceError(f"{exc} [{_context(bs)}]", exc.partial, exc.terms) from exc
        if np.any(sign <= 0):
            raise ConvergenceError(f"sum CDF lost all significant digits [{_context(bs)}]")
        out[pos] = np.exp(bs.log_prefactor() - math.lgamma(1.0 + nu) + nu * np.log(t) + log_phi)
    if np.any(out > 1.0 + CDF_SLACK):
        raise ConvergenceError(f"sum CDF evaluated to {out.max()!r} > 1 [{_context(bs)}]",
                               partial=float(out.max()))
    return _out(out.reshape(g.shape))


def _check_count(M):
    if int(M) != M or M < 1:
        raise DomainError(f"the number of branches must be a positive integer, got {M}")
    return int(M)


def sum_pdf_iid(p: ShadowedParams, M: int, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """Density of the sum of ``M`` i.i.d. branches via the bivariate ``Phi2``.

    ``Phi2(M(mu - m), M m; M mu; -a gamma, -b gamma)``, which has a zero
    parameter gap and reduces to ``e^(-a gamma) 1F1(M m; M mu; a q gamma)``.
    """
    M = _check_count(M)
    g = _as_gamma(gamma)
    flat = np.atleast_1d(g).ravel()
    nu = M * p.mu
    log_pre = M * (p.mu * math.log(p.a) + p.log_shadow_factor) - math.lgamma(nu)
    if nu < 1 and np.any(flat == 0):
        raise DomainError("the sum density diverges at gamma = 0 when the total mu is below 1")
    A = p.a * flat
    _, log_phi = _log_phi2_zero_gap(M * p.m, nu, A, A * p.q, ctl)
    with np.errstate(divide="ignore", invalid="ignore"):
        power = (nu - 1.0) * np.log(flat) if nu != 1.0 else 0.0
    return _out(np.exp(log_pre + power + log_phi).reshape(g.shape))


def sum_cdf_iid(p: ShadowedParams, M: int, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """CDF of the sum of ``M`` i.i.d. branches via ``Phi2(M(mu-m), M m; 1 + M mu; ...)``."""
    M = _check_count(M)
    g = _as_gamma(gamma)
    flat = np.atleast_1d(g).ravel()
    nu = M * p.mu
    log_pre = M * (p.mu * math.log(p.a) + p.log_shadow_factor) - math.lgamma(1.0 + nu)
    A = p.a * flat
    log_phi = _log_phi2_unit_gap(M * p.m, 1.0 + nu, A, A * p.q, ctl)
    with np.errstate(divide="ignore"):
        val = np.exp(log_pre + nu * np.log(flat) + log_phi)
    if np.any(val > 1.0 + CDF_SLACK):
        raise ConvergenceError(f"CDF evaluated to {val.max()!r} > 1", partial=float(val.max()))
    return _out(val.reshape(g.shape))


def sum_pdf_asymptotic(bs: BranchSet, gamma):
    """High-SNR form of :func:`sum_pdf`: the prefactor times ``gamma^(nu-1)``."""
    g = _as_gamma(gamma)
    nu = bs.mu_total
    if nu < 1 and np.any(g == 0):
        raise DomainError("the sum density diverges at gamma = 0 when the total mu is below 1")
    with np.errstate(divide="ignore"):
        power = (nu - 1.0) * np.log(g) if nu != 1.0 else np.zeros(g.shape)
    return _out(np.exp(bs.log_prefactor() - math.lgamma(nu) + power))


def sum_cdf_asymptotic(bs: BranchSet, gamma):
    """High-SNR form of :func:`sum_cdf`: the prefactor times ``gamma^nu / Gamma(1 + nu)``."""
    g = _as_gamma(gamma)
    nu = bs.mu_total
    with np.errstate(divide="ignore"):
        return _out(np.exp(bs.log_prefactor() - math.lgamma(1.0 + nu) + nu * np.log(g)))


def max_cdf(bs: BranchSet, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """CDF of the largest branch SNR, ``prod_k F_k(gamma)``."""
    g = _as_gamma(gamma)
    out = np.ones(g.shape)
    for i, b in enumerate(bs):
        try:
            out = out * cdf(b, g, ctl)
        except ConvergenceError as exc:
            raise ConvergenceError(f"branch {i}: {exc}", exc.partial, exc.terms) from exc
    return _out(out)


def max_pdf(bs: BranchSet, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """Density of the largest branch SNR, ``sum_k f_k(gamma) prod_(r != k) F_r(gamma)``."""
    g = _as_gamma(gamma)
    cdfs = [np.asarray(cdf(b, g, ctl)) for b in bs]
    out = np.zeros(g.shape)
    for k, b in enumerate(bs):
        term = np.asarray(pdf(b, g, ctl))
        for r, F in enumerate(cdfs):
            if r != k:
                term = term * F
        out = out + term
    return _out(out)
