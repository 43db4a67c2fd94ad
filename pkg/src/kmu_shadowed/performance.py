"""Outage and bit-error probability of diversity receivers.

Selection combining (SC) outage is the product of the branch CDFs at the
threshold; maximal ratio combining (MRC) outage is the CDF of the sum.  The
MRC bit-error probability of modulations with conditional error
``sum_r alpha_r Q(sqrt(beta_r gamma))`` is written in terms of the Lauricella
``F_D`` and evaluated from its Euler integral.

All SNR quantities here are linear; dB conversion lives in the CLI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .distribution import CDF_SLACK
from .errors import ConvergenceError, DomainError
from .specialfn import DEFAULT_CONTROL, NumericControl, _euler_log_integral, _log_phi2_unit_gap
from .summax import BranchSet, sum_cdf, sum_cdf_asymptotic

__all__ = [
    "ModulationSpec",
    "OutageQuery",
    "outage_sc",
    "outage_sc_asymptotic",
    "outage_mrc",
    "outage_mrc_asymptotic",
    "ber_mrc",
    "ber_mrc_numeric",
    "q_function",
]


@dataclass(frozen=True)
class ModulationSpec:
    """Constants ``{(alpha_r, beta_r)}`` of ``P_b = sum_r alpha_r E[Q(sqrt(beta_r gamma))]``."""

    pairs: Tuple[Tuple[float, float], ...]

    def __init__(self, pairs: Sequence[Tuple[float, float]]):
        items = tuple((float(a), float(b)) for a, b in pairs)
        if not items:
            raise DomainError("a modulation needs at least one (alpha, beta) pair")
        for a, b in items:
            if not (math.isfinite(a) and math.isfinite(b)) or b <= 0:
                raise DomainError(f"invalid modulation pair ({a}, {b}); beta must be positive")
        object.__setattr__(self, "pairs", items)

    @classmethod
    def bpsk(cls) -> "ModulationSpec":
        """Coherent BPSK, ``P_b = E[Q(sqrt(2 gamma))]``."""
        return cls([(1.0, 2.0)])


@dataclass(frozen=True)
class OutageQuery:
    """Branches of a diversity receiver and the SNR threshold ``eta`` (linear)."""

    branches: BranchSet
    eta: float

    def __post_init__(self):
        if not isinstance(self.branches, BranchSet):
            object.__setattr__(self, "branches", BranchSet(self.branches))
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise DomainError(f"eta must be positive, got {self.eta}")


def q_function(x):
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt(2)) / 2``."""
    from scipy.special import erfc
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def outage_sc(q: OutageQuery, ctl: NumericControl = DEFAULT_CONTROL) -> float:
    """SC outage probability, the product over branches of the CDF at ``eta``.

    Each factor is ``a^mu (b/a)^m eta^mu / Gamma(mu + 1) Phi2(mu - m, m; mu + 1; -a eta, -b eta)``.
    """
    log_total = 0.0
    for k, br in enumerate(q.branches):
        A = br.a * q.eta
        try:
            log_phi = float(_log_phi2_unit_gap(br.m, br.mu + 1.0, np.array([A]),
                                               np.array([A * br.q]), ctl)[0])
        except ConvergenceError as exc:
            raise ConvergenceError(f"branch {k}: {exc}", exc.partial, exc.terms) from exc
        log_f = (br.mu * math.log(A) + br.log_shadow_factor - math.lgamma(br.mu + 1.0) + log_phi)
        if log_f > math.log1p(CDF_SLACK):
            raise ConvergenceError(f"branch {k}: CDF evaluated above one", partial=math.exp(log_f))
        log_total += log_f
    return math.exp(log_total)


def outage_sc_asymptotic(q: OutageQuery) -> float:
    """High-SNR SC outage ``prod_k a_k^mu_k (b_k/a_k)^m_k eta^mu_k / Gamma(mu_k + 1)``."""
    return math.exp(math.fsum(
        br.mu * math.log(br.a * q.eta) + br.log_shadow_factor - math.lgamma(br.mu + 1.0)
        for br in q.branches))


def outage_mrc(q: OutageQuery, ctl: NumericControl = DEFAULT_CONTROL) -> float:
    """MRC outage probability, the CDF of the branch sum at ``eta``."""
    return float(sum_cdf(q.branches, q.eta, ctl))


def outage_mrc_asymptotic(q: OutageQuery) -> float:
    """High-SNR MRC outage, the leading monomial of the sum CDF."""
    return float(sum_cdf_asymptotic(q.branches, q.eta))


def _ber_log_terms(bs: BranchSet, mod: ModulationSpec, ctl: NumericControl):
    """``(sign, log|term|)`` of every modulation term of the closed form."""
    nu = bs.mu_total
    lam = 0.5 + nu
    c = 1.0 + nu
    mus = np.array([b.mu for b in bs])
    ms = np.array([b.m for b in bs])
    qs = np.array([b.q for b in bs])
    out = []
    for r, (alpha, beta) in enumerate(mod.pairs):
        if alpha == 0.0:
            continue
        A = np.array([2.0 * b.a / beta for b in bs])
        B = np.array([2.0 * b.b / beta for b in bs])
        gap = A * qs

        def log_factor(t, A=A, B=B, gap=gap):
            # prod_k (1 + A_k t)^-(mu_k - m_k) (1 + B_k t)^-m_k, grouped per branch
            tt = t[:, None]
            return (-mus * np.log1p(A * tt) + ms * np.log1p(gap * tt / (1.0 + B * tt))).sum(axis=1)

        try:
            log_int = _euler_log_integral(lam, c, log_factor, float(A.max()), ctl)
        except ConvergenceError as exc:
            raise ConvergenceError(f"modulation term {r}: {exc}", exc.partial, exc.terms) from exc
        # alpha sqrt(beta/(8 pi)) (2/beta)^lam Gamma(lam)/Gamma(c) P F_D, with
        # F_D = Gamma(c) / (Gamma(lam) Gamma(1/2)) * integral
        log_term = (math.log(abs(alpha)) + 0.5 * math.log(beta / (8.0 * math.pi))
                    + lam * math.log(2.0 / beta) + bs.log_prefactor()
                    - 0.5 * math.log(math.pi) + log_int)
        out.append((math.copysign(1.0, alpha), log_term))
    return out


def ber_mrc(bs: BranchSet, mod: ModulationSpec, ctl: NumericControl = DEFAULT_CONTROL) -> float:
    """Closed-form MRC bit-error probability through the Lauricella ``F_D``.

    ``P_b = Gamma(1/2 + nu) / Gamma(1 + nu) P sum_r alpha_r sqrt(beta_r / (8 pi))
    (2/beta_r)^(1/2 + nu) F_D(1/2 + nu; mu_k - m_k, m_k; 1 + nu; -2 a_k/beta_r, -2 b_k/beta_r)``
    with ``nu = sum mu_k`` and ``P = prod a_k^mu_k (b_k/a_k)^m_k``.  Terms are
    added in order of decreasing ``|alpha_r|`` with compensated summation.
    """
    if not isinstance(bs, BranchSet):
        bs = BranchSet(bs)
    terms = _ber_log_terms(bs, mod, ctl)
    order = sorted(zip(terms, mod.pairs), key=lambda x: -abs(x[1][0]))
    return math.fsum(s * math.exp(lv) for (s, lv), _ in order)


def ber_mrc_numeric(bs: BranchSet, mod: ModulationSpec, ctl: NumericControl = DEFAULT_CONTROL,
                    *, nodes: int = 40) -> float:
    """MRC bit-error probability by quadrature of the integrated-by-parts form.

    ``P_b = sum_r alpha_r sqrt(beta_r/(8 pi)) int_0^inf exp(-beta_r g / 2) g^(-1/2) F(g) dg``
    with ``F`` the CDF of the branch sum.  With ``g = u^2`` the integrand is
    smooth; panels are graded geometrically toward ``u = 0`` and the range is
    cut where the Gaussian weight drops below ``1e-18``.
    """
    if not isinstance(bs, BranchSet):
        bs = BranchSet(bs)
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = []
    for r, (alpha, beta) in enumerate(mod.pairs):
        u_max = math.sqrt(2.0 * 42.0 / beta)
        edges = np.concatenate(([0.0], u_max * 2.0 ** -np.arange(40, -1, -1)))
        lo, hi = edges[:-1, None], edges[1:, None]
        half = (hi - lo) / 2
        u = (lo + half * (x[None, :] + 1)).ravel()
        wu = (half * w[None, :]).ravel()
        F = np.asarray(sum_cdf(bs, u * u, ctl))
        integral = math.fsum(2.0 * wu * np.exp(-0.5 * beta * u * u) * F)
        total.append(alpha * math.sqrt(beta / (8.0 * math.pi)) * integral)
    return math.fsum(total)
