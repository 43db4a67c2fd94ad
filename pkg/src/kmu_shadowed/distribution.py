"""The kappa-mu shadowed distribution of the instantaneous SNR.

A variate ``gamma ~ S(gamma_bar; kappa, mu, m)`` is described by
:class:`ShadowedParams`.  Two derived rates appear everywhere:

* ``a = mu (1 + kappa) / gamma_bar``
* ``b = a m / (mu kappa + m)``, the dominant pole of the MGF.

With ``q = mu kappa / (mu kappa + m)`` the distribution is a negative-binomial
mixture of gamma laws, ``gamma | n ~ Gamma(mu + n, 1/a)`` with
``n ~ NB(m, q)``.  Formulas are assembled in log space so that the limit
sentinels (``m = 1e8``, ``kappa = 1e-12``) do not overflow.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DomainError
from .specialfn import (DEFAULT_CONTROL, NumericControl, _hyp1f1_nonneg, _log_bessel_series,
                        _log_phi2_unit_gap)

__all__ = [
    "ShadowedParams",
    "FadingModel",
    "SpecialCase",
    "KAPPA_ZERO",
    "M_INFINITY",
    "pdf",
    "log_pdf",
    "conditional_pdf",
    "cdf",
    "mgf",
    "special_case",
]

# Finite stand-ins for the limits kappa -> 0 and m -> infinity.
KAPPA_ZERO = 1e-12
M_INFINITY = 1e8

# tolerance on the overshoot of a computed CDF above one
CDF_SLACK = 1e-9


@dataclass(frozen=True)
class ShadowedParams:
    """Parameters of one kappa-mu shadowed variate.

    Parameters
    ----------
    gamma_bar : float
        Mean SNR (linear), ``> 0``.
    kappa : float
        Ratio of dominant to scattered power, ``>= 0``.
    mu : float
        Real extension of the number of clusters, ``> 0``.
    m : float
        Nakagami-m shadowing severity of the dominant components, ``> 0``.
    """

    gamma_bar: float
    kappa: float
    mu: float
    m: float

    def __post_init__(self):
        for name in ("gamma_bar", "kappa", "mu", "m"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.gamma_bar <= 0:
            raise DomainError(f"gamma_bar must be positive, got {self.gamma_bar}")
        if self.kappa < 0:
            raise DomainError(f"kappa must be non-negative, got {self.kappa}")
        if self.mu <= 0:
            raise DomainError(f"mu must be positive, got {self.mu}")
        if self.m <= 0:
            raise DomainError(f"m must be positive, got {self.m}")

    @property
    def a(self) -> float:
        """Rate ``mu (1 + kappa) / gamma_bar`` of the gamma components."""
        return self.mu * (1.0 + self.kappa) / self.gamma_bar

    @property
    def q(self) -> float:
        """Success probability ``mu kappa / (mu kappa + m)`` of the mixing law."""
        return self.mu * self.kappa / (self.mu * self.kappa + self.m)

    @property
    def b(self) -> float:
        """Dominant MGF pole ``a m / (mu kappa + m)``."""
        return self.a * self.m / (self.mu * self.kappa + self.m)

    @property
    def log_shadow_factor(self) -> float:
        """``log (m / (mu kappa + m))^m``, computed without forming ``m^m``."""
        return -self.m * math.log1p(self.mu * self.kappa / self.m)


def _as_gamma(gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(np.isnan(g)):
        raise DomainError("gamma must not be NaN")
    if np.any(g < 0):
        raise DomainError("gamma must be non-negative")
    return g


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def log_pdf(p: ShadowedParams, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """Natural log of :func:`pdf`; ``-inf`` where the density vanishes."""
    g = _as_gamma(gamma)
    flat = np.atleast_1d(g).ravel()
    if p.mu < 1 and np.any(flat == 0):
        raise DomainError(f"the density diverges at gamma = 0 for mu = {p.mu} < 1")
    y = p.a * flat
    log_pre = (p.mu * math.log(p.mu) + p.mu * math.log1p(p.kappa) - math.lgamma(p.mu)
               - math.log(p.gamma_bar) + p.log_shadow_factor)
    _, log_hyp = _hyp1f1_nonneg(p.m, p.mu, y * p.q, ctl)
    with np.errstate(divide="ignore", invalid="ignore"):
        power = (p.mu - 1.0) * np.log(flat / p.gamma_bar)
    if p.mu == 1.0:
        power = np.zeros_like(flat)
    out = log_pre + power - y + log_hyp
    return _out(out.reshape(g.shape))


def pdf(p: ShadowedParams, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """Probability density of the instantaneous SNR.

    ``f(g) = mu^mu m^m (1+kappa)^mu / (Gamma(mu) gamma_bar (mu kappa + m)^m)
    (g/gamma_bar)^(mu-1) exp(-a g) 1F1(m; mu; a q g)``.

    Parameters
    ----------
    p : ShadowedParams
    gamma : float or array_like
        Non-negative SNR values (linear).
    ctl : NumericControl

    Returns
    -------
    float or ndarray

    Raises
    ------
    DomainError
        For negative ``gamma``, or ``gamma = 0`` when ``mu < 1``.
    """
    return _out(np.exp(log_pdf(p, gamma, ctl)))


def conditional_pdf(p: ShadowedParams, gamma, xi: float):
    """Density of the SNR given the shadowing amplitude ``xi``.

    This is the kappa-mu law with the dominant power scaled by ``xi^2``,
    ``f(g | xi) = mu (1+kappa)^((mu+1)/2) / (gamma_bar kappa^((mu-1)/2) e^(xi^2 mu kappa))
    (g / (xi^2 gamma_bar))^((mu-1)/2) e^(-a g) I_(mu-1)(2 mu xi sqrt(kappa (1+kappa) g / gamma_bar))``.

    The Bessel factor is expanded in its ascending series and merged with the
    powers in front, so ``kappa = 0`` needs no special handling.
    """
    if not (xi > 0 and math.isfinite(xi)):
        raise DomainError(f"xi must be positive, got {xi}")
    g = _as_gamma(gamma)
    flat = np.atleast_1d(g).ravel()
    if p.mu < 1 and np.any(flat == 0):
        raise DomainError(f"the density diverges at gamma = 0 for mu = {p.mu} < 1")
    y = p.a * flat
    # argument of the Bessel series: (x/2)^2 for x = 2 mu xi sqrt(kappa (1+kappa) g / gamma_bar)
    arg = p.mu * p.mu * xi * xi * p.kappa * (1.0 + p.kappa) * flat / p.gamma_bar
    log_series = _log_bessel_series(p.mu - 1.0, arg, DEFAULT_CONTROL) + math.lgamma(p.mu)
    with np.errstate(divide="ignore", invalid="ignore"):
        power = (p.mu - 1.0) * np.log(flat / p.gamma_bar) if p.mu != 1.0 else 0.0
    log_f = (p.mu * math.log(p.mu) + p.mu * math.log1p(p.kappa) - math.log(p.gamma_bar)
             - math.lgamma(p.mu) - xi * xi * p.mu * p.kappa + power - y + log_series)
    return _out(np.exp(log_f).reshape(g.shape))


def _log_cdf_core(mu_tot, m_tot, a, q, log_pre, flat, ctl):
    """``log`` of ``pre g^mu Phi2(mu-m, m; mu+1; -a g, -b g)`` for a unit gap."""
    A = a * flat
    log_phi = _log_phi2_unit_gap(m_tot, mu_tot + 1.0, A, A * q, ctl)
    with np.errstate(divide="ignore"):
        return log_pre + mu_tot * np.log(flat) + log_phi


def _finish_cdf(log_val, shape):
    val = np.exp(log_val)
    if np.any(val > 1.0 + CDF_SLACK):
        raise ConvergenceError(f"CDF evaluated to {val.max()!r} > 1; accuracy lost",
                               partial=float(val.max()))
    return _out(val.reshape(shape))


def cdf(p: ShadowedParams, gamma, ctl: NumericControl = DEFAULT_CONTROL):
    """Cumulative distribution function of the instantaneous SNR.

    ``F(g) = mu^(mu-1) m^m (1+kappa)^mu / (Gamma(mu) (mu kappa + m)^m) (g/gamma_bar)^mu
    Phi2(mu - m, m; mu + 1; -a g, -b g)``.

    The result is never clipped; a value above ``1 + 1e-9`` raises
    :class:`ConvergenceError`.
    """
    g = _as_gamma(gamma)
    flat = np.atleast_1d(g).ravel()
    log_pre = ((p.mu - 1.0) * math.log(p.mu) + p.mu * math.log1p(p.kappa) - math.lgamma(p.mu)
               + p.log_shadow_factor - p.mu * math.log(p.gamma_bar))
    return _finish_cdf(_log_cdf_core(p.mu, p.m, p.a, p.q, log_pre, flat, ctl), g.shape)


def mgf(p: ShadowedParams, s, ctl: NumericControl = DEFAULT_CONTROL):
    """Moment generating function ``E[exp(s gamma)]`` for ``s < b``.

    Uses the real form ``(1 - s/a)^(m - mu) (1 - s/b)^(-m)``, rearranged as
    ``(1 - s/a)^(-mu) (1 + s q / (b - s))^m`` so that large ``m`` does not
    cancel.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s_arr)):
        raise DomainError("s must be finite")
    if np.any(s_arr >= p.b):
        raise DomainError(f"the MGF diverges for s >= b = {p.b!r} (pole of the transform)")
    log_m = -p.mu * np.log1p(-s_arr / p.a) + p.m * np.log1p(s_arr * p.q / (p.b - s_arr))
    return _out(np.exp(log_m))


class FadingModel(enum.Enum):
    """Classical fading laws contained in the kappa-mu shadowed family."""

    ONE_SIDED_GAUSSIAN = "OneSidedGaussian"
    RAYLEIGH = "Rayleigh"
    NAKAGAMI_M = "NakagamiM"
    RICIAN = "Rician"
    KAPPA_MU = "KappaMu"
    RICIAN_SHADOWED = "RicianShadowed"


@dataclass(frozen=True)
class SpecialCase:
    """A named special case with its shape parameters.

    ``shape1`` is ``m`` for Nakagami-m, ``K`` for Rician and Rician shadowed and
    ``kappa`` for kappa-mu; ``shape2`` is ``mu`` for kappa-mu and ``m`` for
    Rician shadowed.
    """

    name: FadingModel
    shape1: Optional[float] = None
    shape2: Optional[float] = None

    def __post_init__(self):
        name = self.name
        if isinstance(name, str):
            try:
                name = FadingModel(name)
            except ValueError:
                raise DomainError(f"unknown fading model {self.name!r}") from None
            object.__setattr__(self, "name", name)
        need = {
            FadingModel.ONE_SIDED_GAUSSIAN: 0,
            FadingModel.RAYLEIGH: 0,
            FadingModel.NAKAGAMI_M: 1,
            FadingModel.RICIAN: 1,
            FadingModel.KAPPA_MU: 2,
            FadingModel.RICIAN_SHADOWED: 2,
        }[name]
        given = [v for v in (self.shape1, self.shape2) if v is not None]
        if len(given) != need or (need == 1 and self.shape1 is None):
            raise DomainError(f"{name.value} takes {need} shape parameter(s)")
        for v in given:
            if not math.isfinite(v):
                raise DomainError(f"shape parameters must be finite, got {v}")
        if name is FadingModel.NAKAGAMI_M and not self.shape1 > 0:
            raise DomainError(f"Nakagami-m requires m > 0, got {self.shape1}")
        if name in (FadingModel.RICIAN, FadingModel.KAPPA_MU, FadingModel.RICIAN_SHADOWED) \
                and self.shape1 < 0:
            raise DomainError(f"{name.value} requires a non-negative first shape, got {self.shape1}")
        if name in (FadingModel.KAPPA_MU, FadingModel.RICIAN_SHADOWED) and not self.shape2 > 0:
            raise DomainError(f"{name.value} requires a positive second shape, got {self.shape2}")


def special_case(c: SpecialCase, gamma_bar: float) -> ShadowedParams:
    """Map a classical fading model onto kappa-mu shadowed parameters.

    Limits are realized with the sentinels :data:`KAPPA_ZERO` and
    :data:`M_INFINITY`.

    Examples
    --------
    >>> special_case(SpecialCase(FadingModel.RAYLEIGH), 1.0)
    ShadowedParams(gamma_bar=1.0, kappa=1e-12, mu=1.0, m=100000000.0)
    """
    n = c.name
    if n is FadingModel.ONE_SIDED_GAUSSIAN:
        return ShadowedParams(gamma_bar, KAPPA_ZERO, 0.5, M_INFINITY)
    if n is FadingModel.RAYLEIGH:
        return ShadowedParams(gamma_bar, KAPPA_ZERO, 1.0, M_INFINITY)
    if n is FadingModel.NAKAGAMI_M:
        return ShadowedParams(gamma_bar, KAPPA_ZERO, c.shape1, M_INFINITY)
    if n is FadingModel.RICIAN:
        return ShadowedParams(gamma_bar, c.shape1, 1.0, M_INFINITY)
    if n is FadingModel.KAPPA_MU:
        return ShadowedParams(gamma_bar, c.shape1, c.shape2, M_INFINITY)
    return ShadowedParams(gamma_bar, c.shape1, 1.0, c.shape2)
