"""Monte-Carlo sampling of the kappa-mu shadowed model and empirical statistics.

Two samplers are provided.  :func:`sample_physical` draws the received power
``W = sum_i (X_i + xi p_i)^2 + (Y_i + xi q_i)^2`` literally, with ``n``
clusters of Gaussian scatter and a Nakagami-m shadowed line of sight.
:func:`sample_extended` accepts any real ``mu`` and uses the equivalent
mixture ``xi^2 ~ Gamma(m, 1/m)``, ``P | xi ~ Poisson(xi^2 mu kappa)``,
``W | P ~ Gamma(mu + P, 1)`` (scatter variance fixed at ``sigma^2 = 1/2``).

Random numbers come from Philox counter-based generators keyed by
``(seed, stream, branch, block)``.  Every block of :data:`BLOCK_SIZE` draws has
its own key, so results do not depend on how blocks are distributed over
worker threads.  Normal variates use numpy's ziggurat sampler.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from .distribution import ShadowedParams
from .errors import DomainError
from .performance import ModulationSpec
from .summax import BranchSet

__all__ = [
    "BLOCK_SIZE",
    "PhysicalModel",
    "SampleBatch",
    "Estimate",
    "sample_nakagami_xi",
    "sample_physical",
    "sample_extended",
    "empirical_cdf",
    "ks_statistic",
    "ks_threshold",
    "estimate_outage",
    "estimate_ber",
    "simulate_curve",
    "dump_batch",
    "load_batch",
]

BLOCK_SIZE = 1 << 16
MIN_RELIABLE_COUNT = 10_000

# stream identifiers, part of the generator key
_STREAM_XI = 0
_STREAM_PHYSICAL = 1
_STREAM_EXTENDED = 2


def _generator(seed: int, stream: int, branch: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream, branch, block))
    return np.random.Generator(np.random.Philox(ss))


def _check_seed(seed) -> int:
    if int(seed) != seed or not 0 <= seed < 2 ** 64:
        raise DomainError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return int(seed)


def _check_count(count) -> int:
    if int(count) != count or count < 1:
        raise DomainError(f"count must be a positive integer, got {count!r}")
    return int(count)


def _block_sizes(count: int):
    full, rest = divmod(count, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _map_blocks(fn, sizes, workers):
    """``[fn(j, size_j)]`` in block order, optionally on a thread pool."""
    if workers is None or workers <= 1 or len(sizes) <= 1:
        return [fn(j, s) for j, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


@dataclass(frozen=True)
class PhysicalModel:
    """Cluster-level description of the received signal power.

    Parameters
    ----------
    n : int
        Number of multipath clusters.
    sigma2 : float
        Variance of each in-phase and quadrature scatter component.
    dominant : sequence of (p_i, q_i)
        Dominant-component amplitudes, one pair per cluster.
    m : float
        Nakagami shaping parameter of the line-of-sight fluctuation.
    """

    n: int
    sigma2: float
    dominant: Tuple[Tuple[float, float], ...]
    m: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        dom = tuple((float(p), float(q)) for p, q in self.dominant)
        if len(dom) != self.n:
            raise DomainError(f"need {self.n} dominant pairs, got {len(dom)}")
        if not all(math.isfinite(v) for pair in dom for v in pair):
            raise DomainError("dominant amplitudes must be finite")
        object.__setattr__(self, "dominant", dom)
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise DomainError(f"sigma2 must be positive, got {self.sigma2!r}")
        if not (math.isfinite(self.m) and self.m > 0):
            raise DomainError(f"m must be positive, got {self.m!r}")

    @property
    def d2(self) -> float:
        """Total dominant power ``sum p_i^2 + q_i^2``."""
        return math.fsum(p * p + q * q for p, q in self.dominant)

    @property
    def w_bar(self) -> float:
        """Mean received power ``d^2 + 2 sigma^2 n``."""
        return self.d2 + 2.0 * self.sigma2 * self.n

    def to_params(self, gamma_bar: float) -> ShadowedParams:
        """Equivalent :class:`ShadowedParams` with ``mu = n`` and ``kappa = d^2 / (2 sigma^2 n)``."""
        return ShadowedParams(gamma_bar, self.d2 / (2.0 * self.sigma2 * self.n), float(self.n), self.m)


@dataclass(frozen=True)
class SampleBatch:
    """Immutable batch of SNR draws together with the seed that produced it."""

    values: np.ndarray
    seed: int
    count: int
    _sorted: Optional[np.ndarray] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size != self.count:
            raise DomainError(f"count {self.count} does not match {vals.size} values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __eq__(self, other):
        if not isinstance(other, SampleBatch):
            return NotImplemented
        return (self.seed == other.seed and self.count == other.count
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def sorted_values(self) -> np.ndarray:
        if self._sorted is None:
            s = np.sort(self.values)
            s.setflags(write=False)
            object.__setattr__(self, "_sorted", s)
        return self._sorted


@dataclass(frozen=True)
class Estimate:
    """Monte-Carlo estimate with a confidence interval ``[lo, hi]``."""

    value: float
    lo: float
    hi: float
    count: int
    warning: Optional[str] = None

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


# ----------------------------------------------------------------------------
# samplers

def _xi2_block(rng, m, size):
    return rng.gamma(m, 1.0 / m, size)


def sample_nakagami_xi(m: float, count: int, seed: int, *, workers: Optional[int] = None) -> SampleBatch:
    """Nakagami-m amplitudes ``xi = sqrt(G)`` with ``G ~ Gamma(m, 1/m)``, so ``E[xi^2] = 1``."""
    if not (math.isfinite(m) and m > 0):
        raise DomainError(f"m must be positive, got {m!r}")
    count, seed = _check_count(count), _check_seed(seed)

    def block(j, size):
        return np.sqrt(_xi2_block(_generator(seed, _STREAM_XI, 0, j), m, size))

    return SampleBatch(np.concatenate(_map_blocks(block, _block_sizes(count), workers)), seed, count)


def _physical_block(pm: PhysicalModel, seed, branch, j, size):
    rng = _generator(seed, _STREAM_PHYSICAL, branch, j)
    xi = np.sqrt(_xi2_block(rng, pm.m, size))
    s = math.sqrt(pm.sigma2)
    w = np.zeros(size)
    for p, q in pm.dominant:
        x = rng.standard_normal(size) * s + xi * p
        y = rng.standard_normal(size) * s + xi * q
        w += x * x + y * y
    return w / pm.w_bar


def sample_physical(pm: PhysicalModel, gamma_bar: float, count: int, seed: int, *,
                    branch: int = 0, workers: Optional[int] = None) -> SampleBatch:
    """SNR draws ``gamma = gamma_bar W / W_bar`` from direct simulation of the cluster model.

    Each draw uses one shared ``xi`` and ``2n`` normal variates of variance
    ``sigma2``.  ``branch`` selects an independent stream for the same seed.
    """
    if not (math.isfinite(gamma_bar) and gamma_bar > 0):
        raise DomainError(f"gamma_bar must be positive, got {gamma_bar!r}")
    count, seed = _check_count(count), _check_seed(seed)

    def block(j, size):
        return gamma_bar * _physical_block(pm, seed, branch, j, size)

    return SampleBatch(np.concatenate(_map_blocks(block, _block_sizes(count), workers)), seed, count)


def _extended_block(p: ShadowedParams, seed, branch, j, size):
    """Unit-mean power draws ``W / W_bar`` for one block."""
    rng = _generator(seed, _STREAM_EXTENDED, branch, j)
    xi2 = _xi2_block(rng, p.m, size)
    los = p.mu * p.kappa
    counts = rng.poisson(xi2 * los) if los > 0 else np.zeros(size)
    w = rng.standard_gamma(p.mu + counts)
    return w / (p.mu * (1.0 + p.kappa))


def sample_extended(p: ShadowedParams, count: int, seed: int, *,
                    branch: int = 0, workers: Optional[int] = None) -> SampleBatch:
    """SNR draws for any real ``mu`` through the Poisson-gamma mixture.

    With ``sigma^2 = 1/2`` the line-of-sight power is ``d^2 = mu kappa``; given
    ``xi`` the power is ``Gamma(mu + P, 1)`` with ``P ~ Poisson(xi^2 mu kappa)``
    (the non-central chi-square law with ``2 mu`` degrees of freedom), and
    ``gamma = gamma_bar W / (mu (1 + kappa))``.
    """
    count, seed = _check_count(count), _check_seed(seed)

    def block(j, size):
        return p.gamma_bar * _extended_block(p, seed, branch, j, size)

    return SampleBatch(np.concatenate(_map_blocks(block, _block_sizes(count), workers)), seed, count)


# ----------------------------------------------------------------------------
# empirical statistics

def _check_batch(batch: SampleBatch):
    if batch.count == 0 or batch.values.size == 0:
        raise DomainError("empty sample batch")


def empirical_cdf(batch: SampleBatch, gamma):
    """Fraction of draws ``<= gamma``; one sort, then binary search per query."""
    _check_batch(batch)
    s = batch.sorted_values()
    g = np.asarray(gamma, dtype=float)
    if np.any(np.isnan(g)):
        raise DomainError("gamma must not be NaN")
    out = np.searchsorted(s, g, side="right") / s.size
    return float(out) if out.ndim == 0 else out


def ks_statistic(batch: SampleBatch, cdf_fn: Callable) -> float:
    """Kolmogorov-Smirnov distance ``sup |F_n - F|`` against ``cdf_fn``.

    ``cdf_fn`` is called once with the sorted sample array; scalar-only
    callables are tolerated through a fallback loop.
    """
    _check_batch(batch)
    s = batch.sorted_values()
    try:
        F = np.asarray(cdf_fn(s), dtype=float)
        if F.shape != s.shape:
            raise ValueError
    except (TypeError, ValueError):
        F = np.array([float(cdf_fn(x)) for x in s])
    n = s.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_threshold(count: int, level: float = 0.99) -> float:
    """Asymptotic Kolmogorov critical value ``K_level / sqrt(count)`` (about ``1.63/sqrt(n)`` at 99%)."""
    return float(stats.kstwobign.ppf(level) / math.sqrt(count))


def _wilson(k, n, z):
    p = k / n
    den = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def _bernstein(mean, var, n, span, delta, floor=None):
    """Two-sided empirical-Bernstein interval for a mean of values in a range of width ``span``."""
    log_term = math.log(4.0 / delta)
    half = math.sqrt(2.0 * var * log_term / n)
    if n > 1:
        half += 7.0 * span * log_term / (3.0 * (n - 1))
    else:
        half = span
    lo = mean - half
    if floor is not None:
        lo = max(lo, floor)
    return lo, mean + half


def _count_warning(n):
    if n < MIN_RELIABLE_COUNT:
        msg = f"only {n} trials; the confidence interval is unreliable below {MIN_RELIABLE_COUNT}"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        return msg
    return None


def _branch_matrix(batches: Sequence[SampleBatch]) -> np.ndarray:
    if not batches:
        raise DomainError("need at least one batch")
    for b in batches:
        _check_batch(b)
    counts = {b.count for b in batches}
    if len(counts) != 1:
        raise DomainError(f"branches must have equal counts, got {sorted(counts)}")
    return np.vstack([b.values for b in batches])


def estimate_outage(batches: Sequence[SampleBatch], combiner: str, eta: float,
                    level: float = 0.99) -> Estimate:
    """Outage fraction for selection (``"SC"``) or maximal ratio (``"MRC"``) combining.

    Returns the fraction of trials whose combined SNR is ``<= eta`` with a
    Wilson score interval at confidence ``level``.
    """
    g = _branch_matrix(batches)
    comb = combiner.upper()
    if comb == "SC":
        combined = g.max(axis=0)
    elif comb == "MRC":
        combined = g.sum(axis=0)
    else:
        raise DomainError(f"combiner must be 'SC' or 'MRC', got {combiner!r}")
    if not eta >= 0:
        raise DomainError(f"eta must be non-negative, got {eta!r}")
    n = combined.size
    k = int(np.count_nonzero(combined <= eta))
    z = stats.norm.ppf(0.5 + level / 2)
    lo, hi = _wilson(k, n, z)
    return Estimate(k / n, lo, hi, n, _count_warning(n))


def _conditional_ber(mod: ModulationSpec, gamma_sum):
    out = 0.0
    for alpha, beta in mod.pairs:
        out = out + alpha * 0.5 * special.erfc(np.sqrt(0.5 * beta * gamma_sum))
    return out


def _ber_span(mod: ModulationSpec) -> float:
    return 0.5 * sum(abs(a) for a, _ in mod.pairs)


def _ber_floor(mod: ModulationSpec):
    # conditional error probabilities are non-negative when every weight is
    return 0.0 if all(a >= 0 for a, _ in mod.pairs) else None


def estimate_ber(batches: Sequence[SampleBatch], mod: ModulationSpec,
                 noise_seed: Optional[int] = None, level: float = 0.99) -> Estimate:
    """Semi-analytic MRC bit-error estimate ``mean sum_r alpha_r Q(sqrt(beta_r gamma_MRC))``.

    No noise is simulated, so ``noise_seed`` is accepted only for interface
    compatibility.  The interval is an empirical-Bernstein bound, which stays
    valid when every trial sits deep in the tail of ``Q``.
    """
    g = _branch_matrix(batches)
    vals = _conditional_ber(mod, g.sum(axis=0))
    n = vals.size
    mean = math.fsum(vals) / n
    var = float(np.var(vals, ddof=1)) if n > 1 else 0.0
    lo, hi = _bernstein(mean, var, n, _ber_span(mod), 1.0 - level, _ber_floor(mod))
    return Estimate(mean, lo, hi, n, _count_warning(n))


def simulate_curve(bs: BranchSet, scales, target: str, count: int, seed: int, *,
                   eta: float = 1.0, mod: Optional[ModulationSpec] = None,
                   level: float = 0.99, simultaneous: bool = False,
                   workers: Optional[int] = None):
    """Monte-Carlo estimates over a grid of SNR scalings with common random numbers.

    Branch ``k`` at grid point ``x`` has mean SNR ``x * gamma_bar_k``.  One set
    of unit-mean draws per branch is generated block by block (same streams
    as :func:`sample_extended` with ``branch=k``) and reused at every grid
    point, so memory stays at one block regardless of ``count``.

    Parameters
    ----------
    target : {"outage-sc", "outage-mrc", "ber-mrc"}
    simultaneous : bool
        If true, the per-point confidence level is Bonferroni-adjusted so the
        band covers the whole curve with probability ``level``.

    Returns
    -------
    list of Estimate
    """
    if target not in ("outage-sc", "outage-mrc", "ber-mrc"):
        raise DomainError(f"unknown simulation target {target!r}")
    if target == "ber-mrc" and mod is None:
        raise DomainError("ber-mrc simulation needs a modulation")
    count, seed = _check_count(count), _check_seed(seed)
    scales = np.asarray(scales, dtype=float).ravel()
    if scales.size == 0 or np.any(~np.isfinite(scales)) or np.any(scales <= 0):
        raise DomainError("SNR scalings must be positive and finite")
    gbars = np.array([b.gamma_bar for b in bs])
    delta = (1.0 - level) / (scales.size if simultaneous else 1)

    def block(j, size):
        w = np.vstack([gbars[k] * _extended_block(b, seed, k, j, size) for k, b in enumerate(bs)])
        if target == "ber-mrc":
            total = w.sum(axis=0)
            vals = [_conditional_ber(mod, x * total) for x in scales]
            return (np.array([v.sum() for v in vals]), np.array([(v * v).sum() for v in vals]))
        comb = np.sort(w.max(axis=0) if target == "outage-sc" else w.sum(axis=0))
        # trial counts with x * combined <= eta
        return np.searchsorted(comb, eta / scales, side="right")

    parts = _map_blocks(block, _block_sizes(count), workers)
    n = count
    warning = _count_warning(n)
    out = []
    if target == "ber-mrc":
        span = _ber_span(mod)
        for i in range(scales.size):
            s1 = math.fsum(p[0][i] for p in parts)
            s2 = math.fsum(p[1][i] for p in parts)
            mean = s1 / n
            var = max(0.0, (s2 - n * mean * mean) / (n - 1)) if n > 1 else 0.0
            lo, hi = _bernstein(mean, var, n, span, delta, _ber_floor(mod))
            out.append(Estimate(mean, lo, hi, n, warning))
    else:
        z = stats.norm.ppf(1.0 - delta / 2)
        k = np.sum(np.vstack(parts), axis=0)
        for i in range(scales.size):
            lo, hi = _wilson(int(k[i]), n, z)
            out.append(Estimate(int(k[i]) / n, lo, hi, n, warning))
    return out


# ----------------------------------------------------------------------------
# batch dump

def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".txt")


def dump_batch(batch: SampleBatch, path) -> Path:
    """Write the draws as little-endian float64 and a ``kmu-batch v1 <count> <seed>`` sidecar."""
    path = Path(path)
    path.write_bytes(batch.values.astype("<f8").tobytes())
    _sidecar(path).write_text(f"kmu-batch v1 {batch.count} {batch.seed}\n", encoding="ascii")
    return path


def load_batch(path) -> SampleBatch:
    """Inverse of :func:`dump_batch`."""
    path = Path(path)
    fields = _sidecar(path).read_text(encoding="ascii").split()
    if len(fields) != 4 or fields[:2] != ["kmu-batch", "v1"]:
        raise DomainError(f"malformed batch header in {_sidecar(path)}")
    count, seed = int(fields[2]), int(fields[3])
    values = np.frombuffer(path.read_bytes(), dtype="<f8").astype(float)
    return SampleBatch(values, seed, count)
