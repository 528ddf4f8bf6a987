"""Exact arithmetic on surviving-link-count distributions.

A protocol stage holds some number of parallel links per segment; this
module tracks the full probability mass function of that count through
link generation (binomial), entanglement swapping (minimum of adjacent
counts), and distillation (pairing links and keeping survivors).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .defaults import DEFAULT_ATTENUATION_M

# Normalization tolerance for a link-count pmf.
PMF_ATOL = 1e-9


class LinkCountDistribution:
    """Probability mass over {0..max_count} surviving links."""

    __slots__ = ("pmf",)

    def __init__(self, pmf) -> None:
        arr = np.asarray(pmf, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("pmf must be a non-empty 1-d array")
        if np.any(arr < 0.0):
            raise ValueError("pmf entries must be non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > PMF_ATOL:
            raise ValueError(f"pmf must sum to 1, got {total!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pmf", arr)

    def __setattr__(self, name, value):  # value semantics
        raise AttributeError("LinkCountDistribution is immutable")

    @property
    def max_count(self) -> int:
        return self.pmf.size - 1

    def probability_of(self, count: int) -> float:
        if 0 <= count <= self.max_count:
            return float(self.pmf[count])
        return 0.0

    @staticmethod
    def point_mass(count: int, max_count: int | None = None) -> "LinkCountDistribution":
        size = (max_count if max_count is not None else count) + 1
        if count >= size:
            raise ValueError("count exceeds max_count")
        pmf = np.zeros(size)
        pmf[count] = 1.0
        return LinkCountDistribution(pmf)


def link_success_probability(
    coupling_eff: float,
    segment_length_m: float,
    attenuation_m: float = DEFAULT_ATTENUATION_M,
) -> float:
    """Per-attempt probability that a midpoint Bell-state analyzer
    heralds an elementary link:

        pi0 = 1/2 * eta_c^2 * exp(-L0 / L_att)

    The factor 1/2 is the intrinsic linear-optics analyzer efficiency.
    """
    if not 0.0 <= coupling_eff <= 1.0:
        raise ValueError(f"coupling efficiency must be in [0, 1], got {coupling_eff}")
    if segment_length_m < 0.0:
        raise ValueError(f"segment length must be >= 0, got {segment_length_m}")
    if attenuation_m <= 0.0:
        raise ValueError(f"attenuation length must be > 0, got {attenuation_m}")
    return 0.5 * coupling_eff**2 * math.exp(-segment_length_m / attenuation_m)


def binomial_distribution(trials: int, p: float) -> LinkCountDistribution:
    """Exact Binomial(trials, p) pmf, evaluated stably in log space."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p == 0.0:
        return LinkCountDistribution.point_mass(0, trials)
    if p == 1.0:
        return LinkCountDistribution.point_mass(trials, trials)
    k = np.arange(trials + 1)
    log_comb = gammaln(trials + 1) - gammaln(k + 1) - gammaln(trials - k + 1)
    log_pmf = log_comb + k * math.log(p) + (trials - k) * math.log1p(-p)
    return LinkCountDistribution(np.exp(log_pmf))


def _survival(pmf: np.ndarray, upper: int) -> np.ndarray:
    """P(X >= k) for k in 0..upper inclusive, zero beyond the support."""
    out = np.zeros(upper + 1)
    rev = np.cumsum(pmf[::-1])[::-1]
    upto = min(pmf.size, upper + 1)
    # P(X >= 0) is identically 1; rescaling by the summed mass keeps
    # repeated min-combines from compounding the pmf's rounding error
    # while preserving monotonicity of the tail.
    out[:upto] = rev[:upto] / rev[0]
    return out


def min_combine(x: LinkCountDistribution, y: LinkCountDistribution) -> LinkCountDistribution:
    """Distribution of min(X, Y) for independent link counts X and Y.

    After a swap, each long link consumes one link on either side, so
    the surviving count is the smaller of the two adjacent counts:
    P(min >= k) = P(X >= k) P(Y >= k).
    """
    size = min(x.max_count, y.max_count)
    sz = _survival(x.pmf, size + 1) * _survival(y.pmf, size + 1)
    return LinkCountDistribution(sz[:-1] - sz[1:])


def distill_thin(x: LinkCountDistribution, success_prob: float) -> LinkCountDistribution:
    """Link-count effect of one distillation round.

    Links are consumed in pairs and each pair survives independently
    with the given success probability; an odd leftover link has no
    partner and is discarded:

        p'(k) = sum_m p(m) * Binomial(floor(m/2), s)(k)
    """
    if not 0.0 <= success_prob <= 1.0:
        raise ValueError(f"success probability must be in [0, 1], got {success_prob}")
    half_max = x.max_count // 2
    weights = np.zeros(half_max + 1)
    np.add.at(weights, np.arange(x.max_count + 1) // 2, x.pmf)
    if success_prob == 1.0:
        return LinkCountDistribution(weights)
    out = np.zeros(half_max + 1)
    if success_prob == 0.0:
        out[0] = weights.sum()
        return LinkCountDistribution(out)
    support = np.nonzero(weights)[0]
    top = int(support[-1]) if support.size else 0
    # Walk Binomial(h, s) rows by the two-term recurrence, accumulating
    # each weighted row; rows beyond the last populated half-count are
    # never needed.
    s = success_prob
    q = 1.0 - s
    row = np.array([1.0])
    for h in range(top + 1):
        if weights[h] > 0.0:
            out[: h + 1] += weights[h] * row
        if h < top:
            nxt = np.empty(h + 2)
            nxt[0] = row[0] * q
            nxt[h + 1] = row[h] * s
            if h >= 1:
                nxt[1 : h + 1] = row[1:] * q + row[:h] * s
            row = nxt
    return LinkCountDistribution(out)


def expectation(x: LinkCountDistribution) -> float:
    """Mean link count, sum of m * p(m)."""
    return float(np.arange(x.max_count + 1) @ x.pmf)
