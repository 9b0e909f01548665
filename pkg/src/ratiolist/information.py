"""Scalar information functionals, capacity, and the Fano-type bound evaluators.

Entropies and mutual informations are reported in bits where the name says so;
everything that feeds a converse bound works in nats, because the additive
constant in the list converse is one nat.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import Channel

LN2 = math.log(2.0)


def _check_prob(t: float, name: str) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0 or math.isnan(t):
        raise ValueError(f"{name}={t} outside [0,1]")
    return t


def as_distribution(p, size: int | None = None, tol: float = 1e-12) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("distribution must be a nonempty vector")
    if size is not None and p.size != size:
        raise ValueError(f"distribution has {p.size} entries, expected {size}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("distribution has negative or non-finite entries")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"distribution sums to {p.sum():.17g}")
    return p


def uniform(k: int) -> np.ndarray:
    return np.full(k, 1.0 / k)


def binary_entropy(t: float) -> float:
    """h2(t) in bits, with 0 log 0 = 0."""
    t = _check_prob(t, "t")
    if t in (0.0, 1.0):
        return 0.0
    return -t * math.log2(t) - (1 - t) * math.log2(1 - t)


def binary_entropy_nats(t: float) -> float:
    t = _check_prob(t, "t")
    if t in (0.0, 1.0):
        return 0.0
    return -t * math.log(t) - (1 - t) * math.log1p(-t)


def binary_divergence(p: float, q: float) -> float:
    """D(p||q) between Bernoulli laws, in nats; ``inf`` when p is not absolutely continuous."""
    p = _check_prob(p, "p")
    q = _check_prob(q, "q")
    total = 0.0
    for a, b in ((p, q), (1 - p, 1 - q)):
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        total += a * math.log(a / b)
    return max(total, 0.0)


def _row_divergences(w: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(W(.|x) || q) in nats for every input x."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0) / np.where(q > 0, q, 1.0)), 0.0)
    return terms.sum(axis=1)


def mutual_information_nats(px, ch: Channel) -> float:
    px = as_distribution(px, ch.input_size)
    q = px @ ch.transition
    return float(max(px @ _row_divergences(ch.transition, q), 0.0))


def mutual_information(px, ch: Channel) -> float:
    """I(X;Y) in bits for input law ``px`` over channel ``ch``."""
    return mutual_information_nats(px, ch) / LN2


@dataclass(frozen=True)
class CapacityResult:
    capacity_bits: float
    optimal_input: np.ndarray
    iterations: int
    gap: float  # upper minus lower certificate, bits
    converged: bool = True

    @property
    def capacity_nats(self) -> float:
        return self.capacity_bits * LN2


def blahut_arimoto(ch: Channel, tol: float = 1e-9, max_iter: int = 100_000) -> CapacityResult:
    """Capacity of a DMC by Blahut-Arimoto iteration.

    Stops once the certified interval ``[sum_x p(x) D_x, max_x D_x]`` (where
    ``D_x = D(W(.|x) || pW)``) is narrower than ``tol`` bits. The reported
    capacity is the best lower certificate, achieved by ``optimal_input``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    w = ch.transition
    p = uniform(ch.input_size)
    best_lo, best_hi, best_p = -math.inf, math.inf, p
    it = 0
    for it in range(1, max_iter + 1):
        d = _row_divergences(w, p @ w)
        lo = float(p @ d) / LN2
        hi = float(d.max()) / LN2
        if lo > best_lo:
            best_lo, best_p = lo, p
        best_hi = min(best_hi, hi)
        if best_hi - best_lo <= tol:
            break
        p = p * np.exp(d - d.max())
        p = p / p.sum()
    gap = max(best_hi - best_lo, 0.0)
    converged = gap <= tol
    if not converged:
        warnings.warn(f"Blahut-Arimoto stopped after {it} iterations with gap {gap:.3g} bits",
                      RuntimeWarning, stacklevel=2)
    return CapacityResult(max(best_lo, 0.0), best_p, it, gap, converged)


def fano_list_rhs(pe: float, alphabet_size: int, expected_log_list: float) -> float:
    """``h2(Pe) + Pe ln(|X|-1) + (1-Pe) E ln|L(Y)|`` in nats.

    Upper bound on H(X|Y) for a list estimator that misses X with
    probability ``pe``.
    """
    pe = _check_prob(pe, "pe")
    if alphabet_size < 2:
        raise ValueError("alphabet_size must be at least 2")
    if expected_log_list < 0:
        raise ValueError("expected_log_list must be nonnegative")
    return binary_entropy_nats(pe) + pe * math.log(alphabet_size - 1) + (1 - pe) * expected_log_list


def identification_list_bound(C_bits: float, eps: float, delta: float) -> float:
    """Asymptotic floor ``1 - C/(C+delta-eps)`` on Pr(list exceeds its shrunken size)."""
    if C_bits <= 0:
        raise ValueError("capacity must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if delta <= eps:
        raise ValueError(f"need delta > eps, got delta={delta}, eps={eps}")
    return min(max(1.0 - C_bits / (C_bits + delta - eps), 0.0), 1.0)


def converse_ratio_rhs(mutual_info_block: float, n: int, eps: float, zeta: float) -> float:
    """``(I(X^n;Y^n) + 1) / (n (1-eps)(1-zeta))``: ceiling on ``(1/n) ln r`` in nats/use."""
    if n < 1:
        raise ValueError("n must be positive")
    if mutual_info_block < 0:
        raise ValueError("mutual information must be nonnegative")
    for v, name in ((eps, "eps"), (zeta, "zeta")):
        if not 0.0 <= v < 1.0:
            raise ValueError(f"{name}={v} must lie in [0,1)")
    return (mutual_info_block + 1.0) / (n * (1 - eps) * (1 - zeta))


def converse_tradeoff_rhs(mutual_info_block: float, log_r: float) -> float:
    """Ceiling on ``(1-eps)(1-zeta)`` given ``ln r`` (nats): ``(I + 1) / ln r``.

    Values above 1 mean the constraint is inactive.
    """
    if log_r <= 0:
        return math.inf
    return (mutual_info_block + 1.0) / log_r
