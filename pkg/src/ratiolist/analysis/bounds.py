"""Achievability and converse bound evaluators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import rng as rngmod
from ..channel import Channel, sample_outputs
from ..codes import Codebook, rate_to_size, replicate_codebook
from ..decoding import LOG_ZERO, Metric, joint_type_counts, phi_from_type
from ..information import as_distribution, binary_divergence
from .core import Decoder
from .enumeration import (
    block_mutual_information,
    exact_counting_error,
    exact_list_error,
    expected_phi_exponent,
    output_blocks,
)
from .montecarlo import phi_spectrum


def fano_lower_bound(ch: Channel, cb: Codebook, metric: Metric, R: float, Theta: float,
                     trials: int | None = None, seed: int = 0) -> float:
    """``1 - E[-(1/n) ln Phi] / (R - Theta)``, a floor on the constant-list error.

    The expectation is enumerated exactly unless ``trials`` is given. The
    value can be negative; only ``max(0, value)`` is informative.
    """
    if not R > Theta >= 0:
        raise ValueError(f"need R > Theta >= 0, got R={R}, Theta={Theta}")
    if trials is None:
        e = expected_phi_exponent(ch, cb, metric)
    else:
        e = phi_spectrum(ch, cb, metric, trials, seed).mean()
    return 1.0 - e / (R - Theta)


def _type_cells(n: int, cells: int):
    if cells == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _type_cells(n - first, cells - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class RCBound:
    value: float
    M: int
    list_size: float
    threshold: float
    clamped: bool = False
    mode: str = "enumerate"


def _rc_term(phi: float, M: int, thr: float) -> float:
    if phi >= thr:
        return 1.0
    d = binary_divergence(thr, phi)
    return math.exp(-M * d) if math.isfinite(d) else 0.0


def rc_upper_bound(metric: Metric, px, ch: Channel, n: int, R: float, Theta: float,
                   trials: int | None = None, seed: int = 0) -> RCBound:
    """Random-coding upper bound on the best constant-list error at rate ``R``.

    Evaluates ``E[exp(-M D(a || Phi)) 1{Phi < a}] + E[1{Phi >= a}]`` with
    ``a = e^{-n(R-Theta)}``, ``M = ceil(e^{nR})`` and ``Phi`` the exact
    random-coding tail for ``(X, Y) ~ px x W`` i.i.d. The expectation is a
    sum over joint types unless ``trials`` asks for Monte Carlo.
    """
    if not R > Theta >= 0:
        raise ValueError(f"need R > Theta >= 0, got R={R}, Theta={Theta}")
    if metric.input_size != ch.input_size or metric.output_size != ch.output_size:
        raise ValueError("metric alphabet does not match the channel")
    px = as_distribution(px, ch.input_size)
    M = rate_to_size(n, R)
    thr = math.exp(-n * (R - Theta))
    nx, ny = ch.input_size, ch.output_size
    joint = px[:, None] * ch.transition
    if trials is None:
        parts = []
        logfact = math.lgamma(n + 1)
        for cells in _type_cells(n, nx * ny):
            k = np.array(cells).reshape(nx, ny)
            if np.any((k > 0) & (joint == 0)):
                continue
            logp = logfact + sum(c * math.log(joint.flat[i]) - math.lgamma(c + 1)
                                 for i, c in enumerate(cells) if c)
            parts.append(math.exp(logp) * _rc_term(phi_from_type(metric, px, k), M, thr))
        value, mode = math.fsum(parts), "enumerate"
    else:
        g = rngmod.stream(seed, rngmod.EXPECTATION)
        cdf = np.cumsum(px) / px.sum()
        xs = np.minimum((g.random((trials, n))[..., None] >= cdf).sum(-1), nx - 1)
        ys = sample_outputs(ch, xs, g.random((trials, n)))
        memo: dict = {}
        total = 0.0
        for x, y in zip(xs, ys):
            k = joint_type_counts(x[None], y[None], nx, ny)[0, 0]
            key = k.tobytes()
            if key not in memo:
                memo[key] = _rc_term(phi_from_type(metric, px, k), M, thr)
            total += memo[key]
        value, mode = total / trials, "monte_carlo"
    clamped = value > 1.0
    if value > 1.0 + 1e-9:
        raise ArithmeticError(f"random-coding bound {value!r} exceeds 1 beyond rounding")
    return RCBound(min(max(value, 0.0), 1.0), M, math.exp(n * Theta), thr, clamped, mode)


def lemma_monotonicity_check(ch: Channel, base: Codebook, metric: Metric, copies: int,
                             L: int = 1) -> tuple[float, float]:
    """Counting errors of ``base`` with list ``L`` and of its ``copies``-fold replication with list ``copies * L``."""
    p_base = exact_counting_error(ch, base, metric, L)
    p_rep = exact_counting_error(ch, replicate_codebook(base, copies), metric, copies * L)
    return p_base, p_rep


@dataclass(frozen=True)
class ConverseCheck:
    eps: float
    zeta: float
    log_r: float
    mutual_info: float

    @property
    def lhs(self) -> float:
        return (1 - self.eps) * (1 - self.zeta) * self.log_r

    @property
    def rhs(self) -> float:
        return self.mutual_info + 1.0

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def converse_check(ch: Channel, cb: Codebook, metric: Metric, decoder: Decoder) -> ConverseCheck:
    """Exact ``(1-eps)(1-zeta) ln r`` versus ``I(X^n;Y^n) + 1`` with ``r = M / list_size``."""
    err = exact_list_error(ch, cb, metric, decoder)
    return ConverseCheck(err.eps_first_kind, err.zeta_second_kind,
                         math.log(cb.M / decoder.list_size), block_mutual_information(ch, cb))


@dataclass(frozen=True)
class ErasuresOnlyEstimate:
    """``value_bits`` is per channel use; ``block_bits`` is the total for the length-``n`` block."""

    value_bits: float
    support: np.ndarray
    exhaustive: bool
    supports_searched: int
    n: int = 1

    @property
    def block_bits(self) -> float:
        return self.value_bits * self.n


def erasures_only_capacity_estimate(ch: Channel, n: int, max_blocks: int = 20,
                                    fallback_samples: int | None = None,
                                    seed: int = 0) -> ErasuresOnlyEstimate:
    """Best ``-(1/n) E log2 Phi`` under the erasures-only metric over uniform-on-support inputs.

    For input law uniform on a support set ``A`` of blocks, ``Phi(y)`` is the
    fraction of ``A`` consistent with ``y``. All nonempty ``A`` are tried when
    ``|X|^n <= max_blocks``; otherwise ``fallback_samples`` random supports
    are tried and the result is only a lower estimate (``exhaustive=False``).
    """
    nblocks = ch.input_size ** n
    blocks = output_blocks(ch.input_size, n, 0, nblocks)
    outs = output_blocks(ch.output_size, n, 0, ch.output_size ** n)
    logw = ch.log_transition
    ll = np.zeros((nblocks, outs.shape[0]))
    for i in range(n):
        ll = ll + logw[blocks[:, i][:, None], outs[:, i][None, :]]
    prob = np.exp(ll)
    consistent = (ll > LOG_ZERO).astype(float)

    def evaluate(masks: np.ndarray) -> np.ndarray:
        size = masks.sum(axis=1)
        c = masks @ consistent
        q = masks @ prob
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(q > 0, q * (np.log2(size)[:, None] - np.log2(np.where(c > 0, c, 1.0))), 0.0)
        return terms.sum(axis=1) / (size * n)

    if nblocks <= max_blocks:
        exhaustive = True
        best_val, best_mask, searched = -math.inf, None, 0
        total = 2**nblocks - 1
        step = 4096
        bits = np.arange(nblocks)
        for start in range(1, total + 1, step):
            ids = np.arange(start, min(total + 1, start + step))
            masks = ((ids[:, None] >> bits[None, :]) & 1).astype(float)
            vals = evaluate(masks)
            j = int(np.argmax(vals))
            if vals[j] > best_val + 1e-15:
                best_val, best_mask = float(vals[j]), masks[j]
            searched += ids.size
    else:
        if not fallback_samples:
            raise ValueError(f"|X|^n = {nblocks} exceeds {max_blocks}; enable fallback_samples")
        exhaustive = False
        g = rngmod.stream(seed, rngmod.SEARCH)
        masks = (g.random((fallback_samples, nblocks)) < 0.5).astype(float)
        masks[masks.sum(axis=1) == 0, 0] = 1.0
        masks[0] = 1.0
        vals = evaluate(masks)
        j = int(np.argmax(vals))
        best_val, best_mask, searched = float(vals[j]), masks[j], fallback_samples
    support = blocks[best_mask.astype(bool)]
    return ErasuresOnlyEstimate(max(best_val, 0.0), support, exhaustive, searched, n)


@dataclass
class BoundReport:
    fano_floor: float
    rc_upper: float
    converse_ratio_rhs: float
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"fano_floor": self.fano_floor, "rc_upper": self.rc_upper,
                "converse_ratio_rhs": self.converse_ratio_rhs, **self.params}


def fano_floor_bits(C_bits: float, R_bits: float, theta_bits: float = 0.0) -> float:
    """``1 - C / (R - Theta)``: asymptotic error floor for rates above ``C + Theta``."""
    if R_bits <= theta_bits:
        raise ValueError("need R > Theta")
    return 1.0 - C_bits / (R_bits - theta_bits)

