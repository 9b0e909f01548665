"""Exact error probabilities by enumerating every message and every output block.

Output blocks are visited in lexicographic order, in chunks; each chunk's
contribution is summed with numpy and the chunk totals are combined with
``math.fsum``. The result is independent of the chunk size up to the last ulp
and fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..channel import Channel
from ..codes import Codebook, RatioFunction, ratio_eval
from ..decoding import Metric, ScoreEngine, fold_scores
from .core import _PREDICATE_GUARD, Decoder, ErrorEstimate, SpectrumSample, list_stats

ENUMERATION_CAP = 2**24
_CHUNK_CELLS = 2**21


class EnumerationTooLarge(ValueError):
    pass


def _clip(p: float) -> float:
    """Probabilities summed in floating point can overshoot [0, 1] by an ulp."""
    return min(max(p, 0.0), 1.0)


def output_blocks(output_size: int, n: int, start: int, stop: int) -> np.ndarray:
    """Output blocks with lexicographic indices ``start..stop-1`` as rows."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        out[:, i] = idx % output_size
        idx = idx // output_size
    return out


def _check(ch: Channel, cb: Codebook, metric: Metric | None, cap: int) -> int:
    cb.check_alphabet(ch.input_size)
    if metric is not None:
        if metric.input_size != ch.input_size or metric.output_size != ch.output_size:
            raise ValueError("metric alphabet does not match the channel")
    K = ch.output_size ** cb.n
    if K > cap:
        raise EnumerationTooLarge(f"|Y|^n = {K} exceeds the enumeration cap {cap}")
    return K


def enumerate_pairs(ch: Channel, cb: Codebook, metric: Metric | None = None, cap: int = ENUMERATION_CAP):
    """Yield ``(outputs, weights, scores)`` chunks.

    ``weights[m, j] = W^n(y_j | x_m)`` and ``scores[m, j] = q_n(x_m, y_j)``
    (``None`` without a metric).
    """
    K = _check(ch, cb, metric, cap)
    like = ScoreEngine(Metric("matched", ch.log_transition, ch), cb.codewords)
    scorer = ScoreEngine(metric, cb.codewords) if metric is not None else None
    step = max(1, _CHUNK_CELLS // (cb.M * ch.input_size * ch.output_size))
    for start in range(0, K, step):
        ys = output_blocks(ch.output_size, cb.n, start, min(K, start + step))
        counts = like.counts(ys)
        weights = np.exp(fold_scores(counts, ch.log_transition))
        scores = scorer.scores(ys) if scorer is not None else None
        yield ys, weights, scores


def exact_counting_error(ch: Channel, cb: Codebook, metric: Metric, L: int,
                         cap: int = ENUMERATION_CAP) -> float:
    """``Pr{#{m' : q(x_m', Y) >= q(x_S, Y)} > L}`` with S uniform."""
    if not 1 <= L <= cb.M:
        raise ValueError(f"list size {L} outside [1, {cb.M}]")
    parts = []
    for _, w, s in enumerate_pairs(ch, cb, metric, cap):
        for m in range(cb.M):
            count = np.count_nonzero(s >= s[m], axis=0)
            parts.append(float(np.sum(w[m][count > L])))
    return _clip(math.fsum(parts) / cb.M)


def exact_error_via_phi(ch: Channel, cb: Codebook, metric: Metric, rf: RatioFunction,
                        cap: int = ENUMERATION_CAP) -> float:
    """``Pr{-(1/n) ln Phi < (1/n) ln r(M, n)}`` with Phi the codebook-average tail.

    Phi is accumulated as a probability, ``sum_{x'} P(x') 1{q(x',Y) >= q(X,Y)}``
    with ``P`` uniform on the codebook, not as an integer count.
    """
    rv = ratio_eval(rf, cb.M, cb.n)
    n = cb.n
    threshold = math.log(rv.r) / n
    guard = _PREDICATE_GUARD * max(1.0, abs(threshold))
    prior = np.full(cb.M, 1.0 / cb.M)
    parts = []
    for _, w, s in enumerate_pairs(ch, cb, metric, cap):
        for m in range(cb.M):
            phi = prior @ (s >= s[m])
            stat = -np.log(phi) / n
            parts.append(float(np.sum(w[m][stat < threshold - guard])))
    return _clip(math.fsum(parts) / cb.M)


def exact_list_error(ch: Channel, cb: Codebook, metric: Metric, decoder: Decoder,
                     cap: int = ENUMERATION_CAP) -> ErrorEstimate:
    """All decoder error probabilities by full enumeration."""
    L = decoder.list_size
    acc = {k: [] for k in ("eps", "zeta", "count", "union", "size")}
    for _, w, s in enumerate_pairs(ch, cb, metric, cap):
        S = s.T
        for m in range(cb.M):
            t = np.full(S.shape[0], m)
            in_list, size, ge = list_stats(S, t, decoder)
            wm = w[m]
            big = size > L
            acc["eps"].append(float(np.sum(wm[~in_list])))
            acc["zeta"].append(float(np.sum(wm[big])))
            acc["count"].append(float(np.sum(wm[ge > L])))
            acc["union"].append(float(np.sum(wm[~in_list | big])))
            acc["size"].append(float(np.sum(wm * size)))
    tot = {k: math.fsum(v) / cb.M for k, v in acc.items()}
    return ErrorEstimate(
        eps_first_kind=_clip(tot["eps"]),
        zeta_second_kind=_clip(tot["zeta"]),
        p_er_counting=_clip(tot["count"]),
        eps_or_zeta=_clip(tot["union"]),
        mean_list_size=tot["size"],
        trials=0,
        std_err={k: 0.0 for k in ("eps_first_kind", "zeta_second_kind", "p_er_counting", "eps_or_zeta")},
        mode="exact",
    )


def block_mutual_information(ch: Channel, cb: Codebook, cap: int = ENUMERATION_CAP) -> float:
    """``I(X^n; Y^n)`` in nats with ``X^n`` uniform over the codebook (duplicates add mass)."""
    parts = []
    for _, w, _ in enumerate_pairs(ch, cb, None, cap):
        py = w.mean(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0) / np.where(py > 0, py, 1.0)), 0.0)
        parts.append(float(terms.sum()))
    return max(math.fsum(parts) / cb.M, 0.0)


def _phi_pairs(ch, cb, metric, cap):
    """Yield ``(weight_row, -(1/n) ln Phi row)`` for every message and output chunk."""
    for _, w, s in enumerate_pairs(ch, cb, metric, cap):
        for m in range(cb.M):
            count = np.count_nonzero(s >= s[m], axis=0)
            yield w[m], np.log(cb.M / count) / cb.n


def expected_phi_exponent(ch: Channel, cb: Codebook, metric: Metric, cap: int = ENUMERATION_CAP) -> float:
    """``E[-(1/n) ln Phi]`` in nats/use with S uniform over the codebook."""
    parts = [float(np.sum(w * v)) for w, v in _phi_pairs(ch, cb, metric, cap)]
    return math.fsum(parts) / cb.M


def exact_phi_spectrum(ch: Channel, cb: Codebook, metric: Metric, cap: int = ENUMERATION_CAP) -> SpectrumSample:
    """Exact law of ``-(1/n) ln Phi`` as a weighted sample."""
    law: dict = {}
    for w, v in _phi_pairs(ch, cb, metric, cap):
        keep = w > 0
        for value, weight in zip(v[keep], w[keep]):
            law.setdefault(float(value), []).append(float(weight))
    values = np.array(sorted(law))
    weights = np.array([math.fsum(law[v]) / cb.M for v in values])
    return SpectrumSample(values, weights, statistic="-(1/n) ln Phi", n=cb.n)


@dataclass(frozen=True)
class SpectrumInequality:
    lhs: float
    rhs: float
    eps: float
    mean_list_size: float
    list_size: int
    gamma: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-12


def info_spectrum_inequality(ch: Channel, cb: Codebook, metric: Metric, decoder: Decoder,
                             gamma: float, cap: int = ENUMERATION_CAP) -> SpectrumInequality:
    """Both sides of ``Pr{i(S;Y)/n <= ln(r)/n - gamma} <= eps + e^{-n gamma} E|L| / L``.

    ``i(S;Y) = ln(P(S|Y) / P(S))`` and ``r = M / L`` with ``L = decoder.list_size``.
    Any decoder is admissible; the left side depends only on the code.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    n, M, L = cb.n, cb.M, decoder.list_size
    threshold = math.log(M / L) / n - gamma
    parts = []
    for _, w, _ in enumerate_pairs(ch, cb, None, cap):
        py_sum = w.sum(axis=0)
        for m in range(M):
            wm = w[m]
            keep = wm > 0
            stat = np.log(M * wm[keep] / py_sum[keep]) / n
            parts.append(float(np.sum(wm[keep][stat <= threshold])))
    lhs = math.fsum(parts) / M
    err = exact_list_error(ch, cb, metric, decoder, cap)
    rhs = err.eps_first_kind + math.exp(-n * gamma) * err.mean_list_size / L
    return SpectrumInequality(lhs, rhs, err.eps_first_kind, err.mean_list_size, L, gamma)
