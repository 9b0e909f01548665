"""Decoder configurations, result records and vectorized list statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..decoding import (
    TIE_POLICIES,
    DecodeList,
    classic_decode,
    list_decode_threshold,
    list_decode_topL,
)

DECODER_KINDS = ("top_l", "threshold", "classic")
# spacing of -(1/n) ln Phi is at least ln(1 + 1/M) / n, far above this
_PREDICATE_GUARD = 1e-12


@dataclass(frozen=True)
class Decoder:
    """How lists are formed, and the permitted list size ``list_size``.

    ``top_l`` returns the ``list_size`` best messages under ``tie_policy``;
    ``threshold`` returns every message scoring at least ``tau`` (its list
    may exceed ``list_size``, which is a second-kind error); ``classic`` is
    the unique-argmax decoder (``list_size`` is 1).
    """

    kind: str = "top_l"
    list_size: int = 1
    tie_policy: str = "lowest_index"
    tau: float = -math.inf

    def __post_init__(self):
        if self.kind not in DECODER_KINDS:
            raise ValueError(f"unknown decoder kind {self.kind!r}")
        if self.tie_policy not in TIE_POLICIES:
            raise ValueError(f"unknown tie policy {self.tie_policy!r}")
        if self.list_size < 1:
            raise ValueError("list size must be at least 1")
        if self.kind == "classic" and self.list_size != 1:
            raise ValueError("the classic decoder has list size 1")

    def decode(self, scores) -> DecodeList:
        if self.kind == "top_l":
            return list_decode_topL(scores, min(self.list_size, len(scores)), self.tie_policy)
        if self.kind == "threshold":
            return list_decode_threshold(scores, self.tau)
        m = classic_decode(scores)
        return DecodeList(() if m is None else (m,), m is None)

    def describe(self) -> dict:
        d = {"kind": self.kind, "list_size": self.list_size}
        if self.kind == "top_l":
            d["tie_policy"] = self.tie_policy
        if self.kind == "threshold":
            d["tau"] = self.tau
        return d


def list_stats(S: np.ndarray, t: np.ndarray, dec: Decoder):
    """Per-row decoder outcome for score rows ``S`` (T, M) and transmitted indices ``t``.

    Returns ``(in_list, list_size, count_ge)`` where ``count_ge`` counts the
    messages (the transmitted one included) scoring at least the transmitted one.
    Agrees with :meth:`Decoder.decode` row by row without sorting.
    """
    T, M = S.shape
    rows = np.arange(T)
    st = S[rows, t][:, None]
    above = S > st
    tied = S == st
    gt = np.count_nonzero(above, axis=1)
    ge = gt + np.count_nonzero(tied, axis=1)
    if dec.kind == "top_l":
        L = min(dec.list_size, M)
        if dec.tie_policy == "lowest_index":
            eq_before = np.count_nonzero(tied & (np.arange(M)[None, :] < t[:, None]), axis=1)
            in_list = gt + eq_before < L
            size = np.full(T, L)
        else:
            in_list = ge <= L
            if L == M:
                size = np.full(T, M)
            else:
                part = -np.partition(-S, (L - 1, L), axis=1)
                vL, vnext = part[:, L - 1], part[:, L]
                size = np.where(vL == vnext, np.count_nonzero(S > vL[:, None], axis=1), L)
    elif dec.kind == "threshold":
        in_list = st[:, 0] >= dec.tau
        size = np.count_nonzero(S >= dec.tau, axis=1)
    else:
        in_list = ge == 1
        top = S.max(axis=1, keepdims=True)
        size = (np.count_nonzero(S == top, axis=1) == 1).astype(int)
    return in_list, size, ge


def wilson_halfwidth(p: float, trials: int, z: float = 1.0) -> float:
    """Half-width of the Wilson score interval at ``z`` standard deviations."""
    if trials <= 0:
        return 0.0
    denom = 1 + z * z / trials
    return z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))


@dataclass(frozen=True)
class ErrorEstimate:
    """First/second-kind and counting-event probabilities for one code and decoder.

    ``trials == 0`` marks an exact (enumerated) result, whose standard errors are 0.
    """

    eps_first_kind: float
    zeta_second_kind: float
    p_er_counting: float
    eps_or_zeta: float
    mean_list_size: float
    trials: int = 0
    std_err: dict = field(default_factory=dict)
    seed: int | None = None
    mode: str = "exact"

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "trials": self.trials,
            "seed": self.seed,
            "eps_first_kind": self.eps_first_kind,
            "zeta_second_kind": self.zeta_second_kind,
            "p_er_counting": self.p_er_counting,
            "eps_or_zeta": self.eps_or_zeta,
            "mean_list_size": self.mean_list_size,
            "std_err": dict(self.std_err),
        }


@dataclass
class SpectrumSample:
    """Samples (or an exact weighted law) of a normalized information statistic, nats/use."""

    values: np.ndarray
    weights: np.ndarray | None = None
    statistic: str = ""
    n: int = 1
    seed: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)

    def _sorted(self):
        order = np.argsort(self.values, kind="stable")
        v = self.values[order]
        w = np.full(v.size, 1.0 / v.size) if self.weights is None else self.weights[order]
        return v, w

    def quantile(self, q: float) -> float:
        """Smallest value whose (weighted) CDF reaches ``q``."""
        if not 0.0 <= q <= 1.0:
            raise ValueError("quantile level outside [0,1]")
        v, w = self._sorted()
        cdf = np.cumsum(w)
        i = int(np.searchsorted(cdf, q * cdf[-1] * (1 - 1e-12), side="left"))
        return float(v[min(i, v.size - 1)])

    def mean(self) -> float:
        v, w = self._sorted()
        return float(np.sum(v * w) / np.sum(w))

    def cdf(self, a: float) -> float:
        """``Pr(statistic < a)``."""
        v, w = self._sorted()
        return float(np.sum(w[v < a]) / np.sum(w))

    def summary(self, levels=(0.01, 0.05, 0.5)) -> dict:
        d = {"statistic": self.statistic, "n": self.n, "size": int(self.values.size),
             "mean": self.mean()}
        for q in levels:
            d[f"q{q:g}"] = self.quantile(q)
        return d
