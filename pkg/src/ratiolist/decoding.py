"""Decoding metrics, list decoders and the Phi statistic.

All supported metrics are letter-additive on an extended-real scale: a table
``q[a, b]`` (entries finite or ``-inf``) scores a codeword against an output by
``sum_i q[x_i, y_i]``. The erasures-only metric uses the table ``0 / -inf`` on
the channel support and reports ``1`` / ``0``.

Scores are never summed position by position. They are computed from the
joint type ``k[a, b]`` of the pair through a canonical form of the table
(:class:`ScoreForm`):

* rational tables (integers, short decimals) are scaled to integers ``z``
  with a common denominator ``D`` and the score is ``(sum k z) / D``, an exact
  integer sum followed by one division;
* other tables (such as log-likelihoods) are reduced to their distinct
  values ``u_0 < u_1 < ...``; with ``N_j`` the number of letters landing on
  value ``u_j`` the score is ``((0 + N_0 u_0) + N_1 u_1) + ...``.

Two pairs whose scores agree in exact arithmetic on these representations
get bit-identical floats, whatever their joint types, and the random-coding
law in :func:`phi_random_coding` is computed on the same integer keys. Ties
are therefore exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .channel import LOG_ZERO, Channel, check_block
from .codes import Codebook
from .information import as_distribution

METRIC_KINDS = ("matched", "additive", "hamming", "erasures_only")
TIE_POLICIES = ("lowest_index", "reject_ties")


@dataclass(frozen=True, eq=False)
class Metric:
    kind: str
    table: np.ndarray
    channel: Optional[Channel] = None

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        t = np.array(self.table, dtype=float, copy=True)
        if t.ndim != 2 or t.size == 0:
            raise ValueError("metric table must be a nonempty 2-D array")
        if np.any(np.isnan(t)) or np.any(t == np.inf):
            raise ValueError("metric table has NaN or +inf entries")
        if self.kind in ("additive", "hamming") and not np.all(np.isfinite(t)):
            raise ValueError("additive metric tables must be finite")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def input_size(self) -> int:
        return self.table.shape[0]

    @property
    def output_size(self) -> int:
        return self.table.shape[1]

    @property
    def indicator(self) -> bool:
        return self.kind == "erasures_only"

    @classmethod
    def matched(cls, ch: Channel) -> "Metric":
        return cls("matched", ch.log_transition, ch)

    @classmethod
    def additive(cls, table) -> "Metric":
        return cls("additive", table)

    @classmethod
    def hamming(cls, input_size: int, output_size: int | None = None) -> "Metric":
        """``q(x, y) = 1{x = y}`` on symbol indices."""
        output_size = input_size if output_size is None else output_size
        t = np.zeros((input_size, output_size))
        k = min(input_size, output_size)
        t[np.arange(k), np.arange(k)] = 1.0
        return cls("hamming", t)

    @classmethod
    def erasures_only(cls, ch: Channel) -> "Metric":
        return cls("erasures_only", np.where(ch.support, 0.0, LOG_ZERO), ch)

    def describe(self) -> str:
        if self.channel is not None:
            return f"{self.kind}({self.channel.name})"
        return self.kind


def load_metric_table(path) -> Metric:
    """Additive table file: ``|X| |Y|`` then ``|X|`` rows of reals."""
    path = Path(path)
    rows = [ln.split() for ln in path.read_text().splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise ValueError(f"{path}: header must be '|X| |Y|'")
    nx, ny = (int(v) for v in rows[0])
    body = rows[1:]
    if len(body) != nx or any(len(r) != ny for r in body):
        raise ValueError(f"{path}: expected {nx} rows of {ny} values")
    return Metric.additive(np.array(body, dtype=float))


# ---------------------------------------------------------------------------
# joint types and canonical scores

def _pack(blocks: np.ndarray, alphabet: int) -> np.ndarray:
    """Bit masks ``(N, alphabet)``: bit i of entry a is set iff ``block[i] == a``."""
    n = blocks.shape[1]
    weights = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
    out = np.empty((blocks.shape[0], alphabet), dtype=np.uint64)
    for a in range(alphabet):
        out[:, a] = ((blocks == a).astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
    return out


def joint_type_counts(codewords: np.ndarray, outputs: np.ndarray, nx: int, ny: int) -> np.ndarray:
    """``k[m, j, a, b] = #{i : codewords[m, i] = a, outputs[j, i] = b}``."""
    codewords = np.atleast_2d(codewords)
    outputs = np.atleast_2d(outputs)
    n = codewords.shape[1]
    if outputs.shape[1] != n:
        raise ValueError("codeword and output lengths differ")
    dtype = np.uint8 if n < 256 else np.int32
    if n <= 64:
        bx = _pack(codewords, nx)
        by = _pack(outputs, ny)
        k = np.bitwise_count(bx[:, None, :, None] & by[None, :, None, :])
        return k.astype(dtype, copy=False)
    k = np.zeros((codewords.shape[0], outputs.shape[0], nx, ny), dtype=dtype)
    for a in range(nx):
        xa = codewords == a
        for b in range(ny):
            k[:, :, a, b] = (xa.astype(np.int32) @ (outputs == b).astype(np.int32).T).astype(dtype)
    return k


# largest common denominator used for rational tables
_MAX_DENOMINATOR = 10**4
_MAX_INT_WEIGHT = 2**40


@dataclass(frozen=True, eq=False)
class ScoreForm:
    """Canonical representation of a score table.

    ``dead`` marks ``-inf`` cells. For a rational table (``denom > 0``)
    ``key`` holds the integer weights ``z``; otherwise ``key`` holds the index
    of each cell's value in ``values`` (sorted distinct finite entries).
    """

    dead: np.ndarray
    key: np.ndarray
    values: tuple
    denom: int

    @property
    def rational(self) -> bool:
        return self.denom > 0


def _rational_form(finite: np.ndarray):
    fracs = [Fraction(float(v)).limit_denominator(_MAX_DENOMINATOR) for v in finite]
    for f, v in zip(fracs, finite):
        if abs(float(f) - v) > 1e-12 * max(1.0, abs(v)):
            return None
    D = 1
    for f in fracs:
        D = D * f.denominator // math.gcd(D, f.denominator)
        if D > _MAX_DENOMINATOR:
            return None
    z = [int(f * D) for f in fracs]
    if any(abs(v) > _MAX_INT_WEIGHT for v in z):
        return None
    return D, z


@lru_cache(maxsize=256)
def _form_cached(table_key: bytes, shape: tuple) -> ScoreForm:
    t = np.frombuffer(table_key, dtype=float).reshape(shape)
    dead = t == LOG_ZERO
    cells = t[~dead]
    key = np.zeros(shape, dtype=np.int64)
    rat = _rational_form(cells) if cells.size else (1, [])
    if rat is not None:
        D, z = rat
        key[~dead] = z
        values, denom = (), D
    else:
        uniq = np.unique(cells)
        key[~dead] = np.searchsorted(uniq, cells)
        values, denom = tuple(float(u) for u in uniq), 0
    for a in (dead, key):
        a.setflags(write=False)
    return ScoreForm(dead, key, values, denom)


def score_form(table: np.ndarray) -> ScoreForm:
    t = np.ascontiguousarray(table, dtype=float)
    return _form_cached(t.tobytes(), t.shape)


class _Accumulator:
    """Builds canonical scores cell by cell from joint-type counts."""

    def __init__(self, form: ScoreForm, shape: tuple):
        self.form = form
        self.dead = np.zeros(shape, dtype=bool)
        if form.rational:
            self.total = np.zeros(shape, dtype=np.int64)
        else:
            self.groups = [np.zeros(shape, dtype=np.int64) for _ in form.values]

    def add(self, a: int, b: int, k: np.ndarray) -> None:
        f = self.form
        if f.dead[a, b]:
            self.dead |= k > 0
        elif f.rational:
            z = int(f.key[a, b])
            if z:
                self.total += k.astype(np.int64) * z
        else:
            self.groups[int(f.key[a, b])] += k

    def finish(self) -> np.ndarray:
        f = self.form
        if f.rational:
            s = self.total / f.denom
        else:
            s = np.zeros(self.dead.shape)
            for n_j, u in zip(self.groups, f.values):
                s = s + n_j * u
        return np.where(self.dead, LOG_ZERO, s)


def canonical_score(form: ScoreForm, k: np.ndarray) -> float:
    """Scalar version of :func:`fold_scores` for one joint type."""
    return float(fold_scores_form(np.asarray(k)[None], form)[0])


def fold_scores_form(counts: np.ndarray, form: ScoreForm) -> np.ndarray:
    nx, ny = form.key.shape
    acc = _Accumulator(form, counts.shape[:-2])
    for a in range(nx):
        for b in range(ny):
            acc.add(a, b, counts[..., a, b])
    return acc.finish()


def fold_scores(counts: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Canonical score from joint-type counts (last two axes are ``a, b``)."""
    return fold_scores_form(counts, score_form(table))


def _finish(metric: Metric, raw: np.ndarray) -> np.ndarray:
    if metric.indicator:
        return (raw == 0.0).astype(float)
    return raw


def score_matrix(metric: Metric, codewords: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    """Scores ``(M, K)`` of every codeword against every output block."""
    counts = joint_type_counts(codewords, outputs, metric.input_size, metric.output_size)
    return _finish(metric, fold_scores(counts, metric.table))


class ScoreEngine:
    """Scores one fixed codebook against many output blocks.

    Codeword bit masks are packed once; use this in loops over outputs.
    """

    def __init__(self, metric: Metric, codewords: np.ndarray):
        codewords = np.atleast_2d(np.asarray(codewords, dtype=np.int64))
        if codewords.max() >= metric.input_size:
            raise ValueError("codebook symbols outside the metric's input alphabet")
        self.metric = metric
        self.codewords = codewords
        self.n = codewords.shape[1]
        self.form = score_form(metric.table)
        self._packed = _pack(codewords, metric.input_size) if self.n <= 64 else None
        if self._packed is not None:
            self._cols = [np.ascontiguousarray(self._packed[:, a])[:, None]
                          for a in range(metric.input_size)]

    def counts(self, outputs: np.ndarray) -> np.ndarray:
        outputs = np.atleast_2d(outputs)
        nx, ny = self.metric.table.shape
        if self._packed is None:
            return joint_type_counts(self.codewords, outputs, nx, ny)
        by = _pack(outputs, ny)
        return np.bitwise_count(self._packed[:, None, :, None] & by[None, :, None, :])

    def raw(self, outputs: np.ndarray) -> np.ndarray:
        """Extended-real scores ``(M, K)`` before the erasures-only 0/1 mapping."""
        if self._packed is None:
            return fold_scores(self.counts(outputs), self.metric.table)
        outputs = np.atleast_2d(outputs)
        nx, ny = self.metric.table.shape
        by = _pack(outputs, ny)
        acc = _Accumulator(self.form, (self.codewords.shape[0], outputs.shape[0]))
        for b in range(ny):
            yb = np.ascontiguousarray(by[:, b])[None, :]
            for a in range(nx):
                acc.add(a, b, np.bitwise_count(self._cols[a] & yb))
        return acc.finish()

    def scores(self, outputs: np.ndarray) -> np.ndarray:
        return _finish(self.metric, self.raw(outputs))


def score_all(metric: Metric, cb: Codebook, y) -> np.ndarray:
    """Vector of ``q_n(x^n(m), y)`` for m = 0..M-1."""
    y = np.asarray(y)
    if y.ndim != 1 or y.size != cb.n:
        raise ValueError(f"output block must have length {cb.n}")
    if y.min() < 0 or y.max() >= metric.output_size:
        raise ValueError("output symbols outside the metric's output alphabet")
    if cb.codewords.max() >= metric.input_size:
        raise ValueError("codebook symbols outside the metric's input alphabet")
    return score_matrix(metric, cb.codewords, y[None, :])[:, 0]


# ---------------------------------------------------------------------------
# decoders

@dataclass(frozen=True)
class DecodeList:
    indices: tuple
    tie_flag: bool = False

    @property
    def list_size(self) -> int:
        return len(self.indices)

    def __contains__(self, m) -> bool:
        return m in self.indices


def list_decode_topL(scores, L: int, tie_policy: str = "lowest_index") -> DecodeList:
    """The ``L`` best-scoring messages.

    ``lowest_index`` breaks a tie at the boundary toward smaller indices and
    always returns exactly ``L`` messages. ``reject_ties`` drops every message
    tied with the boundary, so the list may be shorter.
    """
    s = np.asarray(scores, dtype=float)
    M = s.size
    if not 1 <= L <= M:
        raise ValueError(f"list size {L} outside [1, {M}]")
    if tie_policy not in TIE_POLICIES:
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    order = np.lexsort((np.arange(M), -s))
    if L == M:
        return DecodeList(tuple(range(M)), False)
    boundary, outside = s[order[L - 1]], s[order[L]]
    tie = bool(boundary == outside)
    if tie and tie_policy == "reject_ties":
        chosen = np.flatnonzero(s > boundary)
    else:
        chosen = order[:L]
    return DecodeList(tuple(sorted(int(i) for i in chosen)), tie)


def list_decode_threshold(scores, tau: float) -> DecodeList:
    s = np.asarray(scores, dtype=float)
    return DecodeList(tuple(int(i) for i in np.flatnonzero(s >= tau)), False)


def classic_decode(scores) -> Optional[int]:
    """Unique maximizer, or ``None`` (declared error) when the maximum is tied."""
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise ValueError("empty score vector")
    top = s.max()
    winners = np.flatnonzero(s == top)
    return int(winners[0]) if winners.size == 1 else None


def phi_count(scores, transmitted: int) -> float:
    """Fraction of codewords (duplicates included) scoring at least the transmitted one."""
    s = np.asarray(scores, dtype=float)
    if not 0 <= transmitted < s.size:
        raise IndexError(f"message {transmitted} outside codebook of size {s.size}")
    return int(np.count_nonzero(s >= s[transmitted])) / s.size


# ---------------------------------------------------------------------------
# Phi under i.i.d. random coding

def _convolve(dist: dict, letter: dict, add) -> dict:
    out: dict = {}
    for key, p in dist.items():
        for inc, q in letter.items():
            k2 = add(key, inc)
            out[k2] = out.get(k2, 0.0) + p * q
    return out


@lru_cache(maxsize=4096)
def _random_score_law(table_key: bytes, shape: tuple, px: tuple, type_y: tuple):
    form = _form_cached(table_key, shape)
    if form.rational:
        zero, add = 0, int.__add__
        unit = lambda a, b: int(form.key[a, b])  # noqa: E731
    else:
        J = len(form.values)
        zero = (0,) * J
        add = lambda u, v: tuple(i + j for i, j in zip(u, v))  # noqa: E731
        unit = lambda a, b: tuple(int(j == form.key[a, b]) for j in range(J))  # noqa: E731
    dist = {zero: 1.0}
    for b, nb in enumerate(type_y):
        letter: dict = {}
        for a, p in enumerate(px):
            if p > 0 and not form.dead[a, b]:
                inc = unit(a, b)
                letter[inc] = letter.get(inc, 0.0) + p
        for _ in range(nb):
            dist = _convolve(dist, letter, add)
    law: dict = {}
    for key, p in dist.items():
        if form.rational:
            v = key / form.denom
        else:
            v = 0.0
            for n_j, u in zip(key, form.values):
                v = v + n_j * u
        law[v] = law.get(v, 0.0) + p
    values = np.array(sorted(law), dtype=float)
    probs = np.array([law[v] for v in values])
    # tail[i] = Pr(score >= values[i]); mass on -inf scores is left out
    tail = np.cumsum(probs[::-1])[::-1]
    return values, tail


def random_score_tail(metric: Metric, px, type_y) -> tuple[np.ndarray, np.ndarray]:
    """Finite score values of ``X~px^n`` against an output of type ``type_y``, with upper tails."""
    px = as_distribution(px, metric.input_size)
    t = np.ascontiguousarray(metric.table)
    return _random_score_law(t.tobytes(), t.shape, tuple(float(p) for p in px),
                             tuple(int(v) for v in type_y))


def phi_from_type(metric: Metric, px, joint_type: np.ndarray) -> float:
    """Phi for a transmitted pair summarized by its joint type ``k[a, b]``."""
    k = np.asarray(joint_type)
    s = canonical_score(score_form(metric.table), k)
    if s == LOG_ZERO:
        return 1.0
    values, tail = random_score_tail(metric, px, k.sum(axis=0))
    i = int(np.searchsorted(values, s, side="left"))
    return float(min(tail[i], 1.0)) if i < values.size else 0.0


def phi_random_coding(metric: Metric, px, x, y) -> float:
    """Exact ``Pr{q(X~, y) >= q(x, y)}`` with ``X~`` i.i.d. ``px``.

    Convolves the per-letter laws of the integer score keys (see
    :class:`ScoreForm`), so ties are resolved exactly and the result is exact
    up to floating-point probability arithmetic for every supported metric.
    """
    x = check_block(x, metric.input_size, "input block")
    y = check_block(y, metric.output_size, "output block")
    if x.size != y.size:
        raise ValueError("length mismatch")
    k = joint_type_counts(x[None], y[None], metric.input_size, metric.output_size)[0, 0]
    return phi_from_type(metric, px, k)


def phi_random_coding_mc(metric: Metric, px, x, y, trials: int,
                         rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate of :func:`phi_random_coding` and its standard error."""
    x = check_block(x, metric.input_size, "input block")
    y = check_block(y, metric.output_size, "output block")
    px = as_distribution(px, metric.input_size)
    target = fold_scores(joint_type_counts(x[None], y[None], *metric.table.shape), metric.table)[0, 0]
    hits = 0
    done = 0
    cdf = np.cumsum(px) / px.sum()
    while done < trials:
        t = min(65536, trials - done)
        words = np.minimum((rng.random((t, x.size))[..., None] >= cdf).sum(-1), px.size - 1)
        raw = fold_scores(joint_type_counts(words, y[None], *metric.table.shape), metric.table)[:, 0]
        hits += int(np.count_nonzero(raw >= target))
        done += t
    p = hits / trials
    return p, math.sqrt(max(p * (1 - p), 0.0) / trials)
