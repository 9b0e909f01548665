"""Codebooks and ratio functions.

Codewords are rows of an ``(M, n)`` integer array. Duplicate rows are legal
and count as distinct messages everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .information import as_distribution

MAX_CODEBOOK_SIZE = 2**26
# floors/ceilings of quantities that are integers up to roundoff
_ROUNDOFF = 1e-9


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        c = np.array(self.codewords, dtype=np.int64, copy=True)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError("codebook must be an (M, n) array with M, n >= 1")
        if c.min() < 0:
            raise ValueError("negative symbol in codebook")
        c.setflags(write=False)
        object.__setattr__(self, "codewords", c)

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]

    def __len__(self):
        return self.M

    def __getitem__(self, m: int) -> np.ndarray:
        return self.codewords[m]

    def __eq__(self, other):
        return isinstance(other, Codebook) and np.array_equal(self.codewords, other.codewords)

    def check_alphabet(self, input_size: int) -> None:
        if self.codewords.max() >= input_size:
            raise ValueError(f"codebook uses symbols beyond input alphabet of size {input_size}")


def random_codebook(n: int, M: int, px, rng: np.random.Generator) -> Codebook:
    """``M`` codewords with i.i.d. letters drawn from ``px``."""
    if n < 1 or M < 1:
        raise ValueError("n and M must be positive")
    if M > MAX_CODEBOOK_SIZE:
        raise ValueError(f"M={M} exceeds the maximum codebook size {MAX_CODEBOOK_SIZE}")
    px = as_distribution(px)
    cdf = np.cumsum(px)
    cdf /= cdf[-1]
    u = rng.random((M, n))
    words = np.minimum((u[..., None] >= cdf).sum(axis=-1), px.size - 1)
    return Codebook(words, provenance=f"random iid n={n} M={M}")


def replicate_codebook(base: Codebook, copies: int, max_size: int = MAX_CODEBOOK_SIZE) -> Codebook:
    """Each base codeword repeated ``copies`` times consecutively.

    Message ``m'`` of the result carries base codeword ``m' // copies``.
    """
    if copies < 1:
        raise ValueError("copies must be at least 1")
    if base.M * copies > max_size:
        raise ValueError(f"replicated size {base.M * copies} exceeds {max_size}")
    return Codebook(np.repeat(base.codewords, copies, axis=0),
                    provenance=f"{base.provenance} x{copies} replicated".strip())


def load_codebook(path: str | Path) -> Codebook:
    """Text format: ``n M`` then ``M`` rows of ``n`` symbol indices."""
    path = Path(path)
    rows = [ln.split() for ln in path.read_text().splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty codebook file")
    n, M = (int(v) for v in rows[0])
    body = rows[1:]
    if len(body) != M or any(len(r) != n for r in body):
        raise ValueError(f"{path}: expected {M} rows of {n} symbols")
    return Codebook(np.array(body, dtype=np.int64), provenance=str(path))


def save_codebook(cb: Codebook, path: str | Path) -> None:
    lines = [f"{cb.n} {cb.M}"] + [" ".join(map(str, row)) for row in cb.codewords]
    Path(path).write_text("\n".join(lines) + "\n")


RATIO_KINDS = ("full", "constant_list", "exponent", "iterated_log", "power")


@dataclass(frozen=True)
class RatioFunction:
    """Codebook-to-list-size ratio ``r(M, n)``; the permitted list is ``M / r``.

    ``param`` is the list size for ``constant_list``, the list exponent in
    nats per use for ``exponent`` (``r = M e^{-n param}``) and the exponent
    ``alpha`` for ``power`` (``L = M^(1-alpha)``). ``iterated_log`` uses
    ``r = ln M``.
    """

    kind: str = "full"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in RATIO_KINDS:
            raise ValueError(f"unknown ratio kind {self.kind!r}")
        if self.kind == "constant_list" and (self.param < 1 or self.param != int(self.param)):
            raise ValueError("constant list size must be a positive integer")
        if self.kind == "exponent" and self.param < 0:
            raise ValueError("list exponent must be nonnegative")
        if self.kind == "power" and not 0.0 <= self.param <= 1.0:
            raise ValueError("power exponent alpha must lie in [0,1]")

    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def constant_list(cls, L: int):
        return cls("constant_list", float(L))

    @classmethod
    def exponent(cls, theta_nats: float):
        return cls("exponent", float(theta_nats))

    @classmethod
    def iterated_log(cls):
        return cls("iterated_log")

    @classmethod
    def power(cls, alpha: float):
        return cls("power", float(alpha))


@dataclass(frozen=True)
class RatioValue:
    r: float
    L: int
    clamped: bool = False
    notes: tuple = field(default=())


def _snap(v: float):
    k = round(v)
    return k if abs(v - k) <= _ROUNDOFF * max(1.0, abs(v)) else None


def _floor(v: float) -> int:
    k = _snap(v)
    return int(k) if k is not None else int(math.floor(v))


def ceil_guarded(v: float) -> int:
    """Ceiling that ignores relative roundoff below 1e-9 (``ceil(e^{n ln 2}) == 2^n``)."""
    k = _snap(v)
    return int(k) if k is not None else int(math.ceil(v))


def ratio_eval(rf: RatioFunction, M: int, n: int) -> RatioValue:
    if M < 1 or n < 1:
        raise ValueError("M and n must be positive")
    if rf.kind == "full":
        r = float(M)
    elif rf.kind == "constant_list":
        r = M / rf.param
    elif rf.kind == "exponent":
        r = M * math.exp(-n * rf.param)
    elif rf.kind == "iterated_log":
        r = math.log(M)
    else:
        r = M ** rf.param
    notes = []
    if r < 1.0:
        notes.append(f"r={r:.6g} raised to 1")
        r = 1.0
    elif r > M:
        notes.append(f"r={r:.6g} lowered to M")
        r = float(M)
    L = _floor(M / r)
    if L < 1:
        notes.append("L raised to 1")
        L = 1
    elif L > M:
        L = M
    return RatioValue(r, L, bool(notes), tuple(notes))


def rate_to_size(n: int, rate_nats: float) -> int:
    """``M = ceil(e^{nR})`` with roundoff guard."""
    return max(1, ceil_guarded(math.exp(n * rate_nats)))


def example1_message_count(n: int, C_bits: float) -> float:
    """log2 of the largest message count for list size ``M^(1-1/n)``: ``n^2 C``."""
    if n < 1:
        raise ValueError("n must be positive")
    if C_bits < 0:
        raise ValueError("capacity must be nonnegative")
    return n * n * C_bits
