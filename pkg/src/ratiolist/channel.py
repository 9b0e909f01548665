"""Finite discrete memoryless channels.

A :class:`Channel` holds the stochastic matrix ``W[x, y]`` and its natural
logarithm, where impossible transitions carry the sentinel :data:`LOG_ZERO`
(``-inf``). The sentinel compares below every finite score and equal to itself,
which is what the erasures-only metric and tie handling rely on.

Blocks are plain 1-D integer numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

LOG_ZERO = -np.inf
ROW_SUM_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Channel:
    """Validated DMC transition matrix ``W(y|x)``, rows indexed by input."""

    transition: np.ndarray
    name: str = ""
    log_transition: np.ndarray = field(init=False, repr=False)
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.array(self.transition, dtype=float, copy=True)
        if w.ndim != 2 or w.size == 0:
            raise ValueError("transition matrix must be a nonempty 2-D array")
        if not np.all(np.isfinite(w)):
            raise ValueError("transition matrix has non-finite entries")
        if np.any(w < 0) or np.any(w > 1):
            bad = np.argwhere((w < 0) | (w > 1))[0]
            raise ValueError(f"entry W[{bad[0]},{bad[1]}]={w[tuple(bad)]} outside [0,1]")
        sums = w.sum(axis=1)
        for x, s in enumerate(sums):
            if abs(s - 1.0) > ROW_SUM_TOL:
                raise ValueError(f"row {x} sums to {s:.17g}, not 1")
        with np.errstate(divide="ignore"):
            logw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), LOG_ZERO)
        cum = np.cumsum(w, axis=1)
        cum = cum / cum[:, -1:]
        object.__setattr__(self, "transition", _freeze(w))
        object.__setattr__(self, "log_transition", _freeze(logw))
        object.__setattr__(self, "cdf", _freeze(cum))

    @property
    def input_size(self) -> int:
        return self.transition.shape[0]

    @property
    def output_size(self) -> int:
        return self.transition.shape[1]

    @property
    def support(self) -> np.ndarray:
        return self.transition > 0

    def __eq__(self, other):
        return isinstance(other, Channel) and np.array_equal(self.transition, other.transition)

    def __hash__(self):
        return hash(self.transition.tobytes())


def bsc(p: float) -> Channel:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"crossover probability {p} outside [0,1]")
    return Channel(np.array([[1 - p, p], [p, 1 - p]]), name=f"bsc:{p!r}")


def bec(e: float) -> Channel:
    """Binary erasure channel; output symbol 2 is the erasure."""
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"erasure probability {e} outside [0,1]")
    return Channel(np.array([[1 - e, 0.0, e], [0.0, 1 - e, e]]), name=f"bec:{e!r}")


def noiseless(k: int) -> Channel:
    if k < 1:
        raise ValueError("alphabet size must be positive")
    return Channel(np.eye(k), name=f"noiseless:{k}")


def useless(k_in: int, k_out: int) -> Channel:
    """Identical rows, uniform over outputs."""
    return Channel(np.full((k_in, k_out), 1.0 / k_out), name=f"useless:{k_in}x{k_out}")


def check_block(x, alphabet_size: int, what: str = "block") -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError(f"{what} must be one-dimensional")
    if x.size and (x.min() < 0 or x.max() >= alphabet_size):
        raise ValueError(f"{what} has symbols outside [0, {alphabet_size})")
    return x.astype(np.int64, copy=False)


def transmit(ch: Channel, x, rng: np.random.Generator) -> np.ndarray:
    """Sample ``Y^n ~ prod_i W(.|x_i)`` by inverse-CDF with one uniform per letter."""
    x = check_block(x, ch.input_size, "input block")
    u = rng.random(x.size)
    return sample_outputs(ch, x, u)


def sample_outputs(ch: Channel, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    # works for any shape of x as long as u matches it
    cdf = ch.cdf[x]
    y = (u[..., None] >= cdf).sum(axis=-1)
    return np.minimum(y, ch.output_size - 1)


def block_log_likelihood(ch: Channel, x, y) -> float:
    """``sum_i ln W(y_i|x_i)`` in nats; :data:`LOG_ZERO` if any factor vanishes."""
    x = check_block(x, ch.input_size, "input block")
    y = check_block(y, ch.output_size, "output block")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    terms = ch.log_transition[x, y]
    if np.any(terms == LOG_ZERO):
        return LOG_ZERO
    return float(terms.sum())


def load_channel(path: str | Path) -> Channel:
    """Read the text format: ``|X| |Y|`` then ``|X|`` rows of probabilities.

    Lines starting with ``#`` are comments.
    """
    path = Path(path)
    rows = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line.split())
    if not rows:
        raise ValueError(f"{path}: empty channel file")
    try:
        nx, ny = (int(v) for v in rows[0])
    except ValueError as exc:
        raise ValueError(f"{path}: header must be '|X| |Y|'") from exc
    body = rows[1:]
    if len(body) != nx or any(len(r) != ny for r in body):
        raise ValueError(f"{path}: expected {nx} rows of {ny} probabilities")
    return Channel(np.array(body, dtype=float), name=str(path))


def save_channel(ch: Channel, path: str | Path) -> None:
    lines = [f"{ch.input_size} {ch.output_size}"]
    lines += [" ".join(format(v, ".17g") for v in row) for row in ch.transition]
    Path(path).write_text("\n".join(lines) + "\n")
