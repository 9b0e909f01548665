"""Monte Carlo estimates of list-decoding errors and of the information spectra.

Trials are split into fixed-size chunks; chunk ``c`` draws from
``stream(seed, purpose, c)``. Per-chunk results are integer tallies (or
sample arrays placed by chunk index), so the merged result is identical for
any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import rng as rngmod
from ..channel import Channel, sample_outputs
from ..codes import Codebook
from ..decoding import Metric, ScoreEngine
from .core import Decoder, ErrorEstimate, SpectrumSample, list_stats, wilson_halfwidth

CHUNK_TRIALS = 4096
_BATCH_CELLS = 2**21


def _chunks(trials: int):
    for c, start in enumerate(range(0, trials, CHUNK_TRIALS)):
        yield c, min(CHUNK_TRIALS, trials - start)


def _draw(ch: Channel, cb: Codebook, seed: int, purpose: int, chunk: int, size: int):
    g = rngmod.stream(seed, purpose, chunk)
    msgs = g.integers(0, cb.M, size=size)
    u = g.random((size, cb.n))
    return msgs, sample_outputs(ch, cb.codewords[msgs], u)


def _batches(size: int, M: int, cells_per_pair: int):
    step = max(1, _BATCH_CELLS // (M * cells_per_pair))
    for start in range(0, size, step):
        yield slice(start, min(size, start + step))


def _error_chunk(args):
    ch, cb, metric, decoder, seed, chunk, size = args
    msgs, ys = _draw(ch, cb, seed, rngmod.TRIALS, chunk, size)
    engine = ScoreEngine(metric, cb.codewords)
    L = decoder.list_size
    tally = np.zeros(5, dtype=np.int64)
    for sl in _batches(size, cb.M, metric.input_size * metric.output_size):
        S = engine.scores(ys[sl]).T
        in_list, lsize, ge = list_stats(S, msgs[sl], decoder)
        big = lsize > L
        tally += [np.count_nonzero(~in_list), np.count_nonzero(big), np.count_nonzero(ge > L),
                  np.count_nonzero(~in_list | big), int(lsize.sum())]
    return tally


def _run(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def mc_list_error(ch: Channel, cb: Codebook, metric: Metric, decoder: Decoder,
                  trials: int, seed: int, workers: int = 1) -> ErrorEstimate:
    """Frequency estimates of the decoder's error events with Wilson standard errors.

    Each trial draws a uniform message, passes its codeword through the
    channel and decodes. Events: message missing from the list (first kind),
    list longer than ``decoder.list_size`` (second kind), more than
    ``list_size`` codewords scoring at least the transmitted one (counting).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    cb.check_alphabet(ch.input_size)
    jobs = [(ch, cb, metric, decoder, seed, c, size) for c, size in _chunks(trials)]
    tally = sum(_run(_error_chunk, jobs, workers))
    probs = [int(v) / trials for v in tally[:4]]
    names = ("eps_first_kind", "zeta_second_kind", "p_er_counting", "eps_or_zeta")
    return ErrorEstimate(
        *probs,
        mean_list_size=int(tally[4]) / trials,
        trials=trials,
        std_err={k: wilson_halfwidth(p, trials) for k, p in zip(names, probs)},
        seed=seed,
        mode="monte_carlo",
    )


def _phi_chunk(args):
    ch, cb, metric, seed, chunk, size = args
    msgs, ys = _draw(ch, cb, seed, rngmod.SPECTRUM, chunk, size)
    engine = ScoreEngine(metric, cb.codewords)
    out = np.empty(size)
    for sl in _batches(size, cb.M, metric.input_size * metric.output_size):
        S = engine.scores(ys[sl]).T
        st = S[np.arange(S.shape[0]), msgs[sl]][:, None]
        ge = np.count_nonzero(S >= st, axis=1)
        out[sl] = np.log(cb.M / ge) / cb.n
    return out


def phi_spectrum(ch: Channel, cb: Codebook, metric: Metric, trials: int, seed: int,
                 workers: int = 1) -> SpectrumSample:
    """I.i.d. samples of ``-(1/n) ln Phi`` (nats/use) with S uniform and ``Y ~ W^n(.|x_S)``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    jobs = [(ch, cb, metric, seed, c, size) for c, size in _chunks(trials)]
    values = np.concatenate(_run(_phi_chunk, jobs, workers))
    return SpectrumSample(values, statistic="-(1/n) ln Phi", n=cb.n, seed=seed)


def _density_chunk(args):
    ch, cb, seed, chunk, size = args
    msgs, ys = _draw(ch, cb, seed, rngmod.SPECTRUM, chunk, size)
    engine = ScoreEngine(Metric("matched", ch.log_transition, ch), cb.codewords)
    out = np.empty(size)
    for sl in _batches(size, cb.M, ch.input_size * ch.output_size):
        ll = engine.raw(ys[sl]).T
        own = ll[np.arange(ll.shape[0]), msgs[sl]]
        top = ll.max(axis=1)
        lse = top + np.log(np.exp(ll - top[:, None]).sum(axis=1))
        out[sl] = (math.log(cb.M) + own - lse) / cb.n
    return out


def info_density_spectrum(ch: Channel, cb: Codebook, trials: int, seed: int,
                          workers: int = 1) -> SpectrumSample:
    """Samples of ``(1/n) ln[P(S|Y) / P(S)]`` with the uniform prior on messages."""
    if trials < 1:
        raise ValueError("trials must be positive")
    jobs = [(ch, cb, seed, c, size) for c, size in _chunks(trials)]
    values = np.concatenate(_run(_density_chunk, jobs, workers))
    return SpectrumSample(values, statistic="(1/n) ln P(S|Y)/P(S)", n=cb.n, seed=seed)


def list_capacity_estimate(sample: SpectrumSample, theta: float, level: float = 0.01) -> float:
    """Low quantile of ``-(1/n) ln Phi`` shifted by the list exponent ``theta`` (nats/use)."""
    return sample.quantile(level) + theta
