"""One function per subcommand; each returns a list of run records.

Every random draw derives from the single ``seed`` of the config: the
random codebook from ``stream(seed, CODEBOOK)``, Monte Carlo trials from
``stream(seed, TRIALS, chunk)`` and so on (see :mod:`ratiolist.rng`).
Sweep points all reuse the top-level seed, so a one-point sweep reproduces
``simulate`` on that point.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math

from .. import rng as rngmod
from ..analysis import (
    Decoder,
    EnumerationTooLarge,
    block_mutual_information,
    exact_counting_error,
    exact_error_via_phi,
    exact_list_error,
    fano_floor_bits,
    fano_lower_bound,
    info_density_spectrum,
    list_capacity_estimate,
    mc_list_error,
    phi_spectrum,
    rc_upper_bound,
)
from ..analysis.enumeration import ENUMERATION_CAP
from ..codes import Codebook, RatioFunction, ceil_guarded, example1_message_count, load_codebook, random_codebook, rate_to_size, ratio_eval
from ..information import blahut_arimoto, converse_ratio_rhs, identification_list_bound, uniform
from .config import LN2, ConfigError, ExperimentConfig, parse_channel, parse_metric, parse_ratio
from .records import RunRecord

# joint types beyond this are averaged by Monte Carlo in the bounds command
RC_TYPE_LIMIT = 200_000

SWEEP_COLUMNS = (
    "index", "n", "rate_bits", "theta_bits", "M", "list_size", "trials", "seed",
    "eps_first_kind", "eps_first_kind_se", "zeta_second_kind", "p_er_counting",
    "eps_or_zeta", "mean_list_size",
)
SKIPPED_COLUMNS = ("index", "n", "rate_bits", "theta_bits", "reason")


def _code(cfg: ExperimentConfig, ch) -> tuple[Codebook, dict]:
    if cfg.code == "random":
        M = cfg.M if cfg.M is not None else rate_to_size(cfg.n, cfg.rate_bits * LN2)
        if M > cfg.max_M:
            raise ConfigError(f"M = {M} exceeds max_M = {cfg.max_M}")
        g = rngmod.stream(cfg.seed, rngmod.CODEBOOK)
        cb = random_codebook(cfg.n, M, uniform(ch.input_size), g)
    else:
        try:
            cb = load_codebook(cfg.code)
        except ValueError as exc:
            raise ConfigError(f"invalid codebook file {cfg.code}: {exc}") from None
        if cfg.n is not None and cfg.n != cb.n:
            raise ConfigError(f"--n {cfg.n} disagrees with codebook block length {cb.n}")
    try:
        cb.check_alphabet(ch.input_size)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    digest = hashlib.sha256(cb.codewords.tobytes()).hexdigest()
    info = {"M": cb.M, "n": cb.n, "rate_bits": math.log2(cb.M) / cb.n, "sha256": digest}
    return cb, info


def _list_size(cfg: ExperimentConfig, M: int, n: int) -> tuple[int, dict]:
    """Explicit ``list_size``, else ``floor(M/r)`` for ``ratio``, else ``ceil(2^{n theta})``."""
    if cfg.decoder == "classic":
        return 1, {"rule": "classic"}
    if cfg.list_size is not None:
        return min(cfg.list_size, M), {"rule": "explicit"}
    if cfg.ratio is not None:
        rv = ratio_eval(parse_ratio(cfg.ratio, cfg.theta_bits), M, n)
        return rv.L, {"rule": "ratio", "r": rv.r, "clamped": rv.clamped, "notes": list(rv.notes)}
    L = min(max(ceil_guarded(2.0 ** (n * cfg.theta_bits)), 1), M)
    return L, {"rule": "ceil(2^(n theta))"}


def _decoder(cfg: ExperimentConfig, L: int) -> Decoder:
    return Decoder(cfg.decoder, L, cfg.tie_policy, cfg.tau)


def _bits(summary: dict) -> dict:
    return {k: (v / LN2 if isinstance(v, float) and k not in ("n", "size") else v)
            for k, v in summary.items()}


def cmd_capacity(cfg: ExperimentConfig) -> list[RunRecord]:
    ch = parse_channel(cfg.channel)
    res = blahut_arimoto(ch)
    results = {
        "capacity_bits": res.capacity_bits,
        "capacity_nats": res.capacity_nats,
        "gap_bits": res.gap,
        "iterations": res.iterations,
        "converged": res.converged,
        "optimal_input": res.optimal_input,
    }
    return [RunRecord(cfg.command, cfg.echo(), results)]


def cmd_exact(cfg: ExperimentConfig) -> list[RunRecord]:
    ch = parse_channel(cfg.channel)
    metric = parse_metric(cfg.metric, ch)
    cb, code = _code(cfg, ch)
    if cfg.ratio is not None:
        rf = parse_ratio(cfg.ratio, cfg.theta_bits)
    else:
        L0, _ = _list_size(cfg, cb.M, cb.n)
        rf = RatioFunction.constant_list(L0)
    rv = ratio_eval(rf, cb.M, cb.n)
    try:
        counting = exact_counting_error(ch, cb, metric, rv.L)
        via_phi = exact_error_via_phi(ch, cb, metric, rf)
        err = exact_list_error(ch, cb, metric, _decoder(cfg, rv.L))
    except EnumerationTooLarge as exc:
        raise ConfigError(str(exc)) from None
    q = cb.M / rv.r
    results = {
        "code": code,
        "r": rv.r,
        "list_size": rv.L,
        "ratio_clamped": rv.clamped,
        "integral_ratio": abs(q - round(q)) <= 1e-9 * q,
        "counting_error": counting,
        "phi_error": via_phi,
        "identity_residual": abs(counting - via_phi),
        "decoder": _decoder(cfg, rv.L).describe(),
        "errors": err.as_dict(),
    }
    return [RunRecord(cfg.command, cfg.echo(), results)]


def _simulate_point(cfg: ExperimentConfig) -> dict:
    ch = parse_channel(cfg.channel)
    metric = parse_metric(cfg.metric, ch)
    cb, code = _code(cfg, ch)
    L, rule = _list_size(cfg, cb.M, cb.n)
    dec = _decoder(cfg, L)
    est = mc_list_error(ch, cb, metric, dec, cfg.trials, cfg.seed, cfg.workers)
    results = {"code": code, "list_size": L, "list_rule": rule, "decoder": dec.describe(),
               "errors": est.as_dict()}
    if cfg.spectrum:
        phi = phi_spectrum(ch, cb, metric, cfg.trials, cfg.seed, cfg.workers)
        dens = info_density_spectrum(ch, cb, cfg.trials, cfg.seed, cfg.workers)
        results["phi_spectrum_bits"] = _bits(phi.summary())
        results["info_density_bits"] = _bits(dens.summary())
        results["list_capacity_estimate_bits"] = list_capacity_estimate(phi, cfg.theta_bits * LN2) / LN2
    return results


def cmd_simulate(cfg: ExperimentConfig) -> list[RunRecord]:
    return [RunRecord(cfg.command, cfg.echo(), _simulate_point(cfg))]


def cmd_bounds(cfg: ExperimentConfig) -> list[RunRecord]:
    ch = parse_channel(cfg.channel)
    metric = parse_metric(cfg.metric, ch)
    cb, code = _code(cfg, ch)
    n = cb.n
    R = cfg.rate_bits * LN2 if cfg.rate_bits is not None else math.log(cb.M) / n
    theta = cfg.theta_bits * LN2
    if not R > theta:
        raise ConfigError(f"need rate > theta, got {R / LN2:.6g} <= {cfg.theta_bits:.6g} bits")
    enumerable = ch.output_size ** n <= ENUMERATION_CAP
    fano = fano_lower_bound(ch, cb, metric, R, theta,
                            trials=None if enumerable else cfg.trials, seed=cfg.seed)
    cells = ch.input_size * ch.output_size
    rc_trials = None if math.comb(n + cells - 1, cells - 1) <= RC_TYPE_LIMIT else cfg.trials
    rc = rc_upper_bound(metric, uniform(ch.input_size), ch, n, R, theta, trials=rc_trials, seed=cfg.seed)
    cap = blahut_arimoto(ch).capacity_bits
    results = {
        "code": code,
        "rate_bits": cfg.rate_bits if cfg.rate_bits is not None else R / LN2,
        "theta_bits": cfg.theta_bits,
        "fano_lower_bound": fano,
        "fano_mode": "exact" if enumerable else "monte_carlo",
        "rc_upper_bound": rc.value,
        "rc_M": rc.M,
        "rc_threshold": rc.threshold,
        "rc_clamped": rc.clamped,
        "rc_mode": rc.mode,
        "capacity_bits": cap,
        "fano_floor_asymptotic": fano_floor_bits(cap, R / LN2, cfg.theta_bits),
    }
    if enumerable:
        L, _ = _list_size(cfg, cb.M, n)
        err = exact_list_error(ch, cb, metric, _decoder(cfg, L))
        info = block_mutual_information(ch, cb)
        log_r = math.log(cb.M / L)
        results["converse"] = {
            "list_size": L,
            "eps": err.eps_first_kind,
            "zeta": err.zeta_second_kind,
            "mutual_info_nats": info,
            "lhs_nats": (1 - err.eps_first_kind) * (1 - err.zeta_second_kind) * log_r,
            "rhs_nats": info + 1.0,
        }
        if err.eps_first_kind < 1 and err.zeta_second_kind < 1:
            rhs = converse_ratio_rhs(info, n, err.eps_first_kind, err.zeta_second_kind)
            results["converse_ratio_rhs_bits"] = rhs / LN2
        else:
            results["converse_ratio_rhs_bits"] = math.inf
    if cfg.eps is not None and cfg.delta is not None:
        c = cfg.capacity_bits if cfg.capacity_bits is not None else cap
        results["identification_bound"] = identification_list_bound(c, cfg.eps, cfg.delta)
    return [RunRecord(cfg.command, cfg.echo(), results)]


def sweep_points(cfg: ExperimentConfig):
    """Grid points ``(index, n, rate_bits, theta_bits)`` in row-major order."""
    i = 0
    for n in cfg.n_grid:
        for rate in cfg.rate_grid_bits:
            for theta in cfg.theta_grid_bits:
                yield i, n, rate, theta
                i += 1


def cmd_sweep(cfg: ExperimentConfig) -> list[RunRecord]:
    """One record per grid point, in grid order; each echoes the whole sweep config."""
    records = []
    echo = cfg.echo()
    for i, n, rate, theta in sweep_points(cfg):
        point = dataclasses.replace(cfg, command="simulate", n=n, rate_bits=rate, theta_bits=theta,
                                    M=None, n_grid=[], rate_grid_bits=[], theta_grid_bits=[])
        where = {"index": i, "n": n, "rate_bits": rate, "theta_bits": theta}
        M = rate_to_size(n, rate * LN2)
        reason = None
        if M > cfg.max_M:
            reason = f"M = {M} exceeds max_M = {cfg.max_M}"
        else:
            L, _ = _list_size(point, M, n)
            if cfg.decoder == "top_l" and L >= M:
                reason = f"list size {L} >= M = {M}; the error is trivially 0"
        if reason is not None:
            records.append(RunRecord("sweep", echo, {}, status="skipped", reason=reason, point=where))
            continue
        records.append(RunRecord("sweep", echo, _simulate_point(point), point=where))
    return records


def sweep_rows(records) -> tuple[list[dict], list[dict]]:
    """CSV rows for completed points and for skipped points (with reasons)."""
    rows, skipped = [], []
    for rec in records:
        if rec.status == "skipped":
            skipped.append(dict(rec.point, reason=rec.reason))
            continue
        e = rec.results["errors"]
        rows.append(dict(
            rec.point,
            M=rec.results["code"]["M"], list_size=rec.results["list_size"],
            trials=e["trials"], seed=e["seed"],
            eps_first_kind=e["eps_first_kind"], eps_first_kind_se=e["std_err"]["eps_first_kind"],
            zeta_second_kind=e["zeta_second_kind"], p_er_counting=e["p_er_counting"],
            eps_or_zeta=e["eps_or_zeta"], mean_list_size=e["mean_list_size"],
        ))
    return rows, skipped


def cmd_idbound(cfg: ExperimentConfig) -> list[RunRecord]:
    if cfg.capacity_bits is not None:
        c, source = cfg.capacity_bits, "given"
    else:
        c, source = blahut_arimoto(parse_channel(cfg.channel)).capacity_bits, "blahut_arimoto"
    results = {
        "capacity_bits": c,
        "capacity_source": source,
        "eps": cfg.eps,
        "delta": cfg.delta,
        "identification_bound": identification_list_bound(c, cfg.eps, cfg.delta),
    }
    if cfg.n is not None:
        results["log2_max_messages"] = example1_message_count(cfg.n, c)
    return [RunRecord(cfg.command, cfg.echo(), results)]


COMMAND_FUNCS = {
    "capacity": cmd_capacity,
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "idbound": cmd_idbound,
}
