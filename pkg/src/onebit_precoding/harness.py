"""Monte-Carlo BER/SER experiment engine.

Per channel realization r and symbol time t, every precoder sees the same
channel, symbol, and noise draws (paired comparison); the noise stream is
unit-variance and scaled per SNR point, so one precoding solve serves the
whole SNR sweep. All draws are pure functions of (base seed, realization, t),
and error accumulation uses integer counts merged in realization order, so a
spec replays to identical results, parallel or not.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np

from .baselines import get_precoder
from .channel import (
    CHANNEL_STREAM,
    NOISE_STREAM,
    SYMBOL_STREAM,
    RngSeed,
    SystemParams,
    draw_channel,
    draw_symbols,
    draw_unit_noise,
)
from .constellation import GrayBitMap, MpskConstellation
from .falm import SolverConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to replay one experiment byte-for-byte (except the
    timing column). SNR is P/sigma^2 in dB, matching 10*log10(P/sigma^2)."""

    n_antennas: int
    n_users: int
    block_length: int
    total_power: float
    order: int
    snr_db: tuple
    precoder_ids: tuple
    n_realizations: int
    base_seed: int
    n_workers: int = 1
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if len(self.snr_db) == 0:
            raise ValueError("snr_db must be non-empty")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if len(self.precoder_ids) == 0:
            raise ValueError("precoder_ids must be non-empty")
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")
        # dimension/power validation
        self.system_params(self.snr_db[0])

    def system_params(self, snr_db: float) -> SystemParams:
        return SystemParams(
            n_antennas=self.n_antennas,
            n_users=self.n_users,
            block_length=self.block_length,
            total_power=self.total_power,
            noise_var=self.total_power / 10.0 ** (snr_db / 10.0),
        )


@dataclass(frozen=True)
class BerRecord:
    """One (precoder, SNR) measurement row. wall_time_s is the cumulative
    precoding compute time of that precoder over the whole run (telemetry;
    the only field that varies between identical runs)."""

    precoder: str
    snr_db: float
    ber: float
    ser: float
    worst_user_ber: float
    bit_count: int
    symbol_count: int
    realization_count: int
    failures: int
    wall_time_s: float

    def __post_init__(self):
        if np.isfinite(self.ber) and not 0.0 <= self.ber <= 1.0:
            raise ValueError(f"ber out of range: {self.ber}")
        if np.isfinite(self.ser) and not 0.0 <= self.ser <= 1.0:
            raise ValueError(f"ser out of range: {self.ser}")


def paired_streams(base_seed: int, realization: int, t: int, params: SystemParams, order: int):
    """The (channel, symbols, unit noise) triple seen by every precoder at
    one (realization, t). Counter-based substreams keep the three draws
    independent and stable when trials are added."""
    root = RngSeed(base_seed)
    H = draw_channel(params, root.child(CHANNEL_STREAM, realization))
    symbols = draw_symbols(order, params.n_users, root.child(SYMBOL_STREAM, realization, t))
    noise = draw_unit_noise(params.n_users, root.child(NOISE_STREAM, realization, t))
    return H, symbols, noise


def _realization_counts(spec: ExperimentSpec, realization: int):
    """Integer error counts for one realization.

    Returns (bit_errors, symbol_errors, ok_instances, failures, seconds)
    with the first two shaped (precoders, snrs, users).
    """
    constellation = MpskConstellation(spec.order)
    gray = GrayBitMap(spec.order)
    bit_dist = gray.bit_distance_table()
    precoders = [get_precoder(pid, spec.solver) for pid in spec.precoder_ids]
    params = spec.system_params(spec.snr_db[0])
    sigmas = [np.sqrt(spec.total_power / 10.0 ** (s / 10.0)) for s in spec.snr_db]

    n_p, n_s, n_u = len(precoders), len(sigmas), spec.n_users
    bit_errors = np.zeros((n_p, n_s, n_u), dtype=np.int64)
    symbol_errors = np.zeros((n_p, n_s, n_u), dtype=np.int64)
    ok_instances = np.zeros(n_p, dtype=np.int64)
    failures = np.zeros(n_p, dtype=np.int64)
    seconds = np.zeros(n_p)

    for t in range(spec.block_length):
        H, symbols, unit_noise = paired_streams(
            spec.base_seed, realization, t, params, spec.order
        )
        for p, precoder in enumerate(precoders):
            start = time.perf_counter()
            try:
                x = precoder(H, symbols, constellation, spec.total_power)
            except Exception:
                seconds[p] += time.perf_counter() - start
                failures[p] += 1
                logger.warning(
                    "precoder %s failed on realization %d, t %d; instance excluded",
                    spec.precoder_ids[p],
                    realization,
                    t,
                    exc_info=True,
                )
                continue
            seconds[p] += time.perf_counter() - start
            ok_instances[p] += 1
            noiseless = H @ x
            for s, sigma in enumerate(sigmas):
                detected = constellation.decide(noiseless + sigma * unit_noise)
                symbol_errors[p, s] += detected != symbols
                bit_errors[p, s] += bit_dist[symbols, detected]
    return bit_errors, symbol_errors, ok_instances, failures, seconds


def run_experiment(spec: ExperimentSpec) -> list:
    """Run the Monte-Carlo sweep and return one BerRecord per
    (precoder, SNR), in spec order."""
    # fail fast on unknown / reserved precoder ids
    for pid in spec.precoder_ids:
        get_precoder(pid, spec.solver)

    worker = partial(_realization_counts, spec)
    if spec.n_workers == 1 or spec.n_realizations == 1:
        partials = map(worker, range(spec.n_realizations))
        merged = _merge(partials)
    else:
        with ProcessPoolExecutor(max_workers=spec.n_workers) as pool:
            merged = _merge(pool.map(worker, range(spec.n_realizations)))
    bit_errors, symbol_errors, ok_instances, failures, seconds = merged

    bps = MpskConstellation(spec.order).bits_per_symbol
    records = []
    for p, pid in enumerate(spec.precoder_ids):
        symbols_per_user = int(ok_instances[p])
        for s, snr in enumerate(spec.snr_db):
            n_symbols = symbols_per_user * spec.n_users
            n_bits = n_symbols * bps
            with np.errstate(invalid="ignore", divide="ignore"):
                ber = float(bit_errors[p, s].sum() / n_bits) if n_bits else float("nan")
                ser = float(symbol_errors[p, s].sum() / n_symbols) if n_symbols else float("nan")
                worst = (
                    float(bit_errors[p, s].max() / (symbols_per_user * bps))
                    if symbols_per_user
                    else float("nan")
                )
            records.append(
                BerRecord(
                    precoder=pid,
                    snr_db=float(snr),
                    ber=ber,
                    ser=ser,
                    worst_user_ber=worst,
                    bit_count=n_bits,
                    symbol_count=n_symbols,
                    realization_count=spec.n_realizations,
                    failures=int(failures[p]),
                    wall_time_s=float(seconds[p]),
                )
            )
    return records


def _merge(partials):
    totals = None
    for part in partials:
        if totals is None:
            totals = [np.array(x, copy=True) for x in part]
        else:
            for acc, x in zip(totals, part):
                acc += x
    return totals


CSV_COLUMNS = (
    "precoder",
    "snr_db",
    "ber",
    "ser",
    "worst_user_ber",
    "bits",
    "symbols",
    "realizations",
    "failures",
    "wall_time_s",
)


def write_csv(records, path: str, header: Optional[dict] = None):
    """Write records with an optional resolved-config comment header. Field
    formatting is fixed so replays are byte-identical apart from
    wall_time_s."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header:
            for key, value in header.items():
                fh.write(f"# {key} = {value}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.precoder,
                    f"{r.snr_db:g}",
                    f"{r.ber:.10e}",
                    f"{r.ser:.10e}",
                    f"{r.worst_user_ber:.10e}",
                    r.bit_count,
                    r.symbol_count,
                    r.realization_count,
                    r.failures,
                    f"{r.wall_time_s:.3f}",
                ]
            )
