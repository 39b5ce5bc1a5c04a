"""System parameters, i.i.d. Gaussian channels, noise, and the downlink model
y_i = h_i^T x + eta_i (plain transpose, no conjugation)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Substream kinds: keeping channel, symbol, and noise draws on disjoint
# counter-based substreams means adding trials never perturbs earlier draws.
CHANNEL_STREAM = 0
SYMBOL_STREAM = 1
NOISE_STREAM = 2


@dataclass(frozen=True)
class SystemParams:
    """Downlink dimensions and powers: N antennas, K users, block length T,
    total transmit power P, and noise variance sigma^2."""

    n_antennas: int
    n_users: int
    block_length: int
    total_power: float
    noise_var: float

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ValueError(f"n_antennas must be positive, got {self.n_antennas}")
        if self.n_users < 1:
            raise ValueError(f"n_users must be positive, got {self.n_users}")
        if self.block_length < 1:
            raise ValueError(f"block_length must be positive, got {self.block_length}")
        if self.total_power <= 0:
            raise ValueError(f"total_power must be positive, got {self.total_power}")
        if self.noise_var <= 0:
            raise ValueError(f"noise_var must be positive, got {self.noise_var}")


@dataclass(frozen=True)
class RngSeed:
    """A 64-bit base seed plus a counter path identifying one substream.

    Identical (seed, path) pairs always produce identical draws; distinct
    paths are statistically independent. Generators derived here are never
    shared between workers.
    """

    seed: int
    path: tuple = ()

    def child(self, *counters: int) -> "RngSeed":
        return RngSeed(self.seed, self.path + tuple(int(c) for c in counters))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=self.path)
        )


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, RngSeed):
        return seed.generator()
    return RngSeed(int(seed)).generator()


def draw_channel(params: SystemParams, seed) -> np.ndarray:
    """Draw a K x N channel with i.i.d. CN(0, 1) entries (real and imaginary
    parts independent N(0, 1/2))."""
    rng = _generator(seed)
    shape = (params.n_users, params.n_antennas)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_noise(params: SystemParams, count: int, seed) -> np.ndarray:
    """Draw ``count`` circular complex Gaussian samples with variance
    params.noise_var."""
    rng = _generator(seed)
    scale = np.sqrt(params.noise_var / 2.0)
    return scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))


def draw_unit_noise(count: int, seed) -> np.ndarray:
    """CN(0, 1) samples; scaled by per-SNR sigma downstream so the same
    stream serves every SNR point."""
    rng = _generator(seed)
    return (rng.standard_normal(count) + 1j * rng.standard_normal(count)) / np.sqrt(2.0)


def draw_symbols(order: int, count: int, seed) -> np.ndarray:
    """Uniformly random symbol indices in [0, order)."""
    rng = _generator(seed)
    return rng.integers(0, order, size=count)


def draw_symbol_frame(order: int, params: SystemParams, seed) -> np.ndarray:
    """K x T frame of uniformly random symbol indices."""
    rng = _generator(seed)
    return rng.integers(0, order, size=(params.n_users, params.block_length))


def receive(H: np.ndarray, x: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Per-user received samples y_i = h_i^T x + eta_i."""
    H = np.asarray(H)
    x = np.asarray(x)
    noise = np.asarray(noise)
    if H.shape[1] != x.shape[0] or H.shape[0] != noise.shape[0]:
        raise ValueError(
            f"dimension mismatch: H {H.shape}, x {x.shape}, noise {noise.shape}"
        )
    return H @ x + noise
