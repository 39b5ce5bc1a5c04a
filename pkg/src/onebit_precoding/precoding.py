"""Complex-to-real problem data and the safety-margin machinery shared by the
FALM solver and the baseline precoders.

For user i with channel row h_i and intended symbol s_i, the safety margin is

    alpha_i = Re{h_i^T x s_i*} - |Im{h_i^T x s_i*}| * cot(pi/M),

positive exactly when the noiseless reception lies inside the correct MPSK
decision sector. Stacking x into the real vector x_real = [Re x; Im x], each
margin becomes the negated maximum of two linear forms,

    alpha_i = -max(u_i . x_real, w_i . x_real),

with u_i = -b_i + r_i and w_i = -b_i - r_i built from b_i = [Re g_i, -Im g_i]
and r_i = cot(pi/M) [Im g_i, Re g_i], where g_i = s_i* h_i^T. The one-bit
transmit alphabet pins every component of x_real to +/- sqrt(P/2N).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def one_bit_amplitude(power: float, n_antennas: int) -> float:
    """Per-rail amplitude sqrt(P/2N) of the one-bit transmit alphabet."""
    return float(np.sqrt(power / (2.0 * n_antennas)))


def cot_half_sector(order: int) -> float:
    """cot(pi/M); exactly 0 for M = 2 (the BPSK limit, avoiding the pole)."""
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    if order == 2:
        return 0.0
    return 1.0 / np.tan(np.pi / order)


def to_real(x: np.ndarray) -> np.ndarray:
    """Stack a complex N-vector into [Re x; Im x] of length 2N."""
    x = np.asarray(x)
    return np.concatenate([x.real, x.imag])


def to_complex(x_real: np.ndarray) -> np.ndarray:
    """Inverse of to_real."""
    x_real = np.asarray(x_real, dtype=float)
    n = x_real.shape[0] // 2
    return x_real[:n] + 1j * x_real[n:]


def sign_ties_positive(v: np.ndarray) -> np.ndarray:
    """Componentwise sign with sign(0) = +1."""
    return np.where(np.asarray(v) >= 0, 1.0, -1.0)


def quantize_one_bit(x_real: np.ndarray, power: float) -> np.ndarray:
    """Snap a real 2N-vector onto the one-bit alphabet {+/- sqrt(P/2N)}^2N."""
    x_real = np.asarray(x_real, dtype=float)
    return one_bit_amplitude(power, x_real.shape[0] // 2) * sign_ties_positive(x_real)


@dataclass(frozen=True)
class OneBitVector:
    """A transmit vector with every rail at +/- sqrt(P/2N), so |x|^2 = P."""

    x_real: np.ndarray
    power: float

    def __post_init__(self):
        x = np.array(self.x_real, dtype=float)  # own copy, frozen below
        if x.ndim != 1 or x.shape[0] % 2 != 0:
            raise ValueError(f"x_real must be a flat 2N vector, got shape {x.shape}")
        a = one_bit_amplitude(self.power, x.shape[0] // 2)
        if not np.all(np.abs(np.abs(x) - a) <= 1e-12 * max(a, 1.0)):
            raise ValueError("entries must all have magnitude sqrt(P/2N)")
        x.flags.writeable = False
        object.__setattr__(self, "x_real", x)

    @classmethod
    def from_complex(cls, x: np.ndarray, power: float) -> "OneBitVector":
        return cls(to_real(x), power)

    def to_complex(self) -> np.ndarray:
        return to_complex(self.x_real)

    @property
    def n_antennas(self) -> int:
        return self.x_real.shape[0] // 2


@dataclass(frozen=True)
class PrecodingInstance:
    """Real-valued problem data for one symbol time.

    ``u`` and ``w`` are K x 2N arrays whose rows are the linear forms with
    min_i alpha_i = -max_i max(u_i . x_real, w_i . x_real). Immutable, so one
    instance may be shared read-only across concurrent solves.
    """

    u: np.ndarray
    w: np.ndarray
    order: int
    power: float

    def __post_init__(self):
        u = np.array(self.u, dtype=float)  # own copies, frozen below
        w = np.array(self.w, dtype=float)
        if u.shape != w.shape or u.ndim != 2 or u.shape[1] % 2 != 0:
            raise ValueError(f"u/w must be matching K x 2N arrays, got {u.shape}, {w.shape}")
        u.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)

    @property
    def n_users(self) -> int:
        return self.u.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.u.shape[1] // 2

    @property
    def amplitude(self) -> float:
        return one_bit_amplitude(self.power, self.n_antennas)

    @cached_property
    def stacked(self) -> np.ndarray:
        """All 2K margin forms as one matrix (u rows, then w rows)."""
        a = np.vstack([self.u, self.w])
        a.flags.writeable = False
        return a

    @cached_property
    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.stacked, 2))


def build_instance(H: np.ndarray, symbols, order: int, power: float) -> PrecodingInstance:
    """Build the per-symbol-time margin forms from a channel and symbol row.

    ``symbols`` holds one constellation index per user. For order 2 the
    rotation term vanishes (cot = 0) and u = w = -b.
    """
    H = np.asarray(H)
    symbols = np.asarray(symbols)
    if symbols.shape != (H.shape[0],):
        raise ValueError(
            f"symbols shape {symbols.shape} does not match {H.shape[0]} users"
        )
    s = np.exp(2j * np.pi * symbols / order)
    g = np.conj(s)[:, None] * H  # row i is s_i* h_i^T
    b = np.concatenate([g.real, -g.imag], axis=1)
    r = cot_half_sector(order) * np.concatenate([g.imag, g.real], axis=1)
    return PrecodingInstance(u=-b + r, w=-b - r, order=order, power=power)


def safety_margin(h: np.ndarray, x: np.ndarray, symbol: complex, order: int) -> float:
    """Safety margin of one user, evaluated in complex arithmetic."""
    c = np.asarray(h) @ np.asarray(x) * np.conj(symbol)
    return float(c.real - np.abs(c.imag) * cot_half_sector(order))


def min_margin(instance: PrecodingInstance, x_real: np.ndarray) -> float:
    """Worst-user safety margin, -max over all 2K stacked forms."""
    return float(-np.max(instance.stacked @ np.asarray(x_real, dtype=float)))
