"""Benchmark precoders: infinite-resolution zero forcing, its one-bit
quantization, and the LP-relaxation maximum-safety-margin (MSM) design,
plus the string-keyed precoder registry used by the harness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog

from .constellation import MpskConstellation
from .falm import SolverConfig, falm_solve
from .precoding import (
    OneBitVector,
    PrecodingInstance,
    build_instance,
    min_margin,
    quantize_one_bit,
    to_complex,
    to_real,
)


def zf_precode(H: np.ndarray, symbols, constellation: MpskConstellation, power: float) -> np.ndarray:
    """Zero-forcing transmit vector via the minimum-norm right inverse,
    x = c * H^H (H H^H)^-1 s, scaled so |x|^2 = P. Every user then receives
    exactly c * s_i before noise. Requires K <= N with H full row rank."""
    H = np.asarray(H)
    s = constellation.points[np.asarray(symbols)]
    x = H.conj().T @ np.linalg.solve(H @ H.conj().T, s)
    return np.sqrt(power) / np.linalg.norm(x) * x


def zf_onebit(H: np.ndarray, symbols, constellation: MpskConstellation, power: float) -> np.ndarray:
    """Zero forcing followed by componentwise one-bit quantization of the
    real and imaginary rails (ties to +)."""
    x = zf_precode(H, symbols, constellation, power)
    return to_complex(quantize_one_bit(to_real(x), power))


@dataclass(frozen=True)
class LpProblem:
    """maximize objective . x subject to A_ub x <= b_ub and lower <= x <= upper
    (None entries mean unbounded)."""

    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    lower: tuple
    upper: tuple


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    value: float


def lp_solve(problem: LpProblem) -> LpSolution:
    """Solve a small dense LP to optimality (HiGHS backend)."""
    res = linprog(
        -np.asarray(problem.objective, dtype=float),
        A_ub=np.asarray(problem.a_ub, dtype=float),
        b_ub=np.asarray(problem.b_ub, dtype=float),
        bounds=list(zip(problem.lower, problem.upper)),
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"LP solve failed: {res.message}")
    return LpSolution(x=res.x, value=float(-res.fun))


def msm_lp_problem(instance: PrecodingInstance) -> LpProblem:
    """Box relaxation of the max-min-margin design: maximize t subject to
    every margin form + t <= 0 and |x_j| <= sqrt(P/2N)."""
    a = instance.amplitude
    n2 = 2 * instance.n_antennas
    forms = instance.stacked
    a_ub = np.hstack([forms, np.ones((forms.shape[0], 1))])
    objective = np.zeros(n2 + 1)
    objective[-1] = 1.0
    return LpProblem(
        objective=objective,
        a_ub=a_ub,
        b_ub=np.zeros(forms.shape[0]),
        lower=(-a,) * n2 + (None,),
        upper=(a,) * n2 + (None,),
    )


@dataclass(frozen=True)
class MsmReport:
    """x_onebit is the sign-quantized relaxed solution; relaxed_optimum is
    the LP value t* (an upper bound on any one-bit margin); margin is the
    worst-user margin of the quantized vector."""

    x_onebit: OneBitVector
    relaxed_optimum: float
    margin: float


def msm_precode(instance: PrecodingInstance) -> MsmReport:
    """Maximum-safety-margin design: solve the box-relaxed LP, then quantize
    componentwise by sign (ties to +)."""
    solution = lp_solve(msm_lp_problem(instance))
    n2 = 2 * instance.n_antennas
    x_q = quantize_one_bit(solution.x[:n2], instance.power)
    return MsmReport(
        x_onebit=OneBitVector(x_q, instance.power),
        relaxed_optimum=solution.value,
        margin=min_margin(instance, x_q),
    )


# --- precoder registry -----------------------------------------------------
#
# A precoder maps (H, symbol indices, constellation, power) to a complex
# transmit vector. "zf" is the only entry allowed off the one-bit alphabet.

Precoder = Callable[[np.ndarray, np.ndarray, MpskConstellation, float], np.ndarray]


def _msm_entry(config):
    def precode(H, symbols, constellation, power):
        instance = build_instance(H, symbols, constellation.order, power)
        return msm_precode(instance).x_onebit.to_complex()

    return precode


def _falm_entry(config):
    solver_config = config if config is not None else SolverConfig()

    def precode(H, symbols, constellation, power):
        instance = build_instance(H, symbols, constellation.order, power)
        return falm_solve(instance, solver_config).x_onebit.to_complex()

    return precode


_REGISTRY = {
    "zf": lambda config: zf_precode,
    "zf-ob": lambda config: zf_onebit,
    "msm": _msm_entry,
    "falm": _falm_entry,
}

# Reserved plug-in slot: the MMSE-style one-bit design this id refers to is
# a separate algorithm that this package deliberately does not ship.
_RESERVED = ("squid",)


def available_precoders() -> tuple:
    return tuple(sorted(_REGISTRY)) + _RESERVED


def register_precoder(precoder_id: str, factory: Callable[[Optional[SolverConfig]], Precoder]):
    """Install a custom precoder under a new id. ``factory`` receives the
    solver config (possibly None) and returns the precoding callable."""
    if precoder_id in _REGISTRY or precoder_id in _RESERVED:
        raise ValueError(f"precoder id {precoder_id!r} is already taken")
    _REGISTRY[precoder_id] = factory


def get_precoder(precoder_id: str, solver_config: Optional[SolverConfig] = None) -> Precoder:
    if precoder_id in _RESERVED:
        raise NotImplementedError(
            f"precoder {precoder_id!r} is a reserved plug-in id with no bundled "
            "implementation; register one via register_precoder()"
        )
    try:
        factory = _REGISTRY[precoder_id]
    except KeyError:
        raise KeyError(
            f"unknown precoder {precoder_id!r}; available: {available_precoders()}"
        ) from None
    return factory(solver_config)
