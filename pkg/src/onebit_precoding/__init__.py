"""One-bit precoding for the multiuser MISO downlink with MPSK signaling.

A minimum-SEP solver (FALM: log-sum-exp smoothing + penalty continuation +
accelerated projected gradient), zero-forcing and max-safety-margin
baselines, SEP-bound verification machinery, and a reproducible Monte-Carlo
BER harness with a CLI.
"""

from .baselines import (
    LpProblem,
    LpSolution,
    MsmReport,
    available_precoders,
    get_precoder,
    lp_solve,
    msm_precode,
    register_precoder,
    zf_onebit,
    zf_precode,
)
from .channel import (
    RngSeed,
    SystemParams,
    draw_channel,
    draw_noise,
    draw_symbol_frame,
    draw_symbols,
    receive,
)
from .constellation import GrayBitMap, MpskConstellation, q_function, sep_union_bound
from .falm import (
    SolveReport,
    SolverConfig,
    SolverFailure,
    apg_minimize,
    falm_solve,
    smoothed_gradient,
    smoothed_objective,
    update_v,
)
from .harness import BerRecord, ExperimentSpec, paired_streams, run_experiment, write_csv
from .precoding import (
    OneBitVector,
    PrecodingInstance,
    build_instance,
    min_margin,
    one_bit_amplitude,
    quantize_one_bit,
    safety_margin,
    to_complex,
    to_real,
)
from .sep_analysis import PerturbedPoint, check_implication, empirical_sep, perturb

__all__ = [
    "BerRecord",
    "ExperimentSpec",
    "GrayBitMap",
    "LpProblem",
    "LpSolution",
    "MpskConstellation",
    "MsmReport",
    "OneBitVector",
    "PerturbedPoint",
    "PrecodingInstance",
    "RngSeed",
    "SolveReport",
    "SolverConfig",
    "SolverFailure",
    "SystemParams",
    "apg_minimize",
    "available_precoders",
    "build_instance",
    "check_implication",
    "draw_channel",
    "draw_noise",
    "draw_symbol_frame",
    "draw_symbols",
    "empirical_sep",
    "falm_solve",
    "get_precoder",
    "lp_solve",
    "min_margin",
    "msm_precode",
    "one_bit_amplitude",
    "paired_streams",
    "perturb",
    "q_function",
    "quantize_one_bit",
    "receive",
    "register_precoder",
    "run_experiment",
    "safety_margin",
    "sep_union_bound",
    "smoothed_gradient",
    "smoothed_objective",
    "to_complex",
    "to_real",
    "update_v",
    "write_csv",
    "zf_onebit",
    "zf_precode",
]
