"""Optimistic mirror descent with predictable sequences.

Library + CLI covering: prox/mirror primitives with per-trajectory regret
certificates, offline smooth and Holder-smooth optimization, saddle-point
solving, strongly-uncoupled zero-sum game dynamics (full-information and
bandit), and approximate smooth convex programming with a max-flow frontend.
"""

from .convexprog import (
    CpReport,
    FlowNetwork,
    FlowSolution,
    SmoothCP,
    auto_rounds,
    builtin_cp_instances,
    check_flow,
    cp_step_sizes,
    max_flow,
    project_affine,
    solve_cp,
)
from .games import (
    FullInfoPlayer,
    GameRound,
    MatchResult,
    OpponentRun,
    PayoffMatrix,
    SideCertificate,
    bandit_cap,
    bandit_eta,
    full_info_eta,
    full_info_regret_certificate,
    full_info_step,
    run_bandit_match,
    run_full_info_match,
    run_full_info_vs,
    simplex_floor_delta,
    tangent_basis,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    fit_rate,
    load_config,
    parse_graph,
    parse_matrix,
    run_experiment,
)
from .mirror import (
    AffineSubspace,
    Ball,
    MirrorMap,
    OmdState,
    RegretCertificate,
    RoundLog,
    Simplex,
    SimplexPoint,
    adaptive_eta,
    bregman,
    omd_round,
    point_weights,
    prox_step,
    regret_certificate,
)
from .offline import (
    OfflineResult,
    SmoothProblem,
    builtin_problems,
    check_holder,
    holder_eta,
    holder_optimize,
    mirror_prox,
)
from .saddle import (
    SaddleProblem,
    SaddleResult,
    bilinear_gap,
    bilinear_problem,
    saddle_eta,
    saddle_solve,
)

__version__ = "0.1.0"

__all__ = [
    "AffineSubspace",
    "Ball",
    "ConfigError",
    "CpReport",
    "ExperimentConfig",
    "ExperimentResult",
    "FlowNetwork",
    "FlowSolution",
    "FullInfoPlayer",
    "GameRound",
    "MatchResult",
    "MirrorMap",
    "OfflineResult",
    "OmdState",
    "OpponentRun",
    "PayoffMatrix",
    "RegretCertificate",
    "RoundLog",
    "SaddleProblem",
    "SaddleResult",
    "SideCertificate",
    "Simplex",
    "SimplexPoint",
    "SmoothCP",
    "SmoothProblem",
    "adaptive_eta",
    "auto_rounds",
    "bandit_cap",
    "bandit_eta",
    "bilinear_gap",
    "bilinear_problem",
    "bregman",
    "builtin_cp_instances",
    "builtin_problems",
    "check_flow",
    "check_holder",
    "cp_step_sizes",
    "fit_rate",
    "full_info_eta",
    "full_info_regret_certificate",
    "full_info_step",
    "holder_eta",
    "holder_optimize",
    "load_config",
    "max_flow",
    "mirror_prox",
    "omd_round",
    "parse_graph",
    "parse_matrix",
    "point_weights",
    "project_affine",
    "prox_step",
    "regret_certificate",
    "run_bandit_match",
    "run_experiment",
    "run_full_info_match",
    "run_full_info_vs",
    "saddle_eta",
    "saddle_solve",
    "simplex_floor_delta",
    "solve_cp",
    "tangent_basis",
]
