"""Optimal control of single-atom transport with an optical tweezer.

The package simulates 1D Schrodinger dynamics of an atom moved between a
static trap and a movable Gaussian tweezer, optimizes tweezer trajectories
with a monotonic local optimizer from several seeding strategies (random
sine series, human-played paths, a three-parameter heuristic family),
and analyses the resulting solution sets: distances, clans, landscape
embeddings, and the fidelity/duration trade-off near the speed limit.
"""

from .physics import (
    Grid,
    ProblemConfig,
    StateTrajectory,
    TweezerBounds,
    TweezerState,
    Wavefunction,
    build_potential,
    evolve,
    fidelity,
    gaussian_well,
    ground_state_imaginary_time,
    populations,
    split_step,
    stationary_states,
)
from .control import (
    ControlPath,
    SeedSpectrum,
    base_motion,
    contract,
    dilate,
    random_sin_seed,
    validate,
)
from .optimizer import ControlGradient, OptimizerParams, Solution, gradient, optimize, path_fidelity
from .kass import (
    CampaignResult,
    Envelope,
    SweepFamily,
    apparent_qsl,
    build_envelope,
    kass_campaign,
    sweep_down,
    sweep_up,
)
from .hilo import HiloParams, direct_search, hilo_campaign, hilo_path
from .analysis import (
    Clan,
    DistanceMatrix,
    Embedding2D,
    HilbertVelocity,
    QslFit,
    control_distance,
    distance_matrix,
    embed_2d,
    extract_clans,
    hilbert_velocity,
    qsl_fit,
    reachability_order,
    state_distance,
    uniform_extension_dfdt,
)

__version__ = "0.1.0"
