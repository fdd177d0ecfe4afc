"""Simulated Ultimatum Game players driven by values and norms, and tools to
estimate their preferences from play and to reduce estimation ambiguity."""

from .model import (
    GameConfig,
    NormValue,
    ObservationState,
    Profile,
    combined_demand,
    norm_demand,
    responder_reply,
    responder_threshold,
    utility,
    value_demand,
)
from .game import PopulationParams, RoundRecord, RunLog, pair, run_game, sample_population
from .estimation import GridSpec, ObservationTrace, SolutionSet, estimate, fitness, norm_inputs_for_estimation
from .elicitation import ElicitationSession, ReductionReport, ar_c, ar_direct, ar_ss

__version__ = "0.1.0"
