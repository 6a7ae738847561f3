"""Harmonic centrality estimated from in-degree under a power-law assumption."""

from .digraph import Digraph, from_edge_pairs, harmonic_all, harmonic_for, read_edge_list, write_edge_list
from .estimator import (
    ProportionsSpec,
    QuickCentModel,
    XminMode,
    load_model,
    predict,
    predict_all,
    save_model,
    train,
)
from .exceptions import (
    DegenerateSampleError,
    DivergenceError,
    InputError,
    InsufficientDataError,
    ModelConsistencyError,
    ModelFormatError,
    QuickCentError,
    TrainingError,
)
from .generators import ErConfig, PaConfig, gen_er, gen_pa, rewire_degree_preserving
from .powerlaw import PowerLawFit, PowerLawModel, fit_xmin, mle_alpha

__version__ = "0.1.0"

__all__ = [
    "Digraph", "from_edge_pairs", "harmonic_all", "harmonic_for", "read_edge_list",
    "write_edge_list", "ProportionsSpec", "QuickCentModel", "XminMode", "load_model", "predict",
    "predict_all", "save_model", "train", "DegenerateSampleError", "DivergenceError", "InputError",
    "InsufficientDataError", "ModelConsistencyError", "ModelFormatError", "QuickCentError",
    "TrainingError", "ErConfig", "PaConfig", "gen_er", "gen_pa", "rewire_degree_preserving",
    "PowerLawFit", "PowerLawModel", "fit_xmin", "mle_alpha",
]
