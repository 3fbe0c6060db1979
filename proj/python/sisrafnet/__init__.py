"""SisRafNet channel estimation: CDL channel simulation, LS/LMMSE baselines and the neural estimator."""

from ._core import (
    ConfigError,
    ContractError,
    IoError,
    LmmseStats,
    Model,
    ModelConfig,
    NumericError,
    PilotPattern,
    ShapeError,
    SimConfig,
    __version__,
    fit_lmmse,
    generate_dataset,
    kmh_to_mps,
    load_dataset_split,
    ls_at_pilots,
    ls_interpolate,
    nmse,
    pilot_pattern,
    pilot_pattern_names,
    simulate,
    to_db,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
