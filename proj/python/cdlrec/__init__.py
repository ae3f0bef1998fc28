"""Comparative dual-encoder training and top-K recommendation over hybrid
user/item representations."""

from ._core import (
    ConfigError,
    DimensionError,
    Model,
    bag_of_clusters,
    comparative_loss,
    compare,
    default_config_json,
    fit_clusters,
    pipeline,
    synth,
    twonets_loss,
    weighted_squared_distance,
    __version__,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "Model",
    "bag_of_clusters",
    "comparative_loss",
    "compare",
    "default_config_json",
    "fit_clusters",
    "pipeline",
    "synth",
    "twonets_loss",
    "weighted_squared_distance",
    "__version__",
]
