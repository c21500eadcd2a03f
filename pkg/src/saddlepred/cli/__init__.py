from .config import ConfigError, ExperimentConfig, load, parse, serialize
from .csvio import CsvFormatError, read_numeric_csv, write_csv
from .experiments import RunManifest, run_experiment
from .svg import emit_plot

__all__ = [
    "ConfigError", "ExperimentConfig", "load", "parse", "serialize", "CsvFormatError",
    "read_numeric_csv", "write_csv", "RunManifest", "run_experiment", "emit_plot",
]
