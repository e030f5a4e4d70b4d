"""Configuration module for the superlocality toolkit."""

from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import dotenv_values

DEFAULTS = {
    'SNAP_DENOMINATOR': '32',
    'SNAP_TOLERANCE': '1e-9',
    'FLOAT_TOLERANCE': '1e-10',
    'WITNESS_TOLERANCE': '1e-12',
    'MERGE_ANALYSIS': 'true',
    'RESULTS_DIR': 'results',
    'LOG_LEVEL': 'WARNING',
}


class Config:
    """Configuration class for the superlocality toolkit.

    Settings come from an optional dotenv-style file. The process environment
    is never read, so two runs with the same file behave identically.
    """

    def __init__(self, env_file: Optional[Union[str, Path]] = None,
                 overrides: Optional[Dict[str, str]] = None):
        """Initialize configuration from a dotenv file and explicit overrides."""
        values = dict(DEFAULTS)

        if env_file is not None:
            path = Path(env_file)
            if not path.exists():
                raise FileNotFoundError(f"Configuration file not found: {path}")
            values.update({k: v for k, v in dotenv_values(path).items() if v is not None})
        elif Path('.env').exists():
            values.update({k: v for k, v in dotenv_values('.env').items()
                           if k in DEFAULTS and v is not None})

        if overrides:
            values.update({k: str(v) for k, v in overrides.items()})

        # Exact snapping
        self.snap_denominator = int(values['SNAP_DENOMINATOR'])
        self.snap_tolerance = float(values['SNAP_TOLERANCE'])

        # Float checks in the quantum front end
        self.float_tolerance = float(values['FLOAT_TOLERANCE'])
        self.witness_tolerance = float(values['WITNESS_TOLERANCE'])

        # Decomposition search
        self.merge_analysis = values['MERGE_ANALYSIS'].strip().lower() in ('1', 'true', 'yes', 'on')

        # Output paths
        self.results_dir = Path(values['RESULTS_DIR'])

        self.log_level = values['LOG_LEVEL'].strip().upper()

        self._validate_config()

    def _validate_config(self):
        """Validate that the configured values are usable."""
        if self.snap_denominator <= 0:
            raise ValueError(f"SNAP_DENOMINATOR must be positive, got {self.snap_denominator}")

        for name in ('snap_tolerance', 'float_tolerance', 'witness_tolerance'):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name.upper()} must be positive, got {getattr(self, name)}")

        if self.log_level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ValueError(f"Unknown LOG_LEVEL: {self.log_level}")

    def ensure_results_dir(self) -> Path:
        """Create the results directory on first use."""
        self.results_dir.mkdir(parents=True, exist_ok=True)
        return self.results_dir
