"""JSON input and output for boxes, witnesses and reports."""

import dataclasses
import json
import logging
import sys
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from .box_core import AnyBox, BipartiteBox, SingleBox, TripartiteBox, box_from_json, box_to_json
from .errors import InvalidBox

logger = logging.getLogger(__name__)


def clean_data_for_json(obj):
    """Recursively clean data to ensure JSON serialization compatibility."""
    if hasattr(obj, 'to_json') and not isinstance(obj, type):
        return clean_data_for_json(obj.to_json())
    if isinstance(obj, dict):
        # Convert tuple keys to strings
        cleaned = {}
        for key, value in obj.items():
            if isinstance(key, tuple):
                key = ''.join(str(k) for k in key)
            elif isinstance(key, Enum):
                key = key.value
            elif not isinstance(key, (str, int, float, bool, type(None))):
                key = str(key)
            cleaned[key] = clean_data_for_json(value)
        return dict(sorted(cleaned.items(), key=lambda kv: str(kv[0])))
    elif isinstance(obj, (list, tuple)):
        return [clean_data_for_json(item) for item in obj]
    elif isinstance(obj, Enum):
        return obj.value
    elif isinstance(obj, (SingleBox, BipartiteBox, TripartiteBox)):
        return clean_data_for_json(box_to_json(obj))
    elif isinstance(obj, Fraction):
        return str(obj)
    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return clean_data_for_json(dataclasses.asdict(obj))
    elif isinstance(obj, Path):
        return str(obj)
    elif hasattr(obj, 'tolist'):  # numpy array
        return obj.tolist()
    elif hasattr(obj, 'item'):  # numpy scalar
        return obj.item()
    elif isinstance(obj, float) and pd.isna(obj):
        return None
    else:
        return obj


def dumps(data) -> str:
    """Deterministic JSON text: sorted keys, two-space indent."""
    return json.dumps(clean_data_for_json(data), indent=2, sort_keys=True, ensure_ascii=False)


class DataLoader:
    """Reads boxes and witnesses, writes reports into the results directory."""

    def __init__(self, config):
        """Initialize data loader with configuration."""
        self.config = config

    def load_json(self, source: Union[str, Path]) -> dict:
        """Load a JSON document from a file, or from stdin when ``source`` is ``-``."""
        try:
            if str(source) == '-':
                return json.load(sys.stdin)
            with open(source, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading JSON from {source}: {e}")
            raise

    def load_box(self, source: Union[str, Path]) -> AnyBox:
        data = self.load_json(source)
        if not isinstance(data, dict):
            raise InvalidBox(f"{source}: a box must be a JSON object")
        box = box_from_json(data)
        logger.info(f"Loaded {box.PARTIES}-party box from {source}")
        return box

    def save_processed_data(self, data, filename: str) -> Path:
        """
        Save a report to a JSON file in the results directory.

        Args:
            data: Report (anything ``clean_data_for_json`` accepts)
            filename: Output filename

        Returns:
            Path of the written file
        """
        output_path = self.config.ensure_results_dir() / filename
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(dumps(data) + '\n')

        logger.info(f"Saved report to {output_path}")
        return output_path

    def load_processed_data(self, filename: str) -> Optional[dict]:
        """
        Load a report previously saved in the results directory.

        Returns:
            Loaded data, or None when the file does not exist
        """
        input_path = self.config.results_dir / filename
        if not input_path.exists():
            return None

        data = self.load_json(input_path)
        logger.info(f"Loaded report from {input_path}")
        return data

    @staticmethod
    def box_frame(box: AnyBox) -> pd.DataFrame:
        """Rows are input strings and columns outcome strings (yz × bc for bipartite boxes)."""
        return box.to_frame()
