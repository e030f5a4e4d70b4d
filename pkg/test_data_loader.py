"""Tests for configuration loading and JSON persistence."""

import json
from fractions import Fraction

import numpy as np
import pytest

from src.box_core import Cut, Family, box_from_json, make_family, white_noise
from src.config import Config
from src.data_loader import DataLoader, clean_data_for_json, dumps
from src.exact_scalar import ExactScalar
from src.superlocality import Status


@pytest.fixture
def config(tmp_path):
    return Config(overrides={'RESULTS_DIR': str(tmp_path / 'results')})


def test_config_defaults(config):
    assert config.snap_denominator == 32
    assert config.snap_tolerance == 1e-9
    assert config.merge_analysis is True
    assert config.log_level == 'WARNING'


def test_config_file_and_overrides(tmp_path):
    env = tmp_path / 'toolkit.env'
    env.write_text('SNAP_DENOMINATOR=64\nMERGE_ANALYSIS=off\nLOG_LEVEL=debug\n')
    config = Config(env_file=env, overrides={'SNAP_DENOMINATOR': '16'})
    assert config.snap_denominator == 16
    assert config.merge_analysis is False
    assert config.log_level == 'DEBUG'


@pytest.mark.parametrize("key,value", [('SNAP_DENOMINATOR', '0'), ('SNAP_TOLERANCE', '-1'),
                                       ('LOG_LEVEL', 'LOUD')])
def test_config_rejects_bad_values(key, value):
    with pytest.raises(ValueError):
        Config(overrides={key: value})


def test_config_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        Config(env_file=tmp_path / 'absent.env')


def test_clean_data_for_json():
    data = {
        (0, 1): ExactScalar(Fraction(1, 2), 1),
        Cut.A_BC: Status.SUPERLOCAL,
        'array': np.array([1, 2]),
        'number': np.float64(0.5),
        'nan': float('nan'),
    }
    cleaned = clean_data_for_json(data)
    assert cleaned == {'01': {'a': '1/2', 'b': '1'}, 'A|BC': 'superlocal', 'array': [1, 2], 'nan': None, 'number': 0.5}


def test_dumps_is_deterministic():
    box = make_family(Family.MF, Fraction(1, 4))
    assert dumps(box) == dumps(box_from_json(json.loads(dumps(box))))


def test_save_and_load_processed_data(config):
    loader = DataLoader(config)
    path = loader.save_processed_data(make_family(Family.SVF, Fraction(1, 2)), 'svf.json')
    assert path.parent == config.results_dir
    loaded = loader.load_processed_data('svf.json')
    assert box_from_json(loaded) == make_family(Family.SVF, Fraction(1, 2))
    assert loader.load_processed_data('missing.json') is None


def test_load_box_rejects_non_objects(config, tmp_path):
    path = tmp_path / 'list.json'
    path.write_text('[1, 2, 3]')
    with pytest.raises(ValueError):
        DataLoader(config).load_box(path)


def test_box_frame():
    frame = DataLoader.box_frame(white_noise())
    assert frame.shape == (8, 8)
    assert (frame.to_numpy() == '1/8').all()
