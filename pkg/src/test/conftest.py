from pathlib import Path

import pytest

from src.dev.core.decoder_config import DecoderConfig
from src.dev.core.vocabulary import Vocabulary
from src.dev.models.model_io import load_tabular_model
from src.dev.utils.random_model import random_tabular_model

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def vocab() -> Vocabulary:
    return Vocabulary.build(["a", "b"])


@pytest.fixture
def fall_off_model_path() -> Path:
    return DATA_DIR / "fall_off_model.json"


@pytest.fixture
def fall_off_model(fall_off_model_path):
    return load_tabular_model(fall_off_model_path)


@pytest.fixture
def fall_off_config() -> DecoderConfig:
    """k=2, alpha=1 (power), M=4"""
    return DecoderConfig(beam_size=2, patience=1.0, length_penalty=1.0, max_length=4)


@pytest.fixture
def make_random_model():
    def factory(seed: int, **kwargs):
        return random_tabular_model(seed, **kwargs)
    return factory
