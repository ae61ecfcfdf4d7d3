import math

import pytest

from src.dev.common.constant import SCORE_TOLERANCE
from src.dev.common.exceptions import ConfigurationError, EnumerationLimitError
from src.dev.core.decoder_config import DecoderConfig
from src.dev.decoder.fcfs_beam import fcfs_beam
from src.dev.decoder.greedy import greedy_decode
from src.dev.decoder.vanilla_beam import vanilla_beam
from src.dev.models.tabular import TabularModel
from src.dev.oracle.exhaustive import (
    enumerate_finished,
    exhaustive_best,
    required_enumerations,
    score_gap,
)
from src.dev.utils.random_model import random_tabular_model


def test_enumeration_is_lexicographic_and_complete(fall_off_model, fall_off_config):
    result = enumerate_finished(fall_off_model, fall_off_config)
    assert [h.tokens for h, _ in result.entries] == [
        (0, 1),
        (0, 2, 1),
        (0, 2, 2, 1),
        (0, 2, 3, 1),
        (0, 3, 1),
        (0, 3, 2, 1),
        (0, 3, 3, 1),
    ]
    assert not result.truncated
    assert result.finished_mass == pytest.approx(0.433)
    assert result.finished_mass + result.masked_mass == pytest.approx(1.0)
    for hyp, score in result.entries:
        assert hyp.score == score


def test_breadth_first_enumeration_visits_same_sequences(fall_off_model, fall_off_config):
    depth = enumerate_finished(fall_off_model, fall_off_config)
    breadth = enumerate_finished(fall_off_model, fall_off_config, order="breadth_first")
    assert [h.tokens for h, _ in breadth.entries][:3] == [(0, 1), (0, 2, 1), (0, 3, 1)]
    assert {h.tokens for h, _ in breadth.entries} == {h.tokens for h, _ in depth.entries}


def test_enumeration_limit_truncates(fall_off_model, fall_off_config):
    result = enumerate_finished(fall_off_model, fall_off_config, limit=3)
    assert len(result.entries) == 3
    assert result.truncated


def test_oracle_on_witness(fall_off_model, fall_off_config):
    oracle = exhaustive_best(fall_off_model, fall_off_config)
    assert oracle.best.tokens == (0, 1)
    assert oracle.best.score == pytest.approx(math.log(0.3))
    assert oracle.num_enumerated == 7 and oracle.exhausted

    assert score_gap(oracle, fcfs_beam(fall_off_model, fall_off_config).best) == 0.0
    assert score_gap(oracle, vanilla_beam(fall_off_model, fall_off_config).best) > 0.0


def test_enumeration_limit_error(fall_off_model, fall_off_config):
    assert required_enumerations(fall_off_model, fall_off_config) == 16
    with pytest.raises(EnumerationLimitError) as excinfo:
        exhaustive_best(fall_off_model, fall_off_config, limit=10)
    assert excinfo.value.required == 16


def test_oracle_without_finished_sequence(vocab):
    model = TabularModel(vocab, 1, {(0,): [0.0, 0.0, 1.0, 0.0], (2,): [0.0, 0.0, 1.0, 0.0]}, fallback="error")
    with pytest.raises(ConfigurationError):
        exhaustive_best(model, DecoderConfig(max_length=4))


def test_oracle_dominates_beam_search():
    for seed in range(50):
        model = random_tabular_model(seed, vocab_size=5, order=2)
        config = DecoderConfig(beam_size=2, max_length=6, length_penalty=float(seed % 3))
        oracle = exhaustive_best(model, config)
        for decoder in (greedy_decode, vanilla_beam, fcfs_beam):
            assert score_gap(oracle, decoder(model, config, record_trace=False).best) >= -1e-12


def test_unpruned_vanilla_matches_oracle():
    for seed in range(200):
        model = random_tabular_model(seed, vocab_size=4, order=2)
        config = DecoderConfig(max_length=6, beam_size=4 ** 4)
        oracle = exhaustive_best(model, config)
        result = vanilla_beam(model, config, record_trace=False)
        assert result.best.score == pytest.approx(oracle.best.score, abs=SCORE_TOLERANCE), seed
