import math

import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError

from src.dev.common.exceptions import ConfigurationError, ContractViolation, ModelFormatError
from src.dev.core.decoder_config import DecoderConfig
from src.dev.core.hypothesis import (
    Hypothesis,
    best_of,
    canonical_compare,
    extend,
    length_penalty,
    normalized_score,
)
from src.dev.core.vocabulary import Vocabulary


# ==================== 词表 ====================
def test_vocabulary_build_reserves_bos_and_eos(vocab):
    assert vocab.tokens == ("<s>", "</s>", "a", "b")
    assert (vocab.bos_id, vocab.eos_id) == (0, 1)
    assert vocab.continuation_ids == [1, 2, 3]
    assert vocab.content_ids == [2, 3]
    assert vocab.encode(["a", "b"]) == (2, 3)
    assert vocab.decode((0, 2, 1)) == ["<s>", "a", "</s>"]


@pytest.mark.parametrize(
    "tokens, bos_id, eos_id",
    [
        (("<s>",), 0, 0),
        (("<s>", "</s>", "a", "a"), 0, 1),
        (("<s>", "</s>"), 0, 0),
        (("<s>", "</s>"), 0, 5),
    ],
)
def test_vocabulary_rejects_malformed(tokens, bos_id, eos_id):
    with pytest.raises(ModelFormatError):
        Vocabulary(tokens=tokens, bos_id=bos_id, eos_id=eos_id)


def test_vocabulary_unknown_token(vocab):
    with pytest.raises(ModelFormatError, match="unknown token"):
        vocab.id_of("zzz")


# ==================== 解码配置 ====================
def test_decoder_config_defaults():
    config = DecoderConfig()
    assert (config.beam_size, config.patience, config.length_penalty) == (5, 1.0, 1.0)
    assert config.penalty_style == "power"
    assert config.max_length == 201
    assert config.selection_mode == "full_scan"


def test_decoder_config_length_rule():
    with pytest.raises(ValidationError):
        DecoderConfig(max_length=5, min_length=4)
    DecoderConfig(max_length=6, min_length=4)


@pytest.mark.parametrize("field, value", [("beam_size", 0), ("patience", 0.0), ("max_length", 1)])
def test_decoder_config_field_bounds(field, value):
    with pytest.raises(ValidationError):
        DecoderConfig(**{field: value})


def test_decoder_config_is_frozen():
    config = DecoderConfig()
    with pytest.raises(ValidationError):
        config.beam_size = 3


def test_finished_threshold_is_not_rounded():
    assert DecoderConfig(beam_size=5, patience=0.5).finished_threshold == 2.5


def test_presets_and_overrides():
    mt = DecoderConfig.from_preset("mt")
    assert (mt.beam_size, mt.patience, mt.length_penalty) == (5, 2.0, 1.0)

    cnndm = DecoderConfig.from_preset("cnndm-style", beam_size=2, patience=None)
    assert cnndm.beam_size == 2
    assert cnndm.patience == 0.5
    assert (cnndm.min_length, cnndm.no_repeat_ngram_size, cnndm.length_penalty) == (55, 3, 2.0)

    with pytest.raises(ConfigurationError):
        DecoderConfig.from_preset("wmt99")


def test_with_updates_revalidates():
    config = DecoderConfig(max_length=10)
    assert config.with_updates(patience=3.0).patience == 3.0
    with pytest.raises(ValidationError):
        config.with_updates(min_length=20)


# ==================== 长度惩罚与打分 ====================
def test_length_penalty_styles():
    assert length_penalty(3, 2.0, "power") == 9.0
    assert length_penalty(1, 1.0, "gnmt") == 1.0
    assert length_penalty(7, 1.0, "gnmt") == pytest.approx(2.0)
    assert length_penalty(4, 0.0, "power") == 1.0
    with pytest.raises(ContractViolation):
        length_penalty(0, 1.0)


def test_extend_accumulates_and_normalizes(vocab):
    config = DecoderConfig(length_penalty=1.0)
    root = Hypothesis.root(vocab)
    h1 = extend(root, 2, math.log(0.5), config, eos_id=vocab.eos_id)
    h2 = extend(h1, vocab.eos_id, math.log(0.25), config, eos_id=vocab.eos_id)

    assert h1.tokens == (0, 2) and not h1.finished
    assert h2.finished and h2.length == 2
    assert h2.sum_logprob == pytest.approx(math.log(0.125))
    assert h2.score == pytest.approx(math.log(0.125) / 2)
    assert root.tokens == (0,)

    with pytest.raises(ContractViolation):
        extend(h2, 2, -1.0, config, eos_id=vocab.eos_id)


# ==================== 规范序 ====================
def test_canonical_order_tie_breaks():
    better_score = Hypothesis((0, 2), -2.0, -1.0)
    worse_score = Hypothesis((0, 2), -1.0, -1.5)
    assert canonical_compare(better_score, worse_score) == -1

    higher_sum = Hypothesis((0, 2, 2), -1.0, -1.0)
    lower_sum = Hypothesis((0, 2, 3, 3), -2.0, -1.0)
    assert canonical_compare(higher_sum, lower_sum) == -1

    shorter = Hypothesis((0, 2), -1.0, -1.0)
    longer = Hypothesis((0, 2, 3), -1.0, -1.0)
    assert canonical_compare(shorter, longer) == -1

    first = Hypothesis((0, 2, 2), -1.0, -0.5)
    second = Hypothesis((0, 2, 3), -1.0, -0.5)
    assert canonical_compare(first, second) == -1
    assert canonical_compare(second, first) == 1
    assert canonical_compare(first, first) == 0
    assert best_of([second, first]) == first


_hypotheses = st.builds(
    Hypothesis,
    tokens=st.lists(st.integers(0, 4), min_size=1, max_size=5).map(lambda t: (0, *t)),
    sum_logprob=st.floats(-50.0, 0.0),
    score=st.floats(-50.0, 0.0),
)


@given(_hypotheses, _hypotheses)
def test_canonical_compare_is_antisymmetric(a, b):
    assert canonical_compare(a, b) == -canonical_compare(b, a)
    if canonical_compare(a, b) == 0:
        assert a.tokens == b.tokens


@given(_hypotheses, _hypotheses, _hypotheses)
def test_canonical_compare_is_transitive(a, b, c):
    if canonical_compare(a, b) <= 0 and canonical_compare(b, c) <= 0:
        assert canonical_compare(a, c) <= 0


_sums = st.integers(-4000, -1).map(lambda x: x / 100)


@given(st.integers(1, 30), _sums, _sums, st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_equal_length_order_is_alpha_invariant(length, sum_a, sum_b, alpha_1, alpha_2):
    """同长度假设的相对顺序与 alpha 无关"""
    c1 = DecoderConfig(length_penalty=alpha_1)
    c2 = DecoderConfig(length_penalty=alpha_2)
    order_1 = normalized_score(sum_a, length, c1) < normalized_score(sum_b, length, c1)
    order_2 = normalized_score(sum_a, length, c2) < normalized_score(sum_b, length, c2)
    assert order_1 == order_2 == (sum_a < sum_b)
