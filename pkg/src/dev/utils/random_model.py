import itertools
import string
from typing import List

import numpy as np

from src.dev.api.schema import RandomModelSpec
from src.dev.core.vocabulary import Vocabulary
from src.dev.models.tabular import TabularModel


def _content_tokens(count: int) -> List[str]:
    letters = string.ascii_lowercase
    if count <= len(letters):
        return list(letters[:count])
    return [f"w{i}" for i in range(count)]


def reachable_contexts(vocabulary: Vocabulary, order: int) -> List[tuple]:
    """所有可达上下文：左侧若干 BOS 补齐 + 内容 token（EOS 之后不再扩展）"""
    content = vocabulary.content_ids
    contexts = []
    for filled in range(order + 1):
        pad = (vocabulary.bos_id,) * (order - filled)
        for tail in itertools.product(content, repeat=filled):
            contexts.append(pad + tail)
    return contexts


def random_tabular_model(
    seed: int,
    vocab_size: int = 4,
    order: int = 2,
    eos_floor: float = 0.0,
    concentration: float = 1.0,
) -> TabularModel:
    """
    覆盖全部可达上下文的随机表格模型
    每行为 Dirichlet 样本，EOS 概率不低于 eos_floor
    """
    rng = np.random.default_rng(seed)
    vocabulary = Vocabulary.build(_content_tokens(vocab_size - 2))
    continuations = vocabulary.continuation_ids
    rows = {}
    for ctx in reachable_contexts(vocabulary, order):
        sample = rng.dirichlet(np.full(len(continuations), concentration))
        probs = np.zeros(vocabulary.size)
        probs[continuations] = (1.0 - eos_floor) * sample
        probs[vocabulary.eos_id] += eos_floor
        rows[ctx] = probs
    return TabularModel(vocabulary, order, rows, fallback="error")


def random_models(spec: RandomModelSpec) -> List[TabularModel]:
    """第 i 个模型使用 seed + i"""
    return [
        random_tabular_model(spec.seed + i, spec.vocab_size, spec.order, spec.eos_floor, spec.concentration)
        for i in range(spec.count)
    ]
