import copy
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from src.dev.common.constant import NEG_INF, NORMALIZATION_TOLERANCE
from src.dev.common.exceptions import ContractViolation
from src.dev.core.hypothesis import Hypothesis
from src.dev.core.vocabulary import Vocabulary


class ScorerModel(ABC):
    """
    下一 token 对数概率提供者（score(·) 的逐 token 因子）
    模型构造后不可变，可被多个解码线程并发读取
    """

    def __init__(self, vocabulary: Vocabulary, context_key: Optional[str] = None):
        self.vocabulary = vocabulary
        self.context_key = context_key

    def with_context(self, context_key: Optional[str]) -> "ScorerModel":
        """返回绑定到某个输入键的浅拷贝，底层表共享"""
        bound = copy.copy(self)
        bound.context_key = context_key
        return bound

    @abstractmethod
    def distribution(self, prefix: Hypothesis) -> np.ndarray:
        """|V| 维概率向量，BOS 位置为 0"""

    def next_logprobs(self, prefix: Hypothesis) -> np.ndarray:
        if prefix.finished:
            raise ContractViolation(f"prefix {prefix.tokens} is already finished")
        probs = np.asarray(self.distribution(prefix), dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            logprobs = np.log(probs)
        logprobs = np.where(np.isnan(logprobs), NEG_INF, np.maximum(logprobs, NEG_INF))
        logprobs[self.vocabulary.bos_id] = NEG_INF
        return logprobs

    def iter_rows(self) -> Iterator[Tuple[str, np.ndarray]]:
        """遍历所有显式存储的概率行，供 validate_model 使用"""
        return iter(())


@dataclass(frozen=True)
class Violation:
    context: str
    message: str
    token: Optional[str] = None

    def __str__(self) -> str:
        return f"context {self.context!r}: {self.message}"


def validate_model(model: ScorerModel) -> List[Violation]:
    """空列表表示所有行都非负、归一且 BOS 概率为 0；违规是数据而非异常"""
    vocab = model.vocabulary
    violations = []
    for context, probs in model.iter_rows():
        for token_id in np.flatnonzero(probs < 0):
            token = vocab.tokens[token_id]
            violations.append(
                Violation(context, f"token {token!r} has negative probability {float(probs[token_id])!r}", token)
            )
        if probs[vocab.bos_id] > 0:
            violations.append(
                Violation(context, f"BOS has probability {float(probs[vocab.bos_id])!r} as a continuation", vocab.bos)
            )
        total = float(np.sum(probs))
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            violations.append(Violation(context, f"row sums to {total!r}"))
    return violations
