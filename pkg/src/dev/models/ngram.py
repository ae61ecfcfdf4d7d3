"""
加性平滑 n-gram 模型

P(w | ctx) = (count(ctx, w) + δ) / (count(ctx) + δ·|V_cont|)，V_cont 为去掉 BOS 的词表。
训练序列左侧补 n-1 个 BOS；预测时若上下文未出现过，逐级丢弃最早的 token 回退，最终落到一元。
"""
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.dev.common.exceptions import ContractViolation, ModelError
from src.dev.core.hypothesis import Hypothesis
from src.dev.core.vocabulary import Vocabulary
from src.dev.models.base import ScorerModel

Context = Tuple[int, ...]


class NGramModel(ScorerModel):

    def __init__(
        self,
        vocabulary: Vocabulary,
        order: int,
        delta: float,
        counts: Dict[Context, np.ndarray],
        context_key: Optional[str] = None,
    ):
        super().__init__(vocabulary, context_key)
        self.order = order
        self.delta = delta
        self.counts = counts
        self._num_continuations = vocabulary.size - 1

    def _backoff_context(self, prefix: Hypothesis) -> Context:
        width = self.order - 1
        padded = (self.vocabulary.bos_id,) * width + prefix.tokens[1:]
        ctx = padded[len(padded) - width:]
        while ctx and ctx not in self.counts:
            ctx = ctx[1:]
        return ctx

    def probabilities(self, ctx: Context) -> np.ndarray:
        row = self.counts[ctx]
        probs = (row + self.delta) / (row.sum() + self.delta * self._num_continuations)
        probs[self.vocabulary.bos_id] = 0.0
        return probs

    def distribution(self, prefix: Hypothesis) -> np.ndarray:
        return self.probabilities(self._backoff_context(prefix))

    def iter_rows(self) -> Iterator[Tuple[str, np.ndarray]]:
        for ctx in sorted(self.counts, key=lambda c: (len(c), c)):
            label = " ".join(self.vocabulary.decode(ctx)) or "<unigram>"
            yield label, self.probabilities(ctx)


def train_ngram(
    corpus: Sequence[Sequence[int]],
    vocabulary: Vocabulary,
    n: int,
    delta: float,
) -> NGramModel:
    """统计 1..n 阶计数；语料为 token id 序列（EOS 由调用方追加）"""
    if n < 1:
        raise ContractViolation(f"n-gram order must be >= 1, got {n}")
    if delta <= 0:
        raise ContractViolation(f"smoothing constant must be > 0, got {delta}")
    if not corpus:
        raise ModelError("cannot train an n-gram model on an empty corpus")

    counts: Dict[Context, np.ndarray] = {}
    bos = vocabulary.bos_id
    for line_no, sequence in enumerate(corpus, 1):
        if not sequence:
            raise ContractViolation(f"corpus sequence #{line_no} is empty")
        for token in sequence:
            if not 0 <= token < vocabulary.size or token == bos:
                raise ModelError(f"corpus sequence #{line_no} contains invalid token id {token}")
        padded: List[int] = [bos] * (n - 1) + list(sequence)
        for i in range(n - 1, len(padded)):
            target = padded[i]
            # 同时累计所有低阶上下文，供回退使用
            for width in range(n):
                ctx = tuple(padded[i - width:i])
                row = counts.get(ctx)
                if row is None:
                    row = counts[ctx] = np.zeros(vocabulary.size, dtype=np.float64)
                row[target] += 1.0
    for row in counts.values():
        row.flags.writeable = False
    return NGramModel(vocabulary, n, delta, counts)
