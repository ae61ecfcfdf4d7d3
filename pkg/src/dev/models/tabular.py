from typing import Dict, Iterator, Literal, Mapping, Optional, Tuple

import numpy as np

from src.dev.common.exceptions import ModelError
from src.dev.core.hypothesis import Hypothesis
from src.dev.core.vocabulary import Vocabulary
from src.dev.log.common_log import get_logger
from src.dev.models.base import ScorerModel

logger = get_logger("models")

Context = Tuple[int, ...]
Rows = Mapping[Context, np.ndarray]


def _freeze(rows: Rows) -> Dict[Context, np.ndarray]:
    frozen = {}
    for ctx, probs in rows.items():
        vec = np.array(probs, dtype=np.float64)
        vec.flags.writeable = False
        frozen[tuple(ctx)] = vec
    return frozen


class TabularModel(ScorerModel):
    """
    查表模型：上下文为最近 order 个生成 token（不足左侧补 BOS）
    conditioned_rows 按输入键覆盖默认表，未命中再查 rows
    """

    def __init__(
        self,
        vocabulary: Vocabulary,
        order: int,
        rows: Rows,
        fallback: Literal["uniform", "error"] = "uniform",
        conditioned_rows: Optional[Mapping[str, Rows]] = None,
        context_key: Optional[str] = None,
    ):
        super().__init__(vocabulary, context_key)
        if order < 1:
            raise ModelError(f"tabular model order must be >= 1, got {order}")
        self.order = order
        self.fallback = fallback
        self.rows = _freeze(rows)
        self.conditioned_rows = {key: _freeze(table) for key, table in (conditioned_rows or {}).items()}
        for table in (self.rows, *self.conditioned_rows.values()):
            for ctx, vec in table.items():
                if len(ctx) != order or vec.shape != (vocabulary.size,):
                    raise ModelError(
                        f"row {self.context_label(ctx)!r} does not match order {order} / vocabulary size {vocabulary.size}"
                    )

    def context_of(self, prefix: Hypothesis) -> Context:
        padded = (self.vocabulary.bos_id,) * self.order + prefix.tokens[1:]
        return padded[-self.order:]

    def context_label(self, ctx: Context) -> str:
        return " ".join(self.vocabulary.decode(ctx))

    def distribution(self, prefix: Hypothesis) -> np.ndarray:
        ctx = self.context_of(prefix)
        if self.context_key is not None:
            table = self.conditioned_rows.get(self.context_key)
            if table is not None and ctx in table:
                return table[ctx]
        if ctx in self.rows:
            return self.rows[ctx]
        label = self.context_label(ctx)
        if self.fallback == "error":
            raise ModelError(f"unknown context {label!r} (input {self.context_key!r})", context=label)
        logger.debug(f"上下文 {label!r} 未命中，使用均匀分布兜底")
        probs = np.full(self.vocabulary.size, 1.0 / (self.vocabulary.size - 1))
        probs[self.vocabulary.bos_id] = 0.0
        return probs

    def iter_rows(self) -> Iterator[Tuple[str, np.ndarray]]:
        for ctx in sorted(self.rows):
            yield self.context_label(ctx), self.rows[ctx]
        for key in sorted(self.conditioned_rows):
            table = self.conditioned_rows[key]
            for ctx in sorted(table):
                yield f"{key}|{self.context_label(ctx)}", table[ctx]
