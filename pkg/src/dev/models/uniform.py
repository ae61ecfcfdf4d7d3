import numpy as np

from src.dev.core.hypothesis import Hypothesis
from src.dev.models.base import ScorerModel


class UniformModel(ScorerModel):
    """除 BOS 外所有 token 等概率"""

    def distribution(self, prefix: Hypothesis) -> np.ndarray:
        probs = np.full(self.vocabulary.size, 1.0 / (self.vocabulary.size - 1))
        probs[self.vocabulary.bos_id] = 0.0
        return probs
