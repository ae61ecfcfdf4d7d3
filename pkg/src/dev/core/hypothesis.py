"""
假设（分数 + token 序列）与打分算术

长度统一按生成 token 数计（不含 BOS，含 EOS）。
排序采用全序：score 降序 → sum_logprob 降序 → 长度升序 → token 序列字典序升序。
"""
from dataclasses import dataclass
from typing import Iterable, Tuple

from src.dev.common.exceptions import ContractViolation
from src.dev.core.decoder_config import DecoderConfig, PenaltyStyle
from src.dev.core.vocabulary import Vocabulary


@dataclass(frozen=True)
class Hypothesis:
    tokens: Tuple[int, ...]
    sum_logprob: float = 0.0
    score: float = 0.0
    finished: bool = False

    @classmethod
    def root(cls, vocabulary: Vocabulary) -> "Hypothesis":
        """初始束中唯一的假设：只含 BOS，分数为 0"""
        return cls(tokens=(vocabulary.bos_id,))

    @property
    def length(self) -> int:
        """生成长度（不含 BOS）"""
        return len(self.tokens) - 1

    @property
    def last(self) -> int:
        return self.tokens[-1]

    def to_record(self, vocabulary: Vocabulary) -> dict:
        return {
            "tokens": vocabulary.decode(self.tokens),
            "sum_logprob": self.sum_logprob,
            "score": self.score,
        }


def length_penalty(length: int, alpha: float, style: PenaltyStyle = "power") -> float:
    """power: length^α；gnmt: ((5+length)/6)^α"""
    if length < 1:
        raise ContractViolation(f"length penalty needs length >= 1, got {length}")
    if style == "power":
        return float(length) ** alpha
    if style == "gnmt":
        return ((5.0 + length) / 6.0) ** alpha
    raise ContractViolation(f"unknown penalty style {style!r}")


def normalized_score(sum_logprob: float, length: int, config: DecoderConfig) -> float:
    """score(·)：对数概率和除以长度惩罚"""
    return sum_logprob / length_penalty(length, config.length_penalty, config.penalty_style)


def extend(
    hyp: Hypothesis,
    token: int,
    token_logprob: float,
    config: DecoderConfig,
    *,
    eos_id: int,
) -> Hypothesis:
    """s ← score(y ∘ y)，返回新假设，输入不变"""
    if hyp.finished:
        raise ContractViolation(f"cannot extend finished hypothesis {hyp.tokens}")
    tokens = hyp.tokens + (token,)
    sum_logprob = hyp.sum_logprob + token_logprob
    return Hypothesis(
        tokens=tokens,
        sum_logprob=sum_logprob,
        score=normalized_score(sum_logprob, len(tokens) - 1, config),
        finished=token == eos_id,
    )


def canonical_key(hyp: Hypothesis) -> tuple:
    """排序键，越小越好"""
    return (-hyp.score, -hyp.sum_logprob, len(hyp.tokens), hyp.tokens)


def canonical_compare(a: Hypothesis, b: Hypothesis) -> int:
    """-1 表示 a 胜出，1 表示 b 胜出，0 表示两者等价"""
    ka, kb = canonical_key(a), canonical_key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


def best_of(hyps: Iterable[Hypothesis]) -> Hypothesis:
    """按规范序取最优"""
    return min(hyps, key=canonical_key)

