"""
解码各步共用的节点函数：约束屏蔽、扩展、候选排序
"""
import heapq
from typing import List, Sequence, Set

import numpy as np

from src.dev.common.constant import NEG_INF
from src.dev.common.exceptions import ContractViolation
from src.dev.core.decoder_config import DecoderConfig, SelectionMode
from src.dev.core.hypothesis import Hypothesis, canonical_key, extend
from src.dev.models.base import ScorerModel
from src.dev.state.beam_state import Candidate


def banned_ngram_tokens(tokens: Sequence[int], n: int) -> Set[int]:
    """会与前缀中已有 n-gram 重复的下一个 token"""
    if n <= 0 or len(tokens) < n:
        return set()
    banned = set()
    tail = tuple(tokens[len(tokens) - n + 1:]) if n > 1 else ()
    for i in range(len(tokens) - n + 1):
        if tuple(tokens[i:i + n - 1]) == tail:
            banned.add(tokens[i + n - 1])
    return banned


def apply_constraints(
    logprobs: np.ndarray,
    prefix: Hypothesis,
    config: DecoderConfig,
    *,
    eos_id: int,
) -> np.ndarray:
    """
    min_length 之前屏蔽 EOS；屏蔽重复 n-gram；
    到达最后一个可扩展位置（生成长度 M-2）时只保留 EOS，保证总能结束
    """
    masked = np.array(logprobs, dtype=np.float64, copy=True)
    generated = prefix.length

    if generated < config.min_length:
        masked[eos_id] = NEG_INF

    if config.no_repeat_ngram_size > 0:
        banned = banned_ngram_tokens(prefix.tokens, config.no_repeat_ngram_size)
        if banned:
            masked[list(banned)] = NEG_INF

    if generated >= config.max_length - 2:
        eos_value = masked[eos_id]
        masked[:] = NEG_INF
        masked[eos_id] = eos_value
    return masked


def is_masked(logprob: float) -> bool:
    return logprob <= NEG_INF


def expand_hypothesis(
    parent: int,
    hyp: Hypothesis,
    model: ScorerModel,
    config: DecoderConfig,
) -> List[Candidate]:
    """对单个假设按整个词表打分，被屏蔽的 token 不进入 H"""
    eos_id = model.vocabulary.eos_id
    logprobs = apply_constraints(model.next_logprobs(hyp), hyp, config, eos_id=eos_id)
    return [
        Candidate(parent, token, extend(hyp, token, float(logprobs[token]), config, eos_id=eos_id))
        for token in range(len(logprobs))
        if not is_masked(logprobs[token])
    ]


def expand(beam: Sequence[Hypothesis], model: ScorerModel, config: DecoderConfig) -> List[Candidate]:
    """当前束的每个成员按整个词表扩展"""
    candidates = []
    for parent, hyp in enumerate(beam):
        candidates.extend(expand_hypothesis(parent, hyp, model, config))
    return candidates


def select_candidates(
    expanded: Sequence[Candidate],
    k: int,
    mode: SelectionMode = "full_scan",
) -> List[Candidate]:
    """
    full_scan：全部候选按规范序排序
    top_2k：只取最优的 min(2k, |H|) 个；每步至多 k 个 EOS 候选，窗口内必有足够的未完成候选
    """
    if not expanded:
        raise ContractViolation("select_candidates needs at least one candidate")
    key = lambda c: canonical_key(c.hypothesis)  # noqa: E731
    if mode == "full_scan":
        ordered = sorted(expanded, key=key)
    elif mode == "top_2k":
        ordered = heapq.nsmallest(2 * k, expanded, key=key)
    else:
        raise ContractViolation(f"unknown selection mode {mode!r}")
    return ordered
