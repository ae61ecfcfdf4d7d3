"""
穷举搜索：枚举所有满足约束的完成序列，作为束搜索正确性测试的基准
只做朴素枚举，不做任何剪枝
"""
import math
from collections import deque
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

from src.dev.common.exceptions import ConfigurationError, ContractViolation, EnumerationLimitError
from src.dev.core.decoder_config import DecoderConfig
from src.dev.core.hypothesis import Hypothesis, best_of, extend, normalized_score
from src.dev.log.common_log import get_logger, log_execution
from src.dev.models.base import ScorerModel
from src.dev.node.beam_node import apply_constraints, is_masked

from config import config as app_config

logger = get_logger("oracle")

EnumerationOrder = Literal["depth_first", "breadth_first"]


@dataclass(frozen=True)
class EnumerationResult:
    entries: List[Tuple[Hypothesis, float]]
    truncated: bool
    finished_mass: float  # 已枚举完成序列的概率和
    masked_mass: float  # 被约束屏蔽掉的路径概率和


@dataclass(frozen=True)
class OracleResult:
    best: Hypothesis
    num_enumerated: int
    exhausted: bool


def _children(prefix: Hypothesis, model: ScorerModel, config: DecoderConfig) -> Tuple[List[Hypothesis], float]:
    """按 token id 升序返回子节点，以及本节点被屏蔽的条件概率"""
    eos_id = model.vocabulary.eos_id
    raw = model.next_logprobs(prefix)
    constrained = apply_constraints(raw, prefix, config, eos_id=eos_id)
    children = []
    masked = 0.0
    for token in range(len(raw)):
        if token == model.vocabulary.bos_id:
            continue
        if is_masked(constrained[token]):
            if not is_masked(raw[token]):
                masked += math.exp(raw[token])
            continue
        children.append(extend(prefix, token, float(constrained[token]), config, eos_id=eos_id))
    return children, masked


def enumerate_finished(
    model: ScorerModel,
    config: DecoderConfig,
    limit: Optional[int] = None,
    order: EnumerationOrder = "depth_first",
) -> EnumerationResult:
    """
    枚举从 BOS 出发的全部完成序列（深度优先时按字典序）
    :param limit: 至多返回的条数，None 表示不限；截断时 truncated=True
    """
    if limit is not None and limit < 1:
        raise ContractViolation(f"limit must be >= 1, got {limit}")
    root = Hypothesis.root(model.vocabulary)
    frontier = deque([root])
    entries: List[Tuple[Hypothesis, float]] = []
    finished_mass = masked_mass = 0.0
    truncated = False

    while frontier:
        node = frontier.pop() if order == "depth_first" else frontier.popleft()
        if node.finished:
            if limit is not None and len(entries) >= limit:
                truncated = True
                break
            entries.append((node, normalized_score(node.sum_logprob, node.length, config)))
            finished_mass += math.exp(node.sum_logprob)
            continue
        children, masked = _children(node, model, config)
        masked_mass += math.exp(node.sum_logprob) * masked
        # 深度优先用栈，逆序压入保证字典序弹出
        frontier.extend(reversed(children) if order == "depth_first" else children)

    return EnumerationResult(entries, truncated, finished_mass, masked_mass)


def required_enumerations(model: ScorerModel, config: DecoderConfig) -> int:
    return model.vocabulary.size ** (config.max_length - 2)


@log_execution
def exhaustive_best(
    model: ScorerModel,
    config: DecoderConfig,
    limit: Optional[int] = None,
    order: EnumerationOrder = "depth_first",
) -> OracleResult:
    limit = limit if limit is not None else int(app_config.get("ORACLE.MAX_ENUMERATE", 10 ** 7))
    required = required_enumerations(model, config)
    if required > limit:
        raise EnumerationLimitError(required, limit)

    result = enumerate_finished(model, config, order=order)
    if not result.entries:
        raise ConfigurationError("constraints leave no finished sequence to enumerate")
    best = best_of(h for h, _ in result.entries)
    logger.debug(f"穷举完成：{len(result.entries)} 条完成序列，最优分数 {best.score:.6f}")
    return OracleResult(best=best, num_enumerated=len(result.entries), exhausted=not result.truncated)


def score_gap(oracle: OracleResult, beam_best: Hypothesis) -> float:
    """oracle 分数减束搜索分数，剪枝搜索下应 ≥ 0"""
    return oracle.best.score - beam_best.score
