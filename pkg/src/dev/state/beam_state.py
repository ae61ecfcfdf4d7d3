from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Iterator, List, Literal, Optional, Sequence, Tuple

from src.dev.common.exceptions import ContractViolation
from src.dev.core.hypothesis import Hypothesis

Fate = Literal["to_beam", "to_finished", "discarded"]
TerminatedBy = Literal["patience", "all_finished", "max_length", "exhausted"]


# ============== 基础类型定义 ==============
@dataclass(frozen=True)
class Candidate:
    """候选池成员：parent 为上一步束中的下标，token 为 None 表示 vanilla 中原样回流的已完成假设"""
    parent: int
    token: Optional[int]
    hypothesis: Hypothesis

    @property
    def score(self) -> float:
        return self.hypothesis.score

    @property
    def sum_logprob(self) -> float:
        return self.hypothesis.sum_logprob


@dataclass(frozen=True)
class TraceEvent:
    candidate: Hypothesis
    fate: Fate


@dataclass(frozen=True)
class TraceStep:
    """第 t 步结束（或提前返回）时的 B、F 快照及本步弹出事件"""
    t: int
    beam: Tuple[Hypothesis, ...]
    finished: Tuple[Hypothesis, ...]
    events: Tuple[TraceEvent, ...]


@dataclass
class Trace:
    """单次解码调用私有，不跨线程共享"""
    steps: List[TraceStep] = field(default_factory=list)

    def record(
        self,
        t: int,
        beam: Sequence[Hypothesis],
        finished: Sequence[Hypothesis],
        events: Sequence[TraceEvent],
    ) -> None:
        self.steps.append(TraceStep(t, tuple(beam), tuple(finished), tuple(events)))

    def __iter__(self) -> Iterator[TraceStep]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def step(self, t: int) -> TraceStep:
        for s in self.steps:
            if s.t == t:
                return s
        raise KeyError(t)


@dataclass
class BeamState:
    """当前束、完成池与步数"""
    t: int
    beam: List[Hypothesis]
    finished: List[Hypothesis] = field(default_factory=list)

    def check(self, beam_size: int) -> None:
        if len(self.beam) > beam_size:
            raise ContractViolation(f"beam holds {len(self.beam)} > k={beam_size} hypotheses at t={self.t}")
        if any(h.finished for h in self.beam):
            raise ContractViolation(f"finished hypothesis left in active beam at t={self.t}")
        if not all(h.finished for h in self.finished):
            raise ContractViolation(f"unfinished hypothesis in finished pool at t={self.t}")


@dataclass(frozen=True)
class SearchStats:
    steps_executed: int
    candidates_scored: int
    pops: int
    terminated_by: TerminatedBy

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DecodeResult:
    best: Hypothesis
    finished_pool: Tuple[Hypothesis, ...]
    stats: SearchStats
    trace: Optional[Trace] = None

    @property
    def finished(self) -> bool:
        return self.best.finished
