from typing import Optional, Sequence

from src.dev.core.hypothesis import Hypothesis, best_of
from src.dev.state.beam_state import DecodeResult, SearchStats, TerminatedBy, Trace


def finish_from_pool(
    finished: Sequence[Hypothesis],
    fallback_beam: Sequence[Hypothesis],
    *,
    steps: int,
    scored: int,
    pops: int,
    terminated_by: TerminatedBy,
    trace: Optional[Trace],
) -> DecodeResult:
    """返回 F.max()；F 为空时退回最后一个非空 beam 中的最优者（未完成，保留标记）"""
    best = best_of(finished) if finished else best_of(fallback_beam)
    return DecodeResult(
        best=best,
        finished_pool=tuple(finished),
        stats=SearchStats(steps, scored, pops, terminated_by),
        trace=trace,
    )
