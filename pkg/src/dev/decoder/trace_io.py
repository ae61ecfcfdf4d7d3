import json
from pathlib import Path
from typing import IO, Iterable, List, Optional, Union

from src.dev.api.schema import HypothesisRecord, TraceEventRecord, TraceStepRecord
from src.dev.core.vocabulary import Vocabulary
from src.dev.state.beam_state import Trace, TraceStep


def step_to_record(step: TraceStep, vocabulary: Vocabulary) -> TraceStepRecord:
    hyp = lambda h: HypothesisRecord(**h.to_record(vocabulary))  # noqa: E731
    return TraceStepRecord(
        t=step.t,
        beam=[hyp(h) for h in step.beam],
        finished=[hyp(h) for h in step.finished],
        events=[TraceEventRecord(candidate=hyp(e.candidate), fate=e.fate) for e in step.events],
    )


def trace_to_lines(trace: Trace, vocabulary: Vocabulary) -> List[str]:
    """每步一行 JSON：{"t", "beam", "finished", "events"}"""
    return [
        json.dumps(step_to_record(step, vocabulary).model_dump(), ensure_ascii=False)
        for step in trace
    ]


def write_trace_jsonl(trace: Trace, vocabulary: Vocabulary, out: Union[str, Path, IO[str]]) -> None:
    lines = trace_to_lines(trace, vocabulary)
    if isinstance(out, (str, Path)):
        Path(out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    else:
        for line in lines:
            out.write(line + "\n")


def read_trace_jsonl(path: Union[str, Path]) -> List[TraceStepRecord]:
    with open(path, "r", encoding="utf-8") as f:
        return [TraceStepRecord.model_validate_json(line) for line in f if line.strip()]


def first_divergence(a: Trace, b: Trace) -> Optional[int]:
    """两条 trace 的 B 或 F 第一次不同的步数；完全一致返回 None"""
    for step_a, step_b in zip(a, b):
        if step_a.beam != step_b.beam or step_a.finished != step_b.finished:
            return step_a.t
    if len(a) != len(b):
        shorter = min(a, b, key=len)
        return (shorter.steps[-1].t + 1) if len(shorter) else 1
    return None


def divergence_summary(a: Trace, b: Trace, vocabulary: Vocabulary) -> Optional[dict]:
    t = first_divergence(a, b)
    if t is None:
        return None

    def side(trace: Trace) -> Optional[dict]:
        try:
            return step_to_record(trace.step(t), vocabulary).model_dump()
        except KeyError:
            return None

    return {"t": t, "a": side(a), "b": side(b)}
