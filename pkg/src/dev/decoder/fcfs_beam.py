"""
FCFS（first come, first served）束搜索

完成的假设一经弹出即移入 F，不再占用束宽；每向 F 加入一个假设就检查 |F| ≥ k·p，
满足即返回 F.max()。p=1 即常见库中的实现。
"""
from typing import List

from src.dev.core.decoder_config import DecoderConfig
from src.dev.core.hypothesis import Hypothesis, best_of
from src.dev.decoder.result import finish_from_pool
from src.dev.log.common_log import log_execution
from src.dev.models.base import ScorerModel
from src.dev.node.beam_node import expand, select_candidates
from src.dev.state.beam_state import BeamState, DecodeResult, Trace, TraceEvent


@log_execution
def fcfs_beam(model: ScorerModel, config: DecoderConfig, *, record_trace: bool = True) -> DecodeResult:
    vocab_size = model.vocabulary.size
    k = config.beam_size
    threshold = config.finished_threshold
    state = BeamState(t=0, beam=[Hypothesis.root(model.vocabulary)])
    last_beam = state.beam
    trace = Trace() if record_trace else None
    scored = pops = 0
    terminated_by = "max_length"

    for t in range(1, config.max_length):
        state.t = t
        candidates = expand(state.beam, model, config)
        scored += len(state.beam) * vocab_size
        new_beam: List[Hypothesis] = []
        events: List[TraceEvent] = []
        patience_reached = False

        if candidates:
            for cand in select_candidates(candidates, k, config.selection_mode):
                if len(new_beam) >= k:
                    break
                pops += 1
                hyp = cand.hypothesis
                if hyp.finished:
                    state.finished.append(hyp)
                    events.append(TraceEvent(hyp, "to_finished"))
                    if len(state.finished) >= threshold:
                        patience_reached = True
                        break
                else:
                    new_beam.append(hyp)
                    events.append(TraceEvent(hyp, "to_beam"))

        state.beam = new_beam
        state.check(k)
        if trace is not None:
            trace.record(t, new_beam, state.finished, events)
        if patience_reached:
            terminated_by = "patience"
            break
        if not new_beam:
            terminated_by = "max_length" if t == config.max_length - 1 else "exhausted"
            break
        last_beam = new_beam

    return finish_from_pool(
        state.finished, last_beam,
        steps=state.t, scored=scored, pops=pops, terminated_by=terminated_by, trace=trace,
    )


@log_execution
def fcfs_beam_reference(model: ScorerModel, config: DecoderConfig, *, record_trace: bool = True) -> DecodeResult:
    """
    不带耐心因子的经典 FCFS：每次从候选池取最优并移除，完成数达到 k 即返回
    作为 p=1 的对照实现，刻意不复用 fcfs_beam 的弹出循环
    """
    vocab_size = model.vocabulary.size
    k = config.beam_size
    beam: List[Hypothesis] = [Hypothesis.root(model.vocabulary)]
    last_beam = beam
    finished: List[Hypothesis] = []
    trace = Trace() if record_trace else None
    scored = pops = 0
    t = 0

    for t in range(1, config.max_length):
        pool = [c.hypothesis for c in expand(beam, model, config)]
        scored += len(beam) * vocab_size
        next_beam: List[Hypothesis] = []
        events: List[TraceEvent] = []
        while len(next_beam) < k and pool:
            hyp = best_of(pool)
            pops += 1
            if hyp.last == model.vocabulary.eos_id:
                finished.append(hyp)
                events.append(TraceEvent(hyp, "to_finished"))
            else:
                next_beam.append(hyp)
                events.append(TraceEvent(hyp, "to_beam"))
            if len(finished) >= k:
                if trace is not None:
                    trace.record(t, next_beam, finished, events)
                return finish_from_pool(
                    finished, last_beam,
                    steps=t, scored=scored, pops=pops, terminated_by="patience", trace=trace,
                )
            pool.remove(hyp)
        beam = next_beam
        if trace is not None:
            trace.record(t, beam, finished, events)
        if not beam:
            break
        last_beam = beam

    terminated_by = "max_length" if t == config.max_length - 1 else "exhausted"
    return finish_from_pool(
        finished, last_beam,
        steps=t, scored=scored, pops=pops, terminated_by=terminated_by, trace=trace,
    )
