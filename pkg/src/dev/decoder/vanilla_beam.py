"""
vanilla 束搜索

上一步束中已完成的假设不扩展、以原分数回到候选池，与新扩展的候选一起取 top-k；
束内全部完成即返回束内最优。已完成假设可能被挤出束并永久丢弃。
"""
from typing import List

from src.dev.core.decoder_config import DecoderConfig
from src.dev.core.hypothesis import Hypothesis, best_of, canonical_key
from src.dev.log.common_log import log_execution
from src.dev.models.base import ScorerModel
from src.dev.node.beam_node import expand_hypothesis, select_candidates
from src.dev.state.beam_state import Candidate, DecodeResult, SearchStats, Trace, TraceEvent


@log_execution
def vanilla_beam(model: ScorerModel, config: DecoderConfig, *, record_trace: bool = True) -> DecodeResult:
    vocab_size = model.vocabulary.size
    k = config.beam_size
    beam: List[Hypothesis] = [Hypothesis.root(model.vocabulary)]
    trace = Trace() if record_trace else None
    scored = pops = steps = 0
    terminated_by = "max_length"

    for t in range(1, config.max_length):
        pool: List[Candidate] = []
        for parent, hyp in enumerate(beam):
            if hyp.finished:
                pool.append(Candidate(parent, None, hyp))
                continue
            pool.extend(expand_hypothesis(parent, hyp, model, config))
            scored += vocab_size
        steps = t
        if not pool:
            terminated_by = "exhausted"
            break

        selected = select_candidates(pool, k, config.selection_mode)[:k]
        pops += len(selected)
        kept = {id(c) for c in selected}
        events = [TraceEvent(c.hypothesis, "to_beam") for c in selected]
        # 被挤出束的已完成假设
        events.extend(
            TraceEvent(c.hypothesis, "discarded")
            for c in sorted(pool, key=lambda c: canonical_key(c.hypothesis))
            if c.token is None and id(c) not in kept
        )
        beam = [c.hypothesis for c in selected]
        finished_now = [h for h in beam if h.finished]
        if trace is not None:
            trace.record(t, beam, finished_now, events)
        if len(finished_now) == len(beam):
            terminated_by = "max_length" if t == config.max_length - 1 else "all_finished"
            break

    finished_pool = tuple(sorted((h for h in beam if h.finished), key=canonical_key))
    return DecodeResult(
        best=best_of(beam),
        finished_pool=finished_pool,
        stats=SearchStats(steps, scored, pops, terminated_by),
        trace=trace,
    )
