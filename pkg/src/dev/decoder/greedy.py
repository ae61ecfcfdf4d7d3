from src.dev.core.decoder_config import DecoderConfig
from src.dev.core.hypothesis import Hypothesis
from src.dev.log.common_log import log_execution
from src.dev.models.base import ScorerModel
from src.dev.node.beam_node import expand_hypothesis, select_candidates
from src.dev.state.beam_state import DecodeResult, SearchStats, Trace, TraceEvent


@log_execution
def greedy_decode(model: ScorerModel, config: DecoderConfig, *, record_trace: bool = True) -> DecodeResult:
    """每步取约束后的最优 token（按规范序决胜），遇 EOS 或最大长度停止"""
    vocab_size = model.vocabulary.size
    hyp = Hypothesis.root(model.vocabulary)
    trace = Trace() if record_trace else None
    scored = pops = steps = 0
    terminated_by = "max_length"

    for t in range(1, config.max_length):
        candidates = expand_hypothesis(0, hyp, model, config)
        scored += vocab_size
        steps = t
        if not candidates:
            terminated_by = "exhausted"
            break
        hyp = select_candidates(candidates, 1, "full_scan")[0].hypothesis
        pops += 1
        if trace is not None:
            fate = "to_finished" if hyp.finished else "to_beam"
            trace.record(t, [] if hyp.finished else [hyp], [hyp] if hyp.finished else [], [TraceEvent(hyp, fate)])
        if hyp.finished:
            # 末步强制 EOS 导致的结束记为 max_length
            terminated_by = "max_length" if t == config.max_length - 1 else "all_finished"
            break

    return DecodeResult(
        best=hyp,
        finished_pool=(hyp,) if hyp.finished else (),
        stats=SearchStats(steps, scored, pops, terminated_by),
        trace=trace,
    )
