"""
同一模型、同一批输入上的算法对照：greedy / vanilla / fcfs(p=1) / fcfs(当前耐心因子)
"""
import csv
import io
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from src.dev.common.exceptions import BeamKitError, SweepError
from src.dev.core.decoder_config import DecoderConfig
from src.dev.core.vocabulary import Vocabulary
from src.dev.decoder.registry import decode
from src.dev.decoder.trace_io import divergence_summary, first_divergence
from src.dev.log.common_log import get_logger, log_execution
from src.dev.models.base import ScorerModel
from src.dev.state.beam_state import DecodeResult

logger = get_logger("bench")

# (行名, 算法名, 配置)
AlgorithmSpec = Tuple[str, str, DecoderConfig]


def default_algorithms(config: DecoderConfig) -> List[AlgorithmSpec]:
    baseline = config.with_updates(patience=1.0)
    return [
        ("greedy", "greedy", baseline),
        ("vanilla", "vanilla", baseline),
        ("fcfs", "fcfs", baseline),
        (f"fcfs_p{config.patience:g}", "fcfs", config),
    ]


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    algorithm: str
    mean_score: float
    mean_length: float
    mean_steps: float
    differing_outputs: int
    differing_inputs: Tuple[Optional[str], ...] = ()
    # 每个输入与基线 trace 的首个分歧步，None 表示一致
    divergence_steps: Tuple[Optional[int], ...] = ()


@dataclass
class ComparisonTable:
    baseline: str
    rows: List[ComparisonRow] = field(default_factory=list)
    results: List[List[DecodeResult]] = field(default_factory=list)
    inputs: List[Optional[str]] = field(default_factory=list)

    def row(self, label: str) -> ComparisonRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def divergence_records(self, vocabulary: Vocabulary) -> List[dict]:
        """与基线 trace 出现分歧的 (算法, 输入)，附双方在分歧步的 B 与 F"""
        base = self.results[[r.label for r in self.rows].index(self.baseline)]
        records = []
        for row, per_input in zip(self.rows, self.results):
            if row.label == self.baseline:
                continue
            for context, ours, theirs in zip(self.inputs, per_input, base):
                summary = divergence_summary(ours.trace, theirs.trace, vocabulary)
                if summary is not None:
                    records.append({"algorithm": row.label, "baseline": self.baseline, "context": context, **summary})
        return records

    def to_csv(self) -> str:
        buffer = io.StringIO()
        buffer.write(f"# differing_outputs counts inputs whose token sequence differs from {self.baseline}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["algorithm", "mean_score", "mean_length", "mean_steps", "differing_outputs"])
        for r in self.rows:
            writer.writerow([r.label, repr(r.mean_score), repr(r.mean_length), repr(r.mean_steps), r.differing_outputs])
        return buffer.getvalue()


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


@log_execution
def compare_algorithms(
    model: ScorerModel,
    inputs: Sequence[Optional[str]],
    config: DecoderConfig,
    algorithms: Optional[Sequence[AlgorithmSpec]] = None,
    baseline: str = "fcfs",
) -> ComparisonTable:
    """
    :param algorithms: 默认四行；baseline 为其中一行的行名，差异计数以它为准
    """
    algorithms = list(algorithms) if algorithms is not None else default_algorithms(config)
    if baseline not in [label for label, _, _ in algorithms]:
        baseline = algorithms[0][0]
    inputs = list(inputs) or [None]

    outputs: List[List[DecodeResult]] = []
    for label, name, cfg in algorithms:
        per_input = []
        for context in inputs:
            try:
                per_input.append(decode(name, model.with_context(context), cfg, record_trace=True))
            except BeamKitError as e:
                raise SweepError(f"{label}: {e}", 0, context, cfg.patience) from e
        outputs.append(per_input)

    base = outputs[[label for label, _, _ in algorithms].index(baseline)]
    table = ComparisonTable(baseline=baseline, results=outputs, inputs=inputs)
    for (label, name, _), per_input in zip(algorithms, outputs):
        differing = tuple(
            context
            for context, ours, theirs in zip(inputs, per_input, base)
            if ours.best.tokens != theirs.best.tokens
        )
        table.rows.append(ComparisonRow(
            label=label,
            algorithm=name,
            mean_score=_mean([r.best.score for r in per_input]),
            mean_length=_mean([r.best.length for r in per_input]),
            mean_steps=_mean([r.stats.steps_executed for r in per_input]),
            differing_outputs=len(differing),
            differing_inputs=differing,
            divergence_steps=tuple(first_divergence(ours.trace, theirs.trace) for ours, theirs in zip(per_input, base)),
        ))
    logger.info(f"📊 对照完成：{len(algorithms)} 个算法 × {len(inputs)} 个输入，基线 {baseline}")
    return table
