"""
扫参工具：耐心因子 / 束宽 / 长度惩罚 对步数、候选数、相对耗时与模型分数的影响

每个单元 = (取值, 模型, 输入, 重复)；单元内依次运行 FCFS(当前取值)、FCFS(p=1)、vanilla、greedy。
耗时列相对同配置下的 vanilla；candidates_scored 为与机器无关的确定性代理指标。
"""
import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field, field_validator, model_validator
from tqdm import tqdm

from config import config as app_config
from src.dev.api.schema import ModelSource
from src.dev.common.exceptions import BeamKitError, SweepError
from src.dev.core.decoder_config import DecoderConfig
from src.dev.decoder.fcfs_beam import fcfs_beam
from src.dev.decoder.greedy import greedy_decode
from src.dev.decoder.vanilla_beam import vanilla_beam
from src.dev.log.common_log import get_logger, log_execution
from src.dev.models.base import ScorerModel
from src.dev.models.model_io import load_model
from src.dev.utils.random_model import random_models

logger = get_logger("bench")

Axis = Literal["patience", "beam_size", "length_penalty"]
AXIS_FIELDS: Dict[str, str] = {
    "patience": "patience",
    "beam_size": "beam_size",
    "length_penalty": "length_penalty",
}


class SweepSpec(BaseModel):
    """扫参描述，JSON 扫参文件即其序列化"""
    model: ModelSource
    base_config: DecoderConfig = Field(default_factory=DecoderConfig)
    axis: Axis
    values: List[float] = Field(..., min_length=1)
    inputs: List[Optional[str]] = Field(default_factory=lambda: [None])
    repetitions: int = Field(1, ge=1)

    @field_validator("values")
    @classmethod
    def _strictly_increasing(cls, values: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"sweep values must be strictly increasing, got {values}")
        return values

    @model_validator(mode="after")
    def _integral_beam_sizes(self) -> "SweepSpec":
        if self.axis == "beam_size" and any(v != int(v) or v < 1 for v in self.values):
            raise ValueError(f"beam sizes must be positive integers, got {self.values}")
        if not self.inputs:
            raise ValueError("sweep needs at least one input")
        return self

    def config_for(self, value: float) -> DecoderConfig:
        cast = int(value) if self.axis == "beam_size" else float(value)
        return self.base_config.with_updates(**{AXIS_FIELDS[self.axis]: cast})


@dataclass(frozen=True)
class SweepCell:
    value: float
    model_index: int
    context: Optional[str]
    repetition: int
    steps: int
    candidates_scored: int
    pops: int
    score: float
    finished: bool
    score_p1: float
    score_vanilla: float
    score_greedy: float
    seconds: float
    vanilla_seconds: float


@dataclass(frozen=True)
class SweepRow:
    value: float
    mean_steps: float
    mean_candidates_scored: float
    mean_pops: float
    time_rel_vanilla: float
    mean_score: float
    mean_score_p1: float
    score_gain_vs_p1: float
    mean_score_vanilla: float
    mean_score_greedy: float
    fraction_finished: float


TIMING_COLUMNS = ("time_rel_vanilla",)


@dataclass
class SweepReport:
    axis: str
    rows: List[SweepRow]
    cells: List[SweepCell] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def columns(self) -> List[str]:
        return [self.axis] + [name for name in SweepRow.__dataclass_fields__ if name != "value"]

    def row_for(self, value: float) -> SweepRow:
        for row in self.rows:
            if row.value == value:
                return row
        raise KeyError(value)

    def to_csv(self, include_timing: bool = True, include_notes: bool = True) -> str:
        """表头行命名扫参轴与指标，每个取值一行；'#' 开头的行为说明"""
        columns = [c for c in self.columns if include_timing or c not in TIMING_COLUMNS]
        buffer = io.StringIO()
        if include_notes:
            for note in self.notes:
                buffer.write(f"# {note}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in self.rows:
            values = {self.axis: row.value, **{k: getattr(row, k) for k in SweepRow.__dataclass_fields__}}
            writer.writerow([repr(float(values[c])) for c in columns])
        return buffer.getvalue()

    def write_csv(self, path: Union[str, Path], include_timing: bool = True) -> None:
        Path(path).write_text(self.to_csv(include_timing), encoding="utf-8")


def load_sweep_models(source: ModelSource) -> List[ScorerModel]:
    if source.random is not None:
        return list(random_models(source.random))
    return [load_model(source)]


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _timed(decoder, model: ScorerModel, config: DecoderConfig):
    start = time.perf_counter()
    result = decoder(model, config, record_trace=False)
    return result, time.perf_counter() - start


def _run_cell(
    spec: SweepSpec,
    models: Sequence[ScorerModel],
    cell: Tuple[float, int, Optional[str], int],
) -> SweepCell:
    value, model_index, context, repetition = cell
    try:
        model = models[model_index].with_context(context)
        config = spec.config_for(value)
        result, seconds = _timed(fcfs_beam, model, config)
        baseline = fcfs_beam(model, config.with_updates(patience=1.0), record_trace=False)
        vanilla, vanilla_seconds = _timed(vanilla_beam, model, config)
        greedy = greedy_decode(model, config, record_trace=False)
    except BeamKitError as e:
        raise SweepError(str(e), model_index, context, value) from e
    except ValueError as e:
        raise SweepError(f"invalid config: {e}", model_index, context, value) from e
    return SweepCell(
        value=value,
        model_index=model_index,
        context=context,
        repetition=repetition,
        steps=result.stats.steps_executed,
        candidates_scored=result.stats.candidates_scored,
        pops=result.stats.pops,
        score=result.best.score,
        finished=result.best.finished,
        score_p1=baseline.best.score,
        score_vanilla=vanilla.best.score,
        score_greedy=greedy.best.score,
        seconds=seconds,
        vanilla_seconds=vanilla_seconds,
    )


def _aggregate(value: float, cells: Sequence[SweepCell]) -> SweepRow:
    vanilla_time = _mean([c.vanilla_seconds for c in cells])
    mean_score = _mean([c.score for c in cells])
    mean_score_p1 = _mean([c.score_p1 for c in cells])
    return SweepRow(
        value=value,
        mean_steps=_mean([c.steps for c in cells]),
        mean_candidates_scored=_mean([c.candidates_scored for c in cells]),
        mean_pops=_mean([c.pops for c in cells]),
        time_rel_vanilla=_mean([c.seconds for c in cells]) / vanilla_time if vanilla_time > 0 else 0.0,
        mean_score=mean_score,
        mean_score_p1=mean_score_p1,
        score_gain_vs_p1=mean_score - mean_score_p1,
        mean_score_vanilla=_mean([c.score_vanilla for c in cells]),
        mean_score_greedy=_mean([c.score_greedy for c in cells]),
        fraction_finished=_mean([1.0 if c.finished else 0.0 for c in cells]),
    )


@log_execution
def run_sweep(
    spec: SweepSpec,
    models: Optional[Sequence[ScorerModel]] = None,
    jobs: int = 1,
    progress: bool = False,
) -> SweepReport:
    """
    :param models: 预先载入的模型；为空时按 spec.model 载入
    :param jobs: 并行线程数，计时实验请设为 1
    """
    models = list(models) if models is not None else load_sweep_models(spec.model)
    cells = [
        (value, m, context, rep)
        for value in spec.values
        for m in range(len(models))
        for context in spec.inputs
        for rep in range(spec.repetitions)
    ]
    logger.info(
        f"🚀 扫参开始：axis={spec.axis}，取值 {spec.values}，{len(models)} 个模型 × "
        f"{len(spec.inputs)} 个输入 × {spec.repetitions} 次重复，jobs={jobs}"
    )

    run = lambda cell: _run_cell(spec, models, cell)  # noqa: E731
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(tqdm(pool.map(run, cells), total=len(cells), disable=not progress, desc="sweep"))
    else:
        results = [run(cell) for cell in tqdm(cells, disable=not progress, desc="sweep")]

    rows = [_aggregate(value, [c for c in results if c.value == value]) for value in spec.values]
    notes = [
        f"axis={spec.axis}; algorithm=fcfs; means over {len(models)} model(s) x {len(spec.inputs)} input(s) "
        f"x {spec.repetitions} repetition(s)",
        "time_rel_vanilla = mean fcfs wall-clock / mean vanilla wall-clock at the same config; "
        f"measured with jobs={jobs}; machine-dependent, excluded from determinism",
        "candidates_scored substitutes for batched accelerator timing as the portable latency proxy",
        "score columns are model log-scores (normalized), not task metrics",
    ]
    report = SweepReport(axis=spec.axis, rows=rows, cells=results, notes=notes)
    if spec.axis == "patience" and {1.0, 2.0} <= set(spec.values):
        ratio = slowdown_ratio(report)
        threshold = float(app_config.get("SWEEP.SLOWDOWN_THRESHOLD", 0.25))
        verdict = "under" if ratio < threshold else "over"
        report.notes.append(f"candidates_scored p=2 vs p=1: {ratio:+.1%}, {verdict} threshold {threshold:.0%}")
    return report


def steps_monotone_per_pair(report: SweepReport) -> bool:
    """每个 (模型, 输入, 重复) 的步数随取值不减"""
    by_pair: Dict[Tuple[int, Optional[str], int], List[SweepCell]] = {}
    for cell in report.cells:
        by_pair.setdefault((cell.model_index, cell.context, cell.repetition), []).append(cell)
    for cells in by_pair.values():
        ordered = sorted(cells, key=lambda c: c.value)
        if any(b.steps < a.steps for a, b in zip(ordered, ordered[1:])):
            return False
    return True


def slowdown_ratio(report: SweepReport, base: float = 1.0, target: float = 2.0) -> float:
    """target 相对 base 的 candidates_scored 增幅（0.25 即多 25%）"""
    base_row, target_row = report.row_for(base), report.row_for(target)
    return target_row.mean_candidates_scored / base_row.mean_candidates_scored - 1.0
