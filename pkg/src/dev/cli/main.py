"""
beamkit 命令行入口

子命令：decode / sweep / oracle / validate / compare / gen-model
退出码：0 成功，1 数据或模型错误，2 用法错误
"""
import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from config import config as app_config
from src.dev.api.schema import DecodeOutputRecord, ModelSource, RandomModelSpec
from src.dev.bench.compare import compare_algorithms
from src.dev.bench.sweep import SweepSpec, run_sweep, slowdown_ratio, steps_monotone_per_pair
from src.dev.common.constant import DECODER_PRESETS, PROJECT_NAME, VERSION
from src.dev.common.exceptions import BeamKitError, ConfigurationError
from src.dev.core.decoder_config import DecoderConfig
from src.dev.decoder.registry import DECODERS, decode
from src.dev.decoder.trace_io import write_trace_jsonl
from src.dev.log.common_log import get_logger, setup_logging
from src.dev.models.base import ScorerModel, validate_model
from src.dev.models.model_io import load_model, load_ngram_model, load_tabular_model, save_tabular_model
from src.dev.oracle.exhaustive import exhaustive_best, score_gap
from src.dev.state.beam_state import DecodeResult
from src.dev.utils.manifest import build_manifest, manifest_path_for, write_manifest
from src.dev.utils.random_model import random_tabular_model

logger = get_logger("cli")


class UsageError(Exception):
    """参数组合不合法，退出码 2"""


# ==================== 参数定义 ====================
def _add_model_args(parser: argparse.ArgumentParser, required: bool = True) -> None:
    group = parser.add_argument_group("model")
    group.add_argument("--model", required=required, help="表格模型 JSON 或 n-gram 语料路径")
    group.add_argument("--model-type", choices=["tabular", "ngram"], default="tabular")
    group.add_argument("--order", type=int, default=2, help="n-gram 阶数 (default: 2)")
    group.add_argument("--delta", type=float, default=0.1, help="n-gram 加性平滑 (default: 0.1)")


def _add_decoder_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("decoder", "未给出的参数取预设值，无预设时 k=5, p=1, alpha=1, power, M=201")
    group.add_argument("--preset", choices=sorted(DECODER_PRESETS))
    group.add_argument("--beam-size", type=int)
    group.add_argument("--patience", type=float)
    group.add_argument("--length-penalty", type=float)
    group.add_argument("--penalty-style", choices=["power", "gnmt"])
    group.add_argument("--max-length", type=int, help="含 BOS 的总长度上限 M")
    group.add_argument("--min-length", type=int)
    group.add_argument("--no-repeat-ngram-size", type=int)
    group.add_argument("--selection-mode", choices=["full_scan", "top_2k"])


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", dest="inputs", action="append", help="输入键（条件表格模型），可重复")
    parser.add_argument("--inputs-file", help="每行一个输入键")


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", help="输出文件，旁附 <文件>.manifest.json；默认 stdout，清单写到 stderr")
    parser.add_argument("--jobs", type=int, help="并行线程数 (default: RUNTIME.JOBS)")
    parser.add_argument("--seed", type=int, help="随机种子 (default: BEAMKIT_SEED / RUNTIME.SEED)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROJECT_NAME, description="束搜索解码与耐心因子实验工具")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="解码，每个输入输出一行 JSON")
    p.add_argument("--algorithm", choices=sorted(DECODERS), default="fcfs")
    p.add_argument("--trace", help="写出逐步 trace（JSONL），仅支持单个输入")
    _add_model_args(p)
    _add_decoder_args(p)
    _add_input_args(p)
    _add_run_args(p)

    p = sub.add_parser("sweep", help="沿 patience / beam_size / length_penalty 扫参，输出 CSV")
    p.add_argument("--spec-file", help="JSON 扫参文件，与 --axis/--values 互斥")
    p.add_argument("--axis", choices=["patience", "beam_size", "length_penalty"])
    p.add_argument("--values", help="逗号分隔且严格递增，如 0.5,1,2")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--random-models", type=int, help="不给 --model 时生成的随机模型数量")
    p.add_argument("--vocab-size", type=int, help="随机模型词表大小（含 BOS/EOS）")
    p.add_argument("--random-order", type=int, help="随机模型上下文长度")
    p.add_argument("--eos-floor", type=float, help="随机模型 EOS 概率下限")
    p.add_argument("--no-timing", action="store_true", help="省略耗时列，输出逐字节可复现")
    p.add_argument("--no-progress", action="store_true")
    _add_model_args(p, required=False)
    _add_decoder_args(p)
    _add_input_args(p)
    _add_run_args(p)

    p = sub.add_parser("oracle", help="穷举求最优序列")
    p.add_argument("--max-enumerate", type=int, help="穷举规模上限 (default: ORACLE.MAX_ENUMERATE)")
    p.add_argument("--check-beam", choices=sorted(DECODERS), help="同时运行该算法并输出与 oracle 的分差")
    _add_model_args(p)
    _add_decoder_args(p)
    p.add_argument("--input", dest="inputs", action="append")
    p.add_argument("--output")

    p = sub.add_parser("validate", help="检查模型每一行的归一化")
    _add_model_args(p)

    p = sub.add_parser("compare", help="greedy / vanilla / fcfs / fcfs(p) 对照表")
    p.add_argument("--diff", help="写出各算法与 fcfs 的 trace 首个分歧步（JSONL）")
    _add_model_args(p)
    _add_decoder_args(p)
    _add_input_args(p)
    p.add_argument("--output")

    p = sub.add_parser("gen-model", help="生成随机表格模型")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--vocab-size", type=int, default=app_config.get("RANDOM_MODEL.VOCAB_SIZE", 4))
    p.add_argument("--order", type=int, default=app_config.get("RANDOM_MODEL.ORDER", 2))
    p.add_argument("--eos-floor", type=float, default=app_config.get("RANDOM_MODEL.EOS_FLOOR", 0.0))
    p.add_argument("--concentration", type=float, default=app_config.get("RANDOM_MODEL.CONCENTRATION", 1.0))
    return parser


# ==================== 公共工具 ====================
def _decoder_config(args: argparse.Namespace) -> DecoderConfig:
    overrides = {
        "beam_size": args.beam_size,
        "patience": args.patience,
        "length_penalty": args.length_penalty,
        "penalty_style": args.penalty_style,
        "max_length": args.max_length,
        "min_length": args.min_length,
        "no_repeat_ngram_size": args.no_repeat_ngram_size,
        "selection_mode": args.selection_mode,
    }
    if args.preset:
        return DecoderConfig.from_preset(args.preset, **overrides)
    return DecoderConfig(**{k: v for k, v in overrides.items() if v is not None})


def _model_source(args: argparse.Namespace) -> ModelSource:
    return ModelSource(path=args.model, kind=args.model_type, ngram_order=args.order, delta=args.delta)


def _inputs(args: argparse.Namespace) -> List[Optional[str]]:
    inputs: List[Optional[str]] = list(getattr(args, "inputs", None) or [])
    inputs_file = getattr(args, "inputs_file", None)
    if inputs_file:
        with open(inputs_file, "r", encoding="utf-8") as f:
            inputs.extend(line.strip() for line in f if line.strip())
    return inputs or [None]


def _seed(args: argparse.Namespace) -> int:
    return args.seed if getattr(args, "seed", None) is not None else int(app_config.get("RUNTIME.SEED", 0))


def _jobs(args: argparse.Namespace) -> int:
    jobs = args.jobs if args.jobs is not None else int(app_config.get("RUNTIME.JOBS", 1))
    if jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {jobs}")
    return jobs


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_manifest(
    args: argparse.Namespace,
    config: Dict[str, Any],
    model_path: Optional[str],
    *files: Optional[str],
    **extra: Any,
) -> None:
    """每个写出的文件旁附带清单；结果走 stdout 时清单以 '#' 行写到 stderr"""
    manifest = build_manifest(args.command, config, _seed(args), model_path, **extra)
    for out in filter(None, files):
        path = manifest_path_for(out)
        write_manifest(manifest, path)
        logger.info(f"📝 运行清单已写入 {path}")
    if not args.output:
        sys.stderr.write(f"# manifest {json.dumps(manifest.model_dump(), ensure_ascii=False, sort_keys=True)}\n")


def _output_record(context: Optional[str], algorithm: str, model: ScorerModel, result: DecodeResult) -> str:
    record = DecodeOutputRecord(
        context=context,
        algorithm=algorithm,
        tokens=list(model.vocabulary.decode(result.best.tokens)),
        sum_logprob=result.best.sum_logprob,
        score=result.best.score,
        finished=result.best.finished,
        terminated_by=result.stats.terminated_by,
        stats=result.stats.to_dict(),
    )
    return json.dumps(record.model_dump(), ensure_ascii=False)


# ==================== 子命令 ====================
def cmd_decode(args: argparse.Namespace) -> int:
    config = _decoder_config(args)
    inputs = _inputs(args)
    if args.trace and len(inputs) != 1:
        raise UsageError("--trace supports exactly one input")
    jobs = _jobs(args)
    model = load_model(_model_source(args))

    def run_one(context: Optional[str]) -> DecodeResult:
        return decode(args.algorithm, model.with_context(context), config, record_trace=bool(args.trace))

    if jobs > 1 and len(inputs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, inputs))
    else:
        results = [run_one(context) for context in inputs]

    lines = [_output_record(ctx, args.algorithm, model, r) for ctx, r in zip(inputs, results)]
    _emit("".join(line + "\n" for line in lines), args.output)
    if args.trace:
        write_trace_jsonl(results[0].trace, model.vocabulary, args.trace)
    _write_manifest(args, config.model_dump(), args.model, args.output, args.trace, algorithm=args.algorithm, inputs=inputs)
    logger.info(f"✅ decode 完成：{args.algorithm}，{len(inputs)} 个输入")
    return 0


def _parse_values(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed --values {text!r}, expected comma-separated numbers") from None


def _sweep_spec(args: argparse.Namespace) -> SweepSpec:
    if args.spec_file:
        if args.axis or args.values:
            raise UsageError("--spec-file cannot be combined with --axis/--values")
        return SweepSpec.model_validate_json(Path(args.spec_file).read_text(encoding="utf-8"))

    if not args.axis or not args.values:
        raise UsageError("sweep needs --spec-file or both --axis and --values")
    if (args.model is None) == (args.random_models is None):
        raise UsageError("sweep needs exactly one of --model or --random-models")
    if args.model is not None:
        source = _model_source(args)
    else:
        random_spec = {
            "seed": _seed(args),
            "count": args.random_models,
            "vocab_size": args.vocab_size,
            "order": args.random_order,
            "eos_floor": args.eos_floor,
        }
        source = ModelSource(random=RandomModelSpec(**{k: v for k, v in random_spec.items() if v is not None}))
    return SweepSpec(
        model=source,
        base_config=_decoder_config(args),
        axis=args.axis,
        values=_parse_values(args.values),
        inputs=_inputs(args),
        repetitions=args.repetitions,
    )


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = _sweep_spec(args)
    # 先校验每个取值对应的配置，非法组合按用法错误处理
    for value in spec.values:
        spec.config_for(value)
    progress = not args.no_progress and bool(app_config.get("SWEEP.PROGRESS", True))
    report = run_sweep(spec, jobs=_jobs(args), progress=progress)
    _emit(report.to_csv(include_timing=not args.no_timing), args.output)

    if spec.axis == "patience":
        if not steps_monotone_per_pair(report):
            logger.warning("⚠️ 存在步数随 p 减少的 (模型, 输入) 组合")
        if 1.0 in spec.values and 2.0 in spec.values:
            ratio = slowdown_ratio(report)
            threshold = float(app_config.get("SWEEP.SLOWDOWN_THRESHOLD", 0.25))
            flag = "✅" if ratio < threshold else "⚠️"
            logger.info(f"{flag} p=2 相对 p=1 的 candidates_scored 增幅 {ratio:.1%}（阈值 {threshold:.0%}）")
    _write_manifest(args, spec.model_dump(mode="json"), spec.model.path, args.output, timing=not args.no_timing)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    config = _decoder_config(args)
    inputs = args.inputs or [None]
    if len(inputs) != 1:
        raise UsageError("oracle takes at most one --input")
    model = load_model(_model_source(args)).with_context(inputs[0])
    oracle = exhaustive_best(model, config, limit=args.max_enumerate)
    payload: Dict[str, Any] = {
        "context": inputs[0],
        "tokens": list(model.vocabulary.decode(oracle.best.tokens)),
        "sum_logprob": oracle.best.sum_logprob,
        "score": oracle.best.score,
        "num_enumerated": oracle.num_enumerated,
        "exhausted": oracle.exhausted,
    }
    if args.check_beam:
        beam = decode(args.check_beam, model, config)
        payload["check_beam"] = {
            "algorithm": args.check_beam,
            "tokens": list(model.vocabulary.decode(beam.best.tokens)),
            "score": beam.best.score,
            "score_gap": score_gap(oracle, beam.best),
        }
    _emit(json.dumps(payload, ensure_ascii=False) + "\n", args.output)
    _write_manifest(
        args, config.model_dump(), args.model, args.output,
        max_enumerate=args.max_enumerate, check_beam=args.check_beam, inputs=inputs,
    )
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    if args.model_type == "ngram":
        model = load_ngram_model(args.model, args.order, args.delta)
    else:
        model = load_tabular_model(args.model, validate=False)
    violations = validate_model(model)
    if violations:
        for v in violations:
            sys.stdout.write(f"{v}\n")
        sys.stderr.write(f"error: {len(violations)} normalization violation(s) in {args.model}\n")
        return 1
    sys.stdout.write(f"OK: {args.model}\n")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    config = _decoder_config(args)
    model = load_model(_model_source(args))
    table = compare_algorithms(model, _inputs(args), config)
    _emit(table.to_csv(), args.output)
    if args.diff:
        lines = [json.dumps(r, ensure_ascii=False) for r in table.divergence_records(model.vocabulary)]
        Path(args.diff).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        logger.info(f"🔀 {len(lines)} 条分歧记录写入 {args.diff}")
    _write_manifest(args, config.model_dump(), args.model, args.output, args.diff, inputs=_inputs(args))
    return 0


def cmd_gen_model(args: argparse.Namespace) -> int:
    model = random_tabular_model(
        _seed(args),
        vocab_size=args.vocab_size,
        order=args.order,
        eos_floor=args.eos_floor,
        concentration=args.concentration,
    )
    save_tabular_model(model, args.output)
    _write_manifest(
        args,
        {"vocab_size": args.vocab_size, "order": args.order, "eos_floor": args.eos_floor, "concentration": args.concentration},
        None,
        args.output,
    )
    logger.info(f"✅ 随机模型已写入 {args.output}")
    return 0


COMMANDS = {
    "decode": cmd_decode,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "validate": cmd_validate,
    "compare": cmd_compare,
    "gen-model": cmd_gen_model,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    setup_logging(args.log_level)

    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigurationError, ValidationError) as e:
        sys.stderr.write(f"{parser.prog} {args.command}: error: {e}\n")
        return 2
    except FileNotFoundError as e:
        sys.stderr.write(f"error: file not found: {e.filename}\n")
        return 1
    except (BeamKitError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
