import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import chardet
import numpy as np
from pydantic import ValidationError

from src.dev.api.schema import ModelSource, TabularModelFile
from src.dev.common.constant import DEFAULT_BOS, DEFAULT_EOS
from src.dev.common.exceptions import ModelFormatError, NormalizationError
from src.dev.core.vocabulary import Vocabulary
from src.dev.log.common_log import get_logger
from src.dev.models.base import ScorerModel, validate_model
from src.dev.models.ngram import NGramModel, train_ngram
from src.dev.models.tabular import Context, TabularModel

logger = get_logger("models")

PathLike = Union[str, Path]


def _detect_encoding(file_path: PathLike) -> str:
    """自动检测文件编码"""
    try:
        with open(file_path, 'rb') as f:
            raw_data = f.read(10000)  # 读取部分数据用于检测
        detected = chardet.detect(raw_data)
        encoding = detected['encoding'] or 'utf-8'
        return 'utf-8' if encoding.lower() == 'ascii' else encoding
    except OSError:
        return 'utf-8'


def _location(error: dict) -> str:
    return ".".join(str(part) for part in error.get("loc", ()))


def _parse_rows(
    raw_rows: Dict[str, Dict[str, float]],
    vocab: Vocabulary,
    order: int,
    where: str,
) -> Dict[Context, np.ndarray]:
    rows: Dict[Context, np.ndarray] = {}
    for key, entries in raw_rows.items():
        ctx_tokens = key.split()
        if len(ctx_tokens) != order:
            raise ModelFormatError(
                f"context has {len(ctx_tokens)} token(s), model order is {order}", f"{where}.{key}"
            )
        unknown = [t for t in ctx_tokens if t not in vocab]
        if unknown:
            raise ModelFormatError(f"unknown context token(s) {unknown}", f"{where}.{key}")
        vec = np.zeros(vocab.size, dtype=np.float64)
        for token, prob in entries.items():
            if token not in vocab:
                raise ModelFormatError(f"unknown token {token!r}", f"{where}.{key}.{token}")
            vec[vocab.id_of(token)] = prob
        rows[vocab.encode(ctx_tokens)] = vec
    return rows


def load_tabular_model(path: PathLike, validate: bool = True) -> TabularModel:
    """
    读取表格模型 JSON
    :param validate: 为 True 时校验归一化，违规直接拒绝并列出上下文
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ModelFormatError(f"model file is not valid UTF-8: {e}", str(path)) from None
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"invalid JSON: {e.msg}", f"line {e.lineno} column {e.colno}") from None
    try:
        spec = TabularModelFile.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        raise ModelFormatError(first["msg"], _location(first)) from None

    for name, token in (("bos", spec.bos), ("eos", spec.eos)):
        if token not in spec.vocab:
            raise ModelFormatError(f"{name} token {token!r} missing from vocab", name)
    vocab = Vocabulary(tokens=tuple(spec.vocab), bos_id=spec.vocab.index(spec.bos), eos_id=spec.vocab.index(spec.eos))
    rows = _parse_rows(spec.rows, vocab, spec.order, "rows")
    conditioned = {
        key: _parse_rows(table, vocab, spec.order, f"conditioned_rows.{key}")
        for key, table in spec.conditioned_rows.items()
    }
    model = TabularModel(vocab, spec.order, rows, spec.fallback, conditioned)

    if validate:
        violations = validate_model(model)
        if violations:
            raise NormalizationError(sorted({v.context for v in violations}), [str(v) for v in violations])
    logger.info(f"✅ 载入表格模型 {path.name}：order={spec.order}，|V|={vocab.size}，{len(rows)} 行")
    return model


def _row_payload(model: TabularModel, table: Dict[Context, np.ndarray]) -> Dict[str, Dict[str, float]]:
    payload = {}
    for ctx in sorted(table):
        vec = table[ctx]
        payload[model.context_label(ctx)] = {
            model.vocabulary.tokens[i]: float(vec[i]) for i in range(len(vec)) if vec[i] != 0.0
        }
    return payload


def save_tabular_model(model: TabularModel, path: PathLike) -> None:
    """float 的 repr 可无损往返"""
    vocab = model.vocabulary
    payload = TabularModelFile(
        order=model.order,
        vocab=list(vocab.tokens),
        bos=vocab.bos,
        eos=vocab.eos,
        fallback=model.fallback,
        rows=_row_payload(model, model.rows),
        conditioned_rows={k: _row_payload(model, t) for k, t in sorted(model.conditioned_rows.items())},
    )
    Path(path).write_text(json.dumps(payload.model_dump(), ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def read_corpus(
    path: PathLike,
    vocabulary: Optional[Vocabulary] = None,
) -> Tuple[Vocabulary, List[Tuple[int, ...]]]:
    """每行一个空白分词的序列，隐式追加 EOS；未给词表时由语料构建"""
    encoding = _detect_encoding(path)
    with open(path, "r", encoding=encoding) as f:
        lines = [line.split() for line in f]
    lines = [tokens for tokens in lines if tokens]

    markers = {vocabulary.bos, vocabulary.eos} if vocabulary is not None else {DEFAULT_BOS, DEFAULT_EOS}
    for line_no, tokens in enumerate(lines, 1):
        if markers.intersection(tokens):
            raise ModelFormatError("corpus lines must not contain BOS/EOS markers", f"sequence {line_no}")
    if vocabulary is None:
        vocabulary = Vocabulary.build(sorted({t for tokens in lines for t in tokens}))
    sequences = [vocabulary.encode(tokens) + (vocabulary.eos_id,) for tokens in lines]
    logger.info(f"✅ 读取语料 {Path(path).name}：{len(sequences)} 条序列，编码 {encoding}")
    return vocabulary, sequences


def load_ngram_model(path: PathLike, n: int, delta: float) -> NGramModel:
    vocabulary, sequences = read_corpus(path)
    return train_ngram(sequences, vocabulary, n, delta)


def load_model(source: ModelSource) -> ScorerModel:
    """按 ModelSource 载入单个文件模型（随机模型由 utils.random_model 生成）"""
    if source.path is None:
        raise ModelFormatError("model source has no path")
    if source.kind == "ngram":
        return load_ngram_model(source.path, source.ngram_order, source.delta)
    return load_tabular_model(source.path)
