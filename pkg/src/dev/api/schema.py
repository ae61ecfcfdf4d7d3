from typing import Optional, Dict, Any, List, Literal
from pydantic import BaseModel, Field, model_validator


# ==================== 1. 模型文件 ====================
class TabularModelFile(BaseModel):
    """表格模型 JSON 文件结构"""
    order: int = Field(..., ge=1, description="上下文长度（生成 token 数，不足用 BOS 补齐）")
    vocab: List[str] = Field(..., min_length=2)
    bos: str
    eos: str
    fallback: Literal["uniform", "error"] = "uniform"
    rows: Dict[str, Dict[str, float]] = Field(default_factory=dict, description="上下文键 → {token: prob}")
    conditioned_rows: Dict[str, Dict[str, Dict[str, float]]] = Field(
        default_factory=dict, description="输入键 → 该输入专属的 rows"
    )


class RandomModelSpec(BaseModel):
    """随机表格模型参数，所有随机性来自 seed"""
    seed: int = 0
    count: int = Field(1, ge=1, description="生成的模型数量，第 i 个模型使用 seed + i")
    vocab_size: int = Field(4, ge=2, description="含 BOS/EOS")
    order: int = Field(2, ge=1)
    eos_floor: float = Field(0.0, ge=0.0, lt=1.0)
    concentration: float = Field(1.0, gt=0.0)


class ModelSource(BaseModel):
    """模型来源：表格文件 / n-gram 语料 / 随机生成，三选一"""
    path: Optional[str] = None
    kind: Literal["tabular", "ngram"] = "tabular"
    ngram_order: int = Field(2, ge=1)
    delta: float = Field(0.1, gt=0.0)
    random: Optional[RandomModelSpec] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "ModelSource":
        if (self.path is None) == (self.random is None):
            raise ValueError("model source needs exactly one of 'path' or 'random'")
        return self


# ==================== 2. 解码输出 ====================
class HypothesisRecord(BaseModel):
    tokens: List[str]
    sum_logprob: float
    score: float


class TraceEventRecord(BaseModel):
    candidate: HypothesisRecord
    fate: Literal["to_beam", "to_finished", "discarded"]


class TraceStepRecord(BaseModel):
    """trace JSONL 的一行"""
    t: int
    beam: List[HypothesisRecord]
    finished: List[HypothesisRecord]
    events: List[TraceEventRecord]


class DecodeOutputRecord(BaseModel):
    """decode 命令 JSONL 的一行"""
    context: Optional[str] = None
    algorithm: str
    tokens: List[str]
    sum_logprob: float
    score: float
    finished: bool
    terminated_by: str
    stats: Dict[str, Any]


# ==================== 3. 运行清单 ====================
class RunManifest(BaseModel):
    """每个输出文件随附的清单；清单相同则非计时输出逐字节相同"""
    command: str
    config: Dict[str, Any]
    model_hash: Optional[str] = None
    seed: int
    tool_version: str
    extra: Dict[str, Any] = Field(default_factory=dict)
