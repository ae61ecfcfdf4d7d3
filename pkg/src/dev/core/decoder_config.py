from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.dev.common.constant import DECODER_PRESETS
from src.dev.common.exceptions import ConfigurationError
from src.dev.log.common_log import get_logger

logger = get_logger("config")

PenaltyStyle = Literal["power", "gnmt"]
SelectionMode = Literal["full_scan", "top_2k"]


class DecoderConfig(BaseModel):
    """
    解码超参数，贪心/vanilla/FCFS 共用
    max_length 为含 BOS 的总 token 数；min_length 为 EOS 之前至少生成的 token 数
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    beam_size: int = Field(5, ge=1, description="k")
    patience: float = Field(1.0, gt=0, description="p，原始 FCFS 相当于 p=1")
    max_length: int = Field(201, ge=2, description="M，含 BOS")
    length_penalty: float = Field(1.0, description="alpha")
    penalty_style: PenaltyStyle = "power"
    min_length: int = Field(0, ge=0)
    no_repeat_ngram_size: int = Field(0, ge=0, description="0 表示关闭")
    selection_mode: SelectionMode = "full_scan"

    @model_validator(mode="after")
    def _check_lengths(self) -> "DecoderConfig":
        if self.max_length <= self.min_length + 1:
            raise ValueError(
                f"max_length ({self.max_length}) must exceed min_length + 1 ({self.min_length + 1})"
            )
        if self.beam_size * self.patience < 1:
            logger.warning(
                f"k·p = {self.beam_size * self.patience:g} < 1：FCFS 将在第一个完成假设出现时停止"
            )
        return self

    @property
    def finished_threshold(self) -> float:
        """FCFS 停止所需的完成假设数 k·p（不取整）"""
        return self.beam_size * self.patience

    def with_updates(self, **updates: Any) -> "DecoderConfig":
        """带校验的复制（model_copy 不会重新校验）"""
        return DecoderConfig(**{**self.model_dump(), **updates})

    @classmethod
    def from_preset(cls, name: str, **overrides: Any) -> "DecoderConfig":
        if name not in DECODER_PRESETS:
            raise ConfigurationError(f"unknown preset {name!r}, choose from {sorted(DECODER_PRESETS)}")
        values = dict(DECODER_PRESETS[name])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
