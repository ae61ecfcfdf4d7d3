from typing import Callable, Dict

from src.dev.common.exceptions import ConfigurationError
from src.dev.core.decoder_config import DecoderConfig
from src.dev.decoder.fcfs_beam import fcfs_beam, fcfs_beam_reference
from src.dev.decoder.greedy import greedy_decode
from src.dev.decoder.vanilla_beam import vanilla_beam
from src.dev.models.base import ScorerModel
from src.dev.state.beam_state import DecodeResult

Decoder = Callable[..., DecodeResult]

# 算法名 → 解码函数
DECODERS: Dict[str, Decoder] = {
    "greedy": greedy_decode,
    "vanilla": vanilla_beam,
    "fcfs": fcfs_beam,
    "fcfs-reference": fcfs_beam_reference,
}


def get_decoder(name: str) -> Decoder:
    if name not in DECODERS:
        raise ConfigurationError(f"unknown algorithm {name!r}, choose from {sorted(DECODERS)}")
    return DECODERS[name]


def decode(name: str, model: ScorerModel, config: DecoderConfig, *, record_trace: bool = False) -> DecodeResult:
    return get_decoder(name)(model, config, record_trace=record_trace)
