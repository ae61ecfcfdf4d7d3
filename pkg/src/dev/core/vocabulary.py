from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from src.dev.common.constant import DEFAULT_BOS, DEFAULT_EOS
from src.dev.common.exceptions import ModelFormatError


@dataclass(frozen=True)
class Vocabulary:
    """有序词表，token 的下标即 TokenId"""
    tokens: Tuple[str, ...]
    bos_id: int
    eos_id: int
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        if len(tokens) < 2:
            raise ModelFormatError(f"vocabulary needs at least 2 tokens, got {len(tokens)}")
        if len(set(tokens)) != len(tokens):
            duplicates = sorted({t for t in tokens if tokens.count(t) > 1})
            raise ModelFormatError(f"duplicate vocabulary tokens: {duplicates}")
        for name, idx in (("bos_id", self.bos_id), ("eos_id", self.eos_id)):
            if not 0 <= idx < len(tokens):
                raise ModelFormatError(f"{name}={idx} outside vocabulary of size {len(tokens)}")
        if self.bos_id == self.eos_id:
            raise ModelFormatError("BOS and EOS must be distinct tokens")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(tokens)})

    @classmethod
    def build(cls, content: Iterable[str], bos: str = DEFAULT_BOS, eos: str = DEFAULT_EOS) -> "Vocabulary":
        """BOS、EOS 固定占据 0、1 号位，其余按给定顺序排列"""
        return cls(tokens=(bos, eos, *content), bos_id=0, eos_id=1)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def bos(self) -> str:
        return self.tokens[self.bos_id]

    @property
    def eos(self) -> str:
        return self.tokens[self.eos_id]

    @property
    def continuation_ids(self) -> List[int]:
        """可作为后继的 token（除 BOS 外全部）"""
        return [i for i in range(len(self.tokens)) if i != self.bos_id]

    @property
    def content_ids(self) -> List[int]:
        return [i for i in range(len(self.tokens)) if i not in (self.bos_id, self.eos_id)]

    def id_of(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise ModelFormatError(f"unknown token {token!r}") from None

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def encode(self, tokens: Sequence[str]) -> Tuple[int, ...]:
        return tuple(self.id_of(t) for t in tokens)

    def decode(self, ids: Sequence[int]) -> List[str]:
        return [self.tokens[i] for i in ids]
