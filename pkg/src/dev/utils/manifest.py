import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

from src.dev.api.schema import RunManifest
from src.dev.common.constant import VERSION


def file_hash(path: Union[str, Path]) -> str:
    """模型文件 sha256"""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(
    command: str,
    config: Dict[str, Any],
    seed: int,
    model_path: Optional[Union[str, Path]] = None,
    **extra: Any,
) -> RunManifest:
    return RunManifest(
        command=command,
        config=config,
        model_hash=file_hash(model_path) if model_path else None,
        seed=seed,
        tool_version=VERSION,
        extra=extra,
    )


def manifest_path_for(output: Union[str, Path]) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


def write_manifest(manifest: RunManifest, path: Union[str, Path]) -> None:
    Path(path).write_text(
        json.dumps(manifest.model_dump(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
