"""Run manifests: enough provenance next to every artifact to re-run the
producing command bit-identically (same backend permitting)."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, default=str).encode()).hexdigest()


def write_manifest(artifact: Path, command: str, args: dict,
                   inputs: list[Path], config: dict | None = None) -> Path:
    manifest = {
        "tool": "forge",
        "version": __version__,
        "command": command,
        "args": {k: str(v) for k, v in args.items() if v is not None},
        "config_hash": config_hash(config or {}),
        "inputs": {
            str(p): file_sha256(Path(p)) for p in inputs if Path(p).is_file()
        },
        "artifact": str(artifact),
    }
    path = Path(str(artifact) + ".manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path
