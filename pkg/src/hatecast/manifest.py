"""Run manifests: a JSON sidecar per artifact with the exact invocation,
config echo, and content hashes of inputs and outputs.  No timestamps, so a
replayed run produces byte-identical manifests too."""

from __future__ import annotations

import hashlib
import json
import platform
from pathlib import Path

import numpy as np

from . import __version__


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(artifact_path) -> Path:
    return Path(str(artifact_path) + ".manifest.json")


def write_manifest(
    primary_output,
    command: str,
    argv: list[str],
    config: dict,
    inputs: list,
    outputs: list,
) -> Path:
    doc = {
        "tool": "hatecast",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "config": config,
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "outputs": {str(p): file_sha256(p) for p in outputs},
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    path = manifest_path(primary_output)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
