"""Checksummed single-file container for automaton and model artifacts.

The envelope is JSON: {"format_version", "kind", "checksum", "payload"}.
The checksum is the SHA-256 of the canonical payload encoding, so any
truncation or bit flip is caught on load. Arrays travel as base64 raw
bytes in row-major order with explicit dtype and shape, which makes
round-trips bit-exact.
"""

from __future__ import annotations

import base64
import hashlib
import json

import numpy as np

FORMAT_VERSION = 1


class ArtifactError(ValueError):
    """Artifact file is corrupt, truncated, or of an unsupported version/kind."""


def encode_array(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr)
    return {
        "dtype": str(arr.dtype),
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def decode_array(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    arr = np.frombuffer(raw, dtype=obj["dtype"]).reshape(obj["shape"])
    return arr.copy()


def _canonical(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_envelope(kind: str, payload: dict, path) -> None:
    checksum = hashlib.sha256(_canonical(payload)).hexdigest()
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "checksum": checksum,
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_envelope(kind: str, path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ArtifactError(f"corrupt artifact file: {e}") from e
    if not isinstance(doc, dict) or "payload" not in doc:
        raise ArtifactError("corrupt artifact file: missing payload")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ArtifactError(
            f"unsupported artifact version {doc.get('format_version')!r}"
        )
    if doc.get("kind") != kind:
        raise ArtifactError(f"artifact holds {doc.get('kind')!r}, expected {kind!r}")
    checksum = hashlib.sha256(_canonical(doc["payload"])).hexdigest()
    if checksum != doc.get("checksum"):
        raise ArtifactError("artifact checksum mismatch")
    return doc["payload"]
