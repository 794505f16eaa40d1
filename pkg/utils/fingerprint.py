from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, is_dataclass
from typing import Any

import numpy as np


def canonical(obj: Any) -> Any:
    """
    Reduce obj to JSON-safe primitives with a stable layout.
    Complex numbers become [re, im]; non-finite floats become strings.
    """
    if is_dataclass(obj) and not isinstance(obj, type):
        return canonical(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return canonical(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [canonical(float(obj.real)), canonical(float(obj.imag))]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    return obj


def content_hash(obj: Any) -> str:
    """
    Deterministic hash over a manifest or scenario description.
    - Canonical JSON serialization (sorted keys, no whitespace)
    - SHA-256 hex digest
    """
    payload = json.dumps(canonical(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
