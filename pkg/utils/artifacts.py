# utils/artifacts.py

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from utils.fingerprint import canonical, content_hash

log = logging.getLogger(__name__)

Sections = Dict[str, Dict[str, Any]]


def _fmt(value: Any) -> str:
    value = canonical(value)
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def manifest_hash(sections: Sections) -> str:
    return content_hash({name: {k: _fmt(v) for k, v in body.items()} for name, body in sections.items()})


def render_manifest(sections: Sections) -> str:
    lines: List[str] = ["# shortck manifest"]
    for name in sections:
        lines.append(f"[{name}]")
        for key, value in sections[name].items():
            lines.append(f"{key}={_fmt(value)}")
        lines.append("")
    lines.append("[hash]")
    lines.append(f"manifest_sha256={manifest_hash(sections)}")
    return "\n".join(lines) + "\n"


def write_manifest(path: Path, sections: Sections) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_manifest(sections), encoding="utf-8")
    digest = manifest_hash(sections)
    log.info("[artifacts] wrote manifest -> %s (%s)", path, digest[:12])
    return digest


def read_manifest(path: Path) -> Dict[str, Dict[str, str]]:
    """Parse a manifest back into raw string sections (hash section included)."""
    sections: Dict[str, Dict[str, str]] = {}
    current = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = sections.setdefault(line[1:-1], {})
            continue
        if "=" in line and current is not None:
            key, value = line.split("=", 1)
            current[key] = value
    return sections


def write_pgm(path: Path, pixels: np.ndarray, digest: str) -> Path:
    """Binary P5 graymap, maxval 255, top row first, one hash comment line."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    rows, cols = pixels.shape
    header = f"P5\n# manifest-sha256 {digest}\n{cols} {rows}\n255\n".encode("ascii")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + pixels.tobytes())
    return path


def write_pbm(path: Path, bits: np.ndarray, digest: str) -> Path:
    """Binary P4 bitmap (1 = set/black), top row first."""
    bits = np.asarray(bits, dtype=bool)
    rows, cols = bits.shape
    packed = np.packbits(bits.astype(np.uint8), axis=1)
    header = f"P4\n# manifest-sha256 {digest}\n{cols} {rows}\n".encode("ascii")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + packed.tobytes())
    return path


def read_netpbm(path: Path) -> Dict[str, Any]:
    """Minimal reader for the P4/P5 files written above."""
    data = Path(path).read_bytes()
    lines = data.split(b"\n")
    magic = lines[0].decode("ascii")
    comment = lines[1].decode("ascii")
    cols, rows = (int(v) for v in lines[2].split())
    if magic == "P5":
        offset = sum(len(l) + 1 for l in lines[:4])
        pixels = np.frombuffer(data[offset:], dtype=np.uint8).reshape(rows, cols)
    else:
        offset = sum(len(l) + 1 for l in lines[:3])
        packed = np.frombuffer(data[offset:], dtype=np.uint8).reshape(rows, -1)
        pixels = np.unpackbits(packed, axis=1)[:, :cols].astype(bool)
    return {"magic": magic, "comment": comment, "pixels": pixels}


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path
