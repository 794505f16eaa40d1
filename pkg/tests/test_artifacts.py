import math

import numpy as np

from utils.artifacts import (
    manifest_hash,
    read_manifest,
    read_netpbm,
    render_manifest,
    write_csv,
    write_manifest,
    write_pbm,
    write_pgm,
)
from utils.fingerprint import canonical, content_hash
from utils.pool import map_chunks, split_range

SECTIONS = {
    "scenario": {"name": "shiftlike", "c": 0.5},
    "result": {"status": "PASS", "point": 1 + 2j, "flags": ["a", "b"]},
}


def _square(x):
    return x * x


def test_canonical_forms():
    assert canonical(1 + 2j) == [1.0, 2.0]
    assert canonical(np.float64(0.25)) == 0.25
    assert canonical(np.bool_(True)) is True
    assert canonical(math.inf) == "inf"
    assert canonical(np.arange(3)) == [0, 1, 2]


def test_content_hash_ignores_key_order():
    assert content_hash({"a": 1, "b": 2}) == content_hash({"b": 2, "a": 1})
    assert content_hash({"a": 1}) != content_hash({"a": 2})


def test_manifest_round_trip(tmp_path):
    path = tmp_path / "run.manifest"
    digest = write_manifest(path, SECTIONS)
    assert digest == manifest_hash(SECTIONS)
    back = read_manifest(path)
    assert back["scenario"] == {"name": "shiftlike", "c": "0.5"}
    assert back["result"]["point"] == "[1.0,2.0]"
    assert back["hash"]["manifest_sha256"] == digest
    assert render_manifest(SECTIONS).startswith("# shortck manifest\n[scenario]\n")


def test_manifest_hash_tracks_content():
    changed = {**SECTIONS, "result": {**SECTIONS["result"], "status": "FAIL"}}
    assert manifest_hash(changed) != manifest_hash(SECTIONS)


def test_pgm_header_and_pixels(tmp_path):
    pixels = np.arange(12, dtype=np.uint8).reshape(3, 4)
    path = write_pgm(tmp_path / "a.pgm", pixels, "abc123")
    assert path.read_bytes().startswith(b"P5\n# manifest-sha256 abc123\n4 3\n255\n")
    image = read_netpbm(path)
    assert np.array_equal(image["pixels"], pixels)


def test_pbm_packs_rows(tmp_path):
    bits = np.zeros((2, 10), dtype=bool)
    bits[0, 0] = bits[1, 9] = True
    path = write_pbm(tmp_path / "a.pbm", bits, "ff")
    data = path.read_bytes()
    assert data.startswith(b"P4\n# manifest-sha256 ff\n10 2\n")
    assert len(data) == len(b"P4\n# manifest-sha256 ff\n10 2\n") + 2 * 2
    assert np.array_equal(read_netpbm(path)["pixels"], bits)


def test_csv_floats_round_trip(tmp_path):
    path = write_csv(tmp_path / "t.csv", ["n", "v"], [[0, 0.1], [1, -1e-300]])
    assert path.read_text(encoding="utf-8") == "n,v\n0,0.1\n1,-1e-300\n"


def test_map_chunks_preserves_order():
    chunks = list(range(20))
    assert map_chunks(_square, chunks, threads=1) == [c * c for c in chunks]
    assert map_chunks(_square, chunks, threads=3) == [c * c for c in chunks]


def test_map_chunks_falls_back_for_closures():
    offset = 5
    assert map_chunks(lambda x: x + offset, [1, 2, 3], threads=2) == [6, 7, 8]


def test_split_range_covers_everything():
    parts = split_range(10, 3)
    assert [len(r) for r in parts] == [4, 3, 3]
    assert [i for r in parts for i in r] == list(range(10))
    assert split_range(0, 4) == [range(0, 0)]
