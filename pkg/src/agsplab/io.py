"""Persistence plumbing: canonical config hashing, counter-based RNG
substreams, the binary vector artifact format, and CSV/JSON writers.

Binary artifact layout (all little-endian):

    8 bytes   magic "AGSPVEC1"
    uint64    number of arrays
    per array:
        uint64      ndim
        uint64[n]   shape
        float64[2k] row-major (real, imag) pairs

Records must re-serialize byte-identically for a given config and seed, so
every writer here sorts keys and keeps floats at full repr precision.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"AGSPVEC1"


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      default=_json_default)


def config_hash(config: dict) -> str:
    """Content hash of a config: sha1 of its canonical JSON bytes."""
    return hashlib.sha1(canonical_json(config).encode()).hexdigest()


def derive_rng(seed: int, config_digest: str, stream: int = 0):
    """Philox generator keyed from (seed, config hash, stream index).

    Counter-based, so sweep points get independent reproducible substreams
    regardless of evaluation order.
    """
    material = f"{seed}:{config_digest}:{stream}".encode()
    digest = hashlib.sha256(material).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2,
                               default=_json_default) + "\n")


def write_csv(path, rows, columns=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in columns})


def write_arrays(path, arrays):
    """Write arrays in the AGSPVEC1 container."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(arrays)))
        for arr in arrays:
            arr = np.asarray(arr, dtype=np.complex128)
            fh.write(struct.pack("<Q", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            interleaved = np.empty(arr.size * 2, dtype="<f8")
            flat = arr.reshape(-1)
            interleaved[0::2] = flat.real
            interleaved[1::2] = flat.imag
            fh.write(interleaved.tobytes())


def read_arrays(path):
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path} is not an AGSPVEC1 artifact")
    offset = 8
    (count,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    arrays = []
    for _ in range(count):
        (ndim,) = struct.unpack_from("<Q", raw, offset)
        offset += 8
        shape = struct.unpack_from(f"<{ndim}Q", raw, offset)
        offset += 8 * ndim
        size = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(raw, dtype="<f8", count=2 * size, offset=offset)
        offset += 16 * size
        arrays.append((data[0::2] + 1j * data[1::2]).reshape(shape))
    return arrays


def write_cut_decomposition(path, decomp):
    """Persist Schmidt values and both vector families."""
    write_arrays(path, [decomp.values.astype(np.complex128),
                        decomp.left_vectors, decomp.right_vectors])


def write_mps(path, mps_state):
    write_arrays(path, list(mps_state.tensors))
