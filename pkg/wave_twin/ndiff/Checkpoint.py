# wave_twin/ndiff/Checkpoint.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Checkpoint files.

Layout: the 4-byte magic b"WTCK", an 8-byte little-endian header length, the
UTF-8 JSON header, then every parameter array as little-endian float64 in
header order. The header lists name, shape and byte offset per array plus
whatever the caller stores (hyperparameters, step count, model config).
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np

from wave_twin.utils.TwinErrors import ConfigError

MAGIC = b"WTCK"
FORMAT_VERSION = 1


def save_checkpoint(
    path: Union[str, Path],
    params: Mapping[str, np.ndarray],
    header: Mapping[str, Any],
) -> None:
    entries = []
    offset = 0
    blobs = []
    for name in sorted(params):
        arr = np.ascontiguousarray(params[name], dtype="<f8")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    doc = dict(header)
    doc["format_version"] = FORMAT_VERSION
    doc["arrays"] = entries
    raw = json.dumps(doc, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(raw)))
        fh.write(raw)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """
    Read a checkpoint.

    Returns:
        Parameter arrays by name and the JSON header

    Raises:
        ConfigError: If the file is not a checkpoint or is truncated
    """
    data = Path(path).read_bytes()
    if data[:4] != MAGIC or len(data) < 12:
        raise ConfigError(f"{path} is not a wave-twin checkpoint")
    (length,) = struct.unpack("<Q", data[4:12])
    try:
        header = json.loads(data[12 : 12 + length].decode("utf-8"))
    except ValueError as e:
        raise ConfigError(f"corrupt checkpoint header in {path}: {e}") from e
    if header.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {header.get('format_version')}")
    body = data[12 + length :]
    params: Dict[str, np.ndarray] = {}
    for entry in header["arrays"]:
        count = int(np.prod(entry["shape"], dtype=np.int64))
        start = entry["offset"]
        if start + 8 * count > len(body):
            raise ConfigError(f"checkpoint {path} is truncated at {entry['name']}")
        arr = np.frombuffer(body, dtype="<f8", count=count, offset=start)
        params[entry["name"]] = arr.reshape(entry["shape"]).astype(np.float64)
    return params, header
