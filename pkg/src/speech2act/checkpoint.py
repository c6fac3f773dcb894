"""Parameter checkpoint file format.

Binary layout (all integers little-endian):

    magic     8 bytes  b"S2APARMS"
    version   uint32   currently 1
    count     uint32   number of parameters
    per parameter:
        name_len  uint16, then UTF-8 name bytes
        ndim      uint8, then ndim x uint32 dimension sizes
        payload   prod(dims) float64 values, little-endian
"""

import struct

import numpy as np

from .errors import CorpusError

MAGIC = b"S2APARMS"
VERSION = 1


def save_parameters(path, params: dict) -> None:
    """Write a name -> ndarray mapping; insertion order is preserved."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(params)))
        for name, array in params.items():
            data = np.ascontiguousarray(array, dtype="<f8")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", data.ndim))
            fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
            fh.write(data.tobytes())


def load_parameters(path) -> dict:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC:
        raise CorpusError(f"{path}: not a parameter checkpoint (bad magic)")
    version, count = struct.unpack_from("<II", blob, 8)
    if version != VERSION:
        raise CorpusError(f"{path}: unsupported checkpoint version {version}")
    offset = 16
    params = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<B", blob, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", blob, offset)
        offset += 4 * ndim
        n = int(np.prod(shape)) if ndim else 1
        end = offset + 8 * n
        if end > len(blob):
            raise CorpusError(f"{path}: truncated payload for parameter '{name}'")
        params[name] = np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape).copy()
        offset = end
    if offset != len(blob):
        raise CorpusError(f"{path}: {len(blob) - offset} trailing bytes after last parameter")
    return params


def load_into(path, params) -> None:
    """Restore saved values into live Parameters (matched by name)."""
    saved = load_parameters(path)
    for p in params:
        if p.name not in saved:
            raise CorpusError(f"{path}: missing parameter '{p.name}'")
        value = saved[p.name]
        if value.shape != p.data.shape:
            raise CorpusError(
                f"{path}: parameter '{p.name}' has shape {value.shape}, expected {p.data.shape}"
            )
        p.data[...] = value
