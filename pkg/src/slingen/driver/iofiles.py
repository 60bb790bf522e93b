"""Binary operand files shared with the measurement harness.

Layout (all integers 32-bit little-endian unless noted):
    magic   8 bytes  b"SLGNOP01"
    count   u32
    per operand: name_len u32, name bytes, rows u32, cols u32
    payloads: row-major IEEE-754 doubles, little-endian, in header order
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"SLGNOP01"


class FormatError(Exception):
    """Malformed operand file."""


def write_operands(path, operands: list[tuple[str, np.ndarray]]) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(operands)))
        for name, a in operands:
            a = np.asarray(a, dtype="<f8")
            nb = name.encode()
            f.write(struct.pack("<I", len(nb)))
            f.write(nb)
            f.write(struct.pack("<II", a.shape[0], a.shape[1]))
        for _, a in operands:
            f.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def read_operands(path) -> list[tuple[str, np.ndarray]]:
    with open(path, "rb") as f:
        data = f.read()
    if data[:8] != MAGIC:
        raise FormatError("bad magic")
    off = 8

    def u32() -> int:
        nonlocal off
        if off + 4 > len(data):
            raise FormatError("truncated header")
        val = struct.unpack_from("<I", data, off)[0]
        off += 4
        return val

    count = u32()
    heads = []
    for _ in range(count):
        nlen = u32()
        if off + nlen > len(data):
            raise FormatError("truncated name")
        name = data[off:off + nlen].decode()
        off += nlen
        rows = u32()
        cols = u32()
        heads.append((name, rows, cols))
    out = []
    for (name, rows, cols) in heads:
        nbytes = rows * cols * 8
        if off + nbytes > len(data):
            raise FormatError(f"truncated payload for {name}")
        a = np.frombuffer(data, "<f8", rows * cols, off).reshape(rows, cols)
        off += nbytes
        out.append((name, a.copy()))
    if off != len(data):
        raise FormatError("trailing bytes")
    return out
