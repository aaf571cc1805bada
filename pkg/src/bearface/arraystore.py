"""Versioned text container for arrays, scalars and strings.

Models and feature caches persist through this one format: a magic first
line, then one entry per record. Numeric arrays are stored as raw
little-endian bytes in base64, so every value round-trips bit-exactly.

    bearface-store 1
    int seed 42
    float svm_c 10.0
    str classes anger surprise ...
    array mean f8 1,3776
    <one base64 line>
"""

from __future__ import annotations

import base64
from pathlib import Path
from typing import Mapping

import numpy as np

MAGIC = "bearface-store"
VERSION = "1"

_DTYPES = {"f8": "<f8", "i8": "<i8", "u1": "|u1"}


def _check_name(name: str) -> None:
    if not name or any(ch.isspace() for ch in name):
        raise ValueError(f"bad store entry name {name!r}")


def dump_store(entries: Mapping[str, object]) -> str:
    lines = [f"{MAGIC} {VERSION}"]
    for name, value in entries.items():
        _check_name(name)
        if isinstance(value, bool):
            lines.append(f"int {name} {int(value)}")
        elif isinstance(value, (int, np.integer)):
            lines.append(f"int {name} {int(value)}")
        elif isinstance(value, (float, np.floating)):
            lines.append(f"float {name} {float(value)!r}")
        elif isinstance(value, str):
            if "\n" in value:
                raise ValueError(f"string entry {name!r} contains a newline")
            lines.append(f"str {name} {value}")
        elif isinstance(value, np.ndarray):
            if value.dtype == np.float64:
                code = "f8"
            elif value.dtype == np.int64:
                code = "i8"
            elif value.dtype == np.uint8:
                code = "u1"
            else:
                raise ValueError(
                    f"array entry {name!r} has unsupported dtype {value.dtype}"
                )
            shape = ",".join(str(s) for s in value.shape) or "0"
            payload = base64.b64encode(
                np.ascontiguousarray(value).astype(_DTYPES[code]).tobytes()
            ).decode("ascii")
            lines.append(f"array {name} {code} {shape}")
            lines.append(payload)
        else:
            raise ValueError(f"entry {name!r} has unsupported type {type(value)!r}")
    return "\n".join(lines) + "\n"


def parse_store(text: str) -> dict[str, object]:
    lines = text.splitlines()
    if not lines or lines[0].split() != [MAGIC, VERSION]:
        raise ValueError(f"store must start with '{MAGIC} {VERSION}'")
    entries: dict[str, object] = {}
    index = 1
    while index < len(lines):
        line = lines[index]
        index += 1
        if not line.strip():
            continue
        kind, _, rest = line.partition(" ")
        name, _, tail = rest.partition(" ")
        if name in entries:
            raise ValueError(f"duplicate store entry {name!r}")
        if kind == "int":
            entries[name] = int(tail)
        elif kind == "float":
            entries[name] = float(tail)
        elif kind == "str":
            entries[name] = tail
        elif kind == "array":
            code, _, shape_text = tail.partition(" ")
            if code not in _DTYPES:
                raise ValueError(f"entry {name!r}: unknown dtype code {code!r}")
            shape = tuple(int(s) for s in shape_text.split(",") if s != "")
            if index >= len(lines):
                raise ValueError(f"entry {name!r}: missing payload line")
            raw = base64.b64decode(lines[index])
            index += 1
            array = np.frombuffer(raw, dtype=_DTYPES[code]).reshape(shape)
            entries[name] = array.copy()
        else:
            raise ValueError(f"unknown store entry kind {kind!r}")
    return entries


def write_store(entries: Mapping[str, object], path: "str | Path") -> None:
    Path(path).write_text(dump_store(entries), encoding="utf-8")


def read_store(path: "str | Path") -> dict[str, object]:
    return parse_store(Path(path).read_text(encoding="utf-8"))
