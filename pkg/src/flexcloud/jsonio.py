"""Byte-deterministic JSON rendering shared by the CLI and the HTTP API.

Object keys are emitted sorted, floats via ``repr`` (shortest round-trip
form), and strings as UTF-8 without ASCII escaping, so identical logical
payloads always serialize to identical bytes. ``Raw`` wraps a
pre-formatted number (e.g. a cloud weight fixed to two decimals) that
must be emitted verbatim.
"""

from __future__ import annotations

import json
import math


class Raw:
    """A pre-formatted JSON number fragment, emitted as-is."""

    __slots__ = ("text",)

    def __init__(self, text: str):
        self.text = text


def dumps(obj) -> str:
    out: list[str] = []
    _write(obj, out)
    return "".join(out)


def _write(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, Raw):
        out.append(obj.text)
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            raise ValueError(f"cannot serialize non-finite float {obj!r}")
        out.append(repr(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _write(obj[key], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {obj!r}")
