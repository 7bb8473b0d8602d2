"""Label records and their canonical binary encoding.

Encoding: a 2-bit variant tag followed by the fields in declaration order, each
a non-negative integer x written as the Elias-gamma code of x+1.  Optional
fields store 0 for "absent" and value+1 otherwise.  A node without a label
gets the empty string.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional, Union


@dataclass(frozen=True)
class GatherSmallK:
    """Trigger on a message id.

    The node fires on the first received packet containing ``trigger_id``
    (or at clock 0 when ``trigger_id`` is its own message id, or 0), then
    transmits at ``cum + t`` and announces ``cum + T``, where ``cum`` is the
    cumulative phase time carried by the triggering packet (0 at clock 0).
    """

    trigger_id: int
    t: int
    T: int


@dataclass(frozen=True)
class GatherLargeK:
    """Like :class:`GatherSmallK` but triggered by the sender's colour.

    ``trigger_color == color`` means "start at clock 0".
    """

    trigger_color: int
    t: int
    T: int
    color: int


@dataclass(frozen=True)
class DDelta:
    s: int
    color: int
    parent_color: Optional[int]
    s_max: int
    child_count: int
    level_mod3: int


@dataclass(frozen=True)
class Broadcast:
    slot: int
    frame_len: int
    is_source: bool


Label = Union[GatherSmallK, GatherLargeK, DDelta, Broadcast]

_TAGS: dict[type, str] = {GatherSmallK: "00", GatherLargeK: "01", DDelta: "10", Broadcast: "11"}
_BY_TAG = {v: k for k, v in _TAGS.items()}
_OPTIONAL = {(DDelta, "parent_color")}


def gamma(x: int) -> str:
    """Elias-gamma code of a positive integer."""
    if x < 1:
        raise ValueError("gamma code needs x >= 1")
    b = bin(x)[2:]
    return "0" * (len(b) - 1) + b


def _ungamma(bits: str, pos: int) -> tuple[int, int]:
    zeros = 0
    while bits[pos + zeros] == "0":
        zeros += 1
    end = pos + 2 * zeros + 1
    return int(bits[pos + zeros : end], 2), end


def encode_label(label: Optional[Label]) -> str:
    if label is None:
        return ""
    out = [_TAGS[type(label)]]
    for f in fields(label):
        value = getattr(label, f.name)
        if (type(label), f.name) in _OPTIONAL:
            value = 0 if value is None else value + 1
        value = int(value)
        if value < 0:
            raise ValueError(f"negative field {f.name}={value}")
        out.append(gamma(value + 1))
    return "".join(out)


def decode_label(bits: str) -> Optional[Label]:
    if bits == "":
        return None
    cls = _BY_TAG[bits[:2]]
    pos = 2
    values = {}
    for f in fields(cls):
        raw, pos = _ungamma(bits, pos)
        value = raw - 1
        if (cls, f.name) in _OPTIONAL:
            value = None if value == 0 else value - 1
        elif f.type in ("bool", bool):
            value = bool(value)
        values[f.name] = value
    if pos != len(bits):
        raise ValueError("trailing bits after label")
    return cls(**values)


def label_bits(label: Optional[Label]) -> int:
    return len(encode_label(label))


def label_fields(label: Label) -> list[int]:
    """Integer field values as encoded (optional fields as stored)."""
    out = []
    for f in fields(label):
        v = getattr(label, f.name)
        if (type(label), f.name) in _OPTIONAL:
            v = 0 if v is None else v + 1
        out.append(int(v))
    return out


def label_to_dict(node: int, label: Optional[Label]) -> dict:
    return {
        "node": node,
        "variant": None if label is None else type(label).__name__,
        "fields": None if label is None else asdict(label),
        "bit_length": label_bits(label),
    }


def label_from_dict(d: dict) -> Optional[Label]:
    if d["variant"] is None:
        return None
    cls = {c.__name__: c for c in _TAGS}[d["variant"]]
    return cls(**d["fields"])
