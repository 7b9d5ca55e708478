"""Four-field EPC binary code: header | manager number | object class | serial."""

from __future__ import annotations

from .bits import Bits
from .errors import LengthSchemeMismatch, UnknownHeader, WidthMismatch, DecodeError
from .model import DEFAULT_CONFIG, Config, EpcFields, EpcScheme, HEADER_BITS

FIELD_ORDER = ("header", "manager_number", "object_class", "serial")


def encode_epc(fields: EpcFields) -> Bits:
    widths = fields.scheme.widths()
    parts = []
    for name in FIELD_ORDER:
        b = getattr(fields, name)
        if len(b) != widths[name]:
            raise WidthMismatch(name, widths[name], len(b))
        parts.append(b)
    code = Bits.concat(parts)
    assert len(code) == fields.scheme.total_bits
    return code


def decode_epc(bits: Bits, config: Config = DEFAULT_CONFIG) -> EpcFields:
    totals = {s.total_bits for s in config.schemes}
    if len(bits) not in totals:
        raise DecodeError(f"EPC length {len(bits)} is not one of {sorted(totals)}")
    header = bits[:HEADER_BITS].value
    scheme = config.scheme_for_header(header)
    if scheme is None:
        raise UnknownHeader(header)
    if scheme.total_bits != len(bits):
        raise LengthSchemeMismatch(header, scheme.name.value, scheme.total_bits, len(bits))
    # peel fields off the least significant end
    out = {}
    rest = bits.value
    widths = scheme.widths()
    for name in reversed(FIELD_ORDER):
        width = widths[name]
        out[name] = Bits(rest & ((1 << width) - 1), width)
        rest >>= width
    return EpcFields(scheme, **out)


def field_offsets(scheme: EpcScheme) -> list[tuple[str, int, int]]:
    """``(field, bit offset, width)`` for each field of ``scheme``."""
    out = []
    pos = 0
    for name in FIELD_ORDER:
        width = scheme.widths()[name]
        out.append((name, pos, width))
        pos += width
    return out


def serial_capacity(scheme: EpcScheme) -> int:
    return scheme.serial_bits
