"""Fixed-length 32-byte library block.

Layout (byte offsets, on-tag order)::

    0       version/usage byte (0x11: layout 1, circulating item)
    1-2     set info: parts_in_item, part_number
    3-18    primary item id, ASCII, 0x00-padded
    19-20   CRC-16/CCITT-FALSE over bytes 0-18 and 21-31, big-endian
    21-31   ISIL, ASCII, 0x00-padded

The block has no room for the AFI or a publication type; decoding returns
the configured default AFI and no publication type.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    CrcMismatch,
    InvalidRecord,
    LayoutVersionError,
    PadViolation,
    WrongLength,
)
from .model import (
    DEFAULT_CONFIG,
    Afi,
    Config,
    Isil,
    LibraryItemRecord,
    PrimaryItemId,
    SetInfo,
    validate_record,
)

BLOCK_BYTES = 32
VERSION_BYTE = 0x11
PAD_BYTE = 0x00

# (start, stop) slices
VERSION = (0, 1)
SET_INFO = (1, 3)
PRIMARY_ID = (3, 19)
CRC = (19, 21)
ISIL = (21, 32)


def _make_crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) if crc & 0x8000 else (crc << 1)
        table.append(crc & 0xFFFF)
    return tuple(table)


_CRC_TABLE = _make_crc_table()


def crc16(data: bytes, crc: int = 0xFFFF) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, unreflected, no final xor."""
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ b]
    return crc


def _protected(raw: bytes) -> bytes:
    return raw[:CRC[0]] + raw[CRC[1]:]


@dataclass(frozen=True)
class FixedBlock:
    raw: bytes

    def __post_init__(self):
        if len(self.raw) != BLOCK_BYTES:
            raise WrongLength(f"fixed block must be {BLOCK_BYTES} bytes, got {len(self.raw)}")
        object.__setattr__(self, "raw", bytes(self.raw))

    @classmethod
    def from_hex(cls, text: str) -> FixedBlock:
        text = text.strip()
        try:
            raw = bytes.fromhex(text)
        except ValueError:
            raise WrongLength(f"fixed block is not a hex string: {text[:70]!r}") from None
        return cls(raw)

    def to_hex(self) -> str:
        return self.raw.hex()

    @property
    def stored_crc(self) -> int:
        return int.from_bytes(self.raw[CRC[0]:CRC[1]], "big")

    @property
    def computed_crc(self) -> int:
        return crc16(_protected(self.raw))


def _pad_field(text: str, width: int) -> bytes:
    return text.encode("ascii").ljust(width, bytes([PAD_BYTE]))


def _strip_field(data: bytes, name: str) -> str:
    content = data.rstrip(bytes([PAD_BYTE]))
    if PAD_BYTE in content:
        raise PadViolation(f"{name}: pad byte inside field content")
    if not content:
        raise PadViolation(f"{name}: field is empty")
    try:
        return content.decode("ascii")
    except UnicodeDecodeError:
        raise PadViolation(f"{name}: non-ASCII byte in text field") from None


def encode_fixed(record: LibraryItemRecord, config: Config = DEFAULT_CONFIG) -> FixedBlock:
    violations = validate_record(record, alphabet=config.alphabet,
                                 class_bits=config.scheme("EPC198").class_bits)
    if violations:
        raise InvalidRecord(violations)
    raw = bytearray(BLOCK_BYTES)
    raw[VERSION[0]] = VERSION_BYTE
    raw[SET_INFO[0]:SET_INFO[1]] = record.set_info.to_bytes()
    raw[PRIMARY_ID[0]:PRIMARY_ID[1]] = _pad_field(record.primary_id.value, PRIMARY_ID[1] - PRIMARY_ID[0])
    raw[ISIL[0]:ISIL[1]] = _pad_field(record.isil.value, ISIL[1] - ISIL[0])
    raw[CRC[0]:CRC[1]] = crc16(_protected(bytes(raw))).to_bytes(2, "big")
    return FixedBlock(bytes(raw))


def decode_fixed(block: FixedBlock | bytes, config: Config = DEFAULT_CONFIG) -> LibraryItemRecord:
    if not isinstance(block, FixedBlock):
        block = FixedBlock(block)
    raw = block.raw
    stored, computed = block.stored_crc, block.computed_crc
    if stored != computed:
        raise CrcMismatch(stored, computed)
    if raw[VERSION[0]] != VERSION_BYTE:
        raise LayoutVersionError(f"unsupported layout/usage byte {raw[0]:#04x}")
    return LibraryItemRecord(
        primary_id=PrimaryItemId(_strip_field(raw[PRIMARY_ID[0]:PRIMARY_ID[1]], "primary_id")),
        isil=Isil(_strip_field(raw[ISIL[0]:ISIL[1]], "isil")),
        set_info=SetInfo.from_bytes(raw[SET_INFO[0]:SET_INFO[1]]),
        publication_type=None,
        afi=Afi(config.fixed_default_afi),
    )
