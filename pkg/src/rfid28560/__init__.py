"""Codecs for library RFID tag memory: the fixed-length library block, the
four-field EPC code, and the hybrid layout carrying the library item
identifier inside an EPC198 serial."""

__version__ = "0.1.0"

from .bits import Bits
from .code40 import Code40Alphabet, decode_code40, encode_code40
from .epc import decode_epc, encode_epc, serial_capacity
from .fixed import FixedBlock, crc16, decode_fixed, encode_fixed
from .hybrid import (
    Gs1Context,
    TransitionParams,
    build_serial_payload,
    convert_fixed_to_hybrid,
    convert_hybrid_to_fixed,
    decode_hybrid,
    encode_hybrid,
    publisher_tag,
    transition,
)
from .model import (
    DEFAULT_CONFIG,
    Afi,
    EpcFields,
    EpcScheme,
    Isil,
    LibraryItemRecord,
    LossReport,
    PrimaryItemId,
    PublicationType,
    SetInfo,
    Stage,
    TagProfile,
    load_config,
    scheme_table,
    validate_record,
)
from .registry import load_registry, lookup_publication, reverse_lookup
from .tagmem import Bank, TagImage, load_profile, read_bank, write_bank

__all__ = [
    "Bits", "Code40Alphabet", "encode_code40", "decode_code40",
    "encode_epc", "decode_epc", "serial_capacity",
    "FixedBlock", "crc16", "encode_fixed", "decode_fixed",
    "Gs1Context", "TransitionParams", "build_serial_payload", "encode_hybrid", "decode_hybrid",
    "publisher_tag", "convert_fixed_to_hybrid", "convert_hybrid_to_fixed", "transition",
    "DEFAULT_CONFIG", "Afi", "EpcFields", "EpcScheme", "Isil", "LibraryItemRecord", "LossReport",
    "PrimaryItemId", "PublicationType", "SetInfo", "Stage", "TagProfile", "load_config",
    "scheme_table", "validate_record",
    "load_registry", "lookup_publication", "reverse_lookup",
    "Bank", "TagImage", "load_profile", "read_bank", "write_bank",
]
