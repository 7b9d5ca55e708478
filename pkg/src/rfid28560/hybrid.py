"""Library identifiers carried inside an EPC code.

The hybrid layout keeps the tag a valid EPC198 code:

* block 01: header | manager number (publisher/provider) | object class
  (publication type) | serial, where the serial holds the Code 40 compacted
  primary item id followed by the AFI byte, zero-left-padded to 140 bits;
* block 11 (user memory): ISIL length byte, ISIL ASCII, set info (2 bytes);
* SYSTEM: a copy of the AFI, for profiles that keep the AFI there.

Conversions to and from the fixed block and lifecycle transitions return a
:class:`~rfid28560.model.LossReport` listing every field whose previous
value did not survive.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .bits import Bits
from .code40 import decode_code40, encode_code40
from .epc import decode_epc, encode_epc
from .errors import (
    BankEmpty,
    DecodeError,
    IllegalTransition,
    InvalidRecord,
    MissingParams,
    NotHybrid,
    ProfileTooSmall,
    SerialOverflow,
    UserMemoryTruncated,
    ValidationError,
    WidthMismatch,
)
from .fixed import FixedBlock, decode_fixed, encode_fixed
from .model import (
    DEFAULT_CONFIG,
    Afi,
    AfiLocation,
    Config,
    Direction,
    EpcFields,
    EpcScheme,
    Isil,
    LibraryItemRecord,
    LossReport,
    PrimaryItemId,
    PublicationType,
    SchemeName,
    SetInfo,
    Stage,
    TagProfile,
    validate_record,
)
from .registry import PublicationTypeRegistry, shipped_registries
from .tagmem import Bank, TagImage, empty_image, read_bank, write_bank

HYBRID_SCHEME = SchemeName.EPC198
AFI_BITS = 8
GROUP_BITS = 16

ALLOWED_TRANSITIONS = frozenset({
    (Stage.PUBLISHER_TAGGED, Stage.LIBRARY_ACCESSIONED),
    (Stage.LIBRARY_ACCESSIONED, Stage.EXTERNAL_TRANSIT),
    (Stage.EXTERNAL_TRANSIT, Stage.LIBRARY_ACCESSIONED),
})

# Order in which fields appear in views and loss reports.
VIEW_FIELDS = ("manager_number", "object_class", "serial", "primary_id", "isil", "set_info", "afi")


@dataclass(frozen=True)
class Gs1Context:
    """EPC fields reused for cataloging: the publisher/provider manager
    number and the object class, given either as a publication type or as
    raw bits."""

    manager_number: Bits
    object_class_source: PublicationType | Bits

    def object_class_bits(self, scheme: EpcScheme) -> Bits:
        src = self.object_class_source
        if isinstance(src, PublicationType):
            if src.numeric_id >> scheme.class_bits:
                raise WidthMismatch("object_class", scheme.class_bits, src.numeric_id.bit_length())
            return Bits(src.numeric_id, scheme.class_bits)
        if len(src) != scheme.class_bits:
            raise WidthMismatch("object_class", scheme.class_bits, len(src))
        return src

    def check(self, scheme: EpcScheme) -> None:
        if len(self.manager_number) != scheme.manager_bits:
            raise WidthMismatch("manager_number", scheme.manager_bits, len(self.manager_number))
        self.object_class_bits(scheme)


# -- serial payload -------------------------------------------------------------

def build_serial_payload(primary_id: PrimaryItemId | str, afi: Afi | int,
                         config: Config = DEFAULT_CONFIG,
                         scheme: EpcScheme | None = None) -> Bits:
    """Code 40 bytes of the primary id followed by the AFI byte."""
    scheme = scheme or config.scheme(HYBRID_SCHEME)
    pid = primary_id.value if isinstance(primary_id, PrimaryItemId) else str(primary_id)
    afi_value = afi.value if isinstance(afi, Afi) else afi
    payload = Bits.from_bytes(encode_code40(pid, config.alphabet)) + Bits(afi_value, AFI_BITS)
    if len(payload) > scheme.serial_bits:
        raise SerialOverflow(
            f"serial payload of {len(payload)} bits exceeds {scheme.name.value} serial width {scheme.serial_bits}"
        )
    return payload


def pad_serial(payload: Bits, serial_bits: int) -> Bits:
    if len(payload) > serial_bits:
        raise SerialOverflow(f"serial payload of {len(payload)} bits exceeds {serial_bits}")
    return Bits(payload.value, serial_bits)


def split_serial(serial: Bits) -> tuple[Bits, Bits, Bits]:
    """Split a padded serial into (zero padding, Code 40 groups, AFI).

    Groups are right-aligned against the AFI byte; the Code 40 part starts at
    the first nonzero 16-bit group, which is unambiguous because a zero group
    is never a valid encoding.
    """
    if len(serial) < AFI_BITS + GROUP_BITS:
        raise NotHybrid(f"serial of {len(serial)} bits is too short for a library payload")
    body = serial[:len(serial) - AFI_BITS]
    afi = serial[len(serial) - AFI_BITS:]
    used = -(-body.value.bit_length() // GROUP_BITS) * GROUP_BITS
    if used == 0:
        raise NotHybrid("serial holds no Code 40 groups")
    if used > len(body):
        raise NotHybrid("nonzero bits in serial padding")
    start = len(body) - used
    return body[:start], body[start:], afi


def parse_serial_payload(serial: Bits, config: Config = DEFAULT_CONFIG) -> tuple[PrimaryItemId, Afi]:
    pad, groups, afi = split_serial(serial)
    try:
        text = decode_code40(groups.to_bytes(), config.alphabet)
    except DecodeError as exc:
        exc.args = (f"bank 01, serial bit offset {len(pad)}: {exc}",)
        raise
    return PrimaryItemId(text), Afi(afi.value)


# -- user memory ------------------------------------------------------------------

def build_user_memory(isil: Isil, set_info: SetInfo) -> Bits:
    raw = isil.value.encode("ascii")
    return Bits.from_bytes(bytes([len(raw)]) + raw + set_info.to_bytes())


def parse_user_memory(bits: Bits) -> tuple[Isil, SetInfo]:
    if len(bits) % 8:
        raise UserMemoryTruncated(f"user memory holds {len(bits)} bits, not whole bytes")
    data = bits.to_bytes()
    if not data:
        raise UserMemoryTruncated("user memory is empty")
    n = data[0]
    if len(data) < 1 + n:
        raise UserMemoryTruncated(f"ISIL length prefix {n} exceeds remaining {len(data) - 1} bytes")
    if len(data) < 1 + n + 2:
        raise UserMemoryTruncated("set information missing after ISIL")
    try:
        isil = data[1:1 + n].decode("ascii")
    except UnicodeDecodeError:
        raise DecodeError("user memory ISIL is not ASCII") from None
    return Isil(isil), SetInfo.from_bytes(data[1 + n:3 + n])


# -- encode / decode --------------------------------------------------------------

def _class_conflict(record: LibraryItemRecord, ctx: Gs1Context, scheme: EpcScheme) -> bool:
    if record.publication_type is None:
        return False
    return record.publication_type.numeric_id != ctx.object_class_bits(scheme).value


def encode_hybrid(record: LibraryItemRecord, ctx: Gs1Context, profile: TagProfile,
                  config: Config = DEFAULT_CONFIG) -> TagImage:
    scheme = config.scheme(HYBRID_SCHEME)
    violations = validate_record(record, alphabet=config.alphabet, class_bits=scheme.class_bits)
    if violations:
        raise InvalidRecord(violations)
    ctx.check(scheme)
    if _class_conflict(record, ctx, scheme):
        raise ValidationError("record publication_type disagrees with the context object class")

    if scheme.total_bits > profile.epc_block_bits:
        raise ProfileTooSmall(Bank.BLOCK_01_EPC.value, scheme.total_bits, profile.epc_block_bits)
    user = build_user_memory(record.isil, record.set_info)
    if len(user) > profile.user_memory_bits:
        raise ProfileTooSmall(Bank.BLOCK_11_USER.value, len(user), profile.user_memory_bits)
    mirror = profile.afi_location is AfiLocation.SYSTEM_AREA
    if mirror and profile.system_bits < AFI_BITS:
        raise ProfileTooSmall(Bank.SYSTEM.value, AFI_BITS, profile.system_bits)

    payload = build_serial_payload(record.primary_id, record.afi, config, scheme)
    fields = EpcFields(
        scheme,
        Bits(scheme.header, scheme.header_bits),
        ctx.manager_number,
        ctx.object_class_bits(scheme),
        pad_serial(payload, scheme.serial_bits),
    )
    tag = empty_image(profile, Stage.LIBRARY_ACCESSIONED)
    tag = write_bank(tag, Bank.BLOCK_01_EPC, encode_epc(fields))
    tag = write_bank(tag, Bank.BLOCK_11_USER, user)
    if mirror:
        tag = write_bank(tag, Bank.SYSTEM, Bits(record.afi.value, AFI_BITS))
    return tag


def _publication_from_class(object_class: Bits, registry: PublicationTypeRegistry | None):
    if registry is not None:
        key = registry.reverse.get(object_class.value)
        if key is not None and not object_class.value >> registry.class_bits:
            return PublicationType(key[0], key[1], object_class.value)
    return None


def decode_hybrid(tag: TagImage, registry: PublicationTypeRegistry | None = None,
                  config: Config = DEFAULT_CONFIG) -> tuple[LibraryItemRecord, Gs1Context]:
    """Recover the record and context from a hybrid tag.

    Object classes found in ``registry`` (default: the shipped sample) come
    back as publication types; any other class is returned as raw bits.
    """
    if registry is None:
        registry = shipped_registries().publications
    fields = decode_epc(read_bank(tag, Bank.BLOCK_01_EPC), config)
    primary_id, afi = parse_serial_payload(fields.serial, config)
    try:
        user = read_bank(tag, Bank.BLOCK_11_USER)
    except BankEmpty:
        raise UserMemoryTruncated("user memory (bank 11) is empty") from None
    isil, set_info = parse_user_memory(user)
    pub = _publication_from_class(fields.object_class, registry)
    record = LibraryItemRecord(primary_id, isil, set_info, pub, afi)
    ctx = Gs1Context(fields.manager_number, pub if pub is not None else fields.object_class)
    return record, ctx


def publisher_tag(fields: EpcFields, profile: TagProfile, config: Config = DEFAULT_CONFIG,
                  afi: int | None = None, stage: Stage = Stage.PUBLISHER_TAGGED) -> TagImage:
    """A plain EPC tag as written at the start of the supply chain."""
    if afi is None:
        afi = config.stage_afi[stage]
    code = encode_epc(fields)
    if len(code) > profile.epc_block_bits:
        raise ProfileTooSmall(Bank.BLOCK_01_EPC.value, len(code), profile.epc_block_bits)
    tag = write_bank(empty_image(profile, stage), Bank.BLOCK_01_EPC, code)
    if profile.system_bits >= AFI_BITS:
        tag = write_bank(tag, Bank.SYSTEM, Bits(afi, AFI_BITS))
    return tag


# -- field views and loss accounting ------------------------------------------------

def infer_stage(tag: TagImage) -> Stage:
    if tag.stage is not None:
        return tag.stage
    return Stage.LIBRARY_ACCESSIONED if Bank.BLOCK_11_USER in tag.banks else Stage.PUBLISHER_TAGGED


def is_library_tag(tag: TagImage) -> bool:
    return infer_stage(tag) is Stage.LIBRARY_ACCESSIONED


def _record_view(record: LibraryItemRecord) -> dict[str, str]:
    return {
        "primary_id": record.primary_id.value,
        "isil": record.isil.value,
        "set_info": f"{record.set_info.parts_in_item}/{record.set_info.part_number}",
        "afi": str(record.afi),
    }


def field_view(obj, config: Config = DEFAULT_CONFIG) -> dict[str, str]:
    """Flat ``field -> rendered value`` view of a tag image or fixed block.

    A library tag exposes its UII components; a plain EPC tag exposes its
    serial instead.  Fields a representation cannot hold are absent.
    """
    if isinstance(obj, FixedBlock):
        return _record_view(decode_fixed(obj, config))
    fields = decode_epc(read_bank(obj, Bank.BLOCK_01_EPC), config)
    view = {
        "manager_number": fields.manager_number.to_hex(),
        "object_class": fields.object_class.to_hex(),
    }
    if is_library_tag(obj):
        record, _ = decode_hybrid(obj, None, config)
        view.update(_record_view(record))
    else:
        view["serial"] = fields.serial.to_hex()
        if obj.afi_mirror is not None:
            view["afi"] = str(obj.afi_mirror)
    return {k: view[k] for k in VIEW_FIELDS if k in view}


def loss_between(before: dict[str, str], after: dict[str, str], direction: Direction) -> LossReport:
    lost = tuple((k, v) for k, v in before.items() if after.get(k) != v)
    return LossReport(Direction(direction), lost)


# -- conversions --------------------------------------------------------------------

def convert_fixed_to_hybrid(block: FixedBlock | bytes, ctx: Gs1Context, profile: TagProfile,
                            config: Config = DEFAULT_CONFIG) -> tuple[TagImage, LossReport]:
    if not isinstance(block, FixedBlock):
        block = FixedBlock(block)
    record = decode_fixed(block, config)
    tag = encode_hybrid(record, ctx, profile, config)
    return tag, loss_between(field_view(block, config), field_view(tag, config), Direction.TO_EPC_VIEW)


def convert_hybrid_to_fixed(tag: TagImage, config: Config = DEFAULT_CONFIG) -> tuple[FixedBlock, LossReport]:
    record, _ = decode_hybrid(tag, None, config)
    # The fixed block has no publication type slot; its loss is the object class.
    block = encode_fixed(replace(record, publication_type=None), config)
    return block, loss_between(field_view(tag, config), field_view(block, config), Direction.TO_LIBRARY_VIEW)


# -- lifecycle ------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionParams:
    """Inputs for :func:`transition`.

    Accession needs ``record``; ``object_class`` overrides the class taken
    from the record's publication type, and ``minimal`` keeps the existing
    object class so that only the serial is rewritten.  External transit
    needs either a complete ``epc`` or a ``serial``; ``manager_number``,
    ``object_class`` and ``scheme`` then override what the tag carries.
    """

    record: LibraryItemRecord | None = None
    object_class: PublicationType | Bits | None = None
    minimal: bool = False
    epc: EpcFields | None = None
    serial: Bits | int | None = None
    manager_number: Bits | None = None
    scheme: SchemeName | None = None


def _rewidth(bits: Bits, width: int, name: str) -> Bits:
    if len(bits) == width:
        return bits
    if bits.value >> width:
        raise WidthMismatch(name, width, bits.value.bit_length())
    return Bits(bits.value, width)


def _to_library(tag: TagImage, params: TransitionParams, config: Config) -> TagImage:
    if params.record is None:
        raise MissingParams("accession needs a library record")
    scheme = config.scheme(HYBRID_SCHEME)
    current = decode_epc(read_bank(tag, Bank.BLOCK_01_EPC), config)
    manager = _rewidth(current.manager_number, scheme.manager_bits, "manager_number")
    record = replace(params.record, afi=Afi(config.stage_afi[Stage.LIBRARY_ACCESSIONED]))
    if params.minimal:
        source = _rewidth(current.object_class, scheme.class_bits, "object_class")
        record = replace(record, publication_type=None)
    elif params.object_class is not None:
        source = params.object_class
        if isinstance(source, PublicationType):
            record = replace(record, publication_type=source)
        else:
            record = replace(record, publication_type=None)
    elif record.publication_type is not None:
        source = record.publication_type
    else:
        source = _rewidth(current.object_class, scheme.class_bits, "object_class")
    return encode_hybrid(record, Gs1Context(manager, source), tag.profile, config)


def _to_transit(tag: TagImage, params: TransitionParams, config: Config) -> TagImage:
    current = decode_epc(read_bank(tag, Bank.BLOCK_01_EPC), config)
    if params.epc is not None:
        fields = params.epc
    else:
        if params.serial is None:
            raise MissingParams("external transit needs an EPC serial (original or freshly assigned)")
        scheme = config.scheme(params.scheme) if params.scheme else current.scheme
        manager = params.manager_number if params.manager_number is not None else current.manager_number
        if params.object_class is None:
            cls_bits = current.object_class
        elif isinstance(params.object_class, PublicationType):
            cls_bits = Bits(params.object_class.numeric_id, scheme.class_bits)
        else:
            cls_bits = params.object_class
        serial = params.serial if isinstance(params.serial, Bits) else Bits(params.serial, scheme.serial_bits)
        fields = EpcFields.build(
            scheme,
            _rewidth(manager, scheme.manager_bits, "manager_number"),
            _rewidth(cls_bits, scheme.class_bits, "object_class"),
            _rewidth(serial, scheme.serial_bits, "serial"),
        )
    return publisher_tag(fields, tag.profile, config, stage=Stage.EXTERNAL_TRANSIT)


def transition(tag: TagImage, to: Stage | str, params: TransitionParams | None = None,
               config: Config = DEFAULT_CONFIG) -> tuple[TagImage, LossReport]:
    """Rerecord ``tag`` for lifecycle stage ``to``.

    Permitted edges: PUBLISHER_TAGGED -> LIBRARY_ACCESSIONED and
    LIBRARY_ACCESSIONED <-> EXTERNAL_TRANSIT.  The AFI is set to the target
    stage's configured value.  Leaving the library erases user memory, so the
    report then lists every library field.
    """
    to = Stage(to)
    params = params or TransitionParams()
    src = infer_stage(tag)
    if (src, to) not in ALLOWED_TRANSITIONS:
        raise IllegalTransition(f"no transition from {src.value} to {to.value}")
    before = field_view(tag, config)
    if to is Stage.LIBRARY_ACCESSIONED:
        out = _to_library(tag, params, config)
        direction = Direction.TO_LIBRARY_VIEW
    else:
        out = _to_transit(tag, params, config)
        direction = Direction.TO_EPC_VIEW
    return out, loss_between(before, field_view(out, config), direction)


__all__ = [
    "Gs1Context", "TransitionParams", "build_serial_payload", "split_serial", "parse_serial_payload",
    "encode_hybrid", "decode_hybrid", "publisher_tag", "convert_fixed_to_hybrid",
    "convert_hybrid_to_fixed", "transition", "field_view", "loss_between", "infer_stage",
]
