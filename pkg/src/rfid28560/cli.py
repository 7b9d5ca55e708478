"""Command-line front end.

stdout carries only the machine-readable result (hex block, tag dump or
JSON document); diagnostics, loss reports and AFI changes go to stderr.
Exit codes: 0 ok, 2 validation/usage, 3 decode/integrity, 4 lifecycle,
5 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema

from . import __version__
from .bits import Bits
from .errors import DecodeError, InvalidRecord, RfidError, UsageError, ValidationError
from .epc import decode_epc, field_offsets
from .fixed import CRC, ISIL, PRIMARY_ID, SET_INFO, VERSION, FixedBlock, decode_fixed, encode_fixed
from .hybrid import (
    AFI_BITS,
    Gs1Context,
    TransitionParams,
    convert_fixed_to_hybrid,
    convert_hybrid_to_fixed,
    decode_hybrid,
    encode_hybrid,
    infer_stage,
    is_library_tag,
    split_serial,
    transition,
)
from .model import (
    DEFAULT_CONFIG,
    Afi,
    Config,
    Isil,
    LibraryItemRecord,
    LossReport,
    PrimaryItemId,
    PublicationType,
    SetInfo,
    Stage,
    load_config,
)
from .registry import NotRegistered, Registries, load_registry_dir, lookup_publication
from .tagmem import Bank, TagImage, bank_capacity, dump_image, load_profile, parse_dump
from .code40 import decode_code40

EXIT_OK, EXIT_VALIDATION, EXIT_DECODE, EXIT_LIFECYCLE, EXIT_IO = 0, 2, 3, 4, 5
SCHEMA_VERSION = 1
DEFAULT_PROFILE = "ICODE_ILT"

_BITS = {"type": "string", "pattern": r"^\d+:[0-9a-fA-F]*$"}
_PUBLICATION = {
    "type": "object",
    "properties": {
        "system": {"enum": ["UNIMARC", "ONIX"]},
        "code": {"type": "string", "minLength": 1},
        "numeric_id": {"type": "integer", "minimum": 0},
    },
    "required": ["system", "code"],
    "additionalProperties": False,
}
_OBJECT_CLASS = {
    "oneOf": [
        _PUBLICATION,
        {"type": "object", "properties": {"raw": _BITS}, "required": ["raw"], "additionalProperties": False},
    ]
}
RECORD_SCHEMA = {
    "type": "object",
    "properties": {
        "primary_id": {"type": "string"},
        "isil": {"type": "string"},
        "set_info": {
            "type": "object",
            "properties": {
                "parts_in_item": {"type": "integer"},
                "part_number": {"type": "integer"},
            },
            "required": ["parts_in_item", "part_number"],
            "additionalProperties": False,
        },
        "afi": {"type": "integer"},
        "publication_type": {"oneOf": [{"type": "null"}, _PUBLICATION]},
    },
    "required": ["primary_id", "isil", "set_info"],
    "additionalProperties": False,
}
CONTEXT_SCHEMA = {
    "type": "object",
    "properties": {"manager_number": _BITS, "object_class": _OBJECT_CLASS},
    "required": ["manager_number", "object_class"],
    "additionalProperties": False,
}
DOCUMENT_SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "record": RECORD_SCHEMA,
        "context": {"oneOf": [{"type": "null"}, CONTEXT_SCHEMA]},
        "profile": {"type": ["string", "null"]},
    },
    "required": ["schema", "record"],
    "additionalProperties": False,
}
PARAMS_SCHEMA = {
    "type": "object",
    "properties": {
        "record": RECORD_SCHEMA,
        "object_class": _OBJECT_CLASS,
        "minimal": {"type": "boolean"},
        "serial": {"oneOf": [_BITS, {"type": "integer", "minimum": 0}]},
        "manager_number": _BITS,
        "scheme": {"enum": ["EPC64", "EPC96", "EPC198"]},
    },
    "additionalProperties": False,
}


# -- document <-> values ------------------------------------------------------------

def _check(instance, schema, what: str):
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"{what} failed schema validation at {path}: {exc.message}") from None


def _bits(text: str) -> Bits:
    try:
        return Bits.from_hex(text)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _publication(obj: dict, registries: Registries) -> PublicationType:
    if "numeric_id" in obj:
        return PublicationType(obj["system"], obj["code"], obj["numeric_id"])
    try:
        num = lookup_publication(registries.publications, obj["system"], obj["code"])
    except NotRegistered as exc:
        raise ValidationError(str(exc)) from None
    return PublicationType(obj["system"], obj["code"], num)


def _object_class(obj: dict, registries: Registries) -> PublicationType | Bits:
    return _bits(obj["raw"]) if "raw" in obj else _publication(obj, registries)


def record_from_json(obj: dict, registries: Registries, config: Config) -> LibraryItemRecord:
    pub = obj.get("publication_type")
    return LibraryItemRecord(
        PrimaryItemId(obj["primary_id"]),
        Isil(obj["isil"]),
        SetInfo(obj["set_info"]["parts_in_item"], obj["set_info"]["part_number"]),
        _publication(pub, registries) if pub else None,
        Afi(obj.get("afi", config.fixed_default_afi)),
    )


def context_from_json(obj: dict, registries: Registries) -> Gs1Context:
    return Gs1Context(_bits(obj["manager_number"]), _object_class(obj["object_class"], registries))


def _publication_json(pub: PublicationType) -> dict:
    return {"system": pub.system.value, "code": pub.code, "numeric_id": pub.numeric_id}


def record_to_json(record: LibraryItemRecord) -> dict:
    return {
        "primary_id": record.primary_id.value,
        "isil": record.isil.value,
        "set_info": {
            "parts_in_item": record.set_info.parts_in_item,
            "part_number": record.set_info.part_number,
        },
        "afi": record.afi.value,
        "publication_type": _publication_json(record.publication_type) if record.publication_type else None,
    }


def context_to_json(ctx: Gs1Context) -> dict:
    src = ctx.object_class_source
    return {
        "manager_number": ctx.manager_number.to_hex(),
        "object_class": _publication_json(src) if isinstance(src, PublicationType) else {"raw": src.to_hex()},
    }


def document(record: LibraryItemRecord, ctx: Gs1Context | None = None, profile: str | None = None) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "record": record_to_json(record),
        "context": context_to_json(ctx) if ctx is not None else None,
        "profile": profile,
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# -- I/O helpers ---------------------------------------------------------------------

def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _read_json(path: str, what: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _looks_fixed(text: str) -> bool:
    s = text.strip()
    return len(s) == 64 and all(c in "0123456789abcdefABCDEF" for c in s)


def _read_fixed(path: str) -> FixedBlock:
    return FixedBlock.from_hex(_read_text(path))


def _report_loss(report: LossReport, loss_path: str | None):
    print(f"loss report ({report.direction.value}): "
          f"{'none' if report.is_lossless else ', '.join(sorted(report.fields))}", file=sys.stderr)
    sys.stderr.write(report.to_text())
    if loss_path:
        Path(loss_path).write_text(dumps(report.to_dict()), encoding="utf-8")


# -- commands --------------------------------------------------------------------------

def cmd_encode(args, config: Config, registries: Registries) -> int:
    doc = _read_json(args.input, "record document")
    _check(doc, DOCUMENT_SCHEMA, "record document")
    record = record_from_json(doc["record"], registries, config)
    if args.model == "fixed":
        sys.stdout.write(encode_fixed(record, config).to_hex() + "\n")
        return EXIT_OK
    if not doc.get("context"):
        raise UsageError("hybrid encoding needs a \"context\" object in the record document")
    ctx = context_from_json(doc["context"], registries)
    profile = load_profile(args.profile or doc.get("profile") or DEFAULT_PROFILE, config)
    sys.stdout.write(dump_image(encode_hybrid(record, ctx, profile, config)))
    return EXIT_OK


def cmd_decode(args, config: Config, registries: Registries) -> int:
    text = _read_text(args.input)
    if args.model == "fixed":
        record = decode_fixed(FixedBlock.from_hex(text), config)
        sys.stdout.write(dumps(document(record)))
    else:
        tag = parse_dump(text, config)
        record, ctx = decode_hybrid(tag, registries.publications, config)
        sys.stdout.write(dumps(document(record, ctx, tag.profile.name)))
    return EXIT_OK


def _context_arg(path: str, registries: Registries) -> Gs1Context:
    obj = _read_json(path, "context")
    if isinstance(obj, dict) and "schema" in obj:
        _check(obj, DOCUMENT_SCHEMA, "record document")
        obj = obj.get("context")
        if obj is None:
            raise UsageError(f"{path}: document has no context")
    _check(obj, CONTEXT_SCHEMA, "context")
    return context_from_json(obj, registries)


def cmd_convert(args, config: Config, registries: Registries) -> int:
    if args.src == args.dst:
        raise UsageError(f"--from and --to are both {args.src}; nothing to convert")
    if args.src == "fixed":
        if not args.context:
            raise UsageError("fixed -> hybrid needs --context FILE with the manager number and object class")
        ctx = _context_arg(args.context, registries)
        profile = load_profile(args.profile or DEFAULT_PROFILE, config)
        tag, report = convert_fixed_to_hybrid(_read_fixed(args.input), ctx, profile, config)
        sys.stdout.write(dump_image(tag))
    else:
        tag = parse_dump(_read_text(args.input), config)
        block, report = convert_hybrid_to_fixed(tag, config)
        sys.stdout.write(block.to_hex() + "\n")
    _report_loss(report, args.loss)
    return EXIT_OK


def _row(name: str, offset: int, bits: Bits, value: str = "") -> str:
    return f"  {name:<16}{offset:>6}{len(bits):>6}  {bits.to_hex():<42}  {value}".rstrip()


_ROW_HEADER = f"  {'field':<16}{'offset':>6}{'width':>6}  {'raw':<42}  value"


def _inspect_fixed(block: FixedBlock) -> list[str]:
    raw = block.raw
    bits = Bits.from_bytes(raw)

    def sl(span):
        return bits[8 * span[0]:8 * span[1]]

    def text(span):
        return repr(raw[span[0]:span[1]].rstrip(b"\0").decode("ascii", "replace"))

    stored, computed = block.stored_crc, block.computed_crc
    out = [
        "fixed block, 32 bytes",
        _ROW_HEADER,
        _row("version", 8 * VERSION[0], sl(VERSION), f"layout {raw[0] >> 4}, usage {raw[0] & 0xF}"),
        _row("set_info", 8 * SET_INFO[0], sl(SET_INFO), f"parts_in_item={raw[1]} part_number={raw[2]}"),
        _row("primary_id", 8 * PRIMARY_ID[0], sl(PRIMARY_ID), text(PRIMARY_ID)),
        _row("crc", 8 * CRC[0], sl(CRC),
             f"stored=0x{stored:04x} computed=0x{computed:04x} {'ok' if stored == computed else 'MISMATCH'}"),
        _row("isil", 8 * ISIL[0], sl(ISIL), text(ISIL)),
    ]
    return out


def _inspect_tag(tag: TagImage, config: Config, registries: Registries) -> list[str]:
    p = tag.profile
    out = [
        f"profile {p.name} band={p.band.value} epc_block_bits={p.epc_block_bits} "
        f"user_memory_bits={p.user_memory_bits} afi_location={p.afi_location.value}",
        f"stage {infer_stage(tag).value}" + ("" if tag.stage else " (inferred)"),
    ]
    library = is_library_tag(tag)
    for bank, bits in tag.banks.items():
        out.append(f"bank {bank.value} len {len(bits)} of {bank_capacity(p, bank)}")
        out.append(_ROW_HEADER)
        if bank is Bank.BLOCK_01_EPC:
            fields = decode_epc(bits, config)
            offsets = field_offsets(fields.scheme)
            assert offsets[-1][1] + offsets[-1][2] == fields.scheme.total_bits == len(bits)
            for name, off, width in offsets:
                value = getattr(fields, name)
                if name == "header":
                    desc = fields.scheme.name.value
                elif name == "manager_number":
                    desc = registries.managers.entries.get(value, "unregistered")
                elif name == "object_class":
                    key = registries.publications.reverse.get(value.value)
                    desc = f"{key[0].value}:{key[1]}" if key else "unregistered"
                else:
                    desc = "library payload" if library else "opaque serial"
                out.append(_row(name, off, value, desc))
            if library:
                pad, groups, afi = split_serial(fields.serial)
                base = offsets[-1][1]
                out.append(f"  serial payload: pad[{len(pad)}] ‖ code40[{len(groups)}] ‖ afi[{len(afi)}]")
                out.append(_row("  pad", base, pad))
                out.append(_row("  code40", base + len(pad), groups,
                                repr(decode_code40(groups.to_bytes(), config.alphabet))))
                out.append(_row("  afi", base + len(pad) + len(groups), afi, str(Afi(afi.value))))
        elif bank is Bank.BLOCK_11_USER:
            data = bits.to_bytes()
            n = data[0] if data else 0
            parts = [("isil_length", 0, bits[0:8], str(n)),
                     ("isil", 8, bits[8:8 + 8 * n], repr(data[1:1 + n].decode("ascii", "replace"))),
                     ("set_info", 8 + 8 * n, bits[8 + 8 * n:24 + 8 * n],
                      f"parts_in_item={data[1 + n]} part_number={data[2 + n]}" if len(data) >= n + 3 else "truncated")]
            for name, off, b, desc in parts:
                out.append(_row(name, off, b, desc))
            if len(bits) > 24 + 8 * n:
                out.append(_row("unused", 24 + 8 * n, bits[24 + 8 * n:]))
        else:
            out.append(_row("afi", 0, bits[0:AFI_BITS], str(Afi(bits[0:AFI_BITS].value))))
    return out


def cmd_inspect(args, config: Config, registries: Registries) -> int:
    text = _read_text(args.input)
    if not text.strip():
        raise DecodeError(f"{args.input}: empty input")
    if _looks_fixed(text):
        lines = _inspect_fixed(FixedBlock.from_hex(text))
    else:
        lines = _inspect_tag(parse_dump(text, config), config, registries)
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def params_from_json(obj: dict, registries: Registries, config: Config) -> TransitionParams:
    _check(obj, PARAMS_SCHEMA, "lifecycle params")
    serial = obj.get("serial")
    return TransitionParams(
        record=record_from_json(obj["record"], registries, config) if "record" in obj else None,
        object_class=_object_class(obj["object_class"], registries) if "object_class" in obj else None,
        minimal=obj.get("minimal", False),
        serial=_bits(serial) if isinstance(serial, str) else serial,
        manager_number=_bits(obj["manager_number"]) if "manager_number" in obj else None,
        scheme=obj.get("scheme"),
    )


def cmd_lifecycle(args, config: Config, registries: Registries) -> int:
    tag = parse_dump(_read_text(args.input), config)
    params = params_from_json(_read_json(args.params, "lifecycle params"), registries, config) \
        if args.params else TransitionParams()
    before = _afi_of(tag, config)
    new, report = transition(tag, args.to, params, config)
    print(f"stage: {infer_stage(tag).value} -> {new.stage.value}", file=sys.stderr)
    print(f"afi: {before} -> {_afi_of(new, config)}", file=sys.stderr)
    sys.stdout.write(dump_image(new))
    _report_loss(report, args.loss)
    return EXIT_OK


def _afi_of(tag: TagImage, config: Config) -> str:
    if is_library_tag(tag):
        return str(decode_hybrid(tag, None, config)[0].afi)
    return str(tag.afi_mirror) if tag.afi_mirror is not None else "none"


# -- entry point --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file overriding scheme, profile and AFI tables")
    common.add_argument("--registry", help="directory with publication_types.csv and managers.csv "
                                           "(default: $RFID28560_REGISTRY_DIR, else shipped samples)")

    parser = argparse.ArgumentParser(prog="rfid28560", description="Library RFID tag memory codec.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common], help="encode a record document")
    p.add_argument("--model", choices=["fixed", "hybrid"], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--profile")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="decode a hex block or tag dump")
    p.add_argument("--model", choices=["fixed", "hybrid"], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("convert", parents=[common], help="convert between fixed and hybrid models")
    p.add_argument("--from", dest="src", choices=["fixed", "hybrid"], required=True)
    p.add_argument("--to", dest="dst", choices=["fixed", "hybrid"], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--context", help="JSON context (manager_number, object_class) for fixed -> hybrid")
    p.add_argument("--profile")
    p.add_argument("--loss", help="write the loss report as JSON to this file")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("inspect", parents=[common], help="annotated breakdown of a block or dump")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("lifecycle", parents=[common], help="rerecord a tag for another lifecycle stage")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--to", required=True, choices=[s.value for s in Stage])
    p.add_argument("--params")
    p.add_argument("--loss", help="write the loss report as JSON to this file")
    p.set_defaults(func=cmd_lifecycle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else DEFAULT_CONFIG
        registries = load_registry_dir(args.registry)
        return args.func(args, config, registries)
    except InvalidRecord as exc:
        print(f"error[{exc.code}]: record has {len(exc.violations)} violation(s)", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return exc.exit_code
    except RfidError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error[IOError]: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
