"""Domain types shared by the codecs.

Library-side value types (:class:`PrimaryItemId`, :class:`Isil`, ...) are
permissive at construction and report problems through
:func:`validate_record`, which always returns the complete violation list.
EPC-side types (:class:`EpcScheme`, :class:`EpcFields`) guard their
invariants on construction because a malformed width table or field is a
programming error, not user data.
"""

from __future__ import annotations

import configparser
import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .bits import Bits
from .code40 import DEFAULT_ALPHABET, Code40Alphabet
from .errors import ConfigError, ProfileParseError, WidthMismatch

PRIMARY_ID_BYTES = 16
ISIL_BYTES = 11
SET_INFO_BYTES = 2
HEADER_BITS = 8
SERIAL_RANGE = (36, 180)
SGTIN198_SERIAL_BITS = 140
ICODE_ILT_EPC_BLOCK_BITS = 240
# Stated UII total; the component sizes above add up to 29, so this is
# recorded but not enforced.
DANISH_UII_BYTES = 19

_ISIL_RE = re.compile(r"^[A-Za-z0-9:-]+$")


# -- library side -----------------------------------------------------------

@dataclass(frozen=True)
class PrimaryItemId:
    """Item identifier; stored lowercase, the canonical Code 40 form."""

    value: str

    def __post_init__(self):
        object.__setattr__(self, "value", self.value.lower())

    def violations(self, alphabet: Code40Alphabet = DEFAULT_ALPHABET) -> list[str]:
        out = []
        if len(self.value) < 1:
            out.append("primary_id is empty")
        if len(self.value) > PRIMARY_ID_BYTES:
            out.append(f"primary_id length > {PRIMARY_ID_BYTES}")
        bad = sorted({c for c in self.value if alphabet.fold(c) not in alphabet})
        if bad:
            out.append(f"primary_id characters outside Code 40 repertoire: {''.join(bad)!r}")
        return out

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Isil:
    value: str

    def violations(self) -> list[str]:
        v = self.value
        out = []
        if len(v) < 1:
            out.append("isil is empty")
        if len(v) > ISIL_BYTES:
            out.append(f"isil length > {ISIL_BYTES}")
        if v and not _ISIL_RE.match(v):
            out.append("isil contains characters other than letters, digits, '-' and ':'")
        if "-" in v:
            prefix, _, suffix = v.partition("-")
            if not prefix or ":" in prefix:
                out.append("isil prefix before the first '-' must be non-empty and colon-free")
            if not suffix:
                out.append("isil has an empty suffix after '-'")
        return out

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SetInfo:
    """Multi-part set position.  ``part_number == 0`` means "not in a set"."""

    parts_in_item: int = 1
    part_number: int = 1

    def violations(self) -> list[str]:
        out = []
        if not 1 <= self.parts_in_item <= 255:
            out.append("parts_in_item outside 1..255")
        if not 0 <= self.part_number <= 255:
            out.append("part_number outside 0..255")
        if self.part_number > self.parts_in_item:
            out.append("part_number > parts_in_item")
        if self.part_number == 0 and self.parts_in_item != 1:
            out.append("part_number 0 (no set) requires parts_in_item = 1")
        return out

    def to_bytes(self) -> bytes:
        return bytes((self.parts_in_item, self.part_number))

    @classmethod
    def from_bytes(cls, data: bytes) -> SetInfo:
        return cls(data[0], data[1])


@dataclass(frozen=True)
class Afi:
    value: int = 0

    def violations(self) -> list[str]:
        return [] if 0 <= self.value <= 255 else ["afi outside 0..255"]

    def __str__(self):
        return f"0x{self.value:02x}"


class PublicationSystem(str, enum.Enum):
    UNIMARC = "UNIMARC"
    ONIX = "ONIX"


@dataclass(frozen=True)
class PublicationType:
    system: PublicationSystem
    code: str
    numeric_id: int

    def __post_init__(self):
        object.__setattr__(self, "system", PublicationSystem(self.system))

    def violations(self, class_bits: int) -> list[str]:
        if not 0 <= self.numeric_id < (1 << class_bits):
            return [f"publication_type numeric_id {self.numeric_id} does not fit {class_bits} object-class bits"]
        return []

    def __str__(self):
        return f"{self.system.value}:{self.code}#{self.numeric_id}"


@dataclass(frozen=True)
class LibraryItemRecord:
    primary_id: PrimaryItemId
    isil: Isil
    set_info: SetInfo = SetInfo()
    publication_type: PublicationType | None = None
    afi: Afi = Afi()

    @classmethod
    def create(cls, primary_id: str, isil: str, parts_in_item: int = 1, part_number: int = 1,
               afi: int = 0, publication_type: PublicationType | None = None) -> LibraryItemRecord:
        return cls(PrimaryItemId(primary_id), Isil(isil), SetInfo(parts_in_item, part_number),
                   publication_type, Afi(afi))


def validate_record(record: LibraryItemRecord, *, alphabet: Code40Alphabet = DEFAULT_ALPHABET,
                    class_bits: int | None = None) -> list[str]:
    """Return every violated invariant of ``record``; an empty list means ok."""
    if class_bits is None:
        class_bits = scheme_by_name("EPC198").class_bits
    out = record.primary_id.violations(alphabet)
    out += record.isil.violations()
    out += record.set_info.violations()
    out += record.afi.violations()
    if record.publication_type is not None:
        out += record.publication_type.violations(class_bits)
    return out


# -- EPC side -----------------------------------------------------------------

class SchemeName(str, enum.Enum):
    EPC64 = "EPC64"
    EPC96 = "EPC96"
    EPC198 = "EPC198"


_TOTALS = {SchemeName.EPC64: 64, SchemeName.EPC96: 96, SchemeName.EPC198: 198}


@dataclass(frozen=True)
class EpcScheme:
    name: SchemeName
    header: int
    manager_bits: int
    class_bits: int
    serial_bits: int
    header_bits: int = HEADER_BITS

    def __post_init__(self):
        object.__setattr__(self, "name", SchemeName(self.name))
        if self.header_bits != HEADER_BITS:
            raise ConfigError(f"{self.name.value}: header must be {HEADER_BITS} bits")
        if not 0 <= self.header <= 0xFF:
            raise ConfigError(f"{self.name.value}: header {self.header} is not one byte")
        widths = (self.manager_bits, self.class_bits, self.serial_bits)
        if min(widths) < 1:
            raise ConfigError(f"{self.name.value}: field widths must be positive")
        if sum(widths) + self.header_bits != self.total_bits:
            raise ConfigError(
                f"{self.name.value}: field widths sum to {sum(widths) + self.header_bits}, "
                f"expected {self.total_bits}"
            )
        lo, hi = SERIAL_RANGE
        if self.serial_bits > hi:
            raise ConfigError(f"{self.name.value}: serial width {self.serial_bits} > {hi}")
        # 64-bit codes are allowed a legacy serial narrower than the range floor.
        if self.name is not SchemeName.EPC64 and self.serial_bits < lo:
            raise ConfigError(f"{self.name.value}: serial width {self.serial_bits} < {lo}")
        if self.name is SchemeName.EPC198 and self.serial_bits != SGTIN198_SERIAL_BITS:
            raise ConfigError(f"EPC198 serial must be {SGTIN198_SERIAL_BITS} bits")

    @property
    def total_bits(self) -> int:
        return _TOTALS[self.name]

    def widths(self) -> dict[str, int]:
        return {
            "header": self.header_bits,
            "manager_number": self.manager_bits,
            "object_class": self.class_bits,
            "serial": self.serial_bits,
        }


@dataclass(frozen=True)
class EpcFields:
    scheme: EpcScheme
    header: Bits
    manager_number: Bits
    object_class: Bits
    serial: Bits

    def __post_init__(self):
        for name, width in self.scheme.widths().items():
            actual = len(getattr(self, name))
            if actual != width:
                raise WidthMismatch(name, width, actual)
        if self.header.value != self.scheme.header:
            raise ConfigError(
                f"header {self.header.value:#04x} does not identify {self.scheme.name.value}"
            )

    @classmethod
    def build(cls, scheme: EpcScheme, manager_number: int | Bits, object_class: int | Bits,
              serial: int | Bits) -> EpcFields:
        """Build fields from integers or bit strings, sizing integers to the scheme."""
        def as_bits(v, width):
            return v if isinstance(v, Bits) else Bits(v, width)
        return cls(
            scheme,
            Bits(scheme.header, scheme.header_bits),
            as_bits(manager_number, scheme.manager_bits),
            as_bits(object_class, scheme.class_bits),
            as_bits(serial, scheme.serial_bits),
        )


# -- tag profiles -------------------------------------------------------------

class Band(str, enum.Enum):
    HF_MODE3 = "HF_MODE3"
    UHF_TYPEC = "UHF_TYPEC"


class AfiLocation(str, enum.Enum):
    IN_EPC_BLOCK = "IN_EPC_BLOCK"
    SYSTEM_AREA = "SYSTEM_AREA"


@dataclass(frozen=True)
class TagProfile:
    name: str
    band: Band
    epc_block_bits: int
    user_memory_bits: int
    afi_location: AfiLocation
    system_bits: int = 8

    def __post_init__(self):
        object.__setattr__(self, "band", Band(self.band))
        object.__setattr__(self, "afi_location", AfiLocation(self.afi_location))
        for attr in ("epc_block_bits", "user_memory_bits", "system_bits"):
            if getattr(self, attr) < 0:
                raise ProfileParseError(f"profile {self.name}: {attr} must be >= 0")
        if self.name == "ICODE_ILT" and (
            self.band is not Band.HF_MODE3 or self.epc_block_bits != ICODE_ILT_EPC_BLOCK_BITS
        ):
            raise ProfileParseError(
                f"ICODE_ILT must be HF_MODE3 with a {ICODE_ILT_EPC_BLOCK_BITS}-bit EPC block"
            )


# -- loss accounting ------------------------------------------------------------

class Direction(str, enum.Enum):
    TO_EPC_VIEW = "TO_EPC_VIEW"
    TO_LIBRARY_VIEW = "TO_LIBRARY_VIEW"


@dataclass(frozen=True)
class LossReport:
    direction: Direction
    lost_fields: tuple[tuple[str, str], ...] = ()

    @property
    def fields(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.lost_fields)

    @property
    def is_lossless(self) -> bool:
        return not self.lost_fields

    def to_text(self) -> str:
        return "".join(f"{name}={prev}\n" for name, prev in self.lost_fields)

    def to_dict(self) -> dict:
        return {
            "direction": Direction(self.direction).value,
            "lost_fields": [{"field": n, "previous_value": p} for n, p in self.lost_fields],
        }


# -- configuration --------------------------------------------------------------

class Stage(str, enum.Enum):
    PUBLISHER_TAGGED = "PUBLISHER_TAGGED"
    LIBRARY_ACCESSIONED = "LIBRARY_ACCESSIONED"
    EXTERNAL_TRANSIT = "EXTERNAL_TRANSIT"


@dataclass(frozen=True)
class Config:
    """Width tables and defaults consulted by the codecs."""

    schemes: tuple[EpcScheme, ...]
    profiles: Mapping[str, TagProfile]
    stage_afi: Mapping[Stage, int]
    fixed_default_afi: int
    alphabet: Code40Alphabet = DEFAULT_ALPHABET
    _by_header: Mapping[int, EpcScheme] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_header: dict[int, EpcScheme] = {}
        names = set()
        for s in self.schemes:
            if s.header in by_header:
                raise ConfigError(
                    f"header {s.header:#04x} shared by {by_header[s.header].name.value} and {s.name.value}"
                )
            if s.name in names:
                raise ConfigError(f"scheme {s.name.value} defined twice")
            by_header[s.header] = s
            names.add(s.name)
        if names != set(SchemeName):
            raise ConfigError("scheme table must define EPC64, EPC96 and EPC198")
        object.__setattr__(self, "_by_header", MappingProxyType(by_header))
        object.__setattr__(self, "profiles", MappingProxyType(dict(self.profiles)))
        object.__setattr__(self, "stage_afi", MappingProxyType(dict(self.stage_afi)))

    def scheme(self, name: str | SchemeName) -> EpcScheme:
        name = SchemeName(name)
        return next(s for s in self.schemes if s.name is name)

    def scheme_for_header(self, header: int) -> EpcScheme | None:
        return self._by_header.get(header)


DEFAULT_CONFIG = Config(
    schemes=(
        EpcScheme(SchemeName.EPC64, 0x2F, manager_bits=28, class_bits=8, serial_bits=20),
        EpcScheme(SchemeName.EPC96, 0x30, manager_bits=28, class_bits=24, serial_bits=36),
        EpcScheme(SchemeName.EPC198, 0x36, manager_bits=28, class_bits=22, serial_bits=140),
    ),
    profiles={
        "ICODE_ILT": TagProfile("ICODE_ILT", Band.HF_MODE3, 240, 1024, AfiLocation.SYSTEM_AREA),
        "GENERIC_UHF_TYPEC": TagProfile("GENERIC_UHF_TYPEC", Band.UHF_TYPEC, 96, 512,
                                        AfiLocation.IN_EPC_BLOCK),
    },
    stage_afi={
        Stage.PUBLISHER_TAGGED: 0x00,
        Stage.LIBRARY_ACCESSIONED: 0xC2,
        Stage.EXTERNAL_TRANSIT: 0x00,
    },
    fixed_default_afi=0xC2,
)


def scheme_table(config: Config = DEFAULT_CONFIG) -> list[EpcScheme]:
    return list(config.schemes)


def scheme_by_name(name: str | SchemeName, config: Config = DEFAULT_CONFIG) -> EpcScheme:
    return config.scheme(name)


def _int(text: str) -> int:
    return int(text.strip(), 0)


def parse_profile_section(name: str, section: Mapping[str, str], base: TagProfile | None = None) -> TagProfile:
    try:
        def get(key, conv, default):
            return conv(section[key]) if key in section else default
        return TagProfile(
            name=name,
            band=get("band", lambda s: Band(s.strip()), base.band if base else None),
            epc_block_bits=get("epc_block_bits", _int, base.epc_block_bits if base else None),
            user_memory_bits=get("user_memory_bits", _int, base.user_memory_bits if base else None),
            afi_location=get("afi_location", lambda s: AfiLocation(s.strip()),
                             base.afi_location if base else None),
            system_bits=get("system_bits", _int, base.system_bits if base else 8),
        )
    except (ValueError, TypeError) as exc:
        raise ProfileParseError(f"profile {name}: {exc}") from None


def load_config(path, base: Config = DEFAULT_CONFIG) -> Config:
    """Overlay an INI-style configuration file on ``base``.

    Sections: ``[scheme EPC96]`` (header, manager_bits, class_bits,
    serial_bits), ``[profile NAME]`` (band, epc_block_bits, user_memory_bits,
    afi_location, system_bits), ``[afi]`` (one key per stage plus
    ``fixed_default``) and ``[code40]`` (``alphabet = <file>``, relative to the
    config file).  Anything omitted keeps the value from ``base``.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    schemes = {s.name: s for s in base.schemes}
    profiles = dict(base.profiles)
    stage_afi = dict(base.stage_afi)
    fixed_default = base.fixed_default_afi
    alphabet = base.alphabet

    for sect in parser.sections():
        kind, _, name = sect.partition(" ")
        body = parser[sect]
        try:
            if kind == "scheme":
                old = schemes[SchemeName(name)]
                schemes[old.name] = EpcScheme(
                    old.name,
                    _int(body.get("header", str(old.header))),
                    _int(body.get("manager_bits", str(old.manager_bits))),
                    _int(body.get("class_bits", str(old.class_bits))),
                    _int(body.get("serial_bits", str(old.serial_bits))),
                )
            elif kind == "profile":
                profiles[name] = parse_profile_section(name, body, profiles.get(name))
            elif kind == "afi":
                for key, val in body.items():
                    if key == "fixed_default":
                        fixed_default = _int(val)
                    else:
                        stage_afi[Stage(key)] = _int(val)
            elif kind == "code40":
                from .code40 import load_alphabet
                alphabet = load_alphabet(path.parent / body["alphabet"])
            else:
                raise ConfigError(f"{path}: unknown section [{sect}]")
        except (ValueError, KeyError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}: section [{sect}]: {exc}") from None

    for stage, v in list(stage_afi.items()) + [("fixed_default", fixed_default)]:
        if not 0 <= v <= 255:
            raise ConfigError(f"{path}: AFI for {stage} outside 0..255")
    return Config(tuple(schemes.values()), profiles, stage_afi, fixed_default, alphabet)
