"""Bank-addressed tag memory images.

Banks use block naming: ``01`` is the EPC/UII block, ``11`` user memory and
``SYSTEM`` the one-byte area that mirrors the AFI.  Images are immutable;
every write returns a new image and capacity is checked on every write.
"""

from __future__ import annotations

import configparser
import enum
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .bits import Bits
from .errors import (
    BankEmpty,
    BankOverflow,
    DumpParseError,
    ProfileParseError,
    UnknownBank,
    UnknownProfile,
)
from .model import DEFAULT_CONFIG, Afi, Config, Stage, TagProfile, parse_profile_section


class Bank(str, enum.Enum):
    BLOCK_01_EPC = "01"
    BLOCK_11_USER = "11"
    SYSTEM = "SYSTEM"


def bank_capacity(profile: TagProfile, bank: Bank) -> int:
    return {
        Bank.BLOCK_01_EPC: profile.epc_block_bits,
        Bank.BLOCK_11_USER: profile.user_memory_bits,
        Bank.SYSTEM: profile.system_bits,
    }[bank]


def _bank(bank) -> Bank:
    try:
        return Bank(bank)
    except ValueError:
        try:
            return Bank[bank]
        except KeyError:
            raise UnknownBank(f"unknown bank {bank!r}") from None


@dataclass(frozen=True)
class TagImage:
    """Memory of one tag.

    ``stage`` is image metadata, not tag content: it records which lifecycle
    stage produced the image so transitions can be checked.  ``None`` means
    unknown, in which case the stage is inferred from the content.
    """

    profile: TagProfile
    banks: Mapping[Bank, Bits] = field(default_factory=dict)
    stage: Stage | None = None

    def __post_init__(self):
        banks = {}
        for b, bits in dict(self.banks).items():
            b = _bank(b)
            cap = bank_capacity(self.profile, b)
            if cap == 0:
                raise UnknownBank(f"profile {self.profile.name} has no bank {b.value}")
            if len(bits) > cap:
                raise BankOverflow(b.value, cap, len(bits))
            banks[b] = bits
        object.__setattr__(self, "banks", MappingProxyType(dict(sorted(banks.items(), key=lambda kv: list(Bank).index(kv[0])))))
        if self.stage is not None:
            object.__setattr__(self, "stage", Stage(self.stage))

    @property
    def afi_mirror(self) -> Afi | None:
        bits = self.banks.get(Bank.SYSTEM)
        if bits is None or len(bits) < 8:
            return None
        return Afi(bits[:8].value)

    def __eq__(self, other):
        if not isinstance(other, TagImage):
            return NotImplemented
        return (self.profile, dict(self.banks), self.stage) == (other.profile, dict(other.banks), other.stage)

    def __hash__(self):
        return hash((self.profile, tuple(self.banks.items()), self.stage))

    def with_stage(self, stage: Stage | None) -> TagImage:
        return TagImage(self.profile, self.banks, stage)


def empty_image(profile: TagProfile, stage: Stage | None = None) -> TagImage:
    return TagImage(profile, {}, stage)


def write_bank(tag: TagImage, bank, bits: Bits) -> TagImage:
    b = _bank(bank)
    cap = bank_capacity(tag.profile, b)
    if cap == 0:
        raise UnknownBank(f"profile {tag.profile.name} has no bank {b.value}")
    if len(bits) > cap:
        raise BankOverflow(b.value, cap, len(bits))
    banks = dict(tag.banks)
    banks[b] = bits
    return TagImage(tag.profile, banks, tag.stage)


def erase_bank(tag: TagImage, bank) -> TagImage:
    b = _bank(bank)
    banks = {k: v for k, v in tag.banks.items() if k is not b}
    return TagImage(tag.profile, banks, tag.stage)


def read_bank(tag: TagImage, bank) -> Bits:
    b = _bank(bank)
    if bank_capacity(tag.profile, b) == 0:
        raise UnknownBank(f"profile {tag.profile.name} has no bank {b.value}")
    try:
        return tag.banks[b]
    except KeyError:
        raise BankEmpty(f"bank {b.value} has never been written") from None


def load_profile(name_or_file, config: Config = DEFAULT_CONFIG) -> TagProfile:
    """Look up a profile by name, or read a one-profile INI file.

    The file holds a single ``[profile NAME]`` section with the keys band,
    epc_block_bits, user_memory_bits, afi_location and optionally
    system_bits.
    """
    if isinstance(name_or_file, str) and name_or_file in config.profiles:
        return config.profiles[name_or_file]
    path = Path(name_or_file)
    if not path.is_file():
        raise UnknownProfile(f"unknown profile {str(name_or_file)!r}")
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ProfileParseError(f"{path}: {exc}") from None
    sections = [s for s in parser.sections() if s.startswith("profile ")]
    if len(sections) != 1:
        raise ProfileParseError(f"{path}: expected exactly one [profile NAME] section")
    name = sections[0].partition(" ")[2].strip()
    return parse_profile_section(name, parser[sections[0]])


# -- dump format ----------------------------------------------------------------

def dump_image(tag: TagImage) -> str:
    """Render ``tag`` as text: a profile line, an optional stage line, then
    one ``bank:<id> len:<bits> hex:<data>`` line per written bank."""
    lines = [f"profile:{tag.profile.name}"]
    if tag.stage is not None:
        lines.append(f"stage:{tag.stage.value}")
    for b, bits in tag.banks.items():
        lines.append(f"bank:{b.value} len:{len(bits)} hex:{bits.to_bytes().hex()}")
    return "\n".join(lines) + "\n"


def parse_dump(text: str, config: Config = DEFAULT_CONFIG) -> TagImage:
    profile = None
    stage = None
    banks: dict[Bank, Bits] = {}
    lines = text.splitlines()
    if not any(line.strip() for line in lines):
        raise DumpParseError("empty tag dump")
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise DumpParseError(f"expected key:value, got {line!r}", lineno)
        if key == "profile":
            if profile is not None:
                raise DumpParseError("duplicate profile line", lineno)
            try:
                profile = load_profile(rest.strip(), config)
            except UnknownProfile as exc:
                raise DumpParseError(str(exc), lineno) from None
        elif key == "stage":
            try:
                stage = Stage(rest.strip())
            except ValueError:
                raise DumpParseError(f"unknown stage {rest.strip()!r}", lineno) from None
        elif key == "bank":
            tokens = line.split()
            try:
                kv = dict(t.split(":", 1) for t in tokens)
                bank = Bank(kv["bank"])
                length = int(kv["len"])
                bits = Bits.from_hex(f"{length}:{kv['hex']}")
            except (ValueError, KeyError) as exc:
                raise DumpParseError(f"malformed bank line ({exc})", lineno) from None
            if bank in banks:
                raise DumpParseError(f"bank {bank.value} listed twice", lineno)
            banks[bank] = bits
        else:
            raise DumpParseError(f"unknown line type {key!r}", lineno)
    if profile is None:
        raise DumpParseError("missing profile line", len(lines))
    return TagImage(profile, banks, stage)
