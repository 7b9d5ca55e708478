"""Lookup tables: publication types and manager numbers.

Both load from UTF-8 CSV files with a mandatory header row.  Lines starting
with ``#`` are comments.  The shipped tables under ``data/`` are small
illustrative samples, not normative code lists.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .bits import Bits
from .errors import DuplicateKey, NotRegistered, ParseError, WidthOverflow
from .model import DEFAULT_CONFIG, PublicationSystem, PublicationType

PUBLICATION_HEADER = ["system", "code", "numeric_id"]
MANAGER_HEADER = ["manager_hex", "width_bits", "name"]
PUBLICATION_FILE = "publication_types.csv"
MANAGER_FILE = "managers.csv"
REGISTRY_ENV = "RFID28560_REGISTRY_DIR"


@dataclass(frozen=True)
class PublicationTypeRegistry:
    entries: Mapping[tuple[PublicationSystem, str], int]
    class_bits: int = DEFAULT_CONFIG.scheme("EPC198").class_bits
    reverse: Mapping[int, tuple[PublicationSystem, str]] = field(init=False, repr=False)

    def __post_init__(self):
        entries = {(PublicationSystem(s), c): n for (s, c), n in dict(self.entries).items()}
        rev: dict[int, tuple[PublicationSystem, str]] = {}
        for key, num in entries.items():
            if not 0 <= num < (1 << self.class_bits):
                raise WidthOverflow(f"numeric_id {num} does not fit {self.class_bits} object-class bits")
            if num in rev:
                raise DuplicateKey(f"numeric_id {num} assigned to both {rev[num]} and {key}")
            rev[num] = key
        object.__setattr__(self, "entries", MappingProxyType(entries))
        object.__setattr__(self, "reverse", MappingProxyType(rev))

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class ManagerDirectory:
    entries: Mapping[Bits, str]

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def name_of(self, manager: Bits) -> str:
        try:
            return self.entries[manager]
        except KeyError:
            raise NotRegistered(f"manager number {manager} not in directory") from None


def lookup_publication(registry: PublicationTypeRegistry, system, code: str) -> int:
    try:
        return registry.entries[(PublicationSystem(system), code)]
    except (KeyError, ValueError):
        raise NotRegistered(f"publication type {system}:{code} not registered") from None


def reverse_lookup(registry: PublicationTypeRegistry, numeric_id: int) -> tuple[PublicationSystem, str]:
    try:
        return registry.reverse[numeric_id]
    except KeyError:
        raise NotRegistered(f"numeric_id {numeric_id} not registered") from None


def publication_type(registry: PublicationTypeRegistry, system, code: str) -> PublicationType:
    return PublicationType(PublicationSystem(system), code, lookup_publication(registry, system, code))


def _rows(text: str, header: list[str], source: str):
    lines = [(n, line) for n, line in enumerate(text.splitlines(), 1)
             if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise ParseError(f"{source}: missing header row")
    reader = csv.reader([line for _, line in lines])
    first = next(reader)
    if [h.strip() for h in first] != header:
        raise ParseError(f"{source}: expected header {','.join(header)}", lines[0][0])
    for (lineno, _), row in zip(lines[1:], reader):
        if len(row) != len(header):
            raise ParseError(f"{source}: expected {len(header)} columns, got {len(row)}", lineno)
        yield lineno, [c.strip() for c in row]


def parse_publication_csv(text: str, source: str = "<string>",
                          class_bits: int = DEFAULT_CONFIG.scheme("EPC198").class_bits) -> PublicationTypeRegistry:
    entries: dict = {}
    seen_ids: dict[int, int] = {}
    for lineno, (system, code, num_s) in _rows(text, PUBLICATION_HEADER, source):
        try:
            key = (PublicationSystem(system), code)
            num = int(num_s)
        except ValueError as exc:
            raise ParseError(f"{source}: {exc}", lineno) from None
        if not code:
            raise ParseError(f"{source}: empty code", lineno)
        if num < 0 or num >= (1 << class_bits):
            raise WidthOverflow(f"{source}: line {lineno}: numeric_id {num} does not fit {class_bits} bits")
        if key in entries:
            raise DuplicateKey(f"{source}: line {lineno}: duplicate code {system}:{code}")
        if num in seen_ids:
            raise DuplicateKey(f"{source}: line {lineno}: numeric_id {num} already used on line {seen_ids[num]}")
        entries[key] = num
        seen_ids[num] = lineno
    return PublicationTypeRegistry(entries, class_bits)


def parse_manager_csv(text: str, source: str = "<string>") -> ManagerDirectory:
    entries: dict[Bits, str] = {}
    for lineno, (hex_s, width_s, name) in _rows(text, MANAGER_HEADER, source):
        try:
            value = int(hex_s, 16)
            width = int(width_s)
        except ValueError as exc:
            raise ParseError(f"{source}: {exc}", lineno) from None
        if width <= 0:
            raise ParseError(f"{source}: width_bits must be positive", lineno)
        if value >> width:
            raise WidthOverflow(f"{source}: line {lineno}: manager {hex_s} does not fit {width} bits")
        key = Bits(value, width)
        if key in entries:
            raise DuplicateKey(f"{source}: line {lineno}: duplicate manager number {hex_s}")
        entries[key] = name
    return ManagerDirectory(entries)


def load_registry(path, kind: str):
    """Load a registry CSV; ``kind`` is ``"publication"`` or ``"manager"``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if kind == "publication":
        return parse_publication_csv(text, str(path))
    if kind == "manager":
        return parse_manager_csv(text, str(path))
    raise ValueError(f"unknown registry kind {kind!r}")


def dump_registry(registry) -> str:
    """Canonical CSV: header row, rows sorted by key, LF line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(registry, PublicationTypeRegistry):
        w.writerow(PUBLICATION_HEADER)
        for (system, code), num in sorted(registry.entries.items(), key=lambda kv: kv[1]):
            w.writerow([system.value, code, num])
    else:
        w.writerow(MANAGER_HEADER)
        for bits, name in sorted(registry.entries.items(), key=lambda kv: (kv[0].length, kv[0].value)):
            w.writerow([f"{bits.value:0{(bits.length + 3) // 4}x}", bits.length, name])
    return buf.getvalue()


@dataclass(frozen=True)
class Registries:
    publications: PublicationTypeRegistry
    managers: ManagerDirectory


@lru_cache(maxsize=1)
def shipped_registries() -> Registries:
    data = resources.files("rfid28560") / "data"
    return Registries(
        parse_publication_csv(data.joinpath(PUBLICATION_FILE).read_text(encoding="utf-8"), PUBLICATION_FILE),
        parse_manager_csv(data.joinpath(MANAGER_FILE).read_text(encoding="utf-8"), MANAGER_FILE),
    )


def load_registry_dir(directory=None) -> Registries:
    """Registries from ``directory``, else ``$RFID28560_REGISTRY_DIR``, else
    the shipped samples.  A file missing from the directory falls back to
    its shipped counterpart."""
    directory = directory or os.environ.get(REGISTRY_ENV)
    shipped = shipped_registries()
    if not directory:
        return shipped
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"registry directory not found: {d}")
    pubs = load_registry(d / PUBLICATION_FILE, "publication") if (d / PUBLICATION_FILE).is_file() else shipped.publications
    mgrs = load_registry(d / MANAGER_FILE, "manager") if (d / MANAGER_FILE).is_file() else shipped.managers
    return Registries(pubs, mgrs)
