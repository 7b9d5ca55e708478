"""URN Code 40 text compaction.

Three characters from a 40-symbol repertoire pack into one 16-bit group as
``v1 * 1600 + v2 * 40 + v3 + 1``, stored big-endian.  The ``+ 1`` keeps an
all-zero group out of the code space, so erased memory never decodes.
Short final triples are filled with the pad symbol (value 0), which decode
strips again.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    CharacterOutOfRepertoire,
    ConfigError,
    EmbeddedPad,
    GroupValueOutOfRange,
    InputTooLong,
    OddLengthInput,
)

PAD = "\x00"
MAX_CHARS = 48
MAX_GROUP = 39 * 1600 + 39 * 40 + 39 + 1  # 64000


@dataclass(frozen=True)
class Code40Alphabet:
    """Bijection between symbol values 0..39 and characters; value 0 is pad."""

    symbols: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.symbols) != 40:
            raise ConfigError(f"Code 40 alphabet needs 40 symbols, got {len(self.symbols)}")
        if any(len(s) != 1 for s in self.symbols):
            raise ConfigError("Code 40 symbols must be single characters")
        if len(set(self.symbols)) != 40:
            raise ConfigError("Code 40 alphabet is not injective")
        if self.symbols[0] != PAD:
            raise ConfigError("Code 40 value 0 must be the pad symbol")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.symbols)})

    @property
    def pad_symbol(self) -> str:
        return self.symbols[0]

    @property
    def repertoire(self) -> frozenset[str]:
        """Encodable characters (pad excluded)."""
        return frozenset(self.symbols[1:])

    def value_of(self, char: str) -> int:
        return self._index[char]

    def char_of(self, value: int) -> str:
        return self.symbols[value]

    def __contains__(self, char: str) -> bool:
        return char != PAD and char in self._index

    def fold(self, char: str) -> str:
        """Case-fold ``char`` onto the table: lowercase first, as written,
        then uppercase for tables that only carry capitals."""
        for c in (char.lower(), char, char.upper()):
            if c in self:
                return c
        return char


DEFAULT_ALPHABET = Code40Alphabet(
    (PAD,) + tuple(string.ascii_lowercase) + tuple(string.digits) + ("-", ":", ".")
)


def load_alphabet(path) -> Code40Alphabet:
    """Read an override table: 40 lines of ``value<TAB>character``.

    Value 0 is the pad and its character column is ignored (write ``pad``).
    """
    table: dict[int, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            value_s, char = line.split("\t", 1)
            value = int(value_s)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: expected value<TAB>character") from None
        if not 0 <= value < 40:
            raise ConfigError(f"{path}:{lineno}: symbol value {value} outside 0..39")
        if value in table:
            raise ConfigError(f"{path}:{lineno}: duplicate symbol value {value}")
        table[value] = PAD if value == 0 else char
    if sorted(table) != list(range(40)):
        missing = sorted(set(range(40)) - set(table))
        raise ConfigError(f"{path}: missing symbol values {missing}")
    return Code40Alphabet(tuple(table[i] for i in range(40)))


def encoded_length(n_chars: int) -> int:
    """Bytes needed for ``n_chars`` characters."""
    return 2 * -(-n_chars // 3)


def encode_code40(text: str, alphabet: Code40Alphabet = DEFAULT_ALPHABET) -> bytes:
    if len(text) > MAX_CHARS:
        raise InputTooLong(f"{len(text)} characters exceed the Code 40 limit of {MAX_CHARS}")
    values = []
    for pos, ch in enumerate(text):
        ch = alphabet.fold(ch)
        if ch not in alphabet:
            raise CharacterOutOfRepertoire(ch, pos)
        values.append(alphabet.value_of(ch))
    values.extend([0] * (-len(values) % 3))
    out = bytearray()
    for i in range(0, len(values), 3):
        v1, v2, v3 = values[i:i + 3]
        out += (v1 * 1600 + v2 * 40 + v3 + 1).to_bytes(2, "big")
    return bytes(out)


def decode_code40(data: bytes, alphabet: Code40Alphabet = DEFAULT_ALPHABET) -> str:
    """Inverse of :func:`encode_code40`.

    Pads may only appear as a trailing run in the final group, and that group
    must carry at least one real character.
    """
    if len(data) % 2:
        raise OddLengthInput(f"Code 40 input has odd length {len(data)}")
    n_groups = len(data) // 2
    chars = []
    for g in range(n_groups):
        value = int.from_bytes(data[2 * g:2 * g + 2], "big")
        if not 1 <= value <= MAX_GROUP:
            raise GroupValueOutOfRange(g, value)
        value -= 1
        triple = (value // 1600, value // 40 % 40, value % 40)
        last = g == n_groups - 1
        seen_pad = False
        for v in triple:
            if v == 0:
                if not last:
                    raise EmbeddedPad(g)
                seen_pad = True
            elif seen_pad:
                raise EmbeddedPad(g)
            else:
                chars.append(alphabet.char_of(v))
        if triple[0] == 0:
            raise EmbeddedPad(g)
    return "".join(chars)
