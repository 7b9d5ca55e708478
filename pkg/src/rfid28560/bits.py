"""Immutable bit strings with an explicit length.

Tag memory fields are not byte aligned (a 198-bit EPC, a 22-bit object
class), so everything below the byte-oriented codecs works on :class:`Bits`,
an unsigned integer paired with its true width, most significant bit first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

_HEX_RE = re.compile(r"^(\d+):([0-9a-fA-F]*)$")


@dataclass(frozen=True, order=False)
class Bits:
    value: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ValueError(f"negative bit length {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise ValueError(f"value {self.value:#x} does not fit in {self.length} bits")

    # -- constructors -----------------------------------------------------

    @classmethod
    def empty(cls) -> Bits:
        return cls(0, 0)

    @classmethod
    def zeros(cls, length: int) -> Bits:
        return cls(0, length)

    @classmethod
    def from_bytes(cls, data: bytes) -> Bits:
        return cls(int.from_bytes(data, "big"), 8 * len(data))

    @classmethod
    def from_bin(cls, text: str) -> Bits:
        text = text.replace("_", "")
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"not a binary string: {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def from_hex(cls, text: str) -> Bits:
        """Parse the ``<bitlen>:<hex>`` rendering produced by :meth:`to_hex`.

        The hex digits are the value left-padded with zero bits to the next
        nibble boundary of whole bytes; the padding bits must be zero.
        """
        m = _HEX_RE.match(text.strip())
        if not m:
            raise ValueError(f"malformed bit string {text!r}, expected <bitlen>:<hex>")
        length = int(m.group(1))
        digits = m.group(2)
        if len(digits) != 2 * ((length + 7) // 8):
            raise ValueError(
                f"{length} bits need {2 * ((length + 7) // 8)} hex digits, got {len(digits)}"
            )
        value = int(digits, 16) if digits else 0
        if value >> length:
            raise ValueError(f"nonzero padding bits in {text!r}")
        return cls(value, length)

    @classmethod
    def concat(cls, parts: Iterable[Bits]) -> Bits:
        value = 0
        length = 0
        for p in parts:
            value = (value << p.length) | p.value
            length += p.length
        return cls(value, length)

    # -- views ------------------------------------------------------------

    def __len__(self) -> int:
        return self.length

    def __add__(self, other: Bits) -> Bits:
        if not isinstance(other, Bits):
            return NotImplemented
        return Bits((self.value << other.length) | other.value, self.length + other.length)

    def __getitem__(self, key: slice) -> Bits:
        if not isinstance(key, slice) or key.step not in (None, 1):
            raise TypeError("Bits supports contiguous slicing only")
        start = 0 if key.start is None else key.start
        stop = self.length if key.stop is None else key.stop
        if not 0 <= start <= stop <= self.length:
            start, stop, _ = key.indices(self.length)
            stop = max(start, stop)
        width = stop - start
        return Bits((self.value >> (self.length - stop)) & ((1 << width) - 1), width)

    def bit(self, index: int) -> int:
        """Bit at ``index``, counting from the most significant end."""
        if not 0 <= index < self.length:
            raise IndexError(index)
        return (self.value >> (self.length - 1 - index)) & 1

    def flip(self, index: int) -> Bits:
        if not 0 <= index < self.length:
            raise IndexError(index)
        return Bits(self.value ^ (1 << (self.length - 1 - index)), self.length)

    def to_bytes(self) -> bytes:
        """Byte rendering, left-padded with zero bits to a whole byte."""
        return self.value.to_bytes((self.length + 7) // 8, "big")

    def to_hex(self) -> str:
        return f"{self.length}:{self.to_bytes().hex()}"

    def to_bin(self) -> str:
        return format(self.value, f"0{self.length}b") if self.length else ""

    def __str__(self) -> str:
        return self.to_hex()

    def __repr__(self) -> str:
        return f"Bits({self.to_hex()!r})"
