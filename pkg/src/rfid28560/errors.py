"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) and the process exit
status the CLI maps it to: 2 validation, 3 decode/integrity, 4 lifecycle,
5 I/O.
"""


class RfidError(Exception):
    exit_code = 1

    @property
    def code(self) -> str:
        return type(self).__name__


# -- validation (exit 2) ----------------------------------------------------

class ValidationError(RfidError, ValueError):
    exit_code = 2


class InvalidRecord(ValidationError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid record: " + "; ".join(self.violations))


class CharacterOutOfRepertoire(ValidationError):
    def __init__(self, char: str, position: int):
        self.char = char
        self.position = position
        super().__init__(f"character {char!r} at position {position} is not in the Code 40 repertoire")


class InputTooLong(ValidationError):
    pass


class WidthMismatch(ValidationError):
    def __init__(self, field: str, expected: int, actual: int):
        self.field = field
        self.expected = expected
        self.actual = actual
        super().__init__(f"field {field}: expected {expected} bits, got {actual}")


class SerialOverflow(ValidationError):
    pass


class ProfileTooSmall(ValidationError):
    def __init__(self, bank: str, needed: int, available: int):
        self.bank = bank
        self.needed = needed
        self.available = available
        super().__init__(f"bank {bank} needs {needed} bits, profile provides {available}")


class BankOverflow(ValidationError):
    def __init__(self, bank: str, capacity: int, attempted: int):
        self.bank = bank
        self.capacity = capacity
        self.attempted = attempted
        super().__init__(f"bank {bank}: {attempted} bits exceed capacity {capacity}")


class UnknownBank(ValidationError):
    pass


class UnknownProfile(ValidationError):
    pass


class ConfigError(ValidationError):
    """Malformed scheme/profile/alphabet configuration."""


class ProfileParseError(ConfigError):
    pass


class UsageError(ValidationError):
    pass


# registry load and lookup

class RegistryError(ValidationError):
    pass


class ParseError(RegistryError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DuplicateKey(RegistryError):
    pass


class WidthOverflow(RegistryError):
    pass


class NotRegistered(RegistryError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


# -- decode / integrity (exit 3) --------------------------------------------

class DecodeError(RfidError, ValueError):
    exit_code = 3


class WrongLength(DecodeError):
    pass


class CrcMismatch(DecodeError):
    def __init__(self, stored: int, computed: int):
        self.stored = stored
        self.computed = computed
        super().__init__(f"CRC mismatch: stored {stored:#06x}, computed {computed:#06x}")


class PadViolation(DecodeError):
    pass


class LayoutVersionError(DecodeError):
    pass


class OddLengthInput(DecodeError):
    pass


class GroupValueOutOfRange(DecodeError):
    def __init__(self, group_index: int, value: int):
        self.group_index = group_index
        self.value = value
        super().__init__(f"Code 40 group {group_index} has out-of-range value {value}")


class EmbeddedPad(DecodeError):
    def __init__(self, group_index: int):
        self.group_index = group_index
        super().__init__(f"pad symbol before content in Code 40 group {group_index}")


class UnknownHeader(DecodeError):
    def __init__(self, header: int):
        self.header = header
        super().__init__(f"unregistered EPC header {header:#04x}")


class LengthSchemeMismatch(DecodeError):
    def __init__(self, header: int, scheme: str, expected: int, actual: int):
        self.header = header
        self.scheme = scheme
        super().__init__(
            f"header {header:#04x} selects {scheme} ({expected} bits) but code has {actual} bits"
        )


class UserMemoryTruncated(DecodeError):
    pass


class NotHybrid(DecodeError):
    """Tag holds a plain EPC rather than a library payload."""


class BankEmpty(DecodeError):
    pass


class DumpParseError(DecodeError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# -- lifecycle (exit 4) -----------------------------------------------------

class LifecycleError(RfidError):
    exit_code = 4


class IllegalTransition(LifecycleError):
    pass


class MissingParams(LifecycleError):
    pass
