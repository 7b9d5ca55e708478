import random
import string

import pytest
from hypothesis import strategies as st

from rfid28560.bits import Bits
from rfid28560.code40 import DEFAULT_ALPHABET
from rfid28560.epc import decode_epc
from rfid28560.fixed import FixedBlock, decode_fixed
from rfid28560.hybrid import Gs1Context, decode_hybrid
from rfid28560.model import DEFAULT_CONFIG, LibraryItemRecord, PublicationType
from rfid28560.registry import shipped_registries
from rfid28560.tagmem import Bank, read_bank

REPERTOIRE = "".join(DEFAULT_ALPHABET.symbols[1:])
ISIL_CHARS = string.ascii_letters + string.digits
EPC198 = DEFAULT_CONFIG.scheme("EPC198")
PUBLICATIONS = shipped_registries().publications


def random_isil(rng: random.Random) -> str:
    if rng.random() < 0.3:
        return "".join(rng.choice(ISIL_CHARS) for _ in range(rng.randint(1, 11)))
    n = rng.randint(3, 11)
    cut = rng.randint(1, n - 2)
    prefix = "".join(rng.choice(ISIL_CHARS) for _ in range(cut))
    suffix = "".join(rng.choice(ISIL_CHARS + ":-") for _ in range(n - cut - 1))
    return f"{prefix}-{suffix}"


def random_set_info(rng: random.Random) -> tuple[int, int]:
    if rng.random() < 0.2:
        return 1, 0
    parts = rng.randint(1, 255)
    return parts, rng.randint(1, parts)


def random_record(rng: random.Random, publication_type=None) -> LibraryItemRecord:
    pid = "".join(rng.choice(REPERTOIRE) for _ in range(rng.randint(1, 16)))
    parts, part = random_set_info(rng)
    return LibraryItemRecord.create(pid, random_isil(rng), parts, part, rng.randint(0, 255),
                                    publication_type)


def random_context(rng: random.Random) -> Gs1Context:
    """Context whose object class is either a registered publication type or
    raw bits that are guaranteed not to be registered."""
    manager = Bits(rng.getrandbits(EPC198.manager_bits), EPC198.manager_bits)
    if rng.random() < 0.5:
        (system, code), num = rng.choice(sorted(PUBLICATIONS.entries.items()))
        return Gs1Context(manager, PublicationType(system, code, num))
    while True:
        raw = rng.getrandbits(EPC198.class_bits)
        if raw not in PUBLICATIONS.reverse:
            return Gs1Context(manager, Bits(raw, EPC198.class_bits))


def random_hybrid_input(rng: random.Random):
    ctx = random_context(rng)
    pub = ctx.object_class_source if isinstance(ctx.object_class_source, PublicationType) else None
    return random_record(rng, pub), ctx


def decoded_fields(obj) -> dict:
    """Field values seen by a straight decode, independent of the library's
    own view helper."""
    if isinstance(obj, FixedBlock):
        r = decode_fixed(obj)
        return {"primary_id": r.primary_id, "isil": r.isil, "set_info": r.set_info, "afi": r.afi.value}
    epc = decode_epc(read_bank(obj, Bank.BLOCK_01_EPC))
    out = {"manager_number": epc.manager_number, "object_class": epc.object_class}
    if Bank.BLOCK_11_USER in obj.banks:
        r, _ = decode_hybrid(obj)
        out.update(primary_id=r.primary_id, isil=r.isil, set_info=r.set_info, afi=r.afi.value)
    else:
        out["serial"] = epc.serial
        if Bank.SYSTEM in obj.banks:
            out["afi"] = read_bank(obj, Bank.SYSTEM).value
    return out


def lost(before, after) -> set:
    a, b = decoded_fields(before), decoded_fields(after)
    return {k for k, v in a.items() if k not in b or b[k] != v}


@pytest.fixture
def rng():
    return random.Random(28560)


# hypothesis strategies

primary_ids = st.text(alphabet=REPERTOIRE, min_size=1, max_size=16)
isils = st.builds(
    lambda p, s: f"{p}-{s}" if s else p,
    st.text(alphabet=ISIL_CHARS, min_size=1, max_size=5),
    st.text(alphabet=ISIL_CHARS + ":", min_size=0, max_size=5),
)
set_infos = st.one_of(
    st.just((1, 0)),
    st.integers(1, 255).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))),
)


@st.composite
def records(draw, publication_type=None):
    parts, part = draw(set_infos)
    return LibraryItemRecord.create(draw(primary_ids), draw(isils), parts, part,
                                    draw(st.integers(0, 255)), publication_type)


@pytest.fixture
def boundary_record():
    return LibraryItemRecord.create("abcdefghij012345", "DK-71010012", 1, 1, 0xC2)
