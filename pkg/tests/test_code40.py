import itertools
import math

import pytest
from hypothesis import given, strategies as st

from rfid28560.code40 import (
    DEFAULT_ALPHABET,
    MAX_GROUP,
    PAD,
    Code40Alphabet,
    decode_code40,
    encode_code40,
    load_alphabet,
)
from rfid28560.errors import (
    CharacterOutOfRepertoire,
    ConfigError,
    EmbeddedPad,
    GroupValueOutOfRange,
    InputTooLong,
    OddLengthInput,
)

from conftest import REPERTOIRE
from oracles import code40_encode_oracle, code40_group_table

SYMBOLS = DEFAULT_ALPHABET.symbols


def test_shipped_alphabet():
    assert len(SYMBOLS) == 40
    assert SYMBOLS[0] == PAD
    assert set(REPERTOIRE) == set("abcdefghijklmnopqrstuvwxyz0123456789-:.")


def test_abc_matches_enumeration_oracle():
    # v(a)=1, v(b)=2, v(c)=3 -> 1*1600 + 2*40 + 3 + 1 = 1684
    assert code40_encode_oracle("abc", SYMBOLS) == bytes.fromhex("0694")
    assert encode_code40("abc") == bytes.fromhex("0694")


def test_sixteen_chars_give_twelve_bytes():
    out = encode_code40("abcdefghij012345")
    assert len(out) == 12
    assert out == bytes.fromhex("069419cf2d0a42d5ba10c801")
    assert decode_code40(out) == "abcdefghij012345"


def test_empty():
    assert encode_code40("") == b""
    assert decode_code40(b"") == ""


def test_every_triple_matches_oracle():
    table = code40_group_table()
    for (v1, v2, v3), expected in table.items():
        if v1 == 0 or (v2 == 0 and v3 != 0):
            continue  # not producible by the encoder
        text = "".join(SYMBOLS[v] for v in (v1, v2, v3) if v)
        assert int.from_bytes(encode_code40(text), "big") == expected


def test_case_folding():
    assert encode_code40("ABC") == encode_code40("abc")
    assert decode_code40(encode_code40("AbC")) == "abc"


def test_out_of_repertoire_names_position():
    with pytest.raises(CharacterOutOfRepertoire) as ei:
        encode_code40("ab_c")
    assert ei.value.char == "_" and ei.value.position == 2
    with pytest.raises(CharacterOutOfRepertoire):
        encode_code40("a\x00b")


def test_too_long():
    encode_code40("a" * 48)
    with pytest.raises(InputTooLong):
        encode_code40("a" * 49)


def test_decode_errors():
    with pytest.raises(OddLengthInput):
        decode_code40(b"\x06")
    with pytest.raises(GroupValueOutOfRange) as ei:
        decode_code40(bytes.fromhex("0694" "0000"))
    assert ei.value.group_index == 1
    with pytest.raises(GroupValueOutOfRange):
        decode_code40((MAX_GROUP + 1).to_bytes(2, "big"))


def test_pad_position_enumeration():
    """Every 1..3 symbol suffix placed in a final group and in a non-final
    group: pads are end-of-text only as a trailing run of the final group."""
    table = code40_group_table()
    head = encode_code40("xyz")
    for triple, value in table.items():
        group = value.to_bytes(2, "big")
        pads = [v == 0 for v in triple]
        trailing_only = pads in ([False] * 3, [False, False, True], [False, True, True])
        if trailing_only:
            expected = "xyz" + "".join(SYMBOLS[v] for v in triple if v)
            assert decode_code40(head + group) == expected
        else:
            with pytest.raises(EmbeddedPad):
                decode_code40(head + group)
        if any(pads):
            with pytest.raises(EmbeddedPad):
                decode_code40(group + head)


@given(st.text(alphabet=REPERTOIRE, max_size=48))
def test_roundtrip_and_length_law(text):
    enc = encode_code40(text)
    assert len(enc) == 2 * math.ceil(len(text) / 3)
    assert decode_code40(enc) == text
    assert enc == code40_encode_oracle(text, SYMBOLS)


@given(st.text(alphabet=REPERTOIRE, max_size=48))
def test_group_range(text):
    enc = encode_code40(text)
    for i in range(0, len(enc), 2):
        g = int.from_bytes(enc[i:i + 2], "big")
        assert 1 <= g <= 40 * 1600 + 39 * 40 + 39 + 1


def test_alphabet_must_be_bijective():
    with pytest.raises(ConfigError):
        Code40Alphabet(SYMBOLS[:39])
    with pytest.raises(ConfigError):
        Code40Alphabet(SYMBOLS[:39] + ("a",))


def test_alphabet_override_file(tmp_path):
    # ISO-style ordering: A-Z, '-', '.', ':', digits
    chars = list("ABCDEFGHIJKLMNOPQRSTUVWXYZ-.:0123456789")
    lines = ["0\tpad"] + [f"{i}\t{c}" for i, c in enumerate(chars, 1)]
    path = tmp_path / "code40.tsv"
    path.write_text("\n".join(lines) + "\n")
    alpha = load_alphabet(path)
    assert alpha.value_of("A") == 1
    assert alpha.value_of("0") == 30
    # input folds onto the table's case
    assert encode_code40("a", alpha) == encode_code40("A", alpha) == (1600 + 1).to_bytes(2, "big")
    assert decode_code40(encode_code40("dk-0:9", alpha), alpha) == "DK-0:9"

    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ConfigError):
        load_alphabet(path)
    path.write_text("\n".join(lines + ["3\tz"]) + "\n")
    with pytest.raises(ConfigError):
        load_alphabet(path)


def test_no_two_texts_share_an_encoding():
    seen = {}
    for n in range(0, 4):
        for chars in itertools.product("ab0", repeat=n):
            t = "".join(chars)
            enc = encode_code40(t)
            assert enc not in seen, (t, seen.get(enc))
            seen[enc] = t
