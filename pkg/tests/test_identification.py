import pytest
from hypothesis import given
from hypothesis import strategies as st

from apronid.errors import DuplicateCode, NonPositiveLength, ParseError
from apronid.identification import (
    AircraftType,
    TypeDatabase,
    classify_by_length,
    default_type_db,
    load_type_db,
)

BUILTIN_LENGTHS = {
    "LM100J": 35, "G-280": 20, "G-550": 29, "G-650": 30, "CJ4": 16,
    "CM2": 13, "Bo787": 57, "A-380": 73, "A-320": 38,
}


@pytest.fixture(scope="module")
def db():
    return default_type_db()


def test_default_db_contents(db):
    assert {e.code: e.actual_length_m for e in db} == BUILTIN_LENGTHS
    assert db.codes == list(BUILTIN_LENGTHS)
    assert [e.actual_length_m for e in db.by_length] == sorted(BUILTIN_LENGTHS.values())
    assert db["A-320"].full_name == "Airbus A-320"
    assert load_type_db().codes == db.codes


@pytest.mark.parametrize("length, code", [
    (35.0, "LM100J"),
    (29.4, "G-550"),
    (29.5, "G-550"),
    (0.0, "CM2"),
    (32.5, "G-650"),
    (1000.0, "A-380"),
])
def test_classify_examples(db, length, code):
    assert classify_by_length(length, db) == code


def test_each_length_maps_to_itself(db):
    for e in db:
        assert classify_by_length(e.actual_length_m, db) == e.code


def test_boundaries_at_midpoints(db):
    entries = db.by_length
    for lo, hi in zip(entries, entries[1:]):
        mid = (lo.actual_length_m + hi.actual_length_m) / 2
        assert classify_by_length(mid, db) == lo.code
        assert classify_by_length(mid + 1e-9, db) == hi.code
        assert classify_by_length(mid - 1e-9, db) == lo.code


def test_equal_lengths_break_by_code():
    db = TypeDatabase([AircraftType("B", "b", 10), AircraftType("A", "a", 10)])
    assert classify_by_length(10, db) == "A"


@given(st.floats(0, 200), st.floats(0, 200))
def test_monotone(x, y):
    db = default_type_db()
    lo, hi = sorted((x, y))
    assert db[classify_by_length(lo, db)].actual_length_m <= db[classify_by_length(hi, db)].actual_length_m


@given(st.floats(0, 150), st.integers(0, 50))
def test_shift_invariance(x, shift):
    db = default_type_db()
    shifted = TypeDatabase([AircraftType(e.code, e.full_name, e.actual_length_m + shift) for e in db])
    assert classify_by_length(x, db) == classify_by_length(x + shift, shifted)


def test_load_csv(tmp_path):
    p = tmp_path / "types.csv"
    p.write_bytes(b"code,full_name,actual_length_m\r\nX,Test,10\r\n")
    db = load_type_db(p)
    assert db.codes == ["X"]
    for length in (0, 5, 10, 99):
        assert classify_by_length(length, db) == "X"


def test_inline_text():
    db = load_type_db("code,full_name,actual_length_m\nX,Test,10\nY,Other,20\n")
    assert db.codes == ["X", "Y"]


def test_duplicate_code():
    with pytest.raises(DuplicateCode):
        load_type_db("code,full_name,actual_length_m\nX,a,10\nX,b,12\n")


def test_non_positive_length():
    with pytest.raises(NonPositiveLength):
        load_type_db("code,full_name,actual_length_m\nX,a,0\n")


@pytest.mark.parametrize("text, line", [
    ("code,name,length\nX,a,1\n", 1),
    ("code,full_name,actual_length_m\nX,a,1\nY,b\n", 3),
    ("code,full_name,actual_length_m\nX,a,long\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        load_type_db(text)
    assert info.value.line == line
