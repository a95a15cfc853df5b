import pytest

from conchk import BOTTOM, PLACEHOLDER, build_history, read, write
from conchk.histfile import (
    HistoryFileError,
    format_history,
    parse_history,
)
from conchk.history import Operation


SAMPLE = """\
# generated by hand
proc=pa type=wr obj=x ival=1 oval=ok stime=0 rtime=10
proc=pb type=rd obj=x oval=1 stime=20 rtime=30
"""


def test_parse_basic():
    h = parse_history(SAMPLE)
    assert len(h) == 2
    w, r = h.ops
    assert w.id == 0 and w.type == "wr" and w.ival == 1 and w.oval == "ok"
    assert r.id == 1 and r.ival is PLACEHOLDER and r.oval == 1


def test_bottom_and_pending_tokens():
    text = (
        "proc=pa type=wr obj=x ival=2 stime=0\n"  # pending write
        "proc=pb type=rd obj=x oval=bottom stime=5 rtime=6\n"
    )
    h = parse_history(text)
    w, r = h.ops
    assert not w.returned and w.oval is None
    assert r.oval is BOTTOM


def test_explicit_ids_and_auto_assignment():
    text = (
        "proc=pa type=wr obj=x ival=1 oval=ok stime=0 rtime=1 id=5\n"
        "proc=pa type=wr obj=x ival=2 oval=ok stime=2 rtime=3\n"
    )
    h = parse_history(text)
    assert sorted(op.id for op in h.ops) == [0, 5]


def test_roundtrip():
    h = build_history(
        [
            write(0, "pa", "x", 1, 0, 10),
            read(1, "pb", "x", BOTTOM, 20, 30),
            Operation(2, "pc", "wr", "y", "blob", None, 25, None),
        ]
    )
    text = format_history(h, header=["roundtrip check"])
    assert parse_history(text) == h
    assert text.startswith("# roundtrip check\n")


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("proc=pa obj=x stime=0", "missing field 'type'"),
        ("proc=pa type=rd obj=x ival=1 stime=0 rtime=1", "reads take no input"),
        ("proc=pa type=wr obj=x stime=0 rtime=1", "updates need an input"),
        ("proc=pa type=wr obj=x ival=1 zzz=3 stime=0 rtime=1", "unknown field"),
        ("proc=pa type=wr obj=x ival=1 stime=0 rtime=1 rtime=2", "duplicate field"),
        ("proc=pa type=wr obj=x ival=1 oval stime=0 rtime=1", "malformed token"),
        ("proc=pa type=wr obj=x ival=1 oval=ok stime=5 rtime=1", "precedes stime"),
    ],
)
def test_line_errors_carry_line_numbers(line, fragment):
    text = "# header\n" + line + "\n"
    with pytest.raises(HistoryFileError) as err:
        parse_history(text, source="case.hist")
    assert "case.hist:2" in str(err.value)
    assert fragment in str(err.value)


def test_duplicate_id_error():
    text = (
        "proc=pa type=wr obj=x ival=1 oval=ok stime=0 rtime=1 id=3\n"
        "proc=pa type=wr obj=x ival=2 oval=ok stime=2 rtime=3 id=3\n"
    )
    with pytest.raises(HistoryFileError, match="duplicate id 3"):
        parse_history(text)
