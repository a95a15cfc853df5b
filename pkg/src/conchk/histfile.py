"""History file format: one operation record per line, plus report helpers.

Records are whitespace-separated key=value tokens:

    proc=pa type=wr obj=x ival=1 oval=ok stime=0 rtime=10 id=0

Field rules: reads omit ival (their input is the placeholder token); pending
operations omit oval and rtime together; the literal token "bottom" denotes
the initial-value marker; integer-looking values parse as integers, anything
else stays a string.  ids are optional and assigned densely in file order
when absent.  Lines starting with '#' are comments; simulator output uses
them to embed the generating configuration for replay.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .history import BOTTOM, PLACEHOLDER, History, Operation, build_history


class HistoryFileError(ValueError):
    def __init__(self, message, line: Optional[int] = None, source: str = "<input>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


_FIELDS = {"proc", "type", "obj", "ival", "oval", "stime", "rtime", "id"}


def _parse_value(token: str):
    if token == "bottom":
        return BOTTOM
    try:
        return int(token)
    except ValueError:
        return token


def _format_value(v) -> str:
    if v is BOTTOM:
        return "bottom"
    return str(v)


def parse_history(text: str, source: str = "<input>") -> History:
    """Parse the line format into a validated History."""
    ops = []
    used_ids = set()
    auto_id = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = {}
        for token in line.split():
            if "=" not in token:
                raise HistoryFileError(f"malformed token {token!r}", lineno, source)
            key, _, value = token.partition("=")
            if key not in _FIELDS:
                raise HistoryFileError(f"unknown field {key!r}", lineno, source)
            if key in fields:
                raise HistoryFileError(f"duplicate field {key!r}", lineno, source)
            fields[key] = value
        for need in ("proc", "type", "obj", "stime"):
            if need not in fields:
                raise HistoryFileError(f"missing field {need!r}", lineno, source)
        try:
            stime = int(fields["stime"])
            rtime = int(fields["rtime"]) if "rtime" in fields else None
            op_id = int(fields["id"]) if "id" in fields else None
        except ValueError as exc:
            raise HistoryFileError(str(exc), lineno, source) from None
        typ = fields["type"]
        oval = _parse_value(fields["oval"]) if "oval" in fields else None
        if typ == "rd":
            if "ival" in fields:
                raise HistoryFileError("reads take no input value", lineno, source)
            ival = PLACEHOLDER
        else:
            if "ival" not in fields:
                raise HistoryFileError("updates need an input value", lineno, source)
            ival = _parse_value(fields["ival"])
            if oval is None and "rtime" in fields:
                oval = "ok"
        if op_id is None:
            while auto_id in used_ids:
                auto_id += 1
            op_id = auto_id
        if op_id in used_ids:
            raise HistoryFileError(f"duplicate id {op_id}", lineno, source)
        used_ids.add(op_id)
        try:
            ops.append(
                Operation(op_id, fields["proc"], typ, fields["obj"], ival, oval,
                          stime, rtime)
            )
        except ValueError as exc:
            raise HistoryFileError(str(exc), lineno, source) from None
    try:
        return build_history(ops)
    except ValueError as exc:
        raise HistoryFileError(str(exc), None, source) from None


def load_history(path: str) -> History:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_history(fh.read(), source=path)


def format_history(h: History, header: Iterable[str] = ()) -> str:
    """Serialize a history; round-trips through parse_history."""
    lines = [f"# {line}" for line in header]
    for op in h.ops:
        parts = [f"proc={op.proc}", f"type={op.type}", f"obj={op.obj}"]
        if op.ival is not PLACEHOLDER:
            parts.append(f"ival={_format_value(op.ival)}")
        if op.oval is not None:
            parts.append(f"oval={_format_value(op.oval)}")
        parts.append(f"stime={op.stime}")
        if op.rtime is not None:
            parts.append(f"rtime={op.rtime}")
        parts.append(f"id={op.id}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
