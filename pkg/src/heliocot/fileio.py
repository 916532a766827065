"""Atomic file output and CSV plumbing shared by the stages."""
import csv
import io
import os
import tempfile
from pathlib import Path

from .errors import ParseError


def atomic_write_bytes(path, data):
    """Write ``data`` to ``path`` via a temp file in the same directory + rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def fmt_float(x):
    # repr is the shortest string that round-trips to the same double
    return repr(float(x))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_csv(path, header, rows):
    atomic_write_text(path, csv_text(header, rows))


def read_csv_rows(source, expected_header):
    """Yield ``(line_number, row)`` from a CSV file path or text stream.

    The header must match ``expected_header`` exactly.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            yield from read_csv_rows(fh, expected_header)
        return
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file, expected a header", line=1) from None
    if [h.strip() for h in header] != list(expected_header):
        raise ParseError(f"expected header {','.join(expected_header)}", line=1)
    for row in reader:
        if not row:
            continue
        if len(row) != len(expected_header):
            raise ParseError(
                f"expected {len(expected_header)} fields, got {len(row)}", line=reader.line_num
            )
        yield reader.line_num, row


def parse_float(text, line, name):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{name}: not a number: {text!r}", line=line) from None
