"""Line-delimited manifest files: one JSON object per line after a header.

The header line pins the schema name and version so readers can reject files
they do not understand, e.g. {"schema": "fascot/samples", "version": 1}.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

SAMPLES_SCHEMA = "fascot/samples"
ATTEMPTS_SCHEMA = "fascot/attempts"
PAIRS_SCHEMA = "fascot/pairs"
HARDCASES_SCHEMA = "fascot/hardcases"
STAGE1_SCHEMA = "fascot/stage1"
STAGE2_SCHEMA = "fascot/stage2"

VERSION = 1


class MalformedManifestError(ValueError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


def header_line(schema: str, version: int = VERSION) -> str:
    return json.dumps({"schema": schema, "version": version}, ensure_ascii=False)


def dump_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False)


def write_manifest(path: str | Path, schema: str, rows: Iterable[dict], version: int = VERSION) -> int:
    """Write header plus rows; returns the number of rows written."""
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        f.write(header_line(schema, version) + "\n")
        for row in rows:
            f.write(dump_line(row) + "\n")
            n += 1
    return n


def read_manifest(path: str | Path, schema: str, version: int = VERSION) -> Iterator[dict]:
    """Yield row objects, checking the header against the expected schema."""
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedManifestError(line_no, f"invalid JSON: {e}") from None
            if not isinstance(obj, dict):
                raise MalformedManifestError(line_no, "expected an object")
            if line_no == 1:
                if obj.get("schema") != schema:
                    raise MalformedManifestError(1, f"expected schema {schema!r}, got {obj.get('schema')!r}")
                if obj.get("version") != version:
                    raise MalformedManifestError(1, f"unsupported version {obj.get('version')!r}")
                continue
            yield obj


def append_lines(path: str | Path, schema: str, rows: Iterable[dict], version: int = VERSION) -> None:
    """Append rows, writing the header first when the file is new or empty."""
    p = Path(path)
    need_header = not p.exists() or p.stat().st_size == 0
    with open(p, "a", encoding="utf-8") as f:
        if need_header:
            f.write(header_line(schema, version) + "\n")
        for row in rows:
            f.write(dump_line(row) + "\n")
