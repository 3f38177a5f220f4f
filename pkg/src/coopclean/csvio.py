"""CSV output with a commented metadata header.

Every file starts with ``#`` lines naming the tool version, the random
generator, the Chernoff exponent convention and every parameter used.  Floats
are written in shortest round-trip form, so values re-parse exactly.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from . import __version__
from .bounds import CHERNOFF_CONVENTION
from .spreading import RNG_ALGORITHM, RNG_VERSION


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def metadata_lines(params: dict) -> list[str]:
    lines = [
        f"# tool: coopclean {__version__}",
        f"# rng: {RNG_ALGORITHM} ({RNG_VERSION})",
        f"# chernoff: {CHERNOFF_CONVENTION}",
    ]
    for key in sorted(params):
        lines.append(f"# param {key} = {fmt(params[key])}")
    return lines


def render_csv(header, rows, params: dict) -> str:
    buf = io.StringIO()
    for line in metadata_lines(params):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, params: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(header, rows, params), encoding="utf-8")
    return path


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """Returns ``(params, header, rows)``; params come back as strings."""
    params = {}
    body = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# param "):
            key, _, value = line[len("# param "):].partition(" = ")
            params[key] = value
        elif line.startswith("#"):
            continue
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    return params, header, list(reader)
