"""Ground-truth sidecar files.

One text file per image, one ellipse per line::

    # comment
    ellipse cx cy a b theta_deg
"""

from __future__ import annotations

from pathlib import Path

from .ellipse import EllipseParams
from .errors import DatasetFormatError

SIDECAR_SUFFIX = ".txt"


def read_truth(path) -> list[EllipseParams]:
    path = Path(path)
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] != "ellipse" or len(parts) != 6:
                raise DatasetFormatError(path, lineno, f"expected 'ellipse cx cy a b theta_deg', got {line!r}")
            try:
                cx, cy, a, b, th = (float(v) for v in parts[1:])
                out.append(EllipseParams.from_degrees(cx, cy, a, b, th))
            except ValueError as exc:
                raise DatasetFormatError(path, lineno, str(exc)) from None
    return out


def format_truth(ellipses) -> str:
    lines = ["# ellipse cx cy a b theta_deg"]
    for e in ellipses:
        lines.append(f"ellipse {e.cx:.6g} {e.cy:.6g} {e.a:.6g} {e.b:.6g} {e.theta_deg:.6g}")
    return "\n".join(lines) + "\n"


def write_truth(path, ellipses):
    Path(path).write_text(format_truth(ellipses))
