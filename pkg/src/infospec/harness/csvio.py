"""CSV emission: header row, 17 significant digits, UTF-8, LF line endings."""

import csv
import io
import sys

COLUMNS = ("experiment", "metric", "n", "gamma", "seed", "value", "status", "params")


def format_number(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool,)):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def render_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([
            r.experiment,
            r.metric,
            format_number(r.n),
            format_number(r.gamma),
            format_number(r.seed),
            format_number(r.value),
            r.status,
            r.params,
        ])
    return buf.getvalue()


def emit_csv(rows, path) -> None:
    """Write ``rows`` to ``path``; ``"-"`` writes to standard output."""
    text = render_csv(rows)
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
