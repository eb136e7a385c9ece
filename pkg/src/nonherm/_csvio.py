"""Artifact output helpers: schema-versioned comment headers, CSV rows.

Every artifact starts with ``# schema=nonherm.<kind>/<version>`` followed by
one ``# key = value`` line per resolved-config entry (sorted), so outputs
are self-describing and byte-reproducible modulo an optional timestamp
entry the CLI injects under the key ``created``.
"""

import contextlib
import sys

SCHEMA_VERSION = 1


def header_lines(kind, config=None):
    lines = [f"# schema=nonherm.{kind}/{SCHEMA_VERSION}"]
    for key in sorted(config or {}):
        lines.append(f"# {key} = {config[key]}")
    return lines


@contextlib.contextmanager
def open_out(path):
    """Open a text sink; '-' means stdout (left open)."""
    if path == "-" or path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def write_lines(fh, lines):
    for line in lines:
        fh.write(line + "\n")


def fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)
