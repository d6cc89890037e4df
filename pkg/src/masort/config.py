"""Flat ``key = value`` configuration files.

Grammar, one entry per line::

    # comment
    key = value

Keys are case-sensitive; ``-`` and ``_`` are interchangeable. Blank lines
and lines starting with ``#`` are ignored. Values are parsed by the caller
according to the key's declared type. Lists use ``,`` between items and
``;`` between groups, e.g. ``occlusion_windows = 1,20,29; 2,40,45``.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParseError


def normalize_key(key: str) -> str:
    return key.strip().replace("-", "_")


def read_config(path) -> dict[str, str]:
    """Return the raw ``{key: value}`` strings of a config file."""
    out: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", path, lineno)
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if not key:
            raise ParseError("empty key", path, lineno)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", path, lineno)
        out[key] = value.strip()
    return out


def parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_groups(value: str, item=float) -> tuple[tuple, ...]:
    """``"1,2; 3,4"`` -> ``((1, 2), (3, 4))``."""
    groups = [g.strip() for g in value.split(";") if g.strip()]
    return tuple(tuple(item(x) for x in g.split(",")) for g in groups)


def parse_tuple(value: str, item=float) -> tuple:
    return tuple(item(x) for x in value.split(",") if x.strip())
