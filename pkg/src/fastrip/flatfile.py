"""Flat ``key = value`` text files with ``#`` comments."""

from .errors import ConfigParse


def parse_flat(text, allowed=None):
    """Parse ``key = value`` lines into an ordered dict of strings.

    Blank lines and everything after ``#`` are ignored. Duplicate keys and,
    when ``allowed`` is given, unknown keys raise ``ConfigParse``.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParse(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigParse(f"line {lineno}: empty key")
        if allowed is not None and key not in allowed:
            raise ConfigParse(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigParse(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def format_flat(pairs):
    return "".join(f"{key} = {value}\n" for key, value in pairs)


def parse_int(key, value):
    try:
        return int(value, 0)
    except ValueError:
        raise ConfigParse(f"{key}: expected an integer, got {value!r}") from None


def parse_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigParse(f"{key}: expected a number, got {value!r}") from None


def parse_bool(key, value):
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigParse(f"{key}: expected a boolean, got {value!r}")
