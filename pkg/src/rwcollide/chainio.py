"""Versioned plain-text chain files.

Layout::

    # rwcollide chain-spec
    version 1
    n 3
    family complete
    params {"n": 3}
    labels ["a", "b", "c"]        (optional)
    entries 6
    0 1 0.50000000000000000
    ...
    end

Probabilities are written with 17 significant digits, which round-trips
IEEE doubles exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

from ._io import atomic_write_text
from .chain import ChainSpec
from .errors import ChainFormatError

FORMAT_VERSION = 1
MAGIC = "# rwcollide chain-spec"
_HEADER_FIELDS = ("version", "n", "family", "params", "labels", "entries")
_REQUIRED = ("version", "n", "entries")


def dumps(chain: ChainSpec) -> str:
    lines = [MAGIC, f"version {FORMAT_VERSION}", f"n {chain.n}", f"family {chain.family}"]
    lines.append("params " + json.dumps(chain.params, sort_keys=True))
    if chain.labels is not None:
        lines.append("labels " + json.dumps(list(chain.labels)))
    triples = list(chain.triples())
    lines.append(f"entries {len(triples)}")
    lines.extend(f"{x} {y} {p:.17g}" for x, y, p in triples)
    lines.append("end")
    return "\n".join(lines) + "\n"


def loads(text: str) -> ChainSpec:
    header: dict[str, str] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw or raw.startswith("#"):
            continue
        key, _, value = raw.partition(" ")
        if key not in _HEADER_FIELDS:
            raise ChainFormatError(f"unknown header key {key!r}", line=i, field=key)
        header[key] = value.strip()
        if key == "entries":
            break
    for key in _REQUIRED:
        if key not in header:
            raise ChainFormatError("missing required field", field=key)
    try:
        version = int(header["version"])
    except ValueError:
        raise ChainFormatError("not an integer", field="version") from None
    if version != FORMAT_VERSION:
        raise ChainFormatError(f"unsupported version {version} (expected {FORMAT_VERSION})", field="version")
    try:
        n = int(header["n"])
        count = int(header["entries"])
    except ValueError as e:
        raise ChainFormatError(f"bad integer: {e}", field="n/entries") from None
    try:
        params = json.loads(header.get("params", "{}"))
        labels = json.loads(header["labels"]) if "labels" in header else None
    except json.JSONDecodeError as e:
        raise ChainFormatError(f"invalid JSON: {e}", field="params/labels") from None

    triples = []
    while len(triples) < count:
        if i >= len(lines):
            raise ChainFormatError(
                f"file ends after {len(triples)} of {count} entries", line=i, field="entries"
            )
        raw = lines[i].strip()
        i += 1
        if not raw or raw.startswith("#"):
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise ChainFormatError("expected 'state target probability'", line=i, field="entries")
        try:
            triples.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as e:
            raise ChainFormatError(str(e), line=i, field="entries") from None
    tail = [ln.strip() for ln in lines[i:] if ln.strip() and not ln.strip().startswith("#")]
    if tail[:1] != ["end"]:
        raise ChainFormatError("missing 'end' terminator", line=i + 1, field="end")
    return ChainSpec.from_triples(n, triples, labels=labels, family=header.get("family", "custom"), params=params)


def write_chain(chain: ChainSpec, path) -> Path:
    return atomic_write_text(path, dumps(chain))


def read_chain(path) -> ChainSpec:
    return loads(Path(path).read_text(encoding="utf-8"))
