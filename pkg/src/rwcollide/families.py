"""Named chain families and the ``name:range[:key=value...]`` list syntax.

``cycle:3..10,complete:2..8,hypercube:2..4:eps=0.3`` expands to one chain
per integer in each inclusive range. The integer is the size parameter:
``n`` for cycles, complete graphs, paths and trap graphs, ``d`` for
hypercubes.
"""
from __future__ import annotations

import re

from .chain import (
    ChainSpec,
    build_complete,
    build_cycle,
    build_hypercube,
    build_path,
    build_trap_graph,
)
from .errors import InvalidParameter

FAMILY_NAMES = ("complete", "cycle", "directed-cycle", "hypercube", "path", "trap")
_RANGE = re.compile(r"^(\d+)(?:\.\.(\d+))?$")


def build_family(name: str, size: int, **params) -> ChainSpec:
    """Build one member of a named family."""
    if name == "complete":
        return build_complete(size)
    if name == "cycle":
        return build_cycle(size)
    if name == "directed-cycle":
        return build_cycle(size, directed=True)
    if name == "hypercube":
        eps = params.get("eps")
        return build_hypercube(size, None if eps is None else float(eps))
    if name == "path":
        return build_path(size)
    if name == "trap":
        return build_trap_graph(size, float(params.get("c", 12.0)))[0]
    raise InvalidParameter(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")


def parse_range(text: str) -> list[int]:
    m = _RANGE.match(text.strip())
    if not m:
        raise InvalidParameter(f"bad range {text!r}; expected N or A..B")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    if hi < lo:
        raise InvalidParameter(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_families(spec: str) -> list[tuple[str, int, dict]]:
    """Expand a family list into ``(name, size, params)`` triples without building chains."""
    out = []
    for item in filter(None, (s.strip() for s in spec.split(","))):
        parts = item.split(":")
        name = parts[0]
        if name not in FAMILY_NAMES:
            raise InvalidParameter(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")
        if len(parts) < 2:
            raise InvalidParameter(f"family {name!r} needs a size range, e.g. {name}:3..6")
        params = {}
        for kv in parts[2:]:
            if "=" not in kv:
                raise InvalidParameter(f"bad family option {kv!r}; expected key=value")
            k, v = kv.split("=", 1)
            try:
                params[k] = float(v)
            except ValueError:
                raise InvalidParameter(f"family option {k} must be numeric, got {v!r}") from None
        out.extend((name, size, params) for size in parse_range(parts[1]))
    if not out:
        raise InvalidParameter("empty family list")
    return out


def build_families(spec: str) -> list[ChainSpec]:
    return [build_family(name, size, **params) for name, size, params in parse_families(spec)]


def chain_label(chain: ChainSpec) -> str:
    p = chain.params or {}
    if chain.family == "hypercube":
        eps = p.get("eps")
        return f"hypercube(d={p.get('d')}" + (f", eps={eps})" if eps is not None else ")")
    if chain.family == "trap":
        return f"trap(n={p.get('n')}, C={p.get('c')})"
    if chain.family == "custom" and "graph" in p:
        return f"{p['graph']}(n={chain.n})"
    return f"{chain.family}(n={chain.n})"
