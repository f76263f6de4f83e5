"""JSON schemas for graphs, posets, copresheaves and results."""

from __future__ import annotations

import json

from .intlinalg import IntMatrix
from .orbit import Graph
from .posets import GradedPoset, build_poset
from .sheaves import Copresheaf


class BadInput(Exception):
    """Malformed or schema-violating input."""


def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read JSON from {path}: {exc}") from exc


def parse_graph(data) -> Graph:
    """{"n": int, "edges": [[i, j], ...]} or {"complete": n}."""
    if not isinstance(data, dict):
        raise BadInput("graph JSON must be an object")
    if "complete" in data:
        n = data["complete"]
        if not isinstance(n, int) or n < 1:
            raise BadInput("complete: expects a positive integer")
        return Graph.complete(n)
    try:
        n = data["n"]
        edges = data["edges"]
        if not isinstance(n, int) or n < 1:
            raise BadInput("n must be a positive integer")
        return Graph.make(n, [tuple(e) for e in edges])
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"bad graph JSON: {exc}") from exc


def parse_poset(data) -> GradedPoset:
    """{"elements": [labels], "covers": [[lo, hi], ...], "rank": [ints]}."""
    try:
        elements = [str(e) for e in data["elements"]]
        covers = [(str(lo), str(hi)) for lo, hi in data["covers"]]
        ranks = [int(r) for r in data["rank"]]
        if len(ranks) != len(elements):
            raise BadInput("rank list must parallel elements")
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"bad poset JSON: {exc}") from exc
    from .posets import Cyclic, NotGraded
    try:
        return build_poset(elements, covers, dict(zip(elements, ranks)))
    except (Cyclic, NotGraded, ValueError) as exc:
        raise BadInput(f"invalid poset: {exc}") from exc


def parse_copresheaf(data, poset: GradedPoset) -> Copresheaf:
    """{"ranks": [ints], "extensions": {"lo->hi": [[row-major ints]]}}.

    ``ranks`` parallels the poset's element list in its original order;
    extensions are keyed by cover pairs and default to zero maps.
    """
    try:
        ranks = [int(r) for r in data["ranks"]]
        raw = data.get("extensions", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"bad copresheaf JSON: {exc}") from exc
    if len(ranks) != poset.n:
        raise BadInput("ranks list must parallel the poset elements")
    rank_of = dict(zip(poset.labels, ranks))
    maps = {}
    seen = set()
    for key, rows in raw.items():
        if "->" not in key:
            raise BadInput(f"extension key {key!r} is not 'lo->hi'")
        lo_lab, hi_lab = key.split("->", 1)
        if lo_lab not in poset.index or hi_lab not in poset.index:
            raise BadInput(f"extension key {key!r} names unknown elements")
        lo, hi = poset.index[lo_lab], poset.index[hi_lab]
        if (lo, hi) not in set(poset.covers):
            raise BadInput(f"extension key {key!r} is not a cover")
        try:
            mat = IntMatrix(rank_of[hi_lab], rank_of[lo_lab],
                            [[int(x) for x in row] for row in rows])
        except (TypeError, ValueError) as exc:
            raise BadInput(f"bad matrix at {key!r}: {exc}") from exc
        maps[(lo, hi)] = mat
        seen.add((lo, hi))
    for lo, hi in poset.covers:
        if (lo, hi) not in seen:
            maps[(lo, hi)] = IntMatrix(rank_of[poset.labels[hi]],
                                       rank_of[poset.labels[lo]])
    try:
        return Copresheaf(poset, [rank_of[lab] for lab in poset.labels], maps)
    except ValueError as exc:
        raise BadInput(f"invalid copresheaf: {exc}") from exc


def dumps(data) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
