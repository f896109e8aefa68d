"""The palette-driven 4-graph on 2**width vertices, plus hypergraph handles.

A quadruple v1 < v2 < v3 < v4 with deltas (d1, d2, d3) is an edge exactly
when one of nine rules fires.  The rules partition by the shape of the delta
triple (adjacent deltas always differ):

  Xi (monotone d1<d2<d3 or d1>d2>d3), colors on (d1,d2), (d2,d3), (d1,d3):
    Xi1  red,  red,  blue
    Xi2  red,  blue, green
    Xi3  blue, red,  green
  Lambda (d1<d2>d3): always an edge, palette never consulted.
  Gamma (d1>d2<d3), where d1 != d3 is automatic for realizable quadruples:
    Gamma1  d1<d3 and all three pairs red
    Gamma2  d1<d3 and none of the three pairs red
    Gamma3  d1>d3, (d1,d2) and (d1,d3) red, (d2,d3) not red
    Gamma4  d1>d3, (d1,d3) blue, (d2,d3) red
    Gamma5  d1>d3, (d1,d2) not blue, (d1,d3) green, (d2,d3) red

Gamma-shaped triples whose colors match no sub-case are non-edges; the rule
list is definitional, not a fallback.  Any total pair palette is accepted:
the clique-freeness of the construction does not depend on palette quality.

This module also owns the generic ``HypergraphHandle`` (explicit edge sets
or implicit rule-backed membership), window materialization, and the
ER-HGRAPH file format shared with the stepping-up lift.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .bitdelta import delta
from .coloring import BLUE, GREEN, RED, PairColoring, pair_index

XI1, XI2, XI3 = "Xi1", "Xi2", "Xi3"
LAM = "Lambda"
GAMMA1, GAMMA2, GAMMA3, GAMMA4, GAMMA5 = (
    "Gamma1", "Gamma2", "Gamma3", "Gamma4", "Gamma5")
NO_RULE = "none"

ALL_RULES = (XI1, XI2, XI3, LAM, GAMMA1, GAMMA2, GAMMA3, GAMMA4, GAMMA5)


def edge_rule(phi: PairColoring, quad) -> str:
    """The unique rule tag the quadruple fires, or "none"."""
    v1, v2, v3, v4 = quad
    if not v1 < v2 < v3 < v4:
        raise ValueError("quadruple must be strictly increasing")
    d1 = delta(v1, v2)
    d2 = delta(v2, v3)
    d3 = delta(v3, v4)
    if max(d1, d2, d3) >= phi.size:
        raise ValueError("delta value outside palette ground set")
    return _rule_of_deltas(phi.colors, d1, d2, d3)


def edge_predicate(phi: PairColoring, quad) -> tuple[bool, str]:
    tag = edge_rule(phi, quad)
    return tag != NO_RULE, tag


def _rule_of_deltas(colors: bytes, d1: int, d2: int, d3: int) -> str:
    if d1 < d2:
        if d2 < d3:
            return _xi(colors, d1, d2, d3)
        return LAM  # d1 < d2 > d3
    if d2 > d3:
        return _xi(colors, d1, d2, d3)  # decreasing
    # d1 > d2 < d3
    c12 = colors[pair_index(d1, d2)]
    c23 = colors[pair_index(d2, d3)]
    c13 = colors[pair_index(d1, d3)]
    if d1 < d3:
        if c12 == RED and c13 == RED and c23 == RED:
            return GAMMA1
        if c12 != RED and c13 != RED and c23 != RED:
            return GAMMA2
        return NO_RULE
    if c23 == RED:
        if c13 == BLUE:
            return GAMMA4
        if c13 == GREEN and c12 != BLUE:
            return GAMMA5
        return NO_RULE
    if c12 == RED and c13 == RED:
        return GAMMA3
    return NO_RULE


def _xi(colors: bytes, d1: int, d2: int, d3: int) -> str:
    c12 = colors[pair_index(d1, d2)]
    c23 = colors[pair_index(d2, d3)]
    c13 = colors[pair_index(d1, d3)]
    if c12 == RED and c23 == RED and c13 == BLUE:
        return XI1
    if c12 == RED and c23 == BLUE and c13 == GREEN:
        return XI2
    if c12 == BLUE and c23 == RED and c13 == GREEN:
        return XI3
    return NO_RULE


def _h4_edge_bool(colors: bytes, v1: int, v2: int, v3: int, v4: int) -> bool:
    d1 = (v1 ^ v2).bit_length() - 1
    d2 = (v2 ^ v3).bit_length() - 1
    d3 = (v3 ^ v4).bit_length() - 1
    return _rule_of_deltas(colors, d1, d2, d3) != NO_RULE


MAX_LIFT_BASE = 63  # lifted vertices must fit a machine word
EXPLICIT_VERTEX_CAP = 4096


@dataclass(frozen=True)
class HypergraphHandle:
    """A k-uniform hypergraph: explicit edge set or implicit edge oracle.

    kinds:
      "explicit"  edges is a frozenset of strictly increasing k-tuples
      "h4"        membership from the palette edge rules (k = 4)
      "stepup"    membership from the stepping-up lift of ``base``
    """

    k: int
    num_vertices: int
    kind: str
    edges: frozenset | None = None
    coloring: PairColoring | None = None
    base: "HypergraphHandle | None" = None

    def has_edge(self, e) -> bool:
        e = tuple(e)
        if len(e) != self.k:
            raise ValueError(f"edge must have {self.k} vertices")
        if self.kind == "explicit":
            return e in self.edges
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("edge vertices must be strictly increasing")
        if e[-1] >= self.num_vertices or e[0] < 0:
            raise ValueError("edge vertex outside graph")
        if self.kind == "h4":
            return _h4_edge_bool(self.coloring.colors, *e)
        if self.kind == "stepup":
            from . import stepup

            return stepup._lift_edge_bool(self.base, self.k, e)
        raise ValueError(f"unknown handle kind {self.kind!r}")

    def edge_count(self) -> int:
        if self.kind != "explicit":
            raise ValueError("edge_count needs an explicit handle")
        return len(self.edges)


def explicit_handle(k: int, num_vertices: int, edges) -> HypergraphHandle:
    cleaned = set()
    for e in edges:
        e = tuple(e)
        if len(e) != k or any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError(f"bad edge {e}")
        if e[0] < 0 or e[-1] >= num_vertices:
            raise ValueError(f"edge {e} outside vertex range")
        cleaned.add(e)
    return HypergraphHandle(k, num_vertices, "explicit", edges=frozenset(cleaned))


def complete_handle(k: int, num_vertices: int) -> HypergraphHandle:
    return explicit_handle(k, num_vertices,
                           combinations(range(num_vertices), k))


def build_h4(width: int, phi: PairColoring, mode: str = "implicit",
             max_vertices: int = EXPLICIT_VERTEX_CAP) -> HypergraphHandle:
    """The rule-defined 4-graph on 2**width vertices.

    The palette must cover every possible delta value, i.e. phi.size >= width.
    Explicit mode enumerates all C(N, 4) membership queries and is refused
    above ``max_vertices``.
    """
    if width < 1:
        raise ValueError("width must be positive")
    if phi.size < width:
        raise ValueError("palette ground set must cover all delta values")
    n = 1 << width
    implicit = HypergraphHandle(4, n, "h4", coloring=phi)
    if mode == "implicit":
        return implicit
    if mode != "explicit":
        raise ValueError(f"unknown mode {mode!r}")
    if n > max_vertices:
        raise ValueError(f"explicit mode refused above {max_vertices} vertices")
    edges = [e for e in combinations(range(n), 4)
             if _h4_edge_bool(phi.colors, *e)]
    return explicit_handle(4, n, edges)


WINDOW_CAP = 64


def window_materialize(h: HypergraphHandle, lo: int, hi: int,
                       cap: int = WINDOW_CAP) -> HypergraphHandle:
    """Explicit induced sub-hypergraph on [lo, hi), vertices relabeled to 0..."""
    if not 0 <= lo < hi <= h.num_vertices:
        raise ValueError("bad window bounds")
    if hi - lo > cap:
        raise ValueError(f"window wider than cap {cap}")
    width = hi - lo
    edges = []
    for rel in combinations(range(width), h.k):
        if h.has_edge(tuple(lo + r for r in rel)):
            edges.append(rel)
    return explicit_handle(h.k, width, edges)


# hypergraph file format:
#   ER-HGRAPH v1
#   k=<int> N=<int> M=<int>         (explicit; M edge lines follow, sorted)
# or, for implicit lifted graphs:
#   k=<int> N=<int> M=implicit
#   backing=stepup base=<path> k=<int>

_MAGIC = "ER-HGRAPH v1"


def write_hypergraph(h: HypergraphHandle, path, base_path=None) -> None:
    path = Path(path)
    if h.kind == "explicit":
        lines = [_MAGIC, f"k={h.k} N={h.num_vertices} M={len(h.edges)}"]
        for e in sorted(h.edges):
            lines.append(" ".join(str(v) for v in e))
        path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
        return
    if h.kind == "stepup":
        if base_path is None:
            raise ValueError("writing a lifted graph needs base_path")
        lines = [
            _MAGIC,
            f"k={h.k} N={h.num_vertices} M=implicit",
            f"backing=stepup base={base_path} k={h.k}",
        ]
        path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
        return
    raise ValueError(f"cannot serialize handle kind {h.kind!r}")


def read_hypergraph(path) -> HypergraphHandle:
    path = Path(path)
    lines = path.read_bytes().decode("ascii").split("\n")
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"not a {_MAGIC} file: {path}")
    fields = dict(part.split("=", 1) for part in lines[1].split())
    k = int(fields["k"])
    n = int(fields["N"])
    if fields["M"] == "implicit":
        backing = dict(part.split("=", 1) for part in lines[2].split())
        if backing.get("backing") != "stepup":
            raise ValueError(f"unknown backing {backing.get('backing')!r}")
        base_file = Path(backing["base"])
        if not base_file.is_absolute():
            base_file = path.parent / base_file
        base = read_hypergraph(base_file)
        from . import stepup

        lift = stepup.build_stepup(base, int(backing["k"]))
        if lift.num_vertices != n or lift.k != k:
            raise ValueError("lift manifest disagrees with base graph")
        return lift
    m = int(fields["M"])
    edges = []
    for line in lines[2:2 + m]:
        edges.append(tuple(int(tok) for tok in line.split()))
    if len(edges) != m:
        raise ValueError("edge count mismatch")
    return explicit_handle(k, n, edges)
