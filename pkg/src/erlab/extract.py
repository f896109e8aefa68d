"""Layered local-maxima scaffolds and verified K5 extraction.

Starting from the full delta sequence of a vertex set Q, each layer keeps
the first beta_t local maxima of the previous layer, where beta_t divides
the previous budget by ``shrink``.  Layers satisfy the dominance property
checked by ``check_star``: between consecutive layer elements every delta is
below the larger of the two, so deltas of selected vertices are readable off
the scaffold.

``find_k5`` turns the scaffold into a verified 5-clique of the palette
4-graph.  A monotone run of ``run_cap`` consecutive layer elements routes
through the good-quadruple certificate of the palette; a fully built
scaffold routes through the endgame: four pair colors near the top are
forced red (violations are themselves converted into explicit 5-cliques by
the cascade constructions), and the red pattern assembles a clique through
the Gamma and Lambda rules.  Every returned witness is re-verified edge by
edge; failures raise with a full trace instead of returning anything.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .bitdelta import OrderedVertexSet, delta, delta_sequence
from .coloring import BLUE, GREEN, RED, COLOR_CHARS, PairColoring, find_good_4tuple
from .h4 import build_h4
from .search import is_clique

BLUE_FLOOR = 4   # scaffold depth feeding the blue-exclusion cascade
GREEN_FLOOR = 8  # scaffold depth feeding the green-exclusion cascade


@dataclass(frozen=True)
class ExtractParams:
    levels: int
    shrink: int
    run_cap: int

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("need at least one layer")
        if self.shrink < 2:
            raise ValueError("shrink must be at least 2")
        if self.run_cap < 4:
            raise ValueError("run cap below 4 cannot host a good quadruple")


def layer_sizes(q_size: int, shrink: int, levels: int) -> tuple[int, ...]:
    """Requested layer sizes beta_t = (q_size - 1) // shrink**t for t in 1..levels."""
    return tuple((q_size - 1) // shrink ** t for t in range(1, levels + 1))


@dataclass(frozen=True)
class Obstruction:
    kind: str  # "monotone-run" | "underfill"
    level: int
    positions: tuple[int, ...] = ()
    found: int = 0
    needed: int = 0


@dataclass(frozen=True)
class LayeredMaxima:
    vertices: tuple[int, ...]
    width: int
    deltas: tuple[int, ...]
    layers: tuple[tuple[int, ...], ...]  # layers[0] is every delta position
    params: ExtractParams

    def nearest(self, pos: int, level: int, side: str) -> int | None:
        """Closest element of layers[level] strictly left or right of pos."""
        layer = self.layers[level]
        i = bisect_left(layer, pos)
        if side == "left":
            return layer[i - 1] if i > 0 else None
        if side == "right":
            if i < len(layer) and layer[i] == pos:
                i += 1
            return layer[i] if i < len(layer) else None
        raise ValueError("side must be 'left' or 'right'")


def layered_maxima(Q: OrderedVertexSet, params: ExtractParams):
    """Build the scaffold greedily, or report the obstruction that stops it.

    Before extracting each layer the previous one is scanned for a monotone
    run of ``run_cap`` consecutive elements (which routes to the good-
    quadruple branch); extraction fails with an underfill obstruction when
    fewer than beta_t maxima exist.
    """
    verts = tuple(Q)
    if len(verts) < params.shrink ** params.levels + 1:
        raise ValueError("vertex set smaller than shrink**levels + 1")
    deltas = tuple(delta(verts[i], verts[i + 1]) for i in range(len(verts) - 1))
    layers = [tuple(range(len(deltas)))]
    betas = layer_sizes(len(verts), params.shrink, params.levels)
    for t in range(1, params.levels + 1):
        prev = layers[-1]
        run = _layer_run(deltas, prev, params.run_cap)
        if run is not None:
            return Obstruction("monotone-run", t - 1, run)
        maxima = [prev[i] for i in range(1, len(prev) - 1)
                  if deltas[prev[i - 1]] < deltas[prev[i]] > deltas[prev[i + 1]]]
        if len(maxima) < betas[t - 1]:
            return Obstruction("underfill", t, (), len(maxima), betas[t - 1])
        layers.append(tuple(maxima[:betas[t - 1]]))
    return LayeredMaxima(verts, Q.width, deltas, tuple(layers), params)


def _layer_run(deltas, layer, cap):
    if len(layer) < cap:
        return None
    length = 1
    for i in range(1, len(layer)):
        up = deltas[layer[i]] > deltas[layer[i - 1]]
        if i >= 2 and up == (deltas[layer[i - 1]] > deltas[layer[i - 2]]):
            length += 1
        else:
            length = 2
        if length >= cap:
            return tuple(layer[i - cap + 1:i + 1])
    return None


@dataclass(frozen=True)
class StarCheck:
    ok: bool
    violation: tuple | None = None  # (level, a, x, b); x None for equal pair


def check_star(lm: LayeredMaxima) -> StarCheck:
    """Re-derive the dominance property for every layer by direct scan."""
    d = lm.deltas
    for level, layer in enumerate(lm.layers):
        for a, b in zip(layer, layer[1:]):
            if d[a] == d[b]:
                return StarCheck(False, (level, a, None, b))
            cap = max(d[a], d[b])
            for x in range(a + 1, b):
                if d[x] >= cap:
                    return StarCheck(False, (level, a, x, b))
    return StarCheck(True)


def layers_nested(lm: LayeredMaxima) -> bool:
    for upper, lower in zip(lm.layers[1:], lm.layers):
        lower_set = set(lower)
        if any(p not in lower_set for p in upper):
            return False
    return True


@dataclass(frozen=True)
class NeighborMap:
    level: int
    left: dict
    right: dict
    boundary: tuple[int, ...]


def neighbor_map(lm: LayeredMaxima, level: int) -> NeighborMap:
    """Closest previous-layer elements on both sides of each layer position.

    Verifies the interval dominance: every delta strictly between the two
    neighbors is below the delta at the position itself.  Positions missing
    a neighbor are flagged as boundary and excluded from endgame use.
    """
    if not 1 <= level < len(lm.layers):
        raise ValueError("level out of range")
    d = lm.deltas
    left, right, boundary = {}, {}, []
    for p in lm.layers[level]:
        lo = lm.nearest(p, level - 1, "left")
        hi = lm.nearest(p, level - 1, "right")
        if lo is None or hi is None:
            boundary.append(p)
            continue
        for x in range(lo, hi + 1):
            if x != p and d[x] >= d[p]:
                raise ValueError(
                    f"dominance fails at level {level}: delta[{x}] >= delta[{p}]")
        left[p] = lo
        right[p] = hi
    return NeighborMap(level, left, right, tuple(boundary))


class ExtractionError(RuntimeError):
    """No verified clique could be assembled; carries the attempt trace."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)


@dataclass(frozen=True)
class K5Witness:
    vertices: tuple[int, ...]
    branch: str  # "monotone-run" | "layered"
    steps: tuple[str, ...]
    verified: bool


class _Ctx:
    def __init__(self, phi, lm, handle):
        self.phi = phi
        self.lm = lm
        self.handle = handle
        self.layer_sets = [set(layer) for layer in lm.layers]
        self.steps = []

    def col(self, p, q):
        a, b = self.lm.deltas[p], self.lm.deltas[q]
        if a == b:
            raise ExtractionError(
                f"positions {p}, {q} carry equal deltas", self.steps)
        return self.phi.color(a, b)

    def note(self, text):
        self.steps.append(text)


def find_k5(phi: PairColoring, Q: OrderedVertexSet,
            params: ExtractParams) -> K5Witness:
    """A verified 5-clique of the palette 4-graph restricted to Q.

    Monotone branch: a run obstruction supplies ``run_cap`` distinct delta
    values; the palette's good quadruple among them is realized by five
    vertices through the run's dominance spans.  Layered branch: the endgame
    chain a, b, c, d near the top of the scaffold has its four pair colors
    forced red (a forbidden color either cascades into an explicit clique or
    stops the attempt), and either red case assembles the clique.
    """
    if Q.width > phi.size:
        raise ValueError("palette ground set must cover the vertex width")
    if params.levels < 3:
        raise ValueError("endgame needs at least three layers")
    handle = build_h4(Q.width, phi)
    out = layered_maxima(Q, params)
    if isinstance(out, Obstruction):
        if out.kind == "monotone-run":
            return _monotone_branch(phi, Q, out.positions, handle)
        raise ExtractionError(
            f"layer {out.level} underfilled ({out.found} < {out.needed}); "
            "no branch applies")
    ctx = _Ctx(phi, out, handle)
    lm = out
    L = params.levels
    a = lm.layers[L][0]
    b = lm.nearest(a, L - 1, "right")
    c = lm.nearest(b, L - 2, "left") if b is not None else None
    d = lm.nearest(c, L - 3, "right") if c is not None else None
    if b is None or c is None or d is None or not a < c < d < b:
        raise ExtractionError(
            f"endgame chain failed: a={a} b={b} c={c} d={d}", ctx.steps)
    ctx.note(f"endgame a={a} b={b} c={c} d={d}")
    for x, y in ((a, b), (a, c), (a, d), (c, d)):
        got = _force_red(ctx, x, y)
        if got is not None:
            return got
    if ctx.col(c, b) != RED:
        return _k5(ctx, (a - 1, a, c, c + 1, b + 1), "layered",
                   "endgame low-peak case via c")
    ctx.note("pair (c,b) red")
    if ctx.col(d, b) != RED:
        return _k5(ctx, (a - 1, a, d, d + 1, b + 1), "layered",
                   "endgame low-peak case via d")
    ctx.note("pair (d,b) red")
    return _k5(ctx, (c, d, d + 1, b + 1, b + 2), "layered",
               "endgame all-red case")


def _force_red(ctx, a, c):
    """Confirm the pair color red, or cascade a violation into a clique."""
    color = ctx.col(a, c)
    if color == RED:
        ctx.note(f"pair ({a},{c}) red")
        return None
    if color == BLUE:
        ctx.note(f"pair ({a},{c}) blue; cascading")
        return _blue_cascade(ctx, a, c)
    ctx.note(f"pair ({a},{c}) green; cascading")
    return _green_cascade(ctx, a, c)


def _cascade_chain(ctx, c, floor):
    lm = ctx.lm
    if c not in ctx.layer_sets[floor]:
        raise ExtractionError(
            f"position {c} not in layer {floor}; cascade unavailable", ctx.steps)
    d = lm.nearest(c, floor - 1, "left")
    e = lm.nearest(d, floor - 2, "right") if d is not None else None
    f = lm.nearest(e, floor - 3, "left") if e is not None else None
    g = lm.nearest(f, floor - 4, "right") if f is not None else None
    if None in (d, e, f, g):
        raise ExtractionError(f"cascade chain broke below {c}", ctx.steps)
    return d, e, f, g


def _blue_cascade(ctx, a, c):
    d, e, f, g = _cascade_chain(ctx, c, BLUE_FLOOR)
    if not a < d:
        raise ExtractionError(f"cascade entered left of a={a}", ctx.steps)
    for x in (d, e, f, g):
        if ctx.col(x, c) == RED:
            return _k5(ctx, (a - 1, a, x, x + 1, c + 1), "layered",
                       f"blue cascade: ({x},{c}) red")
    return _cascade_tail(ctx, c, d, e, f, g)


def _green_cascade(ctx, a, c):
    d, e, f, g = _cascade_chain(ctx, c, GREEN_FLOOR)
    if not a < d:
        raise ExtractionError(f"cascade entered left of a={a}", ctx.steps)
    for x in (d, e, f, g):
        if ctx.col(a, x) == BLUE:
            ctx.note(f"green cascade rerouted: ({a},{x}) blue")
            return _blue_cascade(ctx, a, x)
    for x in (d, e, f, g):
        if ctx.col(x, c) == RED:
            return _k5(ctx, (a - 1, a, x, x + 1, c + 1), "layered",
                       f"green cascade: ({x},{c}) red")
    return _cascade_tail(ctx, c, d, e, f, g)


def _cascade_tail(ctx, c, d, e, f, g):
    """Shared second half of both cascades; the pair (a, c) plays no role."""
    for x, y in ((d, e), (d, f), (d, g), (f, g)):
        if ctx.col(x, y) != RED:
            return _k5(ctx, (x, y, y + 1, c + 1, c + 2), "layered",
                       f"cascade tail: ({x},{y}) not red")
    for x in (f, g):
        if ctx.col(x, e) != RED:
            return _k5(ctx, (d - 1, d, x, x + 1, e + 1), "layered",
                       f"cascade tail: ({x},{e}) not red")
    return _k5(ctx, (f, g, g + 1, e + 1, e + 2), "layered",
               "cascade tail: all red")


def _k5(ctx, positions, branch, label):
    ctx.note(f"assemble {positions}: {label}")
    verts = []
    for p in positions:
        if not 0 <= p < len(ctx.lm.vertices):
            raise ExtractionError(f"position {p} outside Q", ctx.steps)
        verts.append(ctx.lm.vertices[p])
    if any(y <= x for x, y in zip(verts, verts[1:])):
        raise ExtractionError(f"assembled set not increasing: {verts}", ctx.steps)
    if not is_clique(ctx.handle, verts):
        verdicts = [(sub, ctx.handle.has_edge(sub))
                    for sub in combinations(tuple(verts), 4)]
        raise ExtractionError(
            f"assembled set failed verification: {verts} {verdicts}", ctx.steps)
    return K5Witness(tuple(verts), branch, tuple(ctx.steps), True)


def _monotone_branch(phi, Q, run, handle):
    verts = tuple(Q)
    deltas = [delta(verts[i], verts[i + 1]) for i in range(len(verts) - 1)]
    values = [deltas[p] for p in run]
    steps = [f"monotone run at positions {run[0]}..{run[-1]}"]
    good = find_good_4tuple(phi, values)
    if good is None:
        raise ExtractionError(
            f"no good quadruple among run values {sorted(values)}; "
            "palette not certified for this run length", steps)
    steps.append(f"good quadruple {good}")
    pos = {v: p for p, v in zip(run, values)}
    increasing = values[0] < values[1]
    if increasing:
        q = [pos[v] for v in good]
        picks = (q[0], q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1)
    else:
        q = [pos[v] for v in reversed(good)]
        picks = (q[0], q[1], q[2], q[3], q[3] + 1)
    five = tuple(verts[p] for p in picks)
    steps.append(f"realized at positions {picks}")
    if any(y <= x for x, y in zip(five, five[1:])) or not is_clique(handle, five):
        raise ExtractionError(f"run realization failed: {five}", steps)
    return K5Witness(five, "monotone-run", tuple(steps), True)


@dataclass(frozen=True)
class ViolationRecord:
    a: int
    c: int
    color: int
    clique: tuple[int, ...] | None
    note: str = ""


@dataclass(frozen=True)
class ClaimReport:
    which: str  # "blue" | "green"
    applicable: bool
    pairs_checked: int
    violations: tuple[ViolationRecord, ...]


def claim_forcing_check(phi: PairColoring, lm: LayeredMaxima,
                        which: str) -> ClaimReport:
    """Confirm the forbidden color never appears on the scaffold pairs.

    blue: pairs (a, c) with a of exact depth t in [5, levels], b its right
    neighbor one layer down, and c any depth-4 position in (a, b].  green:
    depths [9, levels] against depth-8 positions.  Each occurrence of the
    forbidden color is cascaded into an explicit verified 5-clique, included
    in the report.
    """
    if which == "blue":
        floor, t_lo = BLUE_FLOOR, BLUE_FLOOR + 1
    elif which == "green":
        floor, t_lo = GREEN_FLOOR, GREEN_FLOOR + 1
    else:
        raise ValueError("which must be 'blue' or 'green'")
    L = lm.params.levels
    if L < t_lo:
        return ClaimReport(which, False, 0, ())
    forbidden = BLUE if which == "blue" else GREEN
    handle = build_h4(lm.width, phi)
    checked = 0
    violations = []
    floor_layer = lm.layers[floor]
    for t in range(t_lo, L + 1):
        deeper = set(lm.layers[t + 1]) if t < L else set()
        for a in lm.layers[t]:
            if a in deeper:
                continue
            b = lm.nearest(a, t - 1, "right")
            if b is None:
                continue
            lo = bisect_left(floor_layer, a + 1)
            hi = bisect_left(floor_layer, b + 1)
            for c in floor_layer[lo:hi]:
                if lm.deltas[a] == lm.deltas[c]:
                    continue
                checked += 1
                if phi.color(lm.deltas[a], lm.deltas[c]) != forbidden:
                    continue
                ctx = _Ctx(phi, lm, handle)
                try:
                    if which == "blue":
                        wit = _blue_cascade(ctx, a, c)
                    else:
                        wit = _green_cascade(ctx, a, c)
                    violations.append(ViolationRecord(a, c, forbidden,
                                                      wit.vertices))
                except ExtractionError as err:
                    violations.append(ViolationRecord(a, c, forbidden, None,
                                                      str(err)))
    return ClaimReport(which, True, checked, tuple(violations))


# trace file format: ER-TRACE v1 followed by key=value lines

_MAGIC = "ER-TRACE v1"
_POSITION_CAP = 20_000


@dataclass(frozen=True)
class TraceDoc:
    entries: tuple[tuple[str, str], ...]

    def get(self, key, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default


def trace_entries_for_layers(lm: LayeredMaxima) -> list[tuple[str, str]]:
    entries = [
        ("q_size", str(len(lm.vertices))),
        ("width", str(lm.width)),
        ("levels", str(lm.params.levels)),
        ("shrink", str(lm.params.shrink)),
        ("run_cap", str(lm.params.run_cap)),
    ]
    for t, layer in enumerate(lm.layers):
        if len(layer) > _POSITION_CAP:
            entries.append((f"layer.{t}", f"omitted:{len(layer)}"))
        else:
            entries.append((f"layer.{t}", " ".join(str(p) for p in layer)))
    return entries


def trace_entries_for_claims(report: ClaimReport) -> list[tuple[str, str]]:
    entries = [(f"claim.{report.which}",
                f"applicable={report.applicable} pairs={report.pairs_checked} "
                f"violations={len(report.violations)}")]
    for rec in report.violations:
        clique = " ".join(str(v) for v in rec.clique) if rec.clique else "none"
        entries.append((f"claim.{report.which}.violation",
                        f"a={rec.a} c={rec.c} color={COLOR_CHARS[rec.color]} "
                        f"clique={clique}"))
    return entries


def write_trace(doc: TraceDoc, path) -> None:
    lines = [_MAGIC]
    for key, value in doc.entries:
        lines.append(f"{key}={value}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_trace(path) -> TraceDoc:
    lines = Path(path).read_bytes().decode("ascii").split("\n")
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"not a {_MAGIC} file: {path}")
    entries = []
    for line in lines[1:]:
        if line:
            key, _, value = line.partition("=")
            entries.append((key, value))
    return TraceDoc(tuple(entries))
