"""Bit-level delta structure of ordered vertex sets.

Vertices are unsigned integers below ``2**width``; the delta of two distinct
vertices is the highest bit position at which their binary expansions
differ.  An ordered set induces a delta sequence whose inner positions are
classified as local extrema or local monotones; that shape data drives every
construction in this package.  The five stepping-up regularities of the
structure (named I through V here and on the CLI) are exposed as machine
checkers that enumerate exhaustively at small widths and sample above.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

from .parallel import run_chunks
from .seeds import child_rng

LOCAL_MIN = "local-min"
LOCAL_MAX = "local-max"
LOCAL_MONOTONE = "local-monotone"
BOUNDARY = "boundary"

PROPERTIES = ("I", "II", "III", "IV", "V")

MAX_WIDTH = 63

# Enumeration stays exhaustive up to these widths; above them the checkers
# switch to seeded sampling so runtimes stay predictable.
EXHAUSTIVE_TRIPLE_WIDTH = 8
EXHAUSTIVE_QUAD_WIDTH = 6


def delta(u: int, v: int) -> int:
    """Highest bit position where u and v differ."""
    if u == v:
        raise ValueError("delta undefined on equal vertices")
    return (u ^ v).bit_length() - 1


@dataclass(frozen=True)
class OrderedVertexSet:
    """Strictly increasing vertices sharing one bit width."""

    vertices: tuple[int, ...]
    width: int

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if not self.vertices:
            raise ValueError("empty vertex set")
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width must be in [1, {MAX_WIDTH}]")
        top = 1 << self.width
        prev = -1
        for v in self.vertices:
            if not 0 <= v < top:
                raise ValueError(f"vertex {v} outside [0, 2^{self.width})")
            if v <= prev:
                raise ValueError("vertices must be strictly increasing")
            prev = v

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __getitem__(self, i: int) -> int:
        return self.vertices[i]


@dataclass(frozen=True)
class DeltaProfile:
    """A delta sequence with per-position shape labels.

    ``labels`` is empty for sets of fewer than four vertices; otherwise it
    has one entry per delta, with the two endpoint positions labelled
    ``boundary``.  ``extrema + monotones == r - 3`` for an r-vertex set.
    """

    deltas: tuple[int, ...]
    labels: tuple[str, ...]
    extrema: int
    monotones: int

    @property
    def monotone(self) -> bool:
        return self.extrema == 0

    @property
    def increasing(self) -> bool:
        return all(a < b for a, b in zip(self.deltas, self.deltas[1:]))


def profile_of_deltas(deltas) -> DeltaProfile:
    """Classify a raw delta list; adjacent entries must differ."""
    ds = tuple(deltas)
    for a, b in zip(ds, ds[1:]):
        if a == b:
            raise ValueError("adjacent deltas must differ")
    if len(ds) < 3:
        return DeltaProfile(ds, (), 0, 0)
    labels = [BOUNDARY] * len(ds)
    n_max = n_min = n_mono = 0
    for i in range(1, len(ds) - 1):
        a, b, c = ds[i - 1], ds[i], ds[i + 1]
        if a < b > c:
            labels[i] = LOCAL_MAX
            n_max += 1
        elif a > b < c:
            labels[i] = LOCAL_MIN
            n_min += 1
        else:
            labels[i] = LOCAL_MONOTONE
            n_mono += 1
    return DeltaProfile(ds, tuple(labels), n_max + n_min, n_mono)


def delta_sequence(vertices) -> DeltaProfile:
    """Delta profile of an ordered set (OrderedVertexSet or increasing ints)."""
    vs = tuple(vertices)
    if len(vs) < 2:
        raise ValueError("need at least two vertices")
    return profile_of_deltas(delta(vs[i], vs[i + 1]) for i in range(len(vs) - 1))


def delta_of_pairing(vertices, indices) -> DeltaProfile:
    """Delta profile of the subsequence selected by 0-based indices.

    Each entry of the result equals the maximum of the consecutive deltas it
    spans in the original set.
    """
    vs = tuple(vertices)
    idx = tuple(indices)
    if len(idx) < 2:
        raise ValueError("need at least two indices")
    for i in idx:
        if not 0 <= i < len(vs):
            raise ValueError(f"index {i} out of range")
    for a, b in zip(idx, idx[1:]):
        if b <= a:
            raise ValueError("indices must be strictly increasing")
    return delta_sequence(vs[i] for i in idx)


def monotone_family(values, width: int) -> OrderedVertexSet:
    """Canonical realization of a strictly increasing delta list.

    Returns the cumulative-sum family 0, 2^d1, 2^d1 + 2^d2, ... whose delta
    sequence is exactly ``values``.
    """
    return _family(values, width, reverse=False)


def decreasing_family(values, width: int) -> OrderedVertexSet:
    """Realize the reversed delta list: deltas run dk > ... > d1.

    ``values`` is given strictly increasing, like ``monotone_family``; the
    complement-style cumulative construction adds the powers from the top
    down, producing a strictly decreasing delta sequence.
    """
    return _family(values, width, reverse=True)


def _family(values, width, reverse):
    vals = tuple(values)
    if not vals:
        raise ValueError("empty delta list")
    prev = -1
    for d in vals:
        if d <= prev:
            raise ValueError("delta values must be strictly increasing")
        if d >= width:
            raise ValueError(f"delta value {d} not below width {width}")
        prev = d
    verts = [0]
    acc = 0
    for d in (reversed(vals) if reverse else vals):
        acc += 1 << d
        verts.append(acc)
    return OrderedVertexSet(tuple(verts), width)


@dataclass(frozen=True)
class PropertyReport:
    name: str
    width: int
    mode: str  # "exhaustive" | "sample"
    examined: int
    passed: bool
    counterexample: tuple | None = None
    witness: tuple | None = None
    inconclusive: bool = False
    note: str = ""


def check_property(name: str, width: int, *, budget: int = 2_000_000,
                   seed: int = 0, workers: int = 1) -> PropertyReport:
    """Machine-check one of the delta-structure regularities I..V.

    I   adjacent deltas of any triple differ
    II  the delta of the endpoints of any tuple is the maximum consecutive delta
    III that maximum is achieved at a unique position
    IV  a strict descent forbids repeating its first delta two steps later
        (the report carries a witness that the mirrored equality is possible)
    V   monotone families restrict and realize: subsequences stay monotone,
        and the canonical family construction inverts delta_sequence
    """
    if name not in PROPERTIES:
        raise ValueError(f"unknown property {name!r}")
    if not 1 <= width <= MAX_WIDTH:
        raise ValueError("width out of range")
    if name == "I":
        return _check_triples(width, budget, seed, workers)
    if name in ("II", "III", "IV"):
        return _check_quads(name, width, budget, seed, workers)
    return _check_realization(width, budget, seed, workers)


# property I: chunked over the middle vertex


def _prop1_chunk(args):
    width, lo, hi = args
    n = 1 << width
    examined = 0
    for v in range(lo, hi):
        left = [delta(u, v) for u in range(v)]
        for w in range(v + 1, n):
            dvw = delta(v, w)
            for u in range(v):
                examined += 1
                if left[u] == dvw:
                    return examined, (u, v, w)
    return examined, None


def _prop1_sample_chunk(args):
    width, count, chunk_seed = args
    rng = child_rng(chunk_seed)
    n = 1 << width
    examined = 0
    for _ in range(count):
        u, v, w = sorted(rng.sample(range(n), 3))
        examined += 1
        if delta(u, v) == delta(v, w):
            return examined, (u, v, w)
    return examined, None


def _check_triples(width, budget, seed, workers):
    n = 1 << width
    space = comb(n, 3)
    if width <= EXHAUSTIVE_TRIPLE_WIDTH and space <= budget:
        bounds = _split_range(n, 32)
        results = run_chunks(_prop1_chunk, [(width, lo, hi) for lo, hi in bounds], workers)
        examined, cex = _merge(results)
        return PropertyReport("I", width, "exhaustive", examined, cex is None, cex)
    counts = _split_counts(budget, 16)
    args = [(width, c, _chunk_seed(seed, "I", i)) for i, c in enumerate(counts)]
    examined, cex = _merge(run_chunks(_prop1_sample_chunk, args, workers))
    return PropertyReport("I", width, "sample", examined, cex is None, cex,
                          inconclusive=cex is None)


# properties II, III, IV: chunked over the first vertex of each 4-tuple


def _quad_violation(name, q):
    d1 = delta(q[0], q[1])
    d2 = delta(q[1], q[2])
    d3 = delta(q[2], q[3])
    if name == "II":
        if delta(q[0], q[3]) != max(d1, d2, d3):
            return True
        if delta(q[0], q[2]) != max(d1, d2):
            return True
        return delta(q[1], q[3]) != max(d2, d3)
    if name == "III":
        m = max(d1, d2, d3)
        return (d1, d2, d3).count(m) != 1
    # IV, forbidden half
    return d1 > d2 and d1 == d3


def _quad_chunk(args):
    name, width, lo, hi = args
    n = 1 << width
    examined = 0
    for a in range(lo, hi):
        for q in combinations(range(a + 1, n), 3):
            examined += 1
            quad = (a,) + q
            if _quad_violation(name, quad):
                return examined, quad
    return examined, None


def _quad_sample_chunk(args):
    name, width, count, chunk_seed = args
    rng = child_rng(chunk_seed)
    n = 1 << width
    examined = 0
    for _ in range(count):
        quad = tuple(sorted(rng.sample(range(n), 4)))
        examined += 1
        if _quad_violation(name, quad):
            return examined, quad
    return examined, None


def _check_quads(name, width, budget, seed, workers):
    n = 1 << width
    witness = None
    if name == "IV" and width >= 2:
        # the permitted mirror equality, realized concretely
        cand = (0, 1, 2, 3) if width == 2 else (0, 2, 4, 6)
        d1, d2, d3 = (delta(cand[i], cand[i + 1]) for i in range(3))
        assert d1 < d2 and d1 == d3
        witness = cand
    if n < 4:
        return PropertyReport(name, width, "exhaustive", 0, True, witness=witness,
                              note="fewer than four vertices")
    space = comb(n, 4)
    if width <= EXHAUSTIVE_QUAD_WIDTH and space <= budget:
        bounds = _split_range(n - 3, 32)
        args = [(name, width, lo, hi) for lo, hi in bounds]
        examined, cex = _merge(run_chunks(_quad_chunk, args, workers))
        return PropertyReport(name, width, "exhaustive", examined, cex is None, cex,
                              witness=witness)
    counts = _split_counts(budget, 16)
    args = [(name, width, c, _chunk_seed(seed, name, i)) for i, c in enumerate(counts)]
    examined, cex = _merge(run_chunks(_quad_sample_chunk, args, workers))
    return PropertyReport(name, width, "sample", examined, cex is None, cex,
                          witness=witness, inconclusive=cex is None)


# property V: sampled realization round-trips


def _prop5_chunk(args):
    width, count, chunk_seed = args
    rng = child_rng(chunk_seed)
    examined = 0
    for _ in range(count):
        examined += 1
        length = rng.randint(1, min(width, 8))
        values = tuple(sorted(rng.sample(range(width), length)))
        fam = monotone_family(values, width)
        if delta_sequence(fam).deltas != values:
            return examined, ("roundtrip-increasing", values)
        dec = decreasing_family(values, width)
        if delta_sequence(dec).deltas != tuple(reversed(values)):
            return examined, ("roundtrip-decreasing", values)
        if length >= 2:
            # any vertex subsequence of a monotone family is monotone
            size = rng.randint(2, len(fam))
            picks = sorted(rng.sample(range(len(fam)), size))
            prof = delta_of_pairing(fam.vertices, picks)
            if not prof.monotone:
                return examined, ("subsequence", values, tuple(picks))
            # any delta subset is realized by vertices of the family itself
            take = rng.randint(1, length)
            pos = sorted(rng.sample(range(length), take))
            verts = [fam[pos[0]]] + [fam[p + 1] for p in pos]
            got = delta_sequence(verts).deltas
            want = tuple(values[p] for p in pos)
            if got != want:
                return examined, ("realization", values, tuple(pos))
    return examined, None


def _check_realization(width, budget, seed, workers):
    total = min(budget, 10_000)
    counts = _split_counts(total, 16)
    args = [(width, c, _chunk_seed(seed, "V", i)) for i, c in enumerate(counts)]
    examined, cex = _merge(run_chunks(_prop5_chunk, args, workers))
    return PropertyReport("V", width, "sample", examined, cex is None, cex)


def _split_range(n, parts):
    parts = min(parts, max(1, n))
    steps = [n * i // parts for i in range(parts + 1)]
    return [(steps[i], steps[i + 1]) for i in range(parts) if steps[i] < steps[i + 1]]


def _split_counts(total, parts):
    base, extra = divmod(max(0, total), parts)
    return [base + (1 if i < extra else 0) for i in range(parts) if base + (1 if i < extra else 0) > 0]


def _chunk_seed(seed, label, index):
    from .seeds import derive

    return derive(seed, "property", label, index)


def _merge(results):
    examined = 0
    cex = None
    for ex, c in results:
        examined += ex
        if cex is None and c is not None:
            cex = c
    return examined, cex
