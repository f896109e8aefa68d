"""Three-colored pair palettes and the good-quadruple certificate machinery.

A palette colors every pair of {0..D-1} red, blue or green.  A quadruple
w < x < y < z is "good" when its six pair colors match the fixed pattern

    red red red on the three consecutive pairs,
    blue blue on the two distance-two pairs,
    green on the outer pair.

The searcher looks for palettes in which every n-subset of the ground set
contains a good quadruple; the verifier certifies that property, either
exhaustively or by sampling, and never reports a sampled run as exhaustive.
Also here: the greedy pair-disjoint packing of 4-blocks used to decorrelate
quadruples, and the log-space union-bound calculator.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from math import comb, exp, log
from pathlib import Path

from .parallel import run_chunks
from .seeds import child_rng, derive

RED, BLUE, GREEN = 0, 1, 2
COLOR_CHARS = "RBG"

# colex order: pair (i, j) with i < j sits at j*(j-1)//2 + i


def pair_index(i: int, j: int) -> int:
    if i == j:
        raise ValueError("pair needs distinct elements")
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


@dataclass(frozen=True)
class Provenance:
    seed: int | None = None
    iterations: int = 0
    verified: str = "none"  # "exhaustive" | "sample:<count>" | "none"
    verified_n: int | None = None


@dataclass(frozen=True)
class PairColoring:
    """Total 3-coloring of the pairs of {0..size-1}, flat colex storage."""

    size: int
    colors: bytes
    provenance: Provenance = Provenance()

    def __post_init__(self):
        want = self.size * (self.size - 1) // 2
        if len(self.colors) != want:
            raise ValueError(f"expected {want} colors, got {len(self.colors)}")
        if any(c not in (RED, BLUE, GREEN) for c in self.colors):
            raise ValueError("colors must be 0 (red), 1 (blue) or 2 (green)")

    def color(self, i: int, j: int) -> int:
        if not (0 <= i < self.size and 0 <= j < self.size):
            raise ValueError("pair outside ground set")
        return self.colors[pair_index(i, j)]

    def with_color(self, i: int, j: int, color: int) -> "PairColoring":
        buf = bytearray(self.colors)
        buf[pair_index(i, j)] = color
        return PairColoring(self.size, bytes(buf),
                            replace(self.provenance, verified="none", verified_n=None))


def random_coloring(size: int, seed: int) -> PairColoring:
    rng = child_rng(seed, "coloring-init")
    buf = bytes(rng.randrange(3) for _ in range(size * (size - 1) // 2))
    return PairColoring(size, buf, Provenance(seed=seed))


_GOOD = (RED, RED, RED, BLUE, BLUE, GREEN)


def is_good_4tuple(phi: PairColoring, quad) -> bool:
    """True iff the six pair colors of w<x<y<z match the good pattern."""
    w, x, y, z = quad
    if not w < x < y < z:
        raise ValueError("quadruple must be strictly increasing")
    if z >= phi.size or w < 0:
        raise ValueError("quadruple outside ground set")
    c = phi.colors
    return (c[pair_index(w, x)] == RED and c[pair_index(x, y)] == RED
            and c[pair_index(y, z)] == RED and c[pair_index(w, y)] == BLUE
            and c[pair_index(x, z)] == BLUE and c[pair_index(w, z)] == GREEN)


def _set_is_violating(colors: bytes, members) -> bool:
    """No good quadruple anywhere inside ``members`` (sorted)."""
    for w, x, y, z in combinations(members, 4):
        if (colors[pair_index(w, x)] == RED and colors[pair_index(x, y)] == RED
                and colors[pair_index(y, z)] == RED
                and colors[pair_index(w, y)] == BLUE
                and colors[pair_index(x, z)] == BLUE
                and colors[pair_index(w, z)] == GREEN):
            return False
    return True


def find_good_4tuple(phi: PairColoring, members):
    """First good quadruple inside ``members`` in lexicographic order."""
    for quad in combinations(sorted(members), 4):
        if is_good_4tuple(phi, quad):
            return quad
    return None


@dataclass(frozen=True)
class VerifyOutcome:
    status: str  # "pass" | "violation" | "inconclusive"
    violating: tuple[int, ...] | None
    sets_checked: int
    mode: str  # "exhaustive" | "sample:<count>"

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def _verify_chunk(args):
    colors, size, n, first_lo, first_hi = args
    checked = 0
    for first in range(first_lo, first_hi):
        for rest in combinations(range(first + 1, size), n - 1):
            checked += 1
            members = (first,) + rest
            if _set_is_violating(colors, members):
                return checked, members
    return checked, None


def _verify_sample_chunk(args):
    colors, size, n, count, chunk_seed = args
    rng = child_rng(chunk_seed)
    checked = 0
    for _ in range(count):
        members = tuple(sorted(rng.sample(range(size), n)))
        checked += 1
        if _set_is_violating(colors, members):
            return checked, members
    return checked, None


def verify_coloring(phi: PairColoring, n: int, mode: str = "exhaustive", *,
                    samples: int = 10_000, seed: int = 0,
                    budget: int = 2_000_000, workers: int = 1) -> VerifyOutcome:
    """Check that every n-subset contains a good quadruple.

    Exhaustive mode scans all C(size, n) subsets and either passes or returns
    the lexicographically first violating subset; if the scan would exceed
    ``budget`` the outcome is flagged inconclusive instead.  Sample mode
    draws seeded random subsets and reports (samples, violations) honestly.
    """
    if not 4 <= n <= phi.size:
        raise ValueError("need 4 <= n <= size")
    if mode == "exhaustive":
        total = comb(phi.size, n)
        if total > budget:
            return VerifyOutcome("inconclusive", None, 0, "exhaustive")
        bounds = [(lo, hi) for lo, hi in _first_splits(phi.size - n + 1, 16)]
        args = [(phi.colors, phi.size, n, lo, hi) for lo, hi in bounds]
        checked, violating = _merge(run_chunks(_verify_chunk, args, workers))
        status = "pass" if violating is None else "violation"
        return VerifyOutcome(status, violating, checked, "exhaustive")
    if mode != "sample":
        raise ValueError(f"unknown mode {mode!r}")
    counts = _sample_splits(samples, 16)
    args = [(phi.colors, phi.size, n, c, derive(seed, "verify-sample", i))
            for i, c in enumerate(counts)]
    checked, violating = _merge(run_chunks(_verify_sample_chunk, args, workers))
    status = "violation" if violating is not None else "inconclusive"
    return VerifyOutcome(status, violating, checked, f"sample:{samples}")


def _first_splits(n, parts):
    parts = min(parts, max(1, n))
    steps = [n * i // parts for i in range(parts + 1)]
    return [(steps[i], steps[i + 1]) for i in range(parts) if steps[i] < steps[i + 1]]


def _sample_splits(total, parts):
    base, extra = divmod(max(0, total), parts)
    out = []
    for i in range(parts):
        c = base + (1 if i < extra else 0)
        if c:
            out.append(c)
    return out


def _merge(results):
    checked = 0
    hit = None
    for c, h in results:
        checked += c
        if hit is None and h is not None:
            hit = h
    return checked, hit


class SearchBudgetError(RuntimeError):
    """Raised when the palette search runs out of repair moves."""

    def __init__(self, message, best_violations, iterations):
        super().__init__(message)
        self.best_violations = best_violations
        self.iterations = iterations


_SCAN_CAP = 300_000  # largest C(size, n) the repair loop will track exactly


def search_coloring(size: int, n: int, seed: int, budget: int = 50_000) -> PairColoring:
    """Random restarts plus local repair until no violating n-set remains.

    Each restart draws a fresh random palette; while violating subsets exist,
    one is picked uniformly at random and one uniformly random pair inside it
    is recolored uniformly at random.  Runs with the same (size, n, seed,
    budget) produce byte-identical palettes.  Successful palettes are
    exhaustively verified by construction of the repair bookkeeping.
    """
    if n < 5:
        raise ValueError("need n >= 5")
    if size < n:
        raise ValueError("need size >= n")
    if comb(size, n) > _SCAN_CAP:
        raise ValueError("subset space too large for exact repair search")

    all_sets = list(combinations(range(size), n))
    sets_with_pair = {}
    for members in all_sets:
        for i, j in combinations(members, 2):
            sets_with_pair.setdefault((i, j), []).append(members)

    per_restart = max(50, budget // 8)
    spent = 0
    restart = 0
    best = None
    while spent < budget:
        rng = child_rng(seed, "palette", restart)
        colors = bytearray(rng.randrange(3) for _ in range(size * (size - 1) // 2))
        violating = [s for s in all_sets if _set_is_violating(colors, s)]
        index = {s: i for i, s in enumerate(violating)}
        moves = 0
        while violating and moves < per_restart and spent < budget:
            target = violating[rng.randrange(len(violating))]
            a, b = sorted(rng.sample(target, 2))
            colors[pair_index(a, b)] = rng.randrange(3)
            moves += 1
            spent += 1
            for members in sets_with_pair[(a, b)]:
                bad = _set_is_violating(colors, members)
                pos = index.get(members)
                if bad and pos is None:
                    index[members] = len(violating)
                    violating.append(members)
                elif not bad and pos is not None:
                    last = violating[-1]
                    violating[pos] = last
                    index[last] = pos
                    violating.pop()
                    del index[members]
        if best is None or len(violating) < best:
            best = len(violating)
        if not violating:
            prov = Provenance(seed=seed, iterations=spent,
                              verified="exhaustive", verified_n=n)
            return PairColoring(size, bytes(colors), prov)
        restart += 1
    raise SearchBudgetError(
        f"no palette found for size={size} n={n} within {budget} moves",
        best_violations=best, iterations=spent)


@dataclass(frozen=True)
class SteinerSystem:
    """Pair-disjoint 4-blocks on [points]: every pair lies in at most one block."""

    points: int
    blocks: tuple[tuple[int, int, int, int], ...]


def greedy_partial_steiner(points: int, seed: int = 0) -> SteinerSystem:
    """Maximal pair-disjoint packing of 4-blocks, greedy in seeded pair order.

    The free pairs form a graph; a block is addable exactly when it is a K4
    of that graph.  Processing each pair once and consuming a K4 through it
    whenever one exists leaves the free graph K4-free, hence the packing
    maximal, with at least points*(points-1)/72 blocks by the counting bound.
    """
    n = points
    if n < 4:
        raise ValueError("need at least four points")
    rng = child_rng(seed, "steiner", n)
    full = (1 << n) - 1
    adj = [full ^ (1 << i) for i in range(n)]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng.shuffle(pairs)
    blocks = []
    for i, j in pairs:
        if not adj[i] >> j & 1:
            continue
        common = adj[i] & adj[j]
        found = None
        c = common
        while c:
            w = (c & -c).bit_length() - 1
            c &= c - 1
            inner = adj[w] & common & ~((1 << (w + 1)) - 1)
            if inner:
                x = (inner & -inner).bit_length() - 1
                found = (w, x)
                break
        if found is None:
            continue
        block = tuple(sorted((i, j) + found))
        blocks.append(block)
        for p, q in combinations(block, 2):
            adj[p] &= ~(1 << q)
            adj[q] &= ~(1 << p)
    blocks.sort()
    return SteinerSystem(n, tuple(blocks))


def steiner_is_valid(system: SteinerSystem) -> bool:
    """Pair-disjointness by direct enumeration."""
    seen = set()
    for block in system.blocks:
        if len(set(block)) != 4 or any(not 0 <= v < system.points for v in block):
            return False
        for pair in combinations(sorted(block), 2):
            if pair in seen:
                return False
            seen.add(pair)
    return True


def steiner_is_maximal(system: SteinerSystem) -> bool:
    """No further block with six unused pairs exists."""
    used = set()
    for block in system.blocks:
        used.update(combinations(sorted(block), 2))
    n = system.points
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in used:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    for i in range(n):
        for j in range(i + 1, n):
            if not adj[i] >> j & 1:
                continue
            common = adj[i] & adj[j]
            c = common
            while c:
                w = (c & -c).bit_length() - 1
                c &= c - 1
                if adj[w] & common & ~((1 << (w + 1)) - 1):
                    return False
    return True


@dataclass(frozen=True)
class UnionBoundReport:
    log_value: float  # natural log of C(D, n) * (728/729)^(c' n^2)
    value: float
    passes: bool


def union_bound_check(ground: int, n: int, c_prime: float) -> UnionBoundReport:
    """Evaluate C(ground, n) * (728/729)^(c' n^2) in log space; passes iff < 1/2.

    The binomial coefficient is computed exactly before taking its log, so
    the only floating error is in two logs and one multiply.
    """
    if c_prime <= 0:
        raise ValueError("c_prime must be positive")
    if not 0 <= n <= ground:
        raise ValueError("need 0 <= n <= ground")
    log_value = log(comb(ground, n)) + c_prime * n * n * log(728.0 / 729.0)
    try:
        value = exp(log_value)
    except OverflowError:
        value = float("inf")
    return UnionBoundReport(log_value, value, log_value < log(0.5))


# palette file format, bit exact:
#   ER-COLORING v1
#   D=<int> n=<int> seed=<int> verified=<exhaustive|sample:<count>|none>
#   <D(D-1)/2 chars over RBG in colex pair order>

_MAGIC = "ER-COLORING v1"


def write_coloring(phi: PairColoring, path) -> None:
    prov = phi.provenance
    n = prov.verified_n if prov.verified_n is not None else 0
    seed = prov.seed if prov.seed is not None else 0
    body = "".join(COLOR_CHARS[c] for c in phi.colors)
    text = f"{_MAGIC}\nD={phi.size} n={n} seed={seed} verified={prov.verified}\n{body}\n"
    Path(path).write_bytes(text.encode("ascii"))


def read_coloring(path) -> PairColoring:
    lines = Path(path).read_bytes().decode("ascii").split("\n")
    if len(lines) < 3 or lines[0] != _MAGIC:
        raise ValueError(f"not a {_MAGIC} file: {path}")
    fields = dict(part.split("=", 1) for part in lines[1].split())
    size = int(fields["D"])
    n = int(fields["n"])
    verified = fields["verified"]
    seed = int(fields["seed"])
    body = lines[2]
    if len(body) != size * (size - 1) // 2:
        raise ValueError("color payload length mismatch")
    try:
        colors = bytes(COLOR_CHARS.index(ch) for ch in body)
    except ValueError:
        raise ValueError("color payload must use only R, B, G") from None
    prov = Provenance(seed=seed, iterations=0, verified=verified,
                      verified_n=n if n > 0 else None)
    return PairColoring(size, colors, prov)
