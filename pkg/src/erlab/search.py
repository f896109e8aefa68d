"""Exact and heuristic clique and k-independence search over handles.

Window search materializes candidate verdicts for a short vertex interval
and runs a bitmask DFS that is exhaustive inside the window.  Random search
probes seeded subsets.  The delta-pruned DFS walks the whole vertex range,
cutting branches whose delta sequence already carries an extremum together
with a monotone run too long for any clique of the handle's kind.  Exact
k-independence runs a branch-and-bound over precomputed clique masks, with a
plain descending-size enumeration as its independent oracle.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .h4 import HypergraphHandle, window_materialize
from .parallel import run_chunks
from .seeds import derive, child_rng

BRUTE_FORCE_CAP = 18
EXACT_INDEPENDENCE_CAP = 32


@dataclass(frozen=True)
class Effort:
    strategy: str
    seed: int
    tuples_examined: int
    elapsed: float  # seconds; informational only, never serialized


@dataclass(frozen=True)
class Witness:
    kind: str  # "clique" | "independent-set" | "violating-n-set" | "none-found"
    vertices: tuple[int, ...]
    verified: bool
    effort: Effort
    note: str = ""


def is_clique(h: HypergraphHandle, vertices) -> bool:
    """Every k-subset is an edge."""
    vs = tuple(vertices)
    if len(vs) < h.k:
        raise ValueError("set smaller than uniformity")
    return all(h.has_edge(sub) for sub in combinations(vs, h.k))


def _contains_clique(h: HypergraphHandle, vertices, t: int) -> bool:
    vs = tuple(vertices)
    if len(vs) < t:
        return False
    return any(is_clique(h, sub) for sub in combinations(vs, t))


# window strategy


def _window_chunk(args):
    handle, size, lo, hi, node_budget = args
    sub = window_materialize(handle, lo, hi, cap=max(hi - lo, 64))
    found, nodes, exhausted = _mask_dfs(sub.edges, hi - lo, handle.k, size, node_budget)
    examined = _ncr(hi - lo, handle.k)
    if found is not None:
        found = tuple(lo + v for v in found)
    return found, examined, nodes, exhausted


def _ncr(n, k):
    from math import comb

    return comb(n, k)


def _mask_dfs(edges, width, k, target, node_budget=None):
    """Exhaustive lexicographic DFS for a clique of ``target`` vertices.

    Candidate masks keyed by (k-1)-tuples prune every extension to vertices
    completing an edge with each (k-1)-subset already chosen.
    """
    csets = {}
    for e in edges:
        head, last = e[:-1], e[-1]
        csets[head] = csets.get(head, 0) | (1 << last)
    full = (1 << width) - 1
    nodes = 0
    exhausted = False

    def above(v):
        return full & ~((1 << (v + 1)) - 1)

    stack = [((), full)]
    while stack:
        chosen, cands = stack.pop()
        branch = []
        c = cands
        while c:
            v = (c & -c).bit_length() - 1
            c &= c - 1
            nodes += 1
            if node_budget is not None and nodes > node_budget:
                return None, nodes, True
            new = chosen + (v,)
            if len(new) == target:
                return new, nodes, False
            nc = cands & above(v)
            if len(new) >= k - 1:
                for sub in combinations(chosen, k - 2):
                    nc &= csets.get(sub + (v,), 0)
                    if not nc:
                        break
            if nc.bit_count() >= target - len(new):
                branch.append((new, nc))
        stack.extend(reversed(branch))  # keep lexicographic discovery order
    return None, nodes, exhausted


def find_clique(h: HypergraphHandle, size: int, strategy: str = "window", *,
                width: int = 20, stride: int = 10, samples: int = 10_000,
                seed: int = 0, budget: int | None = None,
                workers: int = 1) -> Witness:
    """Search for a clique of ``size`` vertices.

    window: exhaustive inside each [lo, lo+width), windows advancing by
    ``stride`` and always covering the tail.  random: seeded subsets with an
    early-exit clique check.  delta-pruned: global DFS cutting on monotone
    run bounds, budgeted by DFS nodes.  Any returned clique is re-verified
    edge by edge.
    """
    if size <= h.k:
        raise ValueError("target size must exceed uniformity")
    start = time.monotonic()
    if strategy == "window":
        return _find_window(h, size, width, stride, budget, workers, seed, start)
    if strategy == "random":
        return _find_random(h, size, samples, seed, start, workers)
    if strategy == "delta-pruned":
        return _find_pruned(h, size, budget or 100_000, seed, start)
    raise ValueError(f"unknown strategy {strategy!r}")


def _windows(n, width, stride):
    if width > n:
        return [(0, n)]
    starts = list(range(0, n - width + 1, stride))
    if starts[-1] != n - width:
        starts.append(n - width)
    return [(lo, lo + width) for lo in starts]


def _find_window(h, size, width, stride, budget, workers, seed, start):
    wins = _windows(h.num_vertices, width, stride)
    per_window = None if budget is None else max(1, budget // len(wins))
    args = [(h, size, lo, hi, per_window) for lo, hi in wins]
    results = run_chunks(_window_chunk, args, workers)
    examined = sum(r[1] for r in results)
    nodes = sum(r[2] for r in results)
    exhausted = any(r[3] for r in results)
    strategy = f"window:{width}:{stride}"
    for found, _, _, _ in results:
        if found is not None:
            verified = is_clique(h, found)
            effort = Effort(strategy, seed, examined, time.monotonic() - start)
            return Witness("clique", found, verified, effort)
    effort = Effort(strategy, seed, examined, time.monotonic() - start)
    note = "inconclusive: node budget exhausted" if exhausted else ""
    return Witness("none-found", (), False, effort, note)


def _random_chunk(args):
    handle, size, count, chunk_seed = args
    rng = child_rng(chunk_seed)
    n = handle.num_vertices
    for i in range(count):
        cand = tuple(sorted(rng.sample(range(n), size)))
        good = True
        for sub in combinations(cand, handle.k):
            if not handle.has_edge(sub):
                good = False
                break
        if good:
            return cand, i + 1
    return None, count


def _find_random(h, size, samples, seed, start, workers):
    base, extra = divmod(samples, 32)
    counts = [base + (1 if i < extra else 0) for i in range(32)]
    args = [(h, size, c, derive(seed, "random-clique", i))
            for i, c in enumerate(counts) if c]
    results = run_chunks(_random_chunk, args, workers)
    examined = sum(r[1] for r in results)
    strategy = f"random:{samples}"
    for cand, _ in results:
        if cand is not None:
            verified = is_clique(h, cand)
            effort = Effort(strategy, seed, examined, time.monotonic() - start)
            return Witness("clique", cand, verified, effort)
    effort = Effort(strategy, seed, examined, time.monotonic() - start)
    return Witness("none-found", (), False, effort)


def _run_cap(h: HypergraphHandle) -> int | None:
    if h.kind == "stepup":
        return 3 if h.k == 5 else 4
    if h.kind == "h4":
        return 5
    return None


def _find_pruned(h, size, budget, seed, start):
    """Global DFS; prunes sets whose delta shape forbids clique completion.

    A candidate with at least one extremum and a monotone run reaching the
    handle's cap cannot extend to a clique (fully monotone prefixes are kept:
    they may complete through base-edge membership alone).
    """
    cap = _run_cap(h)
    n = h.num_vertices
    k = h.k
    nodes = 0
    examined = 0

    def deltas_ok(deltas):
        if cap is None or len(deltas) < cap:
            return True
        extrema = 0
        longest = run = 2
        for i in range(2, len(deltas)):
            if (deltas[i] > deltas[i - 1]) == (deltas[i - 1] > deltas[i - 2]):
                run += 1
            else:
                extrema += 1
                run = 2
            longest = max(longest, run)
        return extrema == 0 or longest < cap

    def extend(chosen):
        nonlocal nodes, examined
        if len(chosen) == size:
            return chosen
        lo = chosen[-1] + 1 if chosen else 0
        for v in range(lo, n):
            nodes += 1
            if nodes > budget:
                raise _BudgetUp()
            if len(chosen) >= k - 1:
                ok = True
                for sub in combinations(chosen, k - 1):
                    examined += 1
                    if not h.has_edge(sub + (v,)):
                        ok = False
                        break
                if not ok:
                    continue
            new = chosen + (v,)
            if len(new) >= 3:
                ds = [(new[i] ^ new[i + 1]).bit_length() - 1 for i in range(len(new) - 1)]
                if not deltas_ok(ds):
                    continue
            got = extend(new)
            if got is not None:
                return got
        return None

    strategy = f"delta-pruned:{budget}"
    try:
        found = extend(())
    except _BudgetUp:
        effort = Effort(strategy, seed, examined, time.monotonic() - start)
        return Witness("none-found", (), False, effort,
                       note="inconclusive: node budget exhausted")
    effort = Effort(strategy, seed, examined, time.monotonic() - start)
    if found is None:
        return Witness("none-found", (), False, effort)
    return Witness("clique", found, is_clique(h, found), effort)


class _BudgetUp(Exception):
    pass


# k-independence


def _clique_masks(h, t, scope):
    scope = tuple(scope)
    masks = []
    for sub in combinations(range(len(scope)), t):
        if is_clique(h, tuple(scope[i] for i in sub)):
            mask = 0
            for i in sub:
                mask |= 1 << i
            masks.append(mask)
    return masks


def max_t_independent(h: HypergraphHandle, t: int, scope, *,
                      seed: int = 0, samples: int = 2000) -> Witness:
    """A maximum subset of ``scope`` containing no complete t-set.

    Exact (branch and bound over clique masks, lexicographically least
    maximum set) up to 32 scope vertices; above that a sampled greedy lower
    bound is returned, labeled and unverified.
    """
    scope = tuple(sorted(scope))
    if t < h.k:
        raise ValueError("t must be at least the uniformity")
    start = time.monotonic()
    if len(scope) > EXACT_INDEPENDENCE_CAP:
        return _greedy_independent(h, t, scope, seed, samples, start)
    masks = _clique_masks(h, t, scope)
    per_vertex = [[] for _ in scope]
    for m in masks:
        mm = m
        while mm:
            v = (mm & -mm).bit_length() - 1
            mm &= mm - 1
            per_vertex[v].append(m)
    best = ()
    best_mask = 0
    n = len(scope)

    def bb(idx, chosen_mask, chosen_len):
        nonlocal best, best_mask
        if chosen_len + (n - idx) <= len(best):
            return
        if idx == n:
            if chosen_len > len(best):
                best = tuple(i for i in range(n) if chosen_mask >> i & 1)
                best_mask = chosen_mask
            return
        new_mask = chosen_mask | (1 << idx)
        if all((m & new_mask) != m for m in per_vertex[idx]):
            bb(idx + 1, new_mask, chosen_len + 1)
        bb(idx + 1, chosen_mask, chosen_len)

    bb(0, 0, 0)
    vertices = tuple(scope[i] for i in best)
    effort = Effort("exact-bb", seed, len(masks), time.monotonic() - start)
    return Witness("independent-set", vertices, True, effort)


def _greedy_independent(h, t, scope, seed, samples, start):
    rng = child_rng(seed, "greedy-independent")
    alive = set(scope)
    found = []
    for _ in range(samples):
        if len(alive) < t:
            break
        cand = tuple(sorted(rng.sample(sorted(alive), t)))
        if is_clique(h, cand):
            found.append(cand)
    while found:
        counts = {}
        for c in found:
            for v in c:
                counts[v] = counts.get(v, 0) + 1
        drop = max(sorted(counts), key=lambda v: counts[v])
        alive.discard(drop)
        found = [c for c in found if drop not in c]
    effort = Effort(f"greedy:{samples}", seed, samples, time.monotonic() - start)
    return Witness("independent-set", tuple(sorted(alive)), False, effort,
                   note="lower-bound")


def brute_force_alpha_t(h: HypergraphHandle, t: int, scope) -> int:
    """Exact independence number by descending-size subset enumeration.

    The oracle side of the exact search: no pruning beyond an early exit on
    the first complete t-subset found inside a candidate.
    """
    scope = tuple(sorted(scope))
    if len(scope) > BRUTE_FORCE_CAP:
        raise ValueError(f"oracle capped at {BRUTE_FORCE_CAP} vertices")
    if t < h.k:
        raise ValueError("t must be at least the uniformity")
    for size in range(len(scope), -1, -1):
        for cand in combinations(scope, size):
            if not _contains_clique(h, cand, t):
                return size
    return 0


# witness file format

_MAGIC = "ER-WITNESS v1"


def write_witness(w: Witness, path) -> None:
    lines = [
        _MAGIC,
        f"kind={w.kind}",
        "vertices=" + " ".join(str(v) for v in w.vertices),
        f"verified={'true' if w.verified else 'false'}",
        f"strategy={w.effort.strategy}",
        f"seed={w.effort.seed}",
        f"tuples_examined={w.effort.tuples_examined}",
        f"note={w.note}",
    ]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_witness(path) -> Witness:
    lines = Path(path).read_bytes().decode("ascii").split("\n")
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"not a {_MAGIC} file: {path}")
    fields = {}
    for line in lines[1:]:
        if line:
            key, _, value = line.partition("=")
            fields[key] = value
    vertices = tuple(int(tok) for tok in fields["vertices"].split()) \
        if fields["vertices"] else ()
    effort = Effort(fields["strategy"], int(fields["seed"]),
                    int(fields["tuples_examined"]), 0.0)
    return Witness(fields["kind"], vertices, fields["verified"] == "true",
                   effort, fields.get("note", ""))
