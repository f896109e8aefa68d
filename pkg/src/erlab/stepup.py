"""The generic stepping-up lift from a (k-1)-graph to a k-graph.

Given a base (k-1)-graph on N vertices, the lifted k-graph lives on 2**N
vertices.  A k-tuple e with delta sequence shape count m(e) is an edge iff

  (i)   m(e) == 0 and the (sorted) delta values form a base edge,
  (ii)  m(e) == k - 3,
  (iii) k >= 6 and m(e) == k - 4.

Includes the monotone-family membership transfer checker, the shape-6
selector over the first thirteen vertices of a candidate clique, the
independence refuter that extracts a verified K_{k+1} from any vertex set of
size 4n^2 (n the base k-independence number), and the squaring recursion
calculator 4 x^2 for the bound chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .bitdelta import (LOCAL_MAX, LOCAL_MIN, OrderedVertexSet, delta,
                       delta_sequence, profile_of_deltas)
from .h4 import MAX_LIFT_BASE, HypergraphHandle

RULE_I, RULE_II, RULE_III, NO_RULE = "i", "ii", "iii", "none"


def build_stepup(base: HypergraphHandle, k: int) -> HypergraphHandle:
    """Implicit lift handle; k must be base.k + 1 and at least 5."""
    if k < 5:
        raise ValueError("lift uniformity must be at least 5")
    if k != base.k + 1:
        raise ValueError("lift needs a base of uniformity k-1")
    if base.num_vertices > MAX_LIFT_BASE:
        raise ValueError(f"base vertex count above {MAX_LIFT_BASE}")
    return HypergraphHandle(k, 1 << base.num_vertices, "stepup", base=base)


def stepup_edge(lift: HypergraphHandle, e) -> tuple[bool, str]:
    """Edge verdict and the rule that fired."""
    if lift.kind != "stepup":
        raise ValueError("need a lifted handle")
    e = tuple(e)
    k = lift.k
    if len(e) != k:
        raise ValueError(f"edge must have {k} vertices")
    if any(b <= a for a, b in zip(e, e[1:])):
        raise ValueError("edge vertices must be strictly increasing")
    if e[0] < 0 or e[-1] >= lift.num_vertices:
        raise ValueError("vertex outside lifted graph")
    profile = delta_sequence(e)
    m = profile.extrema
    if m == 0:
        key = tuple(sorted(profile.deltas))
        if lift.base.has_edge(key):
            return True, RULE_I
        return False, NO_RULE
    if m == k - 3:
        return True, RULE_II
    if k >= 6 and m == k - 4:
        return True, RULE_III
    return False, NO_RULE


def _lift_edge_bool(base: HypergraphHandle, k: int, e) -> bool:
    deltas = [(e[i] ^ e[i + 1]).bit_length() - 1 for i in range(k - 1)]
    m = 0
    for i in range(1, k - 2):
        a, b, c = deltas[i - 1], deltas[i], deltas[i + 1]
        if a < b > c or a > b < c:
            m += 1
    if m == 0:
        return base.has_edge(tuple(sorted(deltas)))
    return m == k - 3 or (k >= 6 and m == k - 4)


@dataclass(frozen=True)
class MembershipTransferReport:
    """Result of the monotone-family membership transfer check."""

    antecedent: bool    # every k-subset of the family is a lifted edge
    holds: bool         # implication verified
    violation: tuple | None  # (delta-subset, family-subset) breaking it


def check_property_vi(lift: HypergraphHandle, family) -> MembershipTransferReport:
    """If all k-subsets of a monotone family are edges, all (k-1)-subsets of
    its delta values are base edges; reports the first violated instance."""
    verts = tuple(family)
    k = lift.k
    if len(verts) < k:
        raise ValueError("family smaller than uniformity")
    profile = delta_sequence(verts)
    if not profile.monotone:
        raise ValueError("family must have a monotone delta sequence")
    antecedent = True
    for sub in combinations(verts, k):
        if not lift.has_edge(sub):
            antecedent = False
            break
    if not antecedent:
        return MembershipTransferReport(False, True, None)
    for dsub in combinations(sorted(profile.deltas), k - 1):
        if not lift.base.has_edge(dsub):
            return MembershipTransferReport(True, False, (dsub, verts))
    return MembershipTransferReport(True, True, None)


@dataclass(frozen=True)
class Shape6Result:
    kind: str  # "shape6" | "run"
    indices: tuple[int, ...]      # 0-based vertex indices into P (shape6)
    run_positions: tuple[int, ...] = ()  # 0-based delta positions (run)


def monotone_run_cap(k: int) -> int:
    """Longest consecutive monotone delta run compatible with a clique whose
    delta sequence is not fully monotone: 3 deltas for k = 5, else 4."""
    if k < 5:
        raise ValueError("defined for lifted uniformities k >= 5")
    return 3 if k == 5 else 4


def find_shape6(P, k: int) -> Shape6Result:
    """A 6-subset of the first 13 vertices with one extremum and two
    monotones, or an obstructing consecutive monotone run.

    The run length threshold is ``monotone_run_cap(k)``; such a run cannot
    occur inside a lifted clique whose delta sequence has an extremum.
    """
    verts = tuple(P)
    if len(verts) < 13:
        raise ValueError("need at least 13 vertices")
    deltas = [delta(verts[i], verts[i + 1]) for i in range(12)]
    cap = monotone_run_cap(k)
    run = _find_run(deltas, cap)
    if run is not None:
        return Shape6Result("run", (), run)
    idx = _shape6_indices(deltas)
    profile = delta_sequence(verts[i] for i in idx)
    if profile.extrema != 1 or profile.monotones != 2:
        raise RuntimeError(f"shape-6 selection failed its own recheck: {idx}")
    return Shape6Result("shape6", idx)


def _find_run(deltas, cap):
    for start in range(len(deltas) - cap + 1):
        window = deltas[start:start + cap]
        if all(a < b for a, b in zip(window, window[1:])) or \
           all(a > b for a, b in zip(window, window[1:])):
            return tuple(range(start, start + cap))
    return None


def _shape6_indices(deltas):
    """Case analysis over 12 deltas (run-free); returns 0-based vertex indices."""
    idx = _shape6_oriented(deltas)
    if idx is not None:
        return idx
    mirrored = _shape6_oriented(list(reversed(deltas)))
    if mirrored is None:
        raise RuntimeError("shape-6 case analysis fell through both orientations")
    return tuple(sorted(13 - i for i in mirrored))


def _shape6_oriented(d):
    """Work in 1-based delta coordinates d[1..12]; vertex j pairs with delta j.

    Returns 0-based vertex indices, or None when the peak position requires
    the mirrored orientation.
    """
    dd = [None] + list(d)  # 1-based view
    j1 = max(range(1, 13), key=lambda p: (dd[p], -p))
    if j1 >= 7:
        return None
    j2 = max(range(j1 + 1, 13), key=lambda p: (dd[p], -p))
    # a non-peak strictly between the two peaks gives the pattern directly
    for u in range(j1 + 2, j2 - 1):
        if not (dd[u - 1] < dd[u] > dd[u + 1]):
            return _verts(j1, u - 1, u, u + 1, u + 2, j2 + 1)
    # now j2 <= j1 + 4
    if j1 == 1:
        for u in range(7, 12):
            if dd[u - 1] > dd[u] < dd[u + 1]:
                return _verts(j1, j2, u - 1, u, u + 1, u + 2)
        raise RuntimeError("run-free sequence must have a valley in [7, 11]")
    if j2 <= 9:
        for u in (j2 + 1, j2 + 2):
            if dd[u] > dd[u + 1]:
                return _verts(j1 - 1, j1, j2, u, u + 1, u + 2)
        return _verts(j1, j2, j2 + 1, j2 + 2, j2 + 3, j2 + 4)
    # j2 == 10 forces j1 == 6
    for u in (1, 2, 3):
        if dd[u] < dd[u + 1]:
            return _verts(u, u + 1, u + 2, 7, 12, 13)
    return _verts(1, 2, 3, 4, 5, 7)


def _verts(*one_based):
    return tuple(i - 1 for i in one_based)


class RefutationError(RuntimeError):
    """The independence refutation failed; signals a structural bug."""


@dataclass(frozen=True)
class RefutationWitness:
    branch: str  # "monotone-run" | "alternating-extrema"
    vertices: tuple[int, ...]  # a verified K_{k+1} in the lifted graph
    base_clique: tuple[int, ...]  # base K_k used by the monotone branch, else ()
    alpha: int
    verified: bool


def refute_independent(lift: HypergraphHandle, Q, alpha: int | None = None) -> RefutationWitness:
    """Extract a verified K_{k+1} from a vertex set of size >= 4 n^2.

    n is the base graph's k-independence number, recomputed here with the
    brute-force oracle rather than trusted from the caller (a supplied value
    is only cross-checked).  Either the delta sequence has a monotone run of
    n+1 entries, whose distinct values contain a complete base k-set that
    lifts through a monotone family, or it has at least 4n extrema and the
    alternating construction applies (with the dominant-peak refinement for
    k = 5).  The returned set is re-verified edge by edge before return.
    """
    from .search import brute_force_alpha_t, is_clique

    if lift.kind != "stepup":
        raise ValueError("need a lifted handle")
    k = lift.k
    base = lift.base
    n = brute_force_alpha_t(base, k, range(base.num_vertices))
    if alpha is not None and alpha != n:
        raise ValueError(f"supplied alpha {alpha} != oracle value {n}")
    verts = tuple(Q)
    if len(verts) < 4 * n * n:
        raise ValueError(f"need at least 4n^2 = {4 * n * n} vertices")
    deltas = [delta(verts[i], verts[i + 1]) for i in range(len(verts) - 1)]
    extrema = _extrema_positions(deltas)

    if len(extrema) < 4 * n:
        run = _longest_run(deltas)
        if len(run) < n + 1:
            raise RefutationError(
                f"fewer than 4n extrema but longest run has {len(run)} < n+1 deltas")
        family = _family_from_run(verts, run[:n + 1], deltas)
        clique, base_clique = _lift_monotone(lift, family, n)
        branch = "monotone-run"
    else:
        clique = _alternating_clique(lift, verts, deltas, extrema, n)
        base_clique = ()
        branch = "alternating-extrema"
        if clique is None:
            # k = 5 fallback: a monotone run among the peak values
            family = _family_from_peaks(verts, deltas, extrema, n)
            if family is None:
                raise RefutationError("no dominant peak and no monotone peak run")
            clique, base_clique = _lift_monotone(lift, family, n)
            branch = "monotone-run"
    if not is_clique(lift, clique):
        raise RefutationError(f"candidate {clique} failed edge re-verification")
    return RefutationWitness(branch, tuple(clique), tuple(base_clique), n, True)


def _extrema_positions(deltas):
    out = []
    for i in range(1, len(deltas) - 1):
        a, b, c = deltas[i - 1], deltas[i], deltas[i + 1]
        if a < b > c or a > b < c:
            out.append(i)
    return out


def _longest_run(deltas):
    """Positions of the longest maximal monotone run (runs share extrema)."""
    best_start, best_end = 0, 0
    start = 0
    for i in range(2, len(deltas)):
        prev_up = deltas[i - 1] > deltas[i - 2]
        cur_up = deltas[i] > deltas[i - 1]
        if cur_up != prev_up:
            if i - 1 - start > best_end - best_start:
                best_start, best_end = start, i - 1
            start = i - 1
    if len(deltas) - 1 - start > best_end - best_start:
        best_start, best_end = start, len(deltas) - 1
    return tuple(range(best_start, best_end + 1))


def _family_from_run(verts, run, deltas):
    """Vertices realizing the run's deltas as their own delta sequence."""
    return [verts[p] for p in run] + [verts[run[-1] + 1]]


def _lift_monotone(lift, family, n):
    """Find a base K_k among the family's delta values and lift it."""
    from .search import is_clique

    k = lift.k
    profile = delta_sequence(family)
    values = profile.deltas
    if len(set(values)) != len(values):
        raise RefutationError("monotone family has repeated delta values")
    base_clique = None
    for cand in combinations(sorted(values), k):
        if is_clique(lift.base, cand):
            base_clique = cand
            break
    if base_clique is None:
        raise RefutationError(
            f"{len(values)} > alpha distinct values contain no base K_{k}")
    pos = {v: i for i, v in enumerate(values)}
    if profile.increasing:
        order = [pos[v] for v in base_clique]
        verts = [family[order[0]]] + [family[p + 1] for p in order]
    else:
        order = [pos[v] for v in reversed(base_clique)]
        verts = [family[p] for p in order] + [family[order[-1] + 1]]
    return tuple(verts), base_clique


def _alternating_clique(lift, verts, deltas, extrema, n):
    """The alternating-extrema K_{k+1}; None when k = 5 lacks a dominant peak."""
    k = lift.k
    kinds = {p: (LOCAL_MAX if deltas[p] > deltas[p - 1] else LOCAL_MIN)
             for p in extrema}
    if k == 5:
        peaks = [p for p in extrema if kinds[p] == LOCAL_MAX]
        # need a peak strictly dominating its neighboring peaks
        candidates = [pi for pi in range(1, len(peaks) - 1)
                      if deltas[peaks[pi]] > deltas[peaks[pi - 1]]
                      and deltas[peaks[pi]] > deltas[peaks[pi + 1]]]
        if not candidates:
            return None
        pi = max(candidates, key=lambda q: (deltas[peaks[q]], -peaks[q]))
        ei = extrema.index(peaks[pi])
        js = extrema[ei - 2:ei + 3]
        if len(js) != 5:
            raise RefutationError("dominant peak lacks flanking extrema")
    else:
        start = 0 if kinds[extrema[0]] == LOCAL_MAX else 1
        if start + k > len(extrema):
            raise RefutationError("not enough extrema for the alternating set")
        js = extrema[start:start + k]
    picks = [js[0]]
    for i, p in enumerate(js):
        if i % 2 == 1:  # valleys contribute both endpoints of their delta
            picks.extend((p, p + 1))
    if k % 2 == 1:
        picks.append(js[-1] + 1)
    picks = sorted(set(picks))
    if len(picks) != k + 1:
        raise RefutationError(f"alternating selection produced {len(picks)} vertices")
    return tuple(verts[p] for p in picks)


def _family_from_peaks(verts, deltas, extrema, n):
    """A monotone family realizing an n+1 run of consecutive peak values."""
    kinds = {p: (LOCAL_MAX if deltas[p] > deltas[p - 1] else LOCAL_MIN)
             for p in extrema}
    peaks = [p for p in extrema if kinds[p] == LOCAL_MAX]
    run = None
    length = 1
    for i in range(1, len(peaks)):
        rising = deltas[peaks[i]] > deltas[peaks[i - 1]]
        if i >= 2 and rising == (deltas[peaks[i - 1]] > deltas[peaks[i - 2]]):
            length += 1
        else:
            length = 2
        if length >= n + 1:
            run = peaks[i - n:i + 1]
            break
    if run is None:
        return None
    if deltas[run[0]] < deltas[run[1]]:
        return [verts[run[0]]] + [verts[p + 1] for p in run]
    return [verts[p] for p in run] + [verts[run[-1] + 1]]


def iterate_bound(k_target: int, s: int, base_value: int) -> int:
    """Apply x -> 4 x^2 once per uniformity step from 4 up to ``k_target``.

    ``s`` is carried as metadata only; the recursion itself never consults
    it.  Arbitrary precision: Python integers throughout.
    """
    if k_target < 5:
        raise ValueError("recursion starts at uniformity 5")
    x = int(base_value)
    for _ in range(k_target - 4):
        x = 4 * x * x
    return x
