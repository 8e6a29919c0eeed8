"""Interval graph recognition with certificates.

Graphs are plain adjacency mappings ``{vertex: set(neighbours)}`` with
sortable vertex ids. Recognition runs repeated LexBFS+ sweeps and accepts the
first sweep whose order is an interval ordering (every vertex's later
neighbours form a contiguous run right after it). A failing graph is
certified either by a chordless cycle of length at least four or, for chordal
graphs, by an asteroidal triple with its three connecting paths.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Hashable, Iterable, Mapping, Optional, Sequence, Union

Graph = Mapping[Hashable, "set"]


class WitnessKind(Enum):
    CHORDLESS_CYCLE = "ChordlessCycle"
    ASTEROIDAL_TRIPLE = "AsteroidalTriple"


@dataclass(frozen=True)
class ForbiddenWitness:
    """Certificate that a graph is not an interval graph.

    For a chordless cycle ``vertices`` lists the cycle in order and ``paths``
    is empty. For an asteroidal triple ``vertices`` holds the triple and
    ``paths`` the three connecting paths (between vertices 0-1, 1-2, 0-2),
    each avoiding the closed neighbourhood of the third vertex.
    """

    kind: WitnessKind
    vertices: tuple
    paths: tuple = ()

    @property
    def support(self) -> tuple:
        """Every vertex the certificate touches, sorted."""
        seen = set(self.vertices)
        for p in self.paths:
            seen.update(p)
        return tuple(sorted(seen))


@dataclass
class IntervalModel:
    """Integer closed intervals realising a graph; ``component`` maps vertex to component index."""

    intervals: dict = field(default_factory=dict)
    component: dict = field(default_factory=dict)

    def rank(self) -> dict:
        """Position of each vertex in left-endpoint order within its component."""
        out = {}
        by_comp: dict = {}
        for v in self.intervals:
            by_comp.setdefault(self.component.get(v, 0), []).append(v)
        for members in by_comp.values():
            members.sort(key=lambda v: (self.intervals[v][0], self.intervals[v][1], v))
            for i, v in enumerate(members):
                out[v] = i
        return out

    def intersects(self, u, v) -> bool:
        if self.component.get(u, 0) != self.component.get(v, 0):
            return False  # components live on separate axes
        lu, ru = self.intervals[u]
        lv, rv = self.intervals[v]
        return lu <= rv and lv <= ru

    def realizes(self, graph: Graph) -> bool:
        """Exact check that interval intersection equals adjacency (quadratic)."""
        verts = sorted(graph)
        if set(verts) != set(self.intervals):
            return False
        for u, v in combinations(verts, 2):
            if self.intersects(u, v) != (v in graph[u]):
                return False
        return True


# --------------------------------------------------------------------------
# graph helpers


def induced(graph: Graph, vertices: Iterable) -> dict:
    keep = set(vertices)
    return {v: graph[v] & keep for v in keep}


def without(graph: Graph, removed: Iterable) -> dict:
    drop = set(removed)
    return {v: graph[v] - drop for v in graph if v not in drop}


def connected_components(graph: Graph) -> list[list]:
    """Components as sorted vertex lists, ordered by smallest member."""
    seen = set()
    comps = []
    for s in sorted(graph):
        if s in seen:
            continue
        seen.add(s)
        stack, comp = [s], []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in graph[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _to_index(graph: Graph) -> tuple[list, list[set[int]]]:
    verts = sorted(graph)
    idx = {v: i for i, v in enumerate(verts)}
    adj = [{idx[w] for w in graph[v]} for v in verts]
    return verts, adj


# --------------------------------------------------------------------------
# LexBFS


class _Slice:
    __slots__ = ("members", "prev", "next")

    def __init__(self):
        self.members: dict = {}
        self.prev: Optional[_Slice] = None
        self.next: Optional[_Slice] = None


def lexbfs(adj: Sequence[set], hint: Sequence[int]) -> list[int]:
    """Lexicographic BFS; ties go to the vertex earliest in ``hint``."""
    n = len(adj)
    if n == 0:
        return []
    rank = [0] * n
    for i, v in enumerate(hint):
        rank[v] = i
    head = _Slice()
    head.members = dict.fromkeys(hint)
    slice_of = [head] * n
    visited = [False] * n
    order = []
    while head is not None:
        v = next(iter(head.members))
        del head.members[v]
        if not head.members:
            head = head.next
            if head is not None:
                head.prev = None
        visited[v] = True
        order.append(v)
        nbrs = [w for w in adj[v] if not visited[w]]
        nbrs.sort(key=rank.__getitem__)
        split: dict = {}
        for w in nbrs:
            s = slice_of[w]
            t = split.get(s)
            if t is None:
                t = _Slice()
                t.prev, t.next = s.prev, s
                if s.prev is not None:
                    s.prev.next = t
                s.prev = t
                if s is head:
                    head = t
                split[s] = t
            del s.members[w]
            t.members[w] = None
            slice_of[w] = t
        for s in split:
            if not s.members:
                if s.prev is not None:
                    s.prev.next = s.next
                if s.next is not None:
                    s.next.prev = s.prev
                if s is head:
                    head = s.next
    return order


def lexbfs_plus(adj: Sequence[set], previous: Sequence[int]) -> list[int]:
    """LexBFS+: ties go to the vertex appearing last in ``previous``."""
    return lexbfs(adj, list(reversed(previous)))


def is_interval_ordering(adj: Sequence[set], order: Sequence[int]) -> bool:
    pos = [0] * len(adj)
    for i, v in enumerate(order):
        pos[v] = i
    for v in order:
        pv = pos[v]
        later = [pos[w] for w in adj[v] if pos[w] > pv]
        if later and max(later) - pv != len(later):
            return False
    return True


def _model_from_order(adj: Sequence[set], order: Sequence[int]) -> list[tuple[int, int]]:
    pos = [0] * len(adj)
    for i, v in enumerate(order):
        pos[v] = i
    out = [(0, 0)] * len(adj)
    for v in order:
        right = max([pos[w] for w in adj[v]] + [pos[v]])
        out[v] = (2 * pos[v], 2 * right + 1)
    return out


# --------------------------------------------------------------------------
# certificates


def _peo_violation(adj: Sequence[set], order: Sequence[int]) -> Optional[tuple[int, int, int]]:
    """Check that reversed LexBFS order is a perfect elimination ordering.

    Returns ``(v, p, w)`` with p, w earlier neighbours of v that are not
    adjacent, or None when the graph is chordal.
    """
    pos = [0] * len(adj)
    for i, v in enumerate(order):
        pos[v] = i
    for v in order:
        earlier = [w for w in adj[v] if pos[w] < pos[v]]
        if len(earlier) < 2:
            continue
        p = max(earlier, key=pos.__getitem__)
        for w in earlier:
            if w != p and w not in adj[p]:
                return v, p, w
    return None


def _bfs_path(adj: Sequence[set], src: int, dst: int, allowed) -> Optional[list[int]]:
    prev = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        if v == dst:
            path = []
            while v is not None:
                path.append(v)
                v = prev[v]
            return path[::-1]
        for w in sorted(adj[v]):
            if w not in prev and (w == dst or allowed(w)):
                prev[w] = v
                queue.append(w)
    return None


def _cycle_through(adj: Sequence[set], v: int, x: int, y: int) -> Optional[list[int]]:
    blocked = adj[v]
    path = _bfs_path(adj, x, y, lambda w: w != v and w not in blocked)
    if path is None:
        return None
    return [v] + path


def _chordless_cycle(adj: Sequence[set], hint: Optional[tuple[int, int, int]]) -> list[int]:
    if hint is not None:
        cyc = _cycle_through(adj, *hint)
        if cyc is not None:
            return cyc
    n = len(adj)
    for v in range(n):
        nv = adj[v]
        # components of G - N[v]; two non-adjacent neighbours touching one component close a cycle
        label = {}
        for s in range(n):
            if s == v or s in nv or s in label:
                continue
            label[s] = s
            stack = [s]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w != v and w not in nv and w not in label:
                        label[w] = s
                        stack.append(w)
        touching: dict = {}
        for x in sorted(nv):
            for c in sorted({label[w] for w in adj[x] if w in label}):
                touching.setdefault(c, []).append(x)
        for c in sorted(touching):
            xs = touching[c]
            for x, y in combinations(xs, 2):
                if y not in adj[x]:
                    cyc = _cycle_through(adj, v, x, y)
                    if cyc is not None:
                        return cyc
    raise RuntimeError("graph reported non-chordal but no chordless cycle found")


def _removal_labels(adj: Sequence[set], v: int) -> list[int]:
    """Component label of every vertex in G - N[v]; -1 for removed vertices."""
    n = len(adj)
    label = [-1] * n
    nv = adj[v]
    for s in range(n):
        if s == v or s in nv or label[s] >= 0:
            continue
        label[s] = s
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w != v and w not in nv and label[w] < 0:
                    label[w] = s
                    stack.append(w)
    return label


def _find_at(adj: Sequence[set], candidates: Sequence[int]) -> Optional[tuple[int, int, int]]:
    labels: dict[int, list[int]] = {}

    def lab(v):
        if v not in labels:
            labels[v] = _removal_labels(adj, v)
        return labels[v]

    cand = list(candidates)
    for a in cand:
        la = lab(a)
        groups: dict = {}
        for b in cand:
            if b != a and la[b] >= 0:
                groups.setdefault(la[b], []).append(b)
        for members in groups.values():
            for b, c in combinations(members, 2):
                if c in adj[b]:
                    continue
                lb, lc = lab(b), lab(c)
                if lb[a] >= 0 and lb[a] == lb[c] and lc[a] >= 0 and lc[a] == lc[b]:
                    return a, b, c
    return None


def _asteroidal_triple(adj: Sequence[set]) -> Optional[tuple[tuple[int, int, int], tuple]]:
    n = len(adj)
    simplicial = [v for v in range(n) if all(w in adj[u] for u, w in combinations(adj[v], 2))]
    triple = _find_at(adj, simplicial)
    if triple is None:
        triple = _find_at(adj, range(n))
    if triple is None:
        return None
    a, b, c = triple

    def path(x, y, third):
        blocked = adj[third] | {third}
        return tuple(_bfs_path(adj, x, y, lambda w: w not in blocked))

    return triple, (path(a, b, c), path(b, c, a), path(a, c, b))


# --------------------------------------------------------------------------
# recognition


def _recognize_connected(adj: Sequence[set], max_sweeps: int = 10):
    n = len(adj)
    if n <= 2:
        order = list(range(n))
        return _model_from_order(adj, order)
    order = lexbfs(adj, list(range(n)))
    violation = _peo_violation(adj, order)
    if violation is not None:
        return (WitnessKind.CHORDLESS_CYCLE, _chordless_cycle(adj, violation), ())
    for _ in range(max_sweeps):
        for cand in (order, order[::-1]):
            if is_interval_ordering(adj, cand):
                return _model_from_order(adj, cand)
        order = lexbfs_plus(adj, order)
    found = _asteroidal_triple(adj)
    if found is not None:
        triple, paths = found
        return (WitnessKind.ASTEROIDAL_TRIPLE, list(triple), paths)
    # chordal and AT-free, so interval; keep sweeping
    for _ in range(n + max_sweeps):
        for cand in (order, order[::-1]):
            if is_interval_ordering(adj, cand):
                return _model_from_order(adj, cand)
        order = lexbfs_plus(adj, order)
    raise RuntimeError("LexBFS+ sweeps failed to produce an interval ordering")


def recognize_interval(graph: Graph) -> Union[IntervalModel, ForbiddenWitness]:
    """Return an exact interval model of ``graph`` or a forbidden-subgraph witness.

    Each connected component is realised independently from coordinate 0.
    """
    model = IntervalModel()
    for ci, comp in enumerate(connected_components(graph)):
        verts, adj = _to_index(induced(graph, comp))
        res = _recognize_connected(adj)
        if isinstance(res, tuple):
            kind, vs, paths = res
            return ForbiddenWitness(
                kind,
                tuple(verts[i] for i in vs),
                tuple(tuple(verts[i] for i in p) for p in paths),
            )
        for i, iv in enumerate(res):
            model.intervals[verts[i]] = iv
            model.component[verts[i]] = ci
    return model


def is_interval(graph: Graph) -> bool:
    return isinstance(recognize_interval(graph), IntervalModel)


def interval_representation(graph: Graph) -> IntervalModel:
    res = recognize_interval(graph)
    if not isinstance(res, IntervalModel):
        raise ValueError(f"graph is not interval: {res.kind.value} on {list(res.vertices)}")
    return res


def is_i_critical(graph: Graph, v) -> bool:
    """True iff removing ``v`` leaves an interval graph."""
    if v not in graph:
        raise KeyError(f"vertex {v!r} not in graph")
    return is_interval(without(graph, [v]))


# --------------------------------------------------------------------------
# brute-force oracles


def _umbrella_free_order(adj: Sequence[set]) -> Optional[list[int]]:
    """Exhaustive backtracking for an interval ordering.

    A placed vertex is "closed" once a non-neighbour follows it; closed
    vertices may gain no further neighbours. Whether a partial order can be
    completed depends only on the placed and open sets, so failures are cached.
    """
    n = len(adj)
    nbr_mask = [sum(1 << w for w in adj[v]) for v in range(n)]
    full = (1 << n) - 1
    dead: set[tuple[int, int]] = set()
    order: list[int] = []

    def rec(placed: int, open_: int) -> bool:
        if placed == full:
            return True
        if (placed, open_) in dead:
            return False
        closed = placed & ~open_
        for w in range(n):
            bit = 1 << w
            if placed & bit or nbr_mask[w] & closed:
                continue
            new_placed = placed | bit
            closing = open_ & ~nbr_mask[w]
            # closing vertices must have no neighbours left to place
            ok = True
            u = closing
            while u:
                low = u & -u
                if nbr_mask[low.bit_length() - 1] & ~new_placed:
                    ok = False
                    break
                u ^= low
            if not ok:
                continue
            order.append(w)
            if rec(new_placed, (open_ & ~closing) | bit):
                return True
            order.pop()
        dead.add((placed, open_))
        return False

    return list(order) if rec(0, 0) else None


def _is_chordal_simplicial(adj: Sequence[set]) -> bool:
    alive = set(range(len(adj)))
    while alive:
        for v in sorted(alive):
            nb = adj[v] & alive
            if all(w in adj[u] for u, w in combinations(nb, 2)):
                alive.discard(v)
                break
        else:
            return False
    return True


def _is_at_free(adj: Sequence[set]) -> bool:
    return _find_at(adj, range(len(adj))) is None


def brute_force_interval(graph: Graph, max_n: int = 9) -> tuple[bool, Optional[IntervalModel]]:
    """Decide interval-ness by exhaustive ordering search, cross-checked by
    chordality plus asteroidal-triple freeness."""
    if len(graph) > max_n:
        raise ValueError(f"brute force limited to {max_n} vertices, got {len(graph)}")
    verts, adj = _to_index(graph)
    order = _umbrella_free_order(adj)
    by_characterisation = _is_chordal_simplicial(adj) and _is_at_free(adj)
    if (order is not None) != by_characterisation:
        raise AssertionError(f"brute-force oracles disagree on {dict(graph)}")
    if order is None:
        return False, None
    ivs = _model_from_order(adj, order)
    comp_of = {}
    for ci, comp in enumerate(connected_components(graph)):
        for v in comp:
            comp_of[v] = ci
    return True, IntervalModel({verts[i]: ivs[i] for i in range(len(verts))}, comp_of)


def witness_is_valid(graph: Graph, witness: ForbiddenWitness) -> bool:
    """Re-verify a certificate structurally against ``graph``."""
    if witness.kind is WitnessKind.CHORDLESS_CYCLE:
        cyc = list(witness.vertices)
        k = len(cyc)
        if k < 4 or len(set(cyc)) != k:
            return False
        for i, j in combinations(range(k), 2):
            adjacent = cyc[j] in graph[cyc[i]]
            consecutive = j - i == 1 or (i == 0 and j == k - 1)
            if adjacent != consecutive:
                return False
        return True
    a, b, c = witness.vertices
    if b in graph[a] or c in graph[a] or c in graph[b]:
        return False
    for path, (x, y), third in zip(witness.paths, ((a, b), (b, c), (a, c)), (c, a, b)):
        if not path or path[0] != x or path[-1] != y:
            return False
        blocked = graph[third] | {third}
        if any(p in blocked for p in path):
            return False
        if any(q not in graph[p] for p, q in zip(path, path[1:])):
            return False
    return True
