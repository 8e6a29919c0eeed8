"""Clone graph construction and clone-level arbitration of deferred overlaps."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Mapping, Optional

from .interval import connected_components
from .layout import Key, Subcontig, pair_key
from .model import ValidOverlap


@dataclass
class CloneGraph:
    """Undirected clone graph; ``witnesses[(x, y)]`` lists fragment pairs behind an edge."""

    adj: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)

    @property
    def vertices(self) -> list[str]:
        return sorted(self.adj)

    @property
    def edges(self) -> list[Key]:
        return sorted(self.witnesses)

    def components(self) -> list[list[str]]:
        return connected_components(self.adj)

    def add_vertex(self, v: str) -> None:
        self.adj.setdefault(v, set())

    def add_edge(self, x: str, y: str, witness: Optional[Key] = None) -> None:
        if x == y:
            return
        self.add_vertex(x)
        self.add_vertex(y)
        self.adj[x].add(y)
        self.adj[y].add(x)
        wl = self.witnesses.setdefault(pair_key(x, y), [])
        if witness is not None:
            wl.append(witness)

    def remove_edge(self, x: str, y: str) -> None:
        self.adj[x].discard(y)
        self.adj[y].discard(x)
        self.witnesses.pop(pair_key(x, y), None)

    def remove_vertex(self, v: str) -> None:
        for w in list(self.adj.get(v, ())):
            self.remove_edge(v, w)
        self.adj.pop(v, None)

    def witness_count(self, x: str, y: str) -> int:
        return len(self.witnesses.get(pair_key(x, y), ()))

    def copy(self) -> "CloneGraph":
        return CloneGraph({v: set(n) for v, n in self.adj.items()}, {k: list(w) for k, w in self.witnesses.items()})


def fragment_contacts(sc: Subcontig, lengths: Mapping[str, int]):
    """Yield ``(f, g, intersection)`` for placed fragment pairs that overlap or abut."""
    pl = sc.placements  # sorted by start
    for i, p in enumerate(pl):
        end = p.start + lengths[p.frag_id]
        for q in pl[i + 1:]:
            if q.start > end:
                break
            inter = min(end, q.start + lengths[q.frag_id]) - q.start
            if inter >= 0:
                yield p.frag_id, q.frag_id, inter


def build_clone_graph(
    subcontigs: Iterable[Subcontig],
    lengths: Mapping[str, int],
    clone_of: Mapping[str, str],
    clones: Iterable[str] = (),
) -> CloneGraph:
    """Edges join clones with an overlapping fragment pair inside some subcontig.

    A pair counts when its recorded overlap agrees with the placement (the
    subcontig's witnesses), so abutting nt-pairs join clones too.
    """
    g = CloneGraph()
    for c in clones:
        g.add_vertex(c)
    for sc in subcontigs:
        for c in sc.member_clones:
            g.add_vertex(c)
        for f, h in sc.witnesses:
            x, y = clone_of[f], clone_of[h]
            if x != y:
                g.add_edge(x, y, pair_key(f, h))
    for wl in g.witnesses.values():
        wl.sort()
    return g


class Verdict(Enum):
    ACCEPTED = "Accepted"
    REPEAT_INDUCED = "RepeatInduced"
    AMBIGUOUS = "Ambiguous"


def resolve_inconsistent_overlaps(
    deferred: Iterable[ValidOverlap],
    graph: CloneGraph,
    clone_of: Mapping[str, str],
    conflicts: Iterable[tuple[Key, Key]] = (),
) -> dict[Key, Verdict]:
    """Arbitrate deferred overlaps by clone-pair witness counts.

    An overlap needs at least one witness for its clone pair and must beat
    every deferred overlap it conflicts with; equal counts reject both.
    """
    deferred = {ov.key: ov for ov in deferred}

    def weight(key: Key) -> int:
        x, y = clone_of[key[0]], clone_of[key[1]]
        return 0 if x == y else graph.witness_count(x, y)

    rivals: dict[Key, set] = defaultdict(set)
    for k1, k2 in conflicts:
        if k1 in deferred and k2 in deferred:
            rivals[k1].add(k2)
            rivals[k2].add(k1)
    out = {}
    for key in sorted(deferred):
        w = weight(key)
        if w == 0:
            out[key] = Verdict.REPEAT_INDUCED
            continue
        verdict = Verdict.ACCEPTED
        for r in sorted(rivals[key]):
            wr = weight(r)
            if wr > w:
                verdict = Verdict.REPEAT_INDUCED
                break
            if wr == w:
                verdict = Verdict.AMBIGUOUS
        out[key] = verdict
    return out


def write_clone_graph(graph: CloneGraph, out: IO[str]) -> None:
    out.write("clone_a\tclone_b\twitness_count\n")
    for x, y in graph.edges:
        out.write(f"{x}\t{y}\t{graph.witness_count(x, y)}\n")


def read_clone_graph(stream: Iterable[str]) -> dict[Key, int]:
    edges = {}
    for line in stream:
        tok = line.split()
        if not tok or tok[0] == "clone_a":
            continue
        edges[pair_key(tok[0], tok[1])] = int(tok[2])
    return edges
