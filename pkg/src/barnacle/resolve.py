"""Repair of non-interval clone-graph components.

Each round finds a forbidden-subgraph witness and tries, in order, to add a
missing edge backed by false-negative evidence, to cut the edges carried by a
single repeat fragment, or to remove a whole clone. Components where no
witness vertex is I-critical are divided at articulation points first.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

import networkx as nx

from .clone_graph import CloneGraph
from .interval import (
    connected_components,
    ForbiddenWitness,
    IntervalModel,
    induced,
    is_interval,
    recognize_interval,
    without,
)
from .layout import pair_key
from .model import PipelineParams

log = logging.getLogger(__name__)


class ActionKind(Enum):
    ADD_FN_EDGE = "AddFnEdge"
    REMOVE_FP_EDGES = "RemoveFpEdges"
    REMOVE_VERTEX = "RemoveVertex"


class RemovalReason(Enum):
    SUSPICIOUS_CHIMERA = "SuspiciousChimera"
    UNIDENTIFIED_REPEAT = "UnidentifiedRepeat"


@dataclass(frozen=True)
class ResolutionAction:
    kind: ActionKind
    clones: tuple = ()
    edges: tuple = ()
    reason: Optional[RemovalReason] = None
    note: str = ""

    def format(self) -> str:
        if self.kind is ActionKind.ADD_FN_EDGE:
            body = f"{self.clones[0]}\t{self.clones[1]}"
        elif self.kind is ActionKind.REMOVE_FP_EDGES:
            body = ",".join(f"{x}|{y}" for x, y in self.edges)
        else:
            body = f"{self.clones[0]}\t{self.reason.value}"
        return f"{self.kind.value}\t{body}\t{self.note or '-'}"

    @classmethod
    def parse(cls, line: str) -> "ResolutionAction":
        tok = line.rstrip("\n").split("\t")
        kind = ActionKind(tok[0])
        note = "" if tok[-1] == "-" else tok[-1]
        if kind is ActionKind.ADD_FN_EDGE:
            return cls(kind, (tok[1], tok[2]), note=note)
        if kind is ActionKind.REMOVE_FP_EDGES:
            edges = tuple(tuple(e.split("|")) for e in tok[1].split(","))
            return cls(kind, tuple(sorted({c for e in edges for c in e})), edges, note=note)
        return cls(kind, (tok[1],), reason=RemovalReason(tok[2]), note=note)


class ResolutionError(RuntimeError):
    """A component stayed non-interval after the whole ladder was tried."""


@dataclass
class ResolutionEvidence:
    """What the ladder may consult besides the graph itself."""

    fn_pairs: Counter = field(default_factory=Counter)  # clone pair -> missing-overlap count
    clone_length: dict = field(default_factory=dict)
    clone_of: dict = field(default_factory=dict)


def apply_action(graph: CloneGraph, action: ResolutionAction) -> None:
    if action.kind is ActionKind.ADD_FN_EDGE:
        graph.add_edge(*action.clones)
    elif action.kind is ActionKind.REMOVE_FP_EDGES:
        for x, y in action.edges:
            graph.remove_edge(x, y)
    else:
        graph.remove_vertex(action.clones[0])


def replay(graph: CloneGraph, actions: Iterable[ResolutionAction]) -> CloneGraph:
    g = graph.copy()
    for a in actions:
        apply_action(g, a)
    return g


# --------------------------------------------------------------------------
# ladder


def neighbour_blocks(adj: Mapping, v) -> list[list]:
    """Neighbours of ``v`` grouped by the component of G - v they fall in."""
    nbrs = adj[v]
    seen: dict = {}
    blocks = []
    for s in sorted(nbrs):
        if s in seen:
            continue
        seen[s] = len(blocks)
        block = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w != v and w not in seen:
                    seen[w] = seen[s]
                    stack.append(w)
                    if w in nbrs:
                        block.append(w)
        blocks.append(sorted(block))
    return blocks


def _try_add_fn(g: CloneGraph, support: tuple, evidence: ResolutionEvidence) -> Optional[ResolutionAction]:
    cands = []
    for i, x in enumerate(support):
        for y in support[i + 1:]:
            if y in g.adj[x]:
                continue
            n = evidence.fn_pairs.get(pair_key(x, y), 0)
            if n > 0:
                cands.append((-n, pair_key(x, y)))
    for negn, (x, y) in sorted(cands):
        local = induced(g.adj, support)
        local[x] = local[x] | {y}
        local[y] = local[y] | {x}
        if is_interval(local):
            return ResolutionAction(ActionKind.ADD_FN_EDGE, (x, y), note=f"fn_evidence={-negn}")
    return None


def _try_remove_fp(g: CloneGraph, v, support: tuple, evidence: ResolutionEvidence) -> Optional[ResolutionAction]:
    """Edges of ``v`` into one neighbour block, all carried by a single fragment
    that also shares another block with sibling fragments, are treated as
    repeat-induced."""
    blocks = neighbour_blocks(g.adj, v)
    if len(blocks) < 2:
        return None
    carriers = []
    for block in blocks:
        frags = set()
        for z in block:
            wl = g.witnesses.get(pair_key(v, z), ())
            own = {f if evidence.clone_of.get(f) == v else h for f, h in wl}
            frags |= own
        carriers.append(frags)
    for bi in sorted(range(len(blocks)), key=lambda i: (len(blocks[i]), blocks[i])):
        if len(carriers[bi]) != 1:
            continue
        (frag,) = carriers[bi]
        others = [carriers[j] for j in range(len(blocks)) if j != bi]
        # the fragment must also sit among other fragments of its clone elsewhere
        if not any(frag in c and len(c) > 1 for c in others):
            continue
        edges = tuple(pair_key(v, z) for z in blocks[bi])
        trial = g.copy()
        for e in edges:
            trial.remove_edge(*e)
        if is_interval(induced(trial.adj, set(support) | g.adj[v])):
            return ResolutionAction(ActionKind.REMOVE_FP_EDGES, (v,), edges, note=f"repeat={frag}")
    return None


def reinsertable(adj: Mapping, v) -> bool:
    """Could ``v`` come back as one interval once the rest is laid out?

    Checked against one interval model of G - v: with neighbours in one
    component they must be exactly the clones hit by some interval, with
    neighbours in two components they must sit at an end of each.
    """
    model = recognize_interval(without(adj, [v]))
    if not isinstance(model, IntervalModel):
        return True  # no layout to judge against
    by_comp: dict = {}
    for u in adj[v]:
        by_comp.setdefault(model.component[u], set()).add(u)
    if len(by_comp) > 2:
        return False
    members: dict = {}
    for u, c in model.component.items():
        if c in by_comp:
            members.setdefault(c, []).append(u)

    def hit(comp, lo, hi):
        iv = model.intervals
        return {u for u in members[comp] if iv[u][0] <= hi and iv[u][1] >= lo}

    inf = float("inf")
    for comp, nbrs in by_comp.items():
        min_right = min(model.intervals[u][1] for u in nbrs)
        max_left = max(model.intervals[u][0] for u in nbrs)
        if len(by_comp) == 2:
            # v must reach in from one end of this component
            if hit(comp, -inf, max_left) != nbrs and hit(comp, min_right, inf) != nbrs:
                return False
        elif max_left > min_right:
            # v has to span the gap between its neighbours
            if hit(comp, min_right, max_left) != nbrs:
                return False
        else:
            # a point shared by all neighbours and nothing else will do
            ends = sorted({e for u in members[comp] for e in model.intervals[u]})
            probes = ends + [(x + y) / 2 for x, y in zip(ends, ends[1:])]
            if not any(hit(comp, p, p) == nbrs for p in probes if max_left <= p <= min_right):
                return False
    return True


def split_by_fragments(g: CloneGraph, v, clone_of: Mapping) -> bool:
    """Do disjoint fragment sets of ``v`` witness the separate neighbour groups?

    Groups are the components of the subgraph induced by N(v). A clone made of
    two loci shows this pattern; one fragment touching two groups rules it out.
    """
    groups = connected_components(induced(g.adj, g.adj[v]))
    if len(groups) < 2:
        return False
    seen: set = set()
    for grp in groups:
        own = set()
        for z in grp:
            for f, h in g.witnesses.get(pair_key(v, z), ()):
                own.add(f if clone_of.get(f) == v else h)
        if own & seen:
            return False
        seen |= own
    return True


def _remove_vertex(g: CloneGraph, critical: list, evidence: ResolutionEvidence, params: PipelineParams) -> ResolutionAction:
    def rank(v):
        nb = len(neighbour_blocks(g.adj, v))
        split = split_by_fragments(g, v, evidence.clone_of)
        return (0 if nb >= 2 else 1, not split, reinsertable(g.adj, v), -nb, v)

    v = min(critical, key=rank)
    length = evidence.clone_length.get(v)
    if length is not None and length < params.min_clone_length:
        edges = tuple(sorted(pair_key(v, z) for z in g.adj[v]))
        return ResolutionAction(ActionKind.REMOVE_FP_EDGES, (v,), edges, note="short_clone_sidelined")
    reason = RemovalReason.SUSPICIOUS_CHIMERA if rank(v)[0] == 0 else RemovalReason.UNIDENTIFIED_REPEAT
    return ResolutionAction(ActionKind.REMOVE_VERTEX, (v,), reason=reason)


def _ladder(g: CloneGraph, witness: ForbiddenWitness, critical: list,
            evidence: ResolutionEvidence, params: PipelineParams) -> ResolutionAction:
    support = witness.support
    act = _try_add_fn(g, support, evidence)
    if act is not None:
        return act
    for v in critical:
        act = _try_remove_fp(g, v, support, evidence)
        if act is not None:
            return act
    return _remove_vertex(g, critical, evidence, params)


def _critical(adj: Mapping, support: Iterable) -> list:
    return [v for v in sorted(support) if is_interval(without(adj, [v]))]


def resolve_component(
    graph: CloneGraph,
    evidence: Optional[ResolutionEvidence] = None,
    params: Optional[PipelineParams] = None,
    _depth: int = 0,
) -> tuple[list[ResolutionAction], CloneGraph]:
    """Return the actions applied and the repaired (interval) graph."""
    evidence = evidence or ResolutionEvidence()
    params = params or PipelineParams()
    g = graph.copy()
    actions: list[ResolutionAction] = []
    guard = 3 * len(g.adj) + 10
    while True:
        res = recognize_interval(g.adj)
        if isinstance(res, IntervalModel):
            return actions, g
        if len(actions) > guard:
            raise ResolutionError(f"no progress after {len(actions)} actions on {len(g.adj)} clones")
        critical = _critical(g.adj, res.support)
        if critical:
            act = _ladder(g, res, critical, evidence, params)
        else:
            act = None
            sub = _divide(g, evidence, params, _depth)
            if sub:
                for a in sub:
                    apply_action(g, a)
                actions.extend(sub)
                continue
            # every block is interval: repair within the witness neighbourhood
            local = induced(g.adj, res.support)
            critical = _critical(local, res.support)
            if not critical:
                raise ResolutionError(f"forbidden subgraph on {list(res.support)} has no I-critical vertex")
            act = _ladder(g, res, critical, evidence, params)
        log.debug("component action %s", act.format())
        apply_action(g, act)
        actions.append(act)


def _divide(g: CloneGraph, evidence, params, depth) -> list[ResolutionAction]:
    """Resolve the first non-interval biconnected block on its own."""
    if depth > 50:
        return []
    nxg = nx.Graph()
    nxg.add_nodes_from(g.adj)
    nxg.add_edges_from((x, y) for x in g.adj for y in g.adj[x] if x < y)
    blocks = sorted((sorted(b) for b in nx.biconnected_components(nxg)), key=lambda b: (-len(b), b))
    if len(blocks) <= 1:
        return []
    for block in blocks:
        sub = CloneGraph(induced(g.adj, block), {k: w for k, w in g.witnesses.items() if k[0] in block and k[1] in block})
        if not is_interval(sub.adj):
            acts, _ = resolve_component(sub, evidence, params, depth + 1)
            return acts
    return []


def resolve_graph(
    graph: CloneGraph,
    evidence: Optional[ResolutionEvidence] = None,
    params: Optional[PipelineParams] = None,
) -> tuple[list[ResolutionAction], CloneGraph, list[list[str]]]:
    """Resolve every non-interval component; returns actions, graph, and the
    components that needed work."""
    g = graph.copy()
    actions = []
    touched = []
    for comp in g.components():
        adj = induced(g.adj, comp)
        if is_interval(adj):
            continue
        touched.append(comp)
        sub = CloneGraph(adj, {k: w for k, w in g.witnesses.items() if k[0] in adj and k[1] in adj})
        acts, _ = resolve_component(sub, evidence, params)
        for a in acts:
            apply_action(g, a)
        actions.extend(acts)
    return actions, g, touched
