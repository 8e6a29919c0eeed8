"""Conservative assembly of fragments into subcontigs.

A layout places fragments on a shared integer axis: a fragment at
``(start, sign)`` covers ``[start, start + length)`` and is reversed when
``sign`` is -1. Two layouts are merged through an overlap only when every
placement it implies agrees with all overlap evidence already on record;
overlaps that fail are deferred rather than discarded.
"""

from __future__ import annotations

import bisect
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import IO, Iterable, Mapping, Optional

from .model import (
    Clone,
    Fragment,
    Orientation,
    OverlapKind,
    PipelineParams,
    Strand,
    ValidOverlap,
    overlap_from,
    reframe_offset,
)

Key = tuple[str, str]


def pair_key(a: str, b: str) -> Key:
    return (a, b) if a < b else (b, a)


def place_other(start: int, sign: int, length: int, offset: int, rel_sign: int, other_length: int) -> tuple[int, int]:
    """Axis placement of a fragment given relative to a placed one."""
    if sign > 0:
        return start + offset, rel_sign
    return start + length - offset - other_length, -rel_sign


class OverlapIndex:
    """Lookup of overlaps by fragment pair, with per-fragment neighbour lists."""

    def __init__(self, overlaps: Iterable[ValidOverlap], lengths: Mapping[str, int],
                 clone_of: Optional[Mapping[str, str]] = None):
        self.lengths = lengths
        self.clone_of = clone_of
        self.by_key: dict[Key, ValidOverlap] = {}
        self.neighbors: dict[str, list[str]] = defaultdict(list)
        self._views: dict[tuple[str, str], tuple[int, int]] = {}
        for ov in overlaps:
            if ov.key in self.by_key:
                continue
            self.by_key[ov.key] = ov
            self.neighbors[ov.frag_a].append(ov.frag_b)
            self.neighbors[ov.frag_b].append(ov.frag_a)
            for frag in ov.key:
                other, off, rel = overlap_from(ov, frag, lengths)
                self._views[frag, other] = (off, rel.sign)
        for nbrs in self.neighbors.values():
            nbrs.sort()

    def get(self, a: str, b: str) -> Optional[ValidOverlap]:
        return self.by_key.get(pair_key(a, b))

    def view(self, frag: str, other: str) -> Optional[tuple[int, int]]:
        """(offset, relative sign) of ``other`` in ``frag``'s frame."""
        return self._views.get((frag, other))


# --------------------------------------------------------------------------
# step 1


class FragmentKind(Enum):
    SINGLETON = "Singleton"
    SUBFRAGMENT = "Subfragment"
    MAXIMAL = "Maximal"


@dataclass(frozen=True)
class FragmentClass:
    kind: FragmentKind
    container: Optional[str] = None


def classify_fragments(
    fragments: Iterable[str],
    overlaps: Iterable[ValidOverlap],
    lengths: Optional[Mapping[str, int]] = None,
) -> dict[str, FragmentClass]:
    """Singleton / subfragment / maximal classification.

    A contained fragment is a subfragment whatever other overlaps it has; its
    recorded container is the longest one (ties by id).
    """
    degree: Counter = Counter()
    containers: dict[str, list[str]] = defaultdict(list)
    for ov in overlaps:
        degree[ov.frag_a] += 1
        degree[ov.frag_b] += 1
        if ov.kind is OverlapKind.CONTAINMENT and ov.contained is not None:
            containers[ov.contained].append(ov.other(ov.contained))
    out = {}
    for fid in fragments:
        if containers.get(fid):
            cands = containers[fid]
            if lengths is not None:
                best = min(cands, key=lambda c: (-lengths[c], c))
            else:
                best = min(cands)
            out[fid] = FragmentClass(FragmentKind.SUBFRAGMENT, best)
        elif degree[fid] == 0:
            out[fid] = FragmentClass(FragmentKind.SINGLETON)
        else:
            out[fid] = FragmentClass(FragmentKind.MAXIMAL)
    return out


# --------------------------------------------------------------------------
# consistency


class Consistency(Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"
    INDEPENDENT = "Independent"


def _agrees(index: OverlapIndex, a: str, a_place: tuple[int, int], c: str, c_place: tuple[int, int], tol: int) -> bool:
    view = index.view(a, c)
    if view is None:
        return False
    lengths = index.lengths
    pred = place_other(a_place[0], a_place[1], lengths[a], view[0], view[1], lengths[c])
    return pred[1] == c_place[1] and abs(pred[0] - c_place[0]) <= tol


def check_consistency(
    o_ab: ValidOverlap, o_bc: ValidOverlap, index: OverlapIndex, params: PipelineParams
) -> Consistency:
    """Compare the a-c placement implied through b with the a-c overlap evidence."""
    shared = set(o_ab.key) & set(o_bc.key)
    if len(shared) != 1 or o_ab.key == o_bc.key:
        raise ValueError(f"overlaps {o_ab.key} and {o_bc.key} do not share exactly one fragment")
    (b,) = shared
    a, c = o_ab.other(b), o_bc.other(b)
    lengths = index.lengths
    _, off_a, rel_a = overlap_from(o_ab, b, lengths)
    _, off_c, rel_c = overlap_from(o_bc, b, lengths)
    implied = min(off_a + lengths[a], off_c + lengths[c]) - max(off_a, off_c)
    if implied <= params.implied_overlap_threshold:
        return Consistency.INDEPENDENT
    if _agrees(index, a, (off_a, rel_a.sign), c, (off_c, rel_c.sign), params.offset_tolerance):
        return Consistency.CONSISTENT
    return Consistency.INCONSISTENT


@dataclass
class ConsistencyReport:
    """Outcome of checking every overlap pair that shares a fragment."""

    inconsistent: set = field(default_factory=set)
    conflicts: list = field(default_factory=list)
    # fragment pairs whose overlap is implied beyond T_ov but absent from the input
    implied_missing: Counter = field(default_factory=Counter)
    # missing pairs corroborated as false negatives -> implied (offset, sign)
    # of the second fragment in the first one's frame; they defer nothing
    suspected_fn: dict = field(default_factory=dict)


def find_inconsistencies(index: OverlapIndex, params: PipelineParams) -> ConsistencyReport:
    """Pairwise consistency over all overlaps sharing a fragment.

    Only pairs whose implied overlap exceeds T_ov are examined; they are found
    by a sweep over each fragment's neighbours sorted by offset.
    """
    report = ConsistencyReport()
    lengths = index.lengths
    missing: dict[Key, list] = defaultdict(list)
    t_ov, tol = params.implied_overlap_threshold, params.offset_tolerance
    conflict_set = set()
    for b in sorted(index.neighbors):
        placed = []
        for other in index.neighbors[b]:
            off, sign = index.view(b, other)
            placed.append((off, off + lengths[other], sign, other))
        placed.sort()
        for i in range(len(placed)):
            s_i, e_i, sg_i, a = placed[i]
            for j in range(i + 1, len(placed)):
                s_j, e_j, sg_j, c = placed[j]
                if s_j >= e_i - t_ov:
                    break
                if min(e_i, e_j) - s_j <= t_ov:
                    continue
                if _agrees(index, a, (s_i, sg_i), c, (s_j, sg_j), tol):
                    continue
                k1, k2 = pair_key(a, b), pair_key(b, c)
                if index.get(a, c) is None:
                    m = pair_key(a, c)
                    report.implied_missing[m] += 1
                    missing[m].append((k1, k2, b, _implied_view(a, (s_i, sg_i), c, (s_j, sg_j), m, lengths)))
                    continue
                _flag(report, conflict_set, k1, k2)
    clone_of = index.clone_of
    for m in sorted(missing):
        triples = missing[m]
        if clone_of is not None and _corroborated(triples, m, clone_of, tol):
            report.suspected_fn[m] = triples[0][3]
            continue
        for k1, k2, _, _ in triples:
            _flag(report, conflict_set, k1, k2)
    report.conflicts.sort()
    return report


def _flag(report: ConsistencyReport, seen: set, k1: Key, k2: Key) -> None:
    report.inconsistent.add(k1)
    report.inconsistent.add(k2)
    ck = (k1, k2) if k1 < k2 else (k2, k1)
    if ck not in seen:
        seen.add(ck)
        report.conflicts.append(ck)


def _implied_view(a, a_place, c, c_place, m: Key, lengths) -> tuple[int, int]:
    """(offset, relative sign) of m[1] in m[0]'s frame, from b-frame placements."""
    (s_a, sg_a), (s_c, sg_c) = a_place, c_place
    rel = sg_a * sg_c
    off = s_c - s_a if sg_a > 0 else s_a + lengths[a] - s_c - lengths[c]
    if m[0] == a:
        return off, rel
    return reframe_offset(off, Orientation.from_sign(rel), lengths[a], lengths[c]), rel


def _corroborated(triples, m: Key, clone_of, tol: int) -> bool:
    """A missing overlap implied alike through fragments of two or more other
    clones reads as a false negative rather than a repeat."""
    off0, rel0 = triples[0][3]
    if any(rel != rel0 or abs(off - off0) > tol for *_, (off, rel) in triples):
        return False
    middles = {clone_of[b] for _, _, b, _ in triples} - {clone_of[m[0]], clone_of[m[1]]}
    return len(middles) >= 2


# --------------------------------------------------------------------------
# layouts


@dataclass(frozen=True)
class Placement:
    frag_id: str
    start: int
    orientation: Strand


@dataclass(frozen=True)
class Subcontig:
    id: str
    placements: tuple[Placement, ...]
    length: int
    member_clones: frozenset
    witnesses: tuple[Key, ...] = ()

    @property
    def fragment_ids(self) -> list[str]:
        return [p.frag_id for p in self.placements]


class _Layout:
    __slots__ = ("members", "starts", "frags", "maxlen")

    def __init__(self):
        self.members: dict[str, tuple[int, int]] = {}
        self.starts: list[int] = []
        self.frags: list[str] = []
        self.maxlen = 0

    def reindex(self, lengths: Mapping[str, int]) -> None:
        pairs = sorted((p[0], f) for f, p in self.members.items())
        self.starts = [s for s, _ in pairs]
        self.frags = [f for _, f in pairs]
        self.maxlen = max((lengths[f] for f in self.members), default=0)

    def add(self, frag: str, place: tuple[int, int], lengths: Mapping[str, int]) -> None:
        self.members[frag] = place
        k = bisect.bisect_left(self.starts, place[0])
        while k < len(self.starts) and self.starts[k] == place[0] and self.frags[k] < frag:
            k += 1
        self.starts.insert(k, place[0])
        self.frags.insert(k, frag)
        self.maxlen = max(self.maxlen, lengths[frag])

    def overlapping(self, start: int, end: int, lengths: Mapping[str, int]):
        lo = bisect.bisect_right(self.starts, start - self.maxlen)
        hi = bisect.bisect_left(self.starts, end)
        for k in range(lo, hi):
            f = self.frags[k]
            s = self.starts[k]
            if s + lengths[f] > start:
                yield f, s


class RejectedSubfragment(Enum):
    CONFLICTING_EVIDENCE = "ConflictingEvidence"
    ORPHAN_CONTAINER = "OrphanContainer"


class LayoutBuilder:
    """Union of layouts with coordinates; the working state of steps 2, 3 and 6."""

    def __init__(self, lengths: Mapping[str, int], index: OverlapIndex, params: PipelineParams, clone_of: Mapping[str, str]):
        self.lengths = lengths
        self.index = index
        self.params = params
        self.clone_of = clone_of
        self.layout_of: dict[str, _Layout] = {}
        self.ignored: set[Key] = set()  # deferred keys, not binding during merges
        self.implied: dict[Key, tuple[int, int]] = {}  # suspected false negatives

    def add_single(self, frag: str) -> None:
        lay = _Layout()
        lay.members[frag] = (0, 1)
        lay.reindex(self.lengths)
        self.layout_of[frag] = lay

    def placed(self, frag: str) -> bool:
        return frag in self.layout_of

    def _target(self, anchor: str, anchor_place: tuple[int, int], moving: str) -> tuple[int, int]:
        off, rel = self.index.view(anchor, moving)
        return place_other(anchor_place[0], anchor_place[1], self.lengths[anchor], off, rel, self.lengths[moving])

    def _fits(self, frag: str, place: tuple[int, int], big: _Layout, skip: Optional[str] = None) -> bool:
        """Can ``frag`` sit at ``place`` in ``big`` without contradicting evidence?"""
        lengths, tol = self.lengths, self.params.offset_tolerance
        start, length = place[0], lengths[frag]
        for z in self.index.neighbors.get(frag, ()):
            if z == skip or z not in big.members:
                continue
            if pair_key(frag, z) in self.ignored:
                continue
            if not _agrees(self.index, frag, place, z, big.members[z], tol):
                return False
        t_ov = self.params.implied_overlap_threshold
        for z, zs in big.overlapping(start, start + length, lengths):
            if z == skip:
                continue
            inter = min(start + length, zs + lengths[z]) - max(start, zs)
            if inter > t_ov and not _agrees(self.index, frag, place, z, big.members[z], tol):
                if not self._implied_agrees(frag, place, z, big.members[z]):
                    return False
        return True

    def _implied_agrees(self, f: str, f_place, z: str, z_place) -> bool:
        key = pair_key(f, z)
        view = self.implied.get(key)
        if view is None or self.index.get(f, z) is not None:
            return False
        (a, pa), (c, pc) = (f, f_place), (z, z_place)
        if key[0] != a:
            (a, pa), (c, pc) = (c, pc), (a, pa)
        pred = place_other(pa[0], pa[1], self.lengths[a], view[0], view[1], self.lengths[c])
        return pred[1] == pc[1] and abs(pred[0] - pc[0]) <= self.params.offset_tolerance

    def try_merge(self, ov: ValidOverlap) -> str:
        """Merge the layouts joined by ``ov``; returns 'merged', 'witness' or 'conflict'."""
        x, y = ov.frag_a, ov.frag_b
        if x not in self.layout_of or y not in self.layout_of:
            return "conflict"
        A, B = self.layout_of[x], self.layout_of[y]
        if A is B:
            ok = _agrees(self.index, x, A.members[x], y, A.members[y], self.params.offset_tolerance)
            return "witness" if ok else "conflict"
        if len(A.members) >= len(B.members):
            big, small, anchor, moving = A, B, x, y
        else:
            big, small, anchor, moving = B, A, y, x
        p1, s1 = self._target(anchor, big.members[anchor], moving)
        p0, s0 = small.members[moving]
        if s1 == s0:
            shift = p1 - p0
            new = {f: (p + shift, s) for f, (p, s) in small.members.items()}
        else:
            c = p1 + p0 + self.lengths[moving]
            new = {f: (c - p - self.lengths[f], -s) for f, (p, s) in small.members.items()}
        for f in sorted(new):
            if not self._fits(f, new[f], big):
                return "conflict"
        for f in new:
            self.layout_of[f] = big
        if 8 * len(new) < len(big.members):
            for f in sorted(new):
                big.add(f, new[f], self.lengths)
        else:
            big.members.update(new)
            big.reindex(self.lengths)
        return "merged"

    def place_subfragment(self, frag: str, container: str, ov: ValidOverlap) -> Optional[RejectedSubfragment]:
        if container not in self.layout_of:
            return RejectedSubfragment.ORPHAN_CONTAINER
        lay = self.layout_of[container]
        place = self._target(container, lay.members[container], frag)
        if not self._fits(frag, place, lay):
            return RejectedSubfragment.CONFLICTING_EVIDENCE
        lay.add(frag, place, self.lengths)
        self.layout_of[frag] = lay
        return None

    def remove_fragments(self, frags: Iterable[str]) -> None:
        touched = set()
        for f in frags:
            lay = self.layout_of.pop(f, None)
            if lay is not None:
                del lay.members[f]
                touched.add(id(lay))
                lay.reindex(self.lengths)

    def layouts(self) -> list[_Layout]:
        seen, out = set(), []
        for f in sorted(self.layout_of):
            lay = self.layout_of[f]
            if id(lay) not in seen:
                seen.add(id(lay))
                out.append(lay)
        return out

    def witnesses(self, lay: _Layout) -> list[Key]:
        tol = self.params.offset_tolerance
        out = []
        for f in sorted(lay.members):
            for z in self.index.neighbors.get(f, ()):
                if z > f and z in lay.members and _agrees(self.index, f, lay.members[f], z, lay.members[z], tol):
                    out.append((f, z))
        return out

    def export(self) -> list[Subcontig]:
        return [
            _make_subcontig(f"sc{i + 1:05d}", lay.members, self.lengths, self.clone_of, self.witnesses(lay))
            for i, lay in enumerate(self.layouts())
        ]

    @classmethod
    def from_subcontigs(cls, subcontigs, lengths, index, params, clone_of) -> "LayoutBuilder":
        builder = cls(lengths, index, params, clone_of)
        for sc in subcontigs:
            lay = _Layout()
            for p in sc.placements:
                lay.members[p.frag_id] = (p.start, p.orientation.sign)
                builder.layout_of[p.frag_id] = lay
            lay.reindex(lengths)
        return builder


def _make_subcontig(sc_id, members, lengths, clone_of, witnesses) -> Subcontig:
    lo = min(p for p, _ in members.values())
    placements = sorted(
        (Placement(f, p - lo, Strand.from_sign(s)) for f, (p, s) in members.items()),
        key=lambda pl: (pl.start, pl.frag_id),
    )
    length = max(pl.start + lengths[pl.frag_id] for pl in placements)
    clones = frozenset(clone_of[f] for f in members)
    return Subcontig(sc_id, tuple(placements), length, clones, tuple(witnesses))


def merge_order(overlaps: Iterable[ValidOverlap]) -> list[ValidOverlap]:
    """Deterministic processing order: longest overlap first, then pair id."""
    return sorted(overlaps, key=lambda ov: (-ov.overlap_length, ov.key))


def assemble_maximal(
    fragments: Mapping[str, Fragment],
    overlaps: Iterable[ValidOverlap],
    params: PipelineParams,
    classes: Optional[Mapping[str, FragmentClass]] = None,
    report: Optional[ConsistencyReport] = None,
    builder: Optional[LayoutBuilder] = None,
) -> tuple[list[Subcontig], set]:
    """Assemble consistent overlapping maximal fragments.

    Returns the subcontigs (one per maximal or singleton fragment layout) and
    the keys of deferred overlaps.
    """
    overlaps = list(overlaps)
    lengths = {f.id: f.length for f in fragments.values()}
    clone_of = {f.id: f.clone_id for f in fragments.values()}
    index = builder.index if builder is not None else OverlapIndex(overlaps, lengths, clone_of)
    if classes is None:
        classes = classify_fragments(fragments, overlaps, lengths)
    if report is None:
        report = find_inconsistencies(index, params)
    if builder is None:
        builder = LayoutBuilder(lengths, index, params, clone_of)
    builder.ignored = set(report.inconsistent)
    builder.implied = dict(report.suspected_fn)
    for fid in sorted(fragments):
        if classes[fid].kind is not FragmentKind.SUBFRAGMENT and not builder.placed(fid):
            builder.add_single(fid)
    deferred = set(report.inconsistent)
    candidates = [
        ov for ov in overlaps
        if ov.key not in deferred
        and classes[ov.frag_a].kind is FragmentKind.MAXIMAL
        and classes[ov.frag_b].kind is FragmentKind.MAXIMAL
    ]
    for ov in merge_order(candidates):
        if builder.try_merge(ov) == "conflict":
            deferred.add(ov.key)
    return builder.export(), deferred


def place_subfragments(
    builder: LayoutBuilder,
    classes: Mapping[str, FragmentClass],
    deferred: set,
) -> dict[str, RejectedSubfragment]:
    """Put back subfragments whose placed-neighbour evidence agrees.

    Subfragments are processed longest first and anchored on a container when
    one is placed, else on any placed overlap partner. Passes repeat while
    new placements open up anchors for the rest.
    """
    index, lengths = builder.index, builder.lengths
    subs = [f for f, c in classes.items() if c.kind is FragmentKind.SUBFRAGMENT and not builder.placed(f)]
    subs.sort(key=lambda f: (-lengths[f], f))

    def anchors(f):
        out = []
        for z in index.neighbors.get(f, ()):
            ov = index.get(f, z)
            if ov.key in deferred or not builder.placed(z):
                continue
            is_container = ov.kind is OverlapKind.CONTAINMENT and ov.contained == f
            out.append((not is_container, classes[z].kind is not FragmentKind.MAXIMAL, -ov.overlap_length, z))
        return [z for *_, z in sorted(out)]

    rejected: dict[str, RejectedSubfragment] = {}
    todo = subs
    while todo:
        left = []
        for f in todo:
            cands = anchors(f)
            if not cands:
                rejected[f] = RejectedSubfragment.ORPHAN_CONTAINER
                left.append(f)
                continue
            for z in cands:
                if builder.place_subfragment(f, z, index.get(f, z)) is None:
                    rejected.pop(f, None)
                    break
            else:
                rejected[f] = RejectedSubfragment.CONFLICTING_EVIDENCE
                left.append(f)
        if len(left) == len(todo):
            break
        todo = left
    # a placed subfragment may bridge a coverage gap between two layouts
    bridges = [
        index.get(f, z) for f in subs if builder.placed(f)
        for z in index.neighbors.get(f, ()) if builder.placed(z)
    ]
    for ov in merge_order({ov.key: ov for ov in bridges}.values()):
        if ov.kind is OverlapKind.CONTAINMENT or ov.key in deferred:
            continue
        if builder.layout_of[ov.frag_a] is not builder.layout_of[ov.frag_b]:
            builder.try_merge(ov)
    return rejected


# --------------------------------------------------------------------------
# step 4


class ChromosomeStatus(Enum):
    ASSIGNED = "Assigned"
    CONFLICTED = "Conflicted"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ChromosomeCall:
    status: ChromosomeStatus
    label: Optional[str] = None
    dissent: tuple[str, ...] = ()


def resolve_chromosome_conflicts(subcontigs: Iterable[Subcontig], clones: Mapping[str, Clone]) -> dict[str, ChromosomeCall]:
    """Majority chromosome per subcontig; ties or a dissenting block of two or more clones conflict."""
    out = {}
    for sc in subcontigs:
        out[sc.id] = chromosome_call(sc.member_clones, clones)
    return out


def chromosome_call(member_clones: Iterable[str], clones: Mapping[str, Clone]) -> ChromosomeCall:
    labels = {c: clones[c].chromosome for c in member_clones if clones[c].chromosome_known}
    if not labels:
        return ChromosomeCall(ChromosomeStatus.UNKNOWN)
    counts = Counter(labels.values())
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    top, n_top = ranked[0]
    minority = tuple(sorted(c for c, lab in labels.items() if lab != top))
    if len(ranked) > 1 and ranked[1][1] == n_top:
        return ChromosomeCall(ChromosomeStatus.CONFLICTED, None, minority + tuple(sorted(c for c, lab in labels.items() if lab == top)))
    if len(minority) >= 2:
        return ChromosomeCall(ChromosomeStatus.CONFLICTED, None, minority)
    return ChromosomeCall(ChromosomeStatus.ASSIGNED, top, minority)


# --------------------------------------------------------------------------
# splitting and dumps


def split_subcontig(sc: Subcontig, drop_frags: set, drop_witnesses: set, lengths: Mapping[str, int], clone_of: Mapping[str, str]) -> list[Subcontig]:
    """Remove fragments or witness overlaps and split into witness-connected pieces."""
    keep = {p.frag_id: (p.start, p.orientation.sign) for p in sc.placements if p.frag_id not in drop_frags}
    if not keep:
        return []
    wits = [w for w in sc.witnesses if w not in drop_witnesses and w[0] in keep and w[1] in keep]
    parent = {f: f for f in keep}

    def find(f):
        while parent[f] != f:
            parent[f] = parent[parent[f]]
            f = parent[f]
        return f

    for a, b in wits:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[str, list[str]] = defaultdict(list)
    for f in sorted(keep):
        groups[find(f)].append(f)
    pieces = []
    for k, root in enumerate(sorted(groups)):
        members = {f: keep[f] for f in groups[root]}
        mset = set(members)
        piece_w = [w for w in wits if w[0] in mset]
        suffix = "" if len(groups) == 1 else f".{k + 1}"
        pieces.append(_make_subcontig(sc.id + suffix, members, lengths, clone_of, piece_w))
    return pieces


def write_subcontigs(subcontigs: Iterable[Subcontig], out: IO[str]) -> None:
    out.write("subcontig_id\tfrag_id\tstart\torientation\n")
    for sc in subcontigs:
        for p in sc.placements:
            out.write(f"{sc.id}\t{p.frag_id}\t{p.start}\t{p.orientation.value}\n")


def read_subcontigs(stream: Iterable[str], lengths: Mapping[str, int], clone_of: Mapping[str, str]) -> list[Subcontig]:
    groups: dict[str, dict] = {}
    for line in stream:
        tok = line.split()
        if not tok or tok[0] == "subcontig_id" or tok[0].startswith("#"):
            continue
        groups.setdefault(tok[0], {})[tok[1]] = (int(tok[2]), Strand(tok[3]).sign)
    return [_make_subcontig(sid, m, lengths, clone_of, ()) for sid, m in groups.items()]


def attach_witnesses(
    subcontigs: Iterable[Subcontig],
    overlaps: Iterable[ValidOverlap],
    lengths: Mapping[str, int],
    params: Optional[PipelineParams] = None,
) -> list[Subcontig]:
    """Recompute witnesses (recorded overlaps agreeing with the placement) for
    subcontigs read back from a dump."""
    params = params or PipelineParams()
    index = overlaps if isinstance(overlaps, OverlapIndex) else OverlapIndex(overlaps, lengths)
    tol = params.offset_tolerance
    out = []
    for sc in subcontigs:
        place = {p.frag_id: (p.start, p.orientation.sign) for p in sc.placements}
        wits = []
        for f in sorted(place):
            for z in index.neighbors.get(f, ()):
                if z > f and z in place and _agrees(index, f, place[f], z, place[z], tol):
                    wits.append((f, z))
        out.append(replace(sc, witnesses=tuple(wits)))
    return out

