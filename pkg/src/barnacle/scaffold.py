"""Ordering and orienting subcontigs into contigs, plus error flags and consensus."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .interval import IntervalModel
from .layout import Subcontig
from .model import Clone, EndMarker, Fragment, OrientationPair, PipelineParams, Strand

MAX_TIE_PERMUTATIONS = 720


class OrientationStatus(Enum):
    SURE = "Sure"
    UNSURE = "Unsure"
    LOW_CONFIDENCE = "LowConfidence"


@dataclass
class ContigEntry:
    subcontig: Subcontig
    strand: Strand = Strand.FORWARD
    status: OrientationStatus = OrientationStatus.UNSURE
    start: int = 0

    @property
    def id(self) -> str:
        return self.subcontig.id


@dataclass
class Contig:
    id: str
    component: int
    entries: list = field(default_factory=list)
    ties: list = field(default_factory=list)
    chromosome: str = "U"
    fn_junctions: set = field(default_factory=set)  # pairs of subcontig ids allowed to violate adjacency

    @property
    def length(self) -> int:
        if not self.entries:
            return 0
        last = self.entries[-1]
        return last.start + last.subcontig.length


def _rank_direction(sc: Subcontig, rank: Mapping[str, int], lengths, clone_of) -> float:
    """Covariance of clone rank with mean fragment midpoint along the axis."""
    mids = defaultdict(list)
    for p in sc.placements:
        mids[clone_of[p.frag_id]].append(p.start + lengths[p.frag_id] / 2)
    pts = [(sum(m) / len(m), rank[c]) for c, m in mids.items()]
    if len(pts) < 2:
        return 0.0
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    return sum((x - mx) * (y - my) for x, y in pts)


def orient_subcontigs(
    subcontigs: Iterable[Subcontig],
    model: IntervalModel,
    adj: Mapping[str, set],
    lengths: Mapping[str, int],
    clone_of: Mapping[str, str],
) -> dict[str, tuple[Strand, OrientationStatus]]:
    """Flip subcontigs so clone ranks increase along the axis.

    Orientation is Sure only when the lowest- and highest-rank clones are
    distinct and do not overlap in the clone graph.
    """
    rank = model.rank()
    out = {}
    for sc in subcontigs:
        d = _rank_direction(sc, rank, lengths, clone_of)
        strand = Strand.REVERSE if d < 0 else Strand.FORWARD
        members = sorted(sc.member_clones, key=lambda c: (rank[c], c))
        lo, hi = members[0], members[-1]
        sure = d != 0 and lo != hi and hi not in adj.get(lo, ())
        out[sc.id] = (strand, OrientationStatus.SURE if sure else OrientationStatus.UNSURE)
    return out


def subcontig_key(sc: Subcontig, model: IntervalModel) -> tuple:
    left = min(model.intervals[c][0] for c in sc.member_clones)
    right = max(model.intervals[c][1] for c in sc.member_clones)
    return (left, right, sc.id)


def assign_coordinates_and_order(
    subcontigs: Iterable[Subcontig],
    model: IntervalModel,
    orientations: Optional[Mapping[str, tuple[Strand, OrientationStatus]]] = None,
    gap_width: int = 100,
) -> list[Contig]:
    """One contig per interval component, subcontigs sorted by coordinate key."""
    by_comp = defaultdict(list)
    for sc in subcontigs:
        comp = min(model.component[c] for c in sc.member_clones)
        by_comp[comp].append((subcontig_key(sc, model), sc))
    contigs = []
    for n, comp in enumerate(sorted(by_comp)):
        items = sorted(by_comp[comp], key=lambda kv: kv[0])
        contig = Contig(f"ctg{n + 1:05d}", comp)
        for key, sc in items:
            strand, status = (orientations or {}).get(sc.id, (Strand.FORWARD, OrientationStatus.UNSURE))
            contig.entries.append(ContigEntry(sc, strand, status))
        for _, grp in itertools.groupby(items, key=lambda kv: kv[0][:2]):
            ids = [sc.id for _, sc in grp]
            if len(ids) > 1:
                contig.ties.append(ids)
        set_starts(contig, gap_width)
        contigs.append(contig)
    return contigs


def set_starts(contig: Contig, gap_width: int) -> None:
    pos = 0
    for e in contig.entries:
        e.start = pos
        pos += e.subcontig.length + gap_width


# --------------------------------------------------------------------------
# adjacency and false negatives


def end_clones(entry: ContigEntry, lengths, clone_of) -> tuple[str, str]:
    """Clones owning the leftmost and rightmost fragments along the contig."""
    pl = entry.subcontig.placements
    first = min(pl, key=lambda p: (p.start, p.frag_id))
    last = max(pl, key=lambda p: (p.start + lengths[p.frag_id], p.frag_id))
    left, right = clone_of[first.frag_id], clone_of[last.frag_id]
    return (left, right) if entry.strand is Strand.FORWARD else (right, left)


@dataclass(frozen=True)
class Violation:
    index: int
    left_subcontig: str
    right_subcontig: str
    left_clone: str
    right_clone: str


def check_adjacency(contig: Contig, adj: Mapping[str, set], lengths, clone_of, include_annotated: bool = False) -> list[Violation]:
    """Facing end clones of consecutive subcontigs must coincide or overlap."""
    out = []
    ends = [end_clones(e, lengths, clone_of) for e in contig.entries]
    for i in range(len(ends) - 1):
        x, y = ends[i][1], ends[i + 1][0]
        if x == y or y in adj.get(x, ()):
            continue
        a, b = contig.entries[i].id, contig.entries[i + 1].id
        if not include_annotated and (a, b) in contig.fn_junctions:
            continue
        out.append(Violation(i, a, b, x, y))
    return out


class FnCause(Enum):
    UNCLASSIFIED = "Unclassified"
    REPEAT_MASKING = "RepeatMasking"
    LOW_ACCURACY = "LowAccuracy"
    CHIMERIC_FRAGMENT = "ChimericFragment"
    POLYMORPHISM = "Polymorphism"


class FnOutcome(Enum):
    REMOVED = "Removed"
    ANNOTATED = "Annotated"
    TIE_REORDERED = "TieReordered"


@dataclass(frozen=True)
class FnReport:
    contig: str
    violation: Violation
    outcome: FnOutcome
    fragments: tuple = ()
    cause: FnCause = FnCause.UNCLASSIFIED


def _tie_fix(contig: Contig, v: Violation, adj, lengths, clone_of) -> bool:
    ids = {v.left_subcontig, v.right_subcontig}
    base = len(check_adjacency(contig, adj, lengths, clone_of))
    for group in contig.ties:
        if not ids & set(group):
            continue
        pos = [i for i, e in enumerate(contig.entries) if e.id in group]
        if pos != list(range(pos[0], pos[0] + len(pos))):
            continue
        orig = contig.entries[pos[0]:pos[-1] + 1]
        for k, perm in enumerate(itertools.permutations(orig)):
            if k >= MAX_TIE_PERMUTATIONS:
                break
            contig.entries[pos[0]:pos[-1] + 1] = list(perm)
            if len(check_adjacency(contig, adj, lengths, clone_of)) < base:
                return True
        contig.entries[pos[0]:pos[-1] + 1] = orig
    return False


def detect_fns(contig: Contig, adj: Mapping[str, set], lengths, clone_of, gap_width: int = 100) -> tuple[list[FnReport], list[str]]:
    """Resolve adjacency violations: tie reordering, then removal of a
    stranded single-clone subcontig, else an annotated junction."""
    reports, removed = [], []
    guard = 4 * len(contig.entries) + 4
    while guard > 0:
        guard -= 1
        viols = check_adjacency(contig, adj, lengths, clone_of)
        if not viols:
            break
        v = viols[0]
        if _tie_fix(contig, v, adj, lengths, clone_of):
            reports.append(FnReport(contig.id, v, FnOutcome.TIE_REORDERED))
            continue
        base = len(viols)
        # only pieces of a single clone are expendable; larger layouts carry
        # their own overlap evidence and the junction is annotated instead
        cands = sorted(
            (i for i in (v.index, v.index + 1) if len(contig.entries[i].subcontig.member_clones) == 1),
            key=lambda i: (len(contig.entries[i].subcontig.placements), contig.entries[i].id),
        )
        done = False
        for i in cands:
            entry = contig.entries.pop(i)
            if len(contig.entries) and len(check_adjacency(contig, adj, lengths, clone_of)) < base:
                frags = tuple(entry.subcontig.fragment_ids)
                reports.append(FnReport(contig.id, v, FnOutcome.REMOVED, frags))
                removed.extend(frags)
                done = True
                break
            contig.entries.insert(i, entry)
        if not done:
            contig.fn_junctions.add((v.left_subcontig, v.right_subcontig))
            reports.append(FnReport(contig.id, v, FnOutcome.ANNOTATED))
    contig.ties = [[s for s in grp if any(e.id == s for e in contig.entries)] for grp in contig.ties]
    contig.ties = [g for g in contig.ties if len(g) > 1]
    set_starts(contig, gap_width)
    return reports, removed


# --------------------------------------------------------------------------
# warp and residual false positives


def compute_warp(estimated_length: int, spans: Iterable[tuple[int, int]]) -> float:
    """Assembled span over estimated length; ``spans`` are (start, end) of placed fragments."""
    spans = list(spans)
    if not spans:
        raise ValueError("clone has no placed fragments")
    if estimated_length <= 0:
        raise ValueError("estimated length must be positive")
    return (max(e for _, e in spans) - min(s for s, _ in spans)) / estimated_length


@dataclass(frozen=True)
class FpReport:
    clone: str
    contig: str
    warp: float
    assembled_length: int
    reasons: tuple
    stretching: tuple = ()


def global_placements(contig: Contig, lengths) -> list[tuple[str, int, Strand]]:
    """(frag, global start, strand) for every fragment in a contig."""
    out = []
    for e in contig.entries:
        sc = e.subcontig
        for p in sc.placements:
            L = lengths[p.frag_id]
            if e.strand is Strand.FORWARD:
                out.append((p.frag_id, e.start + p.start, p.orientation))
            else:
                out.append((p.frag_id, e.start + sc.length - p.start - L, Strand.from_sign(-p.orientation.sign)))
    return out


def clone_spans(contigs: Iterable[Contig], lengths, clone_of) -> dict[str, tuple[str, list]]:
    out: dict = {}
    for ctg in contigs:
        for f, s, _ in global_placements(ctg, lengths):
            c = clone_of[f]
            out.setdefault(c, (ctg.id, []))[1].append((s, s + lengths[f], f))
    return out


def detect_residual_fps(contigs, clones: Mapping[str, Clone], params: PipelineParams, lengths, clone_of) -> list[FpReport]:
    """Flag stretched clones; nothing is removed."""
    reports = []
    wit_by_frag = defaultdict(list)
    for ctg in contigs:
        for e in ctg.entries:
            for a, b in e.subcontig.witnesses:
                wit_by_frag[a].append((a, b))
                wit_by_frag[b].append((a, b))
    for c, (ctg_id, spans) in sorted(clone_spans(contigs, lengths, clone_of).items()):
        est = clones[c].estimated_length
        lo = min(spans)
        hi = max(spans, key=lambda t: (t[1], t[2]))
        span = hi[1] - lo[0]
        warp = span / est
        reasons = []
        if warp > params.warp_flag_threshold:
            reasons.append("warp")
        if span > params.long_bac_length_flag:
            reasons.append("long")
        if reasons:
            stretch = tuple(sorted(set(wit_by_frag[lo[2]]) | set(wit_by_frag[hi[2]])))
            reports.append(FpReport(c, ctg_id, warp, span, tuple(reasons), stretch))
    return reports


# --------------------------------------------------------------------------
# extra information


def _clone_direction(contig: Contig, clone: str, fragments: Mapping[str, Fragment], lengths, clone_of, skip: set) -> int:
    """+1 if the clone's declared order runs left to right along the contig, -1 if reversed, 0 unknown."""
    pts = []
    for f, s, _ in global_placements(contig, lengths):
        if clone_of[f] == clone and f not in skip and fragments[f].declared_order_index is not None:
            pts.append((s, fragments[f].declared_order_index))
    if len(pts) < 2:
        return 0
    pts.sort()
    inc = sum(1 for a, b in zip(pts, pts[1:]) if b[1] > a[1])
    dec = sum(1 for a, b in zip(pts, pts[1:]) if b[1] < a[1])
    return 1 if inc > dec else -1 if dec > inc else 0


def _extra_key(entry: ContigEntry, fragments, direction: int):
    frags = [fragments[f] for f in entry.subcontig.fragment_ids]
    markers = {f.is_end_fragment for f in frags}
    orders = [f.declared_order_index for f in frags if f.declared_order_index is not None]
    # with reversed direction the declared left end sits at the contig's right
    left_first = direction >= 0
    if EndMarker.LEFT in markers:
        end = 0 if left_first else 2
    elif EndMarker.RIGHT in markers:
        end = 2 if left_first else 0
    else:
        end = 1
    order = (min(orders) if orders else 0) * (direction or 1)
    return (end, order)


def apply_extra_info(contig: Contig, fragments: Mapping[str, Fragment], adj, lengths, clone_of, gap_width: int = 100) -> list[str]:
    """Reorder single-clone tie groups by end markers and declared order,
    keeping a change only if adjacency does not get worse."""
    log = []
    for group in contig.ties:
        pos = [i for i, e in enumerate(contig.entries) if e.id in group]
        if not pos or pos != list(range(pos[0], pos[0] + len(pos))):
            continue
        entries = contig.entries[pos[0]:pos[-1] + 1]
        owners = {c for e in entries for c in e.subcontig.member_clones}
        if len(owners) != 1:
            continue
        (clone,) = owners
        frags = [f for e in entries for f in e.subcontig.fragment_ids]
        has_info = any(fragments[f].is_end_fragment in (EndMarker.LEFT, EndMarker.RIGHT) or fragments[f].declared_order_index is not None for f in frags)
        if not has_info:
            continue
        direction = _clone_direction(contig, clone, fragments, lengths, clone_of, set(frags))
        want = sorted(entries, key=lambda e: (_extra_key(e, fragments, direction), e.id))
        if [e.id for e in want] == [e.id for e in entries]:
            continue
        before = len(check_adjacency(contig, adj, lengths, clone_of))
        contig.entries[pos[0]:pos[-1] + 1] = want
        if len(check_adjacency(contig, adj, lengths, clone_of)) > before:
            contig.entries[pos[0]:pos[-1] + 1] = entries
            log.append(f"skipped\t{contig.id}\t{','.join(group)}\tadjacency")
        else:
            log.append(f"reordered\t{contig.id}\t{','.join(e.id for e in want)}")
    set_starts(contig, gap_width)
    return log


# --------------------------------------------------------------------------
# plasmid-pair orientation


def orient_unsure(contigs: Iterable[Contig], orientation_pairs: Iterable[OrientationPair], adj, lengths, clone_of) -> int:
    """Greedy flips of Unsure subcontigs to minimise disagreeing plasmid pairs.

    Returns the number of flips made. Sure subcontigs never flip; Unsure ones
    without any cross-subcontig evidence become LowConfidence.
    """
    contigs = list(contigs)
    entry_of = {}
    contig_of = {}
    for ci, contig in enumerate(contigs):
        for e in contig.entries:
            for p in e.subcontig.placements:
                entry_of[p.frag_id] = (e, p.orientation.sign)
                contig_of[p.frag_id] = ci
    by_contig = defaultdict(list)
    for op in orientation_pairs:
        if op.frag_a not in entry_of or op.frag_b not in entry_of:
            continue
        (ea, sa), (eb, sb) = entry_of[op.frag_a], entry_of[op.frag_b]
        if ea is eb or contig_of[op.frag_a] != contig_of[op.frag_b]:
            continue
        by_contig[contig_of[op.frag_a]].append((ea.id, eb.id, op.relative_orientation.sign * sa * sb, op.evidence_count))

    flips_done = 0
    for ci, contig in enumerate(contigs):
        pairs = by_contig.get(ci, [])
        sign = {e.id: e.strand.sign for e in contig.entries}
        incident = defaultdict(list)
        for k, (x, y, _, _) in enumerate(pairs):
            incident[x].append(k)
            incident[y].append(k)
        for e in contig.entries:
            if e.status is not OrientationStatus.SURE and e.id not in incident:
                e.status = OrientationStatus.LOW_CONFIDENCE
        movable = sorted(e.id for e in contig.entries if e.status is not OrientationStatus.SURE and e.id in incident)
        if not movable:
            continue
        by_id = {e.id: e for e in contig.entries}

        def gain(s):
            g = 0
            for k in incident[s]:
                x, y, want, n = pairs[k]
                g += n if sign[x] * sign[y] != want else -n
            return g

        base_viol = len(check_adjacency(contig, adj, lengths, clone_of))
        for _ in range(len(movable) * max(1, len(pairs))):
            best = None
            for s in movable:
                gs = gain(s)
                if gs > 0 and (best is None or gs > best[0]):
                    best = (gs, s)
            if best is None:
                break
            s = best[1]
            entry = by_id[s]
            entry.strand = Strand.from_sign(-entry.strand.sign)
            if len(check_adjacency(contig, adj, lengths, clone_of)) > base_viol:
                entry.strand = Strand.from_sign(-entry.strand.sign)
                movable.remove(s)
                continue
            sign[s] = -sign[s]
            flips_done += 1
    return flips_done


# --------------------------------------------------------------------------
# consensus

_COMPLEMENT = str.maketrans("ACGTNacgtn", "TGCANtgcan")


def reverse_complement(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]


def consensus_layout(
    contig: Contig,
    fragments: Mapping[str, Fragment],
    clones: Mapping[str, Clone],
) -> tuple[list[tuple[str, str, int, Strand]], Optional[str]]:
    """Global fragment rows plus the consensus string when every fragment has sequence.

    Where fragments overlap the finished one wins, then the longer, then the
    smaller id. Inter-subcontig spacers are N runs.
    """
    lengths = {f: fragments[f].length for e in contig.entries for f in e.subcontig.fragment_ids}
    rows = [(f, fragments[f].clone_id, s, st) for f, s, st in global_placements(contig, lengths)]
    if not rows or any(fragments[f].sequence is None for f, *_ in rows):
        return rows, None
    buf = bytearray(b"N" * contig.length)

    def precedence(row):
        fr = fragments[row[0]]
        return (clones[fr.clone_id].is_finished, fr.length, [-ord(ch) for ch in fr.id])

    for f, _, s, st in sorted(rows, key=precedence):
        seq = fragments[f].sequence
        if st is Strand.REVERSE:
            seq = reverse_complement(seq)
        buf[s:s + len(seq)] = seq.encode()
    return rows, buf.decode()
