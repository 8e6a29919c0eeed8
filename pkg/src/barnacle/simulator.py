"""Synthetic clone-based sequencing data with full ground truth.

Clones are dropped uniformly on each chromosome until the target coverage is
reached. Finished clones are one fragment; draft clones are cut into
fragments separated by short unsequenced gaps. Every pair of fragments that
intersects on the genome yields an exact local alignment. Noise is planted on
request: repeat-induced overlaps (inconsistent ones between unrelated loci,
consistent ones at coverage-island ends or from a repeat longer than a clone),
dropped overlaps, chimeric clones and wrong chromosome labels.

``truth.tsv`` (version line ``#truth-v1``) holds one record per line::

    clone     id chrom start end phase
    fragment  id clone chrom start length strand
    overlap   frag_a frag_b label            label: True | RepeatInducedInconsistent | RepeatInducedConsistent
    dropped   frag_a frag_b
    chimera   clone chrom1 start1 end1 chrom2 start2 end2
    mislabel  clone true_chrom given_chrom
"""

from __future__ import annotations

import math
import os
import random
from collections import defaultdict
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import IO, Iterable, Mapping, Optional

from .ingest import (
    BUNDLE_FILES,
    RawAlignment,
    Rejected,
    alignment_offset,
    classify_alignments,
    classify_overlap,
    write_alignments,
    write_clone_table,
    write_nt_pairs,
    write_orientation_pairs,
    write_sequences,
)
from .model import (
    AssemblyInput,
    Clone,
    EndMarker,
    Fragment,
    Orientation,
    OrientationPair,
    OverlapKind,
    PipelineParams,
    UNKNOWN_CHROMOSOME,
    canonicalize_overlap,
)

TRUTH_VERSION = "#truth-v1"


class OverlapLabel(Enum):
    TRUE = "True"
    REPEAT_INCONSISTENT = "RepeatInducedInconsistent"
    REPEAT_CONSISTENT = "RepeatInducedConsistent"


class FnMode(Enum):
    RANDOM = "random"
    CRITICAL = "critical"  # only overlaps that are the sole link between their two clones


@dataclass
class SimParams:
    genome_length: int = 2_000_000
    n_chromosomes: int = 1
    clone_length: tuple = (150_000, 20_000)
    target_coverage: float = 4.0
    phase_mix: tuple = (0.5, 0.1, 0.4)
    fragments_per_draft_clone: tuple = (8, 2)
    fp_rate: float = 0.0
    fp_consistent_fraction: float = 0.0
    fn_rate: float = 0.0
    fn_mode: FnMode = FnMode.RANDOM
    chimera_rate: float = 0.0
    mislabel_rate: float = 0.0
    unknown_chromosome_rate: float = 0.1
    nt_pair_fraction: float = 0.1
    orientation_pair_rate: float = 0.8
    end_marker_rate: float = 0.3
    gap_range: tuple = (20, 200)
    min_fragment_length: int = 3000
    fp_length_range: tuple = (2000, 5000)
    label_threshold: int = 1000
    with_sequences: bool = False
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.fn_mode, str):
            self.fn_mode = FnMode(self.fn_mode)
        for name in ("fp_rate", "fp_consistent_fraction", "fn_rate", "chimera_rate", "mislabel_rate",
                     "unknown_chromosome_rate", "nt_pair_fraction", "orientation_pair_rate", "end_marker_rate"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.fp_rate >= 1:
            raise ValueError("fp_rate must be below 1")
        if self.target_coverage <= 0:
            raise ValueError("target_coverage must be positive")
        if self.n_chromosomes < 1 or self.genome_length <= 0:
            raise ValueError("genome_length and n_chromosomes must be positive")
        if len(self.phase_mix) != 3 or abs(sum(self.phase_mix) - 1) > 1e-9 or min(self.phase_mix) < 0:
            raise ValueError("phase_mix must be three probabilities summing to 1")
        mean, spread = self.clone_length
        if mean <= 0 or spread < 0:
            raise ValueError("clone_length must have positive mean")
        if mean + 3 * spread > self.genome_length // self.n_chromosomes:
            raise ValueError(
                f"clone length {mean} does not fit a chromosome of {self.genome_length // self.n_chromosomes} bp"
            )

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "SimParams":
        """Build from flat string values (``clone_length=150000,20000`` style for pairs)."""
        kinds = {f.name: f.default for f in fields(cls)}
        out = {}
        for key, raw in values.items():
            if key not in kinds:
                raise KeyError(f"unknown simulation parameter {key!r}")
            default = kinds[key]
            if isinstance(default, tuple):
                out[key] = tuple(type(d)(float(x)) if isinstance(d, int) else float(x) for d, x in zip(default * 3, raw.split(",")))
            elif isinstance(default, bool):
                out[key] = raw.lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                out[key] = int(float(raw))
            elif isinstance(default, float):
                out[key] = float(raw)
            else:
                out[key] = raw
        return cls(**out)


@dataclass(frozen=True)
class TruthFragment:
    id: str
    clone: str
    chrom: str
    start: int
    length: int
    strand: int  # +1 forward on the genome

    @property
    def end(self) -> int:
        return self.start + self.length


@dataclass
class GroundTruth:
    clones: dict = field(default_factory=dict)  # id -> (chrom, start, end, phase)
    fragments: dict = field(default_factory=dict)  # id -> TruthFragment
    labels: dict = field(default_factory=dict)  # canonical pair -> OverlapLabel
    dropped: list = field(default_factory=list)
    chimeras: dict = field(default_factory=dict)  # clone -> ((chrom, s, e), (chrom, s, e))
    mislabels: dict = field(default_factory=dict)  # clone -> (true, given)

    def write(self, out: IO[str]) -> None:
        out.write(TRUTH_VERSION + "\n")
        for c in sorted(self.clones):
            chrom, s, e, phase = self.clones[c]
            out.write(f"clone\t{c}\t{chrom}\t{s}\t{e}\t{phase}\n")
        for f in sorted(self.fragments):
            t = self.fragments[f]
            out.write(f"fragment\t{f}\t{t.clone}\t{t.chrom}\t{t.start}\t{t.length}\t{'+' if t.strand > 0 else '-'}\n")
        for (a, b) in sorted(self.labels):
            out.write(f"overlap\t{a}\t{b}\t{self.labels[(a, b)].value}\n")
        for a, b in sorted(self.dropped):
            out.write(f"dropped\t{a}\t{b}\n")
        for c in sorted(self.chimeras):
            (c1, s1, e1), (c2, s2, e2) = self.chimeras[c]
            out.write(f"chimera\t{c}\t{c1}\t{s1}\t{e1}\t{c2}\t{s2}\t{e2}\n")
        for c in sorted(self.mislabels):
            t, g = self.mislabels[c]
            out.write(f"mislabel\t{c}\t{t}\t{g}\n")

    @classmethod
    def read(cls, stream: Iterable[str]) -> "GroundTruth":
        truth = cls()
        first = True
        for line in stream:
            line = line.rstrip("\n")
            if first:
                if line != TRUTH_VERSION:
                    raise ValueError(f"unsupported truth file version {line!r}")
                first = False
                continue
            if not line:
                continue
            tok = line.split("\t")
            kind = tok[0]
            if kind == "clone":
                truth.clones[tok[1]] = (tok[2], int(tok[3]), int(tok[4]), int(tok[5]))
            elif kind == "fragment":
                truth.fragments[tok[1]] = TruthFragment(tok[1], tok[2], tok[3], int(tok[4]), int(tok[5]), 1 if tok[6] == "+" else -1)
            elif kind == "overlap":
                truth.labels[(tok[1], tok[2])] = OverlapLabel(tok[3])
            elif kind == "dropped":
                truth.dropped.append((tok[1], tok[2]))
            elif kind == "chimera":
                truth.chimeras[tok[1]] = ((tok[2], int(tok[3]), int(tok[4])), (tok[5], int(tok[6]), int(tok[7])))
            elif kind == "mislabel":
                truth.mislabels[tok[1]] = (tok[2], tok[3])
            else:
                raise ValueError(f"unknown truth record {kind!r}")
        return truth


@dataclass
class SimulationResult:
    clones: dict
    fragments: dict
    alignments: list
    nt_pairs: list
    orientation_pairs: list
    sequences: dict
    truth: GroundTruth
    params: SimParams

    def to_input(self, params: Optional[PipelineParams] = None) -> AssemblyInput:
        """Classify the emitted alignments in memory, as the bundle loader would."""
        params = params or PipelineParams()
        overlaps = classify_alignments(self.alignments, self.fragments, self.clones, params)
        seen = {ov.key for ov in overlaps}
        overlaps += [ov for ov in self.nt_pairs if ov.key not in seen]
        overlaps.sort(key=lambda ov: ov.key)
        return AssemblyInput(dict(self.clones), dict(self.fragments), overlaps, list(self.orientation_pairs))

    def write_bundle(self, directory: str) -> dict[str, str]:
        os.makedirs(directory, exist_ok=True)
        paths = {k: os.path.join(directory, v) for k, v in BUNDLE_FILES.items()}
        lengths = {f.id: f.length for f in self.fragments.values()}
        with open(paths["clones"], "w") as fh:
            write_clone_table([self.clones[c] for c in sorted(self.clones)], self.fragments, fh)
        with open(paths["alignments"], "w") as fh:
            write_alignments(self.alignments, fh)
        with open(paths["nt_pairs"], "w") as fh:
            write_nt_pairs(self.nt_pairs, lengths, fh)
        with open(paths["orientation"], "w") as fh:
            write_orientation_pairs(self.orientation_pairs, fh)
        if self.sequences:
            with open(paths["sequences"], "w") as fh:
                write_sequences(self.sequences, fh)
        else:
            paths.pop("sequences")
        paths["truth"] = os.path.join(directory, "truth.tsv")
        with open(paths["truth"], "w") as fh:
            self.truth.write(fh)
        return paths


# --------------------------------------------------------------------------
# geometry helpers


def geometric_offset(a: TruthFragment, b: TruthFragment) -> tuple[int, Orientation]:
    """Start of ``b`` in ``a``'s frame and their relative orientation."""
    rel = Orientation.from_sign(a.strand * b.strand)
    if a.strand > 0:
        return b.start - a.start, rel
    return a.end - b.end, rel


def alignment_between(a: TruthFragment, b: TruthFragment, lo: int, hi: int, b_shift: int = 0) -> RawAlignment:
    """Exact alignment of genome segment ``[lo, hi)`` of ``a`` with ``[lo - b_shift, hi - b_shift)`` of ``b``."""

    def local(t: TruthFragment, s: int, e: int) -> tuple[int, int]:
        if t.strand > 0:
            return s - t.start + 1, e - t.start
        return t.end - e + 1, t.end - s

    a_s, a_e = local(a, lo, hi)
    b_s, b_e = local(b, lo - b_shift, hi - b_shift)
    return RawAlignment(a.id, a_s, a_e, b.id, b_s, b_e, Orientation.from_sign(a.strand * b.strand), 1.0)


def _sweep_pairs(frags: list[TruthFragment]):
    """Pairs of fragments from different clones intersecting on the same chromosome."""
    by_chrom = defaultdict(list)
    for f in frags:
        by_chrom[f.chrom].append(f)
    for chrom in sorted(by_chrom):
        items = sorted(by_chrom[chrom], key=lambda t: (t.start, t.id))
        active: list[TruthFragment] = []
        for f in items:
            active = [g for g in active if g.end > f.start]
            for g in active:
                if g.clone != f.clone:
                    yield (g, f) if g.id < f.id else (f, g)
            active.append(f)


def implied_conflict(a: TruthFragment, b_off: int, b_rel: int, b_len: int, neighbours: Iterable[TruthFragment], threshold: int) -> bool:
    """Would placing b at (b_off, b_rel) in a's frame imply an overlap above ``threshold``
    with one of a's true neighbours?"""
    for h in neighbours:
        h_off, _ = geometric_offset(a, h)
        inter = min(b_off + b_len, h_off + h.length) - max(b_off, h_off)
        if inter > threshold:
            return True
    return False


# --------------------------------------------------------------------------
# simulation


def _draw_length(rng: random.Random, mean_spread, lo: int, hi: int) -> int:
    mean, spread = mean_spread
    return int(min(hi, max(lo, round(rng.gauss(mean, spread)))))


def _cut(rng: random.Random, total: int, k: int, params: SimParams) -> list[tuple[int, int]]:
    """Split ``[0, total)`` into ``k`` pieces separated by short gaps."""
    k = max(1, min(k, total // (params.min_fragment_length + params.gap_range[1])))
    if k == 1:
        return [(0, total)]
    gaps = [rng.randint(*params.gap_range) for _ in range(k - 1)]
    usable = total - sum(gaps)
    span = usable - k * params.min_fragment_length
    cuts = sorted(rng.randint(0, span) for _ in range(k - 1))
    sizes = [b - a + params.min_fragment_length for a, b in zip([0] + cuts, cuts + [span])]
    out, pos = [], 0
    for i, size in enumerate(sizes):
        out.append((pos, size))
        pos += size + (gaps[i] if i < k - 1 else 0)
    return out


class _Builder:
    def __init__(self, params: SimParams):
        self.p = params
        self.rng = random.Random(params.seed)
        self.chrom_len = params.genome_length // params.n_chromosomes
        self.chroms = [str(i + 1) for i in range(params.n_chromosomes)]
        self.truth = GroundTruth()
        self.clone_parts: dict[str, list] = {}  # clone -> list of (chrom, start, length) pieces
        self.frag_order: dict[str, list[str]] = {}  # clone -> fragment ids in true clone order
        self.phase: dict[str, int] = {}
        self.repeats: list = []

    def place_clones(self) -> None:
        p, rng = self.p, self.rng
        mean = p.clone_length[0]
        n = max(1, round(p.target_coverage * p.genome_length / mean))
        placed = []
        for _ in range(n):
            chrom = rng.choice(self.chroms)
            length = _draw_length(rng, p.clone_length, max(2 * p.min_fragment_length, mean // 2), self.chrom_len)
            start = rng.randint(0, self.chrom_len - length)
            phase = rng.choices((1, 2, 3), weights=p.phase_mix)[0]
            placed.append((chrom, start, length, phase))
        placed.sort(key=lambda t: (self.chroms.index(t[0]), t[1], t[2]))
        for i, (chrom, start, length, phase) in enumerate(placed):
            cid = f"AC{i + 1:06d}.1"
            self.clone_parts[cid] = [(chrom, start, length)]
            self.phase[cid] = phase
            self.truth.clones[cid] = (chrom, start, start + length, phase)

    def plant_chimeras(self) -> None:
        p, rng = self.p, self.rng
        drafts = [c for c in sorted(self.clone_parts) if self.phase[c] != 3]
        want = round(p.chimera_rate * len(self.clone_parts))
        if want == 0:
            return
        islands = self._islands()
        rng.shuffle(drafts)
        used = set()
        for cid in drafts:
            if len(self.truth.chimeras) >= want:
                break
            chrom, start, length = self.clone_parts[cid][0]
            isl1 = self._island_of(islands, chrom, start, start + length, exclude=cid)
            if isl1 is None or not self._well_inside(isl1, start, start + length, length // 2):
                continue
            half = length // 2
            # second source: middle of a different island, far from the first
            options = [isl for isl in islands if isl != isl1 and isl[2] - isl[1] > 3 * length]
            if not options:
                continue
            chrom2, lo2, hi2 = rng.choice(options)
            s2 = rng.randint(lo2 + length, hi2 - length - half)
            if (chrom2, s2 // 10_000) in used:
                continue
            used.add((chrom2, s2 // 10_000))
            self.clone_parts[cid] = [(chrom, start, half), (chrom2, s2, length - half)]
            self.truth.chimeras[cid] = ((chrom, start, start + half), (chrom2, s2, s2 + length - half))

    def _islands(self) -> list[tuple[str, int, int]]:
        out = []
        by_chrom = defaultdict(list)
        for parts in self.clone_parts.values():
            for chrom, s, L in parts:
                by_chrom[chrom].append((s, s + L))
        for chrom in self.chroms:
            cur = None
            for s, e in sorted(by_chrom[chrom]):
                if cur is None or s >= cur[1]:
                    if cur is not None:
                        out.append((chrom, cur[0], cur[1]))
                    cur = [s, e]
                else:
                    cur[1] = max(cur[1], e)
            if cur is not None:
                out.append((chrom, cur[0], cur[1]))
        return out

    @staticmethod
    def _island_of(islands, chrom, s, e, exclude=None):
        for isl in islands:
            if isl[0] == chrom and isl[1] <= s and e <= isl[2]:
                return isl
        return None

    @staticmethod
    def _well_inside(isl, s, e, margin) -> bool:
        return s - isl[1] >= margin and isl[2] - e >= margin

    def make_fragments(self) -> None:
        p, rng = self.p, self.rng
        for cid in sorted(self.clone_parts):
            phase = self.phase[cid]
            ids = []
            k = 0
            for chrom, start, length in self.clone_parts[cid]:
                if phase == 3:
                    pieces = [(0, length)]
                else:
                    share = length / sum(x[2] for x in self.clone_parts[cid])
                    nk = max(1, round(_draw_length(rng, p.fragments_per_draft_clone, 2, 1000) * share))
                    pieces = _cut(rng, length, nk, p)
                for off, size in pieces:
                    k += 1
                    fid = f"{cid}~{k}"
                    strand = rng.choice((1, -1)) if phase == 1 else 1
                    self.truth.fragments[fid] = TruthFragment(fid, cid, chrom, start + off, size, strand)
                    ids.append(fid)
            self.frag_order[cid] = ids

    def build(self) -> SimulationResult:
        p, rng = self.p, self.rng
        self.place_clones()
        self.plant_chimeras()
        self.make_fragments()
        tf = self.truth.fragments
        frags = [tf[f] for f in sorted(tf)]

        true_pairs = list(_sweep_pairs(frags))
        true_pairs.sort(key=lambda ab: (ab[0].id, ab[1].id))
        neighbours = defaultdict(list)
        for a, b in true_pairs:
            neighbours[a.id].append(b)
            neighbours[b.id].append(a)

        dropped = self._choose_drops(true_pairs)
        dropped_set = set(dropped)
        self.truth.dropped = sorted(dropped)
        alignments, nt_pairs = [], []
        lengths = {f.id: f.length for f in frags}
        for a, b in true_pairs:
            if (a.id, b.id) in dropped_set:
                continue
            lo, hi = max(a.start, b.start), min(a.end, b.end)
            self.truth.labels[(a.id, b.id)] = OverlapLabel.TRUE
            left, right = (a, b) if (a.start, a.end) < (b.start, b.end) else (b, a)
            if (self.phase[a.clone] == 3 and self.phase[b.clone] == 3
                    and left.start < right.start and left.end < right.end
                    and rng.random() < p.nt_pair_fraction):
                nt_pairs.append(canonicalize_overlap(
                    left.id, right.id, right.start - left.start, Orientation.SAME, lengths,
                    kind=OverlapKind.NT_PAIR, overlap_length=hi - lo))
                continue
            alignments.append(alignment_between(a, b, lo, hi))

        for alen in self._plant_fps(frags, neighbours, len(alignments) + len(nt_pairs)):
            alignments.append(alen)

        clones, fragments = self._records()
        self._mislabel(clones)
        pairs = self._orientation_pairs()
        seqs = self._sequences() if p.with_sequences else {}
        if seqs:
            fragments = {f: Fragment(fr.id, fr.clone_id, fr.length, fr.declared_order_index, fr.is_end_fragment, seqs[f])
                         for f, fr in fragments.items()}
        alignments.sort(key=lambda x: (x.frag_a, x.frag_b))
        nt_pairs.sort(key=lambda ov: ov.key)
        return SimulationResult(clones, fragments, alignments, nt_pairs, pairs, seqs, self.truth, p)

    def _choose_drops(self, true_pairs) -> list[tuple[str, str]]:
        p, rng = self.p, self.rng
        if p.fn_rate == 0:
            return []
        if p.fn_mode is FnMode.RANDOM:
            pool = [(a.id, b.id) for a, b in true_pairs]
        else:
            per_clone_pair = defaultdict(list)
            for a, b in true_pairs:
                per_clone_pair[tuple(sorted((a.clone, b.clone)))].append((a.id, b.id))
            pool = [v[0] for k, v in sorted(per_clone_pair.items()) if len(v) == 1]
        n = round(p.fn_rate * len(pool))
        return rng.sample(pool, n) if n else []

    def _plant_fps(self, frags, neighbours, n_true) -> list[RawAlignment]:
        p = self.p
        n_fp = round(p.fp_rate / (1 - p.fp_rate) * n_true) if p.fp_rate > 0 else 0
        if n_fp == 0:
            return []
        n_cons = round(n_fp * p.fp_consistent_fraction)
        out = []
        out += self._inconsistent_fps(frags, neighbours, n_fp - n_cons)
        if n_cons:
            ends = self._end_of_island_fps(frags, neighbours, (n_cons + 1) // 2)
            out += ends
            out += self._long_repeat_fps(frags, neighbours, n_cons - len(ends))
        return out

    def _fp_alignment(self, f: TruthFragment, g: TruthFragment, L: int, f_right: bool, g_left: bool) -> RawAlignment:
        a_s, a_e = (f.length - L + 1, f.length) if f_right else (1, L)
        b_s, b_e = (1, L) if g_left else (g.length - L + 1, g.length)
        same = f_right == g_left
        return RawAlignment(f.id, a_s, a_e, g.id, b_s, b_e, Orientation.SAME if same else Orientation.REVERSE, 1.0)

    def _label_fp(self, aln: RawAlignment, neighbours) -> OverlapLabel:
        tf = self.truth.fragments
        f, g = tf[aln.frag_a], tf[aln.frag_b]
        off = alignment_offset(aln, g.length)
        rel = aln.strand.sign
        nb_f = [h for h in neighbours[f.id] if h.id != g.id and self._emitted(f.id, h.id)]
        # g's frame: f sits at the reframed offset
        off_f = -off if rel > 0 else off + g.length - f.length
        nb_g = [h for h in neighbours[g.id] if h.id != f.id and self._emitted(g.id, h.id)]
        t = self.p.label_threshold
        if implied_conflict(f, off, rel, g.length, nb_f, t) or implied_conflict(g, off_f, rel, f.length, nb_g, t):
            return OverlapLabel.REPEAT_INCONSISTENT
        return OverlapLabel.REPEAT_CONSISTENT

    def _emitted(self, a: str, b: str) -> bool:
        return (min(a, b), max(a, b)) in self.truth.labels

    def _record_fp(self, aln: RawAlignment, neighbours, label: Optional[OverlapLabel] = None) -> Optional[RawAlignment]:
        key = (min(aln.frag_a, aln.frag_b), max(aln.frag_a, aln.frag_b))
        if key in self.truth.labels or key in set(self.truth.dropped):
            return None
        lab = label or self._label_fp(aln, neighbours)
        self.truth.labels[key] = lab
        return aln

    def _far_apart(self, f: TruthFragment, g: TruthFragment) -> bool:
        if f.clone == g.clone:
            return False
        if f.chrom != g.chrom:
            return True
        return abs(f.start - g.start) > 4 * self.p.clone_length[0]

    def _inconsistent_fps(self, frags, neighbours, n) -> list[RawAlignment]:
        p, rng = self.p, self.rng
        out = []
        lo, hi = p.fp_length_range
        pool = [f for f in frags if f.length > 2 * hi]
        attempts = 0
        while len(out) < n and attempts < 50 * (n + 1) and len(pool) > 1:
            attempts += 1
            f, g = rng.sample(pool, 2)
            if not self._far_apart(f, g):
                continue
            L = rng.randint(lo, hi)
            aln = self._fp_alignment(f, g, L, rng.random() < 0.5, rng.random() < 0.5)
            if f.id > g.id:
                aln = _swap(aln)
            rec = self._record_fp(aln, neighbours)
            if rec is not None:
                out.append(rec)
        return out

    def _end_of_island_fps(self, frags, neighbours, n) -> list[RawAlignment]:
        """Join the exposed ends of fragments at coverage-island borders."""
        p, rng = self.p, self.rng
        lo, hi = p.fp_length_range
        right_ends, left_ends = [], []
        by_chrom = defaultdict(list)
        for f in frags:
            by_chrom[f.chrom].append(f)
        for chrom, items in by_chrom.items():
            for f in items:
                others_r = [h for h in neighbours[f.id] if h.end > f.end - hi - p.label_threshold]
                others_l = [h for h in neighbours[f.id] if h.start < f.start + hi + p.label_threshold]
                if not others_r:
                    right_ends.append(f)
                if not others_l:
                    left_ends.append(f)
        right_ends.sort(key=lambda t: t.id)
        left_ends.sort(key=lambda t: t.id)
        out = []
        attempts = 0
        while len(out) < n and attempts < 50 * (n + 1) and right_ends and left_ends:
            attempts += 1
            f, g = rng.choice(right_ends), rng.choice(left_ends)
            if not self._far_apart(f, g):
                continue
            L = rng.randint(lo, min(hi, f.length // 2, g.length // 2))
            # join f's genome-right end to g's genome-left end in genome orientation
            aln = self._fp_alignment(f, g, L, f.strand > 0, g.strand > 0)
            if f.id > g.id:
                aln = _swap(aln)
            rec = self._record_fp(aln, neighbours)
            if rec is not None:
                out.append(rec)
        return out

    def _long_repeat_fps(self, frags, neighbours, n) -> list[RawAlignment]:
        """A repeat longer than a clone copied between two loci."""
        p, rng = self.p, self.rng
        out = []
        length = int(1.3 * (p.clone_length[0] + 3 * p.clone_length[1]))
        if length * 3 > self.chrom_len * len(self.chroms):
            return out
        params = PipelineParams()
        lengths = {f.id: f.length for f in frags}
        for _ in range(10):
            if len(out) >= n:
                break
            c1, c2 = rng.choice(self.chroms), rng.choice(self.chroms)
            p1 = rng.randint(0, self.chrom_len - length)
            p2 = rng.randint(0, self.chrom_len - length)
            if c1 == c2 and abs(p1 - p2) < 3 * length:
                continue
            shift = p1 - p2
            in1 = [f for f in frags if f.chrom == c1 and f.end > p1 and f.start < p1 + length]
            in2 = [g for g in frags if g.chrom == c2 and g.end > p2 and g.start < p2 + length]
            for f in in1:
                for g in in2:
                    if f.clone == g.clone:
                        continue
                    lo = max(f.start, g.start + shift, p1)
                    hi = min(f.end, g.end + shift, p1 + length)
                    if hi - lo < 1:
                        continue
                    aln = alignment_between(f, g, lo, hi, b_shift=shift)
                    if f.id > g.id:
                        aln = _swap(aln)
                    ph = self.phase
                    res = classify_overlap(aln, lengths[aln.frag_a], lengths[aln.frag_b],
                                           ph[self.truth.fragments[aln.frag_a].clone],
                                           ph[self.truth.fragments[aln.frag_b].clone], params)
                    if isinstance(res, Rejected):
                        continue
                    rec = self._record_fp(aln, neighbours)
                    if rec is not None:
                        out.append(rec)
            self.repeats.append((c1, p1, c2, p2, length))
        return out

    def _records(self) -> tuple[dict, dict]:
        p, rng = self.p, self.rng
        tf = self.truth.fragments
        clones, fragments = {}, {}
        for cid in sorted(self.clone_parts):
            phase = self.phase[cid]
            ids = list(self.frag_order[cid])
            order = {f: i for i, f in enumerate(ids)}
            if phase == 1:
                rng.shuffle(ids)
            for f in ids:
                marker = None
                if phase != 3 and len(ids) > 1 and rng.random() < p.end_marker_rate:
                    if order[f] == 0:
                        marker = EndMarker.LEFT
                    elif order[f] == len(ids) - 1:
                        marker = EndMarker.RIGHT
                declared = order[f] if phase == 2 else None
                fragments[f] = Fragment(f, cid, tf[f].length, declared, marker)
            chrom = self.clone_parts[cid][0][0]
            label = chrom if rng.random() >= p.unknown_chromosome_rate else UNKNOWN_CHROMOSOME
            est = sum(x[2] for x in self.clone_parts[cid])
            clones[cid] = Clone(cid, est, phase, label, tuple(ids))
        return clones, fragments

    def _mislabel(self, clones: dict) -> None:
        p, rng = self.p, self.rng
        if p.mislabel_rate == 0 or len(self.chroms) < 2:
            return
        n = round(p.mislabel_rate * len(clones))
        for cid in sorted(rng.sample(sorted(clones), n)):
            c = clones[cid]
            true = self.clone_parts[cid][0][0]
            wrong = rng.choice([x for x in self.chroms if x != true])
            clones[cid] = Clone(c.id, c.estimated_length, c.phase, wrong, c.fragments)
            self.truth.mislabels[cid] = (true, wrong)

    def _orientation_pairs(self) -> list[OrientationPair]:
        p, rng = self.p, self.rng
        tf = self.truth.fragments
        out = []
        for cid in sorted(self.frag_order):
            ids = self.frag_order[cid]
            for a, b in zip(ids, ids[1:]):
                if tf[a].chrom != tf[b].chrom or abs(tf[b].start - tf[a].end) > 1000:
                    continue  # chimera junction
                if rng.random() < p.orientation_pair_rate:
                    rel = Orientation.from_sign(tf[a].strand * tf[b].strand)
                    out.append(OrientationPair(min(a, b), max(a, b), rel, rng.randint(1, 3)))
        return out

    def _sequences(self) -> dict[str, str]:
        rng = random.Random(self.p.seed + 1)
        genome = {c: "".join(rng.choices("ACGT", k=self.chrom_len)) for c in self.chroms}
        for c1, p1, c2, p2, L in self.repeats:
            g2 = genome[c2]
            genome[c2] = g2[:p2] + genome[c1][p1:p1 + L] + g2[p2 + L:]
        out = {}
        comp = str.maketrans("ACGT", "TGCA")
        for f, t in self.truth.fragments.items():
            s = genome[t.chrom][t.start:t.end]
            out[f] = s if t.strand > 0 else s.translate(comp)[::-1]
        return out


def _swap(aln: RawAlignment) -> RawAlignment:
    return RawAlignment(aln.frag_b, aln.b_start, aln.b_end, aln.frag_a, aln.a_start, aln.a_end, aln.strand, aln.identity)


def simulate(params: Optional[SimParams] = None) -> SimulationResult:
    """Deterministic for a fixed ``params.seed``."""
    return _Builder(params or SimParams()).build()


# --------------------------------------------------------------------------
# scoring


@dataclass
class Scores:
    contigs: int = 0
    order_agreement: float = 1.0
    contigs_in_order: int = 0
    placement_errors: list = field(default_factory=list)
    max_placement_error: float = 0.0
    warps: dict = field(default_factory=dict)
    fp_inconsistent_total: int = 0
    fp_inconsistent_accepted: int = 0
    fp_rejection_recall: float = 1.0
    fp_rejection_precision: float = 1.0
    chimera_recall: float = 1.0
    chimera_precision: float = 1.0
    chimeras_detected: int = 0
    false_removals: int = 0
    fn_dropped: int = 0
    fn_flagged: int = 0

    def as_rows(self) -> list[tuple[str, str]]:
        return [
            ("contigs", str(self.contigs)),
            ("order_agreement", f"{self.order_agreement:.4f}"),
            ("max_placement_error", f"{self.max_placement_error:g}"),
            ("fp_inconsistent_total", str(self.fp_inconsistent_total)),
            ("fp_inconsistent_accepted", str(self.fp_inconsistent_accepted)),
            ("fp_rejection_recall", f"{self.fp_rejection_recall:.4f}"),
            ("fp_rejection_precision", f"{self.fp_rejection_precision:.4f}"),
            ("chimera_recall", f"{self.chimera_recall:.4f}"),
            ("chimera_precision", f"{self.chimera_precision:.4f}"),
            ("false_removals", str(self.false_removals)),
            ("fn_dropped", str(self.fn_dropped)),
            ("fn_flagged", str(self.fn_flagged)),
        ]


def _contig_in_order(clone_pos: list[tuple[float, str]], truth: GroundTruth) -> bool:
    """Truly disjoint clones must keep their genome order (either direction)."""
    seq = [truth.clones[c] for _, c in sorted(clone_pos)]
    if len({s[0] for s in seq}) > 1:
        return False
    for direction in (seq, seq[::-1]):
        ok = True
        max_start = -math.inf
        for chrom, s, e, _ in direction:
            if max_start >= e:
                ok = False
                break
            max_start = max(max_start, s)
        if ok:
            return True
    return False


def _subcontig_error(rows, truth: GroundTruth) -> list[float]:
    """Per-fragment offset error of one subcontig under its best rigid map onto the genome."""
    tf = truth.fragments
    if len({tf[f].chrom for f, *_ in rows}) > 1:
        return [math.inf] * len(rows)
    best = None
    for d in (1, -1):
        f0, s0, _ = rows[0]
        t0 = tf[f0]
        c = t0.start - s0 if d > 0 else t0.start + s0 + t0.length
        errs = []
        for f, s, L in rows:
            pred = s + c if d > 0 else c - s - L
            errs.append(abs(pred - tf[f].start))
        if best is None or max(errs) < max(best):
            best = errs
    return best


def score_assembly(artifacts, truth: GroundTruth) -> Scores:
    """Compare assembly artifacts with the truth.

    ``artifacts`` needs ``layout`` (contig id -> list of (frag, clone, start,
    strand, subcontig)), ``accepted`` (set of fragment pairs kept in
    subcontigs), ``actions`` (ResolutionAction list), ``fn_reports`` and
    ``fragment_lengths``.
    """
    sc = Scores()
    tf = truth.fragments
    missing = [f for rows in artifacts.layout.values() for f, *_ in rows if f not in tf]
    if missing:
        raise ValueError(f"fragment ids not in truth: {missing[:5]}")
    chimeric = set(truth.chimeras)
    sc.contigs = len(artifacts.layout)
    in_order = 0
    by_sub = defaultdict(list)
    for ctg, rows in artifacts.layout.items():
        pos = defaultdict(list)
        for f, c, s, strand, sub in rows:
            L = tf[f].length
            by_sub[sub].append((f, s, L))
            if c not in chimeric:
                pos[c].append(s + L / 2)
        clone_pos = [(sum(v) / len(v), c) for c, v in pos.items()]
        if _contig_in_order(clone_pos, truth):
            in_order += 1
        spans = defaultdict(list)
        for f, c, s, strand, sub in rows:
            spans[c].append((s, s + tf[f].length))
        for c, sp in spans.items():
            est = truth.clones[c][2] - truth.clones[c][1] if c not in chimeric else sum(e - s for _, s, e in truth.chimeras[c])
            sc.warps[c] = (max(e for _, e in sp) - min(s for s, _ in sp)) / est
    sc.contigs_in_order = in_order
    sc.order_agreement = in_order / sc.contigs if sc.contigs else 1.0
    for sub in sorted(by_sub):
        rows = sorted(by_sub[sub], key=lambda r: (r[1], r[0]))
        sc.placement_errors.extend(_subcontig_error(rows, truth))
    sc.max_placement_error = max(sc.placement_errors, default=0.0)

    accepted = set(artifacts.accepted)
    incons = [k for k, lab in truth.labels.items() if lab is OverlapLabel.REPEAT_INCONSISTENT]
    sc.fp_inconsistent_total = len(incons)
    sc.fp_inconsistent_accepted = sum(1 for k in incons if k in accepted)
    if incons:
        sc.fp_rejection_recall = 1 - sc.fp_inconsistent_accepted / len(incons)
    rejected = [k for k in truth.labels if k not in accepted]
    if rejected:
        sc.fp_rejection_precision = sum(1 for k in rejected if truth.labels[k] is not OverlapLabel.TRUE) / len(rejected)

    removed = {a.clones[0] for a in artifacts.actions if a.kind.value == "RemoveVertex"}
    sc.chimeras_detected = len(removed & chimeric)
    sc.false_removals = len(removed - chimeric)
    if chimeric:
        sc.chimera_recall = sc.chimeras_detected / len(chimeric)
    if removed:
        sc.chimera_precision = sc.chimeras_detected / len(removed)

    sc.fn_dropped = len(truth.dropped)
    flagged_clones = set()
    for r in artifacts.fn_reports:
        flagged_clones.update((r.violation.left_clone, r.violation.right_clone))
        flagged_clones.update(tf[f].clone for f in r.fragments if f in tf)
    added = {tuple(sorted(a.clones)) for a in artifacts.actions if a.kind.value == "AddFnEdge"}
    for a, b in truth.dropped:
        ca, cb = tf[a].clone, tf[b].clone
        if tuple(sorted((ca, cb))) in added or ca in flagged_clones or cb in flagged_clones:
            sc.fn_flagged += 1
    return sc
