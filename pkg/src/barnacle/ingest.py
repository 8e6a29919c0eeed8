"""Readers and writers for the input bundle, and overlap classification.

File formats (whitespace separated, ``#`` starts a comment line):

clone table
    header row ``accession estimated_length phase chromosome n_fragments``
    followed by ``n_fragments`` rows ``frag_id start end length [end] [order]``.
    ``chromosome`` is ``U`` when unknown; ``end`` is ``left``/``right``/``-``;
    ``order`` is an optional partial-order index for phase 1 clones.
alignments
    ``frag_a a_start a_end frag_b b_start b_end strand identity``, 1-based
    inclusive coordinates, strand ``Same`` or ``Reverse``.
orientation pairs
    ``frag_a frag_b Same|Reverse``
nt-pairs
    ``frag_a frag_b overlap_length``; ``frag_b`` follows ``frag_a`` in the
    same orientation, and a length of 0 means the two simply abut.
sequences
    ``frag_id bases``
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Iterator, Mapping, Optional, Union

from .model import (
    AssemblyInput,
    Clone,
    EndMarker,
    Fragment,
    Orientation,
    OrientationPair,
    OverlapKind,
    PipelineParams,
    ValidOverlap,
    canonicalize_overlap,
)

logger = logging.getLogger(__name__)

BUNDLE_FILES = {
    "clones": "clones.txt",
    "alignments": "alignments.tsv",
    "orientation": "orientation.tsv",
    "nt_pairs": "ntpairs.tsv",
    "sequences": "sequences.tsv",
}


class ParseError(ValueError):
    """Malformed input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip())


def _rows(stream: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped.split()


# clone table ---------------------------------------------------------------


def parse_clone_table(stream: Iterable[str]) -> tuple[list[Clone], list[Fragment]]:
    """Parse a clone table into clones and their fragments (in file order)."""
    clones: list[Clone] = []
    fragments: list[Fragment] = []
    seen_frags: set[str] = set()
    seen_clones: set[str] = set()
    pending: Optional[tuple[int, list[str]]] = None  # header of the clone being read
    block: list[tuple[int, list[str]]] = []

    def close(at_line: Optional[int]) -> None:
        lineno, tok = pending
        acc, n_frag = tok[0], int(tok[4])
        if len(block) != n_frag:
            raise ParseError(
                f"clone {acc} declares {n_frag} fragments but {len(block)} rows follow",
                at_line if at_line is not None else lineno,
            )
        if acc in seen_clones:
            raise ParseError(f"duplicate accession {acc}", lineno)
        seen_clones.add(acc)
        phase = int(tok[2])
        ids = []
        for order, (flineno, ftok) in enumerate(block):
            frag = _parse_fragment_row(acc, phase, order, flineno, ftok)
            if frag.id in seen_frags:
                raise ParseError(f"duplicate fragment {frag.id}", flineno)
            seen_frags.add(frag.id)
            fragments.append(frag)
            ids.append(frag.id)
        try:
            clones.append(Clone(acc, int(tok[1]), phase, tok[3], tuple(ids)))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None

    for lineno, tok in _rows(stream):
        if tok[0].lower() in ("accession", "fragment"):
            continue
        if _looks_like_header(tok):
            if pending is not None:
                close(lineno)
            pending, block = (lineno, tok), []
            continue
        if pending is None:
            raise ParseError(f"expected clone header, got {' '.join(tok)!r}", lineno)
        if len(block) == int(pending[1][4]):
            acc, n = pending[1][0], int(pending[1][4])
            raise ParseError(f"clone {acc} declares {n} fragments but at least {n + 1} rows follow", lineno)
        block.append((lineno, tok))
    if pending is not None:
        close(None)
    return clones, fragments


def _looks_like_header(tok: list[str]) -> bool:
    if len(tok) != 5:
        return False
    try:
        int(tok[1]), int(tok[4])
    except ValueError:
        return False
    return tok[2] in ("1", "2", "3")


def _parse_fragment_row(acc: str, phase: int, order: int, lineno: int, tok: list[str]) -> Fragment:
    if len(tok) not in (4, 5, 6):
        raise ParseError(f"expected fragment row 'frag_id start end length', got {len(tok)} fields", lineno)
    try:
        start, end, length = int(tok[1]), int(tok[2]), int(tok[3])
    except ValueError:
        raise ParseError(f"non-integer coordinate in fragment row {' '.join(tok)!r}", lineno) from None
    if end - start + 1 != length:
        raise ParseError(
            f"fragment {tok[0]}: length {length} does not match start {start} end {end}", lineno
        )
    marker = None
    if len(tok) >= 5 and tok[4] != "-":
        try:
            marker = EndMarker(tok[4].lower())
        except ValueError:
            raise ParseError(f"bad end marker {tok[4]!r}", lineno) from None
    declared = None
    if phase == 2:
        declared = order
    elif len(tok) == 6 and tok[5] != "-":
        declared = int(tok[5])
    try:
        return Fragment(tok[0], acc, length, declared, marker)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def write_clone_table(clones: Iterable[Clone], fragments: Mapping[str, Fragment], out: IO[str]) -> None:
    for clone in clones:
        out.write(f"{clone.id} {clone.estimated_length} {clone.phase} {clone.chromosome} {len(clone.fragments)}\n")
        pos = 1
        for fid in clone.fragments:
            frag = fragments[fid]
            row = f"\t{frag.id} {pos} {pos + frag.length - 1} {frag.length}"
            extra_order = frag.declared_order_index is not None and clone.phase == 1
            if frag.is_end_fragment is not None or extra_order:
                row += " " + (frag.is_end_fragment.value if frag.is_end_fragment else "-")
            if extra_order:
                row += f" {frag.declared_order_index}"
            out.write(row + "\n")
            pos += frag.length


# alignments ------------------------------------------------------------------


@dataclass(frozen=True)
class RawAlignment:
    frag_a: str
    a_start: int
    a_end: int
    frag_b: str
    b_start: int
    b_end: int
    strand: Orientation
    identity: float

    def __post_init__(self):
        if self.a_start > self.a_end or self.b_start > self.b_end:
            raise ValueError("alignment start must not exceed end")
        if self.a_start < 1 or self.b_start < 1:
            raise ValueError("alignment coordinates are 1-based")


class RejectReason(Enum):
    LOW_IDENTITY = "LowIdentity"
    INTERNAL = "Internal"


@dataclass(frozen=True)
class Rejected:
    reason: RejectReason


def alignment_offset(aln: RawAlignment, len_b: int) -> int:
    """Start of ``b`` in ``a``'s frame implied by the alignment anchor."""
    if aln.strand is Orientation.SAME:
        return aln.a_start - aln.b_start
    return aln.a_start - 1 - len_b + aln.b_end


def classify_overlap(
    aln: RawAlignment,
    len_a: int,
    len_b: int,
    phase_a: int,
    phase_b: int,
    params: PipelineParams,
) -> Union[ValidOverlap, Rejected]:
    """Classify a local alignment as dovetail, containment, or rejected."""
    if aln.a_end > len_a or aln.b_end > len_b:
        raise ValueError(f"alignment {aln.frag_a}/{aln.frag_b} exceeds fragment bounds")
    if aln.identity < params.min_identity:
        return Rejected(RejectReason.LOW_IDENTITY)
    err_a = params.end_allowed_error(len_a, phase_a)
    err_b = params.end_allowed_error(len_b, phase_b)
    # unaligned overhangs, b's measured in a's frame
    a_left, a_right = aln.a_start - 1, len_a - aln.a_end
    if aln.strand is Orientation.SAME:
        b_left, b_right = aln.b_start - 1, len_b - aln.b_end
    else:
        b_left, b_right = len_b - aln.b_end, aln.b_start - 1
    b_inside = b_left <= err_b and b_right <= err_b
    a_inside = a_left <= err_a and a_right <= err_a
    contained = None
    if b_inside and (not a_inside or len_b <= len_a):
        kind, contained = OverlapKind.CONTAINMENT, aln.frag_b
    elif a_inside:
        kind, contained = OverlapKind.CONTAINMENT, aln.frag_a
    elif (a_right <= err_a and b_left <= err_b) or (a_left <= err_a and b_right <= err_b):
        kind = OverlapKind.DOVETAIL
    else:
        return Rejected(RejectReason.INTERNAL)
    offset = alignment_offset(aln, len_b)
    lengths = {aln.frag_a: len_a, aln.frag_b: len_b}
    return canonicalize_overlap(
        aln.frag_a,
        aln.frag_b,
        offset,
        aln.strand,
        lengths,
        kind=kind,
        identity=aln.identity,
        overlap_length=aln.a_end - aln.a_start + 1,
        contained=contained,
    )


def parse_alignments(stream: Iterable[str]) -> Iterator[RawAlignment]:
    for lineno, tok in _rows(stream):
        if len(tok) != 8:
            raise ParseError(f"expected 8 alignment fields, got {len(tok)}", lineno)
        try:
            yield RawAlignment(
                tok[0], int(tok[1]), int(tok[2]), tok[3], int(tok[4]), int(tok[5]),
                Orientation.parse(tok[6]), float(tok[7]),
            )
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None


def write_alignments(alignments: Iterable[RawAlignment], out: IO[str]) -> None:
    for a in alignments:
        out.write(
            f"{a.frag_a}\t{a.a_start}\t{a.a_end}\t{a.frag_b}\t{a.b_start}\t{a.b_end}\t"
            f"{a.strand.value}\t{a.identity:.4f}\n"
        )


def classify_alignments(
    alignments: Iterable[RawAlignment],
    fragments: Mapping[str, Fragment],
    clones: Mapping[str, Clone],
    params: PipelineParams,
    stats: Optional[dict] = None,
) -> list[ValidOverlap]:
    """Classify every alignment; keep the first valid overlap per fragment pair."""
    kept: dict[tuple[str, str], ValidOverlap] = {}
    for aln in alignments:
        fa, fb = fragments.get(aln.frag_a), fragments.get(aln.frag_b)
        if fa is None or fb is None:
            _count(stats, "alignment_unknown_fragment")
            continue
        if fa.id == fb.id:
            _count(stats, "alignment_self")
            continue
        res = classify_overlap(
            aln, fa.length, fb.length, clones[fa.clone_id].phase, clones[fb.clone_id].phase, params
        )
        if isinstance(res, Rejected):
            _count(stats, f"rejected_{res.reason.value}")
            continue
        if res.key in kept:
            _count(stats, "alignment_duplicate_pair")
            continue
        kept[res.key] = res
    return list(kept.values())


def _count(stats: Optional[dict], key: str) -> None:
    if stats is not None:
        stats[key] = stats.get(key, 0) + 1


# orientation pairs -----------------------------------------------------------


def parse_orientation_pairs(
    stream: Iterable[str],
    known_fragments: Optional[Iterable[str]] = None,
    stats: Optional[dict] = None,
) -> list[OrientationPair]:
    """Read orientation pairs, merging duplicates and skipping bad rows with a warning."""
    known = set(known_fragments) if known_fragments is not None else None
    merged: dict[tuple[str, str, Orientation], int] = {}
    for lineno, tok in _rows(stream):
        if len(tok) != 3:
            raise ParseError(f"expected 3 orientation fields, got {len(tok)}", lineno)
        a, b = tok[0], tok[1]
        rel = Orientation.parse(tok[2])
        if a == b:
            logger.warning("line %d: self orientation pair %s skipped", lineno, a)
            _count(stats, "orientation_self_pair")
            continue
        if known is not None and (a not in known or b not in known):
            logger.warning("line %d: unknown fragment in orientation pair %s %s skipped", lineno, a, b)
            _count(stats, "orientation_unknown_fragment")
            continue
        key = (min(a, b), max(a, b), rel)
        merged[key] = merged.get(key, 0) + 1
    return [OrientationPair(a, b, rel, n) for (a, b, rel), n in sorted(merged.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value))]


def write_orientation_pairs(pairs: Iterable[OrientationPair], out: IO[str]) -> None:
    for p in pairs:
        for _ in range(p.evidence_count):
            out.write(f"{p.frag_a}\t{p.frag_b}\t{p.relative_orientation.value}\n")


# nt-pairs --------------------------------------------------------------------


def parse_nt_pairs(stream: Iterable[str], lengths: Mapping[str, int]) -> list[ValidOverlap]:
    out = []
    for lineno, tok in _rows(stream):
        if len(tok) != 3:
            raise ParseError(f"expected 3 nt-pair fields, got {len(tok)}", lineno)
        a, b = tok[0], tok[1]
        for frag in (a, b):
            if frag not in lengths:
                raise ParseError(f"unknown fragment {frag!r} in nt-pair", lineno)
        try:
            overlap = int(tok[2])
        except ValueError:
            raise ParseError(f"non-integer nt-pair overlap {tok[2]!r}", lineno) from None
        if overlap < 0 or overlap > min(lengths[a], lengths[b]):
            raise ParseError(f"nt-pair overlap {overlap} out of range", lineno)
        out.append(
            canonicalize_overlap(
                a, b, lengths[a] - overlap, Orientation.SAME, lengths,
                kind=OverlapKind.NT_PAIR, identity=1.0, overlap_length=overlap,
            )
        )
    return out


def write_nt_pairs(pairs: Iterable[ValidOverlap], lengths: Mapping[str, int], out: IO[str]) -> None:
    for ov in pairs:
        # written in the order where b follows a
        if ov.offset >= 0:
            out.write(f"{ov.frag_a}\t{ov.frag_b}\t{ov.overlap_length}\n")
        else:
            out.write(f"{ov.frag_b}\t{ov.frag_a}\t{ov.overlap_length}\n")


# sequences -------------------------------------------------------------------


def parse_sequences(stream: Iterable[str]) -> dict[str, str]:
    seqs = {}
    for lineno, tok in _rows(stream):
        if len(tok) != 2:
            raise ParseError("expected 'frag_id bases'", lineno)
        seqs[tok[0]] = tok[1].upper()
    return seqs


def write_sequences(seqs: Mapping[str, str], out: IO[str]) -> None:
    for fid in sorted(seqs):
        out.write(f"{fid}\t{seqs[fid]}\n")


# bundle ----------------------------------------------------------------------


def load_bundle(
    paths: Mapping[str, Optional[str]],
    params: Optional[PipelineParams] = None,
    stats: Optional[dict] = None,
) -> AssemblyInput:
    """Load an input bundle from explicit file paths.

    ``paths`` must contain ``clones``; ``alignments``, ``orientation``,
    ``nt_pairs`` and ``sequences`` are optional.
    """
    params = params or PipelineParams()
    clone_path = paths.get("clones")
    if not clone_path or not os.path.exists(clone_path):
        raise FileNotFoundError(f"clone table not found: {clone_path}")
    with open(clone_path) as fh:
        try:
            clone_list, frag_list = parse_clone_table(fh)
        except ParseError as exc:
            raise ParseError(str(exc), source=clone_path) from None
    clones = {c.id: c for c in clone_list}
    fragments = {f.id: f for f in frag_list}

    seq_path = paths.get("sequences")
    if seq_path and os.path.exists(seq_path):
        with open(seq_path) as fh:
            seqs = parse_sequences(fh)
        for fid, seq in seqs.items():
            if fid in fragments:
                f = fragments[fid]
                fragments[fid] = Fragment(f.id, f.clone_id, f.length, f.declared_order_index, f.is_end_fragment, seq)

    overlaps: list[ValidOverlap] = []
    aln_path = paths.get("alignments")
    if aln_path:
        with open(aln_path) as fh:
            overlaps = classify_alignments(parse_alignments(fh), fragments, clones, params, stats)
    nt_path = paths.get("nt_pairs")
    if nt_path and os.path.exists(nt_path):
        lengths = {f.id: f.length for f in fragments.values()}
        with open(nt_path) as fh:
            seen = {ov.key for ov in overlaps}
            for ov in parse_nt_pairs(fh, lengths):
                if ov.key not in seen:
                    overlaps.append(ov)
                    seen.add(ov.key)
    pairs: list[OrientationPair] = []
    or_path = paths.get("orientation")
    if or_path and os.path.exists(or_path):
        with open(or_path) as fh:
            pairs = parse_orientation_pairs(fh, fragments.keys(), stats)
    overlaps.sort(key=lambda ov: ov.key)
    return AssemblyInput(clones, fragments, overlaps, pairs)


def bundle_paths(directory: str) -> dict[str, Optional[str]]:
    """Standard file names inside a bundle directory; absent optional files map to None."""
    out: dict[str, Optional[str]] = {}
    for key, name in BUNDLE_FILES.items():
        path = os.path.join(directory, name)
        out[key] = path if (key == "clones" or os.path.exists(path)) else None
    return out
