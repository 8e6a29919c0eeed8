"""Shared domain records and the pipeline parameter set.

Coordinates are integer base pairs, 0-based and half-open unless a docstring
says otherwise. An overlap between fragments ``a`` and ``b`` is stored in the
frame of ``a``: ``a`` runs forward over ``[0, len_a)`` and ``b`` occupies
``[offset, offset + len_b)``, reverse-complemented when the relative
orientation is ``Reverse``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Mapping, Optional

BASES = frozenset("ACGTN")


class Orientation(Enum):
    """Relative orientation of two sequences."""

    SAME = "Same"
    REVERSE = "Reverse"

    @property
    def sign(self) -> int:
        return 1 if self is Orientation.SAME else -1

    @classmethod
    def from_sign(cls, sign: int) -> "Orientation":
        return cls.SAME if sign > 0 else cls.REVERSE

    @classmethod
    def parse(cls, token: str) -> "Orientation":
        low = token.strip().lower()
        if low in ("same", "+", "forward", "f"):
            return cls.SAME
        if low in ("reverse", "-", "r", "rev"):
            return cls.REVERSE
        raise ValueError(f"unknown orientation {token!r}")


class Strand(Enum):
    """Orientation of a placed fragment or subcontig on its layout axis."""

    FORWARD = "Forward"
    REVERSE = "Reverse"

    @property
    def sign(self) -> int:
        return 1 if self is Strand.FORWARD else -1

    @classmethod
    def from_sign(cls, sign: int) -> "Strand":
        return cls.FORWARD if sign > 0 else cls.REVERSE


class OverlapKind(Enum):
    DOVETAIL = "Dovetail"
    CONTAINMENT = "Containment"
    NT_PAIR = "NtPair"


class EndMarker(Enum):
    LEFT = "left"
    RIGHT = "right"
    UNKNOWN = "unknown"


UNKNOWN_CHROMOSOME = "U"


@dataclass(frozen=True)
class Fragment:
    id: str
    clone_id: str
    length: int
    declared_order_index: Optional[int] = None
    is_end_fragment: Optional[EndMarker] = None
    sequence: Optional[str] = None

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"fragment {self.id}: length must be positive, got {self.length}")
        if self.sequence is not None:
            if len(self.sequence) != self.length:
                raise ValueError(
                    f"fragment {self.id}: sequence has {len(self.sequence)} bases, expected {self.length}"
                )
            if not set(self.sequence.upper()) <= BASES:
                raise ValueError(f"fragment {self.id}: sequence contains non-ACGTN characters")


@dataclass(frozen=True)
class Clone:
    id: str
    estimated_length: int
    phase: int
    chromosome: str = UNKNOWN_CHROMOSOME
    fragments: tuple[str, ...] = ()

    def __post_init__(self):
        if self.estimated_length <= 0:
            raise ValueError(f"clone {self.id}: estimated length must be positive")
        if self.phase not in (1, 2, 3):
            raise ValueError(f"clone {self.id}: phase must be 1, 2 or 3, got {self.phase}")
        if not self.fragments:
            raise ValueError(f"clone {self.id}: no fragments")

    @property
    def is_finished(self) -> bool:
        return self.phase == 3

    @property
    def chromosome_known(self) -> bool:
        return self.chromosome != UNKNOWN_CHROMOSOME


@dataclass(frozen=True)
class ValidOverlap:
    frag_a: str
    frag_b: str
    kind: OverlapKind
    offset: int
    relative_orientation: Orientation
    identity: float
    overlap_length: int
    # for Containment: which of the two fragments is inside the other
    contained: Optional[str] = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.frag_a, self.frag_b)

    def other(self, frag: str) -> str:
        if frag == self.frag_a:
            return self.frag_b
        if frag == self.frag_b:
            return self.frag_a
        raise KeyError(frag)


@dataclass(frozen=True)
class OrientationPair:
    frag_a: str
    frag_b: str
    relative_orientation: Orientation
    evidence_count: int = 1

    def __post_init__(self):
        if self.frag_a == self.frag_b:
            raise ValueError("orientation pair must join two distinct fragments")
        if self.evidence_count < 1:
            raise ValueError("evidence_count must be >= 1")


@dataclass(frozen=True)
class PipelineParams:
    end_error_finished: int = 350
    end_error_draft_fraction: float = 0.10
    end_error_draft_cap: int = 1000
    min_identity: float = 0.97
    implied_overlap_threshold: int = 1000
    offset_tolerance: int = 300
    warp_flag_threshold: float = 1.5
    long_bac_length_flag: int = 250_000
    min_clone_length: int = 10_000
    gap_width: int = 100
    review_rounds: int = 1
    random_seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            if f.name == "random_seed":
                continue
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be positive")
        if not 0 < self.min_identity <= 1:
            raise ValueError("min_identity must lie in (0, 1]")

    def end_allowed_error(self, length: int, phase: int) -> int:
        """Tolerated unaligned overhang at one end of a fragment."""
        if phase == 3:
            return self.end_error_finished
        return min(int(self.end_error_draft_fraction * length), self.end_error_draft_cap)

    def with_overrides(self, overrides: Mapping[str, str]) -> "PipelineParams":
        """Return a copy with ``key=value`` string overrides coerced to field types."""
        types = {f.name: f.type for f in fields(self)}
        values = {}
        for key, raw in overrides.items():
            if key not in types:
                raise KeyError(f"unknown parameter {key!r}")
            current = getattr(self, key)
            values[key] = type(current)(float(raw)) if isinstance(current, int) else float(raw)
        return replace(self, **values)


def flip(orientation: Orientation) -> Orientation:
    return Orientation.REVERSE if orientation is Orientation.SAME else Orientation.SAME


def reframe_offset(offset: int, orientation: Orientation, len_a: int, len_b: int) -> int:
    """Position of ``a`` in ``b``'s frame, given ``b`` at ``offset`` in ``a``'s frame."""
    if orientation is Orientation.SAME:
        return -offset
    return offset + len_b - len_a


def canonicalize_overlap(
    frag_a: str,
    frag_b: str,
    offset: int,
    orientation: Orientation,
    lengths: Mapping[str, int],
    kind: OverlapKind = OverlapKind.DOVETAIL,
    identity: float = 1.0,
    overlap_length: Optional[int] = None,
    contained: Optional[str] = None,
) -> ValidOverlap:
    """Build a ValidOverlap with ``frag_a < frag_b``, re-expressing the offset if needed.

    ``offset`` places ``frag_b`` in ``frag_a``'s frame as given by the caller.
    """
    for frag in (frag_a, frag_b):
        if frag not in lengths:
            raise KeyError(f"unknown fragment {frag!r}")
    if frag_a == frag_b:
        raise ValueError("an overlap needs two distinct fragments")
    len_a, len_b = lengths[frag_a], lengths[frag_b]
    if overlap_length is None:
        overlap_length = max(0, min(len_a, offset + len_b) - max(0, offset))
    if frag_b < frag_a:
        offset = reframe_offset(offset, orientation, len_a, len_b)
        frag_a, frag_b = frag_b, frag_a
    return ValidOverlap(frag_a, frag_b, kind, offset, orientation, identity, overlap_length, contained)


def overlap_from(ov: ValidOverlap, frag: str, lengths: Mapping[str, int]) -> tuple[str, int, Orientation]:
    """View an overlap from ``frag``'s frame: (other fragment, its offset, orientation)."""
    if frag == ov.frag_a:
        return ov.frag_b, ov.offset, ov.relative_orientation
    if frag == ov.frag_b:
        return ov.frag_a, reframe_offset(ov.offset, ov.relative_orientation, lengths[ov.frag_a], lengths[ov.frag_b]), ov.relative_orientation
    raise KeyError(frag)


@dataclass
class AssemblyInput:
    """Everything the assembler consumes, keyed by id."""

    clones: dict[str, Clone]
    fragments: dict[str, Fragment]
    overlaps: list[ValidOverlap] = field(default_factory=list)
    orientation_pairs: list[OrientationPair] = field(default_factory=list)

    @property
    def lengths(self) -> dict[str, int]:
        return {f.id: f.length for f in self.fragments.values()}
