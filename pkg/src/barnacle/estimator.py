"""Estimator-style front end: ``BarnacleAssembler().fit(bundle).predict(clones)``."""

from __future__ import annotations

import os
from dataclasses import fields
from typing import Iterable, Optional, Union

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .ingest import bundle_paths, load_bundle
from .model import AssemblyInput, PipelineParams
from .pipeline import AssemblyResult, run_pipeline
from .scaffold import global_placements

_PARAM_NAMES = tuple(f.name for f in fields(PipelineParams))


def check_assembly_input(X, params: Optional[PipelineParams] = None) -> AssemblyInput:
    """Accept an AssemblyInput, a bundle directory, or a mapping of bundle paths."""
    if isinstance(X, AssemblyInput):
        inp = X
    elif isinstance(X, (str, os.PathLike)):
        if not os.path.isdir(X):
            raise FileNotFoundError(f"input bundle directory not found: {X}")
        inp = load_bundle(bundle_paths(os.fspath(X)), params)
    elif isinstance(X, dict):
        inp = load_bundle(X, params)
    else:
        raise TypeError(f"expected AssemblyInput, bundle directory or path mapping, got {type(X).__name__}")
    if not inp.clones or not inp.fragments:
        raise ValueError("input holds no clones or fragments")
    unknown = sorted({f for ov in inp.overlaps for f in ov.key if f not in inp.fragments})
    if unknown:
        raise ValueError(f"overlaps reference unknown fragments: {unknown[:5]}")
    return inp


def check_clone_ids(clones: Iterable[str], known) -> list[str]:
    clones = [clones] if isinstance(clones, str) else list(clones)
    missing = [c for c in clones if c not in known]
    if missing:
        raise KeyError(f"unknown clone ids: {missing[:5]}")
    return clones


class BarnacleAssembler(BaseEstimator):
    """Clone-based assembler with the pipeline thresholds as hyper-parameters.

    ``fit`` runs the whole pipeline; ``transform`` returns per-contig layouts;
    ``predict`` maps clones to (contig id, rank within contig).
    """

    def __init__(
        self,
        end_error_finished: int = 350,
        end_error_draft_fraction: float = 0.10,
        end_error_draft_cap: int = 1000,
        min_identity: float = 0.97,
        implied_overlap_threshold: int = 1000,
        offset_tolerance: int = 300,
        warp_flag_threshold: float = 1.5,
        long_bac_length_flag: int = 250_000,
        min_clone_length: int = 10_000,
        gap_width: int = 100,
        review_rounds: int = 1,
        random_seed: int = 0,
    ):
        self.end_error_finished = end_error_finished
        self.end_error_draft_fraction = end_error_draft_fraction
        self.end_error_draft_cap = end_error_draft_cap
        self.min_identity = min_identity
        self.implied_overlap_threshold = implied_overlap_threshold
        self.offset_tolerance = offset_tolerance
        self.warp_flag_threshold = warp_flag_threshold
        self.long_bac_length_flag = long_bac_length_flag
        self.min_clone_length = min_clone_length
        self.gap_width = gap_width
        self.review_rounds = review_rounds
        self.random_seed = random_seed

    def pipeline_params(self) -> PipelineParams:
        return PipelineParams(**{k: getattr(self, k) for k in _PARAM_NAMES})

    def fit(self, X: Union[AssemblyInput, str, dict], y=None) -> "BarnacleAssembler":
        params = self.pipeline_params()
        inp = check_assembly_input(X, params)
        res = run_pipeline(inp, params)
        self.input_ = inp
        self.result_ = res
        self.contigs_ = res.contigs
        self.actions_ = res.actions
        self.stats_ = dict(res.stats)
        self.n_clones_in_ = len(inp.clones)
        self.n_fragments_in_ = len(inp.fragments)
        lengths = inp.lengths
        self.clone_positions_ = {}
        for ctg in res.contigs:
            mids: dict = {}
            for f, s, _ in global_placements(ctg, lengths):
                mids.setdefault(inp.fragments[f].clone_id, []).append(s + lengths[f] / 2)
            order = sorted(mids, key=lambda c: (sum(mids[c]) / len(mids[c]), c))
            for rank, c in enumerate(order):
                self.clone_positions_[c] = (ctg.id, rank)
        return self

    def transform(self, X=None) -> dict:
        """Layouts: contig id -> [(frag, clone, global start, strand), ...]."""
        check_is_fitted(self, "result_")
        inp = self.input_
        lengths = inp.lengths
        out = {}
        for ctg in self.contigs_:
            rows = sorted(global_placements(ctg, lengths), key=lambda r: (r[1], r[0]))
            out[ctg.id] = [(f, inp.fragments[f].clone_id, s, st) for f, s, st in rows]
        return out

    def fit_transform(self, X, y=None) -> dict:
        return self.fit(X, y).transform()

    def predict(self, clones: Iterable[str]) -> list[Optional[tuple[str, int]]]:
        """(contig, rank) per clone; None for clones left out of every contig."""
        check_is_fitted(self, "result_")
        clones = check_clone_ids(clones, self.input_.clones)
        return [self.clone_positions_.get(c) for c in clones]

    @property
    def result(self) -> AssemblyResult:
        try:
            return self.result_
        except AttributeError:
            raise NotFittedError("BarnacleAssembler is not fitted yet") from None
