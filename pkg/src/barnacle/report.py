"""Assembly artifacts on disk: writers, readers, warp and summary reports."""

from __future__ import annotations

import bisect
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Optional

from .clone_graph import Verdict, read_clone_graph, write_clone_graph
from .interval import IntervalModel
from .layout import read_subcontigs, write_subcontigs
from .model import AssemblyInput, Clone, PipelineParams, Strand
from .resolve import ResolutionAction
from .scaffold import Contig, FnReport, FpReport, compute_warp, global_placements

WARP_EDGES = (1.5, 1.8, 2.0, 5.0, 10.0)
WARP_LABELS = ("<=1.5", "1.5 - 1.8", "1.8 - 2.0", "2.0 - 5.0", "5.0 - 10.0", ">10.0")
LENGTH_EDGES = (250_000, 300_000, 500_000, 800_000, 1_000_000, 2_000_000, 3_000_000, 10_000_000, 20_000_000)
LENGTH_LABELS = ("250K - 300K", "300K - 500K", "500K - 800K", "800K - 1M", "1M - 2M", "2M - 3M", "3M - 10M", "10M - 20M")

ARTIFACTS = {
    "subcontigs": "subcontigs.tsv",
    "clone_graph": "clone_graph.tsv",
    "interval_model": "interval_model.tsv",
    "actions": "actions.log",
    "layout": "layout.txt",
    "verdicts": "overlap_verdicts.tsv",
    "fn_report": "fn_report.tsv",
    "fp_report": "fp_report.tsv",
    "summary": "summary.tsv",
    "stats": "stats.tsv",
}


class ArtifactError(ValueError):
    """An artifact file is missing or malformed."""


def warp_bucket(warp: float) -> str:
    """Bucket label; each upper edge belongs to the lower bucket."""
    return WARP_LABELS[bisect.bisect_left(WARP_EDGES, warp)]


def length_bucket(length: int) -> Optional[str]:
    """Assembled-length bucket for spans above 250 kb; None outside the table."""
    if length <= LENGTH_EDGES[0] or length > LENGTH_EDGES[-1]:
        return None
    return LENGTH_LABELS[bisect.bisect_left(LENGTH_EDGES, length) - 1]


# --------------------------------------------------------------------------
# simple dumps


def write_interval_model(model: IntervalModel, out: IO[str]) -> None:
    out.write("clone_id\tleft\tright\trank\tcomponent_id\n")
    rank = model.rank()
    for v in sorted(model.intervals, key=lambda v: (model.component.get(v, 0), rank[v], v)):
        left, right = model.intervals[v]
        out.write(f"{v}\t{left}\t{right}\t{rank[v]}\t{model.component.get(v, 0)}\n")


def read_interval_model(stream: Iterable[str]) -> IntervalModel:
    model = IntervalModel()
    for line in stream:
        tok = line.split()
        if not tok or tok[0] == "clone_id":
            continue
        model.intervals[tok[0]] = (int(tok[1]), int(tok[2]))
        model.component[tok[0]] = int(tok[4])
    return model


def write_actions(actions: Iterable[ResolutionAction], out: IO[str]) -> None:
    for a in actions:
        out.write(a.format() + "\n")


def read_actions(stream: Iterable[str]) -> list[ResolutionAction]:
    return [ResolutionAction.parse(line) for line in stream if line.strip() and not line.startswith("#")]


def write_verdicts(verdicts: Mapping, out: IO[str]) -> None:
    out.write("frag_a\tfrag_b\tverdict\n")
    for (a, b), v in sorted(verdicts.items()):
        out.write(f"{a}\t{b}\t{v.value}\n")


def read_verdicts(stream: Iterable[str]) -> dict:
    out = {}
    for line in stream:
        tok = line.split()
        if not tok or tok[0] == "frag_a":
            continue
        out[(tok[0], tok[1])] = Verdict(tok[2])
    return out


def write_fn_reports(reports: Iterable[FnReport], out: IO[str]) -> None:
    out.write("contig\tleft_subcontig\tright_subcontig\tleft_clone\tright_clone\toutcome\tcause\tfragments\n")
    for r in reports:
        v = r.violation
        frags = ",".join(r.fragments) or "-"
        out.write(f"{r.contig}\t{v.left_subcontig}\t{v.right_subcontig}\t{v.left_clone}\t{v.right_clone}\t"
                  f"{r.outcome.value}\t{r.cause.value}\t{frags}\n")


def read_fn_reports(stream: Iterable[str]) -> list[dict]:
    rows = []
    for line in stream:
        tok = line.rstrip("\n").split("\t")
        if not tok[0] or tok[0] == "contig":
            continue
        rows.append({
            "contig": tok[0], "left_subcontig": tok[1], "right_subcontig": tok[2],
            "left_clone": tok[3], "right_clone": tok[4], "outcome": tok[5], "cause": tok[6],
            "fragments": () if tok[7] == "-" else tuple(tok[7].split(",")),
        })
    return rows


def write_fp_reports(reports: Iterable[FpReport], out: IO[str]) -> None:
    out.write("clone\tcontig\twarp\tassembled_length\treasons\tstretching\n")
    for r in reports:
        stretch = ",".join(f"{a}|{b}" for a, b in r.stretching)
        out.write(f"{r.clone}\t{r.contig}\t{r.warp:.6f}\t{r.assembled_length}\t"
                  f"{','.join(r.reasons) or '-'}\t{stretch or '-'}\n")


def write_key_values(rows: Mapping, out: IO[str]) -> None:
    for k in rows:
        out.write(f"{k}\t{rows[k]}\n")


# --------------------------------------------------------------------------
# layouts


@dataclass
class LayoutContig:
    """A contig as read back from a layout file."""

    id: str
    component: str
    chromosome: str
    length: int
    subcontigs: list = field(default_factory=list)  # (subcontig id, orientation, start)
    rows: list = field(default_factory=list)  # (frag, clone, global start, strand, subcontig)


def write_layout(contigs: Iterable[Contig], lengths: Mapping[str, int], clone_of: Mapping[str, str], out: IO[str]) -> None:
    """Per contig: a header, its subcontigs in order, then fragments by position.

    Fragment rows carry the owning subcontig as a fifth column.
    """
    for ctg in contigs:
        out.write(f"contig\t{ctg.id}\t{ctg.component}\t{ctg.chromosome}\t{ctg.length}\n")
        sub_of = {}
        for e in ctg.entries:
            out.write(f"{e.id}\t{e.strand.value}\t{e.start}\n")
            for p in e.subcontig.placements:
                sub_of[p.frag_id] = e.id
        for f, start, strand in sorted(global_placements(ctg, lengths), key=lambda r: (r[1], r[0])):
            out.write(f"{f}\t{clone_of[f]}\t{start}\t{strand.value}\t{sub_of[f]}\n")


def read_layout(stream: Iterable[str]) -> list[LayoutContig]:
    contigs: list[LayoutContig] = []
    for n, line in enumerate(stream, 1):
        tok = line.split()
        if not tok or tok[0].startswith("#"):
            continue
        try:
            if tok[0] == "contig":
                contigs.append(LayoutContig(tok[1], tok[2], tok[3], int(tok[4])))
            elif not contigs:
                raise ArtifactError(f"line {n}: row before any contig header")
            elif len(tok) == 3:
                contigs[-1].subcontigs.append((tok[0], Strand(tok[1]), int(tok[2])))
            elif len(tok) in (4, 5):
                sub = tok[4] if len(tok) == 5 else ""
                contigs[-1].rows.append((tok[0], tok[1], int(tok[2]), Strand(tok[3]), sub))
            else:
                raise ArtifactError(f"line {n}: unexpected {len(tok)} fields")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, ArtifactError):
                raise
            raise ArtifactError(f"line {n}: {exc}") from exc
    return contigs


# --------------------------------------------------------------------------
# warp and summary reports


@dataclass
class WarpReport:
    warps: dict  # clone -> warp
    spans: dict  # clone -> assembled span
    warp_counts: Counter = field(default_factory=Counter)
    length_counts: Counter = field(default_factory=Counter)
    long_clones: list = field(default_factory=list)  # (clone, span, warp), longest first
    flagged: list = field(default_factory=list)  # clones above the warp flag threshold

    @property
    def length_total(self) -> int:
        return sum(self.length_counts.values())


def clone_spans_from_layout(contigs: Iterable[LayoutContig], lengths: Optional[Mapping[str, int]] = None) -> dict:
    """Assembled span per clone: (min start, max end) over its placed fragments.

    Without fragment lengths the end of a fragment is unknown, so ``lengths``
    is required for exact spans.
    """
    spans: dict = defaultdict(list)
    for ctg in contigs:
        for f, c, s, _, _ in ctg.rows:
            spans[c].append((s, s + (lengths[f] if lengths else 0)))
    return spans


def warp_report(
    spans: Mapping[str, list],
    estimated: Mapping[str, int],
    params: Optional[PipelineParams] = None,
) -> WarpReport:
    """Bucket every clone by warp; clones above the warp flag also by assembled length."""
    params = params or PipelineParams()
    rep = WarpReport({}, {})
    for c in sorted(spans):
        if c not in estimated:
            continue
        sp = spans[c]
        w = compute_warp(estimated[c], sp)
        span = max(e for _, e in sp) - min(s for s, _ in sp)
        rep.warps[c], rep.spans[c] = w, span
        rep.warp_counts[warp_bucket(w)] += 1
        if w > params.warp_flag_threshold:
            rep.flagged.append(c)
            lb = length_bucket(span)
            if lb is not None:
                rep.length_counts[lb] += 1
        if span > params.long_bac_length_flag:
            rep.long_clones.append((c, span, w))
    rep.long_clones.sort(key=lambda r: (-r[1], r[0]))
    return rep


def write_warp_tsv(reports: Mapping[str, WarpReport], out: IO[str]) -> None:
    """Side-by-side bucket tables, one column per named assembly."""
    names = list(reports)
    out.write("Warp\t" + "\t".join(names) + "\n")
    for label in WARP_LABELS:
        out.write(label + "\t" + "\t".join(str(reports[n].warp_counts.get(label, 0)) for n in names) + "\n")
    out.write("\n")
    out.write("Assembled BAC Length\t" + "\t".join(names) + "\n")
    for label in LENGTH_LABELS:
        out.write(label + "\t" + "\t".join(str(reports[n].length_counts.get(label, 0)) for n in names) + "\n")
    out.write("Total\t" + "\t".join(str(reports[n].length_total) for n in names) + "\n")


def write_warp_text(rep: WarpReport, out: IO[str], params: Optional[PipelineParams] = None) -> None:
    params = params or PipelineParams()
    width = max(len(x) for x in WARP_LABELS + LENGTH_LABELS + ("Assembled BAC Length",))
    out.write(f"{'Warp':<{width}}  clones\n")
    for label in WARP_LABELS:
        out.write(f"{label:<{width}}  {rep.warp_counts.get(label, 0)}\n")
    out.write(f"\nwarp > {params.warp_flag_threshold:g}\n")
    out.write(f"{'Assembled BAC Length':<{width}}  clones\n")
    for label in LENGTH_LABELS:
        out.write(f"{label:<{width}}  {rep.length_counts.get(label, 0)}\n")
    out.write(f"{'Total':<{width}}  {rep.length_total}\n")
    out.write(f"\nclones assembled longer than {params.long_bac_length_flag} bp: {len(rep.long_clones)}\n")
    for c, span, w in rep.long_clones:
        out.write(f"  {c}\t{span}\t{w:.3f}\n")


SUMMARY_COLUMNS = ("", "BACs", "Fragments Used/Fragments", "Contigs", "Length in Gbp", "Length in bp")


def summary_rows(contigs: Iterable[LayoutContig], clones: Mapping[str, Clone]) -> list[tuple]:
    """Singleton and multi-clone contigs, then the total.

    Clones with nothing placed count their fragments in the non-singleton
    row so the total covers the whole input.
    """
    contigs = list(contigs)
    used = Counter()
    clone_class = {}
    stats = {"singletons": [0, 0, 0, 0, 0], "non-singletons": [0, 0, 0, 0, 0]}
    for ctg in contigs:
        members = {c for _, c, *_ in ctg.rows}
        key = "singletons" if len(members) == 1 else "non-singletons"
        for f, c, *_ in ctg.rows:
            used[c] += 1
        for c in members:
            clone_class[c] = key
        stats[key][3] += 1
        stats[key][4] += ctg.length
    for c, cl in clones.items():
        key = clone_class.get(c, "non-singletons")
        if c in clone_class:
            stats[key][0] += 1
        stats[key][1] += used.get(c, 0)
        stats[key][2] += len(cl.fragments)
    rows = []
    total = [0, 0, 0, 0, 0]
    for key in ("singletons", "non-singletons"):
        s = stats[key]
        total = [a + b for a, b in zip(total, s)]
        rows.append((key, s[0], f"{s[1]}/{s[2]}", s[3], f"{s[4] / 1e9:.3f}", s[4]))
    rows.append(("total", total[0], f"{total[1]}/{total[2]}", total[3], f"{total[4] / 1e9:.3f}", total[4]))
    return rows


def write_summary(rows: list[tuple], out: IO[str]) -> None:
    out.write("\t".join(SUMMARY_COLUMNS) + "\n")
    for r in rows:
        out.write("\t".join(str(x) for x in r) + "\n")


# --------------------------------------------------------------------------
# whole-run artifacts


def write_artifacts(result, inp: AssemblyInput, out_dir: str, params: Optional[PipelineParams] = None) -> dict[str, str]:
    """Write every artifact of a pipeline run; returns name -> path."""
    params = params or PipelineParams()
    os.makedirs(out_dir, exist_ok=True)
    lengths = inp.lengths
    clone_of = {f.id: f.clone_id for f in inp.fragments.values()}
    paths = {k: os.path.join(out_dir, v) for k, v in ARTIFACTS.items()}

    def open_w(key):
        return open(paths[key], "w", encoding="utf-8", newline="\n")

    with open_w("subcontigs") as fh:
        write_subcontigs(result.subcontigs, fh)
    with open_w("clone_graph") as fh:
        write_clone_graph(result.clone_graph, fh)
    with open_w("interval_model") as fh:
        write_interval_model(result.model, fh)
    with open_w("actions") as fh:
        write_actions(result.actions, fh)
    with open_w("layout") as fh:
        write_layout(result.contigs, lengths, clone_of, fh)
    with open_w("verdicts") as fh:
        write_verdicts(result.verdicts, fh)
    with open_w("fn_report") as fh:
        write_fn_reports(result.fn_reports, fh)
    with open_w("fp_report") as fh:
        write_fp_reports(result.fp_reports, fh)
    layout = [LayoutContig(c.id, str(c.component), c.chromosome, c.length, rows=[
        (f, clone_of[f], s, st, "") for f, s, st in global_placements(c, lengths)]) for c in result.contigs]
    with open_w("summary") as fh:
        write_summary(summary_rows(layout, inp.clones), fh)
    with open_w("stats") as fh:
        write_key_values(result.stats, fh)
    if result.consensus:
        paths["consensus"] = os.path.join(out_dir, "consensus.fa")
        with open(paths["consensus"], "w", encoding="utf-8", newline="\n") as fh:
            for cid in sorted(result.consensus):
                seq = result.consensus[cid]
                fh.write(f">{cid}\n")
                for i in range(0, len(seq), 80):
                    fh.write(seq[i:i + 80] + "\n")
    return paths


@dataclass
class AssemblyArtifacts:
    """Artifacts of a finished run, as read back from disk."""

    contigs: list
    subcontigs: list
    actions: list
    clone_graph: dict
    verdicts: dict
    fn_reports: list
    fragment_lengths: dict

    @property
    def layout(self) -> dict:
        return {c.id: c.rows for c in self.contigs}

    @property
    def accepted(self) -> set:
        return {w for sc in self.subcontigs for w in sc.witnesses}


def _read(path: str):
    if not os.path.exists(path):
        raise ArtifactError(f"missing artifact: {path}")
    with open(path, encoding="utf-8") as fh:
        return fh.readlines()


def load_artifacts(out_dir: str, inp: AssemblyInput, params: Optional[PipelineParams] = None) -> AssemblyArtifacts:
    """Read a run directory back; witnesses are recomputed from the input overlaps."""
    from .layout import attach_witnesses

    params = params or PipelineParams()
    lengths = inp.lengths
    clone_of = {f.id: f.clone_id for f in inp.fragments.values()}
    p = {k: os.path.join(out_dir, v) for k, v in ARTIFACTS.items()}
    contigs = read_layout(_read(p["layout"]))
    subs = read_subcontigs(_read(p["subcontigs"]), lengths, clone_of)
    placed = {f for c in contigs for f, *_ in c.rows}
    subs = [s for s in subs if set(s.fragment_ids) <= placed]
    subs = attach_witnesses(subs, inp.overlaps, lengths, params)
    return AssemblyArtifacts(
        contigs=contigs,
        subcontigs=subs,
        actions=read_actions(_read(p["actions"])),
        clone_graph=read_clone_graph(_read(p["clone_graph"])),
        verdicts=read_verdicts(_read(p["verdicts"])),
        fn_reports=read_fn_reports(_read(p["fn_report"])),
        fragment_lengths=lengths,
    )
