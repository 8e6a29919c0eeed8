import io
from pathlib import Path

import pytest

from barnacle.layout import (
    ChromosomeStatus,
    Consistency,
    FragmentKind,
    LayoutBuilder,
    OverlapIndex,
    RejectedSubfragment,
    _agrees,
    assemble_maximal,
    attach_witnesses,
    check_consistency,
    chromosome_call,
    classify_fragments,
    find_inconsistencies,
    place_subfragments,
    read_subcontigs,
    split_subcontig,
    write_subcontigs,
)
from barnacle.model import Clone, Orientation, OverlapKind, PipelineParams, Strand, canonicalize_overlap
from geometry import all_overlaps, make_input, overlap_between

PARAMS = PipelineParams()
DATA = Path(__file__).parent / "data"


def build(inp, params=PARAMS):
    lengths = inp.lengths
    clone_of = {f.id: f.clone_id for f in inp.fragments.values()}
    index = OverlapIndex(inp.overlaps, lengths, clone_of)
    classes = classify_fragments(inp.fragments, inp.overlaps, lengths)
    report = find_inconsistencies(index, params)
    builder = LayoutBuilder(lengths, index, params, clone_of)
    subs, deferred = assemble_maximal(inp.fragments, inp.overlaps, params, classes, report, builder)
    return builder, classes, report, subs, deferred


def soundness_violations(subcontigs, index, params=PARAMS):
    """Placed pairs overlapping by more than T_ov without an agreeing recorded overlap."""
    bad = []
    L = index.lengths
    for sc in subcontigs:
        pl = sc.placements
        for i, p in enumerate(pl):
            for q in pl[i + 1:]:
                inter = min(p.start + L[p.frag_id], q.start + L[q.frag_id]) - q.start
                if inter <= params.implied_overlap_threshold:
                    continue
                if not _agrees(index, p.frag_id, (p.start, p.orientation.sign), q.frag_id,
                               (q.start, q.orientation.sign), params.offset_tolerance):
                    bad.append((sc.id, p.frag_id, q.frag_id))
    return bad


# classification ---------------------------------------------------------------


def test_classify_fragments():
    frags = {
        "a": ("A", 0, 10000, 1),
        "b": ("B", 2000, 3000, 1),  # inside a
        "c": ("C", 8000, 10000, 1),  # dovetails a
        "d": ("D", 90000, 5000, 1),  # alone
    }
    inp = make_input(frags)
    cls = classify_fragments(inp.fragments, inp.overlaps, inp.lengths)
    assert cls["a"].kind is FragmentKind.MAXIMAL
    assert cls["b"].kind is FragmentKind.SUBFRAGMENT and cls["b"].container == "a"
    assert cls["c"].kind is FragmentKind.MAXIMAL
    assert cls["d"].kind is FragmentKind.SINGLETON


def test_chain_all_maximal():
    frags = {k: (k.upper(), i * 6000, 10000, 1) for i, k in enumerate("abc")}
    inp = make_input(frags)
    cls = classify_fragments(inp.fragments, inp.overlaps, inp.lengths)
    assert {c.kind for c in cls.values()} == {FragmentKind.MAXIMAL}


# consistency --------------------------------------------------------------------


def three(b_at, c_at, with_ac=True):
    frags = {"a": ("A", 0, 100_000, 1), "b": ("B", b_at, 100_000, 1), "c": ("C", c_at, 100_000, 1)}
    ovs = [overlap_between("a", "b", frags), overlap_between("b", "c", frags)]
    if with_ac:
        ovs.append(overlap_between("a", "c", frags))
    inp = make_input(frags, ovs)
    return ovs, OverlapIndex(ovs, inp.lengths)


def test_consistency_independent():
    ovs, index = three(50_000, 120_000, with_ac=False)
    assert check_consistency(ovs[0], ovs[1], index, PARAMS) is Consistency.INDEPENDENT


def test_consistency_consistent_and_inconsistent():
    ovs, index = three(40_000, 70_000)
    assert check_consistency(ovs[0], ovs[1], index, PARAMS) is Consistency.CONSISTENT
    ovs, index = three(40_000, 70_000, with_ac=False)
    assert check_consistency(ovs[0], ovs[1], index, PARAMS) is Consistency.INCONSISTENT


def test_consistency_offset_tolerance():
    frags = {"a": ("A", 0, 100_000, 1), "b": ("B", 40_000, 100_000, 1), "c": ("C", 70_000, 100_000, 1)}
    ab, bc = overlap_between("a", "b", frags), overlap_between("b", "c", frags)
    lengths = {k: v[2] for k, v in frags.items()}
    for shift, want in ((PARAMS.offset_tolerance, Consistency.CONSISTENT), (PARAMS.offset_tolerance + 1, Consistency.INCONSISTENT)):
        ac = canonicalize_overlap("a", "c", 70_000 + shift, Orientation.SAME, lengths)
        assert check_consistency(ab, bc, OverlapIndex([ab, bc, ac], lengths), PARAMS) is want


def test_consistency_requires_shared_fragment():
    frags = {k: (k.upper(), i * 5000, 10000, 1) for i, k in enumerate("abcd")}
    ab, cd = overlap_between("a", "b", frags), overlap_between("c", "d", frags)
    with pytest.raises(ValueError):
        check_consistency(ab, cd, OverlapIndex([ab, cd], {k: 10000 for k in frags}), PARAMS)


# assembly -------------------------------------------------------------------------


def test_five_fragment_tiling_places_exactly():
    frags = {f"f{i}": (f"C{i}", 1000 + i * 7000, 10000, 1) for i in range(5)}
    inp = make_input(frags)
    _, _, _, subs, deferred = build(inp)
    assert not deferred
    (sc,) = subs
    assert [(p.frag_id, p.start) for p in sc.placements] == [(f"f{i}", i * 7000) for i in range(5)]
    assert sc.length == 4 * 7000 + 10000
    assert sc.member_clones == frozenset(f"C{i}" for i in range(5))


def test_tiling_with_reverse_fragments():
    frags = {"f0": ("C0", 0, 10000, 1), "f1": ("C1", 7000, 10000, -1), "f2": ("C2", 14000, 10000, 1)}
    inp = make_input(frags)
    _, _, _, subs, _ = build(inp)
    (sc,) = subs
    got = {p.frag_id: (p.start, p.orientation) for p in sc.placements}
    assert got == {"f0": (0, Strand.FORWARD), "f1": (7000, Strand.REVERSE), "f2": (14000, Strand.FORWARD)}


def test_fork_is_deferred_and_layout_stays_sound():
    # b's prefix matches the suffix of a and of c, but a and c share nothing
    frags = {"a": ("A", 0, 10000, 1), "b": ("B", 8000, 10000, 1), "c": ("C", 500_000, 10000, 1)}
    lengths = {k: v[2] for k, v in frags.items()}
    ab = overlap_between("a", "b", frags)
    bc = canonicalize_overlap("b", "c", -8000, Orientation.SAME, lengths, overlap_length=2000)
    inp = make_input(frags, [ab, bc])
    builder, _, report, subs, deferred = build(inp)
    assert deferred == {ab.key, bc.key}
    assert not soundness_violations(subs, builder.index)
    assert all(len(sc.placements) == 1 for sc in subs)


def test_empty_overlaps_give_singletons():
    frags = {k: (k.upper(), i * 50_000, 10000, 1) for i, k in enumerate("abc")}
    inp = make_input(frags, [])
    _, classes, _, subs, _ = build(inp)
    assert all(c.kind is FragmentKind.SINGLETON for c in classes.values())
    assert sorted(sc.fragment_ids[0] for sc in subs) == ["a", "b", "c"]


def test_corroborated_missing_overlap_defers_nothing():
    # x and y truly overlap but their overlap is missing; two other clones see both
    frags = {
        "x": ("X", 0, 40000, 1),
        "y": ("Y", 20000, 40000, 1),
        "p": ("P", 10000, 40000, 1),
        "q": ("Q", 15000, 40000, 1),
    }
    ovs = all_overlaps(frags, skip=[("x", "y")])
    inp = make_input(frags, ovs)
    builder, _, report, subs, deferred = build(inp)
    assert ("x", "y") in report.suspected_fn
    assert not deferred
    (sc,) = subs
    assert ("x", "y") not in sc.witnesses


def test_single_middle_missing_overlap_defers():
    frags = {"x": ("X", 0, 40000, 1), "y": ("Y", 20000, 40000, 1), "p": ("P", 10000, 40000, 1)}
    ovs = all_overlaps(frags, skip=[("x", "y")])
    _, _, report, _, deferred = build(make_input(frags, ovs))
    assert not report.suspected_fn
    assert deferred == {("p", "x"), ("p", "y")}


# subfragments ------------------------------------------------------------------------


def sub_setup(extra=None, drop_container=False):
    frags = {"a": ("A", 0, 20000, 1), "c": ("C", 15000, 20000, 1), "s": ("S", 4000, 3000, 1)}
    ovs = [overlap_between("a", "c", frags), overlap_between("a", "s", frags)]
    if extra:
        ovs += extra(frags)
    inp = make_input(frags, ovs)
    builder, classes, report, subs, deferred = build(inp)
    if drop_container:
        builder.remove_fragments(["a"])
    rejected = place_subfragments(builder, classes, deferred)
    return builder, rejected


def test_subfragment_placed_at_containment_offset():
    builder, rejected = sub_setup()
    assert not rejected
    lay = builder.layout_of["s"]
    assert lay.members["s"][0] - lay.members["a"][0] == 4000


def test_subfragment_conflicting_evidence():
    frags = {"a": ("A", 0, 20000, 1), "c": ("C", 15000, 20000, 1), "s": ("S", 14000, 3000, 1)}
    lengths = {k: v[2] for k, v in frags.items()}
    # s is inside a, but a recorded c-s overlap puts it 2000 bp further right
    bad = canonicalize_overlap("c", "s", 1000, Orientation.SAME, lengths, kind=OverlapKind.CONTAINMENT,
                               overlap_length=3000, contained="s")
    ovs = [overlap_between("a", "c", frags), overlap_between("a", "s", frags), bad]
    index = OverlapIndex(ovs, lengths)
    builder = LayoutBuilder(lengths, index, PARAMS, {f: v[0] for f, v in frags.items()})
    for f in ("a", "c"):
        builder.add_single(f)
    assert builder.try_merge(ovs[0]) == "merged"
    assert builder.place_subfragment("s", "a", ovs[1]) is RejectedSubfragment.CONFLICTING_EVIDENCE
    assert not builder.placed("s")


def test_inconsistent_subfragment_evidence_is_deferred():
    frags = {"a": ("A", 0, 20000, 1), "c": ("C", 15000, 20000, 1), "s": ("S", 14000, 3000, 1)}
    lengths = {k: v[2] for k, v in frags.items()}
    bad = canonicalize_overlap("c", "s", 1000, Orientation.SAME, lengths, kind=OverlapKind.CONTAINMENT,
                               overlap_length=3000, contained="s")
    inp = make_input(frags, [overlap_between("a", "c", frags), overlap_between("a", "s", frags), bad])
    builder, classes, report, subs, deferred = build(inp)
    assert {("a", "s"), ("c", "s")} <= deferred
    assert place_subfragments(builder, classes, deferred) == {"s": RejectedSubfragment.ORPHAN_CONTAINER}


def test_subfragment_orphan_container():
    _, rejected = sub_setup(drop_container=True)
    assert rejected == {"s": RejectedSubfragment.ORPHAN_CONTAINER}


# chromosomes ----------------------------------------------------------------------------


def clones_with(labels):
    return {f"c{i}": Clone(f"c{i}", 100_000, 3, lab, (f"f{i}",)) for i, lab in enumerate(labels)}


def test_chromosome_majority_ignores_unknown():
    cl = clones_with(["17", "17", "U"])
    call = chromosome_call(cl, cl)
    assert call.status is ChromosomeStatus.ASSIGNED and call.label == "17" and not call.dissent


def test_chromosome_tie_conflicts():
    cl = clones_with(["17", "17", "3", "3"])
    call = chromosome_call(cl, cl)
    assert call.status is ChromosomeStatus.CONFLICTED and call.label is None


def test_chromosome_single_dissent_noted():
    cl = clones_with(["17", "17", "17", "3"])
    call = chromosome_call(cl, cl)
    assert call.status is ChromosomeStatus.ASSIGNED and call.label == "17" and call.dissent == ("c3",)


def test_chromosome_all_unknown():
    cl = clones_with(["U", "U"])
    assert chromosome_call(cl, cl).status is ChromosomeStatus.UNKNOWN


# invariants on simulated data ------------------------------------------------------------


def test_simulated_layouts_are_sound(small_clean_run):
    sim, inp, res = small_clean_run
    index = OverlapIndex(inp.overlaps, inp.lengths)
    assert not soundness_violations(res.subcontigs, index)
    for sc in res.subcontigs:
        starts = [p.start for p in sc.placements]
        assert starts == sorted(starts) and starts[0] == 0
        assert sc.length == max(p.start + inp.lengths[p.frag_id] for p in sc.placements)


def test_simulated_fp_layouts_are_sound():
    from conftest import run_sim

    _, inp, res = run_sim(genome_length=2_000_000, fp_rate=0.05, seed=3)
    index = OverlapIndex(inp.overlaps, inp.lengths)
    assert not soundness_violations(res.subcontigs, index)


def test_subcontig_dump_golden():
    frags = {f"f{i}": (f"C{i}", i * 7000, 10000, 1 if i != 1 else -1) for i in range(3)}
    inp = make_input(frags)
    _, _, _, subs, _ = build(inp)
    out = io.StringIO()
    write_subcontigs(subs, out)
    assert out.getvalue() == (DATA / "subcontigs_golden.tsv").read_text()


def test_subcontig_dump_round_trip(small_clean_run):
    _, inp, res = small_clean_run
    out = io.StringIO()
    write_subcontigs(res.subcontigs, out)
    clone_of = {f.id: f.clone_id for f in inp.fragments.values()}
    back = read_subcontigs(io.StringIO(out.getvalue()), inp.lengths, clone_of)
    back = attach_witnesses(back, inp.overlaps, inp.lengths)
    assert back == list(res.subcontigs)


def test_split_subcontig_on_dropped_witness():
    frags = {f"f{i}": (f"C{i}", i * 7000, 10000, 1) for i in range(4)}
    inp = make_input(frags)
    _, _, _, (sc,), _ = build(inp)
    pieces = split_subcontig(sc, set(), {("f1", "f2")}, inp.lengths, {f: frags[f][0] for f in frags})
    assert [p.fragment_ids for p in pieces] == [["f0", "f1"], ["f2", "f3"]]
    assert [p.placements[0].start for p in pieces] == [0, 0]
