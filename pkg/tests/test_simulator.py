import filecmp
import io
from collections import defaultdict

import pytest

from barnacle.ingest import bundle_paths, load_bundle
from barnacle.interval import is_interval
from barnacle.simulator import FnMode, GroundTruth, OverlapLabel, SimParams, score_assembly, simulate
from conftest import RunView


def true_overlap(a, b):
    if a.chrom != b.chrom:
        return 0
    return min(a.end, b.end) - max(a.start, b.start)


@pytest.fixture(scope="module")
def noisy():
    return simulate(SimParams(genome_length=2_000_000, fp_rate=0.05, chimera_rate=0.02, fn_rate=0.03, seed=4))


def test_same_seed_same_bundle(tmp_path):
    p = SimParams(genome_length=1_000_000, fp_rate=0.02, seed=9)
    a = simulate(p).write_bundle(str(tmp_path / "a"))
    b = simulate(p).write_bundle(str(tmp_path / "b"))
    for key in a:
        assert filecmp.cmp(a[key], b[key], shallow=False), key


def test_different_seed_differs():
    a = simulate(SimParams(genome_length=1_000_000, seed=1))
    b = simulate(SimParams(genome_length=1_000_000, seed=2))
    assert a.truth.clones != b.truth.clones


def test_bundle_loads_like_in_memory(tmp_path):
    sim = simulate(SimParams(genome_length=1_000_000, seed=5))
    sim.write_bundle(str(tmp_path))
    disk = load_bundle(bundle_paths(str(tmp_path)))
    mem = sim.to_input()
    assert disk.clones == mem.clones and disk.fragments == mem.fragments
    assert disk.overlaps == mem.overlaps


def test_truth_round_trip(noisy):
    out = io.StringIO()
    noisy.truth.write(out)
    back = GroundTruth.read(io.StringIO(out.getvalue()))
    assert back == noisy.truth
    with pytest.raises(ValueError):
        GroundTruth.read(io.StringIO("v0\n"))


def test_true_labels_match_geometry(noisy):
    tf = noisy.truth.fragments
    for (a, b), lab in noisy.truth.labels.items():
        inter = true_overlap(tf[a], tf[b])
        if lab is OverlapLabel.TRUE:
            assert inter > 0
        else:
            assert inter <= 0 or tf[a].clone in noisy.truth.chimeras or tf[b].clone in noisy.truth.chimeras


def test_clean_truth_clone_graph_is_interval():
    sim = simulate(SimParams(genome_length=3_000_000, seed=6))
    tf = sim.truth.fragments
    adj = defaultdict(set)
    for c in sim.truth.clones:
        adj[c]
    for (a, b), lab in sim.truth.labels.items():
        x, y = tf[a].clone, tf[b].clone
        if lab is OverlapLabel.TRUE and x != y:
            adj[x].add(y)
            adj[y].add(x)
    assert is_interval(dict(adj))


def test_noise_is_recorded(noisy):
    labels = set(noisy.truth.labels.values())
    assert OverlapLabel.REPEAT_INCONSISTENT in labels
    assert noisy.truth.chimeras and noisy.truth.dropped
    for c, (p1, p2) in noisy.truth.chimeras.items():
        assert p1 != p2


def test_critical_drops_are_sole_links():
    sim = simulate(SimParams(genome_length=3_000_000, fn_rate=0.03, fn_mode=FnMode.CRITICAL, seed=2))
    tf = sim.truth.fragments
    links = defaultdict(int)
    for (a, b), lab in sim.truth.labels.items():
        if lab is OverlapLabel.TRUE:
            links[frozenset((tf[a].clone, tf[b].clone))] += 1
    assert sim.truth.dropped
    for a, b in sim.truth.dropped:
        assert links[frozenset((tf[a].clone, tf[b].clone))] == 0


@pytest.mark.parametrize("kw", [
    {"fp_rate": 1.0}, {"fn_rate": -0.1}, {"phase_mix": (0.5, 0.5, 0.5)},
    {"genome_length": 100_000}, {"target_coverage": 0},
])
def test_param_validation(kw):
    with pytest.raises(ValueError):
        SimParams(**kw)


def test_params_from_strings():
    p = SimParams.from_mapping({"clone_length": "120000,10000", "fn_mode": "critical", "with_sequences": "yes", "seed": "3"})
    assert p.clone_length == (120000, 10000) and p.fn_mode is FnMode.CRITICAL and p.with_sequences and p.seed == 3
    with pytest.raises(KeyError):
        SimParams.from_mapping({"bogus": "1"})


def test_sequences_consistent_with_geometry():
    sim = simulate(SimParams(genome_length=600_000, clone_length=(100_000, 10_000), with_sequences=True, seed=1))
    assert sim.sequences
    for f, seq in list(sim.sequences.items())[:20]:
        assert len(seq) == sim.fragments[f].length


def test_score_clean_run(small_clean_run):
    sim, inp, res = small_clean_run
    sc = score_assembly(RunView(res, inp), sim.truth)
    assert sc.order_agreement == 1.0 and sc.max_placement_error == 0
    assert sc.false_removals == 0
