"""End-to-end acceptance checks, one printed PASS/FAIL line per criterion.

Run under pytest (lines are repeated in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import filecmp
import itertools
import json
import os
import random
import subprocess
import sys
import tempfile
import time
from collections import defaultdict

import networkx as nx

from barnacle.cli import main as cli_main
from barnacle.interval import IntervalModel, brute_force_interval, recognize_interval, witness_is_valid
from barnacle.pipeline import run_pipeline
from barnacle.report import ARTIFACTS, LENGTH_LABELS, WARP_LABELS, warp_report
from barnacle.simulator import OverlapLabel, SimParams, score_assembly, simulate

sys.path.insert(0, os.path.dirname(__file__))
from conftest import RunView  # noqa: E402

SEEDS = range(1, 21)
RESULTS: list = []


def record(n, name, ok, detail):
    line = f"criterion {n} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print(line)
    return ok


def run(**kw):
    sim = simulate(SimParams(**kw))
    inp = sim.to_input()
    return sim, inp, run_pipeline(inp)


# 1 ------------------------------------------------------------------------------


def _agree(adj):
    want, _ = brute_force_interval(adj)
    got = recognize_interval(adj)
    if want != isinstance(got, IntervalModel):
        return False
    return got.realizes(adj) if want else witness_is_valid(adj, got)


def test_interval_recognition_matches_oracle():
    t0 = time.perf_counter()
    bad = 0
    # every unlabelled graph on up to 7 vertices (1,044 of them on exactly 7)
    atlas = nx.graph_atlas_g()[1:]
    for g in atlas:
        bad += not _agree({v: set(g[v]) for v in g})
    n7 = sum(1 for g in atlas if g.number_of_nodes() == 7)
    # every labelled connected graph on up to 6 vertices
    labelled = 0
    for k in range(1, 7):
        pairs = list(itertools.combinations(range(k), 2))
        for mask in range(1 << len(pairs)):
            g = nx.Graph()
            g.add_nodes_from(range(k))
            g.add_edges_from(p for i, p in enumerate(pairs) if mask >> i & 1)
            if nx.is_connected(g):
                labelled += 1
                bad += not _agree({v: set(g[v]) for v in g})
    rng = random.Random(2024)
    for _ in range(10_000):
        k = rng.randint(7, 9)
        p = rng.uniform(0.15, 0.8)
        adj = {v: set() for v in range(k)}
        for x, y in itertools.combinations(range(k), 2):
            if rng.random() < p:
                adj[x].add(y)
                adj[y].add(x)
        bad += not _agree(adj)
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 60 and n7 == 1044
    assert record(1, "interval oracle", ok,
                  f"{len(atlas)} atlas graphs ({n7} on 7 vertices), {labelled} labelled connected <=6, "
                  f"10000 random 7-9; disagreements={bad}; {elapsed:.1f}s")


# 2 ------------------------------------------------------------------------------


def test_zero_noise_round_trip():
    sim, inp, res = run(genome_length=10_000_000, target_coverage=4.0, phase_mix=(0.5, 0.1, 0.4),
                        unknown_chromosome_rate=0.0, seed=3)
    sc = score_assembly(RunView(res, inp), sim.truth)
    w = list(sc.warps.values())
    ok = sc.order_agreement == 1.0 and sc.max_placement_error == 0 and 0.98 <= min(w) and max(w) <= 1.02
    assert record(2, "zero-noise round trip", ok,
                  f"order={sc.order_agreement:.4f} max_error={sc.max_placement_error:g} "
                  f"warp=[{min(w):.4f}, {max(w):.4f}] contigs={sc.contigs}")


# 3 ------------------------------------------------------------------------------


def test_inconsistent_fp_rejection():
    total = accepted = 0
    worst = []
    for seed in SEEDS:
        sim, inp, res = run(genome_length=5_000_000, fp_rate=0.05, seed=seed)
        sc = score_assembly(RunView(res, inp), sim.truth)
        total += sc.fp_inconsistent_total
        accepted += sc.fp_inconsistent_accepted
        if sc.fp_inconsistent_accepted:
            worst.append(seed)
    recall = 1 - accepted / total if total else 1.0
    ok = accepted == 0 and recall >= 0.95 and total > 0
    assert record(3, "inconsistent FP rejection", ok,
                  f"{total} planted over 20 seeds, accepted={accepted}, recall={recall:.4f}, seeds with leaks={worst}")


# 4 ------------------------------------------------------------------------------


def test_chimera_detection():
    planted = found = false = 0
    worst_false_rate = 0.0
    unlogged = []
    for seed in SEEDS:
        sim, inp, res = run(genome_length=10_000_000, chimera_rate=0.01, seed=seed)
        sc = score_assembly(RunView(res, inp), sim.truth)
        chimeric = set(sim.truth.chimeras)
        planted += len(chimeric)
        found += sc.chimeras_detected
        false += sc.false_removals
        worst_false_rate = max(worst_false_rate, sc.false_removals / len(inp.clones))
        for a in res.actions:
            if a.kind.value == "RemoveVertex" and a.clones[0] in chimeric and a.reason is None:
                unlogged.append(a.clones[0])
    recall = found / planted if planted else 1.0
    ok = recall >= 0.90 and worst_false_rate <= 0.01 and not unlogged and planted > 0
    assert record(4, "chimera detection", ok,
                  f"planted={planted} detected={found} recall={recall:.4f} false_removals={false} "
                  f"worst per-seed false rate={worst_false_rate:.4f} unlogged={len(unlogged)}")


# 5 ------------------------------------------------------------------------------


def fn_metrics(sim, res):
    """Counts behind the planted-FN criterion.

    A dropped overlap 'creates a chordless cycle' when the clone pair has no
    other observed link and the local neighbourhood of the pair is chordal
    with the edge but not without it. A drop is 'adjacency-breaking' when its
    clone pair shows up as a violated junction before FN handling.
    """
    t, tf = sim.truth, sim.truth.fragments
    full = nx.Graph()
    full.add_nodes_from(t.clones)
    for (a, b), lab in t.labels.items():
        if lab is OverlapLabel.TRUE and tf[a].clone != tf[b].clone:
            full.add_edge(tf[a].clone, tf[b].clone)
    observed = full.copy()
    for a, b in t.dropped:
        full.add_edge(tf[a].clone, tf[b].clone)
    added = {tuple(sorted(a.clones)) for a in res.actions if a.kind.value == "AddFnEdge"}
    cyc = restored = 0
    for a, b in t.dropped:
        x, y = tf[a].clone, tf[b].clone
        if observed.has_edge(x, y):
            continue
        local = set(full[x]) | set(full[y]) | {x, y}
        if nx.is_chordal(full.subgraph(local)) and not nx.is_chordal(observed.subgraph(local)):
            cyc += 1
            restored += tuple(sorted((x, y))) in added
    broken = {frozenset((v.left_clone, v.right_clone)) for _, v in res.violations_before_fn}
    flagged = {frozenset((r.violation.left_clone, r.violation.right_clone)) for r in res.fn_reports}
    br = fl = 0
    for a, b in t.dropped:
        k = frozenset((tf[a].clone, tf[b].clone))
        if k in broken:
            br += 1
            fl += k in flagged
    return cyc, restored, br, fl


def test_planted_fn_recovery():
    tot = defaultdict(int)
    # critical-only drops rarely break a junction, so random drops at a higher
    # rate supplement the flagging half of the check
    for mode, rate in (("critical", 0.02), ("random", 0.05)):
        for seed in SEEDS:
            sim, inp, res = run(genome_length=10_000_000, fn_rate=rate, fn_mode=mode, seed=seed)
            cyc, restored, br, fl = fn_metrics(sim, res)
            tot[mode, "cyc"] += cyc
            tot[mode, "restored"] += restored
            tot[mode, "broken"] += br
            tot[mode, "flagged"] += fl
    restore_rate = tot["critical", "restored"] / max(1, tot["critical", "cyc"])
    broken = tot["critical", "broken"] + tot["random", "broken"]
    flagged = tot["critical", "flagged"] + tot["random", "flagged"]
    flag_rate = flagged / broken if broken else 1.0
    ok = tot["critical", "cyc"] > 0 and restore_rate >= 0.80 and flag_rate >= 0.90
    assert record(5, "planted FN recovery", ok,
                  f"critical drops: restored {tot['critical', 'restored']}/{tot['critical', 'cyc']} "
                  f"cycle-creating ({restore_rate:.3f}); adjacency-breaking drops flagged {flagged}/{broken} "
                  f"({flag_rate:.3f}) [critical {tot['critical', 'flagged']}/{tot['critical', 'broken']}, "
                  f"random 5% {tot['random', 'flagged']}/{tot['random', 'broken']}]")


# 6 ------------------------------------------------------------------------------


def _warp_oracle(w):
    for edge, label in zip((1.5, 1.8, 2.0, 5.0, 10.0), WARP_LABELS):
        if w <= edge:
            return label
    return WARP_LABELS[-1]


def _length_oracle(n):
    edges = (250_000, 300_000, 500_000, 800_000, 1_000_000, 2_000_000, 3_000_000, 10_000_000, 20_000_000)
    for lo, hi, label in zip(edges, edges[1:], LENGTH_LABELS):
        if lo < n <= hi:
            return label
    return None


def test_warp_report_fidelity(tmp_path):
    want_warp = ["<=1.5", "1.5 - 1.8", "1.8 - 2.0", "2.0 - 5.0", "5.0 - 10.0", ">10.0"]
    want_len = ["250K - 300K", "300K - 500K", "500K - 800K", "800K - 1M", "1M - 2M", "2M - 3M",
                "3M - 10M", "10M - 20M"]
    # a tiny assembly on disk, then cmd_report over it
    sim = simulate(SimParams(genome_length=1_000_000, seed=8))
    bundle, asm = tmp_path / "b", tmp_path / "a"
    sim.write_bundle(str(bundle))
    assert cli_main(["assemble", str(bundle), "--out", str(asm)]) == 0
    assert cli_main(["report", str(asm), "--clones", str(bundle / "clones.txt")]) == 0
    lines = (asm / "warp_report.tsv").read_text().splitlines()
    header_ok = [l.split("\t")[0] for l in lines[1:7]] == want_warp and lines[0] == "Warp\tassembly"
    len_start = lines.index("Assembled BAC Length\tassembly")
    header_ok &= [l.split("\t")[0] for l in lines[len_start + 1:len_start + 9]] == want_len
    rng = random.Random(6)
    spans, est = {}, {}
    for i in range(1000):
        e = rng.randint(20_000, 250_000)
        s = int(e * rng.choice([rng.uniform(0.2, 2.2), rng.uniform(2.2, 60.0)]))
        spans[f"c{i}"], est[f"c{i}"] = [(1000, 1000 + s)], e
    rep = warp_report(spans, est)
    wrong = 0
    for c in spans:
        w = spans[c][0][1] - spans[c][0][0]
        wrong += _warp_oracle(w / est[c]) != _warp_oracle(rep.warps[c])
        wrong += rep.warps[c] != w / est[c]
    want_len_counts = defaultdict(int)
    for c in spans:
        w = (spans[c][0][1] - spans[c][0][0]) / est[c]
        lb = _length_oracle(spans[c][0][1] - spans[c][0][0])
        if w > 1.5 and lb:
            want_len_counts[lb] += 1
    want_warp_counts = defaultdict(int)
    for c in spans:
        want_warp_counts[_warp_oracle((spans[c][0][1] - spans[c][0][0]) / est[c])] += 1
    counts_ok = dict(rep.warp_counts) == dict(want_warp_counts) and dict(rep.length_counts) == dict(want_len_counts)
    ok = header_ok and wrong == 0 and counts_ok
    assert record(6, "warp report fidelity", ok,
                  f"headers exact={header_ok}; 1000 random clones, misbucketed={wrong}, counts match={counts_ok}")


# 7 ------------------------------------------------------------------------------

_ASSEMBLE = """
import json, resource, sys, time
from barnacle.cli import main
t = time.perf_counter()
rc = main(["assemble", sys.argv[1], "--out", sys.argv[2]])
print(json.dumps({"rc": rc, "seconds": time.perf_counter() - t,
                  "max_rss_mb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024}))
"""


def test_performance_100k_fragments(tmp_path):
    bundle, out = tmp_path / "bundle", tmp_path / "asm"
    sim = simulate(SimParams(genome_length=490_000_000, fragments_per_draft_clone=(12, 3), seed=1))
    sim.write_bundle(str(bundle))
    n_frag, n_clone = len(sim.fragments), len(sim.clones)
    del sim
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-c", _ASSEMBLE, str(bundle), str(out)], capture_output=True, text=True)
    wall = time.perf_counter() - t0
    stats = json.loads(proc.stdout.strip().splitlines()[-1]) if proc.returncode == 0 else {"rc": proc.returncode}
    ok = (stats.get("rc") == 0 and wall < 60 and stats["max_rss_mb"] < 4096
          and n_frag >= 100_000 and n_clone >= 13_000)
    assert record(7, "performance", ok,
                  f"{n_frag} fragments / {n_clone} clones; wall {wall:.1f}s including interpreter start; "
                  f"peak RSS {stats.get('max_rss_mb', float('nan')):.0f} MB")


# 8 ------------------------------------------------------------------------------


def test_determinism(tmp_path):
    sim = simulate(SimParams(genome_length=3_000_000, fp_rate=0.03, chimera_rate=0.01, fn_rate=0.02, seed=12))
    bundle = tmp_path / "b"
    sim.write_bundle(str(bundle))
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert cli_main(["assemble", str(bundle), "--out", str(out), "--seed", "7"]) == 0
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    diff = [n for n in names if not filecmp.cmp(outs[0] / n, outs[1] / n, shallow=False)]
    ok = not diff and set(ARTIFACTS.values()) <= set(names)
    assert record(8, "determinism", ok, f"{len(names)} artifact files compared, differing={diff}")


if __name__ == "__main__":
    from pathlib import Path

    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            kwargs = {}
            with tempfile.TemporaryDirectory() as d:
                if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                    kwargs["tmp_path"] = Path(d)
                try:
                    fn(**kwargs)
                except AssertionError:
                    failed += 1
    sys.exit(1 if failed else 0)
