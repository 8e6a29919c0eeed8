import pytest

from barnacle.pipeline import run_pipeline
from barnacle.simulator import SimParams, simulate


def placements_rows(res, inp):
    """Score-ready layout rows: contig -> [(frag, clone, start, strand, subcontig)]."""
    from barnacle.scaffold import global_placements

    lengths = inp.lengths
    out = {}
    for ctg in res.contigs:
        sub_of = {p.frag_id: e.id for e in ctg.entries for p in e.subcontig.placements}
        out[ctg.id] = [
            (f, inp.fragments[f].clone_id, s, st, sub_of[f]) for f, s, st in global_placements(ctg, lengths)
        ]
    return out


class RunView:
    """Adapter exposing an in-memory run the way score_assembly expects."""

    def __init__(self, res, inp):
        self.layout = placements_rows(res, inp)
        self.accepted = res.accepted
        self.actions = res.actions
        self.fn_reports = res.fn_reports
        self.fragment_lengths = inp.lengths


def run_sim(**kw):
    sim = simulate(SimParams(**kw))
    inp = sim.to_input()
    res = run_pipeline(inp)
    return sim, inp, res


@pytest.fixture(scope="session")
def small_clean_run():
    return run_sim(genome_length=2_000_000, seed=11)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
