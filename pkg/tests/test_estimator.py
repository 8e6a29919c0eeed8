import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from barnacle.estimator import BarnacleAssembler, check_assembly_input, check_clone_ids
from barnacle.model import AssemblyInput, PipelineParams


def test_params_mirror_pipeline_defaults():
    est = BarnacleAssembler()
    assert est.pipeline_params() == PipelineParams()
    p = est.get_params()
    assert p["offset_tolerance"] == 300 and p["review_rounds"] == 1
    est.set_params(offset_tolerance=200)
    assert est.pipeline_params().offset_tolerance == 200
    assert clone(est).get_params() == est.get_params()


def test_not_fitted():
    est = BarnacleAssembler()
    with pytest.raises(NotFittedError):
        est.predict(["x"])
    with pytest.raises(NotFittedError):
        est.transform()
    with pytest.raises(NotFittedError):
        est.result


def test_fit_predict_transform(small_clean_run):
    sim, inp, res = small_clean_run
    est = BarnacleAssembler().fit(inp)
    layouts = est.transform()
    assert list(layouts) == [c.id for c in res.contigs]
    clones = sorted(inp.clones)
    pos = est.predict(clones)
    assert all(p is not None for p in pos)
    # clones of one contig get distinct ranks
    seen = {}
    for c, (ctg, rank) in zip(clones, pos):
        assert (ctg, rank) not in seen
        seen[ctg, rank] = c
    assert est.predict(clones[0]) == pos[:1]
    with pytest.raises(KeyError):
        est.predict(["no-such-clone"])


def test_fit_from_bundle_dir(tmp_path):
    from barnacle.simulator import SimParams, simulate

    simulate(SimParams(genome_length=800_000, clone_length=(100_000, 10_000), seed=2)).write_bundle(str(tmp_path))
    est = BarnacleAssembler().fit(str(tmp_path))
    assert est.n_clones_in_ > 0 and est.contigs_


@pytest.mark.parametrize("bad,exc", [
    (42, TypeError),
    ("/no/such/dir", FileNotFoundError),
    (AssemblyInput({}, {}, []), ValueError),
])
def test_input_validation(bad, exc):
    with pytest.raises(exc):
        check_assembly_input(bad)


def test_clone_id_validation():
    assert check_clone_ids("A", {"A"}) == ["A"]
    with pytest.raises(KeyError):
        check_clone_ids(["A", "Z"], {"A"})
