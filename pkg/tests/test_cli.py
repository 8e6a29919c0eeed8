import filecmp
import subprocess
import sys

import pytest

from barnacle.cli import main
from barnacle.report import ARTIFACTS


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    d = tmp_path_factory.mktemp("bundle")
    assert main(["simulate", "--seed", "3", "--set", "genome_length=1000000", "--set", "fp_rate=0.03", "--out", str(d)]) == 0
    return d


@pytest.fixture(scope="module")
def assembly(bundle, tmp_path_factory):
    out = tmp_path_factory.mktemp("asm")
    assert main(["assemble", str(bundle), "--out", str(out)]) == 0
    return out


def test_assemble_writes_every_artifact(assembly):
    for name in ARTIFACTS.values():
        assert (assembly / name).exists(), name
    assert (assembly / "params.txt").read_text().startswith("end_error_finished=350")


def test_assemble_is_deterministic(bundle, assembly, tmp_path):
    assert main(["assemble", str(bundle), "--out", str(tmp_path)]) == 0
    for name in ARTIFACTS.values():
        assert filecmp.cmp(assembly / name, tmp_path / name, shallow=False), name


def test_report(assembly, bundle, capsys):
    assert main(["report", str(assembly), "--clones", str(bundle / "clones.txt")]) == 0
    assert "<=1.5" in capsys.readouterr().out
    for name in ("warp_report.tsv", "warp_report.txt", "assembly_summary.tsv", "assembly_summary.txt"):
        assert (assembly / name).exists()
    head = (assembly / "assembly_summary.tsv").read_text().splitlines()[0]
    assert head == "\tBACs\tFragments Used/Fragments\tContigs\tLength in Gbp\tLength in bp"


def test_compare_with_itself(assembly, bundle, tmp_path):
    rc = main(["compare", str(assembly), str(assembly), "--clones", str(bundle / "clones.txt"),
               "--truth", str(bundle / "truth.tsv"), "--out", str(tmp_path)])
    assert rc == 0
    rows = [line.split("\t") for line in (tmp_path / "comparison.tsv").read_text().splitlines() if "\t" in line]
    for r in rows:
        if len(r) == 3 and r[0] not in ("Warp", "Assembled BAC Length", "metric"):
            assert r[1] == r[2], r
    assert ["order_agreement", "1.0000", "1.0000"] in rows


def test_compare_warns_on_different_clone_sets(assembly, bundle, tmp_path, capsys):
    other = tmp_path / "other"
    other.mkdir()
    lines = (assembly / "layout.txt").read_text().splitlines(keepends=True)
    first_contig_end = next(i for i, l in enumerate(lines[1:], 1) if l.startswith("contig\t"))
    (other / "layout.txt").write_text("".join(lines[first_contig_end:]))
    assert main(["compare", str(assembly), str(other), "--clones", str(bundle / "clones.txt")]) == 0
    assert "clone sets differ" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["assemble", "/no/such/bundle"],
    ["assemble", "--clones", "/no/such/clones.txt"],
    ["report", "/no/such/asm", "--clones", "/no/such/clones.txt"],
    ["simulate", "--set", "bogus=1"],
    ["simulate", "--set", "fp_rate=2"],
    ["assemble", "--set", "offset_tolerance"],
])
def test_input_errors_exit_1(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path / "x")]) == 1
    assert "error" in capsys.readouterr().err


def test_bad_params_file(bundle, tmp_path):
    cfg = tmp_path / "p.txt"
    cfg.write_text("# thresholds\noffset_tolerance = 250\nnot a pair\n")
    assert main(["assemble", str(bundle), "--params", str(cfg), "--out", str(tmp_path / "o")]) == 1
    cfg.write_text("offset_tolerance = 250\n")
    assert main(["assemble", str(bundle), "--params", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "offset_tolerance=250" in (tmp_path / "o" / "params.txt").read_text()


def test_internal_error_exits_2(bundle, tmp_path, monkeypatch):
    import barnacle.cli as cli
    from barnacle.resolve import ResolutionError

    def boom(*a, **k):
        raise ResolutionError("stuck")

    monkeypatch.setattr(cli, "run_pipeline", boom)
    assert main(["assemble", str(bundle), "--out", str(tmp_path)]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "barnacle.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("barnacle ")
