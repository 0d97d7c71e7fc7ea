import json

from pyudtfs import cli, suite


def _run(capsys, argv):
    capsys.readouterr()
    code = cli.main(argv + ["--json"])
    out = capsys.readouterr().out
    return code, json.loads(out) if code == 0 else None


def _gen(tmp_path, family, *options):
    path = str(tmp_path / ("%s.json" % family))
    assert cli.main(["gen", family, *options, "-o", path]) == 0
    return path


def test_gen(tmp_path, capsys):
    """Test generated model files"""
    path = _gen(tmp_path, "grid", "--n", "2", "--k", "3")
    with open(path) as f:
        description = json.load(f)
    assert description["universe"] == 27
    assert len(description["sets"]["B"]) == 19
    assert set(description["sets"]) == {"B", "A"}
    assert description["generator"] == {"family": "grid", "n": 2, "k": 3}
    code, report = _run(capsys, ["gen", "hypercube", "--d", "2", "-o", str(tmp_path / "h.json")])
    assert code == 0
    assert report["findings"]["universe"] == 14
    code, report = _run(capsys, ["gen", "random", "--width", "3", "--size", "12", "--seed", "7",
                                 "-o", str(tmp_path / "r.json")])
    assert report["findings"]["width"] == 3


def test_analyze(tmp_path, capsys):
    """Test measurements of generated posets"""
    grid = _gen(tmp_path, "grid", "--n", "1")
    code, report = _run(capsys, ["analyze", grid, "--width", "--aut"])
    assert code == 0
    assert report["findings"] == {"width": 3, "automorphisms": 6}
    hypercube = _gen(tmp_path, "hypercube", "--d", "1")
    code, report = _run(capsys, ["analyze", hypercube, "--zerotypes"])
    assert report["findings"]["zero_types"] == 2
    assert report["findings"]["antichain_classes"]


def test_definability(tmp_path, capsys):
    """Test scheme bounds of the grid and hypercube posets"""
    grid = _gen(tmp_path, "grid", "--n", "2")
    code, report = _run(capsys, ["definability", grid, "--delta", "y < x", "--B", "designated:B", "--d", "1",
                                 "--type-of", "g5_0"])
    assert code == 0
    assert report["findings"]["lower_bound"] == 1
    hypercube = _gen(tmp_path, "hypercube", "--d", "1")
    code, report = _run(capsys, ["definability", hypercube, "--B", "designated:H", "--d", "1", "--type-of", "P_pp"])
    assert report["findings"]["lower_bound"] == "inf"
    assert report["certificates"][0]["certificate"]["verdict"] is False
    code, report = _run(capsys, ["definability", hypercube, "--d", "1"])
    assert report["findings"]["types"] == 1
    assert report["findings"]["lower_bound"] == 1


def test_definability_is_deterministic(tmp_path, capsys):
    """Test findings and certificates do not change between runs"""
    path = _gen(tmp_path, "random", "--width", "2", "--size", "7", "--seed", "3")
    argv = ["definability", path, "--B", "0,1,2,3", "--d", "1", "--jobs", "2"]
    _, first = _run(capsys, argv)
    _, second = _run(capsys, argv)
    assert first["findings"] == second["findings"]
    assert first["certificates"] == second["certificates"]
    assert first["inputs"] == second["inputs"]


def test_lemma31(tmp_path, capsys):
    """Test the recursive definer from the command line"""
    grid = _gen(tmp_path, "grid", "--n", "1")
    code, report = _run(capsys, ["lemma31", grid, "--psi", "!exists z. z < x", "--phi", "x < y", "--c", "g0_0",
                                 "--B", "designated:B", "--d", "1"])
    assert code == 0
    assert report["findings"]["parameters"] <= 1
    hypercube = _gen(tmp_path, "hypercube", "--d", "1")
    capsys.readouterr()
    code = cli.main(["lemma31", hypercube, "--psi", "!exists z. z < x", "--phi", "x < y", "--c", "P_pp",
                     "--B", "designated:H", "--d", "1"])
    assert code == 2
    assert "bound 2^(d+1)-1 = 3" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    """Test bad arguments and inputs exit with code 2"""
    assert cli.main(["verify", "nope"]) == 2
    assert cli.main(["analyze", str(tmp_path / "missing.json")]) == 2
    path = _gen(tmp_path, "grid", "--n", "1")
    assert cli.main(["definability", path, "--B", "designated:X"]) == 2
    assert cli.main(["definability", path, "--B", "g9_9"]) == 2


def test_verify_exit_codes(monkeypatch, capsys):
    """Test verify exits with 1 when a claim fails and passes --jobs to the checks"""
    seen = []

    def passing(result, quick, rng, jobs=None):
        seen.append(jobs)
        result.measured["jobs"] = jobs

    def failing(result, quick, rng, jobs=None):
        result.fail("always fails")

    monkeypatch.setattr(suite, "CLAIMS", [("passing", "Always passes", passing)])
    code, report = _run(capsys, ["verify", "quick", "--jobs", "3"])
    assert code == 0
    assert seen == [3]
    assert report["findings"]["claims"] == {"passing": True}
    monkeypatch.setattr(suite, "CLAIMS", [("passing", "Always passes", passing),
                                          ("failing", "Always fails", failing)])
    capsys.readouterr()
    assert cli.main(["verify", "quick"]) == 1
    assert "'failing': False" in capsys.readouterr().out
