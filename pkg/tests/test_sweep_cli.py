import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gqms import cli
from gqms.models import single_noise as sn, two_noise as tn
from gqms.sweep import (
    RESULT_COLUMNS,
    Axis,
    RegionSample,
    SweepConfig,
    default_jobs,
    load_config,
    records_from_csv,
    records_to_csv,
    records_to_json,
    run_sweep,
)


# points this close to the exact boundary (in b) may fall in a witness dead band
PARAM_BAND = 1e-3


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------- config

class TestAxis:
    def test_parse(self):
        a = Axis.parse("g:0.05:4:200:log")
        assert (a.name, a.start, a.stop, a.steps, a.log) == ("g", 0.05, 4.0, 200, True)
        v = a.values()
        assert v[0] == pytest.approx(0.05) and v[-1] == pytest.approx(4.0) and len(v) == 200
        assert np.allclose(np.diff(np.log(v)), np.log(80) / 199)
        assert Axis.parse(a.spec()) == a
        np.testing.assert_allclose(Axis.parse("b:1:2:3").values(), [1, 1.5, 2])

    @pytest.mark.parametrize("text", ["g:1:2", "g:1:2:1", "g:1:2:x", "g:0:1:5:log",
                                      "g:1:2:5:cubic", "g:1:2:2.5"])
    def test_bad(self, text):
        with pytest.raises(ValueError):
            Axis.parse(text)


class TestSweepConfig:
    def test_errors(self):
        with pytest.raises(ValueError):
            SweepConfig("nope")
        with pytest.raises(ValueError):
            SweepConfig("single_noise", axes=(Axis("omega", 0, 1, 2),), fixed={"kappa": 0.5, "g": 1})
        with pytest.raises(ValueError):
            SweepConfig("single_noise", fixed={"kappa": 0.5, "g": 1})
        with pytest.raises(ValueError):
            SweepConfig("single_noise", axes=(Axis("g", 0.1, 1, 2),),
                        fixed={"kappa": 0.5, "g": 1, "beta_tilde": 1.2})
        with pytest.raises(ValueError):  # beta_tilde < 1 somewhere on the grid
            SweepConfig("single_noise", axes=(Axis("beta_tilde", 0.5, 2, 4),),
                        fixed={"kappa": 0.5, "g": 1})
        with pytest.raises(ValueError):  # g = 0 on the grid
            SweepConfig("single_noise", axes=(Axis("g", -1, 1, 3),),
                        fixed={"kappa": 0.5, "beta_tilde": 1.2})
        with pytest.raises(ValueError):
            SweepConfig("single_noise", fixed={"kappa": 0.5, "g": 1, "beta_tilde": 1.2},
                        outputs=("plots",))
        axes = tuple(Axis(n, 1.1, 2, 2) for n in ("g", "beta0_tilde", "beta3_tilde", "kappa"))
        with pytest.raises(ValueError):
            SweepConfig("two_noise", axes=axes)

    def test_row_major(self):
        c = SweepConfig("single_noise", axes=(Axis("kappa", 0.1, 0.2, 2), Axis("g", 0.5, 1, 3)),
                        fixed={"beta_tilde": 1.1})
        pts = [(q["kappa"], q["g"]) for q in c.points()]
        assert pts == [(0.1, 0.5), (0.1, 0.75), (0.1, 1.0), (0.2, 0.5), (0.2, 0.75), (0.2, 1.0)]
        assert c.shape == (2, 3)

    def test_jobs_env(self, monkeypatch):
        monkeypatch.delenv("GQMS_JOBS", raising=False)
        assert default_jobs() == 1
        monkeypatch.setenv("GQMS_JOBS", "3")
        assert default_jobs() == 3
        monkeypatch.setenv("GQMS_JOBS", "0")
        with pytest.raises(ValueError):
            default_jobs()

    def test_config_file(self, tmp_path):
        path = tmp_path / "s.ini"
        path.write_text("[sweep]\nmodel = single_noise\noutputs = stability, ppt\n"
                        "[fixed]\nkappa = 0.5\nbeta_tilde = 1.05\n[axes]\ng = 0.05:1:4\n")
        kw = load_config(path)
        assert kw["model"] == "single_noise" and kw["outputs"] == ("stability", "ppt")
        assert kw["axes"][0] == Axis("g", 0.05, 1.0, 4)
        path.write_text("[sweep]\nmodel = single_noise\n[plot]\nx = 1\n")
        with pytest.raises(ValueError):
            load_config(path)


# ---------------------------------------------------------------- records

def _small_config():
    return SweepConfig("single_noise", axes=(Axis("kappa", -0.9, 0.9, 7), Axis("g", 0.1, 2, 5, True)),
                       fixed={"beta_tilde": 1.05})


class TestRecords:
    def test_invariants(self):
        samples = run_sweep(_small_config(), jobs=1)
        assert len(samples) == 35
        assert {s.status for s in samples} == {"ok", "unstable"}
        for s in samples:
            if s.entangled:
                assert s.stable and s.det_tilde < 0
            if s.status == "unstable":
                assert s.det_tilde is None and s.entangled is None

    def test_csv_roundtrip_exact(self):
        samples = run_sweep(_small_config(), jobs=1)
        text = records_to_csv(samples, ["kappa", "g"])
        assert text.splitlines()[0].split(",") == ["kappa", "g", *RESULT_COLUMNS]
        assert "nan" not in text.lower()
        assert records_from_csv(text) == samples

    @given(st.floats(allow_nan=False, allow_infinity=False), st.booleans(),
           st.floats(-1e300, 1e300), st.one_of(st.none(), st.booleans()))
    def test_csv_roundtrip_property(self, x, stable, det, analytic):
        s = RegionSample({"x": x}, stable=stable, entangled=False if stable else None,
                         det_tilde=det if stable else None, min_eig_tilde=0.0 if stable else None,
                         log_negativity=0.0 if stable else None, analytic_entangled=analytic,
                         status="ok" if stable else "unstable")
        assert records_from_csv(records_to_csv([s], ["x"])) == [s]

    def test_json(self):
        c = _small_config()
        doc = json.loads(records_to_json(run_sweep(c, jobs=1), c))
        assert doc["config"]["model"] == "single_noise"
        assert len(doc["records"]) == 35
        assert set(doc["records"][0]) == {"kappa", "g", *RESULT_COLUMNS}

    def test_deterministic_across_worker_counts(self):
        c = _small_config()
        one = records_to_csv(run_sweep(c, jobs=1), ["kappa", "g"])
        two = records_to_csv(run_sweep(c, jobs=2), ["kappa", "g"])
        assert one == two

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            RegionSample({}, stable=True, det_tilde=float("nan"))
        with pytest.raises(ValueError):
            RegionSample({}, stable=False, entangled=True)


# ---------------------------------------------------------------- CLI

class TestAnalyze:
    def test_entangled_point(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--model", "single_noise", "--set", "kappa=0.5",
                               "--set", "g=0.1", "--set", "beta_tilde=1.05")
        assert code == 0
        line = next(l for l in out.splitlines() if l.startswith("stable;"))
        assert line.startswith("stable; ENTANGLED; det(S~)=-")
        assert "analytic region predicate: entangled" in out

    def test_thermal_point(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--model", "single_noise", "--set", "kappa=0",
                               "--set", "g=1", "--set", "beta_tilde=2")
        assert code == 0
        assert "S = 2*I" in out and "stable; separable;" in out

    def test_unstable_point(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--model", "single_noise", "--set", "kappa=0.9",
                               "--set", "g=1", "--set", "beta_tilde=1.2")
        assert code == 0
        assert "unstable; no stationary state" in out

    @pytest.mark.parametrize("argv", [
        ["analyze", "--model", "single_noise", "--set", "kappa=0.5", "--set", "g=0"],
        ["analyze", "--model", "single_noise", "--set", "kappa=0.5", "--set", "g=1",
         "--set", "beta_tilde=0.5"],
        ["analyze", "--model", "single_noise", "--set", "kappa"],
        ["analyze", "--model", "bogus"],
        ["analyze"],
        ["sweep", "--model", "single_noise", "--axis", "g:1:2", "--set", "kappa=0.5",
         "--set", "beta_tilde=1.1"],
        ["selftest", "--inject-fault", "9,9"],
        [],
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, err = run_cli(capsys, *argv)
        assert code == 1 and "error" in err

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "analyze", "--model", "single_noise", "--set", "kappa=0",
                               "--set", "g=1", "--set", "beta_tilde=2",
                               "--out", str(tmp_path / "missing" / "x.json"))
        assert code == 1 and "cannot write" in err

    def test_json_out(self, capsys, tmp_path):
        out = tmp_path / "a.json"
        run_cli(capsys, "analyze", "--model", "two_noise", "--set", "kappa=1", "--set", "g=1",
                "--set", "beta0_tilde=1.2", "--set", "beta3_tilde=1.2", "--out", str(out))
        doc = json.loads(out.read_text())
        assert np.array(doc["S"]).shape == (8, 8) and np.array(doc["S_red"]).shape == (4, 4)
        assert doc["record"]["entangled"] is True and doc["record"]["analytic_entangled"] is True

    def test_zero_axis_sweep_matches_analyze(self, capsys, tmp_path):
        point = ["--model", "single_noise", "--set", "kappa=0.5", "--set", "g=0.1",
                 "--set", "beta_tilde=1.05"]
        a, s = tmp_path / "a.json", tmp_path / "s.json"
        run_cli(capsys, "analyze", *point, "--out", str(a))
        run_cli(capsys, "sweep", *point, "--out", str(s))
        assert json.loads(a.read_text())["record"] == json.loads(s.read_text())["records"][0]
        ac, sc = tmp_path / "a.csv", tmp_path / "s.csv"
        run_cli(capsys, "analyze", *point, "--out", str(ac), "--format", "csv")
        run_cli(capsys, "sweep", *point, "--out", str(sc), "--format", "csv")
        assert ac.read_text() == sc.read_text()


class TestSweepCommand:
    def test_config_with_overrides(self, capsys, tmp_path):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[sweep]\nmodel = single_noise\n[fixed]\nkappa = 0.5\nbeta_tilde = 1.05\n"
                       "[axes]\ng = 0.05:1:4\n")
        code, out, _ = run_cli(capsys, "sweep", str(cfg), "--axis", "g:0.1:0.2:3", "--jobs", "1")
        assert code == 0
        rows = records_from_csv(out)
        assert [r.coordinates["g"] for r in rows] == pytest.approx([0.1, 0.15, 0.2])

    def test_custom_generator(self, capsys, tmp_path):
        gen = {"Omega": [[0, 0.5], [0.5, 0]], "Kappa": [[0.25, 0], [0, 0.25]],
               "U": [[0, 0]], "V": [[1, 0]]}
        (tmp_path / "gen.json").write_text(json.dumps(gen))
        cfg = tmp_path / "c.ini"
        cfg.write_text("[sweep]\nmodel = custom_generator\n[fixed]\ngenerator = gen.json\n"
                       "keep = 0,1\n[axes]\nkappa_scale = 0:1:3\n")
        code, out, _ = run_cli(capsys, "sweep", str(cfg))
        assert code == 0
        rows = records_from_csv(out)
        assert len(rows) == 3 and all(r.analytic_entangled is None for r in rows)

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "gqms.cli", "analyze", "--model",
                               "single_noise", "--set", "kappa=0.9", "--set", "g=1",
                               "--set", "beta_tilde=1.2"], capture_output=True, text=True)
        assert proc.returncode == 0 and "no stationary state" in proc.stdout


# ---------------------------------------------------------------- region grids

@pytest.fixture(scope="module")
def equal_temp_region(tmp_path_factory):
    out = tmp_path_factory.mktemp("equal_temp_region") / "equal_temp_region.csv"
    code = cli.main(["sweep", "--model", "two_noise_equal_temp", "--axis", "g:0.05:4:200:log",
                     "--axis", "b:1.01:2.6:160", "--out", str(out), "--jobs", "1"])
    assert code == 0
    rows = records_from_csv(out.read_text())
    g = np.array([r.coordinates["g"] for r in rows]).reshape(200, 160)
    b = np.array([r.coordinates["b"] for r in rows]).reshape(200, 160)
    ent = np.array([bool(r.entangled) for r in rows]).reshape(200, 160)
    return g, b, ent, rows


def _upper_edge(bs, ent_row):
    """Largest entangled b in a column; entanglement must be a lower set in b."""
    idx = np.nonzero(ent_row)[0]
    assert np.array_equal(idx, np.arange(len(idx))), "region is not {b < bound}"
    return bs[idx[-1]] if len(idx) else None


class TestFigure5:
    def test_columns_follow_exact_bound(self, equal_temp_region):
        g, b, ent, _ = equal_temp_region
        cell = b[0, 1] - b[0, 0]
        for i in range(200):
            edge = _upper_edge(b[i], ent[i])
            bound = tn.equal_temp_b_bound(g[i, 0])
            if bound >= b[i, -1]:
                assert ent[i].all()
            else:
                # edge is the last grid value below the bound, give or take the dead band
                assert -PARAM_BAND <= bound - edge <= cell + PARAM_BAND

    def test_b2_landmark(self, equal_temp_region):
        g, b, ent, _ = equal_temp_region
        cell = b[0, 1] - b[0, 0]
        i = int(np.argmin(np.abs(g[:, 0] - 2 / math.sqrt(3))))
        assert abs(_upper_edge(b[i], ent[i]) - 2.0) <= cell + 1e-9

    def test_large_coupling_limit(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--model", "two_noise_equal_temp", "--set", "g=1000",
                               "--axis", "b:1.01:2.6:160")
        rows = records_from_csv(out)
        bs = np.array([r.coordinates["b"] for r in rows])
        edge = _upper_edge(bs, [bool(r.entangled) for r in rows])
        assert abs(edge - tn.B_LOW) <= bs[1] - bs[0]

    def test_witnesses_and_predicate(self, equal_temp_region):
        _, _, _, rows = equal_temp_region
        checked = 0
        for r in rows:
            assert r.stable
            g, b = r.coordinates["g"], r.coordinates["b"]
            if abs(b - tn.equal_temp_b_bound(g)) < PARAM_BAND:
                continue
            checked += 1
            assert r.entangled == (r.det_tilde < 0) == (r.log_negativity > 0) == r.analytic_entangled
        assert checked > 0.95 * len(rows)


def test_crossover_on_grid():
    ks = np.linspace(0.5, 0.95, 4501)
    diff = np.array([sn.stability_bound_g2(k) - sn.determinant_bound_g2(k) for k in ks])
    i = int(np.nonzero(np.diff(np.sign(diff)))[0][0])
    assert ks[i] <= sn.KAPPA_CROSSOVER <= ks[i + 1]
    assert abs(ks[i] - math.sqrt((5 - math.sqrt(13)) / 2)) <= ks[1] - ks[0]
