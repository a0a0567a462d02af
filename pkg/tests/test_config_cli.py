"""Configuration parsing and the command-line interface: exit codes,
CSV shapes, determinism, output redirection."""

import numpy as np
import pytest

from renewalkit import ConfigError
from renewalkit.cli import main
from renewalkit.config import (compile_expression, load_measure, load_rate,
                               load_scenario, Numerics)

RATE_OK = """
[rate]
kind = "constant"
beta = 1.0
beta_min = 1.0
beta_max = 1.0
a_star = 0.1
"""

RATE_BAD_BOUND = """
[rate]
kind = "constant"
beta = 1.0
beta_min = 0.5
beta_max = 0.5
a_star = 0.1
"""

MEASURE_DIRAC = """
[measure]
atoms = [{atom = 0.5, weight = 1.0}]
"""

MEASURE_EXPO = """
[measure.density]
expr = "exp(-a)"
normalize = true
"""

NUMERICS_COARSE = """
[numerics]
h_a = 0.01
h_t = 0.01
A_max = 20.0
horizon = 3.0
"""

SCENARIO = (RATE_OK + MEASURE_DIRAC + NUMERICS_COARSE + """
[verify]
times = [0.5, 1.0]
eta = 1.0
""")


@pytest.fixture()
def cfg(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


pytestmark = pytest.mark.filterwarnings("ignore:truncation age")


class TestExpressions:
    def test_basic_numpy_expression(self):
        fn = compile_expression("minimum(a, 2.0)")
        np.testing.assert_allclose(fn(np.array([1.0, 3.0])), [1.0, 2.0])

    def test_constants_broadcast(self):
        fn = compile_expression("1.0")
        assert fn(np.array([0.0, 1.0])).shape == (2,)

    def test_disallowed_name_rejected(self):
        with pytest.raises(ConfigError):
            compile_expression("__import__('os')")
        with pytest.raises(ConfigError):
            compile_expression("open('x')")

    def test_syntax_error_rejected(self):
        with pytest.raises(ConfigError):
            compile_expression("exp(-a")


class TestLoaders:
    def test_rate_roundtrip(self, cfg):
        nm = Numerics(h_a=0.01, h_t=0.01, A_max=20.0, horizon=2.0)
        rate = load_rate(cfg("r.toml", RATE_OK), nm)
        assert rate.beta_max == 1.0 and rate.validate().ok

    def test_measure_atoms_and_density(self, cfg):
        nm = Numerics(h_a=0.01, h_t=0.01, A_max=20.0, horizon=2.0)
        mu = load_measure(cfg("m.toml", MEASURE_DIRAC + MEASURE_EXPO), nm)
        assert len(mu.atom_weights) == 1
        assert mu.mass() == pytest.approx(2.0, abs=1e-9)

    def test_unknown_keys_rejected(self, cfg):
        nm = Numerics()
        with pytest.raises(ConfigError):
            load_rate(cfg("r.toml", RATE_OK + "extra = 1\n"), nm)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_rate("/nonexistent/rate.toml", Numerics())

    def test_scenario(self, cfg):
        sc = load_scenario(cfg("s.toml", SCENARIO))
        assert sc.times == [0.5, 1.0]
        assert sc.numerics.A_max == 20.0


class TestCommands:
    def test_dual_writes_csv(self, cfg, tmp_path):
        out = tmp_path / "dual.csv"
        code = main(["dual", "--rate", cfg("r.toml", RATE_OK),
                     "--numerics", cfg("n.toml", NUMERICS_COARSE),
                     "--f0", "exp(-a)", "--t", "1.0", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "age,value"
        assert len(lines) == 2002  # header + nodes of [0, 20] at 0.01

    def test_evolve_conserves_and_is_deterministic(self, cfg, tmp_path):
        args = ["evolve", "--rate", cfg("r.toml", RATE_OK),
                "--numerics", cfg("n.toml", NUMERICS_COARSE),
                "--init", cfg("m.toml", MEASURE_DIRAC),
                "--t", "1.0", "--snapshots", "0.5"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert (tmp_path / "a_snapshots.csv").exists()
        header = out1.read_text().splitlines()[0]
        assert header == "kind,position,value"

    def test_oracle_rows(self, cfg, tmp_path):
        out = tmp_path / "ages.csv"
        code = main(["oracle", "--rate", cfg("r.toml", RATE_OK),
                     "--numerics", cfg("n.toml", NUMERICS_COARSE),
                     "--init", cfg("m.toml", MEASURE_DIRAC),
                     "--t", "1.0", "--n", "500", "--seed", "7",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "age" and len(lines) == 501

    def test_doeblin_record(self, cfg, capsys):
        code = main(["doeblin", "--rate", cfg("r.toml", RATE_OK),
                     "--numerics", cfg("n.toml", NUMERICS_COARSE),
                     "--eta", "1.0"])
        assert code == 0
        line = capsys.readouterr().out.splitlines()[0]
        assert line.startswith("doeblin eta=1 t0=1.1 c=0.332871083")

    def test_converge_table(self, cfg, tmp_path):
        out = tmp_path / "decay.csv"
        code = main(["converge", "--rate", cfg("r.toml", RATE_OK),
                     "--numerics", cfg("n.toml", NUMERICS_COARSE),
                     "--mu1", cfg("m1.toml", MEASURE_DIRAC),
                     "--mu2", cfg("m2.toml", MEASURE_EXPO),
                     "--times", "0.5,1.0,2.0", "--out", str(out)])
        assert code == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "t,tv,bound" and len(rows) == 4

    def test_verify_passes_on_sane_scenario(self, cfg, capsys):
        code = main(["verify", "--config", cfg("s.toml", SCENARIO)])
        assert code == 0
        out = capsys.readouterr().out
        assert "check=conservation" in out and "status=pass" in out

    def test_out_dir_env(self, cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("RENEWALKIT_OUT_DIR", str(tmp_path / "redirected"))
        code = main(["dual", "--rate", cfg("r.toml", RATE_OK),
                     "--numerics", cfg("n.toml", NUMERICS_COARSE),
                     "--f0", "1.0", "--t", "0.5", "--out", "dual.csv"])
        assert code == 0
        assert (tmp_path / "redirected" / "dual.csv").exists()


class TestExitCodes:
    def test_config_error_is_2(self, cfg, tmp_path):
        code = main(["dual", "--rate", cfg("r.toml", "not toml ["),
                     "--f0", "1.0", "--t", "1.0",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_validation_failure_is_3(self, cfg, tmp_path):
        code = main(["evolve", "--rate", cfg("r.toml", RATE_BAD_BOUND),
                     "--numerics", cfg("n.toml", NUMERICS_COARSE),
                     "--init", cfg("m.toml", MEASURE_DIRAC),
                     "--t", "1.0", "--out", str(tmp_path / "x.csv")])
        assert code == 3

    def test_mass_mismatch_is_3(self, cfg, tmp_path):
        heavy = '[measure]\natoms = [{atom = 0.5, weight = 2.0}]\n'
        code = main(["converge", "--rate", cfg("r.toml", RATE_OK),
                     "--numerics", cfg("n.toml", NUMERICS_COARSE),
                     "--mu1", cfg("m1.toml", MEASURE_DIRAC),
                     "--mu2", cfg("m2.toml", heavy),
                     "--times", "1.0", "--out", str(tmp_path / "x.csv")])
        assert code == 3

    @pytest.mark.filterwarnings("ignore:initial atoms beyond")
    def test_solver_domain_error_is_4(self, cfg, tmp_path):
        # an atom so old that its survival factor falls off the padded
        # hazard grid
        far = '[measure]\natoms = [{atom = 80.0, weight = 1.0}]\n'
        code = main(["evolve", "--rate", cfg("r.toml", RATE_OK),
                     "--numerics", cfg("n.toml", NUMERICS_COARSE),
                     "--init", cfg("m.toml", far),
                     "--t", "1.0", "--out", str(tmp_path / "x.csv")])
        assert code == 4

    def test_invariant_violation_is_5(self, cfg):
        strict = SCENARIO.replace("[verify]",
                                  "eps_tv = 1e-18\n\n[verify]")
        code = main(["verify", "--config", cfg("s.toml", strict)])
        assert code == 5
