"""End-to-end tests for the dcscreen command line."""

import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np
import pandas as pd

from dcscreen import __version__
from dcscreen.cli import main


class CliFixture(unittest.TestCase):
    """Runs the CLI inside a scratch directory and captures its output."""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def run_cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main([str(a) for a in argv])
        return code, out.getvalue(), err.getvalue()

    def write_frame(self, frame: pd.DataFrame, name: str = "data.csv") -> Path:
        path = self.dir / name
        frame.to_csv(path, index=False, float_format="%.17g")
        return path

    def random_frame(self, n: int, p: int, q: int = 1, copy_col: int = None, seed: int = 0):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((n, p))
        y = rng.standard_normal((n, q))
        if copy_col is not None:
            x[:, copy_col] = y[:, 0]
        cols = {f"x{k + 1}": x[:, k] for k in range(p)}
        names = ["y"] if q == 1 else [f"y{k + 1}" for k in range(q)]
        cols.update({name: y[:, k] for k, name in enumerate(names)})
        return pd.DataFrame(cols)

    def load(self, name: str, out_dir: str = "out"):
        return json.loads((self.dir / out_dir / name).read_text())


class TestScreenCommand(CliFixture):
    """Test `dcscreen screen`."""

    def test_copied_response_ranks_first(self):
        """A predictor equal to y is selected first with utility ~1."""
        path = self.write_frame(self.random_frame(30, 5, copy_col=2))
        code, out, err = self.run_cli("screen", "--input", path, "--out-dir", self.dir / "out")
        self.assertEqual(code, 0, err)
        selected = self.load("selected.json")
        self.assertEqual(selected["selected"][0]["name"], "x3")
        self.assertAlmostEqual(selected["selected"][0]["utility"], 1.0, delta=1e-10)
        utilities = pd.read_csv(self.dir / "out" / "utilities.csv")
        self.assertEqual(list(utilities.columns), ["block_id", "name", "utility", "rank"])
        self.assertEqual(len(utilities), 5)
        self.assertIn("x3", out)

    def test_auto_d_clamps_to_g(self):
        """floor(n / ln n) larger than G selects every block with a warning."""
        path = self.write_frame(self.random_frame(30, 5))
        code, _, err = self.run_cli("screen", "--input", path, "--out-dir", self.dir / "out")
        self.assertEqual(code, 0)
        self.assertEqual(self.load("selected.json")["rule"], {"rule": "top-d", "d": 5})
        self.assertIn("exceeds G=5", err)

    def test_auto_d_at_n_200(self):
        """n=200 gives d = 37."""
        path = self.write_frame(self.random_frame(200, 50))
        code, _, err = self.run_cli("screen", "--input", path, "--rule", "top-d", "--d", "auto",
                                    "--out-dir", self.dir / "out")
        self.assertEqual(code, 0, err)
        selected = self.load("selected.json")
        self.assertEqual(selected["rule"]["d"], 37)
        self.assertEqual(len(selected["selected"]), 37)
        self.assertEqual((selected["n"], selected["G"]), (200, 50))

    def test_threshold_and_groups(self):
        """Threshold selection over grouped predictors."""
        path = self.write_frame(self.random_frame(40, 6, copy_col=0))
        code, _, err = self.run_cli("screen", "--input", path, "--groups", "2-3;5-6",
                                    "--rule", "threshold", "--c", "0.9", "--kappa", "0",
                                    "--out-dir", self.dir / "out")
        self.assertEqual(code, 0, err)
        selected = self.load("selected.json")
        self.assertEqual(selected["G"], 4)
        self.assertEqual(selected["groups"], "1;2-3;4;5-6")
        self.assertEqual([s["name"] for s in selected["selected"]], ["x1"])

    def test_sis_on_two_responses(self):
        """Baselines refuse multivariate responses with exit code 1."""
        path = self.write_frame(self.random_frame(30, 4, q=2))
        code, _, err = self.run_cli("screen", "--input", path, "--response-cols", "y1,y2",
                                    "--method", "sis", "--out-dir", self.dir / "out")
        self.assertEqual(code, 1)
        self.assertIn("univariate", err)
        self.assertFalse((self.dir / "out" / "selected.json").exists())

    def test_data_errors_exit_1(self):
        """Missing and malformed inputs are data errors."""
        code, _, err = self.run_cli("screen", "--input", self.dir / "absent.csv",
                                    "--out-dir", self.dir / "out")
        self.assertEqual(code, 1)
        self.assertIn("not found", err)
        bad = self.dir / "bad.csv"
        bad.write_text("a,y\n1,2\nx,3\n")
        code, _, err = self.run_cli("screen", "--input", bad, "--out-dir", self.dir / "out")
        self.assertEqual(code, 1)
        self.assertIn("non-numeric", err)

    def test_usage_errors_exit_2(self):
        """Rule and input problems are usage errors."""
        path = self.write_frame(self.random_frame(30, 5))
        out = self.dir / "out"
        self.assertEqual(self.run_cli("screen", "--out-dir", out)[0], 2)
        self.assertEqual(self.run_cli("screen", "--input", path, "--d", "9",
                                      "--out-dir", out)[0], 2)
        self.assertEqual(self.run_cli("screen", "--input", path, "--rule", "threshold",
                                      "--c", "0.1", "--out-dir", out)[0], 2)

    def test_manifest(self):
        """Every run records its configuration and version."""
        path = self.write_frame(self.random_frame(30, 5))
        self.run_cli("screen", "--input", path, "--seed", "4", "--out-dir", self.dir / "out")
        manifest = self.load("manifest.json")
        self.assertEqual(manifest["version"], __version__)
        self.assertEqual(manifest["seed"], 4)
        self.assertEqual(manifest["config"]["input"], str(path))
        self.assertEqual(manifest["outputs"], ["utilities.csv", "selected.json"])


class TestSimulateCommand(CliFixture):
    """Test `dcscreen simulate`."""

    SMALL = ("simulate", "--model", "1a", "--n", "40", "--p", "25", "--reps", "4")

    def test_small_run(self):
        """Writes JSON and CSV reports and prints the markdown tables."""
        code, out, err = self.run_cli(*self.SMALL, "--method", "dcsis,sis",
                                      "--out-dir", self.dir / "out")
        self.assertEqual(code, 0, err)
        report = self.load("report.json")
        self.assertEqual(set(report["reports"]), {"dcsis", "sis"})
        self.assertEqual(report["model"]["p"], 25)
        table = pd.read_csv(self.dir / "out" / "report.csv")
        self.assertEqual(list(table["method"]), ["dcsis", "sis"])
        self.assertIn("Minimum model size", out)

    def test_worker_count_does_not_change_report(self):
        """Same seed with 1 and 2 workers gives byte-identical payloads."""
        self.run_cli(*self.SMALL, "--seed", "3", "--workers", "1", "--out-dir", self.dir / "a")
        self.run_cli(*self.SMALL, "--seed", "3", "--workers", "2", "--out-dir", self.dir / "b")
        a = (self.dir / "a" / "report.json").read_bytes()
        b = (self.dir / "b" / "report.json").read_bytes()
        self.assertEqual(a, b)

    def test_config_file(self):
        """A config file supplies and overrides settings."""
        config = self.dir / "run.yaml"
        config.write_text("model: 1b\nn: 40\np: 25\nreps: 2\nseed: 8\n")
        code, _, err = self.run_cli("simulate", "--config", config, "--seed", "1",
                                    "--out-dir", self.dir / "out")
        self.assertEqual(code, 0, err)
        self.assertEqual(self.load("report.json")["model"]["seed"], 8)
        self.assertIn("overrides flag value", err)

    def test_unknown_preset(self):
        """An unknown preset exits 2 and lists the valid ones."""
        code, _, err = self.run_cli("simulate", "--preset", "9z-case1", "--out-dir", self.dir)
        self.assertEqual(code, 2)
        self.assertIn("1a-case1-desk", err)

    def test_incompatible_method(self):
        """SIS cannot run the grouped model."""
        code, _, err = self.run_cli("simulate", "--model", "2", "--n", "40", "--p", "25",
                                    "--reps", "1", "--method", "sis", "--out-dir", self.dir)
        self.assertEqual(code, 1)
        self.assertIn("use dcsis", err)

    def test_negative_seed(self):
        """A negative seed is a usage error, not a traceback."""
        code, _, err = self.run_cli(*self.SMALL, "--seed", "-1", "--out-dir", self.dir / "out")
        self.assertEqual(code, 2)
        self.assertIn("seed must be a non-negative integer", err)

    def test_negative_seed_in_config_file(self):
        """The same check applies to a seed given in a config file."""
        config = self.dir / "run.json"
        config.write_text('{"seed": -5}')
        code, _, err = self.run_cli(*self.SMALL, "--config", config, "--out-dir", self.dir)
        self.assertEqual(code, 2)
        self.assertIn("seed", err)

    def test_needs_model_or_preset(self):
        """Nothing to simulate is a usage error."""
        self.assertEqual(self.run_cli("simulate", "--out-dir", self.dir)[0], 2)


class TestConvergeCommand(CliFixture):
    """Test `dcscreen converge`."""

    def test_small_grid(self):
        """Writes the decay table as CSV and JSON."""
        code, out, err = self.run_cli("converge", "--p", "25", "--grid", "30,60", "--seeds", "2",
                                      "--surrogate-n", "300", "--out-dir", self.dir / "out")
        self.assertEqual(code, 0, err)
        table = pd.read_csv(self.dir / "out" / "converge.csv")
        self.assertEqual(list(table["n"]), [30, 60])
        self.assertEqual(self.load("converge.json")["seeds"], 2)
        self.assertIn("median max-error", out)

    def test_single_point_grid(self):
        """One grid point is a usage error."""
        code, _, err = self.run_cli("converge", "--grid", "100", "--out-dir", self.dir)
        self.assertEqual(code, 2)
        self.assertIn("at least 2", err)


class TestParser(CliFixture):
    """Test argument parsing."""

    def test_unknown_flag(self):
        """argparse errors exit with status 2."""
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(["screen", "--bogus"])
        self.assertEqual(ctx.exception.code, 2)

    def test_version(self):
        """--version prints the package version."""
        out = io.StringIO()
        with redirect_stdout(out):
            with self.assertRaises(SystemExit):
                main(["--version"])
        self.assertIn(__version__, out.getvalue())


if __name__ == "__main__":
    unittest.main()
