"""Tests for scripts/compare_reports.py."""

import importlib.util
import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

SCRIPT = Path(__file__).resolve().parent.parent / "scripts" / "compare_reports.py"
_spec = importlib.util.spec_from_file_location("compare_reports", SCRIPT)
compare_reports = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(compare_reports)


def report_doc(pa_d1: float, median_s: float = 4.0, model_id: str = "1a",
               rho: float = 0.5, p: int = 2000) -> dict:
    return {
        "preset": None,
        "model": {"model_id": model_id, "n": 200, "p": p, "rho": rho},
        "reports": {
            "dcsis": {
                "method": "dcsis",
                "model_id": model_id,
                "pa_table": {"d1": pa_d1, "d2": 1.0, "d3": 1.0},
                "s_quantiles": {"50%": median_s},
            }
        },
    }


class TestCompareReports(unittest.TestCase):
    """Test baseline comparison of simulation reports."""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, name: str, doc: dict) -> Path:
        path = self.dir / name
        path.write_text(json.dumps(doc))
        return path

    def run_main(self, *argv):
        out = io.StringIO()
        with redirect_stdout(out), redirect_stderr(io.StringIO()):
            code = compare_reports.main([str(a) for a in argv])
        return code, out.getvalue()

    def test_extract_report(self):
        """report.json normalizes to (model, method) -> Pa and median S."""
        doc = report_doc(0.9)
        metrics = compare_reports.extract_metrics(doc)
        self.assertEqual(metrics[("1a", "dcsis")]["pa"]["d1"], 0.9)
        self.assertEqual(metrics[("1a", "dcsis")]["median_s"], 4.0)
        self.assertEqual(compare_reports.case_of(doc), (0.5, 2000))

    def test_bundled_anchors_by_case(self):
        """Each (rho, p) case of the anchor file carries its own values."""
        doc = compare_reports.load_document(compare_reports.DEFAULT_ANCHORS)
        case1 = compare_reports.extract_metrics(compare_reports.find_anchor_case(doc, 0.5, 2000))
        case2 = compare_reports.extract_metrics(compare_reports.find_anchor_case(doc, 0.8, 2000))
        case4 = compare_reports.extract_metrics(compare_reports.find_anchor_case(doc, 0.8, 5000))
        self.assertEqual(case1[("1a", "dcsis")]["pa"]["d1"], 0.96)
        self.assertEqual(case1[("1b", "sis")]["median_s"], 1180.5)
        self.assertEqual(case1[("2", "dcsis")]["median_s"], 4.0)
        self.assertEqual(case2[("1a", "dcsis")]["pa"]["d1"], 0.77)
        self.assertEqual(case2[("3b", "dcsis")]["median_s"], 4.0)
        self.assertEqual(case4[("1b", "dcsis")]["median_s"], 11.0)
        self.assertIsNone(compare_reports.find_anchor_case(doc, 0.5, 500))

    def test_regression_fails_when_asked(self):
        """A Pa drop beyond the threshold exits 1 only with --fail-on-regression."""
        base = self.write("base.json", report_doc(0.95))
        curr = self.write("curr.json", report_doc(0.80))
        code, out = self.run_main(base, curr)
        self.assertEqual(code, 0)
        self.assertIn("REGRESSION", out)
        code, _ = self.run_main(base, curr, "--fail-on-regression")
        self.assertEqual(code, 1)

    def test_small_change_passes(self):
        """Changes within the threshold pass."""
        base = self.write("base.json", report_doc(0.95))
        curr = self.write("curr.json", report_doc(0.93))
        code, out = self.run_main(base, curr, "--fail-on-regression")
        self.assertEqual(code, 0)
        self.assertIn("STATUS: PASS", out)

    def test_default_baseline_is_anchors(self):
        """One argument compares against the anchor case of the report."""
        curr = self.write("curr.json", report_doc(0.97))
        code, out = self.run_main(curr, "-f")
        self.assertEqual(code, 0)
        self.assertIn("Anchor case: 1", out)
        self.assertIn("MISSING", out)
        self.assertNotIn("model 1b", out)

    def test_second_case_uses_its_own_anchor(self):
        """A rho=0.8 report is read against the rho=0.8 values, not case 1."""
        curr = self.write("curr.json", report_doc(0.85, rho=0.8))
        code, out = self.run_main(curr, "--fail-on-regression")
        self.assertEqual(code, 0)
        self.assertIn("Anchor case: 2", out)
        self.assertIn("0.77 -> 0.85", out)
        self.assertNotIn("STATUS: REGRESSION", out)

    def test_no_anchor_for_case(self):
        """A desk-scale report has no anchor unless --anchor-p picks one."""
        curr = self.write("curr.json", report_doc(0.50, p=500))
        code, out = self.run_main(curr, "--fail-on-regression")
        self.assertEqual(code, 0)
        self.assertIn("NO ANCHOR", out)
        code, out = self.run_main(curr, "--fail-on-regression", "--anchor-p", "2000")
        self.assertEqual(code, 1)
        self.assertIn("REGRESSION", out)

    def test_missing_file(self):
        """A missing report exits 1."""
        code, _ = self.run_main(self.dir / "absent.json")
        self.assertEqual(code, 1)


if __name__ == "__main__":
    unittest.main()
