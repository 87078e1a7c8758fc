import json
import os
import unittest
from tempfile import TemporaryDirectory
from unittest import mock

import numpy as np
import numpy.testing as npt

from hustab import __version__, cli
from hustab.matrixfile import digest, parse_entry, write_matrix
from hustab.selftest import PropertyResult


def entries(rows):
    """Matrix (or vector) from the entry strings of a report."""
    if rows and isinstance(rows[0], list):
        return np.array([[parse_entry(z) for z in row] for row in rows])
    return np.array([parse_entry(z) for z in rows])


class TestCli(unittest.TestCase):
    """Test the hu-stab command line"""
    def setUp(self):
        self.tmpdir = TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)

    def matrix(self, name, mat):
        path = os.path.join(self.tmpdir.name, name)
        write_matrix(path, mat)
        return path

    def run_json(self, *argv):
        out = os.path.join(self.tmpdir.name, "report.json")
        code = cli.main([*argv, "--json", "--out", out])
        with open(out, "rt") as infh:
            return code, json.load(infh)

    def test_pinv(self):
        path = self.matrix("t.csv", np.diag([2.0, 1.0, 0.0]))
        code, report = self.run_json("pinv", path)
        self.assertEqual(code, 0)
        self.assertEqual(report["schema"], cli.SCHEMA)
        self.assertEqual(report["version"], __version__)
        self.assertEqual(report["method"], "formula23")
        self.assertEqual(report["inputs"]["t"]["sha256"], digest(path))
        npt.assert_allclose(entries(report["t_dagger"]), np.diag([0.5, 1.0, 0.0]), atol=1e-10)
        self.assertTrue(report["valid"])
        self.assertLess(report["oracle_delta"], 1e-10)
        self.assertEqual(len(report["penrose_residuals"]), 4)

    def test_pinv_methods(self):
        path = self.matrix("t.csv", np.ones((2, 2)))
        save = os.path.join(self.tmpdir.name, "dagger.mtx")
        for method in ("formula21", "formula23", "svd"):
            code, report = self.run_json("pinv", path, "--method", method, "--save", save)
            self.assertEqual(code, 0)
            npt.assert_allclose(entries(report["t_dagger"]), 0.25 * np.ones((2, 2)), atol=1e-10)
        self.assertTrue(os.path.exists(save))

    def test_stability(self):
        code, report = self.run_json("stability", self.matrix("t.csv", np.diag([3.0, 2.0, 0.0])),
                                     "--samples", "200")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(report["gamma"], 2.0)
        self.assertAlmostEqual(report["k_t"], 0.5)
        self.assertAlmostEqual(report["product"], 1.0)
        self.assertTrue(report["witness"]["checked"])
        self.assertLessEqual(report["witness"]["max_ratio"], 0.5 + 1e-8)
        self.assertLessEqual(report["witness"]["max_uniform_ratio"], report["witness"]["max_ratio"])
        npt.assert_allclose(entries(report["t_dagger"]), np.diag([1 / 3, 0.5, 0.0]), atol=1e-12)

    def test_stability_zero(self):
        code, report = self.run_json("stability", self.matrix("z.csv", np.zeros((2, 2))))
        self.assertEqual(code, 0)
        self.assertEqual(report["gamma"], "inf")
        self.assertEqual(report["k_t"], 0.0)
        self.assertEqual(report["product"], "undefined")

    def test_witness(self):
        code, report = self.run_json("witness", self.matrix("t.csv", np.diag([2.0, 0.0])),
                                     self.matrix("x.csv", [[1.0, 1.0]]))
        self.assertEqual(code, 0)
        npt.assert_allclose(entries(report["x0"]), [0.0, 1.0], atol=1e-14)
        self.assertAlmostEqual(report["ratio"], 0.5)
        self.assertTrue(report["in_null_space"])

    def test_geninv(self):
        code, report = self.run_json("geninv", self.matrix("t.csv", np.diag([1.0, 0.0, 0.0])), "--seed", "3")
        self.assertEqual(code, 0)
        self.assertEqual(report["seed"], 3)
        self.assertEqual(report["dims"], {"null_space": 2, "range": 1})
        self.assertTrue(report["matches_complements"])

    def test_perturb(self):
        t = self.matrix("t.csv", np.diag([1.0, 0.0]))
        code, report = self.run_json("perturb", t, self.matrix("dt.csv", np.diag([0.5, 0.0])))
        self.assertEqual(code, 0)
        self.assertTrue(report["gate"]["passed"])
        self.assertAlmostEqual(report["gate"]["value"], 0.5)
        self.assertTrue(all(report["conditions"].values()))
        self.assertAlmostEqual(report["k_t_bar"], 2 / 3)
        self.assertTrue(report["lipschitz"]["holds"])
        self.assertEqual(report["corollary"], "NullPreserving")
        npt.assert_allclose(entries(report["t_bar_dagger"]), np.diag([2 / 3, 0.0]), atol=1e-12)

    def test_perturb_zero(self):
        t = self.matrix("t.csv", np.diag([1.0, 0.0]))
        code, report = self.run_json("perturb", t, self.matrix("dt.csv", np.zeros((2, 2))), "--oblique")
        self.assertTrue(all(report["conditions"].values()))
        self.assertAlmostEqual(report["k_t_bar"], report["k_t"])

    def test_perturb_rank_jump(self):
        t = self.matrix("t.csv", np.diag([1.0, 0.0]))
        code, report = self.run_json("perturb", t, self.matrix("dt.csv", np.diag([0.0, 0.5])))
        self.assertEqual(code, 0)
        self.assertFalse(report["conditions"]["C4_trivial_intersection"])
        self.assertFalse(report["conditions"]["RankEqual"])
        self.assertIn("perturbed pseudoinverse not produced by formula", report["notes"])
        self.assertNotIn("t_bar_dagger", report)

    def test_perturb_tiny_rank_jump(self):
        t = self.matrix("t.csv", np.diag([1.0, 0.0]))
        code, report = self.run_json("perturb", t, self.matrix("dt.csv", np.diag([0.0, 1e-9])))
        self.assertEqual(code, 0)
        self.assertFalse(any(report["conditions"].values()))
        self.assertIn("perturbed pseudoinverse not produced by formula", report["notes"])

    def test_perturb_gate_failed(self):
        t = self.matrix("t.csv", np.diag([1.0, 0.0]))
        code, report = self.run_json("perturb", t, self.matrix("dt.csv", 2 * np.eye(2)))
        self.assertEqual(code, 0)
        self.assertFalse(report["gate"]["passed"])
        self.assertAlmostEqual(report["gate"]["value"], 2.0)

    def test_sweep(self):
        t = self.matrix("t.csv", np.diag([1.0, 0.0]))
        code, report = self.run_json("sweep", t, self.matrix("d.csv", np.diag([1.0, 0.0])),
                                     "--scales", "0.5,0.25,0.125")
        self.assertEqual(code, 0)
        self.assertEqual(report["verdict"], "Continuous")
        self.assertEqual([row["scale"] for row in report["rows"]], [0.5, 0.25, 0.125])
        code, report = self.run_json("sweep", t, self.matrix("d.csv", np.diag([0.0, 1.0])))
        self.assertEqual(report["verdict"], "Divergent")
        self.assertEqual(len(report["rows"]), len(cli.DEFAULT_SCALES))
        for row in report["rows"]:
            self.assertAlmostEqual(row["k_times_scale"], 1.0)

    def test_deterministic(self):
        t = self.matrix("t.csv", np.array([[1.0, 2.0, 0.5], [0.0, 1.0, 1.0]]))
        out = os.path.join(self.tmpdir.name, "report.json")
        outputs = []
        for _ in range(2):
            self.assertEqual(cli.main(["stability", t, "--seed", "5", "--json", "--out", out]), 0)
            with open(out, "rb") as infh:
                outputs.append(infh.read())
        self.assertEqual(outputs[0], outputs[1])

    def test_seed_variable(self):
        t = self.matrix("t.csv", np.eye(2))
        with mock.patch.dict(os.environ, {cli.SEED_VARIABLE: "7"}):
            _, report = self.run_json("stability", t)
            self.assertEqual(report["seed"], 7)
            _, report = self.run_json("stability", t, "--seed", "1")
            self.assertEqual(report["seed"], 1)
        with mock.patch.dict(os.environ, {cli.SEED_VARIABLE: "seven"}):
            self.assertEqual(cli.main(["stability", t]), 1)

    def test_tolerances(self):
        _, report = self.run_json("stability", self.matrix("t.csv", np.eye(2)), "--tol-eq", "1e-6")
        self.assertEqual(report["tolerances"], {"rank_rel": 1e-10, "eq_abs": 1e-6, "cond_max": 1e12})
        self.assertEqual(cli.main(["stability", self.matrix("u.csv", np.eye(2)), "--tol-rank", "2"]), 1)

    def test_errors(self):
        bad = os.path.join(self.tmpdir.name, "bad.csv")
        with open(bad, "wt") as outfh:
            print("1,2", file=outfh)
            print("3,oops", file=outfh)
        self.assertEqual(cli.main(["stability", bad]), 1)
        self.assertEqual(cli.main(["stability", os.path.join(self.tmpdir.name, "missing.csv")]), 1)
        t = self.matrix("t.csv", np.eye(2))
        self.assertEqual(cli.main(["perturb", t, self.matrix("dt.csv", np.zeros((3, 3)))]), 1)

    def test_text_output(self):
        out = os.path.join(self.tmpdir.name, "report.txt")
        self.assertEqual(cli.main(["stability", self.matrix("t.csv", np.diag([3.0, 2.0, 0.0])), "--out", out]), 0)
        with open(out, "rt") as infh:
            lines = infh.read().splitlines()
        self.assertIn("command: stability", lines)
        self.assertTrue(any(line.startswith("k_t: ") for line in lines))
        self.assertIn("t_dagger:", lines)

    def test_selftest_failure_exit(self):
        failing = [PropertyResult("broken", 3, 1, float("inf"))]
        with mock.patch.object(cli, "run_suite", return_value=failing):
            code, report = self.run_json("selftest")
        self.assertEqual(code, 1)
        self.assertFalse(report["all_passed"])
        self.assertEqual(report["properties"][0]["max_residual"], "inf")

    def test_selftest_passes(self):
        passing = [PropertyResult("fine", 5, 0, 1e-15)]
        with mock.patch.object(cli, "run_suite", return_value=passing) as run_suite:
            code, report = self.run_json("selftest", "--seed", "9")
        self.assertEqual(code, 0)
        self.assertTrue(report["all_passed"])
        self.assertEqual(run_suite.call_args[0][0], 9)


if __name__ == "__main__":
    unittest.main()
