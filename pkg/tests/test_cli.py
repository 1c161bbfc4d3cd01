# tests/test_cli.py

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout
from unittest.mock import MagicMock, patch

from app import config
from app.main import render_json, run, to_plain


def invoke(*argv):
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        status = run(list(argv))
    return status, buffer.getvalue()


class TestProfileCommands(unittest.TestCase):

    def test_partition_profile(self):
        status, out = invoke("profile", "partition", "--parts", "4,4,4,4,1,1,1")
        self.assertEqual(status, 0)
        result = json.loads(out)
        self.assertEqual(result["multipliers"], [1, 3, 3, 4])
        self.assertEqual(result["profile"]["minima"], [4.0, -3.0, -7.0])
        self.assertEqual(result["profile"]["maxima"], [0.0, -6.0])
        self.assertEqual(result["tiles"], 19.0)
        self.assertTrue(result["round_trip"])

    def test_failed_check_exits_one(self):
        status, out = invoke("profile", "check", "--minima", "1,-4", "--maxima", "-3", "--classical")
        self.assertEqual(status, 1)
        self.assertFalse(json.loads(out)["passed"])
        status, _ = invoke("profile", "check", "--minima", "1,-4", "--maxima", "-3")
        self.assertEqual(status, 0)

    def test_incommensurable_profile_exits_two(self):
        status, out = invoke("profile", "invert", "--minima", "2.5,-1", "--maxima", "0")
        self.assertEqual(status, 2)
        self.assertEqual(out, "")

    def test_csv_output(self):
        status, out = invoke("profile", "plot-data", "--minima", "1,-2", "--maxima", "-1", "--format", "csv")
        self.assertEqual(status, 0)
        lines = out.strip().split("\n")
        self.assertEqual(lines[0], "c,f")
        self.assertEqual(lines[1], "-3,3")
        self.assertEqual(len(lines), 7)

    def test_csv_needs_a_table(self):
        status, _ = invoke("profile", "energy", "--minima", "1,-2", "--maxima", "-1", "--format", "csv")
        self.assertEqual(status, 2)
        status, _ = invoke("profile", "energy", "--minima", "1,-2", "--json", "--format", "csv")
        self.assertEqual(status, 2)

    def test_output_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "energy.json")
            status, out = invoke("profile", "energy", "--minima", "1,-2", "--maxima", "-1", "--output", path)
            self.assertEqual(status, 0)
            self.assertEqual(out, "")
            with open(path) as handle:
                result = json.load(handle)
            self.assertEqual(result["energy"], -6.0)
            self.assertEqual(result["moments"][:3], [1.0, 0.0, 2.0])
            self.assertEqual(os.listdir(tmp), ["energy.json"])


class TestFieldCommands(unittest.TestCase):

    def test_constant_spectrum(self):
        status, out = invoke("lax", "spectrum", "--dim", "8", "--eps", "1", "--field", "const:1")
        self.assertEqual(status, 0)
        values = json.loads(out)["eigenvalues"]
        self.assertEqual(len(values), 8)
        for value, expected in zip(values, [1, 0, -1, -2, -3, -4, -5, -6]):
            self.assertAlmostEqual(value, expected)

    def test_cosine_hierarchy(self):
        status, out = invoke("lax", "hierarchy", "--field", "cos:0.5,0.3,2", "--lmax", "3")
        self.assertEqual(status, 0)
        result = json.loads(out)
        self.assertAlmostEqual(result["T"][2], 0.34)
        self.assertAlmostEqual(result["O3"], 3 * 0.08 - 3 * 0.5 * 0.34 + 0.125)

    def test_periodicity(self):
        status, out = invoke("multiphase", "periodicity", "--field", "phase:-6,-4.5,-3.5,-3,-1")
        self.assertEqual(status, 0)
        self.assertEqual(json.loads(out)["multipliers"], [1, 2])
        status, _ = invoke("multiphase", "periodicity", "--field", "phase:-6,-4.5,-3.5,-3,-1", "--eps", "0.3")
        self.assertEqual(status, 2)

    def test_unknown_field(self):
        status, _ = invoke("lax", "spectrum", "--field", "bogus")
        self.assertEqual(status, 2)

    def test_bad_cosine_mode(self):
        for field in ("cos:0.5,0.3,0", "cos:0.5,0.3,-2", "cos:0.5,0.3,1.5"):
            status, _ = invoke("lax", "spectrum", "--field", field)
            self.assertEqual(status, 2)

    def test_usage_error(self):
        with redirect_stdout(io.StringIO()), patch("sys.stderr", new=io.StringIO()):
            self.assertEqual(run(["lax", "transmogrify"]), 2)
            self.assertEqual(run(["lax", "spectrum"]), 2)


class TestQuantumCommands(unittest.TestCase):

    def test_block(self):
        status, out = invoke("quantum", "block", "--grade", "1")
        self.assertEqual(status, 0)
        result = json.loads(out)
        self.assertEqual(result["matrix"], [[0.0, 1.0], [2.0, -1.0]])
        self.assertEqual(result["basis"], [["(1)", 0], ["()", 1]])

    def test_exact_block(self):
        status, out = invoke("quantum", "block", "--grade", "1", "--a", "0.5", "--exact")
        self.assertEqual(status, 0)
        self.assertEqual(json.loads(out)["matrix"], [["1/2", "1"], ["2", "-1/2"]])

    def test_diag(self):
        status, out = invoke("quantum", "diag", "--degree", "2")
        self.assertEqual(status, 0)
        energies = {tuple(s["partition"]): s["O3"] for s in json.loads(out)["states"]}
        self.assertAlmostEqual(energies[(1, 1)], -36.0)
        self.assertAlmostEqual(energies[(2,)], 0.0)


class TestVerifyCommands(unittest.TestCase):

    @patch.dict(os.environ, {"BO_LAB_THREADS": "1"})
    def test_theorem1(self):
        status, out = invoke("verify", "theorem1", "--max-degree", "2")
        self.assertEqual(status, 0)
        result = json.loads(out)
        self.assertTrue(result["passed"])
        self.assertTrue(result["negative_control"]["failed"])

    @patch("tools.correspondence.verify_theorem1")
    def test_failed_report_exits_one(self, mock_verify):
        mock_verify.return_value = MagicMock(model_dump=MagicMock(return_value={"passed": False}))
        status, out = invoke("verify", "theorem1", "--max-degree", "1")
        self.assertEqual(status, 1)
        self.assertEqual(json.loads(out), {"passed": False})

    def test_part1(self):
        status, out = invoke("verify", "part1", "--field", "phase:-1,0,2;0", "--hbar", "0.5", "--samples", "64")
        self.assertEqual(status, 0)
        self.assertEqual(json.loads(out)["cycles"][0]["N_prime"], 2)


class TestOutputAndConfig(unittest.TestCase):

    def test_plain_values(self):
        self.assertEqual(to_plain(1 / 3), 0.333333333333333)
        self.assertEqual(to_plain(1 + 2j), {"re": 1.0, "im": 2.0})
        self.assertEqual(to_plain(float("inf")), float("inf"))
        self.assertEqual(render_json({"b": 1, "a": (2,)}), '{\n  "a": [\n    2\n  ],\n  "b": 1\n}\n')

    def test_thread_cap(self):
        with patch.dict(os.environ, {"BO_LAB_THREADS": "3"}):
            self.assertEqual(config.thread_cap(), 3)
            self.assertEqual(config.run_config(eps=0.5).threads, 3)
        with patch.dict(os.environ, {"BO_LAB_THREADS": "many"}):
            self.assertIsNone(config.thread_cap())
        with patch.dict(os.environ, {"BO_LAB_THREADS": "0"}):
            self.assertIsNone(config.thread_cap())

    def test_run_config_defaults(self):
        with patch.dict(os.environ, {}, clear=True):
            cfg = config.run_config(degree=None)
        self.assertEqual(cfg.degree, config.DEFAULT_DEGREE)
        self.assertIsNone(cfg.threads)
        self.assertEqual(cfg.format, "json")


if __name__ == "__main__":
    unittest.main()
