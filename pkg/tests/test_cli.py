#!/usr/bin/env python3
"""
Tests for the command-line front end
"""

import io
import json
import os
import sys
import tempfile
import unittest
from unittest.mock import patch

import pandas as pd

# Add the parent directory to the path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from bnspn.cli import export_dot, main
from bnspn.models.circuit import Circuit
from bnspn.models.serialization import load_bn, load_circuit, save_bn
from bnspn.verify.fixtures import example_bn, hmm_bn


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.bn_path = os.path.join(self.tmp.name, "example.json")
        save_bn(example_bn(seed=1), self.bn_path)

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def run_cli(self, *argv):
        with patch('sys.stdout', new_callable=io.StringIO) as out, \
                patch('sys.stderr', new_callable=io.StringIO) as err:
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()


class TestModelVerbs(CliTestCase):
    """compile, decompile and roundtrip"""

    def test_compile_then_decompile(self):
        spn_path = self.path("spn.json")
        code, _, _ = self.run_cli("compile", "--bn", self.bn_path, "--out", spn_path)
        self.assertEqual(code, 0)
        self.assertIsInstance(load_circuit(spn_path), Circuit)

        bn_out = self.path("decompiled.json")
        code, _, _ = self.run_cli("decompile", "--spn", spn_path, "--out", bn_out)
        self.assertEqual(code, 0)
        self.assertEqual(load_bn(bn_out).names, ["Z1", "Z2", "Z3", "Z4", "E"])

    def test_roundtrip_reports_closure_edges(self):
        code, out, _ = self.run_cli("roundtrip", "--bn", self.bn_path, "--order", "E,D,C,B,A")
        self.assertEqual(code, 0)
        report = json.loads(out)
        self.assertIn(["B", "D"], report["edges"])
        self.assertIn(["B", "C"], report["edges"])
        self.assertTrue(report["closure_match"])
        self.assertEqual(report["correspondence"]["Z2"], "B")

    def test_sigma_by_index(self):
        code, out, _ = self.run_cli("roundtrip", "--bn", self.bn_path, "--sigma", "4,3,2,1,0")
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["closure_match"])

    def test_missing_file_is_input_error(self):
        code, _, err = self.run_cli("compile", "--bn", self.path("absent.json"))
        self.assertEqual(code, 2)
        self.assertIn("FileNotFoundError", err)

    def test_malformed_file_is_input_error(self):
        broken = self.path("broken.json")
        with open(broken, "w") as handle:
            handle.write("[1, 2")
        code, _, _ = self.run_cli("decompile", "--spn", broken)
        self.assertEqual(code, 2)

    def test_bad_sigma_is_input_error(self):
        code, _, _ = self.run_cli("compile", "--bn", self.bn_path, "--order", "E,D")
        self.assertEqual(code, 2)

    def test_default_order_is_reversed_smallest_topological_order(self):
        for extra in ((), ("--order", "reverse-topo")):
            code, out, _ = self.run_cli("roundtrip", "--bn", self.bn_path, *extra)
            self.assertEqual(code, 0)
            report = json.loads(out)
            self.assertIn(["B", "D"], report["edges"])
            self.assertIn(["B", "C"], report["edges"])
            self.assertTrue(report["closure_match"])

    def test_marginalize_choices(self):
        code, out, _ = self.run_cli("roundtrip", "--bn", self.bn_path, "--marginalize", "A,B,C,D")
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["closure_match"])
        spn_path = self.path("plain.json")
        code, _, _ = self.run_cli("compile", "--bn", self.bn_path, "--marginalize", "none", "--out", spn_path)
        self.assertEqual(code, 0)
        self.assertEqual(len(load_circuit(spn_path).variables), 5)
        code, _, err = self.run_cli("compile", "--bn", self.bn_path, "--marginalize", "Q")
        self.assertEqual(code, 2)
        self.assertIn("error:", err)

    def test_dot_side_outputs(self):
        spn_path, spn_dot, bn_dot = self.path("spn.json"), self.path("spn.dot"), self.path("bn.dot")
        code, _, _ = self.run_cli("compile", "--bn", self.bn_path, "--out", spn_path, "--dot", spn_dot)
        self.assertEqual(code, 0)
        with open(spn_dot) as handle:
            self.assertIn("digraph", handle.read())
        code, _, _ = self.run_cli("decompile", "--spn", spn_path, "--regions", "global", "--dot", bn_dot)
        self.assertEqual(code, 0)
        with open(bn_dot) as handle:
            self.assertIn("Z1", handle.read())
        code, _, _ = self.run_cli("decompile", "--spn", spn_path, "--region-mode", "layer-local")
        self.assertEqual(code, 0)


class TestVerifyVerbs(CliTestCase):
    """verify table and verify lemma"""

    def test_table_n3(self):
        report = self.path("n3.csv")
        code, out, _ = self.run_cli("verify", "table", "--n", "3", "--report", report)
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith("6 trials, "))
        self.assertTrue(os.path.exists(report))

    def test_table_n2(self):
        code, out, _ = self.run_cli("verify", "table", "--n", "2", "--seed", "5")
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), "1 trials, 1 matches")

    def test_table_minimality_column(self):
        report = self.path("n3.csv")
        code, _, _ = self.run_cli("verify", "table", "--n", "3", "--orderings", "rev-topo",
                                  "--minimality", "--report", report)
        self.assertEqual(code, 0)
        frame = pd.read_csv(report)
        self.assertEqual(frame["minimal_imap"].tolist(), (frame["added_edges"] == 0).tolist())

    @patch("bnspn.verify.coordinator.verify_moral_closure", side_effect=KeyError("lost"))
    def test_table_reports_crashed_trials(self, _mocked):
        code, out, err = self.run_cli("verify", "table", "--n", "3")
        self.assertEqual(code, 1)
        self.assertTrue(out.startswith("6 trials, 0 matches"))
        self.assertIn("6 trials crashed", err)
        self.assertIn("KeyError", err)
        self.assertIn("4 of 4 must-pass trials failed", err)

    def test_table_out_of_range(self):
        code, _, _ = self.run_cli("verify", "table", "--n", "8")
        self.assertEqual(code, 2)

    def test_lemma_on_hmm(self):
        hmm_path = self.path("hmm.json")
        save_bn(hmm_bn(3, seed=2), hmm_path)
        code, out, _ = self.run_cli("verify", "lemma", "--bn", hmm_path, "--sigma", "O1,O2,O3,H3,H2,H1")
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["passed"])


class TestUtilityVerbs(CliTestCase):
    """enumerate and export-dot"""

    def test_enumerate_writes_family(self):
        out_dir = self.path("family")
        code, out, _ = self.run_cli("enumerate", "--n", "3", "--out", out_dir)
        self.assertEqual(code, 0)
        self.assertEqual(sorted(os.listdir(out_dir)), ["bn_0.json", "bn_1.json", "bn_2.json"])
        self.assertIn("3 networks written", out)
        self.assertEqual(load_bn(os.path.join(out_dir, "bn_2.json")).dag.edges, {(0, 1), (0, 2), (1, 2)})

    def test_export_dot_for_bn(self):
        text = export_dot(self.bn_path)
        self.assertEqual(text.count(" -> "), 4)
        self.assertIn("digraph", text)

    def test_export_dot_for_circuit(self):
        spn_path = self.path("spn.json")
        self.run_cli("compile", "--bn", self.bn_path, "--out", spn_path)
        dot_path = self.path("spn.dot")
        code, _, _ = self.run_cli("export-dot", "--model", spn_path, "--out", dot_path)
        self.assertEqual(code, 0)
        with open(dot_path) as handle:
            self.assertIn("+", handle.read())


if __name__ == '__main__':
    unittest.main()
