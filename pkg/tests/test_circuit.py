#!/usr/bin/env python3
"""
Unit tests for circuit nodes, validity, evaluation, fingerprints and JSON
"""

import json
import os
import sys
import tempfile
import unittest

# Add the parent directory to the path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from bnspn.models.bayesnet import Variable
from bnspn.models.circuit import (
    Circuit,
    CircuitBuilder,
    ProductNode,
    Stage,
    SumNode,
    TerminalNode,
    check_valid,
    evaluate,
    fingerprint,
    node_counts,
    scope,
)
from bnspn.models.serialization import (
    bn_from_dict,
    bn_to_dict,
    circuit_from_dict,
    circuit_to_dict,
    load_model,
    save_circuit,
)
from bnspn.utils.errors import ModelError, ModelFormatError
from bnspn.verify.fixtures import example_bn

VARIABLES = (Variable("X"), Variable("Y"))


def mixture(weights=(0.3, 0.7)):
    """Two-component mixture of products of X and Y terminals"""
    builder = CircuitBuilder(VARIABLES)
    x1 = builder.terminal(0, [0.1, 0.9])
    y1 = builder.terminal(1, [0.8, 0.2])
    x2 = builder.terminal(0, [0.6, 0.4])
    y2 = builder.terminal(1, [0.5, 0.5])
    p1 = builder.product([x1, y1])
    p2 = builder.product([x2, y2])
    root = builder.sum([p1, p2], weights)
    return builder.build(root, Stage.SPN)


class TestNodes(unittest.TestCase):
    """Node-level validation"""

    def test_sum_weights_must_be_non_negative(self):
        with self.assertRaises(ModelError):
            SumNode((0, 1), (0.5, -0.5))

    def test_sum_weight_arity(self):
        with self.assertRaises(ModelError):
            SumNode((0, 1), (1.0,))

    def test_terminal_distribution_normalized(self):
        with self.assertRaises(ModelError):
            TerminalNode(0, (0.5, 0.6))

    def test_children_must_precede_parents(self):
        with self.assertRaises(ModelError):
            Circuit((ProductNode((1,)), TerminalNode(0, (0.5, 0.5))), 0, Stage.SPN, VARIABLES)

    def test_indicators_are_shared(self):
        builder = CircuitBuilder(VARIABLES)
        self.assertEqual(builder.indicator(0, 1), builder.indicator(0, 1))
        self.assertNotEqual(builder.indicator(0, 0), builder.indicator(0, 1))


class TestValidityAndEvaluation(unittest.TestCase):
    """Completeness, decomposability and bottom-up evaluation"""

    def setUp(self):
        self.spn = mixture()

    def test_mixture_is_valid(self):
        report = check_valid(self.spn)
        self.assertTrue(report.valid)
        self.assertEqual(report.violations, ())
        self.assertEqual(scope(self.spn, self.spn.root), frozenset({0, 1}))

    def test_incomplete_sum_reported(self):
        builder = CircuitBuilder(VARIABLES)
        x = builder.terminal(0, [0.5, 0.5])
        y = builder.terminal(1, [0.5, 0.5])
        bad = builder.build(builder.sum([x, y], [0.5, 0.5]), Stage.SPN)
        report = check_valid(bad)
        self.assertFalse(report.complete)
        self.assertTrue(report.decomposable)

    def test_non_decomposable_product_reported(self):
        builder = CircuitBuilder(VARIABLES)
        x1 = builder.terminal(0, [0.5, 0.5])
        x2 = builder.terminal(0, [0.2, 0.8])
        bad = builder.build(builder.product([x1, x2]), Stage.SPN)
        report = check_valid(bad)
        self.assertFalse(report.decomposable)
        self.assertEqual(len(report.violations), 1)

    def test_evaluate_full_and_partial_evidence(self):
        self.assertAlmostEqual(evaluate(self.spn, {0: 1, 1: 0}), 0.3 * 0.9 * 0.8 + 0.7 * 0.4 * 0.5)
        self.assertAlmostEqual(evaluate(self.spn, {0: 1}), 0.3 * 0.9 + 0.7 * 0.4)
        self.assertAlmostEqual(evaluate(self.spn, {}), 1.0)

    def test_evaluate_rejects_bad_evidence(self):
        with self.assertRaises(ModelError):
            evaluate(self.spn, {0: 2})
        with self.assertRaises(ModelError):
            evaluate(self.spn, {5: 0})

    def test_dangling_ref(self):
        with self.assertRaises(ModelError):
            self.spn[len(self.spn)]

    def test_node_counts(self):
        counts = node_counts(self.spn)
        self.assertEqual(counts["sum"], 1)
        self.assertEqual(counts["product"], 2)
        self.assertEqual(counts["terminal"], 4)


class TestFingerprint(unittest.TestCase):
    """Canonical hashing"""

    def test_identical_construction_same_fingerprint(self):
        self.assertEqual(fingerprint(mixture()), fingerprint(mixture()))

    def test_weights_change_fingerprint(self):
        self.assertNotEqual(fingerprint(mixture()), fingerprint(mixture((0.4, 0.6))))

    def test_product_child_order_ignored(self):
        builder = CircuitBuilder(VARIABLES)
        x = builder.terminal(0, [0.1, 0.9])
        y = builder.terminal(1, [0.8, 0.2])
        first = builder.build(builder.product([x, y]), Stage.SPN)
        builder = CircuitBuilder(VARIABLES)
        y = builder.terminal(1, [0.8, 0.2])
        x = builder.terminal(0, [0.1, 0.9])
        second = builder.build(builder.product([y, x]), Stage.SPN)
        self.assertEqual(fingerprint(first), fingerprint(second))


class TestSerialization(unittest.TestCase):
    """JSON documents for networks and circuits"""

    def test_bn_document(self):
        bn = example_bn(seed=1)
        data = bn_to_dict(bn)
        self.assertEqual(data["edges"], [["A", "B"], ["B", "E"], ["C", "D"], ["D", "E"]])
        restored = bn_from_dict(json.loads(json.dumps(data)))
        self.assertEqual(restored.dag, bn.dag)
        self.assertEqual(restored.cpts, bn.cpts)

    def test_circuit_document(self):
        spn = mixture()
        restored = circuit_from_dict(json.loads(json.dumps(circuit_to_dict(spn))))
        self.assertEqual(fingerprint(restored), fingerprint(spn))
        self.assertEqual(restored.root, spn.root)

    def test_load_model_detects_circuits(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "spn.json")
            save_circuit(mixture(), path)
            self.assertIsInstance(load_model(path), Circuit)

    def test_malformed_documents(self):
        with self.assertRaises(ModelFormatError):
            bn_from_dict({"variables": "nope"})
        with self.assertRaises(ModelFormatError):
            circuit_from_dict({"root": 0, "variables": [], "nodes": [{"id": 0, "type": "mystery"}]})
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w") as handle:
                handle.write("{not json")
            with self.assertRaises(ModelFormatError):
                load_model(path)

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            load_model("/nonexistent/model.json")


if __name__ == '__main__':
    unittest.main()
