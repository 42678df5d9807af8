#!/usr/bin/env python3
"""
Tests for the verification harness: roundtrips, closure checks, lemma and sweeps
"""

import os
import sys
import tempfile
import unittest
from unittest.mock import patch

import pandas as pd

# Add the parent directory to the path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from bnspn.graph.dag import moral_closure, reverse_topological_orderings
from bnspn.models.bayesnet import Variable, is_imap, is_minimal_imap, iter_family, random_cpts
from bnspn.models.circuit import CircuitBuilder, Stage
from bnspn.compiler import bn2spn
from bnspn.decompiler import augmented_joint
from bnspn.monitoring.trial_monitor import TrialMonitor
from bnspn.utils.errors import CompilationError, GraphError, error_handler
from bnspn.verify import (
    MarginalizationPolicy,
    OrderingMode,
    TrialCoordinator,
    TrialTask,
    chain_bn,
    example_bn,
    hmm_bn,
    node1_last_orderings,
    plan_table_experiment,
    reference_order,
    resolve_marginalized,
    roundtrip,
    roundtrip_report,
    run_table_experiment,
    verify_idempotence,
    verify_lemma,
    verify_moral_closure,
)
from bnspn.verify.experiments import _nth_node1_last

EXAMPLE_SIGMA = (4, 3, 2, 1, 0)
HMM_SIGMA = (3, 4, 5, 2, 1, 0)


class TestRoundtrip(unittest.TestCase):
    """Compile, decompile and map back through provenance"""

    def test_internal_policy_marginalizes_parents(self):
        self.assertEqual(resolve_marginalized(example_bn()), {0, 1, 2, 3})
        self.assertEqual(resolve_marginalized(example_bn(), MarginalizationPolicy.NONE), frozenset())
        self.assertEqual(resolve_marginalized(example_bn(), MarginalizationPolicy.EXPLICIT, [1]), {1})
        with self.assertRaises(GraphError):
            resolve_marginalized(example_bn(), MarginalizationPolicy.EXPLICIT)

    def test_hmm_roundtrip_returns_hmm(self):
        bn = hmm_bn(3, seed=1)
        decompiled, correspondence = roundtrip(bn, HMM_SIGMA)
        self.assertEqual(correspondence.map_edges(decompiled.dag), bn.dag.edges)

    def test_example_roundtrip_returns_closure(self):
        bn = example_bn(seed=2)
        decompiled, correspondence = roundtrip(bn, EXAMPLE_SIGMA)
        self.assertEqual(correspondence.mapping, {0: 0, 1: 1, 2: 2, 3: 3, 4: 4})
        self.assertEqual(
            correspondence.map_edges(decompiled.dag),
            {(0, 1), (1, 4), (2, 3), (3, 4), (1, 3), (1, 2)},
        )

    def test_single_edge_roundtrip(self):
        bn = chain_bn(2, seed=3)
        decompiled, correspondence = roundtrip(bn, (1, 0))
        self.assertEqual(correspondence.map_edges(decompiled.dag), {(0, 1)})

    def test_report_names_edges_by_original_variables(self):
        report = roundtrip_report(example_bn(seed=4), EXAMPLE_SIGMA)
        self.assertIn(("B", "D"), report.edges)
        self.assertIn(("B", "C"), report.edges)
        self.assertTrue(report.closure_match)
        self.assertEqual(report.correspondence["Z1"], "A")


class TestMoralClosureChecks(unittest.TestCase):
    """Per-trial closure comparison and idempotence"""

    def test_reference_order(self):
        dag = example_bn().dag
        self.assertEqual(reference_order(dag, EXAMPLE_SIGMA), (0, 1, 2, 3, 4))
        self.assertEqual(reference_order(dag, (4, 1, 0, 3, 2)), (2, 3, 0, 1, 4))
        self.assertEqual(reference_order(dag, (0, 1, 2, 3, 4)), (0, 1, 2, 3, 4))

    def test_every_reverse_topological_order_matches(self):
        bn = example_bn(seed=5)
        for sigma in reverse_topological_orderings(bn.dag):
            record = verify_moral_closure(bn, sigma)
            self.assertTrue(record.sigma_is_reverse_topological)
            self.assertTrue(record.closure_match, f"{sigma}: {record.notes}")
            self.assertGreaterEqual(record.added_edges, 2)

    def test_non_reverse_topological_order_normalizes_locally(self):
        record = verify_moral_closure(chain_bn(3, seed=6), (1, 2, 0))
        self.assertFalse(record.sigma_is_reverse_topological)
        self.assertTrue(record.normalized)
        self.assertIsInstance(record.closure_match, bool)
        self.assertNotIn("CompilationError", record.notes)
        self.assertFalse(record.must_pass)

    def test_reverse_topological_order_never_normalizes(self):
        with patch("bnspn.verify.roundtrip.roundtrip", side_effect=CompilationError("unnormalized sum weights")) as mocked:
            record = verify_moral_closure(example_bn(seed=6), EXAMPLE_SIGMA)
        mocked.assert_called_once()
        self.assertFalse(record.normalized)
        self.assertFalse(record.closure_match)
        self.assertIn("CompilationError", record.notes)
        self.assertTrue(record.must_pass)

    def test_minimality_column(self):
        record = verify_moral_closure(chain_bn(3, seed=9), (2, 1, 0), check_minimality=True)
        self.assertTrue(record.minimal_imap)
        record = verify_moral_closure(example_bn(seed=9), EXAMPLE_SIGMA, check_minimality=True)
        self.assertFalse(record.minimal_imap)
        self.assertIsNone(verify_moral_closure(example_bn(seed=9), EXAMPLE_SIGMA).minimal_imap)

    def test_chain_matches_with_no_added_edges(self):
        record = verify_moral_closure(chain_bn(5, seed=7), (4, 3, 2, 1, 0))
        self.assertTrue(record.closure_match)
        self.assertEqual(record.added_edges, 0)
        self.assertTrue(record.must_pass)

    def test_idempotence(self):
        self.assertTrue(verify_idempotence(example_bn(seed=8), EXAMPLE_SIGMA))
        self.assertTrue(verify_idempotence(hmm_bn(3, seed=8), HMM_SIGMA))

    def test_decompiled_dag_minimality_tracks_added_edges(self):
        bn = chain_bn(3, seed=9)
        decompiled, _ = roundtrip(bn, (2, 1, 0))
        joint = augmented_joint(decompiled)
        self.assertTrue(is_imap(decompiled.dag, joint))
        self.assertTrue(is_minimal_imap(decompiled.dag, joint))

        bn = example_bn(seed=9)
        decompiled, _ = roundtrip(bn, EXAMPLE_SIGMA)
        joint = augmented_joint(decompiled)
        self.assertTrue(is_imap(decompiled.dag, joint))
        self.assertFalse(is_minimal_imap(decompiled.dag, joint))

    def test_closure_fed_back_is_unchanged(self):
        bn = example_bn(seed=10)
        closure = moral_closure(bn.dag, reference_order(bn.dag, EXAMPLE_SIGMA))
        closure_bn = random_cpts(closure, bn.cardinalities, 10, bn.names)
        decompiled, correspondence = roundtrip(closure_bn, EXAMPLE_SIGMA)
        self.assertEqual(correspondence.map_edges(decompiled.dag), closure.edges)


class TestLemma(unittest.TestCase):
    """P(Z | ancestor latents) against P(Z | conditioning latents)"""

    def test_hmm_passes(self):
        report = verify_lemma(bn2spn(hmm_bn(3, seed=11), HMM_SIGMA, {0, 1, 2}))
        self.assertTrue(report.passed)
        self.assertEqual(len(report.latents), 3)
        z3 = report.latents[2]
        self.assertEqual(z3.ancestors, ["Z1", "Z2"])
        self.assertEqual(z3.conditioning, ["Z2"])

    def test_example_passes(self):
        report = verify_lemma(bn2spn(example_bn(seed=12), EXAMPLE_SIGMA, {0, 1, 2, 3}))
        self.assertTrue(report.passed)
        self.assertLessEqual(report.max_deviation, 1e-9)

    def test_single_sum_trivially_passes(self):
        builder = CircuitBuilder((Variable("X"),))
        a = builder.terminal(0, [0.1, 0.9])
        b = builder.terminal(0, [0.7, 0.3])
        report = verify_lemma(builder.build(builder.sum([a, b], [0.5, 0.5]), Stage.SPN))
        self.assertTrue(report.passed)
        self.assertEqual(report.latents[0].ancestors, [])
        self.assertEqual(report.max_deviation, 0.0)


class TestTableExperiment(unittest.TestCase):
    """Enumeration sweeps and their bookkeeping"""

    def test_planned_counts(self):
        expected = {2: (1, 1, 1), 3: (3, 2, 6), 4: (21, 6, 126), 5: (315, 24, 7560)}
        for n, counts in expected.items():
            plan = plan_table_experiment(n)
            self.assertEqual((plan["bn_count"], plan["ordering_count"], plan["trial_count"]), counts)

    def test_node1_last_decoding(self):
        self.assertEqual([_nth_node1_last(4, i) for i in range(6)], node1_last_orderings(4))
        self.assertEqual(node1_last_orderings(3), [(1, 2, 0), (2, 1, 0)])

    def test_n2_single_trial(self):
        summary = run_table_experiment(2)
        self.assertEqual((summary.bn_count, summary.ordering_count, summary.trial_count), (1, 1, 1))
        self.assertEqual(summary.match_count, 1)
        self.assertTrue(summary.passed)

    def test_n3_sweep(self):
        summary = run_table_experiment(3, check_idempotence=True)
        self.assertEqual(summary.trial_count, 6)
        self.assertEqual(summary.must_pass_count, 4)
        self.assertEqual(summary.must_pass_failures, 0)
        self.assertGreaterEqual(summary.match_count, 4)
        self.assertEqual(summary.headline(), f"6 trials, {summary.match_count} matches")
        self.assertEqual(summary.normalized_count, 2)
        self.assertTrue(summary.passed)
        for record in summary.records:
            if record.must_pass:
                self.assertTrue(record.idempotent)
                self.assertFalse(record.normalized)
            else:
                self.assertTrue(record.normalized)
        self.assertEqual([r.bn_index for r in summary.records], [0, 0, 1, 1, 2, 2])

    def test_n4_reverse_topological_sweep(self):
        summary = run_table_experiment(4, mode=OrderingMode.REV_TOPO, check_idempotence=True)
        self.assertEqual(summary.trial_count, plan_table_experiment(4, OrderingMode.REV_TOPO)["trial_count"])
        self.assertEqual(summary.must_pass_count, summary.trial_count)
        self.assertEqual(summary.match_count, summary.trial_count)
        self.assertTrue(all(r.idempotent for r in summary.records))

    def test_sampling(self):
        summary = run_table_experiment(4, sample=10, seed=3)
        self.assertTrue(summary.sampled)
        self.assertEqual(summary.trial_count, 10)
        pairs = {(r.bn_index, r.sigma) for r in summary.records}
        self.assertEqual(len(pairs), 10)
        for record in summary.records:
            self.assertIn(record.sigma, node1_last_orderings(4))
        again = run_table_experiment(4, sample=10, seed=3)
        self.assertEqual([r.to_dict() for r in again.records], [r.to_dict() for r in summary.records])

    def test_csv_report(self):
        summary = run_table_experiment(3)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "report.csv")
            summary.write_report(path)
            frame = pd.read_csv(path)
        self.assertEqual(len(frame), 6)
        self.assertIn("closure_match", frame.columns)
        self.assertIn("sigma_is_reverse_topological", frame.columns)
        self.assertEqual(int(frame["closure_match"].sum()), summary.match_count)
        self.assertEqual(int(frame["normalized"].sum()), 2)
        self.assertIn("minimal_imap", frame.columns)

    def test_bounds(self):
        with self.assertRaises(GraphError):
            run_table_experiment(1)
        with self.assertRaises(GraphError):
            run_table_experiment(7)
        with self.assertRaises(GraphError):
            run_table_experiment(3, sample=0)


class TestMustPassGates(unittest.TestCase):
    """Crashes and idempotence failures count against the sweep"""

    def setUp(self):
        error_handler.reset()

    def tearDown(self):
        error_handler.reset()

    @patch("bnspn.verify.coordinator.verify_moral_closure", side_effect=KeyError("lost"))
    def test_crashed_trials_keep_their_classification(self, _mocked):
        summary = run_table_experiment(3)
        self.assertEqual(summary.trial_count, 6)
        self.assertEqual(summary.must_pass_count, 4)
        self.assertEqual(summary.must_pass_failures, 4)
        self.assertEqual(summary.match_count, 0)
        self.assertFalse(summary.passed)
        self.assertTrue(all(r.notes.startswith("KeyError") for r in summary.records))
        self.assertEqual(error_handler.get_error_summary()["error_types"], {"KeyError": 6})

    @patch("bnspn.verify.coordinator.verify_idempotence", return_value=False)
    def test_idempotence_failures_fail_the_sweep(self, _mocked):
        summary = run_table_experiment(3, check_idempotence=True)
        self.assertEqual(summary.must_pass_failures, 0)
        self.assertEqual(summary.idempotence_failures, 4)
        self.assertFalse(summary.passed)
        self.assertTrue(summary.headline().endswith(", 4 not idempotent"))
        self.assertEqual(summary.to_dict()["idempotence_failures"], 4)


class TestFamilySweeps(unittest.TestCase):
    """Every family member up to four nodes under every reverse-topological order"""

    def test_minimal_exactly_when_closure_adds_nothing(self):
        for n in (2, 3, 4):
            summary = run_table_experiment(n, mode=OrderingMode.REV_TOPO, check_minimality=True)
            self.assertTrue(summary.passed)
            for record in summary.records:
                self.assertTrue(record.closure_match, record.notes)
                self.assertIsNotNone(record.minimal_imap)
                self.assertEqual(record.minimal_imap, record.added_edges == 0,
                                 f"n={n} bn={record.bn_index} sigma={record.sigma}")

    def test_lemma_holds_on_every_pipeline(self):
        for n in (2, 3, 4):
            for index, dag in enumerate(iter_family(n)):
                bn = random_cpts(dag, [2] * n, index)
                marg = resolve_marginalized(bn)
                for sigma in reverse_topological_orderings(dag):
                    report = verify_lemma(bn2spn(bn, sigma, marg))
                    self.assertTrue(report.passed, f"n={n} bn={index} sigma={sigma}")


class TestTrialCoordinator(unittest.TestCase):
    """Serial execution with metrics"""

    def test_metrics_and_monitor(self):
        monitor = TrialMonitor()
        coordinator = TrialCoordinator(jobs=1, monitor=monitor)
        tasks = [TrialTask(n=3, bn_index=1, sigma=sigma) for sigma in node1_last_orderings(3)]
        results = coordinator.execute(tasks)
        self.assertTrue(results[0].record.normalized)
        self.assertTrue(results[1].record.closure_match)
        mismatches = sum(1 for r in results if not r.record.closure_match)
        metrics = coordinator.get_performance_metrics()
        self.assertEqual(metrics['total_trials'], 2)
        self.assertEqual(metrics['successful_trials'], 2)
        self.assertEqual(metrics['monitor']['count'], 2)
        self.assertEqual(metrics['monitor']['mismatches'], mismatches)
        self.assertEqual(metrics['monitor']['must_pass_failures'], 0)

    def test_empty_task_list(self):
        self.assertEqual(TrialCoordinator().execute([]), [])


if __name__ == '__main__':
    unittest.main()
