#!/usr/bin/env python3
"""
Unit tests for DAG utilities: d-separation, orderings and moral closure
"""

import itertools
import os
import sys
import unittest

# Add the parent directory to the path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from bnspn.graph.dag import (
    Dag,
    d_separated,
    d_separated_by_paths,
    default_elimination_order,
    is_topological,
    moral_closure,
    moralization_edges,
    relatives,
    reverse_topological_orderings,
    v_structures,
    validate_ordering,
)
from bnspn.models.bayesnet import iter_family
from bnspn.utils.errors import GraphError

# A -> B -> E <- D <- C
A, B, C, D, E = range(5)
EXAMPLE = Dag.from_edges(5, [(A, B), (B, E), (C, D), (D, E)])


class TestDagConstruction(unittest.TestCase):
    """Validation on construction"""

    def test_rejects_cycle(self):
        with self.assertRaises(GraphError):
            Dag.from_edges(3, [(0, 1), (1, 2), (2, 0)])

    def test_rejects_self_loop(self):
        with self.assertRaises(GraphError):
            Dag(2, frozenset({(1, 1)}))

    def test_rejects_out_of_range_node(self):
        with self.assertRaises(GraphError):
            Dag.from_edges(2, [(0, 2)])

    def test_rejects_duplicate_edges(self):
        with self.assertRaises(GraphError):
            Dag.from_edges(2, [(0, 1), (0, 1)])

    def test_backward_edges_without_cycle_are_fine(self):
        dag = Dag.from_edges(3, [(2, 0), (0, 1)])
        self.assertEqual(dag.parents(0), [2])
        self.assertEqual(dag.children(0), [1])

    def test_relatives(self):
        rel = relatives(EXAMPLE, D)
        self.assertEqual(rel.parents, {C})
        self.assertEqual(rel.children, {E})
        self.assertEqual(rel.ancestors, {C})
        self.assertEqual(rel.descendants, {E})

    def test_connectivity(self):
        self.assertTrue(EXAMPLE.is_connected())
        self.assertFalse(Dag.from_edges(3, [(0, 1)]).is_connected())

    def test_v_structures(self):
        self.assertEqual(v_structures(EXAMPLE), {(B, E, D)})
        self.assertEqual(v_structures(Dag.from_edges(3, [(0, 1), (1, 2)])), set())


class TestDSeparation(unittest.TestCase):
    """Reachability d-separation against known cases and path enumeration"""

    def test_chain(self):
        chain = Dag.from_edges(3, [(0, 1), (1, 2)])
        self.assertFalse(d_separated(chain, {0}, set(), {2}))
        self.assertTrue(d_separated(chain, {0}, {1}, {2}))

    def test_fork(self):
        fork = Dag.from_edges(3, [(1, 0), (1, 2)])
        self.assertFalse(d_separated(fork, {0}, set(), {2}))
        self.assertTrue(d_separated(fork, {0}, {1}, {2}))

    def test_collider_and_descendant(self):
        collider = Dag.from_edges(4, [(0, 2), (1, 2), (2, 3)])
        self.assertTrue(d_separated(collider, {0}, set(), {1}))
        self.assertFalse(d_separated(collider, {0}, {2}, {1}))
        self.assertFalse(d_separated(collider, {0}, {3}, {1}))

    def test_agrees_with_path_enumeration(self):
        for labels in itertools.product(range(4), repeat=EXAMPLE.node_count):
            x = {v for v, lab in enumerate(labels) if lab == 1}
            y = {v for v, lab in enumerate(labels) if lab == 2}
            z = {v for v, lab in enumerate(labels) if lab == 3}
            if not x or not y:
                continue
            self.assertEqual(
                d_separated(EXAMPLE, x, z, y),
                d_separated_by_paths(EXAMPLE, x, z, y),
                f"x={x} z={z} y={y}",
            )

    def test_overlapping_sets_rejected(self):
        with self.assertRaises(GraphError):
            d_separated(EXAMPLE, {A}, {A}, {E})
        with self.assertRaises(GraphError):
            d_separated(EXAMPLE, set(), set(), {E})


class TestOrderings(unittest.TestCase):
    """Topological and reverse-topological orderings"""

    def test_validate_ordering(self):
        self.assertEqual(validate_ordering([2, 0, 1], 3), (2, 0, 1))
        with self.assertRaises(GraphError):
            validate_ordering([0, 0, 1], 3)
        with self.assertRaises(GraphError):
            validate_ordering([0, 1], 3)

    def test_is_topological(self):
        self.assertTrue(is_topological(EXAMPLE, (A, B, C, D, E)))
        self.assertTrue(is_topological(EXAMPLE, (C, D, A, B, E)))
        self.assertFalse(is_topological(EXAMPLE, (E, D, C, B, A)))

    def test_reverse_topological_orderings_of_chain(self):
        chain = Dag.from_edges(3, [(0, 1), (1, 2)])
        self.assertEqual(reverse_topological_orderings(chain), [(2, 1, 0)])

    def test_every_reverse_topological_ordering_reverses_to_topological(self):
        orders = reverse_topological_orderings(EXAMPLE)
        self.assertIn((E, D, C, B, A), orders)
        self.assertEqual(len(orders), len(set(orders)))
        for order in orders:
            self.assertTrue(is_topological(EXAMPLE, tuple(reversed(order))))
        # E first, then the interleavings of B before A with D before C
        self.assertEqual(len(orders), 6)

    def test_default_elimination_order_reverses_smallest_topological_order(self):
        self.assertEqual(default_elimination_order(EXAMPLE), (E, D, C, B, A))
        self.assertIn(default_elimination_order(EXAMPLE), reverse_topological_orderings(EXAMPLE))
        self.assertIsNone(default_elimination_order(Dag(0)))


class TestMoralClosure(unittest.TestCase):
    """Directed moralization to a fixpoint"""

    def test_worked_example_closure(self):
        closure = moral_closure(EXAMPLE, (A, B, C, D, E))
        self.assertEqual(closure.edges, {(A, B), (B, E), (C, D), (D, E), (B, D), (B, C)})

    def test_first_pass_only_links_co_parents(self):
        self.assertEqual(moralization_edges(EXAMPLE, (A, B, C, D, E)), {(B, D)})

    def test_orientation_follows_reference_order(self):
        closure = moral_closure(EXAMPLE, (C, D, A, B, E))
        self.assertEqual(closure.edges, {(A, B), (B, E), (C, D), (D, E), (D, B), (D, A)})

    def test_closure_is_idempotent(self):
        closure = moral_closure(EXAMPLE, (A, B, C, D, E))
        self.assertEqual(moral_closure(closure, (A, B, C, D, E)), closure)

    def test_closure_is_a_fixpoint_across_family(self):
        for n in range(2, 6):
            for dag in iter_family(n):
                for prec in (tuple(range(n)), tuple(reversed(reverse_topological_orderings(dag)[-1]))):
                    closure = moral_closure(dag, prec)
                    self.assertEqual(moralization_edges(closure, prec), set())
                    self.assertEqual(moral_closure(closure, prec), closure)
                    self.assertTrue(dag.edges <= closure.edges)
                    self.assertTrue(is_topological(closure, prec))

    def test_chain_is_its_own_closure(self):
        chain = Dag.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        self.assertEqual(moral_closure(chain, (0, 1, 2, 3)), chain)

    def test_non_topological_reference_rejected(self):
        with self.assertRaises(GraphError):
            moralization_edges(EXAMPLE, (E, D, C, B, A))


if __name__ == '__main__':
    unittest.main()
