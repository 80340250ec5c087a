"""
Unittests for structure module.
"""
import pytest
import numpy as np
from libbandgraph import CapacityError
from libbandgraph.graph import ATOM_A
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2
from libbandgraph.graph import GraphBuilder
from libbandgraph.lattice import LatticeConfig
from libbandgraph.molecular import BLUE
from libbandgraph.molecular import RED
from libbandgraph.molecular import DIFF
from libbandgraph.molecular import GHOST_EDGE
from libbandgraph.molecular import MolecularGraph
from libbandgraph.structure import BUCKET_A
from libbandgraph.structure import MAX_MOLECULES
from libbandgraph.structure import NestingError
from libbandgraph.structure import ghost_bound
from libbandgraph.structure import ghost_count
from libbandgraph.structure import is_gen_spd
from libbandgraph.structure import is_globally_standard
from libbandgraph.structure import is_pre_deterministic
from libbandgraph.structure import is_spd
from libbandgraph.structure import isolated_subgraphs
from libbandgraph.structure import pre_deterministic_order
from libbandgraph.structure import size
from libbandgraph.structure import validate_texpansion_extras
import libbandgraph.oracle as oracle


def pocket(reds: int = 0):
    """
    Internal molecules 0 and 1, external molecule 2. Molecule 1 hangs on
    molecule 0 through a diffusive and a blue edge, and carries ``reds``
    red edges towards the others.
    """
    edges = [
        (DIFF, 2, 0),
        (BLUE, 2, 0),
        (DIFF, 0, 1),
        (BLUE, 0, 1),
    ]
    for i in range(reds):
        edges.append((RED, 1, i % 2 * 2))

    return MolecularGraph.from_edges(2, 1, edges)


def double_blue():
    """
    A diffusive edge and two blue edges between two internal molecules.
    """
    return MolecularGraph.from_edges(2, 0, [
        (DIFF, 0, 1),
        (BLUE, 0, 1),
        (BLUE, 0, 1),
    ])


class TestIsolated:
    """
    Test isolated subgraphs.
    """

    def test_pocket(self):
        """
        Test the single isolated subset of a pocket.
        """
        chain = isolated_subgraphs(pocket())

        assert len(chain.levels) == 1
        level = chain.levels[0]
        assert level.molecules == frozenset([1])
        assert level.boundary == (2, 3)
        assert level.red == 0
        assert level.strong
        assert level.random

        assert chain.is_chain()
        assert chain.maximal == frozenset([0, 1])
        assert chain.mis == frozenset([1])
        assert chain.maximal_inside(chain.maximal) == level
        assert chain.maximal_inside(frozenset([1])) is None
        assert chain.to_dict()["mis"] == [1]

    def test_weak(self):
        """
        Test red edges leaving an isolated subset.
        """
        level = isolated_subgraphs(pocket(reds=2)).levels[0]
        assert level.red == 2
        assert not level.strong

    def test_random_only(self):
        """
        Test deterministic closures are skipped on request.
        """
        graph = pocket().converted([3])

        assert len(isolated_subgraphs(graph).levels) == 1
        assert isolated_subgraphs(graph, random_only=True).levels == []

    def test_none(self):
        """
        Test the MIS of a graph without proper isolated subsets.
        """
        chain = isolated_subgraphs(double_blue())

        assert chain.levels == []
        assert chain.mis == frozenset([0, 1])

    def test_nesting(self):
        """
        Test overlapping isolated subsets.
        """
        graph = MolecularGraph.from_edges(3, 1, [
            (DIFF, 3, 0),
            (DIFF, 0, 1),
            (DIFF, 1, 2),
            (DIFF, 2, 3),
        ])

        with pytest.raises(NestingError):
            isolated_subgraphs(graph)

    def test_capacity(self):
        """
        Test the cap on internal molecules.
        """
        graph = MolecularGraph.from_edges(MAX_MOLECULES + 1, 0, [])

        with pytest.raises(CapacityError):
            isolated_subgraphs(graph)


class TestPreDeterministic:
    """
    Test pre-deterministic orders.
    """

    def test_order(self):
        """
        Test the order of two redundant blue edges.
        """
        graph = double_blue()

        assert pre_deterministic_order(graph) == (1, 2)
        assert is_pre_deterministic(graph)
        assert oracle.is_valid_order(graph, (1, 2))

    def test_pivotal(self):
        """
        Test a pivotal blue edge has no order.
        """
        graph = pocket()

        assert pre_deterministic_order(graph) is None
        assert not is_pre_deterministic(graph)

    def test_not_doubly_connected(self):
        """
        Test graphs without nets have no order.
        """
        graph = MolecularGraph.from_edges(2, 0, [(BLUE, 0, 1)])
        assert pre_deterministic_order(graph) is None

    def test_oracle_agreement(self):
        """
        Test the greedy order against the exhaustive search.
        """
        rng = np.random.default_rng(2024)

        for _ in range(60):
            graph = oracle.random_graph(
                rng,
                max_molecules=4,
                max_edges=5)

            order = pre_deterministic_order(graph)
            assert (order is not None) == oracle.pre_deterministic(graph)

            if order is not None:
                assert oracle.is_valid_order(graph, order)


class TestClasses:
    """
    Test SPD, globally standard and generalized classes.
    """

    def test_spd(self):
        """
        Test SPD graphs.
        """
        assert is_spd(double_blue())
        assert is_spd(pocket())

    def test_not_spd(self):
        """
        Test graphs which are not doubly connected.
        """
        graph = MolecularGraph.from_edges(2, 0, [(DIFF, 0, 1)])
        assert not is_spd(graph)

    def test_globally_standard(self):
        """
        Test strongly isolated subsets break the global standard property.
        """
        assert is_globally_standard(double_blue())
        assert not is_globally_standard(pocket())
        assert is_globally_standard(pocket(reds=2))

    def test_gen_spd(self):
        """
        Test ghost edges in the generalized SPD property.
        """
        graph = MolecularGraph.from_edges(2, 0, [
            (DIFF, 0, 1),
            (GHOST_EDGE, 0, 1),
        ])

        assert not is_spd(graph)
        assert is_gen_spd(graph)

    def test_ghost_bound(self):
        """
        Test the ghost order bound.
        """
        assert ghost_bound(4, 1, 3)
        assert not ghost_bound(3, 1, 3)
        assert ghost_bound(2, 0, 5)
        assert not ghost_bound(4, 1, 3, extra=1)

    def test_size(self):
        """
        Test the size of a graph with a ghost edge.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        y = builder.external("y")
        a = builder.internal()
        builder.diffusive(x, a).diffusive(a, y).ghost(x, a)
        graph = builder.build()

        assert ghost_count(graph) == 1

        config = LatticeConfig(d=1, L=16, W=4)
        estimate = size(graph, config)

        assert estimate.ghosts == 1
        assert estimate.order == 2
        assert estimate.value == pytest.approx(16 / 4)
        assert estimate.exponents == {"L/W": 2, "W": -1.0}


class TestExtras:
    """
    Test the structural requirements of bucket graphs.
    """

    def bucket_graph(self, attach_b2: bool = True):
        """
        ``a`` joined to ``b1`` and ``b2`` through a diffusive edge and an
        internal atom.
        """
        builder = GraphBuilder()
        atom_a = builder.external(ATOM_A)
        b1 = builder.external(ATOM_B1)
        b2 = builder.external(ATOM_B2)
        x = builder.internal()

        builder.diffusive(atom_a, x) \
            .diffusive(x, b1) \
            .diffusive(x, b1)

        if attach_b2:
            builder.diffusive(x, b2)

        return builder.build()

    def test_passed(self):
        """
        Test a graph with every attachment.
        """
        report = validate_texpansion_extras(self.bucket_graph(), BUCKET_A)

        assert report.passed
        assert report.to_dict() == {
            "bucket": BUCKET_A,
            "passed": True,
            "failures": [],
        }

    def test_missing_attachment(self):
        """
        Test a missing attachment at b2.
        """
        report = validate_texpansion_extras(
            self.bucket_graph(attach_b2=False), BUCKET_A)

        assert not report.passed
        assert any("b2" in failure for failure in report.failures)


def same_isolated(graph):
    """
    Check isolated subgraphs against the exhaustive subset search. Two
    overlapping subsets that don't nest must raise ``NestingError``.
    """
    expected = oracle.isolated_subsets(graph)

    try:
        chain = isolated_subgraphs(graph)
    except NestingError:
        assert any(
            first & second and not (first <= second or second <= first)
            for first in expected for second in expected)
        return

    assert {level.molecules for level in chain.levels} == expected


class TestOracleSweep:
    """
    Test isolated subgraphs and pre-deterministic orders against the
    exhaustive searches.
    """

    def test_isolated_exhaustive(self):
        """
        Test every graph with up to three internal molecules and four
        edges of any color.
        """
        count = 0
        for internals in (1, 2, 3):
            for graph in oracle.enumerate_graphs(internals, 1, 4):
                same_isolated(graph)
                count += 1

        assert count > 1000

    @pytest.mark.slow
    def test_random_thousand(self):
        """
        Test a thousand random graphs.
        """
        rng = np.random.default_rng(77)

        for _ in range(1000):
            graph = oracle.random_graph(rng, max_molecules=8, max_edges=8)
            same_isolated(graph)

            small = oracle.random_graph(rng, max_molecules=4, max_edges=5)
            order = pre_deterministic_order(small)
            assert (order is not None) == oracle.pre_deterministic(small)

            if order is not None:
                assert oracle.is_valid_order(small, order)
