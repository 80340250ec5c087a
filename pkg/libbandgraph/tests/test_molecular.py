"""
Unittests for molecular module.
"""
import pytest
import numpy as np
from libbandgraph.graph import GraphBuilder
from libbandgraph.molecular import BLUE
from libbandgraph.molecular import RED
from libbandgraph.molecular import DIFF
from libbandgraph.molecular import GHOST_EDGE
from libbandgraph.molecular import LINK
from libbandgraph.molecular import ROOT
from libbandgraph.molecular import MolEdge
from libbandgraph.molecular import Molecule
from libbandgraph.molecular import MolecularGraph
from libbandgraph.molecular import StructureError
from libbandgraph.molecular import edge_class
from libbandgraph.molecular import find_nets
from libbandgraph.molecular import is_doubly_connected
from libbandgraph.molecular import is_gen_doubly_connected
from libbandgraph.molecular import is_redundant
from libbandgraph.molecular import molecular_graph
from libbandgraph.molecular import molecules
import libbandgraph.oracle as oracle


def sample_graph():
    """
    ``G_xa s_ab Gbar_bc S_cx`` plus a crossed dot between ``a`` and ``c``.
    """
    builder = GraphBuilder()
    x = builder.external("x")
    a = builder.internal()
    b = builder.internal()
    c = builder.internal()

    builder.G(x, a) \
        .waved(a, b) \
        .G(b, c, charge=-1) \
        .diffusive(c, x) \
        .dot(a, c, crossed=True)

    return builder.build()


class TestMolecularGraph:
    """
    Test molecular quotients.
    """

    def test_molecules(self):
        """
        Test atoms joined by waved edges share a molecule.
        """
        parts = molecules(sample_graph())
        assert parts == [
            frozenset([0]),
            frozenset([1, 2]),
            frozenset([3]),
        ]

    def test_molecular_graph(self):
        """
        Test edge kinds of the molecular graph.
        """
        graph = molecular_graph(sample_graph())

        assert graph.internals == [1, 2]
        assert graph.externals == [0]
        assert graph.molecule_of(2) == 1

        edges = [(e.key, e.kind, e.a, e.b) for e in graph.edges]
        assert edges == [
            (0, BLUE, 0, 1),
            (2, RED, 1, 2),
            (3, DIFF, 2, 0),
        ]

    def test_random_molecules(self):
        """
        Test molecules carrying weights are random.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.G(x, a).weight(a)

        graph = molecular_graph(builder.build())
        assert graph.molecules[1].random
        assert not graph.molecules[0].random

    def test_errors(self):
        """
        Test invalid molecular graphs.
        """
        with pytest.raises(StructureError):
            MolEdge(0, "unknown", 0, 1)

        with pytest.raises(StructureError):
            MolEdge(0, BLUE, 0, 1).other(2)

        mols = {0: Molecule(frozenset([0])), 1: Molecule(frozenset([1]))}

        with pytest.raises(StructureError):
            MolecularGraph(mols, [
                MolEdge(0, BLUE, 0, 1),
                MolEdge(0, DIFF, 0, 1),
            ])

        with pytest.raises(StructureError):
            MolecularGraph(mols, [MolEdge(0, BLUE, 0, 5)])

        graph = MolecularGraph(mols, [MolEdge(0, BLUE, 0, 1)])

        with pytest.raises(StructureError):
            graph.molecule_of(7)

        with pytest.raises(StructureError):
            graph.edge(3)

    def test_derived_graphs(self):
        """
        Test red_free, restrict, without and converted keep molecule ids.
        """
        graph = MolecularGraph.from_edges(3, 1, [
            (BLUE, 0, 1),
            (RED, 1, 2),
            (DIFF, 2, 3),
        ])

        assert [e.key for e in graph.red_free().edges] == [0, 2]
        assert graph.restrict([1, 2]).internals == [1, 2]
        assert [e.key for e in graph.restrict([1, 2]).edges] == [1]
        assert [e.key for e in graph.without([0]).edges] == [1, 2]
        assert graph.converted([0]).edge(0).kind == DIFF
        assert graph.next_key() == -1

    def test_replace_closure(self):
        """
        Test closure replacement joins the outer ends.
        """
        graph = MolecularGraph.from_edges(3, 1, [
            (DIFF, 3, 0),
            (BLUE, 0, 1),
            (DIFF, 1, 2),
        ])

        closed = graph.replace_closure([1])
        assert sorted(closed.molecules) == [0, 2, 3]

        edges = [(e.key, e.kind, e.a, e.b) for e in closed.edges]
        assert edges == [(-1, DIFF, 0, 2), (0, DIFF, 3, 0)]

        with pytest.raises(StructureError):
            graph.replace_closure([2])

    def test_has_random(self):
        """
        Test solid edges make a closure random.
        """
        graph = MolecularGraph.from_edges(3, 1, [
            (DIFF, 3, 0),
            (BLUE, 0, 1),
            (DIFF, 1, 2),
        ])

        assert graph.has_random([1])
        assert not graph.has_random([2])

    def test_to_dict(self):
        """
        Test molecular graph export.
        """
        data = molecular_graph(sample_graph()).to_dict()

        assert data["molecules"][1] == {
            "id": 1,
            "atoms": [1, 2],
            "external": False,
            "random": False,
        }
        assert data["edges"][0] == {"key": 0, "kind": BLUE, "a": 0, "b": 1}


class TestNets:
    """
    Test black and blue nets.
    """

    def test_single_molecule(self):
        """
        Test a single internal molecule is doubly connected.
        """
        graph = MolecularGraph.from_edges(1, 1, [(BLUE, 0, 1)])
        cert = is_doubly_connected(graph)

        assert cert is not None
        assert cert.black == ()
        assert cert.blue == ()

    def test_doubly_connected(self):
        """
        Test a diffusive plus a blue edge make two nets.
        """
        graph = MolecularGraph.from_edges(2, 0, [
            (DIFF, 0, 1),
            (BLUE, 0, 1),
        ])
        cert = is_doubly_connected(graph)

        assert cert.black == (0,)
        assert cert.blue == (1,)
        assert cert.verify(graph)

    def test_two_diffusive(self):
        """
        Test diffusive edges may belong to the blue net.
        """
        graph = MolecularGraph.from_edges(2, 0, [
            (DIFF, 0, 1),
            (DIFF, 0, 1),
        ])
        assert is_doubly_connected(graph) is not None

    def test_not_doubly_connected(self):
        """
        Test graphs without two disjoint nets.
        """
        cases = [
            [(DIFF, 0, 1)],
            [(BLUE, 0, 1), (BLUE, 0, 1)],
            [(DIFF, 0, 1), (RED, 0, 1)],
            [(DIFF, 0, 1), (LINK, 0, 1)],
        ]
        for edges in cases:
            graph = MolecularGraph.from_edges(2, 0, edges)
            assert is_doubly_connected(graph) is None

    def test_ghost(self):
        """
        Test ghost edges join the blue net only on request.
        """
        graph = MolecularGraph.from_edges(2, 0, [
            (DIFF, 0, 1),
            (GHOST_EDGE, 0, 1),
        ])

        assert is_doubly_connected(graph) is None
        assert is_doubly_connected(graph, ghost=True) is not None

    def test_certificate_tampered(self):
        """
        Test a certificate fails on a graph it was not built for.
        """
        graph = MolecularGraph.from_edges(2, 0, [
            (DIFF, 0, 1),
            (BLUE, 0, 1),
        ])
        cert = is_doubly_connected(graph)

        other = graph.converted([0], kind=BLUE)
        assert not cert.verify(other)

    def test_rooted(self):
        """
        Test generalized nets through the external molecules.
        """
        graph = MolecularGraph.from_edges(1, 1, [
            (DIFF, 0, 1),
            (BLUE, 0, 1),
        ])
        cert = find_nets(graph, ghost=True, rooted=True)
        assert cert.nodes == (ROOT, 0)
        assert cert.verify(graph)

        graph = MolecularGraph.from_edges(1, 1, [(DIFF, 0, 1)])
        assert is_gen_doubly_connected(graph) is None

        graph = MolecularGraph.from_edges(1, 1, [(LINK, 0, 1)])
        cert = is_gen_doubly_connected(graph)
        assert cert.nodes == (ROOT,)

    def test_gen_atomic(self):
        """
        Test generalized double connectivity of an atomic graph.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.G(x, a).diffusive(a, x)

        assert is_gen_doubly_connected(builder.build()) is not None

    def test_redundant(self):
        """
        Test redundant and pivotal blue edges.
        """
        graph = MolecularGraph.from_edges(2, 0, [
            (DIFF, 0, 1),
            (BLUE, 0, 1),
            (BLUE, 0, 1),
        ])
        assert is_redundant(graph, 1)
        assert edge_class(graph, 1) == "redundant"

        graph = graph.without([2])
        assert not is_redundant(graph, 1)
        assert edge_class(graph, 1) == "pivotal"

        with pytest.raises(StructureError):
            edge_class(graph, 0)

    def test_oracle_agreement(self):
        """
        Test the net search against the exhaustive search.
        """
        rng = np.random.default_rng(1234)
        kinds = (BLUE, RED, DIFF, GHOST_EDGE)

        for _ in range(100):
            graph = oracle.random_graph(
                rng,
                max_molecules=5,
                max_edges=6,
                kinds=kinds)

            for ghost in (False, True):
                cert = is_doubly_connected(graph, ghost)
                assert (cert is not None) == \
                    oracle.doubly_connected(graph, ghost)

                if cert is not None:
                    assert cert.verify(graph)

                rooted = find_nets(graph, ghost=ghost, rooted=True)
                assert (rooted is not None) == \
                    oracle.doubly_connected(graph, ghost, rooted=True)

    def test_oracle_redundant(self):
        """
        Test redundancy against the exhaustive search.
        """
        rng = np.random.default_rng(99)

        for _ in range(100):
            graph = oracle.random_graph(rng, max_molecules=4, max_edges=6)
            for edge in graph.edges_of(BLUE):
                assert is_redundant(graph, edge.key) == \
                    oracle.redundant(graph, edge.key)


class TestOracleSweep:
    """
    Test the net search against the exhaustive search on every small
    graph and on many random ones.
    """

    @pytest.mark.slow
    def test_exhaustive(self):
        """
        Test every graph with up to three internal molecules, one external
        molecule and six blue or diffusive edges, plus every graph with two
        internal molecules and five edges of any color.
        """
        sweeps = [
            (internals, 6, (BLUE, DIFF)) for internals in (1, 2, 3)
        ] + [(2, 5, (BLUE, RED, DIFF))]

        count = 0
        for internals, max_edges, kinds in sweeps:
            for graph in oracle.enumerate_graphs(
                    internals, 1, max_edges, kinds=kinds):
                count += 1

                cert = is_doubly_connected(graph)
                assert (cert is not None) == oracle.doubly_connected(graph)

                rooted = find_nets(graph, rooted=True)
                assert (rooted is not None) == \
                    oracle.doubly_connected(graph, rooted=True)

                if max_edges <= 5:
                    for edge in graph.edges_of(BLUE):
                        assert is_redundant(graph, edge.key) == \
                            oracle.redundant(graph, edge.key)

        assert count > 20000

    @pytest.mark.slow
    def test_random_thousand(self):
        """
        Test a thousand random graphs with up to eight molecules.
        """
        rng = np.random.default_rng(31)
        kinds = (BLUE, RED, DIFF, GHOST_EDGE)

        for _ in range(1000):
            graph = oracle.random_graph(
                rng,
                max_molecules=8,
                max_edges=8,
                kinds=kinds)

            for ghost in (False, True):
                cert = is_doubly_connected(graph, ghost)
                assert (cert is not None) == \
                    oracle.doubly_connected(graph, ghost)

                if cert is not None:
                    assert cert.verify(graph)
