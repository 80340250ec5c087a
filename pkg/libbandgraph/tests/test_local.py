"""
Unittests for local module.
"""
import pytest
from libbandgraph import CapacityError
from libbandgraph.graph import GraphBuilder
from libbandgraph.graph import Label
from libbandgraph.local import BUCKETS
from libbandgraph.local import ERROR
from libbandgraph.local import HIGHER
from libbandgraph.local import QGRAPH
from libbandgraph.local import STANDARD
from libbandgraph.local import LocalExpansion
from libbandgraph.local import expand_atom
from libbandgraph.local import local_expand_to_standard
from libbandgraph.local import pending_atoms


def neutral_graph(pq: Label = None):
    """
    ``G_xa Gbar_xa S_ay`` with the crossed dot of the solid pair.
    """
    builder = GraphBuilder()
    x = builder.external("x")
    y = builder.external("y")
    a = builder.internal()

    builder.G(x, a, pq=pq) \
        .G(x, a, charge=-1, pq=pq) \
        .waved(a, y) \
        .dot(x, a, crossed=True)

    return builder.build()


def weighted_graph():
    """
    ``S_xa G_aa``.
    """
    builder = GraphBuilder()
    x = builder.external("x")
    a = builder.internal()
    builder.waved(x, a).weight(a)

    return builder.build()


class TestLocalExpansion:
    """
    Test local expansion buckets.
    """

    def test_buckets(self):
        """
        Test graphs are counted per bucket.
        """
        result = LocalExpansion()
        result.add(STANDARD, neutral_graph())
        result.add(ERROR, weighted_graph())
        result.steps = 3

        assert list(result.counts()) == list(BUCKETS)
        assert result.counts()[STANDARD] == 1
        assert result.counts()[ERROR] == 1
        assert len(result.expansion) == 2
        assert len(result.bucket(HIGHER)) == 0
        assert "steps: 3" in repr(result)


class TestLocalExpand:
    """
    Test local expansions to locally standard graphs.
    """

    def test_pending(self):
        """
        Test settled and pending atoms.
        """
        assert pending_atoms(neutral_graph()) == []
        assert pending_atoms(weighted_graph()) == [1]

    def test_settled_atom(self):
        """
        Test a settled atom is left unchanged.
        """
        graph = neutral_graph()
        result = expand_atom(graph, 2)

        assert len(result) == 1
        assert result[0].edges == graph.edges

    def test_standard(self):
        """
        Test a locally standard graph stops at once.
        """
        result = local_expand_to_standard(neutral_graph(), 2, 8)

        assert result.counts()[STANDARD] == 1
        assert result.steps == 0

    def test_higher(self):
        """
        Test graphs above the order.
        """
        result = local_expand_to_standard(neutral_graph(), 1, 8)
        assert result.counts()[HIGHER] == 1

    def test_error(self):
        """
        Test graphs above the error order.
        """
        result = local_expand_to_standard(neutral_graph(), 1, 1)
        assert result.counts()[ERROR] == 1

    def test_q_graph(self):
        """
        Test Q-graphs stop.
        """
        graph = neutral_graph(pq=Label("Q", 0))
        result = local_expand_to_standard(graph, 2, 8)

        assert result.counts()[QGRAPH] == 1

    def test_capacity(self):
        """
        Test the cap on operator applications.
        """
        with pytest.raises(CapacityError):
            local_expand_to_standard(weighted_graph(), 4, 8, max_steps=0)
