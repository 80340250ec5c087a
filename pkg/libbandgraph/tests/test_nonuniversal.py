"""
Unittests for nonuniversal module.
"""
import pytest
from libbandgraph.graph import ATOM_A
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2
from libbandgraph.graph import TAIL
from libbandgraph.graph import GraphBuilder
from libbandgraph.graph import Weight
from libbandgraph.texpansion import BUCKET_A
from libbandgraph.texpansion import BUCKET_ERR
from libbandgraph.texpansion import BUCKET_R
from libbandgraph.texpansion import BUCKET_SIGMA
from libbandgraph.texpansion import ExpansionError
from libbandgraph.texpansion import TExpansion
from libbandgraph.nonuniversal import BUCKET_DET
from libbandgraph.nonuniversal import NU_BUCKETS
from libbandgraph.nonuniversal import GGSViolation
from libbandgraph.nonuniversal import NonUniversalExpansion
from libbandgraph.nonuniversal import _stop
from libbandgraph.nonuniversal import build_non_universal
from libbandgraph.nonuniversal import check_ghost_order
from libbandgraph.nonuniversal import effective_order


def ghost_graph(ghost: bool = True):
    """
    ``Theta_xa Theta_ay`` with a ghost edge along ``x-a``.
    """
    builder = GraphBuilder()
    x = builder.external("x")
    y = builder.external("y")
    a = builder.internal()
    builder.diffusive(x, a).diffusive(a, y)

    if ghost:
        builder.ghost(x, a)

    return builder.build()


def deterministic_graph():
    """
    ``Theta_a,b1 Theta_b1,b2`` without internal atoms.
    """
    builder = GraphBuilder()
    atom_a = builder.external(ATOM_A)
    b1 = builder.external(ATOM_B1)
    b2 = builder.external(ATOM_B2)
    builder.diffusive(atom_a, b1).diffusive(b1, b2)

    return builder.build()


class TestGhostOrder:
    """
    Test the order of graphs with ghost edges.
    """

    def test_effective_order(self):
        """
        Test each ghost edge pays ``n - 1``.
        """
        assert effective_order(ghost_graph(), 1) == 2
        assert effective_order(ghost_graph(), 3) == 0
        assert effective_order(ghost_graph(ghost=False), 3) == 2

    def test_check(self):
        """
        Test the ghost order bound.
        """
        check_ghost_order(ghost_graph(ghost=False), 4)

        with pytest.raises(GGSViolation):
            check_ghost_order(ghost_graph(), 2)

    def test_violation_is_expansion_error(self):
        """
        Test the violation is an expansion error.
        """
        assert issubclass(GGSViolation, ExpansionError)


class TestNonUniversalExpansion:
    """
    Test the non-universal expansion container.
    """

    def test_buckets(self):
        """
        Test bucket counts by number of ghost edges.
        """
        result = NonUniversalExpansion(
            order=2,
            error_order=8,
            rounds=3,
            buckets={BUCKET_DET: [ghost_graph(), ghost_graph(ghost=False)]})

        assert result.order == 2
        assert result.error_order == 8
        assert result.rounds == 3
        assert list(result.counts()) == list(NU_BUCKETS)
        assert result.counts()[BUCKET_DET] == 2
        assert result.counts()[BUCKET_R] == 0
        assert result.ghost_counts()[BUCKET_DET] == {0: 1, 1: 1}
        assert result.ghost_counts()[BUCKET_R] == {}

    def test_unknown_bucket(self):
        """
        Test the A bucket is not part of the non-universal expansion.
        """
        result = NonUniversalExpansion(order=2, error_order=8)

        with pytest.raises(ExpansionError):
            result.bucket(BUCKET_A)

    def test_to_dict(self):
        """
        Test one exported part per bucket and number of ghost edges.
        """
        result = NonUniversalExpansion(
            order=2,
            error_order=8,
            buckets={BUCKET_DET: [ghost_graph(), ghost_graph(ghost=False)]})

        data = result.to_dict()
        assert data["kind"] == "nonuniversal"
        assert data["order"] == 2
        assert data["D"] == 8
        assert len(data["buckets"]) == 2


class TestBuild:
    """
    Test the non-universal strategy.
    """

    def test_stop(self):
        """
        Test the stopping rules.
        """
        graph = deterministic_graph()
        assert _stop(graph, 2, 8) is None
        assert _stop(graph, 2, 3) == BUCKET_ERR

        tail = graph.with_items(weights=[Weight(2, 1, TAIL, order=3)])
        assert _stop(tail, 2, 8) == BUCKET_ERR

    def test_empty(self):
        """
        Test an expansion without R and A graphs keeps its leading term.
        """
        result = build_non_universal(TExpansion(order=2))

        assert result.rounds == 0
        assert result.counts()[BUCKET_SIGMA] == 1
        assert result.counts()[BUCKET_DET] == 0

    def test_deterministic(self):
        """
        Test a deterministic graph stops in the D bucket.
        """
        texp = TExpansion(
            order=2,
            buckets={BUCKET_A: [deterministic_graph()]})

        result = build_non_universal(texp)

        assert result.rounds == 1
        assert result.counts()[BUCKET_DET] == 1
        assert result.counts()[BUCKET_ERR] == 0
