"""
Unittests for classify module.
"""
import pytest
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import GraphBuilder
from libbandgraph.graph import GraphError
from libbandgraph.graph import Label
from libbandgraph.graph import LIGHT
from libbandgraph.classify import classify
from libbandgraph.classify import is_deterministic
from libbandgraph.classify import is_locally_standard
from libbandgraph.classify import is_matched
from libbandgraph.classify import is_q_graph
from libbandgraph.classify import is_recollision
from libbandgraph.classify import q_label
from libbandgraph.classify import scaling_order
from libbandgraph.classify import solid_degree
from libbandgraph.classify import standard_neutral_atoms
from libbandgraph.classify import validate_normal_regular


def neutral_graph(crossed: bool = True, pq: Label = None):
    """
    ``G_xa Gbar_xa S_ay`` with the crossed dot of the solid pair.
    """
    builder = GraphBuilder()
    x = builder.external("x")
    y = builder.external("y")
    a = builder.internal()

    builder.G(x, a, pq=pq) \
        .G(x, a, charge=-1, pq=pq) \
        .waved(a, y)

    if crossed:
        builder.dot(x, a, crossed=True)

    return builder.build()


class TestRegularity:
    """
    Test normal regular graphs.
    """

    def test_normal(self):
        """
        Test a normal regular graph.
        """
        report = validate_normal_regular(neutral_graph())

        assert report.regular
        assert report.normal
        assert report.violations == {}
        assert report.to_dict()["normal"]

    def test_not_normal(self):
        """
        Test solid edges without crossed dots.
        """
        report = validate_normal_regular(neutral_graph(crossed=False))

        assert report.regular
        assert not report.normal
        assert "iv" in report.violations

    def test_disconnected(self):
        """
        Test disconnected graphs break property (i).
        """
        builder = GraphBuilder()
        x = builder.external("x")
        y = builder.external("y")
        a = builder.internal()
        builder.waved(x, a)
        builder.external("z")
        builder.waved(y, a)

        report = validate_normal_regular(builder.build())
        assert "i" in report.violations
        assert not report.regular

    def test_caps(self):
        """
        Test atom and edge caps.
        """
        report = validate_normal_regular(neutral_graph(), max_atoms=2)
        assert "i" in report.violations

        report = validate_normal_regular(neutral_graph(), max_edges=3)
        assert "i" in report.violations

    def test_internal_components(self):
        """
        Test internal atoms joined only by solid edges.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        b = builder.internal()
        builder.waved(x, a) \
            .waved(x, b) \
            .G(a, b) \
            .dot(a, b, crossed=True)

        report = validate_normal_regular(builder.build())
        assert "ii" in report.violations
        assert "iv" not in report.violations

    def test_internal_dot(self):
        """
        Test plain dotted edges between internal atoms.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        b = builder.internal()
        builder.waved(x, a).waved(a, b).dot(a, b)

        report = validate_normal_regular(builder.build())
        assert "iii" in report.violations

    def test_double_dot(self):
        """
        Test two dotted edges on the same pair.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.G(x, a) \
            .dot(x, a, crossed=True) \
            .dot(x, a, crossed=True) \
            .waved(x, a)

        report = validate_normal_regular(builder.build())
        assert "iv" in report.violations


class TestScalingOrder:
    """
    Test the scaling order.
    """

    def test_order(self):
        """
        Test solid and waved edges minus free indexes.
        """
        assert scaling_order(neutral_graph()) == 2

    def test_not_normal(self):
        """
        Test non-normal graphs are rejected unless not strict.
        """
        graph = neutral_graph(crossed=False)

        with pytest.raises(GraphError):
            scaling_order(graph)

        assert scaling_order(graph, strict=False) == 2

    def test_diffusive_and_weights(self):
        """
        Test diffusive edges count two and light weights count one.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        y = builder.external("y")
        a = builder.internal()
        builder.diffusive(x, a).diffusive(a, y).weight(a, form=LIGHT)

        assert scaling_order(builder.build()) == 3

    def test_plain_dot(self):
        """
        Test a plain dot pins its internal atom.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.waved(x, a).dot(x, a)

        assert scaling_order(builder.build()) == 2


class TestClassify:
    """
    Test graph classification flags.
    """

    def test_neutral(self):
        """
        Test standard neutral atoms.
        """
        graph = neutral_graph()
        atom = graph.internals[0]

        assert solid_degree(graph, atom) == 2
        assert is_matched(graph, atom, 0, 1)
        assert standard_neutral_atoms(graph) == [atom]
        assert is_locally_standard(graph)

    def test_unmatched(self):
        """
        Test two resolvents with the same orientation are not matched.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        y = builder.external("y")
        a = builder.internal()
        builder.G(x, a) \
            .G(a, y, charge=-1) \
            .waved(a, y) \
            .dot(x, a, crossed=True) \
            .dot(a, y, crossed=True)

        graph = builder.build()
        assert not is_matched(graph, a, 0, 1)
        assert standard_neutral_atoms(graph) == []
        assert not is_locally_standard(graph)

    def test_matched_errors(self):
        """
        Test matching is only defined for solid edges at the atom.
        """
        graph = neutral_graph()

        with pytest.raises(GraphError):
            is_matched(graph, graph.internals[0], 0, 2)

        with pytest.raises(GraphError):
            is_matched(graph, graph.by_name("y"), 0, 1)

    def test_q_label(self):
        """
        Test the common Q label.
        """
        graph = neutral_graph(pq=Label("Q", 0))
        assert q_label(graph) == 0
        assert is_q_graph(graph)
        assert not is_locally_standard(graph)

        assert q_label(neutral_graph()) is None
        assert q_label(neutral_graph(pq=Label("P", 0))) is None

    def test_recollision(self):
        """
        Test plain dots from b1 to internal atoms.
        """
        builder = GraphBuilder()
        b1 = builder.external(ATOM_B1)
        a = builder.internal()
        builder.waved(b1, a).dot(b1, a)

        assert is_recollision(builder.build())
        assert not is_recollision(neutral_graph())

    def test_deterministic(self):
        """
        Test graphs without random factors.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.waved(x, a).diffusive(x, a)

        assert is_deterministic(builder.build())
        assert not is_deterministic(neutral_graph())

    def test_classify(self):
        """
        Test the flags of a locally standard graph.
        """
        flags = classify(neutral_graph())

        assert not flags.recollision
        assert not flags.q_graph
        assert not flags.deterministic
        assert flags.locally_standard
        assert flags.to_dict() == {
            "recollision": False,
            "q_graph": False,
            "deterministic": False,
            "locally_standard": True,
            "standard_neutral_atoms": [2],
        }
