"""
Unittests for operators module.
"""
import pytest
from libbandgraph.coefficient import M
from libbandgraph.coefficient import MB
from libbandgraph.graph import GraphBuilder
from libbandgraph.graph import Label
from libbandgraph.graph import SOLID
from libbandgraph.graph import DOTTED
from libbandgraph.graph import WAVED
from libbandgraph.graph import REGULAR
from libbandgraph.graph import LIGHT
from libbandgraph.graph import TAIL
from libbandgraph.graph import Weight
from libbandgraph.classify import validate_normal_regular
from libbandgraph.operators import OperatorError
from libbandgraph.operators import TAG_DELTA
from libbandgraph.operators import TAG_LIGHT
from libbandgraph.operators import centre
from libbandgraph.operators import edge_counts
from libbandgraph.operators import entry_of
from libbandgraph.operators import ibp
from libbandgraph.operators import make_entry
from libbandgraph.operators import op_dot
from libbandgraph.operators import op_gg
from libbandgraph.operators import op_ggbar
from libbandgraph.operators import op_merge
from libbandgraph.operators import op_multi_edge
from libbandgraph.operators import q_residual
from libbandgraph.operators import split_weights


def kinds(graph):
    """
    Sorted edge kinds of a graph, crossed dots marked.
    """
    return sorted(
        "x" + edge.kind if edge.crossed else edge.kind
        for edge in graph.edges)


class TestEntries:
    """
    Test resolvent entries of solid edges.
    """

    def test_centre(self):
        """
        Test the centre of each charge.
        """
        assert centre(1) == M
        assert centre(-1) == MB

    def test_entry_of(self):
        """
        Test rows and columns of G and Gbar.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.G(x, a).G(x, a, charge=-1).waved(x, a)
        graph = builder.build()

        assert entry_of(graph.edges[0]) == (x, a)
        assert entry_of(graph.edges[1]) == (a, x)

        with pytest.raises(OperatorError):
            entry_of(graph.edges[2])

    def test_make_entry(self):
        """
        Test diagonal entries become weights.
        """
        assert make_entry(3, 3, -1) == Weight(3, -1, REGULAR)

        edge = make_entry(1, 2, -1)
        assert edge.kind == SOLID
        assert (edge.a, edge.b, edge.charge) == (2, 1, -1)
        assert entry_of(edge) == (1, 2)


class TestDot:
    """
    Test merging and the dotted edge partition.
    """

    def test_merge(self):
        """
        Test a plain dot merges the atoms and a solid edge becomes a weight.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.G(x, a).dot(x, a)

        merged = op_merge(builder.build())

        assert kinds(merged) == [DOTTED]
        assert list(merged.weights) == [Weight(a, 1, REGULAR)]

    def test_merge_labelled(self):
        """
        Test a Q-labelled edge merged into a weight has its label moved
        to the kept atom.
        """
        builder = GraphBuilder()
        a = builder.external("a")
        x = builder.internal()
        y = builder.internal()
        builder.diffusive(a, x).waved(x, y)
        builder.G(x, y, pq=Label("Q", y)).dot(x, y)

        merged = op_merge(builder.build())

        atoms = {atom.id for atom in merged.atoms}
        assert y not in atoms
        assert list(merged.weights) == [
            Weight(x, 1, REGULAR, pq=Label("Q", x))]
        assert merged.weights[0].pq.atom in atoms

        result = op_dot(builder.build())
        assert len(result) == 1
        assert result[0].weights[0].pq == Label("Q", x)

    def test_merge_inconsistent(self):
        """
        Test crossed dots inside a merged class make the graph zero.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.waved(x, a).dot(x, a).dot(x, a, crossed=True)

        assert op_merge(builder.build()) is None

    def test_normal_unchanged(self):
        """
        Test a normal graph gives one term.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.G(x, a).dot(x, a, crossed=True).waved(x, a)
        graph = builder.build()

        result = op_dot(graph)
        assert len(result) == 1
        assert kinds(result[0]) == kinds(graph)

    def test_missing_crossed(self):
        """
        Test a solid edge without crossed dot splits in two.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.G(x, a).waved(x, a)

        result = op_dot(builder.build())
        assert len(result) == 2

        found = sorted(kinds(term) for term in result)
        assert found == sorted([
            sorted([DOTTED, WAVED]),
            sorted([SOLID, WAVED, "x" + DOTTED]),
        ])

        for term in result:
            assert "iv" not in validate_normal_regular(term).violations

    def test_orphan_crossed(self):
        """
        Test a crossed dot without solid edge becomes ``1 - 1(a = b)``.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.waved(x, a).dot(x, a, crossed=True)

        result = op_dot(builder.build())
        assert len(result) == 2

        coeffs = sorted(
            (kinds(term), term.coeff == 1, term.coeff == -1)
            for term in result)
        assert coeffs == [
            ([WAVED], True, False),
            (sorted([DOTTED, WAVED]), False, True),
        ]


class TestSplitWeights:
    """
    Test the split of regular weights.
    """

    def test_split(self):
        """
        Test ``G_aa = m + (G_aa - m)``.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.waved(x, a).weight(a)

        terms = split_weights(builder.build())
        assert len(terms) == 2

        light = [t for t in terms if t.weights]
        centred = [t for t in terms if not t.weights]
        assert light[0].weights[0].form == LIGHT
        assert centred[0].coeff == M

    def test_external_untouched(self):
        """
        Test weights on external atoms are kept by default.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.waved(x, a).weight(x)
        graph = builder.build()

        assert split_weights(graph) == [graph]

    def test_q_label_lost(self):
        """
        Test terms losing every Q factor are dropped.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.waved(x, a).weight(a, pq=Label("Q", a))

        terms = split_weights(builder.build())
        assert len(terms) == 1
        assert terms[0].weights[0].form == LIGHT


class TestIBP:
    """
    Test Gaussian integration by parts.
    """

    def graph(self):
        """
        ``S_xa G_ay G_xa``.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        y = builder.external("y")
        a = builder.internal()
        builder.G(a, y).waved(x, a).G(x, a)

        return builder.build()

    def test_terms(self):
        """
        Test the delta, light weight and derivative terms.
        """
        graph = self.graph()
        terms = ibp(graph, 2, ("e", 0))

        assert [t.tag for t in terms] == [TAG_DELTA, TAG_LIGHT, ("e", 2)]

        delta = terms[0].graph
        assert delta.coeff == M
        assert kinds(delta) == sorted([SOLID, WAVED, DOTTED])

        light = terms[1].graph
        assert light.coeff == M
        assert len(light.atoms) == 4
        assert [w.form for w in light.weights] == [LIGHT]

        derived = terms[2].graph
        assert derived.coeff == M
        assert len(derived.solid()) == 2
        assert [(w.atom, w.form) for w in derived.weights] == [(2, REGULAR)]

    def test_errors(self):
        """
        Test invalid targets.
        """
        graph = self.graph()

        with pytest.raises(OperatorError):
            ibp(graph, 0, ("e", 0))

        with pytest.raises(OperatorError):
            ibp(graph, 2, ("z", 0))

        with pytest.raises(OperatorError):
            ibp(graph, 2, ("e", 1))

        with pytest.raises(OperatorError):
            ibp(graph, 2, ("e", 0), scope=Label("Q", 2))

        tail = graph.with_items(weights=[Weight(2, 1, TAIL, order=3)])
        with pytest.raises(OperatorError):
            ibp(tail, 2, ("w", 0))

    def test_q_residual(self):
        """
        Test the residual labels every random term.
        """
        graph = self.graph()
        terms = [t.graph for t in ibp(graph, 2, ("e", 0))]

        residual = q_residual(graph, 2, terms)
        assert len(residual) == 1 + len(terms)
        assert residual[0].coeff == 1
        assert residual[1].coeff == -M

        for term in residual:
            assert term.labels() == {Label("Q", 2)}


class TestExpansions:
    """
    Test the multi-edge, GG and G-Gbar expansions.
    """

    def matched(self, charge: int):
        """
        ``G_ax`` and a second entry of ``charge`` with row at ``y``.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        y = builder.external("y")
        a = builder.internal()
        builder.G(a, x) \
            .dot(a, x, crossed=True) \
            .waved(a, y)

        if charge > 0:
            builder.G(y, a)
        else:
            builder.G(a, y, charge=-1)

        builder.dot(a, y, crossed=True)

        return builder.build()

    def test_edge_counts(self):
        """
        Test the four classes of solid edges.
        """
        counts = edge_counts(self.matched(-1), 2)
        assert counts == {1: [0], 2: [3], 3: [], 4: []}

        counts = edge_counts(self.matched(1), 2)
        assert counts == {1: [0], 2: [], 3: [3], 4: []}

    def test_ggbar(self):
        """
        Test the G-Gbar expansion carries the Q residual.
        """
        result = op_ggbar(self.matched(-1), 2)

        assert len(result) > 0
        assert any(term.is_labelled() for term in result)

        with pytest.raises(OperatorError):
            op_ggbar(self.matched(1), 2)

    def test_gg_charges(self):
        """
        Test the GG expansion needs equal charges.
        """
        with pytest.raises(OperatorError):
            op_gg(self.matched(-1), 2)

    def test_multi_edge_errors(self):
        """
        Test the multi-edge expansion guards.
        """
        builder = GraphBuilder()
        x = builder.external("x")
        a = builder.internal()
        builder.waved(x, a)
        graph = builder.build()

        with pytest.raises(OperatorError):
            op_multi_edge(graph, a)

        with pytest.raises(OperatorError):
            op_multi_edge(graph.with_items(weights=[Weight(a, 1, REGULAR)]), a)

        with pytest.raises(OperatorError):
            op_multi_edge(graph, x)

        labelled = self.matched(-1).label_random(Label("Q", 2))
        with pytest.raises(OperatorError):
            op_multi_edge(labelled, 2)
