"""
Unittests for substitution module.
"""
import pytest
from libbandgraph.coefficient import Coefficient
from libbandgraph.coefficient import M
from libbandgraph.graph import ATOM_A
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2
from libbandgraph.graph import DIFFUSIVE
from libbandgraph.graph import DOTTED
from libbandgraph.graph import REGULAR
from libbandgraph.graph import SOLID
from libbandgraph.graph import WAVED
from libbandgraph.graph import GraphBuilder
from libbandgraph.graph import Weight
from libbandgraph.texpansion import ENERGY_X
from libbandgraph.texpansion import ENERGY_Y
from libbandgraph.texpansion import TExpansion
from libbandgraph.texpansion import leading_term
from libbandgraph.substitution import INV_MM
from libbandgraph.substitution import SubstitutionError
from libbandgraph.substitution import dot_corrections
from libbandgraph.substitution import fold_self_energy
from libbandgraph.substitution import glue
from libbandgraph.substitution import pick_t_variable
from libbandgraph.substitution import substitute_t_variable
from libbandgraph.substitution import t_variable
from libbandgraph.substitution import transposed


def t_var_graph(transpose: bool = False, crossed: tuple = ()):
    """
    ``S_xa G_ay Gbar_ay``, or ``S_xa G_ya Gbar_ya``, with crossed dots
    from ``a`` to the named external atoms.
    """
    builder = GraphBuilder()
    atoms = {"x": builder.external("x"), "y": builder.external("y")}
    a = builder.internal()

    builder.waved(atoms["x"], a)
    if transpose:
        builder.G(atoms["y"], a).G(atoms["y"], a, charge=-1)
    else:
        builder.G(a, atoms["y"]).G(a, atoms["y"], charge=-1)

    for name in crossed:
        builder.dot(a, atoms[name], crossed=True)

    return builder.build()


class TestTVariable:
    """
    Test T-variables of standard neutral atoms.
    """

    def test_t_variable(self):
        """
        Test the T-variable of a neutral atom.
        """
        tvar = t_variable(t_var_graph(), 2)

        assert (tvar.x, tvar.y1, tvar.y2) == (0, 1, 1)
        assert not tvar.transposed
        assert tvar.blue == 1
        assert tvar.edges == (0, 1, 2)

    def test_transposed(self):
        """
        Test the transposed T-variable.
        """
        tvar = t_variable(t_var_graph(transpose=True), 2)
        assert tvar.transposed

    def test_not_neutral(self):
        """
        Test atoms which are not standard neutral.
        """
        with pytest.raises(SubstitutionError):
            t_variable(t_var_graph(), 0)

    def test_pick(self):
        """
        Test graphs without internal blue edges have nothing to pick.
        """
        assert pick_t_variable(t_var_graph()) is None


class TestDotCorrections:
    """
    Test the expansion of crossed dots.
    """

    def test_none(self):
        """
        Test a graph without crossed dots.
        """
        graph = t_var_graph()
        base, corrections = dot_corrections(graph, 2)

        assert base.edges == graph.edges
        assert corrections == []

    def test_inclusion_exclusion(self):
        """
        Test two crossed dots give three signed corrections.
        """
        base, corrections = dot_corrections(
            t_var_graph(crossed=("x", "y")), 2)

        assert not base.edges_of(DOTTED)
        assert len(corrections) == 3

        signs = sorted(
            (len(term.edges_of(DOTTED)), term.coeff == 1)
            for term in corrections)
        assert signs == [(1, False), (1, False), (2, True)]


class TestGlue:
    """
    Test the insertion of graphs.
    """

    def host(self):
        """
        Two external atoms ``p`` and ``q``.
        """
        builder = GraphBuilder()
        p = builder.external("p")
        q = builder.external("q")
        builder.waved(p, q)

        return builder.build()

    def test_glue(self):
        """
        Test the external atoms of the piece are identified.
        """
        host = self.host()
        piece = leading_term()

        glued = glue(host, piece, {ATOM_A: 0, ATOM_B1: 1, ATOM_B2: 1}, 2)

        assert len(glued.atoms) == 2
        assert sorted(e.kind for e in glued.edges) == \
            sorted([WAVED, DIFFUSIVE, SOLID])
        assert glued.coeff == M * 2

    def test_errors(self):
        """
        Test missing and unknown external atoms.
        """
        host = self.host()
        piece = leading_term()

        with pytest.raises(SubstitutionError):
            glue(host, piece, {ATOM_A: 0, ATOM_B1: 1})

        with pytest.raises(SubstitutionError):
            glue(host, piece, {ATOM_A: 0, ATOM_B1: 1, ATOM_B2: 1, "z": 0})

    def test_transposed(self):
        """
        Test transposition swaps solid edges only.
        """
        piece = transposed(leading_term())

        solid = piece.edges[piece.solid()[0]]
        assert (solid.a, solid.b) == (2, 1)
        diffusive = piece.edges[piece.edges_of(DIFFUSIVE)[0]]
        assert set(diffusive.ends) == {0, 1}


class TestSubstitute:
    """
    Test the substitution of T-variables.
    """

    def test_leading_only(self):
        """
        Test substitution with the leading term only.
        """
        lower = TExpansion(order=2)
        result = substitute_t_variable(t_var_graph(), 2, lower, 8)

        assert len(result) == 1
        term = result[0]
        assert [e.kind for e in term.edges] == [DIFFUSIVE]
        assert list(term.weights) == [Weight(1, -1, REGULAR)]
        assert term.coeff == M * INV_MM
        assert term.coeff == Coefficient.monomial(1, mb=-1)

    def test_with_crossed_dot(self):
        """
        Test the crossed dot adds the split corrections of a plain dot.
        """
        lower = TExpansion(order=2)
        result = substitute_t_variable(
            t_var_graph(crossed=("y",)), 2, lower, 8)

        assert len(result) == 5
        assert sum(1 for term in result if term.coeff == -1) == 1


class TestFold:
    """
    Test folding graphs into self-energies.
    """

    def folded_graph(self, chain: tuple = None):
        """
        ``Theta_au S_uv S_vw G_w,b1 Gbar_w,b2``.
        """
        builder = GraphBuilder()
        a = builder.external(ATOM_A)
        b1 = builder.external(ATOM_B1)
        b2 = builder.external(ATOM_B2)
        u = builder.internal()
        v = builder.internal()
        w = builder.internal()

        builder.diffusive(a, u, chain=chain) \
            .waved(u, v) \
            .waved(v, w) \
            .G(w, b1) \
            .G(w, b2, charge=-1)

        return builder.build()

    def test_fold(self):
        """
        Test the self-energy left between u and v.
        """
        folded = fold_self_energy(self.folded_graph())

        assert folded.order == 2
        assert folded.corrections == ()

        energy = folded.energy
        assert energy.coeff == INV_MM
        assert energy.by_name(ENERGY_X) == 3
        assert energy.by_name(ENERGY_Y) == 4
        assert [e.kind for e in energy.edges] == [WAVED]
        assert not energy.internals

    def test_errors(self):
        """
        Test graphs which can't be folded.
        """
        with pytest.raises(SubstitutionError):
            fold_self_energy(self.folded_graph(chain=(4,)))

        builder = GraphBuilder()
        a = builder.external(ATOM_A)
        b1 = builder.external(ATOM_B1)
        builder.external(ATOM_B2)
        u = builder.internal()
        builder.diffusive(a, u).waved(u, b1)

        with pytest.raises(SubstitutionError):
            fold_self_energy(builder.build())
