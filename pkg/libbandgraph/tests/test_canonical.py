"""
Unittests for canonical module.
"""
from libbandgraph.coefficient import M
from libbandgraph.graph import Expansion
from libbandgraph.graph import GraphBuilder
from libbandgraph.canonical import canonical_expansion
from libbandgraph.canonical import canonical_form
from libbandgraph.canonical import canonical_hash
from libbandgraph.canonical import canonical_key
from libbandgraph.canonical import isomorphic
from libbandgraph.canonical import merge_terms


def star(order: list, coeff=1):
    """
    ``G_xa s_ab Gbar_by`` where internal atoms are created in ``order``.
    """
    builder = GraphBuilder()
    x = builder.external("x")
    y = builder.external("y")
    atoms = {}
    for name in order:
        atoms[name] = builder.internal()

    builder.G(x, atoms["a"]) \
        .waved(atoms["a"], atoms["b"]) \
        .G(atoms["b"], y, charge=-1)

    return builder.build(coeff)


class TestCanonical:
    """
    Test isomorphism and canonical forms.
    """

    def test_relabelled(self):
        """
        Test relabelled graphs are isomorphic with the same key.
        """
        first = star(["a", "b"])
        second = star(["b", "a"])

        assert first.edges != second.edges
        assert isomorphic(first, second)
        assert canonical_hash(first) == canonical_hash(second)
        assert canonical_key(first) == canonical_key(second)
        assert canonical_form(first).edges == canonical_form(second).edges

    def test_externals_matter(self):
        """
        Test swapping external names changes the graph.
        """
        first = star(["a", "b"])
        second = first.conjugate()

        assert not isomorphic(first, second)
        assert canonical_key(first) != canonical_key(second)

    def test_canonical_form_keeps_coeff(self):
        """
        Test the canonical form keeps the coefficient.
        """
        assert canonical_form(star(["a", "b"], M)).coeff == M

    def test_merge_terms(self):
        """
        Test isomorphic terms are merged and cancellations dropped.
        """
        merged = merge_terms([
            star(["a", "b"], 1),
            star(["b", "a"], 2),
            star(["a", "b"]).conjugate(),
        ])

        assert len(merged) == 2
        assert merged[0].coeff == 3

        cancelled = merge_terms([star(["a", "b"], 1), star(["b", "a"], -1)])
        assert len(cancelled) == 0

    def test_canonical_expansion(self):
        """
        Test canonical expansions don't depend on the terms order.
        """
        terms = [star(["a", "b"]), star(["a", "b"]).conjugate()]

        first = canonical_expansion(Expansion(terms))
        second = canonical_expansion(Expansion(reversed(terms)))

        assert [t.edges for t in first] == [t.edges for t in second]
