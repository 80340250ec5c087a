"""
.. module:: substitution
    :platform: Linux
    :synopsis: T-variables of standard graphs, their substitution with a
        lower order T-expansion and the folding of graphs into
        self-energies
"""
import logging
import itertools
import dataclasses
from libbandgraph.coefficient import Coefficient
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.graph import Atom
from libbandgraph.graph import Edge
from libbandgraph.graph import SOLID
from libbandgraph.graph import WAVED
from libbandgraph.graph import DOTTED
from libbandgraph.graph import ATOM_A
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2
from libbandgraph.classify import is_standard_neutral
from libbandgraph.classify import is_q_graph
from libbandgraph.molecular import BLUE
from libbandgraph.molecular import molecular_graph
from libbandgraph.structure import isolated_subgraphs
from libbandgraph.structure import pre_deterministic_order
from libbandgraph.operators import normalize
from libbandgraph.operators import normalize_all
from libbandgraph.qexpand import q_expand
from libbandgraph.texpansion import ExpansionError
from libbandgraph.texpansion import TExpansion
from libbandgraph.texpansion import ENERGY_X
from libbandgraph.texpansion import ENERGY_Y
from libbandgraph.texpansion import graph_order
from libbandgraph.texpansion import has_tail
from libbandgraph.texpansion import a_edge

LOGGER = logging.getLogger("bandgraph.substitution")

# |m|^-2
INV_MM = Coefficient.monomial(1, m=-1, mb=-1)


class SubstitutionError(ExpansionError):
    """
    Raised when a T-variable can't be found, substituted or folded.
    """


@dataclasses.dataclass(frozen=True)
class TVariable:
    """
    A T-variable ``sum_alpha s_x,alpha G_alpha,y1 Gbar_alpha,y2`` of a
    graph, or its transpose ``sum_alpha s_x,alpha G_y1,alpha
    Gbar_y2,alpha``. ``edges`` are the indexes of the waved, blue and red
    edges.
    """
    atom: int
    x: int
    y1: int
    y2: int
    transposed: bool
    blue: int
    edges: tuple


def t_variable(graph: GraphTerm, atom: int) -> TVariable:
    """
    The T-variable centered at a standard neutral atom.
    """
    if not is_standard_neutral(graph, atom):
        raise SubstitutionError(f"atom {atom} is not standard neutral")

    waved = None
    blue = None
    red = None
    for index in graph.incident(atom):
        edge = graph.edges[index]
        if edge.kind == WAVED:
            waved = index
        elif edge.kind == SOLID and edge.charge > 0:
            blue = index
        elif edge.kind == SOLID:
            red = index

    return TVariable(
        atom=atom,
        x=graph.edges[waved].other(atom),
        y1=graph.edges[blue].other(atom),
        y2=graph.edges[red].other(atom),
        transposed=not graph.edges[blue].row_of(atom),
        blue=blue,
        edges=(waved, blue, red))


def pick_t_variable(graph: GraphTerm) -> TVariable:
    """
    The T-variable to substitute next: centered at an endpoint of the
    first internal blue edge, in pre-deterministic order, that has a
    standard neutral endpoint. Edges of the minimal isolated subgraph go
    first. Returns None if there is no such edge.

    :raises SubstitutionError: when the graph has internal blue edges but
        no pre-deterministic order.
    """
    mol = molecular_graph(graph).red_free()
    if not mol.internal_edges(BLUE):
        return None

    order = pre_deterministic_order(mol)
    if order is None:
        raise SubstitutionError("graph has no pre-deterministic order")

    mis = isolated_subgraphs(mol).mis

    def _inside(key: int) -> bool:
        edge = mol.edge(key)
        return edge.a in mis and edge.b in mis

    keys = [key for key in order if _inside(key)]
    keys += [key for key in order if not _inside(key)]

    for key in keys:
        edge = graph.edges[key]
        for atom in edge.ends:
            if is_standard_neutral(graph, atom):
                return t_variable(graph, atom)

    return None


def dot_corrections(graph: GraphTerm, atom: int) -> tuple:
    """
    Expand the crossed dotted edges at ``atom`` as ``1(x != w) =
    1 - 1(x = w)``. Returns the graph without them and the list of terms
    with plain dotted edges, so that the graph equals their sum.
    """
    crossed = [
        index for index in graph.incident(atom, DOTTED)
        if graph.edges[index].crossed
    ]
    base = graph.without(edges=crossed)

    others = sorted({graph.edges[index].other(atom) for index in crossed})
    corrections = []
    for size in range(1, len(others) + 1):
        for subset in itertools.combinations(others, size):
            dots = [Edge(DOTTED, atom, other) for other in subset]
            corrections.append(
                base.with_items(edges=dots).scaled((-1) ** size))

    return base, corrections


def glue(host: GraphTerm, piece: GraphTerm, ends: dict,
         coeff: Coefficient = 1) -> GraphTerm:
    """
    Insert ``piece`` into ``host``: the external atoms of ``piece`` are
    identified with the host atoms given in ``ends``, by name, and its
    internal atoms get fresh ids.
    """
    mapping = {}
    for name, target in ends.items():
        source = piece.by_name(name)
        if source is None:
            raise SubstitutionError(f"piece has no external atom '{name}'")
        mapping[source] = target

    missing = set(piece.externals) - set(mapping)
    if missing:
        raise SubstitutionError(f"unmapped external atoms {sorted(missing)}")

    atoms = []
    fresh = host.next_id()
    for atom in piece.internals:
        mapping[atom] = fresh
        atoms.append(Atom(fresh))
        fresh += 1

    return host.with_items(
        edges=[edge.relabel(mapping) for edge in piece.edges],
        weights=[weight.relabel(mapping) for weight in piece.weights],
        atoms=atoms).scaled(piece.coeff * coeff)


def transposed(piece: GraphTerm) -> GraphTerm:
    """
    Transpose every resolvent entry of a graph.
    """
    return piece.replace(edges=[
        dataclasses.replace(edge, a=edge.b, b=edge.a)
        if edge.kind == SOLID else edge
        for edge in piece.edges
    ])


def _route(graph: GraphTerm, error_order: int) -> list:
    """
    Graphs with labels other than Q-graphs go through a Q-expansion.
    """
    if has_tail(graph) or graph_order(graph) > error_order:
        return [graph]

    if graph.is_labelled() and not is_q_graph(graph):
        return list(q_expand(graph, error_order).expansion)

    return [graph]


def substitute_t_variable(
        graph: GraphTerm,
        atom: int,
        lower: TExpansion,
        error_order: int) -> Expansion:
    """
    Replace the T-variable centered at ``atom`` by the lower order
    T-expansion ``lower``, given in the variables ``a``, ``b1`` and
    ``b2``. Crossed dotted edges at ``atom`` are expanded first, and the
    terms with plain dotted edges are returned unchanged. Labelled
    outcomes are Q-expanded.
    """
    tvar = t_variable(graph, atom)

    base, corrections = dot_corrections(graph, atom)
    indexes = [base.edges.index(graph.edges[i]) for i in tvar.edges]
    rest = base.without(edges=indexes).drop_atoms([atom])

    ends = {ATOM_A: tvar.x, ATOM_B1: tvar.y1, ATOM_B2: tvar.y2}

    terms = []
    for piece in lower.terms():
        if tvar.transposed:
            piece = transposed(piece)

        terms.extend(normalize(glue(rest, piece, ends, INV_MM)))

    terms.extend(normalize_all(corrections))

    result = []
    for term in terms:
        result.extend(_route(term, error_order))

    LOGGER.debug(
        "Substituted T-variable at atom %d with %d terms",
        atom, len(result))

    return Expansion(result)


@dataclasses.dataclass(frozen=True)
class FoldedEnergy:
    """
    A graph ``sum Theta_au E_uv T_v,b1b2`` split into its self-energy
    graph ``E_xy`` of order ``order`` and the terms left by the crossed
    dotted edges of the T-variable.
    """
    order: int
    energy: GraphTerm
    corrections: tuple


def _energy_t_variable(graph: GraphTerm, b1: int, b2: int) -> TVariable:
    for atom in graph.internals:
        if not is_standard_neutral(graph, atom):
            continue

        tvar = t_variable(graph, atom)
        if not tvar.transposed and tvar.y1 == b1 and tvar.y2 == b2:
            return tvar

    return None


def fold_self_energy(graph: GraphTerm) -> FoldedEnergy:
    """
    Fold a standard graph without T-variables to substitute into the form
    ``sum_u,v Theta_au E_uv T_v,b1b2``. The deterministic graph left
    between ``u`` and ``v`` is the self-energy ``E_xy``, multiplied by
    ``|m|^-2``.

    :raises SubstitutionError: when the graph does not have this form.
    """
    a = graph.by_name(ATOM_A)
    b1 = graph.by_name(ATOM_B1)
    b2 = graph.by_name(ATOM_B2)

    diff = a_edge(graph)
    u = graph.edges[diff].other(a)
    if graph.edges[diff].chain:
        raise SubstitutionError("diffusive edge at 'a' carries a chain")

    tvar = _energy_t_variable(graph, b1, b2)
    if tvar is None:
        raise SubstitutionError("no T-variable to b1 and b2")

    base, corrections = dot_corrections(graph, tvar.atom)
    indexes = [base.edges.index(graph.edges[i]) for i in tvar.edges]
    indexes.append(base.edges.index(graph.edges[diff]))
    rest = base.without(edges=indexes).drop_atoms([tvar.atom])

    for atom in (a, b1, b2):
        if rest.incident(atom):
            raise SubstitutionError(f"atom {atom} keeps edges after folding")

    if rest.solid() or rest.weights:
        raise SubstitutionError("self-energy graph is not deterministic")

    v = tvar.x
    if graph.is_external(u) or graph.is_external(v):
        raise SubstitutionError("self-energy ends on an external atom")

    energy = GraphTerm(
        [atom for atom in rest.atoms if atom.id not in (a, b1, b2)],
        rest.edges,
        rest.weights,
        rest.coeff * INV_MM)

    atoms = [
        Atom(atom.id, True, ENERGY_X) if atom.id == u else
        Atom(atom.id, True, ENERGY_Y) if atom.id == v else atom
        for atom in energy.atoms
    ]
    energy = energy.replace(atoms=atoms)

    if u == v:
        extra = energy.next_id()
        energy = energy.with_items(
            edges=[Edge(DOTTED, u, extra)],
            atoms=[Atom(extra, True, ENERGY_Y)])

    return FoldedEnergy(graph_order(energy), energy, tuple(corrections))

