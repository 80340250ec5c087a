"""
.. module:: canonical
    :platform: Linux
    :synopsis: isomorphism invariant keys, canonical relabelling and merging
        of graph terms
"""
import math
import logging
import itertools
import networkx as nx
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.graph import Atom
from libbandgraph.graph import Edge
from libbandgraph.graph import Weight
from libbandgraph.graph import SOLID

LOGGER = logging.getLogger("bandgraph.canonical")

# number of Weisfeiler-Lehman refinements
WL_ITERATIONS = 4

# largest number of relabellings tried inside tied color classes
MAX_PERMUTATIONS = 40320


def _edge_label(edge: Edge) -> str:
    chain = ",".join(str(k) for k in edge.chain) if edge.chain else ""
    return f"e:{edge.kind}:{edge.charge}:{int(edge.crossed)}:{chain}"


def _weight_label(weight: Weight) -> str:
    return f"w:{weight.form}:{weight.charge}:{weight.order}"


def _item_links(item: object, ends: list) -> dict:
    links = {}
    for atom, role in ends:
        links.setdefault(atom, []).append(role)

    if item.pq is not None:
        links.setdefault(item.pq.atom, []).append(item.pq.kind)

    if item.minor is not None:
        links.setdefault(item.minor, []).append("minor")

    return links


def term_graph(graph: GraphTerm) -> nx.Graph:
    """
    Encode a graph term as a simple labelled graph: one node per atom, edge
    and weight, joined by role labelled links. The coefficient is not
    encoded.
    """
    encoded = nx.Graph()

    for atom in graph.atoms:
        label = f"x:{atom.name}" if atom.external else "i"
        encoded.add_node(("atom", atom.id), label=label)

    for index, edge in enumerate(graph.edges):
        node = ("edge", index)
        encoded.add_node(node, label=_edge_label(edge))

        if edge.kind == SOLID:
            ends = [(edge.a, "from"), (edge.b, "to")]
        else:
            ends = [(edge.a, "end"), (edge.b, "end")]

        for atom, roles in _item_links(edge, ends).items():
            encoded.add_edge(node, ("atom", atom), role="+".join(sorted(roles)))

    for index, weight in enumerate(graph.weights):
        node = ("weight", index)
        encoded.add_node(node, label=_weight_label(weight))

        for atom, roles in _item_links(weight, [(weight.atom, "at")]).items():
            encoded.add_edge(node, ("atom", atom), role="+".join(sorted(roles)))

    return encoded


def canonical_hash(graph: GraphTerm) -> str:
    """
    Key invariant under relabelling of the atoms. External atoms are
    distinguished by name. Equal graphs give equal keys, different keys
    imply non-isomorphic graphs.
    """
    encoded = term_graph(graph)
    digest = nx.weisfeiler_lehman_graph_hash(
        encoded,
        node_attr="label",
        edge_attr="role",
        iterations=WL_ITERATIONS)

    return \
        f"{len(graph.atoms)}.{len(graph.edges)}.{len(graph.weights)}.{digest}"


def _node_match(first: dict, second: dict) -> bool:
    return first["label"] == second["label"]


def _edge_match(first: dict, second: dict) -> bool:
    return first["role"] == second["role"]


def isomorphic(first: GraphTerm, second: GraphTerm) -> bool:
    """
    True if the two graphs coincide up to relabelling of atoms, ignoring
    coefficients.
    """
    if len(first.atoms) != len(second.atoms):
        return False

    if len(first.edges) != len(second.edges):
        return False

    if len(first.weights) != len(second.weights):
        return False

    return nx.is_isomorphic(
        term_graph(first),
        term_graph(second),
        node_match=_node_match,
        edge_match=_edge_match)


def _edge_key(edge: Edge) -> tuple:
    pq = (edge.pq.kind, edge.pq.atom) if edge.pq else ("", -1)
    minor = -1 if edge.minor is None else edge.minor
    chain = edge.chain or ()
    return (edge.kind, edge.a, edge.b, edge.charge, edge.crossed,
            chain, pq, minor)


def _weight_key(weight: Weight) -> tuple:
    pq = (weight.pq.kind, weight.pq.atom) if weight.pq else ("", -1)
    minor = -1 if weight.minor is None else weight.minor
    order = -1 if weight.order is None else weight.order
    return (weight.atom, weight.form, weight.charge, pq, minor, order)


def _oriented(edge: Edge) -> Edge:
    if edge.kind == SOLID or edge.a <= edge.b:
        return edge

    return Edge(edge.kind, edge.b, edge.a, crossed=edge.crossed,
                chain=edge.chain)


def _relabelled(graph: GraphTerm, mapping: dict) -> tuple:
    edges = sorted(
        (_oriented(edge.relabel(mapping)) for edge in graph.edges),
        key=_edge_key)

    weights = sorted(
        (weight.relabel(mapping) for weight in graph.weights),
        key=_weight_key)

    return edges, weights


def _signature(edges: list, weights: list) -> tuple:
    return (
        tuple(_edge_key(edge) for edge in edges),
        tuple(_weight_key(weight) for weight in weights))


def canonical_form(graph: GraphTerm) -> GraphTerm:
    """
    Relabel atoms so that isomorphic graphs become identical: external atoms
    first, sorted by name, then internal atoms sorted by their refined
    color, ties broken by the smallest resulting edge list.
    """
    externals = sorted(
        (atom for atom in graph.atoms if atom.external),
        key=lambda atom: atom.name)

    mapping = {atom.id: index for index, atom in enumerate(externals)}
    offset = len(externals)

    internals = graph.internals
    colors = {}
    if internals:
        hashes = nx.weisfeiler_lehman_subgraph_hashes(
            term_graph(graph),
            node_attr="label",
            edge_attr="role",
            iterations=WL_ITERATIONS)

        for atom in internals:
            colors[atom] = hashes[("atom", atom)][-1]

    classes = {}
    for atom in internals:
        classes.setdefault(colors[atom], []).append(atom)

    groups = [classes[color] for color in sorted(classes)]

    count = 1
    for group in groups:
        count *= math.factorial(len(group))

    if count > MAX_PERMUTATIONS:
        LOGGER.warning(
            "Too many tied atoms (%d relabellings): using id order", count)
        groups = [[atom for group in groups for atom in group]]
        choices = [[tuple(groups[0])]]
    else:
        choices = [list(itertools.permutations(group)) for group in groups]

    best = None
    for choice in itertools.product(*choices):
        trial = dict(mapping)
        index = offset
        for group in choice:
            for atom in group:
                trial[atom] = index
                index += 1

        edges, weights = _relabelled(graph, trial)
        signature = _signature(edges, weights)

        if best is None or signature < best[0]:
            best = (signature, trial, edges, weights)

    _, trial, edges, weights = best

    atoms = [
        Atom(trial[atom.id], atom.external, atom.name)
        for atom in graph.atoms
    ]

    return GraphTerm(atoms, edges, weights, graph.coeff)


def _form_key(form: GraphTerm) -> tuple:
    names = tuple(
        (atom.id, atom.name or "") for atom in form.atoms if atom.external)

    return (len(form.atoms), names) + _signature(form.edges, form.weights)


def canonical_key(graph: GraphTerm) -> tuple:
    """
    Sortable key of the canonical form of a graph, excluding the
    coefficient. Two graphs have the same key if and only if they are
    isomorphic.
    """
    return _form_key(canonical_form(graph))


def merge_terms(terms: list) -> Expansion:
    """
    Merge isomorphic terms by summing their coefficients. Terms whose
    coefficients cancel are dropped. First occurrences keep their position.
    """
    buckets = {}
    merged = []

    for term in terms:
        key = canonical_hash(term)
        slots = buckets.setdefault(key, [])

        for slot in slots:
            if isomorphic(merged[slot], term):
                merged[slot] = merged[slot].replace(
                    coeff=merged[slot].coeff + term.coeff)
                break
        else:
            slots.append(len(merged))
            merged.append(term)

    return Expansion(merged)


def canonical_expansion(expansion: Expansion) -> Expansion:
    """
    Merge isomorphic terms, bring every term into canonical form and sort
    them by canonical key.
    """
    forms = [canonical_form(term) for term in merge_terms(list(expansion))]

    keyed = [(_form_key(form), form) for form in forms]

    keyed.sort(key=lambda item: item[0])

    return Expansion(form for _, form in keyed)
