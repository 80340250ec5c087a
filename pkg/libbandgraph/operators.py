"""
.. module:: operators
    :platform: Linux
    :synopsis: local rewrite operators on atomic graphs: merging, dotted
        edge partition, weight, multi-edge, GG and G-Gbar expansions
"""
import typing
import itertools
import logging
import dataclasses
import networkx as nx
from libbandgraph import BandGraphException
from libbandgraph.coefficient import Coefficient
from libbandgraph.coefficient import M
from libbandgraph.coefficient import MB
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.graph import Atom
from libbandgraph.graph import Edge
from libbandgraph.graph import Weight
from libbandgraph.graph import Label
from libbandgraph.graph import SOLID
from libbandgraph.graph import WAVED
from libbandgraph.graph import WAVED_PLUS
from libbandgraph.graph import WAVED_MINUS
from libbandgraph.graph import DOTTED
from libbandgraph.graph import REGULAR
from libbandgraph.graph import LIGHT
from libbandgraph.graph import INVERSE
from libbandgraph.graph import TAIL
from libbandgraph.classify import solid_degree
from libbandgraph.classify import is_matched

LOGGER = logging.getLogger("bandgraph.operators")

# tags of the terms produced by one integration by parts
TAG_DELTA = "delta"
TAG_LIGHT = "light"


class OperatorError(BandGraphException):
    """
    Raised when a graph doesn't match the pattern an operator expects.
    """


@dataclasses.dataclass(frozen=True)
class IBPTerm:
    """
    One term of a Gaussian integration by parts. ``tag`` is ``"delta"``,
    ``"light"`` or ``("e", index)``/``("w", index)`` naming the
    differentiated factor of the input graph.
    """
    tag: typing.Any
    graph: GraphTerm


def centre(charge: int) -> Coefficient:
    """
    ``m`` for charge +1 and ``conj(m)`` for charge -1.
    """
    return M if charge > 0 else MB


def entry_of(edge: Edge) -> tuple:
    """
    ``(row, column)`` of the resolvent entry of a solid edge, where
    ``Gbar_ab`` is the entry ``(b, a)`` of ``G(zbar)``.
    """
    if edge.kind != SOLID:
        raise OperatorError(f"{edge} is not a solid edge")

    if edge.charge > 0:
        return edge.a, edge.b

    return edge.b, edge.a


def make_entry(
        row: int,
        col: int,
        charge: int,
        pq: Label = None) -> typing.Any:
    """
    Solid edge or regular weight for the entry ``(row, col)`` of ``G`` or
    ``G(zbar)``.
    """
    if row == col:
        return Weight(row, charge, REGULAR, pq=pq)

    if charge > 0:
        return Edge(SOLID, row, col, charge=1, pq=pq)

    return Edge(SOLID, col, row, charge=-1, pq=pq)


def _split_items(items: list) -> tuple:
    edges = [item for item in items if isinstance(item, Edge)]
    weights = [item for item in items if isinstance(item, Weight)]
    return edges, weights


def _in_scope(item: typing.Any, scope: Label) -> bool:
    if isinstance(item, Edge) and item.kind != SOLID:
        return False

    return item.pq == scope


def op_merge(graph: GraphTerm) -> GraphTerm:
    """
    Merge the internal atoms joined by paths of plain dotted edges. Solid
    edges inside a merged class become regular weights, other edges become
    loops. Internal atoms pinned to external atoms keep one dotted edge to
    each of them. Returns None when a crossed dotted edge joins two atoms
    of the same class, i.e. the graph is zero.
    """
    plain = [
        edge for edge in graph.edges
        if edge.kind == DOTTED and not edge.crossed
    ]

    net = nx.Graph()
    net.add_nodes_from(atom.id for atom in graph.atoms)
    net.add_edges_from(edge.ends for edge in plain)

    mapping = {}
    component = {}
    anchor = {}
    dots = []

    for nodes in nx.connected_components(net):
        nodes = sorted(nodes)
        key = nodes[0]
        for node in nodes:
            component[node] = key

        internals = [n for n in nodes if not graph.is_external(n)]
        externals = [n for n in nodes if graph.is_external(n)]

        if internals:
            rep = internals[0]
            for node in internals:
                mapping[node] = rep

            dots.extend(Edge(DOTTED, rep, ext) for ext in externals)
            anchor[key] = rep
        else:
            dots.extend(
                Edge(DOTTED, first, second)
                for first, second in zip(externals, externals[1:]))
            anchor[key] = externals[0]

    edges = []
    weights = [weight.relabel(mapping) for weight in graph.weights]
    crossed = set()

    for edge in graph.edges:
        if edge.kind == DOTTED and not edge.crossed:
            continue

        same = component[edge.a] == component[edge.b]
        moved = edge.relabel(mapping)

        if edge.kind == DOTTED:
            if same:
                return None

            pair = frozenset(moved.ends)
            if pair in crossed:
                continue

            crossed.add(pair)
            edges.append(moved)
        elif edge.kind == SOLID and same:
            weights.append(Weight(
                anchor[component[edge.a]],
                edge.charge,
                REGULAR,
                pq=moved.pq,
                minor=moved.minor))
        else:
            edges.append(moved)

    atoms = [
        atom for atom in graph.atoms
        if mapping.get(atom.id, atom.id) == atom.id
    ]

    return GraphTerm(atoms, edges + dots, weights, graph.coeff)


def _crossed_pairs(graph: GraphTerm) -> dict:
    pairs = {}
    for index, edge in enumerate(graph.edges):
        if edge.kind == DOTTED and edge.crossed:
            pairs[frozenset(edge.ends)] = index

    return pairs


def _solid_pairs(graph: GraphTerm) -> set:
    return {
        frozenset(edge.ends) for edge in graph.edges
        if edge.kind == SOLID and not edge.is_loop
    }


def op_dot(graph: GraphTerm) -> Expansion:
    """
    Partition ``1 = 1(a = b) + 1(a != b)`` over the pairs joined by solid
    edges without crossed dotted edge, and ``1(a != b) = 1 - 1(a = b)``
    over crossed dotted edges without solid edge, merging after each
    step. Inconsistent terms are dropped. A normal graph is returned
    unchanged.
    """
    done = []
    stack = [graph]

    while stack:
        current = op_merge(stack.pop())
        if current is None:
            continue

        crossed = _crossed_pairs(current)
        solid = _solid_pairs(current)

        missing = sorted((sorted(p) for p in solid - set(crossed)))
        if missing:
            first, second = missing[0]
            stack.append(current.with_items(
                edges=[Edge(DOTTED, first, second)]))
            stack.append(current.with_items(
                edges=[Edge(DOTTED, first, second, crossed=True)]))
            continue

        orphans = sorted((sorted(p) for p in set(crossed) - solid))
        if orphans:
            first, second = orphans[0]
            index = crossed[frozenset((first, second))]
            bare = current.without(edges=[index])
            stack.append(
                bare.with_items(edges=[Edge(DOTTED, first, second)])
                .scaled(-1))
            stack.append(bare)
            continue

        done.append(current)

    return Expansion(done)


def _q_labels(graph: GraphTerm) -> set:
    return {label for label in graph.labels() if label.kind == "Q"}


def split_weights(graph: GraphTerm, atoms: typing.Iterable = None) -> list:
    """
    Write every regular weight on internal atoms, or on ``atoms``, as
    ``m + (G_xx - m)``. Terms losing every factor of a ``Q_x`` label are
    zero and dropped.
    """
    if atoms is None:
        targets = set(graph.internals)
    else:
        targets = set(atoms)

    regular = [
        i for i, weight in enumerate(graph.weights)
        if weight.form == REGULAR and weight.atom in targets
    ]
    if not regular:
        return [graph]

    labels = _q_labels(graph)
    result = []

    # each regular weight becomes light (True) or its centre (False)
    for choice in itertools.product((True, False), repeat=len(regular)):
        picked = dict(zip(regular, choice))
        coeff = graph.coeff
        weights = []
        for index, weight in enumerate(graph.weights):
            if index not in picked:
                weights.append(weight)
            elif picked[index]:
                weights.append(dataclasses.replace(weight, form=LIGHT))
            else:
                coeff = coeff * centre(weight.charge)

        term = graph.replace(weights=weights, coeff=coeff)
        if labels - _q_labels(term):
            continue

        result.append(term)

    return result


def normalize(graph: GraphTerm) -> Expansion:
    """
    Dotted edge partition followed by the split of the regular weights on
    internal atoms.
    """
    terms = []
    for term in op_dot(graph):
        terms.extend(split_weights(term))

    return Expansion(terms)


def normalize_all(terms: typing.Iterable) -> Expansion:
    """
    Normalize every graph of a sequence.
    """
    result = []
    for term in terms:
        result.extend(normalize(term))

    return Expansion(result)


def _check_atom(graph: GraphTerm, atom: int, external: bool = False) -> None:
    if not graph.has_atom(atom):
        raise OperatorError(f"atom {atom} is not in the graph")

    if not external and graph.is_external(atom):
        raise OperatorError(f"atom {atom} is external")


def ibp(
        graph: GraphTerm,
        atom: int,
        target: tuple,
        scope: Label = None) -> list:
    """
    Gaussian integration by parts of the entry ``target`` at ``atom``,
    where ``target`` is ``("e", index)`` or ``("w", index)``. Only the
    random factors labelled by ``scope`` take part in the derivatives, and
    the new factors carry ``scope``.

    With ``E[h_xa F] = s_xa E[d F / d h_ax]`` and
    ``d G_rk / d h_ij = -G_ri G_jk``, a row entry ``G_xy f`` gives

    - ``m 1(x = y) f``
    - ``m sum_a s_xa (G_aa - m) G_xy f``
    - ``-m sum_a s_xa G_ay d f / d h_ax``

    and a column entry ``G_wx f`` the same with ``G_wa d f / d h_xa``. A
    light weight ``(G_xx - m) f`` has no delta term and keeps ``G_xx`` as a
    regular weight in the second term. Labelled expansions may run at an
    external atom, whose index is fixed instead of summed.
    """
    _check_atom(graph, atom, external=scope is not None)

    kind, index = target
    if kind == "e":
        item = graph.edges[index]
        row, col = entry_of(item)
        if row == col:
            raise OperatorError(f"solid loop {item} at atom {atom}")
        if atom not in (row, col):
            raise OperatorError(f"{item} doesn't touch atom {atom}")
        base = graph.without(edges=[index])
    elif kind == "w":
        item = graph.weights[index]
        if item.atom != atom:
            raise OperatorError(f"{item} isn't at atom {atom}")
        if item.form not in (REGULAR, LIGHT):
            raise OperatorError(f"can't expand a {item.form} weight")
        row = col = atom
        base = graph.without(weights=[index])
    else:
        raise OperatorError(f"Unknown target kind '{kind}'")

    if item.pq != scope:
        raise OperatorError(f"{item} is not in scope {scope}")

    if item.minor is not None:
        raise OperatorError(f"{item} carries a minor label")

    charge = item.charge
    coeff = centre(charge)
    fresh = graph.next_id()
    alpha = Atom(fresh)
    waved = Edge(WAVED, atom, fresh)

    if kind == "w":
        kept = dataclasses.replace(item, form=REGULAR)
    else:
        kept = item

    terms = []

    # delta term
    if kind == "e":
        other = col if atom == row else row
        terms.append(IBPTerm(TAG_DELTA, base.with_items(
            edges=[Edge(DOTTED, atom, other)]).scaled(coeff)))
    elif item.form == REGULAR:
        terms.append(IBPTerm(TAG_DELTA, base.scaled(coeff)))

    # light weight term
    edges, weights = _split_items([kept])
    terms.append(IBPTerm(TAG_LIGHT, base.with_items(
        atoms=[alpha],
        edges=[waved] + edges,
        weights=weights + [Weight(fresh, charge, LIGHT, pq=scope)],
    ).scaled(coeff)))

    # derivative terms, with d/d h_ij
    if atom == row:
        moved = make_entry(fresh, col, charge, scope)
        first, second = fresh, atom
    else:
        moved = make_entry(row, fresh, charge, scope)
        first, second = atom, fresh

    factors = [
        ("e", i, edge) for i, edge in enumerate(graph.edges)
        if _in_scope(edge, scope)
    ] + [
        ("w", i, weight) for i, weight in enumerate(graph.weights)
        if _in_scope(weight, scope)
    ]

    for fkind, findex, factor in factors:
        if (fkind, findex) == target:
            continue

        if factor.minor is not None:
            raise OperatorError(f"{factor} carries a minor label")

        if fkind == "e":
            r, k = entry_of(factor)
            sign = -1
            extra = []
        elif factor.form in (REGULAR, LIGHT):
            r = k = factor.atom
            sign = -1
            extra = []
        elif factor.form == INVERSE:
            r = k = factor.atom
            sign = 1
            extra = [factor, factor]
        else:
            raise OperatorError(f"can't differentiate a {TAIL} weight")

        created = [
            moved,
            make_entry(r, first, factor.charge, scope),
            make_entry(second, k, factor.charge, scope),
        ] + extra

        dropped = {"e": [], "w": []}
        dropped[fkind].append(findex)
        dropped[kind].append(index)
        reduced = graph.without(edges=dropped["e"], weights=dropped["w"])

        edges, weights = _split_items(created)
        term = reduced.with_items(
            atoms=[alpha],
            edges=[waved] + edges,
            weights=weights,
        ).scaled(coeff * (-sign))

        terms.append(IBPTerm((fkind, findex), term))

    LOGGER.debug(
        "Integration by parts at atom %d on %s: %d terms",
        atom, target, len(terms))

    return terms


def q_residual(graph: GraphTerm, atom: int, terms: list) -> list:
    """
    ``Q_x[graph] - sum Q_x[term]``, which completes the expectation
    identity of an integration by parts into an exact one. Deterministic
    graphs have no ``Q_x`` part.
    """
    label = Label("Q", atom)
    residual = []

    for sign, term in [(1, graph)] + [(-1, t) for t in terms]:
        if not term.solid() and not term.weights:
            continue

        residual.append(term.label_random(label).scaled(sign))

    return residual


def _require_unlabelled(graph: GraphTerm) -> None:
    if graph.is_labelled():
        raise OperatorError("graph carries P/Q labels")

    if graph.has_transients():
        raise OperatorError("graph carries transient factors")


def _light_to_regular_split(term: GraphTerm, atom: int) -> GraphTerm:
    """
    Keep only the light part of the unique unlabelled regular weight at
    ``atom``.
    """
    found = [
        i for i in term.weights_at(atom)
        if term.weights[i].form == REGULAR and term.weights[i].pq is None
    ]
    if len(found) != 1:
        raise OperatorError(
            f"expected one regular weight at {atom}, found {len(found)}")

    weights = list(term.weights)
    weights[found[0]] = dataclasses.replace(weights[found[0]], form=LIGHT)

    return term.replace(weights=weights)


def _resummed(graph: GraphTerm, atom: int, target: tuple, tag: typing.Any) -> list:
    """
    Integration by parts at ``atom`` where the regular weight at ``atom``
    created in the ``tag`` term is split and its ``m`` part dropped, as it
    is resummed by the ``S+``/``S-`` edge. The Q residual is appended.
    """
    raw = ibp(graph, atom, target)

    kept = []
    for term in raw:
        if term.tag == tag:
            kept.append(_light_to_regular_split(term.graph, atom))
        else:
            kept.append(term.graph)

    return kept + q_residual(graph, atom, [t.graph for t in raw])


def _moved(graph: GraphTerm, atom: int, edges: list, weights: list, charge: int) -> tuple:
    """
    Move the given edges and weights from ``atom`` to a new atom linked to
    ``atom`` by an ``S+`` (or ``S-``) edge. Returns the new graph and the
    new atom.
    """
    fresh = graph.next_id()
    mapping = {atom: fresh}

    new_edges = [graph.edges[i].relabel(mapping) for i in edges]
    new_weights = [graph.weights[i].relabel(mapping) for i in weights]

    kind = WAVED_PLUS if charge > 0 else WAVED_MINUS

    moved = graph.without(edges=edges, weights=weights).with_items(
        atoms=[Atom(fresh)],
        edges=[Edge(kind, atom, fresh)] + new_edges,
        weights=new_weights)

    return moved, fresh


def op_weight(graph: GraphTerm, atom: int) -> Expansion:
    """
    Weight expansion at ``atom``: regular weights are split into
    ``m + (G_xx - m)``, then the first light weight is expanded with

    ``(G_xx - m) f = r_x + sum_a S+_xa r_a``

    where ``r_x`` is the integration by parts of ``(G_xx - m) f`` without
    its ``m^2 sum_a s_xa (G_aa - m) f`` part, plus the Q residual. Minus
    charges use ``conj(m)`` and ``S-``. The result is normalized.
    """
    _check_atom(graph, atom)
    _require_unlabelled(graph)

    if not graph.weights_at(atom):
        return Expansion([graph])

    result = []
    for term in split_weights(graph, [atom]):
        lights = [
            i for i in term.weights_at(atom)
            if term.weights[i].form == LIGHT
        ]
        if not lights:
            result.extend(normalize(term))
            continue

        index = lights[0]
        charge = term.weights[index].charge

        produced = _resummed(term, atom, ("w", index), TAG_LIGHT)

        moved, fresh = _moved(term, atom, [], [index], charge)
        produced += _resummed(
            moved, fresh, ("w", len(moved.weights) - 1), TAG_LIGHT)

        result.extend(normalize_all(produced))

    LOGGER.debug("Weight expansion at %d: %d terms", atom, len(result))

    return Expansion(result)


def _solid_at(graph: GraphTerm, atom: int) -> list:
    found = []
    for index in graph.incident(atom, SOLID):
        if graph.edges[index].is_loop:
            raise OperatorError(f"solid loop at atom {atom}")
        found.append(index)

    return found


def edge_counts(graph: GraphTerm, atom: int, scope: Label = None) -> dict:
    """
    Solid edges at ``atom`` labelled by ``scope``, sorted in the four
    classes ``G_xy``, ``Gbar_xy``, ``G_wx`` and ``Gbar_wx``, keyed 1 to 4.
    """
    counts = {1: [], 2: [], 3: [], 4: []}
    for index in _solid_at(graph, atom):
        edge = graph.edges[index]
        if edge.pq != scope:
            continue

        if edge.a == atom:
            key = 1 if edge.charge > 0 else 2
        else:
            key = 3 if edge.charge > 0 else 4

        counts[key].append(index)

    return counts


def _plain(graph: GraphTerm, atom: int, target: tuple) -> Expansion:
    raw = [t.graph for t in ibp(graph, atom, target)]
    return normalize_all(raw + q_residual(graph, atom, raw))


def op_multi_edge(graph: GraphTerm, atom: int) -> Expansion:
    """
    Multi-edge expansion at ``atom``. The expanded entry is the first
    ``G_xy``, otherwise the first ``Gbar_xy'``, ``G_wx`` or ``Gbar_w'x``,
    which gives the conjugate and transposed cases.
    """
    _check_atom(graph, atom)
    _require_unlabelled(graph)

    if graph.weights_at(atom):
        raise OperatorError(f"atom {atom} carries weights")

    counts = edge_counts(graph, atom)
    for key in (1, 2, 3, 4):
        if counts[key]:
            return _plain(graph, atom, ("e", counts[key][0]))

    raise OperatorError(f"no solid edge at atom {atom}")


def _two_matched(graph: GraphTerm, atom: int) -> tuple:
    _check_atom(graph, atom)
    _require_unlabelled(graph)

    if graph.weights_at(atom):
        raise OperatorError(f"atom {atom} carries weights")

    edges = _solid_at(graph, atom)
    if len(edges) != 2 or solid_degree(graph, atom) != 2:
        raise OperatorError(f"atom {atom} hasn't exactly two solid edges")

    first, second = edges
    if not is_matched(graph, atom, first, second):
        raise OperatorError(f"solid edges at {atom} are not matched")

    return first, second


def op_gg(graph: GraphTerm, atom: int) -> Expansion:
    """
    GG expansion of ``G_xy G_y'x f`` at ``x``: with
    ``u_w = G_wy G_y'w f`` the integration by parts gives
    ``u_x = m^2 sum_a s_xa u_a + r_x``, hence ``u_x = r_x + sum_a S+_xa r_a``,
    whose delta term is the main term ``m S+_xy G_y'y f``.
    """
    first, second = _two_matched(graph, atom)

    edge1 = graph.edges[first]
    edge2 = graph.edges[second]
    if edge1.charge != edge2.charge:
        raise OperatorError(f"solid edges at {atom} have opposite charges")

    if edge1.row_of(atom):
        row, col = first, second
    else:
        row, col = second, first

    produced = _resummed(graph, atom, ("e", row), ("e", col))

    moved, fresh = _moved(graph, atom, [row, col], [], edge1.charge)
    # the moved entries follow the new S+ edge, row entry first
    count = len(moved.edges)
    produced += _resummed(moved, fresh, ("e", count - 2), ("e", count - 1))

    result = normalize_all(produced)
    LOGGER.debug("GG expansion at %d: %d terms", atom, len(result))

    return result


def op_ggbar(graph: GraphTerm, atom: int) -> Expansion:
    """
    G-Gbar expansion of ``G_xy Gbar_xy' f`` at ``x``, or of its transpose
    ``G_yx Gbar_y'x f``, through the entry of charge +1.
    """
    first, second = _two_matched(graph, atom)

    edge1 = graph.edges[first]
    edge2 = graph.edges[second]
    if edge1.charge == edge2.charge:
        raise OperatorError(f"solid edges at {atom} have the same charge")

    target = first if edge1.charge > 0 else second
    result = _plain(graph, atom, ("e", target))
    LOGGER.debug("G-Gbar expansion at %d: %d terms", atom, len(result))

    return result
