"""
.. module:: qexpand
    :platform: Linux
    :synopsis: expansion of sum_x Gamma Q_x(Gamma') into Q-graphs and
        graphs without P/Q labels
"""
import typing
import logging
import itertools
import dataclasses
from libbandgraph import CapacityError
from libbandgraph.coefficient import Coefficient
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.graph import Weight
from libbandgraph.graph import Label
from libbandgraph.graph import SOLID
from libbandgraph.graph import REGULAR
from libbandgraph.graph import LIGHT
from libbandgraph.graph import INVERSE
from libbandgraph.graph import TAIL
from libbandgraph.classify import scaling_order
from libbandgraph.classify import q_label
from libbandgraph.canonical import merge_terms
from libbandgraph.operators import OperatorError
from libbandgraph.operators import entry_of
from libbandgraph.operators import make_entry
from libbandgraph.operators import edge_counts
from libbandgraph.operators import ibp
from libbandgraph.operators import normalize
from libbandgraph.operators import normalize_all

LOGGER = logging.getLogger("bandgraph.qexpand")

# default cap on the number of graphs handled by one Q-expansion
MAX_TERMS = 20000


class QExpansionError(OperatorError):
    """
    Raised when a graph is not of the form ``Gamma Q_x(Gamma')``.
    """


class QExpansion:
    """
    Outcome of a Q-expansion: graphs without labels, Q-graphs and graphs
    of scaling order above the error order.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param atom: atom of the Q label
        :type atom: int
        :param plain: graphs without P/Q labels
        :type plain: Expansion
        :param q: Q-graphs
        :type q: Expansion
        :param error: graphs of order above the error order
        :type error: Expansion
        """
        self._atom = kwargs.get("atom", None)
        self._plain = kwargs.get("plain", Expansion())
        self._q = kwargs.get("q", Expansion())
        self._error = kwargs.get("error", Expansion())

    @property
    def atom(self) -> int:
        """
        Atom of the Q label.
        """
        return self._atom

    @property
    def plain(self) -> Expansion:
        """
        Graphs without P/Q labels.
        """
        return self._plain

    @property
    def q(self) -> Expansion:
        """
        Q-graphs.
        """
        return self._q

    @property
    def error(self) -> Expansion:
        """
        Graphs of scaling order above the error order.
        """
        return self._error

    @property
    def expansion(self) -> Expansion:
        """
        All graphs.
        """
        return self._plain + self._q + self._error

    def __repr__(self) -> str:
        return \
            f"QExpansion(atom: {self._atom}, " \
            f"plain: {len(self._plain)}, " \
            f"q: {len(self._q)}, " \
            f"error: {len(self._error)})"


def _random_items(graph: GraphTerm, scope: Label) -> list:
    items = [
        ("e", i, edge) for i, edge in enumerate(graph.edges)
        if edge.kind == SOLID and edge.pq == scope
    ]
    items += [
        ("w", i, weight) for i, weight in enumerate(graph.weights)
        if weight.pq == scope
    ]
    return items


def _attached(graph: GraphTerm, atom: int, scope: Label) -> bool:
    for kind, _, item in _random_items(graph, scope):
        if kind == "e" and item.touches(atom):
            return True

        if kind == "w" and item.atom == atom:
            return True

    return False


def minor_decomposition(graph: GraphTerm, atom: int, scope: Label = None) -> list:
    """
    Terms of ``Gamma - Gamma^(x)`` where ``Gamma`` is the product of the
    random factors labelled by ``scope``, none of them touching ``atom``.
    Every entry ``G_rk`` splits as ``G^(x)_rk + G_rx G_xk / G_xx``, and the
    minors are eliminated by inclusion-exclusion over the set ``S`` of
    replaced entries, with sign ``(-1)^(|S| + 1)``, so that the terms carry
    inverse weights at ``atom`` but no minor.
    """
    items = _random_items(graph, scope)
    for kind, _, item in items:
        touches = item.touches(atom) if kind == "e" else item.atom == atom
        if touches:
            raise QExpansionError(f"{item} is attached to atom {atom}")

        if item.minor is not None or \
                (kind == "w" and item.form not in (REGULAR, LIGHT)):
            raise QExpansionError(f"can't decompose {item}")

    terms = []
    for size in range(1, len(items) + 1):
        for subset in itertools.combinations(items, size):
            edges = [i for kind, i, _ in subset if kind == "e"]
            weights = [i for kind, i, _ in subset if kind == "w"]

            created_edges = []
            created_weights = []
            for kind, _, item in subset:
                if kind == "e":
                    row, col = entry_of(item)
                else:
                    row = col = item.atom

                for entry in (
                        make_entry(row, atom, item.charge, scope),
                        make_entry(atom, col, item.charge, scope)):
                    if isinstance(entry, Weight):
                        created_weights.append(entry)
                    else:
                        created_edges.append(entry)

                created_weights.append(
                    Weight(atom, item.charge, INVERSE, pq=scope))

            sign = 1 if size % 2 == 1 else -1
            term = graph.without(edges=edges, weights=weights).with_items(
                edges=created_edges,
                weights=created_weights).scaled(sign)

            terms.append(term)

    return terms


def taylor_inverse(graph: GraphTerm, error_order: int) -> list:
    """
    Replace every inverse weight ``1/G_xx`` by
    ``sum_{k <= K} m^-1 (-(G_xx - m)/m)^k`` plus a tail weight of order
    ``K + 1``, where ``K`` brings the graph to ``error_order``.
    """
    terms = [graph]
    result = []

    while terms:
        current = terms.pop()
        inverse = [
            i for i, w in enumerate(current.weights) if w.form == INVERSE
        ]
        if not inverse:
            result.append(current)
            continue

        index = inverse[0]
        weight = current.weights[index]
        rest = current.without(weights=[index])

        depth = max(0, error_order - scaling_order(rest, strict=False))

        for power in range(depth + 1):
            exps = {"m" if weight.charge > 0 else "mb": -(power + 1)}
            coeff = Coefficient.monomial((-1) ** power, **exps)
            lights = [
                dataclasses.replace(weight, form=LIGHT)
                for _ in range(power)
            ]
            terms.append(rest.with_items(weights=lights).scaled(coeff))

        terms.append(rest.with_items(weights=[
            dataclasses.replace(weight, form=TAIL, order=depth + 1)
        ]))

    return result


def _relabel_pq(graph: GraphTerm, old: Label, new: Label) -> GraphTerm:
    def _swap(item: typing.Any) -> typing.Any:
        if getattr(item, "pq", None) == old:
            return dataclasses.replace(item, pq=new)
        return item

    return graph.replace(
        edges=[_swap(edge) for edge in graph.edges],
        weights=[_swap(weight) for weight in graph.weights])


def _has_tail(graph: GraphTerm) -> bool:
    return any(weight.form == TAIL for weight in graph.weights)


class _Budget:
    """
    Counter of the graphs handled by one expansion.
    """

    def __init__(self, limit: int) -> None:
        self._limit = limit
        self._count = 0

    def spend(self, count: int = 1) -> None:
        """
        Account for ``count`` more graphs.
        """
        self._count += count
        if self._count > self._limit:
            raise CapacityError(
                f"Q-expansion handled more than {self._limit} graphs")


def _too_high(graph: GraphTerm, error_order: int) -> bool:
    if _has_tail(graph):
        return True

    return scaling_order(graph) > error_order


def _p_target(graph: GraphTerm, atom: int, scope: Label) -> tuple:
    for index in graph.weights_at(atom):
        weight = graph.weights[index]
        if weight.pq == scope and weight.form == LIGHT:
            return ("w", index)

    counts = edge_counts(graph, atom, scope)
    for key in (1, 2, 3, 4):
        if counts[key]:
            return ("e", counts[key][0])

    raise QExpansionError(f"nothing labelled {scope} at atom {atom}")


def _merged(terms: typing.Iterable) -> list:
    """
    Sum the coefficients of isomorphic graphs. Graphs cancelling out are
    dropped.
    """
    return list(merge_terms(list(terms)))


def _minor_parts(
        graph: GraphTerm,
        atom: int,
        scope: Label,
        error_order: int) -> tuple:
    """
    Normal graphs of ``Gamma - Gamma^(x)``, where ``Gamma`` holds the
    random factors labelled by ``scope``. Graphs up to ``error_order``
    have their inverse weights Taylor expanded, the others keep them.
    Returns both lists.
    """
    kept = []
    high = []

    for term in minor_decomposition(graph, atom, scope):
        for piece in normalize(term):
            # Taylor expanding only adds light weights
            if _too_high(piece, error_order):
                high.append(piece)
                continue

            for part in taylor_inverse(piece, error_order):
                kept.extend(normalize(part))

    return kept, high


def _remove_p_labels(
        graphs: typing.Iterable,
        atom: int,
        error_order: int,
        budget: _Budget) -> tuple:
    scope = Label("P", atom)

    plain = []
    error = []
    pending = _merged(normalize_all(graphs))
    rounds = 0

    while pending:
        budget.spend(len(pending))
        rounds += 1

        produced = []
        for current in pending:
            if _too_high(current, error_order):
                error.append(current)
                continue

            if not _random_items(current, scope):
                plain.append(current.strip_labels())
                continue

            if _attached(current, atom, scope):
                target = _p_target(current, atom, scope)
                produced.extend(normalize_all(
                    t.graph for t in ibp(current, atom, target, scope)))
                continue

            plain.append(current.strip_labels())

            kept, high = _minor_parts(current, atom, scope, error_order)
            produced.extend(kept)

            for piece in kept:
                stripped = piece.strip_labels().scaled(-1)
                if _too_high(stripped, error_order):
                    error.append(stripped)
                else:
                    plain.append(stripped)

            for piece in high:
                error.append(piece)
                error.append(piece.strip_labels().scaled(-1))

        pending = _merged(produced)

        LOGGER.debug(
            "P label removal at atom %d, round %d: %d graphs pending",
            atom, rounds, len(pending))

    return _merged(plain), _merged(error)


def remove_p_label(
        graph: GraphTerm,
        atom: int,
        error_order: int,
        budget: _Budget = None) -> tuple:
    """
    Expand a graph where some random factors carry ``P_x`` into graphs
    without labels. While labelled factors are attached to ``x`` they are
    expanded by integration by parts under ``P_x``, otherwise
    ``P_x(F) = F - (F - F^(x)) + P_x(F - F^(x))``. The graphs are handled
    in rounds, and isomorphic graphs are merged after each round so that
    opposite terms cancel. Returns the lists of graphs without labels and
    of graphs above the error order.
    """
    return _remove_p_labels(
        [graph], atom, error_order, budget or _Budget(MAX_TERMS))


def _q_atom(graph: GraphTerm) -> int:
    labels = graph.labels()
    if len(labels) != 1:
        raise QExpansionError(
            f"expected one Q label, found {sorted(labels)}")

    label = next(iter(labels))
    if label.kind != "Q":
        raise QExpansionError(f"expected a Q label, found {label}")

    if graph.has_transients():
        raise QExpansionError("graph carries transient factors")

    return label.atom


def q_expand(
        graph: GraphTerm,
        error_order: int,
        max_terms: int = MAX_TERMS) -> QExpansion:
    """
    Expand ``sum_x Gamma Q_x(Gamma')``, given as a graph whose factors in
    ``Gamma'`` carry the ``Q_x`` label, into Q-graphs, graphs without
    labels and graphs above ``error_order``.

    When ``Gamma`` has nothing attached to ``x`` it is split as
    ``Gamma^(x) + (Gamma - Gamma^(x))``, which gives

    ``Gamma Q_x(Gamma') = Q_x(Gamma Gamma') + sum_w [Gamma_w Q_x(Gamma')
    - Q_x(Gamma_w Gamma')]``

    with ``Gamma_w`` of strictly higher order. Then every
    ``Gamma_w Q_x(Gamma'_w)`` becomes ``Gamma_w Gamma'_w -
    Gamma_w P_x(Gamma'_w)`` and the ``P_x`` label is removed.
    """
    atom = _q_atom(graph)
    label = Label("Q", atom)
    budget = _Budget(max_terms)

    plain = []
    q_graphs = []
    error = []
    mixed = []

    def _route(term: GraphTerm, first: bool) -> None:
        budget.spend()

        if _too_high(term, error_order):
            error.append(term)
        elif q_label(term) == atom:
            q_graphs.append(term)
        elif not term.is_labelled():
            plain.append(term)
        elif first and not _attached(term, atom, None):
            split(term)
        else:
            mixed.append(term)

    def split(term: GraphTerm) -> None:
        q_graphs.append(term.label_random(label))

        kept, high = _minor_parts(term, atom, None, error_order)
        for item in kept:
            _route(item, False)
            for labelled in normalize(item.label_random(label).scaled(-1)):
                _route(labelled, False)

        for item in high:
            error.append(item)
            error.append(item.label_random(label).scaled(-1))

    for term in _merged(normalize(graph)):
        _route(term, True)

    p_graphs = []
    for term in _merged(mixed):
        plain_part = term.strip_labels()
        if _too_high(plain_part, error_order):
            error.append(plain_part)
        else:
            plain.append(plain_part)

        p_graphs.append(
            _relabel_pq(term, label, Label("P", atom)).scaled(-1))

    found, too_high = _remove_p_labels(p_graphs, atom, error_order, budget)
    plain.extend(found)
    error.extend(too_high)

    result = QExpansion(
        atom=atom,
        plain=merge_terms(plain),
        q=merge_terms(q_graphs),
        error=merge_terms(error))

    LOGGER.info("Q-expansion at atom %d: %s", atom, result)

    return result
