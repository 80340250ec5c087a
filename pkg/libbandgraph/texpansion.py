"""
.. module:: texpansion
    :platform: Linux
    :synopsis: T-expansions and T-equations, the second order seed and the
        solution of a T-equation
"""
import typing
import logging
import itertools
import dataclasses
from libbandgraph import BandGraphException
from libbandgraph.coefficient import Coefficient
from libbandgraph.coefficient import M
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import GraphBuilder
from libbandgraph.graph import Expansion
from libbandgraph.graph import Atom
from libbandgraph.graph import Edge
from libbandgraph.graph import Label
from libbandgraph.graph import DIFFUSIVE
from libbandgraph.graph import LIGHT
from libbandgraph.graph import REGULAR
from libbandgraph.graph import TAIL
from libbandgraph.graph import ATOM_A
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2
from libbandgraph.classify import scaling_order
from libbandgraph.canonical import canonical_expansion
from libbandgraph.operators import op_merge
from libbandgraph.operators import normalize_all
from libbandgraph.serialize import expansion_to_dict
from libbandgraph.serialize import expansion_from_dict

LOGGER = logging.getLogger("bandgraph.texpansion")

# largest supported expansion order
MAX_ORDER = 6

# bucket names
BUCKET_SIGMA = "Sigma"
BUCKET_R = "R"
BUCKET_A = "A"
BUCKET_Q = "Q"
BUCKET_ERR = "Err"
BUCKET_ENERGY = "E"

BUCKETS = (BUCKET_R, BUCKET_A, BUCKET_Q, BUCKET_ERR)

# external atoms of a self-energy graph E_xy
ENERGY_X = "x"
ENERGY_Y = "y"


class ExpansionError(BandGraphException):
    """
    Raised when a T-expansion or a T-equation can't be built.
    """


def default_error_order(order: int) -> int:
    """
    Default error order of an expansion of order ``order``.
    """
    return 2 * order + 4


def check_order(order: int) -> None:
    """
    Validate an expansion order.
    """
    if not isinstance(order, int) or order < 2:
        raise ExpansionError(f"order must be an integer >= 2: {order}")

    if order > MAX_ORDER:
        raise ExpansionError(
            f"orders above {MAX_ORDER} are not supported: {order}")


def graph_order(graph: GraphTerm) -> int:
    """
    Scaling order used to sort graphs in buckets. Tail weights count with
    their order and non-normal graphs are accepted.
    """
    return scaling_order(graph, strict=False)


def has_tail(graph: GraphTerm) -> bool:
    """
    True if the graph carries a Taylor tail weight.
    """
    return any(weight.form == TAIL for weight in graph.weights)


def by_order(expansion: Expansion) -> dict:
    """
    Split an expansion by scaling order.
    """
    groups = {}
    for term in expansion:
        groups.setdefault(graph_order(term), []).append(term)

    return {k: Expansion(v) for k, v in sorted(groups.items())}


def a_edge(graph: GraphTerm) -> int:
    """
    Index of the unique diffusive edge at the external atom ``a``.
    """
    atom = graph.by_name(ATOM_A)
    if atom is None:
        raise ExpansionError("graph has no external atom 'a'")

    found = graph.incident(atom, DIFFUSIVE)
    if len(found) != 1:
        raise ExpansionError(
            f"expected one diffusive edge at 'a', found {len(found)}")

    return found[0]


def with_chain(graph: GraphTerm, orders: tuple) -> GraphTerm:
    """
    Left-multiply a graph ``sum_x Theta_ax G_x`` by the chain
    ``Theta E_l1 Theta ... E_lk``: the self-energy orders are prepended to
    the label of the diffusive edge at ``a``.
    """
    if not orders:
        return graph

    index = a_edge(graph)
    edge = graph.edges[index]

    chain = tuple(orders) + tuple(edge.chain or ())
    edges = list(graph.edges)
    edges[index] = dataclasses.replace(edge, chain=chain)

    return graph.replace(edges=edges)


def chain_order(orders: tuple) -> int:
    """
    Scaling order of the labelled diffusive edge of a chain.
    """
    if not orders:
        return 2

    return sum(orders) - 2 * (len(orders) - 1)


def energy_orders(energies: dict) -> list:
    """
    Orders of the non vanishing self-energies that can label a chain.
    """
    return [
        order for order in sorted(energies)
        if order >= 4 and order % 2 == 0 and len(energies[order]) > 0
    ]


def compose_chain(energies: dict, orders: tuple) -> Expansion:
    """
    Deterministic graphs of ``E_l1 Theta E_l2 ... Theta E_lk`` between the
    external atoms ``x`` and ``y``.
    """
    factors = [list(energies.get(order, ())) for order in orders]
    result = []

    for picks in itertools.product(*factors):
        atoms = [Atom(0, True, ENERGY_X), Atom(1, True, ENERGY_Y)]
        edges = []
        weights = []
        coeff = Coefficient.one()
        left = 0
        fresh = 2

        for position, term in enumerate(picks):
            last = position == len(picks) - 1
            if last:
                right = 1
            else:
                right = fresh
                atoms.append(Atom(right))
                fresh += 1

            mapping = {
                term.by_name(ENERGY_X): left,
                term.by_name(ENERGY_Y): right,
            }
            for atom in term.internals:
                mapping[atom] = fresh
                atoms.append(Atom(fresh))
                fresh += 1

            edges.extend(edge.relabel(mapping) for edge in term.edges)
            weights.extend(weight.relabel(mapping) for weight in term.weights)
            coeff = coeff * term.coeff

            if not last:
                left = fresh
                atoms.append(Atom(left))
                fresh += 1
                edges.append(Edge(DIFFUSIVE, right, left))

        merged = op_merge(GraphTerm(atoms, edges, weights, coeff))
        if merged is not None:
            result.append(merged)

    return Expansion(result)


def leading_term() -> GraphTerm:
    """
    The leading term ``m Theta_a,b1 Gbar_b1,b2``.
    """
    builder = GraphBuilder()
    a = builder.external(ATOM_A)
    b1 = builder.external(ATOM_B1)
    b2 = builder.external(ATOM_B2)

    builder.diffusive(a, b1)
    builder.G(b1, b2, charge=-1)

    return builder.build(M)


def _seed_a_graph(light_charge: int, labelled: bool, coeff: typing.Any) -> GraphTerm:
    """
    ``sum_x,y Theta_ax s_xy w G_u,b1 Gbar_u,b2``, where the weight ``w``
    sits at ``y`` and the solid edges at ``x`` for charge +1, and the
    other way around for charge -1.
    """
    builder = GraphBuilder()
    a = builder.external(ATOM_A)
    b1 = builder.external(ATOM_B1)
    b2 = builder.external(ATOM_B2)
    x = builder.internal()
    y = builder.internal()

    label = Label("Q", x) if labelled else None

    builder.diffusive(a, x)
    builder.waved(x, y)

    if light_charge > 0:
        builder.weight(y, 1, LIGHT, pq=label)
        solid_at = x
    else:
        form = REGULAR if labelled else LIGHT
        builder.weight(x, -1, form, pq=label)
        solid_at = y

    builder.G(solid_at, b1, pq=label)
    builder.G(solid_at, b2, charge=-1, pq=label)

    return builder.build(coeff)


def seed_families() -> dict:
    """
    Graphs of the second order T-expansion as written by hand, before the
    dotted edge partition: two higher order graphs and four Q-graphs.
    """
    higher = [
        _seed_a_graph(1, False, M),
        _seed_a_graph(-1, False, M),
    ]

    builder = GraphBuilder()
    a = builder.external(ATOM_A)
    b1 = builder.external(ATOM_B1)
    b2 = builder.external(ATOM_B2)
    x = builder.internal()
    builder.diffusive(a, x)
    builder.G(x, b1, pq=Label("Q", x))
    builder.G(x, b2, charge=-1, pq=Label("Q", x))
    first = builder.build(1)

    builder = GraphBuilder()
    a = builder.external(ATOM_A)
    b1 = builder.external(ATOM_B1)
    b2 = builder.external(ATOM_B2)
    builder.diffusive(a, b1)
    builder.G(b1, b2, charge=-1, pq=Label("Q", b1))
    second = builder.build(-M)

    q_graphs = [
        first,
        second,
        _seed_a_graph(1, True, -M),
        _seed_a_graph(-1, True, -M),
    ]

    return {BUCKET_A: higher, BUCKET_Q: q_graphs}


class _Buckets:
    """
    Common storage of the T-expansion and T-equation buckets.
    """

    def __init__(self, **kwargs: dict) -> None:
        self._order = kwargs.get("order", None)
        self._error_order = kwargs.get("error_order", None)
        self._leading = kwargs.get("leading", None) or leading_term()
        self._energies = {
            k: Expansion(v) for k, v in kwargs.get("energies", {}).items()
        }

        buckets = kwargs.get("buckets", {})
        self._buckets = {
            name: Expansion(buckets.get(name, ())) for name in BUCKETS
        }

        check_order(self._order)
        if self._error_order is None:
            self._error_order = default_error_order(self._order)

        if self._error_order <= self._order:
            raise ExpansionError(
                f"error order {self._error_order} must exceed the order "
                f"{self._order}")

    @property
    def order(self) -> int:
        """
        Order of the expansion.
        """
        return self._order

    @property
    def error_order(self) -> int:
        """
        Error order D.
        """
        return self._error_order

    @property
    def leading(self) -> GraphTerm:
        """
        The leading term ``m Theta_a,b1 Gbar_b1,b2``.
        """
        return self._leading

    @property
    def energies(self) -> dict:
        """
        Self-energies by order, as deterministic expansions between the
        external atoms ``x`` and ``y``.
        """
        return dict(self._energies)

    def bucket(self, name: str) -> Expansion:
        """
        Graphs of one bucket.
        """
        if name not in self._buckets:
            raise ExpansionError(f"Unknown bucket '{name}'")

        return self._buckets[name]

    def bucket_by_order(self, name: str) -> dict:
        """
        Graphs of one bucket split by scaling order.
        """
        return by_order(self.bucket(name))

    def counts(self) -> dict:
        """
        Number of graphs per bucket.
        """
        counts = {name: len(graphs) for name, graphs in self._buckets.items()}
        counts[BUCKET_ENERGY] = {
            k: len(v) for k, v in sorted(self._energies.items())
        }
        return counts

    def _export(self, kind: str, extra: list) -> dict:
        parts = list(extra)
        for name in BUCKETS:
            for k, graphs in self.bucket_by_order(name).items():
                parts.append(expansion_to_dict(
                    canonical_expansion(graphs),
                    order=self._order,
                    D=self._error_order,
                    bucket=name,
                    k=k))

        for k, graphs in sorted(self._energies.items()):
            parts.append(expansion_to_dict(
                canonical_expansion(graphs),
                order=self._order,
                D=self._error_order,
                bucket=BUCKET_ENERGY,
                k=k))

        return {
            "kind": kind,
            "order": self._order,
            "D": self._error_order,
            "buckets": parts,
        }

    @staticmethod
    def _import(data: dict) -> dict:
        if not isinstance(data, dict) or "buckets" not in data:
            raise ExpansionError("expected an object with buckets")

        values = {
            "order": data.get("order", None),
            "error_order": data.get("D", None),
            "buckets": {name: [] for name in BUCKETS},
            "energies": {},
            "sigma": {},
        }

        for part in data["buckets"]:
            name = part.get("bucket", None)
            k = part.get("k", None)
            graphs = list(expansion_from_dict(part))

            if name in BUCKETS:
                values["buckets"][name].extend(graphs)
            elif name == BUCKET_ENERGY:
                values["energies"].setdefault(k, []).extend(graphs)
            elif name == BUCKET_SIGMA:
                for graph in graphs:
                    chain = graph.edges[a_edge(graph)].chain or ()
                    values["sigma"].setdefault(k, []).append(tuple(chain))
            else:
                raise ExpansionError(f"Unknown bucket '{name}'")

        return values


class TEquation(_Buckets):
    """
    An n-th order T-equation

    ``T = m Theta Gbar + Theta Sigma T + R + A + Q + Err``

    where ``Sigma`` is the sum of the self-energies of orders 4 to n and
    every bucket graph is ``sum_x Theta_ax G_x,b1b2``.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param order: order n
        :type order: int
        :param error_order: error order D
        :type error_order: int
        :param energies: self-energies of orders up to n
        :type energies: dict
        :param buckets: graphs of the R, A, Q and Err buckets
        :type buckets: dict
        :param consistency: outcome of the comparison of the parts of order
            below n with the lower order T-equation
        :type consistency: dict
        """
        super().__init__(**kwargs)
        self._consistency = dict(kwargs.get("consistency", {}))

    @property
    def sigma(self) -> Expansion:
        """
        ``Sigma^(n)``, the sum of all self-energies.
        """
        terms = []
        for order in sorted(self._energies):
            terms.extend(self._energies[order])

        return Expansion(terms)

    @property
    def linear_term(self) -> dict:
        """
        Marker of the term ``Theta Sigma^(n) T``.
        """
        return {"energies": energy_orders(self._energies)}

    @property
    def consistency(self) -> dict:
        """
        Parts of order below n compared with the lower order T-equation,
        by name, True when they match.
        """
        return dict(self._consistency)

    def to_dict(self) -> dict:
        """
        Export the T-equation.
        """
        data = self._export("teq", [
            expansion_to_dict(
                Expansion([self._leading]),
                order=self._order,
                D=self._error_order,
                bucket=BUCKET_SIGMA,
                k=2),
        ])
        data["linear"] = self.linear_term
        data["consistency"] = self.consistency
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "TEquation":
        """
        Import a T-equation exported by ``to_dict``.
        """
        values = cls._import(data)
        values.pop("sigma")
        values["consistency"] = data.get("consistency", {})
        return cls(**values)

    def __repr__(self) -> str:
        return f"TEquation(order: {self._order}, D: {self._error_order}, " \
            f"counts: {self.counts()})"


class TExpansion(_Buckets):
    """
    An n-th order T-expansion

    ``T = m Theta Gbar + m (Theta Sigma_T Theta) Gbar + R + A + Q + Err``

    where ``Sigma_T`` is split by order into ``Sigma_T,k``, each one a sum
    of chains ``E_k1 Theta ... Theta E_kl``.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param order: order n
        :type order: int
        :param error_order: error order D
        :type error_order: int
        :param sigma: chains of self-energy orders, by chain order
        :type sigma: dict
        :param energies: self-energies of orders up to n
        :type energies: dict
        :param buckets: graphs of the R, A, Q and Err buckets
        :type buckets: dict
        """
        super().__init__(**kwargs)

        self._sigma = {}
        for k, chains in kwargs.get("sigma", {}).items():
            if k == 2:
                continue

            for chain in chains:
                if chain_order(chain) != k:
                    raise ExpansionError(
                        f"chain {chain} has order {chain_order(chain)}, "
                        f"not {k}")

            self._sigma[k] = sorted(tuple(chain) for chain in chains)

    @property
    def sigma(self) -> dict:
        """
        Chains of self-energy orders of ``Sigma_T,k``, by ``k``.
        """
        return {k: list(v) for k, v in sorted(self._sigma.items())}

    def sigma_expansion(self, k: int) -> Expansion:
        """
        ``Sigma_T,k`` as deterministic graphs between ``x`` and ``y``.
        """
        terms = []
        for chain in self._sigma.get(k, ()):
            terms.extend(compose_chain(self._energies, chain))

        return Expansion(terms)

    def sigma_terms(self) -> Expansion:
        """
        ``m (Theta Sigma_T,k Theta)_a,b1 Gbar_b1,b2`` for every ``k``, one
        labelled diffusive edge per chain.
        """
        terms = []
        for _, chains in sorted(self._sigma.items()):
            terms.extend(with_chain(self._leading, chain) for chain in chains)

        return Expansion(terms)

    def terms(self) -> Expansion:
        """
        All graphs of the right hand side.
        """
        result = Expansion([self._leading]) + self.sigma_terms()
        for name in BUCKETS:
            result = result + self._buckets[name]

        return result

    def to_dict(self) -> dict:
        """
        Export the T-expansion.
        """
        extra = [
            expansion_to_dict(
                Expansion([self._leading]),
                order=self._order,
                D=self._error_order,
                bucket=BUCKET_SIGMA,
                k=2),
        ]
        for k, chains in sorted(self._sigma.items()):
            extra.append(expansion_to_dict(
                Expansion(with_chain(self._leading, c) for c in chains),
                order=self._order,
                D=self._error_order,
                bucket=BUCKET_SIGMA,
                k=k))

        return self._export("texp", extra)

    @classmethod
    def from_dict(cls, data: dict) -> "TExpansion":
        """
        Import a T-expansion exported by ``to_dict``.
        """
        return cls(**cls._import(data))

    def __repr__(self) -> str:
        counts = self.counts()
        counts[BUCKET_SIGMA] = {k: len(v) for k, v in self._sigma.items()}
        return f"TExpansion(order: {self._order}, D: {self._error_order}, " \
            f"counts: {counts})"


def seed_second_order(error_order: int = None) -> TExpansion:
    """
    The second order T-expansion

    ``T = m Theta_a,b1 Gbar_b1,b2 + A + Q``

    with the graphs of ``seed_families`` brought to normal regular form.
    """
    families = seed_families()

    texp = TExpansion(
        order=2,
        error_order=error_order,
        buckets={
            BUCKET_A: normalize_all(families[BUCKET_A]),
            BUCKET_Q: normalize_all(families[BUCKET_Q]),
        })

    LOGGER.info("Second order seed: %s", texp)

    return texp


def _chains(orders: list, budget: int) -> typing.Iterator:
    """
    Non empty chains of self-energy orders whose order increase
    ``sum(l - 2)`` is within ``budget``, each followed by False, and the
    first chains going beyond it, followed by True.
    """
    stack = [((), 0)]
    while stack:
        prefix, extra = stack.pop()
        for order in reversed(orders):
            chain = prefix + (order,)
            grown = extra + order - 2
            if grown > budget:
                yield chain, True
                continue

            yield chain, False
            stack.append((chain, grown))


def solve_t_equation(teq: TEquation, error_order: int = None) -> TExpansion:
    """
    Solve a T-equation by left-multiplying it with
    ``sum_k (Theta Sigma)^k``, truncated once the graphs go beyond the
    error order. ``(Theta Sigma)^k Theta`` becomes a labelled diffusive
    edge. Chains of the leading term of order up to n give ``Sigma_T``,
    the others are higher order graphs. Recollision graphs of order above
    n move to the higher order bucket.
    """
    order = teq.order
    error_order = error_order or teq.error_order
    orders = energy_orders(teq.energies)

    sigma = {}
    buckets = {name: [] for name in BUCKETS}

    def _place(graph: GraphTerm, name: str) -> None:
        ord_graph = graph_order(graph)
        if has_tail(graph) or ord_graph > error_order:
            buckets[BUCKET_ERR].append(graph)
        elif name == BUCKET_R and ord_graph > order:
            buckets[BUCKET_A].append(graph)
        else:
            buckets[name].append(graph)

    base = graph_order(teq.leading)
    for chain, over in _chains(orders, error_order - base):
        graph = with_chain(teq.leading, chain)
        k = chain_order(chain)
        if over:
            buckets[BUCKET_ERR].append(graph)
        elif k <= order:
            sigma.setdefault(k, []).append(chain)
        else:
            buckets[BUCKET_A].append(graph)

    for name in BUCKETS:
        for graph in teq.bucket(name):
            _place(graph, name)

            if name == BUCKET_ERR:
                continue

            budget = error_order - graph_order(graph)
            for chain, over in _chains(orders, budget):
                extended = with_chain(graph, chain)
                if over:
                    buckets[BUCKET_ERR].append(extended)
                else:
                    _place(extended, name)

    texp = TExpansion(
        order=order,
        error_order=error_order,
        sigma=sigma,
        energies=teq.energies,
        buckets=buckets)

    LOGGER.info("Solved T-equation of order %d: %s", order, texp)

    return texp
