"""
.. module:: builder
    :platform: Linux
    :synopsis: global expansion strategy building the n-th order T-equation
        out of the lower order T-expansions
"""
import logging
import functools
import dataclasses
from concurrent.futures import ThreadPoolExecutor
from libbandgraph import CapacityError
from libbandgraph import max_threads
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.classify import is_q_graph
from libbandgraph.canonical import merge_terms
from libbandgraph.canonical import canonical_expansion
from libbandgraph.serialize import dumps
from libbandgraph.molecular import molecular_graph
from libbandgraph.structure import NestingError
from libbandgraph.structure import isolated_subgraphs
from libbandgraph.structure import validate_texpansion_extras
from libbandgraph.operators import normalize_all
from libbandgraph.local import STANDARD
from libbandgraph.local import RECOLLISION
from libbandgraph.local import HIGHER
from libbandgraph.local import QGRAPH
from libbandgraph.local import ERROR
from libbandgraph.local import local_expand_to_standard
from libbandgraph.local import pending_atoms
from libbandgraph.texpansion import BUCKET_R
from libbandgraph.texpansion import BUCKET_A
from libbandgraph.texpansion import BUCKET_Q
from libbandgraph.texpansion import BUCKET_ERR
from libbandgraph.texpansion import BUCKETS
from libbandgraph.texpansion import ExpansionError
from libbandgraph.texpansion import TEquation
from libbandgraph.texpansion import TExpansion
from libbandgraph.texpansion import check_order
from libbandgraph.texpansion import default_error_order
from libbandgraph.texpansion import graph_order
from libbandgraph.texpansion import has_tail
from libbandgraph.texpansion import seed_second_order
from libbandgraph.texpansion import solve_t_equation
from libbandgraph.substitution import pick_t_variable
from libbandgraph.substitution import substitute_t_variable
from libbandgraph.substitution import fold_self_energy

LOGGER = logging.getLogger("bandgraph.builder")

# default cap on the number of graphs handled by one T-equation build
MAX_GRAPHS = 200000

class BuilderError(ExpansionError):
    """
    Raised when a built T-equation disagrees with the T-equation of the
    order below it.
    """


_LOCAL_BUCKETS = {
    RECOLLISION: BUCKET_R,
    HIGHER: BUCKET_A,
    QGRAPH: BUCKET_Q,
    ERROR: BUCKET_ERR,
}


@dataclasses.dataclass(frozen=True)
class _Item:
    """
    A graph waiting for expansion. ``full`` graphs are expanded at every
    internal atom instead of the minimal isolated subgraph only.
    """
    graph: GraphTerm
    full: bool = False


class _Outcome:
    """
    Graphs produced by the expansion of one item.
    """

    def __init__(self, error_order: int) -> None:
        self.error_order = error_order
        self.placed = []
        self.energies = []
        self.follow = []

    def place(self, bucket: str, graph: GraphTerm) -> None:
        """
        Store a graph in a bucket of the T-equation.
        """
        self.placed.append((bucket, graph))

    def follow_up(self, graphs: Expansion) -> None:
        """
        Graphs above the error order and Q-graphs are stored, the other
        ones are expanded again.
        """
        for graph in graphs:
            if has_tail(graph) or graph_order(graph) > self.error_order:
                self.place(BUCKET_ERR, graph)
            elif is_q_graph(graph):
                self.place(BUCKET_Q, graph)
            else:
                self.follow.append(_Item(graph))

    @property
    def count(self) -> int:
        """
        Number of produced graphs.
        """
        return len(self.placed) + len(self.energies) + len(self.follow)


def mis_atoms(graph: GraphTerm) -> set:
    """
    Internal atoms in the minimal isolated subgraph of the red-free
    molecular graph, or None when isolated subsets overlap.
    """
    mol = molecular_graph(graph).red_free()
    try:
        mis = isolated_subgraphs(mol).mis
    except NestingError as err:
        LOGGER.debug("Expanding every atom: %s", err)
        return None

    atoms = set()
    for mol_id in mis:
        atoms.update(mol.molecules[mol_id].atoms)

    return atoms & set(graph.internals)


def expand_item(
        item: _Item,
        order: int,
        error_order: int,
        lower: TExpansion) -> _Outcome:
    """
    One step of the global expansion strategy on a graph: local expansion
    to standard graphs, then substitution of the first T-variable, or
    folding into a self-energy when nothing is left to expand.
    """
    outcome = _Outcome(error_order)
    atoms = None if item.full else mis_atoms(item.graph)

    local = local_expand_to_standard(
        item.graph, order, error_order, atoms=atoms)

    for name, bucket in _LOCAL_BUCKETS.items():
        for graph in local.bucket(name):
            outcome.place(bucket, graph)

    for graph in local.bucket(STANDARD):
        tvar = pick_t_variable(graph)
        if tvar is not None:
            outcome.follow_up(substitute_t_variable(
                graph, tvar.atom, lower, error_order))
        elif not item.full and pending_atoms(graph):
            outcome.follow.append(_Item(graph, full=True))
        else:
            folded = fold_self_energy(graph)
            outcome.energies.append((folded.order, folded.energy))
            outcome.follow_up(normalize_all(folded.corrections))

    return outcome


def _merged(items: list) -> list:
    result = []
    for full in (False, True):
        graphs = [item.graph for item in items if item.full == full]
        result.extend(_Item(graph, full) for graph in merge_terms(graphs))

    return result


def _check_buckets(buckets: dict) -> None:
    for name in (BUCKET_R, BUCKET_A, BUCKET_Q):
        for graph in buckets[name]:
            report = validate_texpansion_extras(graph, name)
            if not report.passed:
                raise ExpansionError(
                    f"{name} graph fails validation {report.failures}: "
                    f"{dumps(graph).decode()}")


def _same(first: Expansion, second: Expansion) -> bool:
    return dumps(canonical_expansion(first)) == \
        dumps(canonical_expansion(second))


def _consistency(teq: TEquation, lower: TEquation) -> dict:
    """
    Compare the recollision and Q parts of order below n, and the lower
    self-energies, with the lower order T-equation.
    """
    result = {}
    for name in (BUCKET_R, BUCKET_Q):
        own = teq.bucket_by_order(name)
        stored = lower.bucket_by_order(name)
        for k in sorted(set(own) | set(stored)):
            if k >= teq.order:
                continue

            result[f"{name},{k}"] = _same(
                own.get(k, Expansion()),
                stored.get(k, Expansion()))

    return result


def build_t_equation(
        order: int,
        store: "ExpansionStore",
        error_order: int = None,
        max_graphs: int = MAX_GRAPHS,
        validate: bool = True) -> TEquation:
    """
    Build the T-equation of order ``order``, starting from the higher
    order graphs of the second order T-expansion and expanding them with
    the T-expansion of order ``order - 1`` kept in ``store``. Graphs stop
    when they are Q-graphs, recollision graphs, of order above ``order``,
    or above the error order. Standard graphs without T-variables left
    are folded into self-energies.

    :raises CapacityError: more than ``order ** 2`` expansion rounds, or
        more than ``max_graphs`` graphs.
    :raises ExpansionError: the lower order T-expansion is missing, or a
        bucket graph fails validation when ``validate`` is True.
    :raises BuilderError: the recollision, Q or self-energy parts of order
        below ``order`` differ from the stored lower order ones.
    """
    check_order(order)
    error_order = error_order or store.error_order or \
        default_error_order(order)

    seed = seed_second_order(error_order)
    if order == 2:
        teq = TEquation(
            order=2,
            error_order=error_order,
            buckets={
                BUCKET_A: seed.bucket(BUCKET_A),
                BUCKET_Q: seed.bucket(BUCKET_Q),
            })
        if validate:
            _check_buckets({n: teq.bucket(n) for n in BUCKETS})
        return teq

    lower = store.texpansion(order - 1)
    if lower.error_order != error_order:
        raise ExpansionError(
            f"lower order T-expansion has error order {lower.error_order}, "
            f"expected {error_order}")

    LOGGER.info("Building T-equation of order %d (D=%d)", order, error_order)

    buckets = {name: [] for name in BUCKETS}
    buckets[BUCKET_Q].extend(seed.bucket(BUCKET_Q))
    folded = {}

    queue = [_Item(graph) for graph in seed.bucket(BUCKET_A)]
    handled = len(queue)
    rounds = 0

    step = functools.partial(
        expand_item,
        order=order,
        error_order=error_order,
        lower=lower)

    with ThreadPoolExecutor(max_workers=max_threads()) as pool:
        while queue:
            rounds += 1
            if rounds > order * order:
                raise CapacityError(
                    f"T-equation of order {order} needs more than "
                    f"{order * order} expansion rounds")

            queue = _merged(queue)
            LOGGER.info("Round %d: expanding %d graphs", rounds, len(queue))

            follow = []
            for outcome in pool.map(step, queue):
                for bucket, graph in outcome.placed:
                    buckets[bucket].append(graph)

                for k, graph in outcome.energies:
                    folded.setdefault(k, []).append(graph)

                follow.extend(outcome.follow)
                handled += outcome.count

            if handled > max_graphs:
                raise CapacityError(
                    f"T-equation of order {order} handled more than "
                    f"{max_graphs} graphs")

            queue = follow

    for name in BUCKETS:
        buckets[name] = canonical_expansion(merge_terms(buckets[name]))

    folded = {
        k: canonical_expansion(merge_terms(v)) for k, v in folded.items()
    }

    energies = {k: v for k, v in lower.energies.items() if k < order}
    energies[order] = folded.get(order, Expansion())

    for k, graphs in folded.items():
        if k > order:
            raise ExpansionError(
                f"self-energy of order {k} above the expansion order {order}")

    if validate:
        _check_buckets(buckets)

    teq = TEquation(
        order=order,
        error_order=error_order,
        energies=energies,
        buckets=buckets)

    consistency = _consistency(teq, store.tequation(order - 1))
    for k, graphs in folded.items():
        if k < order:
            consistency[f"E,{k}"] = _same(
                graphs, lower.energies.get(k, Expansion()))

    mismatch = sorted(key for key, match in consistency.items() if not match)
    if mismatch:
        raise BuilderError(
            f"T-equation of order {order} differs from order {order - 1} "
            f"in {', '.join(mismatch)}")

    teq = TEquation(
        order=order,
        error_order=error_order,
        energies=energies,
        buckets=buckets,
        consistency=consistency)

    LOGGER.info("Built %s in %d rounds", teq, rounds)

    return teq


class ExpansionStore:
    """
    T-equations and T-expansions of successive orders, all sharing the
    same error order.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param error_order: error order D. Defaults to ``2 n + 4`` for the
            first order built.
        :type error_order: int
        :param max_graphs: cap on the graphs handled by one build
        :type max_graphs: int
        :param validate: validate every bucket graph
        :type validate: bool
        """
        self._error_order = kwargs.get("error_order", None)
        self._max_graphs = kwargs.get("max_graphs", MAX_GRAPHS)
        self._validate = kwargs.get("validate", True)
        self._equations = {}
        self._expansions = {}

    @property
    def error_order(self) -> int:
        """
        Shared error order, or None before the first build.
        """
        return self._error_order

    @property
    def orders(self) -> list:
        """
        Orders stored so far.
        """
        return sorted(self._expansions)

    def texpansion(self, order: int) -> TExpansion:
        """
        Stored T-expansion of one order.
        """
        if order not in self._expansions:
            raise ExpansionError(f"T-expansion of order {order} is missing")

        return self._expansions[order]

    def tequation(self, order: int) -> TEquation:
        """
        Stored T-equation of one order.
        """
        if order not in self._equations:
            raise ExpansionError(f"T-equation of order {order} is missing")

        return self._equations[order]

    def add(self, teq: TEquation, texp: TExpansion) -> None:
        """
        Store a T-equation and its solution.
        """
        if teq.order != texp.order:
            raise ExpansionError("T-equation and T-expansion orders differ")

        if self._error_order is None:
            self._error_order = teq.error_order
        elif teq.error_order != self._error_order:
            raise ExpansionError(
                f"error order {teq.error_order} differs from the store "
                f"error order {self._error_order}")

        self._equations[teq.order] = teq
        self._expansions[texp.order] = texp

    def build(self, order: int) -> TExpansion:
        """
        Build the T-equations and T-expansions of orders 2 to ``order`` not
        stored yet.
        """
        check_order(order)
        if self._error_order is None:
            self._error_order = default_error_order(order)

        if self._error_order <= order:
            raise ExpansionError(
                f"error order {self._error_order} must exceed {order}")

        for current in range(2, order + 1):
            if current in self._expansions:
                continue

            teq = build_t_equation(
                current,
                self,
                error_order=self._error_order,
                max_graphs=self._max_graphs,
                validate=self._validate)

            self.add(teq, solve_t_equation(teq, self._error_order))

        return self._expansions[order]

    def __repr__(self) -> str:
        return f"ExpansionStore(D: {self._error_order}, orders: {self.orders})"
