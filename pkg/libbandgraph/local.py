"""
.. module:: local
    :platform: Linux
    :synopsis: local expansions of a graph into locally standard graphs,
        recollision graphs, higher order graphs and Q-graphs
"""
import typing
import logging
from libbandgraph import CapacityError
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.graph import SOLID
from libbandgraph.graph import TAIL
from libbandgraph.classify import scaling_order
from libbandgraph.classify import solid_degree
from libbandgraph.classify import is_standard_neutral
from libbandgraph.classify import is_recollision
from libbandgraph.classify import is_q_graph
from libbandgraph.operators import OperatorError
from libbandgraph.operators import normalize
from libbandgraph.operators import op_weight
from libbandgraph.operators import op_gg
from libbandgraph.operators import op_ggbar
from libbandgraph.operators import op_multi_edge

LOGGER = logging.getLogger("bandgraph.local")

# default cap on the number of operator applications of one expansion
MAX_STEPS = 5000

# bucket names
STANDARD = "standard"
RECOLLISION = "recollision"
HIGHER = "higher"
QGRAPH = "q"
ERROR = "error"

BUCKETS = (STANDARD, RECOLLISION, HIGHER, QGRAPH, ERROR)


class LocalExpansion:
    """
    Graphs of a local expansion, sorted in buckets.
    """

    def __init__(self) -> None:
        self._buckets = {name: [] for name in BUCKETS}
        self._steps = 0

    def add(self, bucket: str, graph: GraphTerm) -> None:
        """
        Add a graph to a bucket.
        """
        self._buckets[bucket].append(graph)

    def bucket(self, name: str) -> Expansion:
        """
        Graphs of one bucket.
        """
        return Expansion(self._buckets[name])

    @property
    def steps(self) -> int:
        """
        Number of operator applications.
        """
        return self._steps

    @steps.setter
    def steps(self, value: int) -> None:
        self._steps = value

    @property
    def expansion(self) -> Expansion:
        """
        All graphs.
        """
        terms = []
        for name in BUCKETS:
            terms.extend(self._buckets[name])

        return Expansion(terms)

    def counts(self) -> dict:
        """
        Number of graphs per bucket.
        """
        return {name: len(graphs) for name, graphs in self._buckets.items()}

    def __repr__(self) -> str:
        counts = ", ".join(f"{k}: {v}" for k, v in self.counts().items())
        return f"LocalExpansion({counts}, steps: {self._steps})"


def operator_name(graph: GraphTerm, atom: int) -> str:
    """
    Name of the operator to apply at ``atom``, or None if the atom is
    settled.
    """
    if graph.weights_at(atom):
        return "weight"

    degree = solid_degree(graph, atom)
    if degree == 0:
        return None

    if degree == 2:
        if is_standard_neutral(graph, atom):
            return None

        edges = graph.incident(atom, SOLID)
        if len(edges) == 2:
            first, second = (graph.edges[i] for i in edges)
            if first.row_of(atom) != second.row_of(atom):
                if first.charge == second.charge:
                    return "gg"
                return "ggbar"

    return "multi"


_OPERATORS = {
    "weight": op_weight,
    "gg": op_gg,
    "ggbar": op_ggbar,
    "multi": op_multi_edge,
}


def expand_atom(graph: GraphTerm, atom: int) -> Expansion:
    """
    Apply to ``atom`` the operator its local structure asks for. A settled
    atom is left unchanged.
    """
    name = operator_name(graph, atom)
    if name is None:
        return Expansion([graph])

    LOGGER.debug("Applying %s expansion at atom %d", name, atom)

    return _OPERATORS[name](graph, atom)


def pending_atoms(graph: GraphTerm) -> list:
    """
    Internal atoms a local expansion would still act on.
    """
    return [
        atom for atom in graph.internals
        if operator_name(graph, atom) is not None
    ]


def _targets(graph: GraphTerm, atoms: set, first_new: int) -> list:
    found = []
    for atom in graph.internals:
        if atoms is None or atom in atoms or atom >= first_new:
            found.append(atom)

    return found


def local_expand_to_standard(
        graph: GraphTerm,
        order: int,
        error_order: int,
        atoms: typing.Iterable = None,
        max_steps: int = MAX_STEPS) -> LocalExpansion:
    """
    Apply local expansions until every graph is a Q-graph, a recollision
    graph, a graph of scaling order above ``order``, or has every targeted
    internal atom settled, i.e. without weights and of solid degree 0 or
    standard neutral. Targeted atoms are ``atoms`` (all internal atoms by
    default) and the atoms created by the expansions.

    :raises CapacityError: when more than ``max_steps`` operators are
        applied.
    """
    atoms = None if atoms is None else set(atoms)
    first_new = graph.next_id()

    result = LocalExpansion()
    stack = list(normalize(graph))

    while stack:
        current = stack.pop()

        if any(w.form == TAIL for w in current.weights):
            result.add(ERROR, current)
            continue

        ord_current = scaling_order(current)
        if ord_current > error_order:
            result.add(ERROR, current)
            continue

        if is_q_graph(current):
            result.add(QGRAPH, current)
            continue

        if current.is_labelled():
            raise OperatorError("local expansion of a partially labelled graph")

        if ord_current > order:
            result.add(HIGHER, current)
            continue

        if is_recollision(current):
            result.add(RECOLLISION, current)
            continue

        pending = [
            atom for atom in _targets(current, atoms, first_new)
            if operator_name(current, atom) is not None
        ]
        if not pending:
            result.add(STANDARD, current)
            continue

        result.steps += 1
        if result.steps > max_steps:
            raise CapacityError(
                f"local expansion exceeded {max_steps} operator applications")

        stack.extend(expand_atom(current, pending[0]))

    LOGGER.info("Local expansion: %s", result)

    return result
