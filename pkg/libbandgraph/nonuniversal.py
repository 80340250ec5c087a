"""
.. module:: nonuniversal
    :platform: Linux
    :synopsis: non-universal T-expansion, where pivotal blue edges are
        expanded after adding a ghost edge
"""
import logging
import functools
from concurrent.futures import ThreadPoolExecutor
from libbandgraph import CapacityError
from libbandgraph import max_threads
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.graph import Edge
from libbandgraph.graph import GHOST
from libbandgraph.classify import is_q_graph
from libbandgraph.classify import is_standard_neutral
from libbandgraph.canonical import merge_terms
from libbandgraph.canonical import canonical_expansion
from libbandgraph.molecular import BLUE
from libbandgraph.molecular import molecular_graph
from libbandgraph.structure import isolated_subgraphs
from libbandgraph.structure import pre_deterministic_order
from libbandgraph.structure import ghost_count
from libbandgraph.structure import ghost_bound
from libbandgraph.structure import is_ggs
from libbandgraph.local import STANDARD
from libbandgraph.local import RECOLLISION
from libbandgraph.local import HIGHER
from libbandgraph.local import QGRAPH
from libbandgraph.local import ERROR
from libbandgraph.local import local_expand_to_standard
from libbandgraph.local import pending_atoms
from libbandgraph.serialize import dumps
from libbandgraph.serialize import expansion_to_dict
from libbandgraph.texpansion import BUCKET_SIGMA
from libbandgraph.texpansion import BUCKET_R
from libbandgraph.texpansion import BUCKET_A
from libbandgraph.texpansion import BUCKET_Q
from libbandgraph.texpansion import BUCKET_ERR
from libbandgraph.texpansion import ExpansionError
from libbandgraph.texpansion import TExpansion
from libbandgraph.texpansion import graph_order
from libbandgraph.texpansion import has_tail
from libbandgraph.substitution import t_variable
from libbandgraph.substitution import substitute_t_variable

LOGGER = logging.getLogger("bandgraph.nonuniversal")

# graphs whose maximal subgraph is deterministic and locally standard
BUCKET_DET = "D"

NU_BUCKETS = (BUCKET_SIGMA, BUCKET_R, BUCKET_DET, BUCKET_Q, BUCKET_ERR)

# default cap on the graphs handled by one expansion
MAX_GRAPHS = 200000


class GGSViolation(ExpansionError):
    """
    Raised when a graph of the non-universal expansion has too many ghost
    edges for its scaling order.
    """


def effective_order(graph: GraphTerm, n: int) -> int:
    """
    Scaling order left once every ghost edge has paid its ``L^2 / W^2``
    factor, ``ord - (n - 1) k_gh``.
    """
    return graph_order(graph) - (n - 1) * ghost_count(graph)


def check_ghost_order(graph: GraphTerm, n: int) -> None:
    """
    Require ``ord >= (n - 1) k_gh + 2``.

    :raises GGSViolation: when the bound fails.
    """
    if not ghost_bound(graph_order(graph), ghost_count(graph), n):
        raise GGSViolation(
            f"order {graph_order(graph)} with {ghost_count(graph)} ghost "
            f"edges: {dumps(graph).decode()}")


class NonUniversalExpansion:
    """
    ``T = m Theta Gbar + m Theta Sigma_T Theta Gbar + R + D + Q + Err``
    where ``D`` holds the graphs with a deterministic locally standard
    maximal subgraph and every graph may carry ghost edges.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param order: order n
        :type order: int
        :param error_order: error order D
        :type error_order: int
        :param buckets: graphs by bucket name
        :type buckets: dict
        :param rounds: number of expansion rounds
        :type rounds: int
        """
        self._order = kwargs.get("order", None)
        self._error_order = kwargs.get("error_order", None)
        self._rounds = kwargs.get("rounds", 0)

        buckets = kwargs.get("buckets", {})
        self._buckets = {
            name: Expansion(buckets.get(name, ())) for name in NU_BUCKETS
        }

    @property
    def order(self) -> int:
        """
        Order n.
        """
        return self._order

    @property
    def error_order(self) -> int:
        """
        Error order D.
        """
        return self._error_order

    @property
    def rounds(self) -> int:
        """
        Number of expansion rounds.
        """
        return self._rounds

    def bucket(self, name: str) -> Expansion:
        """
        Graphs of one bucket.
        """
        if name not in self._buckets:
            raise ExpansionError(f"Unknown bucket '{name}'")

        return self._buckets[name]

    def counts(self) -> dict:
        """
        Number of graphs per bucket.
        """
        return {name: len(graphs) for name, graphs in self._buckets.items()}

    def ghost_counts(self) -> dict:
        """
        Number of graphs per bucket and number of ghost edges.
        """
        result = {}
        for name, graphs in self._buckets.items():
            counts = {}
            for graph in graphs:
                k = ghost_count(graph)
                counts[k] = counts.get(k, 0) + 1
            result[name] = dict(sorted(counts.items()))

        return result

    def to_dict(self) -> dict:
        """
        Export the expansion, one part per bucket and number of ghost
        edges.
        """
        parts = []
        for name, graphs in self._buckets.items():
            groups = {}
            for graph in graphs:
                groups.setdefault(ghost_count(graph), []).append(graph)

            for k_gh, group in sorted(groups.items()):
                parts.append(expansion_to_dict(
                    canonical_expansion(Expansion(group)),
                    order=self._order,
                    D=self._error_order,
                    bucket=name,
                    kgh=k_gh))

        return {
            "kind": "nonuniversal",
            "order": self._order,
            "D": self._error_order,
            "buckets": parts,
        }

    def __repr__(self) -> str:
        return \
            f"NonUniversalExpansion(order: {self._order}, " \
            f"D: {self._error_order}, counts: {self.counts()})"


class _Step:
    """
    Graphs produced by one expansion step.
    """

    def __init__(self) -> None:
        self.placed = []
        self.follow = []

    def place(self, bucket: str, graph: GraphTerm) -> None:
        """
        Store a graph in an output bucket.
        """
        self.placed.append((bucket, graph))


def _stop(graph: GraphTerm, n: int, error_order: int) -> str:
    """
    Bucket of a graph meeting a stopping rule, or None.
    """
    if has_tail(graph) or effective_order(graph, n) > error_order:
        return BUCKET_ERR

    if is_q_graph(graph):
        return BUCKET_Q

    return None


def _mis(graph: GraphTerm) -> tuple:
    """
    Red-free molecular graph and internal atoms of the minimal isolated
    subgraph with non-deterministic closure.
    """
    mol = molecular_graph(graph).red_free()
    mis = isolated_subgraphs(mol, ghost=True, random_only=True).mis

    atoms = set()
    for mol_id in mis:
        atoms.update(mol.molecules[mol_id].atoms)

    return mol, mis, atoms & set(graph.internals)


def _first_t_variable(graph: GraphTerm, mol: object, mis: frozenset) -> int:
    order = pre_deterministic_order(mol.restrict(mis), ghost=True)
    if order is None:
        order = pre_deterministic_order(mol, ghost=True)

    if order is None:
        return None

    for key in order:
        edge = mol.edge(key)
        if edge.a not in mis or edge.b not in mis:
            continue

        for atom in graph.edges[key].ends:
            if is_standard_neutral(graph, atom):
                return atom

    return None


def _pivotal_atom(graph: GraphTerm, atoms: set) -> int:
    for atom in sorted(atoms):
        if is_standard_neutral(graph, atom):
            return atom

    return None


def expand_step(
        graph: GraphTerm,
        n: int,
        error_order: int,
        texp: TExpansion,
        validate: bool = False) -> _Step:
    """
    One step of the non-universal strategy on the minimal isolated
    subgraph with non-deterministic closure ``I``:

    - local expansions when ``I`` is not locally standard
    - substitution of the T-variable of the first blue edge of a
      pre-deterministic order of ``I``
    - when ``I`` is deterministic, a ghost edge is added along the
      pivotal blue edge of its standard neutral atom, which is then
      substituted

    Graphs with a deterministic locally standard maximal subgraph stop.
    """
    step = _Step()
    ghosts = ghost_count(graph)
    bound = error_order + (n - 1) * ghosts

    if validate and not is_ggs(graph, n):
        raise GGSViolation(f"graph is not GGS: {dumps(graph).decode()}")

    mol, mis, atoms = _mis(graph)

    pending = [atom for atom in pending_atoms(graph) if atom in atoms]
    if pending:
        local = local_expand_to_standard(graph, bound, bound, atoms=atoms)
        for term in local.bucket(QGRAPH):
            step.place(BUCKET_Q, term)
        for term in local.bucket(ERROR):
            step.place(BUCKET_ERR, term)
        for term in local.bucket(RECOLLISION):
            step.place(BUCKET_R, term)
        step.follow.extend(local.bucket(STANDARD))
        step.follow.extend(local.bucket(HIGHER))
        return step

    if mol.internal_edges(BLUE):
        atom = _first_t_variable(graph, mol, mis)
        if atom is not None:
            step.follow.extend(
                substitute_t_variable(graph, atom, texp, bound))
            return step

    atom = _pivotal_atom(graph, atoms)
    if atom is None or not graph.solid():
        step.place(BUCKET_DET, graph)
        return step

    tvar = t_variable(graph, atom)
    ghost = Edge(GHOST, tvar.x, tvar.y1)

    LOGGER.debug("Adding ghost edge %d-%d", tvar.x, tvar.y1)

    for term in substitute_t_variable(graph, atom, texp, bound + n - 1):
        step.follow.append(term.with_items(edges=[ghost]))

    return step


def build_non_universal(
        texp: TExpansion,
        error_order: int = None,
        max_graphs: int = MAX_GRAPHS,
        validate: bool = False) -> NonUniversalExpansion:
    """
    Expand the recollision and higher order graphs of the n-th order
    T-expansion ``texp`` until every graph has a deterministic locally
    standard maximal subgraph, is a Q-graph, or is negligible once its
    ghost edges are paid for. Every graph satisfies
    ``ord >= (n - 1) k_gh + 2``.

    :raises GGSViolation: a graph breaks the ghost order bound.
    :raises CapacityError: more than ``4 n ** 2`` rounds or more than
        ``max_graphs`` graphs.
    """
    n = texp.order
    error_order = error_order or texp.error_order

    buckets = {name: [] for name in NU_BUCKETS}
    buckets[BUCKET_SIGMA].append(texp.leading)
    buckets[BUCKET_SIGMA].extend(texp.sigma_terms())
    buckets[BUCKET_Q].extend(texp.bucket(BUCKET_Q))
    buckets[BUCKET_ERR].extend(texp.bucket(BUCKET_ERR))

    queue = list(texp.bucket(BUCKET_R)) + list(texp.bucket(BUCKET_A))
    handled = len(queue)
    rounds = 0
    max_rounds = 4 * n * n

    step = functools.partial(
        expand_step,
        n=n,
        error_order=error_order,
        texp=texp,
        validate=validate)

    LOGGER.info("Non-universal expansion of order %d (D=%d)", n, error_order)

    with ThreadPoolExecutor(max_workers=max_threads()) as pool:
        while queue:
            rounds += 1
            if rounds > max_rounds:
                raise CapacityError(
                    f"non-universal expansion needs more than {max_rounds} "
                    "rounds")

            pending = []
            for graph in merge_terms(queue):
                bucket = _stop(graph, n, error_order)
                if bucket is None:
                    pending.append(graph)
                else:
                    buckets[bucket].append(graph)

            follow = []
            for outcome in pool.map(step, pending):
                for bucket, graph in outcome.placed:
                    buckets[bucket].append(graph)
                follow.extend(outcome.follow)
                handled += len(outcome.placed) + len(outcome.follow)

            if handled > max_graphs:
                raise CapacityError(
                    f"non-universal expansion handled more than {max_graphs} "
                    "graphs")

            queue = follow

    for name in (BUCKET_R, BUCKET_DET, BUCKET_Q):
        for graph in buckets[name]:
            check_ghost_order(graph, n)

    result = NonUniversalExpansion(
        order=n,
        error_order=error_order,
        rounds=rounds,
        buckets={k: canonical_expansion(merge_terms(v))
                 for k, v in buckets.items()})

    LOGGER.info("Built %s in %d rounds", result, rounds)

    return result
