"""
.. module:: structure
    :platform: Linux
    :synopsis: isolated subgraphs, pre-deterministic orders and the SPD,
        globally standard and generalized structural classes
"""
import typing
import logging
import functools
import dataclasses
from libbandgraph import CapacityError
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import GHOST
from libbandgraph.graph import DIFFUSIVE
from libbandgraph.graph import DOTTED
from libbandgraph.graph import SOLID
from libbandgraph.graph import ATOM_A
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2
from libbandgraph.lattice import LatticeConfig
from libbandgraph.classify import scaling_order
from libbandgraph.classify import q_label
from libbandgraph.molecular import StructureError
from libbandgraph.molecular import MolecularGraph
from libbandgraph.molecular import molecular_graph
from libbandgraph.molecular import is_doubly_connected
from libbandgraph.molecular import is_redundant
from libbandgraph.molecular import BLUE
from libbandgraph.molecular import RED
from libbandgraph.molecular import DIFF
from libbandgraph.molecular import GHOST_EDGE
from libbandgraph.molecular import LINK

LOGGER = logging.getLogger("bandgraph.structure")

# cap on the internal molecules of isolated subset enumeration
MAX_MOLECULES = 18

# buckets with extra structural requirements
BUCKET_R = "R"
BUCKET_A = "A"
BUCKET_Q = "Q"


class NestingError(StructureError):
    """
    Raised when two isolated subsets overlap without being nested.
    """


@dataclasses.dataclass(frozen=True)
class IsolatedSubset:
    """
    An isolated subset of internal molecules with its two boundary edges.
    """
    molecules: frozenset
    boundary: tuple
    red: int
    random: bool

    @property
    def strong(self) -> bool:
        """
        True if at most one red solid edge leaves the subset.
        """
        return self.red <= 1

    def to_dict(self) -> dict:
        """
        Export the subset.
        """
        return {
            "molecules": sorted(self.molecules),
            "boundary": list(self.boundary),
            "red": self.red,
            "strong": self.strong,
            "random": self.random,
        }


class IsolationChain:
    """
    Proper isolated subsets of a molecular graph, largest first.
    """

    def __init__(self, subsets: typing.Iterable, maximal: frozenset) -> None:
        self._subsets = sorted(
            subsets,
            key=lambda s: (-len(s.molecules), sorted(s.molecules)))
        self._maximal = frozenset(maximal)

    @property
    def levels(self) -> list:
        """
        Isolated subsets sorted by decreasing size.
        """
        return list(self._subsets)

    @property
    def maximal(self) -> frozenset:
        """
        All internal molecules.
        """
        return self._maximal

    def is_chain(self) -> bool:
        """
        True if the subsets are totally ordered by inclusion.
        """
        for first, second in zip(self._subsets, self._subsets[1:]):
            if not second.molecules < first.molecules:
                return False

        return True

    def minimal(self) -> list:
        """
        Subsets without proper isolated subsets inside them.
        """
        return [
            s for s in self._subsets
            if not any(o.molecules < s.molecules for o in self._subsets)
        ]

    @property
    def mis(self) -> frozenset:
        """
        Molecules of the minimal isolated subgraph, or of the maximal
        subgraph when there are no proper isolated subsets.
        """
        found = self.minimal()
        if not found:
            return self._maximal

        found.sort(key=lambda s: (len(s.molecules), sorted(s.molecules)))

        return found[0].molecules

    def inside(self, molecules: frozenset) -> list:
        """
        Subsets strictly contained in ``molecules``.
        """
        return [s for s in self._subsets if s.molecules < molecules]

    def maximal_inside(self, molecules: frozenset) -> IsolatedSubset:
        """
        The largest isolated subset strictly inside ``molecules``, or
        None.
        """
        found = self.inside(molecules)
        if not found:
            return None

        return found[0]

    def to_dict(self) -> dict:
        """
        Export the chain.
        """
        return {
            "maximal": sorted(self._maximal),
            "levels": [s.to_dict() for s in self._subsets],
            "chain": self.is_chain(),
            "mis": sorted(self.mis),
        }

    def __repr__(self) -> str:
        return \
            f"IsolationChain(levels: {len(self._subsets)}, " \
            f"chain: {self.is_chain()}, " \
            f"mis: {sorted(self.mis)})"


def _as_molecular(graph: typing.Any) -> MolecularGraph:
    if isinstance(graph, GraphTerm):
        return molecular_graph(graph)

    return graph


def _cut_kinds(ghost: bool) -> tuple:
    if ghost:
        return (BLUE, DIFF, LINK, GHOST_EDGE)

    return (BLUE, DIFF, LINK)


def isolated_subgraphs(
        graph: typing.Any,
        ghost: bool = False,
        random_only: bool = False) -> IsolationChain:
    """
    Enumerate the proper isolated subsets of internal molecules, i.e. the
    subsets joined to the rest of the graph, externals included, by
    exactly two edges of the red-free molecular graph. With
    ``random_only`` only subsets with a non-deterministic closure are
    kept.

    :raises CapacityError: more than ``MAX_MOLECULES`` internal molecules
    :raises NestingError: two isolated subsets overlap without nesting
    """
    graph = _as_molecular(graph)
    internals = graph.internals

    if len(internals) > MAX_MOLECULES:
        raise CapacityError(
            f"{len(internals)} internal molecules over {MAX_MOLECULES}")

    kinds = _cut_kinds(ghost)
    cut_edges = [e for e in graph.edges if e.kind in kinds and not e.is_loop]
    red_edges = [e for e in graph.edges if e.kind == RED and not e.is_loop]

    found = []
    full = (1 << len(internals)) - 1
    for mask in range(1, full):
        subset = frozenset(
            mol for bit, mol in enumerate(internals) if mask >> bit & 1)

        boundary = [
            e for e in cut_edges if (e.a in subset) != (e.b in subset)
        ]
        if len(boundary) != 2:
            continue

        red = sum(1 for e in red_edges if (e.a in subset) != (e.b in subset))
        random = graph.has_random(subset)

        if random_only and not random:
            continue

        found.append(IsolatedSubset(
            subset,
            tuple(edge.key for edge in boundary),
            red,
            random))

    for i, first in enumerate(found):
        for second in found[i + 1:]:
            common = first.molecules & second.molecules
            if not common:
                continue

            if common in (first.molecules, second.molecules):
                continue

            anchored = any(
                graph.is_external(e.a) != graph.is_external(e.b)
                for e in cut_edges)

            raise NestingError(
                f"isolated subsets {sorted(first.molecules)} and "
                f"{sorted(second.molecules)} overlap without nesting "
                f"(internal-external edge present: {anchored})")

    LOGGER.debug("found %d isolated subsets", len(found))

    return IsolationChain(found, frozenset(internals))


def _order(graph: MolecularGraph, ghost: bool) -> tuple:
    """
    Greedy pre-deterministic order. Turning a blue edge into a diffusive
    edge never breaks the nets of the other edges, so an edge redundant at
    some step stays redundant afterwards and the greedy choice of the
    smallest redundant key finds an order whenever one exists.
    """
    if is_doubly_connected(graph, ghost) is None:
        return None

    pending = [edge.key for edge in graph.internal_edges(BLUE)]
    loops = [key for key in pending if graph.edge(key).is_loop]
    pending = [key for key in pending if key not in loops]

    order = list(loops)
    current = graph.converted(loops)

    while pending:
        for key in pending:
            if is_redundant(current, key, ghost):
                break
        else:
            return None

        order.append(key)
        pending.remove(key)
        current = current.converted([key])

    return tuple(order)


@functools.lru_cache(maxsize=4096)
def _cached_order(state: tuple, ghost: bool) -> tuple:
    molecules, edges = state
    graph = MolecularGraph(dict(molecules), edges)
    return _order(graph, ghost)


def _state(graph: MolecularGraph) -> tuple:
    return (tuple(graph.molecules.items()), graph.edges)


def pre_deterministic_order(
        graph: typing.Any,
        ghost: bool = False) -> tuple:
    """
    Keys of the internal blue solid edges in a pre-deterministic order:
    each edge is redundant once the previous ones are diffusive. Edges
    inside molecules come first, ties go to the smallest key. Returns None
    if the graph is not doubly connected or has no such order.
    """
    graph = _as_molecular(graph)
    return _cached_order(_state(graph), ghost)


def is_pre_deterministic(graph: typing.Any, ghost: bool = False) -> bool:
    """
    True if a pre-deterministic order exists.
    """
    return pre_deterministic_order(graph, ghost) is not None


def _closure_levels(
        graph: MolecularGraph,
        chain: IsolationChain,
        ghost: bool) -> bool:
    """
    Check that the minimal subset is pre-deterministic and that every
    larger level, up to the maximal subset, becomes pre-deterministic once
    the closure of its largest isolated subset turns into a diffusive edge.
    """
    levels = [s.molecules for s in chain.levels] + [chain.maximal]
    levels.sort(key=len)

    kinds = _cut_kinds(ghost)

    smallest = levels[0]
    if not is_pre_deterministic(graph.restrict(smallest), ghost):
        return False

    for inner, outer in zip(levels, levels[1:]):
        replaced = graph.replace_closure(inner, kinds)
        keep = outer - inner
        if not is_pre_deterministic(replaced.restrict(keep), ghost):
            return False

    return True


def is_spd(graph: typing.Any) -> bool:
    """
    True if the red-free molecular graph is doubly connected, its proper
    isolated subsets form one chain and every level is pre-deterministic
    after the closure of the next level is replaced by a diffusive edge.
    """
    full = _as_molecular(graph)
    return _spd(full, full.red_free(), ghost=False, random_only=False)


def _spd(
        full: MolecularGraph,
        graph: MolecularGraph,
        ghost: bool,
        random_only: bool) -> bool:
    if is_doubly_connected(graph, ghost) is None:
        return False

    try:
        chain = isolated_subgraphs(full, ghost=ghost, random_only=random_only)
    except NestingError as err:
        LOGGER.debug("not SPD: %s", err)
        return False

    if not chain.is_chain():
        return False

    return _closure_levels(graph, chain, ghost)


def is_globally_standard(graph: typing.Any) -> bool:
    """
    True if the graph is SPD and all its proper isolated subgraphs are
    weakly isolated.
    """
    graph = _as_molecular(graph)
    if not is_spd(graph):
        return False

    chain = isolated_subgraphs(graph)

    return not any(level.strong for level in chain.levels)


def is_gen_spd(graph: typing.Any) -> bool:
    """
    Generalized SPD property: ghost edges join the blue net and only the
    isolated subsets with non-deterministic closure must form a chain.
    """
    full = _as_molecular(graph)
    return _spd(full, full.red_free(), ghost=True, random_only=True)


def ghost_count(graph: GraphTerm) -> int:
    """
    Number of ghost edges.
    """
    return len(graph.edges_of(GHOST))


def ghost_bound(order: int, ghosts: int, n: int, extra: int = 0) -> bool:
    """
    True if ``order >= (n - 1) (ghosts + extra) + 2``.
    """
    return order >= (n - 1) * (ghosts + extra) + 2


def _redundant_ghost(graph: MolecularGraph) -> bool:
    chain = isolated_subgraphs(graph, ghost=True, random_only=True)

    strong = [level for level in chain.levels if level.strong]
    strong.sort(key=lambda s: (len(s.molecules), sorted(s.molecules)))
    target = strong[0].molecules if strong else chain.maximal

    every = isolated_subgraphs(graph, ghost=True)

    for ghost in graph.edges_of(GHOST_EDGE):
        if ghost.a not in target or ghost.b not in target:
            continue

        if ghost.is_loop:
            return True

        holders = [
            s.molecules for s in every.levels
            if s.molecules <= target and {ghost.a, ghost.b} <= s.molecules
        ] + [target]
        holders.sort(key=len)
        smallest = holders[0]

        current = graph
        inner = every.maximal_inside(smallest)
        if inner is not None:
            current = current.replace_closure(
                inner.molecules, _cut_kinds(True))

        current = current.restrict(
            smallest - (inner.molecules if inner else frozenset()))
        blues = [edge.key for edge in current.edges_of(BLUE)]
        current = current.converted(blues)

        if is_redundant(current, ghost.key, ghost=True):
            return True

    return False


def is_ggs(graph: GraphTerm, n: int) -> bool:
    """
    Generalized globally standard property for order ``n``: generalized
    SPD, and either ``ord >= (n-1)(k_gh+1)+2``, or ``ord >= (n-1)k_gh+2``
    with a ghost edge of the minimal strongly isolated subgraph that is
    redundant once the closure of its inner isolated subgraph and the
    other blue edges are diffusive.
    """
    mol = molecular_graph(graph)
    if not is_gen_spd(mol):
        return False

    order = scaling_order(graph)
    ghosts = ghost_count(graph)

    if ghost_bound(order, ghosts, n, extra=1):
        return True

    if not ghost_bound(order, ghosts, n):
        return False

    return _redundant_ghost(mol.red_free())


@dataclasses.dataclass(frozen=True)
class SizeEstimate:
    """
    ``(L^2 / W^2)^ghosts * W^(-order d / 2)``.
    """
    ghosts: int
    order: int
    d: int
    value: float

    @property
    def exponents(self) -> dict:
        """
        The value as symbolic exponents of ``L/W`` and ``W``.
        """
        return {"L/W": 2 * self.ghosts, "W": -self.order * self.d / 2}

    def to_dict(self) -> dict:
        """
        Export the estimate.
        """
        return {
            "ghosts": self.ghosts,
            "order": self.order,
            "value": self.value,
            "exponents": self.exponents,
        }


def size(graph: GraphTerm, config: LatticeConfig) -> SizeEstimate:
    """
    Size of a graph with ghost edges.
    """
    order = scaling_order(graph)
    ghosts = ghost_count(graph)
    ratio = (config.L / config.W) ** 2
    value = ratio ** ghosts * float(config.W) ** (-order * config.d / 2)

    return SizeEstimate(ghosts, order, config.d, value)


@dataclasses.dataclass
class ExtrasReport:
    """
    Outcome of ``validate_texpansion_extras``.
    """
    bucket: str
    failures: list

    @property
    def passed(self) -> bool:
        """
        True if no check failed.
        """
        return not self.failures

    def to_dict(self) -> dict:
        """
        Export the report.
        """
        return {
            "bucket": self.bucket,
            "passed": self.passed,
            "failures": list(self.failures),
        }


def _attachments(graph: GraphTerm) -> list:
    failures = []

    atom_a = graph.by_name(ATOM_A)
    if atom_a is not None:
        kinds = [graph.edges[i].kind for i in graph.incident(atom_a)
                 if not (graph.edges[i].kind == DOTTED
                         and graph.edges[i].crossed)]
        if kinds.count(DIFFUSIVE) != 1 or len(kinds) != 1:
            failures.append(f"atom a has edges {kinds}, want one diffusive")

    for name, charge in ((ATOM_B1, 1), (ATOM_B2, -1)):
        atom = graph.by_name(name)
        if atom is None:
            continue

        good = False
        for index in graph.incident(atom):
            edge = graph.edges[index]
            if edge.kind == DIFFUSIVE:
                good = True
            elif edge.kind == DOTTED and not edge.crossed:
                good = True
            elif edge.kind == SOLID and edge.charge == charge:
                good = True

        if not good:
            failures.append(f"atom {name} lacks a required attachment")

    return failures


def validate_texpansion_extras(graph: GraphTerm, bucket: str) -> ExtrasReport:
    """
    Structural requirements of a bucket graph of a T-expansion or
    T-equation: doubly connected, one diffusive edge at ``a``, an
    attachment of the right color at ``b1`` and ``b2``, plus globally
    standard (``R``), SPD (``A``) or SPD with the Q atom in the MIS
    (``Q``).
    """
    failures = _attachments(graph)

    mol = molecular_graph(graph)
    if is_doubly_connected(mol.red_free()) is None:
        failures.append("not doubly connected")

    if bucket == BUCKET_R:
        if not is_globally_standard(mol):
            failures.append("not globally standard")
    elif bucket == BUCKET_A:
        if not is_spd(mol):
            failures.append("not SPD")
    elif bucket == BUCKET_Q:
        if not is_spd(mol):
            failures.append("not SPD")
        else:
            atom = q_label(graph)
            if atom is None:
                failures.append("not a Q-graph")
            elif graph.is_external(atom):
                pass
            elif mol.molecule_of(atom) not in isolated_subgraphs(mol).mis:
                failures.append(f"Q atom {atom} is outside the MIS")

    return ExtrasReport(bucket, failures)
