"""
.. module:: oracle
    :platform: Linux
    :synopsis: exhaustive reference implementations of the structural
        predicates, and generators of small molecular graphs
"""
import typing
import itertools
import numpy as np
from libbandgraph import CapacityError
from libbandgraph.molecular import MolecularGraph
from libbandgraph.molecular import BLUE
from libbandgraph.molecular import RED
from libbandgraph.molecular import DIFF
from libbandgraph.molecular import GHOST_EDGE
from libbandgraph.molecular import LINK
from libbandgraph.molecular import net_view
from libbandgraph.molecular import spans

# cap on the edges seen by the exhaustive net search
MAX_ORACLE_EDGES = 12


def doubly_connected(
        graph: MolecularGraph,
        ghost: bool = False,
        rooted: bool = False) -> bool:
    """
    Try every assignment of the edges to the black net, the blue net or
    neither.
    """
    nodes, edges = net_view(graph, rooted)
    if len(nodes) <= 1:
        return True

    if len(edges) > MAX_ORACLE_EDGES:
        raise CapacityError(f"{len(edges)} edges over {MAX_ORACLE_EDGES}")

    blue_kinds = (BLUE, DIFF, GHOST_EDGE) if ghost else (BLUE, DIFF)

    choices = []
    for edge in edges:
        options = [None]
        if edge.kind == DIFF:
            options.append("black")
        if edge.kind in blue_kinds:
            options.append("blue")
        choices.append(options)

    for assignment in itertools.product(*choices):
        black = [e for e, c in zip(edges, assignment) if c == "black"]
        blue = [e for e, c in zip(edges, assignment) if c == "blue"]
        if spans(nodes, black) and spans(nodes, blue):
            return True

    return False


def redundant(graph: MolecularGraph, key: int, ghost: bool = False) -> bool:
    """
    Redundancy of an edge through the exhaustive net search.
    """
    if graph.edge(key).is_loop:
        return True

    return doubly_connected(graph.without([key]), ghost)


def isolated_subsets(graph: MolecularGraph, ghost: bool = False) -> set:
    """
    All proper subsets of internal molecules joined to their complement by
    exactly two red-free edges.
    """
    kinds = (BLUE, DIFF, LINK, GHOST_EDGE) if ghost else (BLUE, DIFF, LINK)
    internals = graph.internals

    found = set()
    for size in range(1, len(internals)):
        for subset in itertools.combinations(internals, size):
            subset = frozenset(subset)
            count = 0
            for edge in graph.edges:
                if edge.kind not in kinds:
                    continue

                if (edge.a in subset) != (edge.b in subset):
                    count += 1

            if count == 2:
                found.add(subset)

    return found


def pre_deterministic(graph: MolecularGraph, ghost: bool = False) -> bool:
    """
    Try every order of the internal blue solid edges.
    """
    if not doubly_connected(graph, ghost):
        return False

    keys = [edge.key for edge in graph.internal_edges(BLUE)]

    for order in itertools.permutations(keys):
        current = graph
        for key in order:
            if not redundant(current, key, ghost):
                break

            current = current.converted([key])
        else:
            return True

    return False


def is_valid_order(
        graph: MolecularGraph,
        order: typing.Sequence,
        ghost: bool = False) -> bool:
    """
    Check a candidate pre-deterministic order edge by edge.
    """
    keys = sorted(edge.key for edge in graph.internal_edges(BLUE))
    if sorted(order) != keys:
        return False

    current = graph
    for key in order:
        if not redundant(current, key, ghost):
            return False

        current = current.converted([key])

    return True


def enumerate_graphs(
        internals: int,
        externals: int,
        max_edges: int,
        kinds: tuple = (BLUE, RED, DIFF)) -> typing.Iterator:
    """
    Every multigraph of singleton molecules with up to ``max_edges``
    edges of the given kinds between distinct molecules.
    """
    total = internals + externals
    slots = [
        (kind, a, b)
        for a, b in itertools.combinations(range(total), 2)
        for kind in kinds
        if not (a >= internals and b >= internals)
    ]

    for count in range(max_edges + 1):
        for chosen in itertools.combinations_with_replacement(slots, count):
            yield MolecularGraph.from_edges(internals, externals, chosen)


def random_graph(
        rng: np.random.Generator,
        max_molecules: int = 8,
        max_edges: int = 10,
        kinds: tuple = (BLUE, RED, DIFF),
        externals: int = 1) -> MolecularGraph:
    """
    A random multigraph of singleton molecules.
    """
    internals = int(rng.integers(1, max_molecules + 1))
    total = internals + externals
    count = int(rng.integers(0, max_edges + 1))

    edges = []
    for _ in range(count):
        kind = kinds[int(rng.integers(0, len(kinds)))]
        a = int(rng.integers(0, internals))
        b = int(rng.integers(0, total))
        if a == b:
            b = (b + 1) % total
        edges.append((kind, a, b))

    return MolecularGraph.from_edges(internals, externals, edges)
