"""
.. module:: molecular
    :platform: Linux
    :synopsis: molecular quotients of atomic graphs and black/blue nets
"""
import typing
import logging
import dataclasses
import networkx as nx
from networkx.utils import UnionFind
from libbandgraph import BandGraphException
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import SOLID
from libbandgraph.graph import WAVED_KINDS
from libbandgraph.graph import DIFFUSIVE
from libbandgraph.graph import DOTTED
from libbandgraph.graph import GHOST

LOGGER = logging.getLogger("bandgraph.molecular")

# molecular edge kinds
BLUE = "blue"
RED = "red"
DIFF = "diff"
GHOST_EDGE = "ghost"
LINK = "dot"

MOLECULAR_KINDS = (BLUE, RED, DIFF, GHOST_EDGE, LINK)

# node standing for all the external molecules in generalized mode
ROOT = -1


class StructureError(BandGraphException):
    """
    Raised when a structural predicate gets an input it's not defined on.
    """


@dataclasses.dataclass(frozen=True)
class MolEdge:
    """
    An edge of a molecular graph. ``key`` is the index of the source edge
    in its graph, or a negative number for edges created by closure
    replacements.
    """
    key: int
    kind: str
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.kind not in MOLECULAR_KINDS:
            raise StructureError(f"Unknown molecular edge kind '{self.kind}'")

    @property
    def is_loop(self) -> bool:
        """
        True if the edge lies inside one molecule.
        """
        return self.a == self.b

    def touches(self, mol: int) -> bool:
        """
        True if ``mol`` is an endpoint.
        """
        return mol in (self.a, self.b)

    def other(self, mol: int) -> int:
        """
        Endpoint opposite to ``mol``.
        """
        if mol == self.a:
            return self.b

        if mol == self.b:
            return self.a

        raise StructureError(f"molecule {mol} is not an endpoint of {self}")


@dataclasses.dataclass(frozen=True)
class Molecule:
    """
    A class of atoms joined by waved and dotted edges. ``random`` tells if
    the molecule carries weights.
    """
    atoms: frozenset
    external: bool = False
    random: bool = False


class MolecularGraph:
    """
    Quotient of an atomic graph by its molecules. Molecule ids are stable
    under ``restrict``, ``without`` and closure replacements, so edges and
    subsets can be tracked across derived graphs.
    """

    def __init__(self, molecules: dict, edges: typing.Iterable) -> None:
        """
        :param molecules: molecule id to ``Molecule``
        :type molecules: dict
        :param edges: molecular edges
        :type edges: list(MolEdge)
        """
        self._molecules = dict(sorted(molecules.items()))
        self._edges = tuple(sorted(edges, key=lambda e: e.key))

        keys = [edge.key for edge in self._edges]
        if len(set(keys)) != len(keys):
            raise StructureError("molecular edge keys are not unique")

        for edge in self._edges:
            if edge.a not in self._molecules or edge.b not in self._molecules:
                raise StructureError(f"edge {edge} ends on unknown molecule")

        self._atom_index = {}
        for mol_id, mol in self._molecules.items():
            for atom in mol.atoms:
                self._atom_index[atom] = mol_id

    @classmethod
    def from_edges(
            cls,
            internals: int,
            externals: int,
            edges: typing.Iterable) -> "MolecularGraph":
        """
        Build a molecular graph of singleton molecules. Internal molecules
        get ids ``0..internals-1``, external ones the following ids.
        ``edges`` is a sequence of ``(kind, a, b)``.
        """
        molecules = {}
        for mol_id in range(internals + externals):
            molecules[mol_id] = Molecule(
                frozenset([mol_id]), external=mol_id >= internals)

        return cls(molecules, [
            MolEdge(key, kind, a, b)
            for key, (kind, a, b) in enumerate(edges)
        ])

    @property
    def molecules(self) -> dict:
        """
        Molecule id to ``Molecule``.
        """
        return dict(self._molecules)

    @property
    def edges(self) -> tuple:
        """
        Molecular edges sorted by key.
        """
        return self._edges

    @property
    def internals(self) -> list:
        """
        Ids of the internal molecules.
        """
        return [i for i, mol in self._molecules.items() if not mol.external]

    @property
    def externals(self) -> list:
        """
        Ids of the external molecules.
        """
        return [i for i, mol in self._molecules.items() if mol.external]

    def molecule_of(self, atom: int) -> int:
        """
        Id of the molecule containing ``atom``.
        """
        try:
            return self._atom_index[atom]
        except KeyError as err:
            raise StructureError(f"atom {atom} is in no molecule") from err

    def is_external(self, mol: int) -> bool:
        """
        True if the molecule is external.
        """
        return self._molecules[mol].external

    def edge(self, key: int) -> MolEdge:
        """
        Edge with the given key.
        """
        for edge in self._edges:
            if edge.key == key:
                return edge

        raise StructureError(f"no molecular edge with key {key}")

    def edges_of(self, kinds: typing.Any) -> list:
        """
        Edges of one kind, or of a tuple of kinds.
        """
        kinds = (kinds,) if isinstance(kinds, str) else tuple(kinds)
        return [edge for edge in self._edges if edge.kind in kinds]

    def internal_edges(self, kinds: typing.Any) -> list:
        """
        Edges of the given kinds not touching external molecules.
        """
        return [
            edge for edge in self.edges_of(kinds)
            if not self.is_external(edge.a) and not self.is_external(edge.b)
        ]

    def boundary(self, subset: typing.Iterable, kinds: tuple = None) -> list:
        """
        Edges with exactly one endpoint in ``subset``.
        """
        subset = set(subset)
        found = []
        for edge in self._edges:
            if kinds and edge.kind not in kinds:
                continue

            if (edge.a in subset) != (edge.b in subset):
                found.append(edge)

        return found

    def red_free(self) -> "MolecularGraph":
        """
        The molecular graph without red solid edges.
        """
        return MolecularGraph(
            self._molecules,
            [edge for edge in self._edges if edge.kind != RED])

    def restrict(self, subset: typing.Iterable) -> "MolecularGraph":
        """
        Subgraph induced on a subset of molecules.
        """
        subset = set(subset)
        return MolecularGraph(
            {i: mol for i, mol in self._molecules.items() if i in subset},
            [e for e in self._edges if e.a in subset and e.b in subset])

    def without(self, keys: typing.Iterable) -> "MolecularGraph":
        """
        Copy without the edges with the given keys.
        """
        keys = set(keys)
        return MolecularGraph(
            self._molecules,
            [edge for edge in self._edges if edge.key not in keys])

    def converted(
            self,
            keys: typing.Iterable,
            kind: str = DIFF) -> "MolecularGraph":
        """
        Copy where the edges with the given keys change kind.
        """
        keys = set(keys)
        return MolecularGraph(self._molecules, [
            dataclasses.replace(edge, kind=kind) if edge.key in keys else edge
            for edge in self._edges
        ])

    def next_key(self) -> int:
        """
        A fresh negative key.
        """
        return min([0] + [edge.key for edge in self._edges]) - 1

    def replace_closure(
            self,
            subset: typing.Iterable,
            kinds: tuple = (BLUE, DIFF, LINK)) -> "MolecularGraph":
        """
        Remove the molecules of an isolated subset together with the edges
        touching them, and join the outer ends of its two boundary edges
        (of the given kinds) by a diffusive edge. When both outer ends are
        the same molecule the new edge is a loop and is not added.
        """
        subset = set(subset)
        cut = self.boundary(subset, kinds)
        if len(cut) != 2:
            raise StructureError(
                f"closure of {sorted(subset)} has {len(cut)} boundary edges")

        outer = [
            edge.b if edge.a in subset else edge.a
            for edge in cut
        ]

        molecules = {
            i: mol for i, mol in self._molecules.items() if i not in subset
        }
        edges = [
            edge for edge in self._edges
            if edge.a not in subset and edge.b not in subset
        ]

        if outer[0] != outer[1]:
            edges.append(MolEdge(self.next_key(), DIFF, outer[0], outer[1]))

        return MolecularGraph(molecules, edges)

    def has_random(self, subset: typing.Iterable) -> bool:
        """
        True if the closure of ``subset`` holds random factors: weights or
        solid edges inside it, or solid edges leaving it.
        """
        subset = set(subset)
        for mol in subset:
            if self._molecules[mol].random:
                return True

        for edge in self._edges:
            if edge.kind not in (BLUE, RED):
                continue

            if edge.a in subset or edge.b in subset:
                return True

        return False

    def to_dict(self) -> dict:
        """
        Export the molecular graph.
        """
        return {
            "molecules": [
                {
                    "id": mol_id,
                    "atoms": sorted(mol.atoms),
                    "external": mol.external,
                    "random": mol.random,
                }
                for mol_id, mol in self._molecules.items()
            ],
            "edges": [
                {"key": e.key, "kind": e.kind, "a": e.a, "b": e.b}
                for e in self._edges
            ],
        }

    def __repr__(self) -> str:
        return \
            f"MolecularGraph(molecules: {len(self._molecules)}, " \
            f"internals: {len(self.internals)}, " \
            f"edges: {len(self._edges)})"


def molecules(graph: GraphTerm) -> list:
    """
    Partition of the atoms of ``graph`` into molecules: internal atoms are
    joined by waved edges and plain dotted edges, external atoms are
    singletons. Molecules are sorted by their smallest atom.
    """
    skeleton = nx.Graph()
    skeleton.add_nodes_from(atom.id for atom in graph.atoms)

    for edge in graph.edges:
        if edge.kind not in WAVED_KINDS and \
                not (edge.kind == DOTTED and not edge.crossed):
            continue

        if graph.is_external(edge.a) or graph.is_external(edge.b):
            continue

        skeleton.add_edge(edge.a, edge.b)

    parts = [frozenset(part) for part in nx.connected_components(skeleton)]
    parts.sort(key=min)

    return parts


def molecular_graph(graph: GraphTerm) -> MolecularGraph:
    """
    Molecular graph of an atomic graph. Solid edges become blue (plus) or
    red (minus) edges, diffusive edges of any chain stay diffusive, plain
    dotted edges and waved edges touching external atoms become dotted
    links. Crossed dotted edges are dropped.
    """
    parts = molecules(graph)

    weighted = {weight.atom for weight in graph.weights}
    table = {}
    for mol_id, part in enumerate(parts):
        external = any(graph.is_external(atom) for atom in part)
        table[mol_id] = Molecule(
            part,
            external=external,
            random=bool(part & weighted))

    index = {atom: mol_id for mol_id, part in enumerate(parts) for atom in part}

    edges = []
    for key, edge in enumerate(graph.edges):
        kind = None
        if edge.kind == SOLID:
            kind = BLUE if edge.charge > 0 else RED
        elif edge.kind == DIFFUSIVE:
            kind = DIFF
        elif edge.kind == GHOST:
            kind = GHOST_EDGE
        elif edge.kind == DOTTED and not edge.crossed:
            kind = LINK
        elif edge.kind in WAVED_KINDS:
            kind = LINK

        if kind is None:
            continue

        a = index[edge.a]
        b = index[edge.b]
        if kind == LINK and a == b:
            continue

        edges.append(MolEdge(key, kind, a, b))

    return MolecularGraph(table, edges)


@dataclasses.dataclass(frozen=True)
class NetCertificate:
    """
    A black net and a blue net of a molecular graph, given as edge keys.
    Both are spanning trees of the same node set.
    """
    black: tuple
    blue: tuple
    nodes: tuple
    ghost: bool = False
    rooted: bool = False

    def verify(self, graph: MolecularGraph) -> bool:
        """
        Check disjointness, edge colors and the spanning property against
        ``graph``.
        """
        if set(self.black) & set(self.blue):
            return False

        nodes, mapped = net_view(graph, self.rooted)
        if tuple(nodes) != self.nodes:
            return False

        allowed = _blue_kinds(self.ghost)
        by_key = {edge.key: edge for edge in mapped}

        for key in self.black:
            if key not in by_key or by_key[key].kind != DIFF:
                return False

        for key in self.blue:
            if key not in by_key or by_key[key].kind not in allowed:
                return False

        return spans(nodes, [by_key[k] for k in self.black]) and \
            spans(nodes, [by_key[k] for k in self.blue])

    def to_dict(self) -> dict:
        """
        Export the certificate.
        """
        return {
            "black": list(self.black),
            "blue": list(self.blue),
            "nodes": list(self.nodes),
            "ghost": self.ghost,
            "rooted": self.rooted,
        }


def _blue_kinds(ghost: bool) -> tuple:
    if ghost:
        return (BLUE, DIFF, GHOST_EDGE)

    return (BLUE, DIFF)


def net_view(graph: MolecularGraph, rooted: bool) -> tuple:
    """
    Nodes and non-loop edges the nets must span. Without ``rooted`` the
    external molecules are dropped, otherwise they collapse into ``ROOT``
    together with the internal molecules linked to them by dotted edges.
    """
    if not rooted:
        nodes = graph.internals
        keep = set(nodes)
        edges = [
            edge for edge in graph.edges
            if edge.a in keep and edge.b in keep and not edge.is_loop
        ]
        return nodes, edges

    mapping = {mol: ROOT for mol in graph.externals}

    changed = True
    while changed:
        changed = False
        for edge in graph.edges_of(LINK):
            ends = (mapping.get(edge.a, edge.a), mapping.get(edge.b, edge.b))
            if ROOT in ends and ends[0] != ends[1]:
                for end in (edge.a, edge.b):
                    if mapping.get(end) != ROOT:
                        mapping[end] = ROOT
                        changed = True

    nodes = [ROOT] + [
        mol for mol in graph.internals if mapping.get(mol) != ROOT
    ]

    edges = []
    for edge in graph.edges:
        moved = dataclasses.replace(
            edge,
            a=mapping.get(edge.a, edge.a),
            b=mapping.get(edge.b, edge.b))
        if not moved.is_loop:
            edges.append(moved)

    return nodes, edges


def spans(nodes: list, edges: list) -> bool:
    if len(nodes) <= 1:
        return True

    links = UnionFind(nodes)
    for edge in edges:
        links.union(edge.a, edge.b)

    root = links[nodes[0]]
    return all(links[node] == root for node in nodes)


def _spanning_tree(nodes: list, edges: list) -> list:
    links = UnionFind(nodes)
    tree = []
    for edge in edges:
        if links[edge.a] != links[edge.b]:
            links.union(edge.a, edge.b)
            tree.append(edge)

    if len(tree) != len(nodes) - 1:
        return None

    return tree


def find_nets(
        graph: MolecularGraph,
        ghost: bool = False,
        rooted: bool = False) -> NetCertificate:
    """
    Search disjoint black and blue nets spanning the internal molecules
    (or the internal molecules plus ``ROOT`` when ``rooted``). Red solid
    edges are ignored. The search walks the spanning trees made of
    diffusive edges and checks if the remaining edges still span.
    Returns None when no nets exist.
    """
    nodes, mapped = net_view(graph, rooted)

    if len(nodes) <= 1:
        return NetCertificate((), (), tuple(nodes), ghost, rooted)

    black_pool = [edge for edge in mapped if edge.kind == DIFF]
    blue_only = [
        edge for edge in mapped
        if edge.kind in _blue_kinds(ghost) and edge.kind != DIFF
    ]
    size = len(nodes) - 1

    def _search(start: int, chosen: list) -> tuple:
        if len(chosen) == size:
            keys = {edge.key for edge in chosen}
            rest = [e for e in black_pool if e.key not in keys] + blue_only
            tree = _spanning_tree(nodes, sorted(rest, key=lambda e: e.key))
            if tree is None:
                return None

            return chosen, tree

        if start >= len(black_pool):
            return None

        if not spans(nodes, chosen + black_pool[start:]):
            return None

        keys = {edge.key for edge in chosen}
        if not spans(nodes, [
                e for e in black_pool if e.key not in keys] + blue_only):
            return None

        edge = black_pool[start]
        if _acyclic(nodes, chosen + [edge]):
            found = _search(start + 1, chosen + [edge])
            if found:
                return found

        return _search(start + 1, chosen)

    found = _search(0, [])
    if found is None:
        return None

    black, blue = found

    return NetCertificate(
        tuple(sorted(edge.key for edge in black)),
        tuple(sorted(edge.key for edge in blue)),
        tuple(nodes),
        ghost,
        rooted)


def _acyclic(nodes: list, edges: list) -> bool:
    links = UnionFind(nodes)
    for edge in edges:
        if links[edge.a] == links[edge.b]:
            return False

        links.union(edge.a, edge.b)

    return True


def is_doubly_connected(
        graph: MolecularGraph,
        ghost: bool = False) -> NetCertificate:
    """
    Nets certifying that ``graph`` is doubly connected once its external
    molecules are removed, or None. Ghost edges join the blue net when
    ``ghost`` is set.
    """
    return find_nets(graph, ghost=ghost, rooted=False)


def is_gen_doubly_connected(graph: typing.Any) -> NetCertificate:
    """
    Nets certifying that every internal molecule reaches the external
    molecules through disjoint black and blue paths, or None. Accepts an
    atomic graph or a molecular graph.
    """
    if isinstance(graph, GraphTerm):
        graph = molecular_graph(graph)

    return find_nets(graph, ghost=True, rooted=True)


def is_redundant(
        graph: MolecularGraph,
        key: int,
        ghost: bool = False) -> bool:
    """
    True if the graph stays doubly connected without the edge ``key``.
    Edges inside a molecule are always redundant.
    """
    edge = graph.edge(key)
    if edge.is_loop:
        return True

    return is_doubly_connected(graph.without([key]), ghost) is not None


def edge_class(
        graph: MolecularGraph,
        key: int,
        ghost: bool = False) -> str:
    """
    ``"redundant"`` or ``"pivotal"`` for a blue solid edge.
    """
    edge = graph.edge(key)
    if edge.kind != BLUE:
        raise StructureError(
            f"edge {key} is {edge.kind}, only blue solid edges are classified")

    if is_redundant(graph, key, ghost):
        return "redundant"

    return "pivotal"


_DOT_COLORS = {
    BLUE: "blue",
    RED: "red",
    DIFF: "black",
    GHOST_EDGE: "gray",
    LINK: "black",
}


def to_dot(graph: MolecularGraph, name: str = "molecular") -> str:
    """
    Graphviz source of a molecular graph.
    """
    lines = [f"graph {name} {{"]
    for mol_id, mol in graph.molecules.items():
        shape = "box" if mol.external else "circle"
        atoms = ",".join(str(a) for a in sorted(mol.atoms))
        lines.append(f'  m{mol_id} [shape={shape}, label="{atoms}"];')

    for edge in graph.edges:
        style = ""
        if edge.kind == DIFF:
            style = ", style=bold"
        elif edge.kind == LINK:
            style = ", style=dotted"
        elif edge.kind == GHOST_EDGE:
            style = ", style=dashed"

        lines.append(
            f"  m{edge.a} -- m{edge.b} "
            f"[color={_DOT_COLORS[edge.kind]}{style}, label=\"{edge.key}\"];")

    lines.append("}")

    return "\n".join(lines) + "\n"
