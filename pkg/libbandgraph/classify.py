"""
.. module:: classify
    :platform: Linux
    :synopsis: regularity checks, scaling order and classification of
        atomic graphs
"""
import logging
import networkx as nx
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import GraphError
from libbandgraph.graph import Edge
from libbandgraph.graph import SOLID
from libbandgraph.graph import WAVED
from libbandgraph.graph import WAVED_KINDS
from libbandgraph.graph import DIFFUSIVE
from libbandgraph.graph import DOTTED
from libbandgraph.graph import LIGHT
from libbandgraph.graph import TAIL
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2

LOGGER = logging.getLogger("bandgraph.classify")

# default cap on the number of atoms of a regular graph
MAX_ATOMS = 64

# default cap on the number of edges of a regular graph
MAX_EDGES = 256


class RegularityReport:
    """
    Outcome of ``validate_normal_regular``.
    """

    def __init__(self, violations: dict) -> None:
        self._violations = violations

    @property
    def violations(self) -> dict:
        """
        Violated properties, from ``"i"`` to ``"iv"``, with messages.
        """
        return self._violations

    @property
    def regular(self) -> bool:
        """
        True if properties (i) to (iii) hold.
        """
        return not any(k in self._violations for k in ("i", "ii", "iii"))

    @property
    def normal(self) -> bool:
        """
        True if the graph is regular and property (iv) holds.
        """
        return self.regular and "iv" not in self._violations

    def to_dict(self) -> dict:
        """
        Export the report.
        """
        return {
            "regular": self.regular,
            "normal": self.normal,
            "violations": self._violations,
        }

    def __repr__(self) -> str:
        return \
            f"RegularityReport(regular: {self.regular}, " \
            f"normal: {self.normal}, " \
            f"violations: {self._violations})"


def _pair(edge: Edge) -> frozenset:
    return frozenset(edge.ends)


def validate_normal_regular(
        graph: GraphTerm,
        max_atoms: int = MAX_ATOMS,
        max_edges: int = MAX_EDGES) -> RegularityReport:
    """
    Check that a graph is regular, i.e.

    (i) connected, with at most ``max_atoms`` atoms and ``max_edges`` edges
    (ii) internal atoms connected through waved and diffusive edges
    (iii) no plain dotted edges between internal atoms

    and normal, i.e.

    (iv) two atoms are joined by a crossed dotted edge if and only if they
    are joined by a solid edge.
    """
    violations = {}

    messages = []
    if len(graph.atoms) > max_atoms:
        messages.append(f"{len(graph.atoms)} atoms over {max_atoms}")

    if len(graph.edges) > max_edges:
        messages.append(f"{len(graph.edges)} edges over {max_edges}")

    whole = nx.MultiGraph()
    whole.add_nodes_from(atom.id for atom in graph.atoms)
    whole.add_edges_from(edge.ends for edge in graph.edges)

    if whole.number_of_nodes() > 0 and not nx.is_connected(whole):
        messages.append("graph is not connected")

    if messages:
        violations["i"] = "; ".join(messages)

    internals = graph.internals
    if len(internals) > 1:
        skeleton = nx.Graph()
        skeleton.add_nodes_from(internals)
        for edge in graph.edges:
            if edge.kind not in WAVED_KINDS + (DIFFUSIVE,):
                continue

            if edge.a in skeleton and edge.b in skeleton:
                skeleton.add_edge(edge.a, edge.b)

        if not nx.is_connected(skeleton):
            parts = nx.number_connected_components(skeleton)
            violations["ii"] = \
                f"internal atoms split in {parts} waved/diffusive components"

    for edge in graph.edges:
        if edge.kind != DOTTED or edge.crossed:
            continue

        if not graph.is_external(edge.a) and not graph.is_external(edge.b):
            violations["iii"] = f"dotted edge {edge} between internal atoms"
            break

    solid_pairs = {_pair(e) for e in graph.edges if e.kind == SOLID}

    dots = {}
    for edge in graph.edges:
        if edge.kind == DOTTED:
            dots.setdefault(_pair(edge), []).append(edge)

    messages = []
    for pair, found in sorted(dots.items(), key=lambda item: sorted(item[0])):
        if len(found) > 1:
            messages.append(f"{len(found)} dotted edges on {sorted(pair)}")

    crossed_pairs = {
        pair for pair, found in dots.items()
        if any(edge.crossed for edge in found)
    }

    for pair in sorted(solid_pairs ^ crossed_pairs, key=sorted):
        if pair in solid_pairs:
            messages.append(f"solid edge on {sorted(pair)} without crossed dot")
        else:
            messages.append(f"crossed dot on {sorted(pair)} without solid edge")

    if messages:
        violations["iv"] = "; ".join(messages)

    return RegularityReport(violations)


def scaling_order(graph: GraphTerm, strict: bool = True) -> int:
    """
    Scaling order of a normal regular graph: the number of off-diagonal
    solid edges and light weights, plus twice the number of waved edges,
    plus the order of every diffusive edge (2 for plain edges), minus twice
    the number of free summation indexes, i.e. internal atoms not pinned to
    an external atom by a dotted edge. Tail weights count with their order,
    ghost edges count zero. Without ``strict`` the count is also made on
    graphs that are not normal.
    """
    report = validate_normal_regular(graph) if strict else None
    if report is not None and not report.normal:
        raise GraphError(f"scaling order of non-normal graph: {report}")

    order = 0
    for edge in graph.edges:
        if edge.kind == SOLID:
            order += 1
        elif edge.kind in WAVED_KINDS:
            order += 2
        elif edge.kind == DIFFUSIVE:
            order += edge.chain_order
        elif edge.kind == DOTTED and not edge.crossed:
            order += 2

    for weight in graph.weights:
        if weight.form == LIGHT:
            order += 1
        elif weight.form == TAIL:
            order += weight.order

    order -= 2 * len(graph.internals)

    return order


def solid_degree(graph: GraphTerm, atom: int) -> int:
    """
    Number of solid edge ends at ``atom``.
    """
    degree = 0
    for index in graph.incident(atom, SOLID):
        edge = graph.edges[index]
        degree += 2 if edge.is_loop else 1

    return degree


def is_matched(graph: GraphTerm, atom: int, first: int, second: int) -> bool:
    """
    True if the solid edges at indexes ``first`` and ``second`` are matched
    at ``atom``, i.e. ``atom`` is the row index of one resolvent entry and
    the column index of the other, where ``Gbar_xy`` counts as
    ``G(zbar)_yx``.
    """
    edge1 = graph.edges[first]
    edge2 = graph.edges[second]

    if edge1.kind != SOLID or edge2.kind != SOLID:
        raise GraphError("matching is defined for solid edges")

    if not edge1.touches(atom) or not edge2.touches(atom):
        raise GraphError(f"edges do not touch atom {atom}")

    return edge1.row_of(atom) != edge2.row_of(atom)


def is_standard_neutral(graph: GraphTerm, atom: int) -> bool:
    """
    True if ``atom`` is internal and, apart from crossed dotted edges, is
    only connected to one waved ``S`` edge and two matched solid edges of
    opposite charges.
    """
    if graph.is_external(atom) or graph.weights_at(atom):
        return False

    solid = []
    waved = []
    for index in graph.incident(atom):
        edge = graph.edges[index]
        if edge.kind == DOTTED and edge.crossed:
            continue

        if edge.is_loop:
            return False

        if edge.kind == SOLID:
            solid.append(index)
        elif edge.kind == WAVED:
            waved.append(index)
        else:
            return False

    if len(solid) != 2 or len(waved) != 1:
        return False

    first, second = solid
    if graph.edges[first].charge == graph.edges[second].charge:
        return False

    if graph.edges[first].pq or graph.edges[second].pq:
        return False

    return is_matched(graph, atom, first, second)


def standard_neutral_atoms(graph: GraphTerm) -> list:
    """
    Ids of the standard neutral atoms.
    """
    return [
        atom for atom in graph.internals
        if is_standard_neutral(graph, atom)
    ]


def is_recollision(graph: GraphTerm) -> bool:
    """
    True if a plain dotted edge joins ``b1`` or ``b2`` to an internal atom.
    """
    targets = {graph.by_name(ATOM_B1), graph.by_name(ATOM_B2)} - {None}

    for edge in graph.edges:
        if edge.kind != DOTTED or edge.crossed:
            continue

        for end in edge.ends:
            if end in targets and not graph.is_external(edge.other(end)):
                return True

    return False


def q_label(graph: GraphTerm) -> int:
    """
    Atom of the common ``Q`` label when every solid edge and weight carries
    the same ``Q_x`` label, otherwise None.
    """
    items = [graph.edges[i] for i in graph.solid()] + list(graph.weights)
    if not items:
        return None

    labels = {item.pq for item in items}
    if len(labels) != 1:
        return None

    label = labels.pop()
    if label is None or label.kind != "Q":
        return None

    return label.atom


def is_q_graph(graph: GraphTerm) -> bool:
    """
    True if all random factors share one ``Q_x`` label.
    """
    return q_label(graph) is not None


def is_deterministic(graph: GraphTerm) -> bool:
    """
    True if the graph has no solid edges and no weights.
    """
    return not graph.solid() and not graph.weights


def is_locally_standard(graph: GraphTerm) -> bool:
    """
    True if the graph is normal regular without labels and weights, and
    every internal atom has solid degree 0, or 2 and is standard neutral.
    """
    if graph.is_labelled() or graph.weights or graph.has_transients():
        return False

    if not validate_normal_regular(graph).normal:
        return False

    for atom in graph.internals:
        degree = solid_degree(graph, atom)
        if degree == 0:
            continue

        if degree != 2 or not is_standard_neutral(graph, atom):
            return False

    return True


class GraphClass:
    """
    Classification flags of a normal regular graph.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param recollision: recollision graph
        :type recollision: bool
        :param q_atom: atom of the common Q label, or None
        :type q_atom: int
        :param deterministic: no random factors
        :type deterministic: bool
        :param locally_standard: locally standard graph
        :type locally_standard: bool
        :param neutral: standard neutral atoms
        :type neutral: list
        """
        self.recollision = kwargs.get("recollision", False)
        self.q_atom = kwargs.get("q_atom", None)
        self.deterministic = kwargs.get("deterministic", False)
        self.locally_standard = kwargs.get("locally_standard", False)
        self.neutral = kwargs.get("neutral", [])

    @property
    def q_graph(self) -> bool:
        """
        True for Q-graphs.
        """
        return self.q_atom is not None

    def to_dict(self) -> dict:
        """
        Export the flags.
        """
        return {
            "recollision": self.recollision,
            "q_graph": self.q_graph,
            "deterministic": self.deterministic,
            "locally_standard": self.locally_standard,
            "standard_neutral_atoms": list(self.neutral),
        }

    def __repr__(self) -> str:
        return \
            f"GraphClass(recollision: {self.recollision}, " \
            f"q_graph: {self.q_graph}, " \
            f"deterministic: {self.deterministic}, " \
            f"locally_standard: {self.locally_standard}, " \
            f"neutral: {self.neutral})"


def classify(graph: GraphTerm) -> GraphClass:
    """
    Compute all classification flags of a graph.
    """
    return GraphClass(
        recollision=is_recollision(graph),
        q_atom=q_label(graph),
        deterministic=is_deterministic(graph),
        locally_standard=is_locally_standard(graph),
        neutral=standard_neutral_atoms(graph))
