"""
.. module:: serialize
    :platform: Linux
    :synopsis: JSON and DOT export of graphs and expansions
"""
import json
import typing
from libbandgraph.graph import GraphError
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.graph import Atom
from libbandgraph.graph import Edge
from libbandgraph.graph import Weight
from libbandgraph.graph import Label
from libbandgraph.graph import SOLID
from libbandgraph.graph import WAVED_KINDS
from libbandgraph.graph import DIFFUSIVE
from libbandgraph.graph import DOTTED
from libbandgraph.graph import GHOST
from libbandgraph.coefficient import Coefficient
from libbandgraph.coefficient import CoefficientError


class ParseError(GraphError):
    """
    Raised when a serialized graph doesn't follow the schema.
    """

    def __init__(self, location: str, message: str) -> None:
        super().__init__(f"{location}: {message}")
        self.location = location


_CHARGES = {"+": 1, "-": -1}


def _charge_str(charge: int) -> str:
    return "+" if charge > 0 else "-"


def _label_to_dict(label: Label) -> dict:
    return {"kind": label.kind, "atom": label.atom}


def _labels_to_dict(item: typing.Any, data: dict) -> None:
    if item.pq is not None:
        data["pq"] = _label_to_dict(item.pq)

    if item.minor is not None:
        data["minor"] = item.minor


def edge_to_dict(edge: Edge) -> dict:
    """
    Export an edge.
    """
    if edge.kind == SOLID:
        data = {
            "t": SOLID,
            "from": edge.a,
            "to": edge.b,
            "charge": _charge_str(edge.charge),
        }
        _labels_to_dict(edge, data)
        return data

    data = {"t": edge.kind, "a": edge.a, "b": edge.b}

    if edge.kind == DIFFUSIVE and edge.chain:
        data["chain"] = list(edge.chain)

    if edge.kind == DOTTED:
        data["x"] = edge.crossed

    return data


def weight_to_dict(weight: Weight) -> dict:
    """
    Export a weight.
    """
    data = {
        "atom": weight.atom,
        "charge": _charge_str(weight.charge),
        "form": weight.form,
    }

    if weight.order is not None:
        data["order"] = weight.order

    _labels_to_dict(weight, data)

    return data


def graph_to_dict(graph: GraphTerm) -> dict:
    """
    Export a graph term.
    """
    atoms = []
    for atom in graph.atoms:
        item = {
            "id": atom.id,
            "kind": "external" if atom.external else "internal",
        }
        if atom.external:
            item["name"] = atom.name

        atoms.append(item)

    return {
        "atoms": atoms,
        "edges": [edge_to_dict(edge) for edge in graph.edges],
        "weights": [weight_to_dict(weight) for weight in graph.weights],
        "coeff": graph.coeff.to_dict(),
    }


def expansion_to_dict(expansion: Expansion, **meta: dict) -> dict:
    """
    Export an expansion, with optional metadata.
    """
    data = dict(meta)
    data["terms"] = [graph_to_dict(term) for term in expansion]
    return data


def _field(data: dict, key: str, kind: type, location: str) -> typing.Any:
    if not isinstance(data, dict):
        raise ParseError(location, "expected an object")

    if key not in data:
        raise ParseError(location, f"missing '{key}'")

    value = data[key]

    # bool is a subclass of int
    if kind is int and isinstance(value, bool):
        raise ParseError(f"{location}.{key}", "expected an integer")

    if not isinstance(value, kind):
        raise ParseError(f"{location}.{key}", f"expected {kind.__name__}")

    return value


def _charge(data: dict, location: str) -> int:
    value = _field(data, "charge", str, location)
    if value not in _CHARGES:
        raise ParseError(f"{location}.charge", f"invalid charge '{value}'")

    return _CHARGES[value]


def _labels(data: dict, location: str) -> dict:
    labels = {}

    if data.get("pq") is not None:
        kind = _field(data["pq"], "kind", str, f"{location}.pq")
        atom = _field(data["pq"], "atom", int, f"{location}.pq")
        if kind not in ("P", "Q"):
            raise ParseError(f"{location}.pq.kind", f"invalid label '{kind}'")

        labels["pq"] = Label(kind, atom)

    if data.get("minor") is not None:
        labels["minor"] = _field(data, "minor", int, location)

    return labels


def _edge_from_dict(data: dict, location: str) -> Edge:
    kind = _field(data, "t", str, location)

    if kind == SOLID:
        return Edge(
            SOLID,
            _field(data, "from", int, location),
            _field(data, "to", int, location),
            charge=_charge(data, location),
            **_labels(data, location))

    if kind not in WAVED_KINDS + (DIFFUSIVE, DOTTED, GHOST):
        raise ParseError(f"{location}.t", f"unknown edge type '{kind}'")

    a = _field(data, "a", int, location)
    b = _field(data, "b", int, location)

    if kind == DIFFUSIVE and data.get("chain") is not None:
        chain = _field(data, "chain", list, location)
        for index, order in enumerate(chain):
            if not isinstance(order, int) or isinstance(order, bool):
                raise ParseError(
                    f"{location}.chain[{index}]", "expected an integer")

        return Edge(DIFFUSIVE, a, b, chain=tuple(chain))

    if kind == DOTTED:
        crossed = data.get("x", False)
        if not isinstance(crossed, bool):
            raise ParseError(f"{location}.x", "expected a boolean")

        return Edge(DOTTED, a, b, crossed=crossed)

    return Edge(kind, a, b)


def _weight_from_dict(data: dict, location: str) -> Weight:
    order = data.get("order", None)
    if order is not None:
        order = _field(data, "order", int, location)

    return Weight(
        _field(data, "atom", int, location),
        charge=_charge(data, location),
        form=_field(data, "form", str, location),
        order=order,
        **_labels(data, location))


def graph_from_dict(data: dict, location: str = "$") -> GraphTerm:
    """
    Import a graph term exported by ``graph_to_dict``.
    """
    atoms = []
    for index, item in enumerate(_field(data, "atoms", list, location)):
        where = f"{location}.atoms[{index}]"
        kind = _field(item, "kind", str, where)
        if kind not in ("internal", "external"):
            raise ParseError(f"{where}.kind", f"invalid atom kind '{kind}'")

        name = None
        if kind == "external":
            name = _field(item, "name", str, where)

        try:
            atoms.append(Atom(_field(item, "id", int, where),
                              kind == "external", name))
        except GraphError as err:
            raise ParseError(where, str(err)) from err

    edges = []
    for index, item in enumerate(data.get("edges", [])):
        where = f"{location}.edges[{index}]"
        try:
            edges.append(_edge_from_dict(item, where))
        except ParseError:
            raise
        except GraphError as err:
            raise ParseError(where, str(err)) from err

    weights = []
    for index, item in enumerate(data.get("weights", [])):
        where = f"{location}.weights[{index}]"
        try:
            weights.append(_weight_from_dict(item, where))
        except ParseError:
            raise
        except GraphError as err:
            raise ParseError(where, str(err)) from err

    try:
        coeff = Coefficient.from_dict(data.get("coeff", {"num": 1, "den": 1}))
    except CoefficientError as err:
        raise ParseError(f"{location}.coeff", str(err)) from err

    try:
        return GraphTerm(atoms, edges, weights, coeff)
    except ParseError:
        raise
    except GraphError as err:
        raise ParseError(location, str(err)) from err


def expansion_from_dict(data: dict) -> Expansion:
    """
    Import an expansion exported by ``expansion_to_dict``.
    """
    terms = _field(data, "terms", list, "$")

    return Expansion(
        graph_from_dict(item, f"$.terms[{index}]")
        for index, item in enumerate(terms))


def dumps(item: typing.Any, **meta: dict) -> bytes:
    """
    Serialize a graph term or an expansion as JSON bytes.
    """
    if isinstance(item, GraphTerm):
        data = graph_to_dict(item)
    elif isinstance(item, Expansion):
        data = expansion_to_dict(item, **meta)
    else:
        raise GraphError(f"Can't serialize {repr(item)}")

    return json.dumps(data, sort_keys=True, indent=1).encode("utf-8")


def loads(raw: typing.Any) -> typing.Any:
    """
    Deserialize JSON produced by ``dumps``. Objects with a ``terms`` list
    are expansions, all the others are graph terms.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")

    try:
        data = json.loads(raw)
    except json.JSONDecodeError as err:
        raise ParseError(f"line {err.lineno}", err.msg) from err

    if isinstance(data, dict) and "terms" in data:
        return expansion_from_dict(data)

    return graph_from_dict(data)


_DOT_STYLE = {
    SOLID: "solid",
    "S": "dashed",
    "S+": "dashed",
    "S-": "dashed",
    DIFFUSIVE: "bold",
    DOTTED: "dotted",
    GHOST: "invis",
}


def to_dot(graph: GraphTerm, name: str = "graph") -> str:
    """
    Graphviz text of a graph term.
    """
    lines = [f"digraph {name} {{"]

    for atom in graph.atoms:
        weights = ",".join(str(graph.weights[i]) for i in graph.weights_at(atom.id))
        label = atom.name if atom.external else str(atom.id)
        if weights:
            label += f"\\n{weights}"

        shape = "doublecircle" if atom.external else "circle"
        lines.append(f'  {atom.id} [label="{label}", shape={shape}];')

    for edge in graph.edges:
        color = "black"
        if edge.kind == SOLID:
            color = "blue" if edge.charge > 0 else "red"

        arrow = "normal" if edge.kind == SOLID else "none"
        lines.append(
            f'  {edge.a} -> {edge.b} [label="{edge}", '
            f'style={_DOT_STYLE[edge.kind]}, color={color}, '
            f'arrowhead={arrow}];')

    lines.append(f'  label="{graph.coeff}";')
    lines.append("}")

    return "\n".join(lines) + "\n"
