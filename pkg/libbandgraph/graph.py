"""
.. module:: graph
    :platform: Linux
    :synopsis: atomic graphs, their edges, weights and formal sums
"""
import typing
import logging
import dataclasses
from libbandgraph import BandGraphException
from libbandgraph.coefficient import Coefficient

LOGGER = logging.getLogger("bandgraph.graph")

# edge kinds
SOLID = "G"
WAVED = "S"
WAVED_PLUS = "S+"
WAVED_MINUS = "S-"
DIFFUSIVE = "diff"
DOTTED = "dot"
GHOST = "ghost"

WAVED_KINDS = (WAVED, WAVED_PLUS, WAVED_MINUS)
EDGE_KINDS = (SOLID,) + WAVED_KINDS + (DIFFUSIVE, DOTTED, GHOST)

# weight forms
REGULAR = "reg"
LIGHT = "light"
INVERSE = "inv"
TAIL = "tail"

WEIGHT_FORMS = (REGULAR, LIGHT, INVERSE, TAIL)
TRANSIENT_FORMS = (INVERSE, TAIL)

# external atom names
ATOM_A = "a"
ATOM_B1 = "b1"
ATOM_B2 = "b2"


class GraphError(BandGraphException):
    """
    Raised when a graph is malformed.
    """


@dataclasses.dataclass(frozen=True, order=True)
class Label:
    """
    A ``P_x`` or ``Q_x`` label of a solid edge or a weight.
    """
    kind: str
    atom: int

    def __post_init__(self) -> None:
        if self.kind not in ("P", "Q"):
            raise GraphError(f"label kind must be P or Q: {self.kind}")


@dataclasses.dataclass(frozen=True)
class Atom:
    """
    A vertex of an atomic graph. External atoms carry a name.
    """
    id: int
    external: bool = False
    name: str = None

    def __post_init__(self) -> None:
        if self.external and not self.name:
            raise GraphError(f"external atom {self.id} without name")

        if not self.external and self.name:
            raise GraphError(f"internal atom {self.id} with name")


@dataclasses.dataclass(frozen=True)
class Edge:
    """
    An edge of an atomic graph.

    - ``G``: resolvent entry ``G_ab`` (charge +1) or ``Gbar_ab``
      (charge -1), optionally labelled by ``P_x``/``Q_x`` and by a minor
      ``(x)``
    - ``S``, ``S+``, ``S-``: waved edges ``s_ab``, ``S+_ab``, ``S-_ab``
    - ``diff``: diffusive edge ``Theta_ab``, or the labelled chain
      ``Theta E Theta ... E Theta`` with the self-energy orders in ``chain``
    - ``dot``: ``1(a = b)``, or ``1(a != b)`` when ``crossed``
    - ``ghost``: the constant ``W^2 / L^2``
    """
    kind: str
    a: int
    b: int
    charge: int = 1
    crossed: bool = False
    chain: tuple = None
    pq: Label = None
    minor: int = None

    def __post_init__(self) -> None:
        if self.kind not in EDGE_KINDS:
            raise GraphError(f"Unknown edge kind '{self.kind}'")

        if self.charge not in (1, -1):
            raise GraphError(f"charge must be +1 or -1: {self.charge}")

        if self.kind != SOLID and (self.pq or self.minor is not None):
            raise GraphError(f"{self.kind} edge can't carry labels")

        if self.kind != SOLID and self.charge != 1:
            raise GraphError(f"{self.kind} edge can't carry a charge")

        if self.kind != DOTTED and self.crossed:
            raise GraphError(f"{self.kind} edge can't be crossed")

        if self.chain is not None:
            if self.kind != DIFFUSIVE:
                raise GraphError("only diffusive edges carry chains")

            for order in self.chain:
                if order < 4 or order % 2 != 0:
                    raise GraphError(
                        f"chain orders must be even and >= 4: {self.chain}")

    @property
    def ends(self) -> tuple:
        """
        The two endpoints.
        """
        return (self.a, self.b)

    @property
    def is_loop(self) -> bool:
        """
        True if both endpoints coincide.
        """
        return self.a == self.b

    @property
    def random(self) -> bool:
        """
        True for edges depending on H.
        """
        return self.kind == SOLID

    @property
    def chain_order(self) -> int:
        """
        Scaling order of a diffusive edge: 2 for plain edges and
        ``sum(orders) - 2 (l - 1)`` for labelled ones.
        """
        if self.kind != DIFFUSIVE:
            raise GraphError("chain order is defined for diffusive edges")

        if not self.chain:
            return 2

        return sum(self.chain) - 2 * (len(self.chain) - 1)

    def other(self, atom: int) -> int:
        """
        Endpoint opposite to ``atom``.
        """
        if atom == self.a:
            return self.b

        if atom == self.b:
            return self.a

        raise GraphError(f"atom {atom} is not an endpoint of {self}")

    def touches(self, atom: int) -> bool:
        """
        True if ``atom`` is an endpoint.
        """
        return atom in (self.a, self.b)

    def relabel(self, mapping: dict) -> "Edge":
        """
        Rename endpoints and labels.
        """
        pq = self.pq
        if pq is not None:
            pq = Label(pq.kind, mapping.get(pq.atom, pq.atom))

        minor = self.minor
        if minor is not None:
            minor = mapping.get(minor, minor)

        return dataclasses.replace(
            self,
            a=mapping.get(self.a, self.a),
            b=mapping.get(self.b, self.b),
            pq=pq,
            minor=minor)

    def conjugate(self) -> "Edge":
        """
        The complex conjugate edge.
        """
        if self.kind == SOLID:
            return dataclasses.replace(self, charge=-self.charge)

        if self.kind == WAVED_PLUS:
            return dataclasses.replace(self, kind=WAVED_MINUS)

        if self.kind == WAVED_MINUS:
            return dataclasses.replace(self, kind=WAVED_PLUS)

        return self

    def row_of(self, atom: int) -> bool:
        """
        True if ``atom`` plays the row role of the resolvent entry. For
        ``Gbar_ab = G(zbar)_ba`` the row is ``b``.
        """
        if self.kind != SOLID:
            raise GraphError("row role is defined for solid edges")

        if self.charge > 0:
            return atom == self.a

        return atom == self.b

    def __str__(self) -> str:
        if self.kind == SOLID:
            name = "G" if self.charge > 0 else "Gb"
            extra = ""
            if self.pq:
                extra += f"[{self.pq.kind}{self.pq.atom}]"
            if self.minor is not None:
                extra += f"({self.minor})"
            return f"{name}{extra}_{self.a},{self.b}"

        if self.kind == DOTTED:
            return f"{'x' if self.crossed else ''}dot_{self.a},{self.b}"

        if self.kind == DIFFUSIVE and self.chain:
            return f"diff{list(self.chain)}_{self.a},{self.b}"

        return f"{self.kind}_{self.a},{self.b}"


@dataclasses.dataclass(frozen=True)
class Weight:
    """
    A diagonal factor at ``atom``: ``G_xx`` (regular), ``G_xx - m``
    (light), ``G_xx^-1`` (inverse) or the Taylor tail of ``G_xx^-1`` of
    order ``order`` (tail). Charge -1 means the conjugate.
    """
    atom: int
    charge: int = 1
    form: str = REGULAR
    pq: Label = None
    minor: int = None
    order: int = None

    def __post_init__(self) -> None:
        if self.form not in WEIGHT_FORMS:
            raise GraphError(f"Unknown weight form '{self.form}'")

        if self.charge not in (1, -1):
            raise GraphError(f"charge must be +1 or -1: {self.charge}")

        if self.form == TAIL and self.order is None:
            raise GraphError("tail weight without order")

    def relabel(self, mapping: dict) -> "Weight":
        """
        Rename atom and labels.
        """
        pq = self.pq
        if pq is not None:
            pq = Label(pq.kind, mapping.get(pq.atom, pq.atom))

        minor = self.minor
        if minor is not None:
            minor = mapping.get(minor, minor)

        return dataclasses.replace(
            self,
            atom=mapping.get(self.atom, self.atom),
            pq=pq,
            minor=minor)

    def conjugate(self) -> "Weight":
        """
        The complex conjugate weight.
        """
        return dataclasses.replace(self, charge=-self.charge)

    def __str__(self) -> str:
        name = "G" if self.charge > 0 else "Gb"
        extra = ""
        if self.pq:
            extra += f"[{self.pq.kind}{self.pq.atom}]"
        if self.minor is not None:
            extra += f"({self.minor})"
        return f"{self.form}:{name}{extra}_{self.atom}"


class GraphTerm:
    """
    A coefficient times an atomic graph. The value of the graph is the sum
    over the internal atoms of the product of all edges and weights, with
    the external atoms fixed.
    """

    def __init__(
            self,
            atoms: typing.Iterable,
            edges: typing.Iterable = (),
            weights: typing.Iterable = (),
            coeff: Coefficient = None) -> None:
        self._atoms = tuple(sorted(atoms, key=lambda atom: atom.id))
        self._edges = tuple(edges)
        self._weights = tuple(weights)
        self._coeff = Coefficient.coerce(1 if coeff is None else coeff)
        self._index = {atom.id: atom for atom in self._atoms}

        self._check()

    def _check(self) -> None:
        if len(self._index) != len(self._atoms):
            raise GraphError("atom ids are not unique")

        names = [atom.name for atom in self._atoms if atom.external]
        if len(set(names)) != len(names):
            raise GraphError(f"external names are not unique: {names}")

        for edge in self._edges:
            for end in edge.ends:
                if end not in self._index:
                    raise GraphError(f"edge {edge} ends on unknown atom {end}")

            for label_atom in self._label_atoms(edge):
                if label_atom not in self._index:
                    raise GraphError(
                        f"edge {edge} labelled by unknown atom {label_atom}")

        for weight in self._weights:
            if weight.atom not in self._index:
                raise GraphError(f"weight {weight} on unknown atom")

            for label_atom in self._label_atoms(weight):
                if label_atom not in self._index:
                    raise GraphError(
                        f"weight {weight} labelled by unknown atom")

    @staticmethod
    def _label_atoms(item: typing.Any) -> list:
        atoms = []
        if item.pq is not None:
            atoms.append(item.pq.atom)

        if item.minor is not None:
            atoms.append(item.minor)

        return atoms

    @property
    def atoms(self) -> tuple:
        """
        Atoms sorted by id.
        """
        return self._atoms

    @property
    def edges(self) -> tuple:
        """
        Edges, with multiplicity.
        """
        return self._edges

    @property
    def weights(self) -> tuple:
        """
        Weights, with multiplicity.
        """
        return self._weights

    @property
    def coeff(self) -> Coefficient:
        """
        Coefficient.
        """
        return self._coeff

    def atom(self, atom_id: int) -> Atom:
        """
        Atom with the given id.
        """
        try:
            return self._index[atom_id]
        except KeyError as err:
            raise GraphError(f"unknown atom {atom_id}") from err

    def has_atom(self, atom_id: int) -> bool:
        """
        True if the graph has an atom with the given id.
        """
        return atom_id in self._index

    def is_external(self, atom_id: int) -> bool:
        """
        True if the atom is external.
        """
        return self.atom(atom_id).external

    @property
    def externals(self) -> list:
        """
        Ids of the external atoms.
        """
        return [atom.id for atom in self._atoms if atom.external]

    @property
    def internals(self) -> list:
        """
        Ids of the internal atoms.
        """
        return [atom.id for atom in self._atoms if not atom.external]

    def by_name(self, name: str) -> int:
        """
        Id of the external atom called ``name``, or None.
        """
        for atom in self._atoms:
            if atom.external and atom.name == name:
                return atom.id

        return None

    def next_id(self) -> int:
        """
        A fresh atom id.
        """
        if not self._atoms:
            return 0

        return self._atoms[-1].id + 1

    def edges_of(self, kind: typing.Any) -> list:
        """
        Indexes of the edges of one kind, or of a tuple of kinds.
        """
        kinds = (kind,) if isinstance(kind, str) else tuple(kind)
        return [i for i, edge in enumerate(self._edges) if edge.kind in kinds]

    def solid(self) -> list:
        """
        Indexes of the solid edges.
        """
        return self.edges_of(SOLID)

    def incident(self, atom_id: int, kind: typing.Any = None) -> list:
        """
        Indexes of the edges touching ``atom_id``, optionally of a kind.
        """
        kinds = None
        if kind is not None:
            kinds = (kind,) if isinstance(kind, str) else tuple(kind)

        found = []
        for i, edge in enumerate(self._edges):
            if not edge.touches(atom_id):
                continue

            if kinds and edge.kind not in kinds:
                continue

            found.append(i)

        return found

    def weights_at(self, atom_id: int) -> list:
        """
        Indexes of the weights at ``atom_id``.
        """
        return [i for i, w in enumerate(self._weights) if w.atom == atom_id]

    def dot_between(self, a: int, b: int) -> list:
        """
        Indexes of dotted edges between ``a`` and ``b``.
        """
        return [
            i for i, edge in enumerate(self._edges)
            if edge.kind == DOTTED and {edge.a, edge.b} == {a, b}
        ]

    def labels(self) -> set:
        """
        All P/Q labels in the graph.
        """
        found = set()
        for item in self._edges + self._weights:
            if getattr(item, "pq", None) is not None:
                found.add(item.pq)

        return found

    def is_labelled(self) -> bool:
        """
        True if any factor carries a P/Q label.
        """
        return bool(self.labels())

    def has_transients(self) -> bool:
        """
        True if the graph has minor labels, inverse or tail weights.
        """
        for edge in self._edges:
            if edge.minor is not None:
                return True

        for weight in self._weights:
            if weight.minor is not None or weight.form in TRANSIENT_FORMS:
                return True

        return False

    def replace(self, **kwargs: dict) -> "GraphTerm":
        """
        Return a copy with some fields replaced.
        """
        return GraphTerm(
            kwargs.get("atoms", self._atoms),
            kwargs.get("edges", self._edges),
            kwargs.get("weights", self._weights),
            kwargs.get("coeff", self._coeff))

    def scaled(self, factor: typing.Any) -> "GraphTerm":
        """
        Multiply the coefficient.
        """
        return self.replace(coeff=self._coeff * factor)

    def with_items(
            self,
            edges: typing.Iterable = (),
            weights: typing.Iterable = (),
            atoms: typing.Iterable = ()) -> "GraphTerm":
        """
        Copy with extra atoms, edges and weights.
        """
        return GraphTerm(
            self._atoms + tuple(atoms),
            self._edges + tuple(edges),
            self._weights + tuple(weights),
            self._coeff)

    def without(
            self,
            edges: typing.Iterable = (),
            weights: typing.Iterable = ()) -> "GraphTerm":
        """
        Copy without the edges and weights at the given indexes.
        """
        edges = set(edges)
        weights = set(weights)

        return GraphTerm(
            self._atoms,
            [e for i, e in enumerate(self._edges) if i not in edges],
            [w for i, w in enumerate(self._weights) if i not in weights],
            self._coeff)

    def relabel(self, mapping: dict) -> "GraphTerm":
        """
        Rename atom ids. Atoms mapped onto the same id are merged, keeping
        the external one.
        """
        atoms = {}
        for atom in self._atoms:
            new_id = mapping.get(atom.id, atom.id)
            current = atoms.get(new_id, None)
            if current is None or atom.external:
                atoms[new_id] = Atom(new_id, atom.external, atom.name)

        return GraphTerm(
            atoms.values(),
            [edge.relabel(mapping) for edge in self._edges],
            [weight.relabel(mapping) for weight in self._weights],
            self._coeff)

    def drop_atoms(self, atom_ids: typing.Iterable) -> "GraphTerm":
        """
        Remove isolated atoms.
        """
        atom_ids = set(atom_ids)
        for edge in self._edges:
            if atom_ids & set(edge.ends):
                raise GraphError("can't drop an atom with edges")

        return GraphTerm(
            [atom for atom in self._atoms if atom.id not in atom_ids],
            self._edges,
            self._weights,
            self._coeff)

    def conjugate(self) -> "GraphTerm":
        """
        The complex conjugate graph.
        """
        return GraphTerm(
            self._atoms,
            [edge.conjugate() for edge in self._edges],
            [weight.conjugate() for weight in self._weights],
            self._coeff.conjugate())

    def strip_labels(self, kind: str = None) -> "GraphTerm":
        """
        Remove P/Q labels, or only the labels of one kind.
        """
        def _strip(item: typing.Any) -> typing.Any:
            if item.pq is None:
                return item

            if kind and item.pq.kind != kind:
                return item

            return dataclasses.replace(item, pq=None)

        return GraphTerm(
            self._atoms,
            [_strip(edge) for edge in self._edges],
            [_strip(weight) for weight in self._weights],
            self._coeff)

    def label_random(self, label: Label) -> "GraphTerm":
        """
        Put ``label`` on every solid edge and weight.
        """
        return GraphTerm(
            self._atoms,
            [
                dataclasses.replace(edge, pq=label)
                if edge.kind == SOLID else edge
                for edge in self._edges
            ],
            [dataclasses.replace(w, pq=label) for w in self._weights],
            self._coeff)

    def __str__(self) -> str:
        items = [str(e) for e in self._edges] + [str(w) for w in self._weights]
        return f"({self._coeff}) " + " ".join(items)

    def __repr__(self) -> str:
        return \
            f"GraphTerm(atoms: {len(self._atoms)}, " \
            f"edges: {len(self._edges)}, " \
            f"weights: {len(self._weights)}, " \
            f"coeff: {self._coeff})"


class Expansion:
    """
    Formal sum of graph terms. The value of an expansion is the sum of the
    values of its terms.
    """

    def __init__(self, terms: typing.Iterable = ()) -> None:
        self._terms = [
            term for term in terms if not term.coeff.is_zero()
        ]

    @property
    def terms(self) -> list:
        """
        Graph terms.
        """
        return list(self._terms)

    def __iter__(self) -> typing.Iterator:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __getitem__(self, index: int) -> GraphTerm:
        return self._terms[index]

    def __add__(self, other: "Expansion") -> "Expansion":
        return Expansion(self._terms + list(other))

    def scaled(self, factor: typing.Any) -> "Expansion":
        """
        Multiply every coefficient.
        """
        return Expansion(term.scaled(factor) for term in self._terms)

    def conjugate(self) -> "Expansion":
        """
        Conjugate every term.
        """
        return Expansion(term.conjugate() for term in self._terms)

    def __repr__(self) -> str:
        return f"Expansion(terms: {len(self._terms)})"


class GraphBuilder:
    """
    Helper used to assemble graphs by hand.
    """

    def __init__(self) -> None:
        self._atoms = []
        self._edges = []
        self._weights = []
        self._next = 0

    def external(self, name: str) -> int:
        """
        Add an external atom.
        """
        atom_id = self._next
        self._next += 1
        self._atoms.append(Atom(atom_id, True, name))
        return atom_id

    def internal(self) -> int:
        """
        Add an internal atom.
        """
        atom_id = self._next
        self._next += 1
        self._atoms.append(Atom(atom_id))
        return atom_id

    def G(
            self,
            a: int,
            b: int,
            charge: int = 1,
            pq: Label = None,
            minor: int = None) -> "GraphBuilder":
        # pylint: disable=invalid-name
        """
        Add a solid edge.
        """
        self._edges.append(Edge(SOLID, a, b, charge=charge, pq=pq,
                                minor=minor))
        return self

    def waved(self, a: int, b: int, kind: str = WAVED) -> "GraphBuilder":
        """
        Add a waved edge.
        """
        self._edges.append(Edge(kind, a, b))
        return self

    def diffusive(self, a: int, b: int, chain: tuple = None) -> "GraphBuilder":
        """
        Add a diffusive edge.
        """
        self._edges.append(Edge(DIFFUSIVE, a, b, chain=chain))
        return self

    def dot(self, a: int, b: int, crossed: bool = False) -> "GraphBuilder":
        """
        Add a dotted edge.
        """
        self._edges.append(Edge(DOTTED, a, b, crossed=crossed))
        return self

    def ghost(self, a: int, b: int) -> "GraphBuilder":
        """
        Add a ghost edge.
        """
        self._edges.append(Edge(GHOST, a, b))
        return self

    def weight(
            self,
            atom: int,
            charge: int = 1,
            form: str = REGULAR,
            pq: Label = None) -> "GraphBuilder":
        """
        Add a weight.
        """
        self._weights.append(Weight(atom, charge, form, pq=pq))
        return self

    def build(self, coeff: typing.Any = 1) -> GraphTerm:
        """
        Create the graph.
        """
        return GraphTerm(self._atoms, self._edges, self._weights, coeff)
