"""
.. module:: evaluate
    :platform: Linux
    :synopsis: numeric values of graphs as tensor network contractions
"""
import math
import logging
import numpy as np
from libbandgraph import BandGraphException
from libbandgraph import CapacityError
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import SpectralPoint
from libbandgraph.kernels import build_variance_profile
from libbandgraph.kernels import kernel_theta
from libbandgraph.kernels import kernel_s_pm
from libbandgraph.kernels import labelled_diffusive_chain
from libbandgraph.ensemble import ResolventSample
from libbandgraph.ensemble import EstimatorResult
from libbandgraph.ensemble import resolvent
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import Expansion
from libbandgraph.graph import SOLID
from libbandgraph.graph import WAVED
from libbandgraph.graph import WAVED_PLUS
from libbandgraph.graph import WAVED_MINUS
from libbandgraph.graph import DIFFUSIVE
from libbandgraph.graph import DOTTED
from libbandgraph.graph import GHOST
from libbandgraph.graph import REGULAR
from libbandgraph.graph import LIGHT
from libbandgraph.graph import INVERSE
from libbandgraph.graph import TAIL

LOGGER = logging.getLogger("bandgraph.evaluate")

PQ_EXPECTATION = "expectation"
PQ_RESAMPLE = "resample"
PQ_FORBID = "forbid"

PQ_MODES = (PQ_EXPECTATION, PQ_RESAMPLE, PQ_FORBID)

# largest number of free indexes of an intermediate tensor
MAX_RANK = 3


class EvaluationError(BandGraphException):
    """
    Raised when a graph can't be evaluated.
    """


class LabelError(EvaluationError):
    """
    Raised when P/Q labels can't be evaluated in the current mode.
    """


class ContractionBudgetError(CapacityError):
    """
    Raised when an intermediate tensor exceeds the contraction budget.
    """


class EvalContext:
    """
    Everything needed to evaluate graphs: geometry, spectral point,
    resolvent sample, values of the external atoms and evaluated
    self-energies. Kernels are built lazily and cached.
    """

    def __init__(
            self,
            config: LatticeConfig,
            point: SpectralPoint,
            **kwargs: dict) -> None:
        """
        :param config: torus geometry
        :type config: LatticeConfig
        :param point: spectral point
        :type point: SpectralPoint
        :param resolvent: resolvent sample. Required by random graphs
        :type resolvent: ResolventSample
        :param pq_mode: one of ``PQ_MODES``. Default is expectation
        :type pq_mode: str
        :param externals: site index of every external atom name
        :type externals: dict
        :param energies: self-energies by order, used by labelled
            diffusive edges
        :type energies: dict
        :param inner_samples: resamplings of a row used to estimate P_x
        :type inner_samples: int
        :param max_rank: largest number of free indexes of an
            intermediate tensor
        :type max_rank: int
        """
        self._config = config
        self._point = point
        self._resolvent = kwargs.get("resolvent", None)
        self._pq_mode = kwargs.get("pq_mode", PQ_EXPECTATION)
        self._externals = dict(kwargs.get("externals", {}))
        self._energies = dict(kwargs.get("energies", {}))
        self._inner_samples = kwargs.get("inner_samples", 8)
        self._max_rank = kwargs.get("max_rank", MAX_RANK)
        self._kernels = {}

        if self._pq_mode not in PQ_MODES:
            raise EvaluationError(f"Unknown pq_mode '{self._pq_mode}'")

        for name, site in self._externals.items():
            if not 0 <= int(site) < config.N:
                raise EvaluationError(
                    f"external '{name}' outside the lattice: {site}")

    @property
    def config(self) -> LatticeConfig:
        """
        Torus geometry.
        """
        return self._config

    @property
    def point(self) -> SpectralPoint:
        """
        Spectral point.
        """
        return self._point

    @property
    def resolvent(self) -> ResolventSample:
        """
        Resolvent sample, or None.
        """
        return self._resolvent

    @property
    def pq_mode(self) -> str:
        """
        How P/Q labels are evaluated.
        """
        return self._pq_mode

    @property
    def externals(self) -> dict:
        """
        Site of every external atom name.
        """
        return dict(self._externals)

    @property
    def inner_samples(self) -> int:
        """
        Row resamplings used for P_x estimates.
        """
        return self._inner_samples

    @property
    def max_rank(self) -> int:
        """
        Contraction budget.
        """
        return self._max_rank

    def replace(self, **kwargs: dict) -> "EvalContext":
        """
        Copy of the context with some fields replaced. Kernels are shared.
        """
        values = {
            "resolvent": self._resolvent,
            "pq_mode": self._pq_mode,
            "externals": self._externals,
            "energies": self._energies,
            "inner_samples": self._inner_samples,
            "max_rank": self._max_rank,
        }
        values.update(kwargs)

        ctx = EvalContext(self._config, self._point, **values)
        ctx._kernels = self._kernels
        return ctx

    def site(self, name: str) -> int:
        """
        Site of an external atom.
        """
        if name not in self._externals:
            raise EvaluationError(f"external atom '{name}' has no value")

        return int(self._externals[name])

    def kernel(self, kind: str, chain: tuple = None) -> np.ndarray:
        """
        Dense matrix of a deterministic edge kind.
        """
        key = (kind, chain)
        if key in self._kernels:
            return self._kernels[key]

        if kind == WAVED:
            matrix = build_variance_profile(self._config).matrix()
        elif kind in (WAVED_PLUS, WAVED_MINUS):
            plus, minus = kernel_s_pm(self._config, self._point)
            matrix = plus.matrix() if kind == WAVED_PLUS else minus.matrix()
        elif kind == DIFFUSIVE and not chain:
            matrix = kernel_theta(self._config, self._point).matrix()
        elif kind == DIFFUSIVE:
            energies = []
            for order in chain:
                if order not in self._energies:
                    raise EvaluationError(
                        f"self-energy of order {order} is not available")
                energies.append(self._energies[order])

            matrix = labelled_diffusive_chain(
                self._config, self._point, energies).matrix()
        else:
            raise EvaluationError(f"{kind} is not a kernel")

        matrix = np.asarray(matrix, dtype=complex)
        self._kernels[key] = matrix

        return matrix


class _Factor:
    """
    A tensor over a tuple of atom indexes.
    """

    def __init__(self, atoms: tuple, values: np.ndarray) -> None:
        self.atoms = atoms
        self.values = values


def _weight_values(weight: object, diag: np.ndarray, m: complex) -> np.ndarray:
    centre = m if weight.charge > 0 else m.conjugate()

    if weight.form == REGULAR:
        return diag

    if weight.form == LIGHT:
        return diag - centre

    if weight.form == INVERSE:
        return 1.0 / diag

    if weight.form == TAIL:
        ratio = -(diag - centre) / centre
        partial = np.zeros_like(diag)
        power = np.ones_like(diag)
        for _ in range(weight.order):
            partial = partial + power / centre
            power = power * ratio

        return 1.0 / diag - partial

    raise EvaluationError(f"Unknown weight form '{weight.form}'")


class _Sources:
    """
    Resolvent matrices used by the random factors of one evaluation.
    """

    def __init__(self, ctx: EvalContext, res: ResolventSample) -> None:
        self._ctx = ctx
        self._res = res
        self._minors = {}

    def matrix(self, charge: int, minor: int) -> np.ndarray:
        """
        ``G`` or ``Gbar``, optionally of the minor without row ``minor``.
        """
        if self._res is None:
            raise EvaluationError("random graph evaluated without resolvent")

        if minor is None:
            return self._res.charged(charge)

        if minor not in self._minors:
            size = self._ctx.config.N
            keep = [i for i in range(size) if i != minor]
            shifted = self._res.sample.H[np.ix_(keep, keep)] \
                - self._ctx.point.z * np.eye(size - 1)

            full = np.zeros((size, size), dtype=complex)
            full[np.ix_(keep, keep)] = np.linalg.inv(shifted)
            self._minors[minor] = full

        values = self._minors[minor]
        return values if charge > 0 else values.conj()


def _pinned(graph: GraphTerm, ctx: EvalContext, fixed: dict) -> dict:
    pins = dict(fixed)
    for atom in graph.atoms:
        if atom.external:
            pins[atom.id] = ctx.site(atom.name)

    return pins


def _factors(
        graph: GraphTerm,
        ctx: EvalContext,
        pins: dict,
        random_sources: dict) -> tuple:
    """
    Tensor factors of a graph, with pinned atoms already sliced. Random
    factors take their matrices from ``random_sources[label]``, where the
    key is the P/Q label of the factor or None.
    """
    m = ctx.point.m
    size = ctx.config.N
    scalar = complex(graph.coeff.evaluate(m))
    factors = []

    def _minor_site(item: object) -> int:
        if item.minor is None:
            return None

        if item.minor not in pins:
            raise EvaluationError(
                f"minor label on free atom {item.minor} is not supported")

        return pins[item.minor]

    def _add(atoms: tuple, values: np.ndarray) -> None:
        nonlocal scalar

        index = [slice(None)] * len(atoms)
        free = []
        for axis, atom in enumerate(atoms):
            if atom in pins:
                index[axis] = pins[atom]
            else:
                free.append(atom)

        values = values[tuple(index)]

        # loops leave the diagonal
        if len(free) == 2 and free[0] == free[1]:
            values = np.diagonal(values)
            free = free[:1]

        if not free:
            scalar *= complex(values)
        else:
            factors.append(_Factor(tuple(free), values))

    for edge in graph.edges:
        if edge.kind == SOLID:
            source = random_sources[edge.pq]
            _add((edge.a, edge.b),
                 source.matrix(edge.charge, _minor_site(edge)))
        elif edge.kind == DOTTED:
            identity = np.eye(size, dtype=complex)
            _add((edge.a, edge.b),
                 1.0 - identity if edge.crossed else identity)
        elif edge.kind == GHOST:
            # W^2/L^2 cancelled by the L^2/W^2 added with every ghost
            continue
        else:
            _add((edge.a, edge.b), ctx.kernel(edge.kind, edge.chain))

    for weight in graph.weights:
        source = random_sources[weight.pq]
        diag = np.diagonal(
            source.matrix(weight.charge, _minor_site(weight))).copy()
        _add((weight.atom,), _weight_values(weight, diag, m))

    return scalar, factors


def _letters(count: int) -> str:
    return "".join(chr(ord("a") + i) for i in range(count))


def contract(
        factors: list,
        atoms: list,
        size: int,
        max_rank: int = MAX_RANK) -> complex:
    """
    Sum the product of ``factors`` over the ``atoms`` indexes, eliminating
    one atom at a time. The next atom is the one giving the smallest
    intermediate tensor, ties broken by id. An atom without factors sums
    to ``size``.
    """
    factors = list(factors)
    remaining = sorted(atoms)
    scalar = 1.0 + 0j

    while remaining:
        best = None
        for atom in remaining:
            touching = [f for f in factors if atom in f.atoms]
            union = set()
            for factor in touching:
                union.update(factor.atoms)
            union.discard(atom)

            key = (len(union), atom)
            if best is None or key < best[0]:
                best = (key, atom, touching, sorted(union))

        (rank, _), atom, touching, union = best
        if rank > max_rank:
            raise ContractionBudgetError(
                f"eliminating atom {atom} needs a rank {rank} tensor "
                f"(budget {max_rank})")

        remaining.remove(atom)

        if not touching:
            scalar *= size
            continue

        letters = {a: l for a, l in zip(union + [atom], _letters(rank + 1))}
        operands = []
        specs = []
        for factor in touching:
            specs.append("".join(letters[a] for a in factor.atoms))
            operands.append(factor.values)

        out = "".join(letters[a] for a in union)
        values = np.einsum(",".join(specs) + "->" + out, *operands)

        factors = [f for f in factors if atom not in f.atoms]
        if union:
            factors.append(_Factor(tuple(union), values))
        else:
            scalar *= complex(values)

        LOGGER.debug("Eliminated atom %d (rank %d)", atom, rank)

    if factors:
        raise EvaluationError(
            f"factors over {[f.atoms for f in factors]} left over")

    return scalar


def _network(
        graph: GraphTerm,
        ctx: EvalContext,
        fixed: dict,
        random_sources: dict) -> complex:
    pins = _pinned(graph, ctx, fixed)
    scalar, factors = _factors(graph, ctx, pins, random_sources)

    if scalar == 0:
        return 0j

    free = [atom.id for atom in graph.atoms if atom.id not in pins]

    return scalar * contract(factors, free, ctx.config.N, ctx.max_rank)


def _single_label(graph: GraphTerm) -> object:
    labels = graph.labels()
    if len(labels) > 1:
        raise LabelError(f"graph with several labels: {sorted(labels)}")

    if not labels:
        return None

    return labels.pop()


def _all_labelled(graph: GraphTerm) -> bool:
    items = [graph.edges[i] for i in graph.solid()] + list(graph.weights)
    return all(item.pq is not None for item in items)


def _resampled_value(
        graph: GraphTerm,
        ctx: EvalContext,
        label: object) -> complex:
    """
    Value with the labelled factors replaced by their partial expectation
    over row ``label.atom``, estimated by resampling that row.
    """
    res = ctx.resolvent
    if res is None:
        raise EvaluationError("resample mode needs a resolvent")

    if ctx.inner_samples < 2:
        raise LabelError("resample mode needs at least two inner samples")

    base = _Sources(ctx, res)

    if graph.is_external(label.atom):
        rows = [ctx.site(graph.atom(label.atom).name)]
    else:
        rows = range(ctx.config.N)

    total = 0j
    for row in rows:
        fixed = {label.atom: row}

        inner = 0j
        for draw in range(ctx.inner_samples):
            sample = res.sample.resampled(row, draw)
            sources = {
                None: base,
                label: _Sources(ctx, resolvent(sample, res.point)),
            }
            inner += _network(graph, ctx, fixed, sources)

        inner /= ctx.inner_samples

        if label.kind == "P":
            total += inner
        else:
            whole = _network(graph, ctx, fixed, {None: base, label: base})
            total += whole - inner

    return total


def evaluate(graph: GraphTerm, ctx: EvalContext) -> complex:
    """
    Value of a graph: the coefficient at ``m`` times the sum over the
    internal atoms of the product of all edges and weights, external atoms
    fixed by the context.

    P/Q labels follow ``ctx.pq_mode``:

    - expectation: a graph whose random factors all carry ``Q_x`` is zero,
      ``P_x`` labels on all random factors are dropped
    - resample: ``P_x`` is estimated by resampling row ``x``
    - forbid: labels raise ``LabelError``
    """
    label = _single_label(graph)

    if label is None:
        return _network(graph, ctx, {}, {None: _Sources(ctx, ctx.resolvent)})

    if ctx.pq_mode == PQ_FORBID:
        raise LabelError(f"graph carries label {label} in forbid mode")

    if ctx.pq_mode == PQ_EXPECTATION and _all_labelled(graph):
        if label.kind == "Q":
            return 0j

        stripped = graph.strip_labels()
        return _network(
            stripped, ctx, {}, {None: _Sources(ctx, ctx.resolvent)})

    return _resampled_value(graph, ctx, label)


def _fsum(values: list) -> complex:
    return complex(
        math.fsum(v.real for v in values),
        math.fsum(v.imag for v in values))


def evaluate_expansion_sample(expansion: Expansion, ctx: EvalContext) -> complex:
    """
    Value of an expansion on the resolvent of ``ctx``, summed with
    compensated summation so the result doesn't depend on term order.
    """
    return _fsum([evaluate(term, ctx) for term in expansion])


def evaluate_expansion(
        expansion: Expansion,
        ctx: EvalContext,
        draw: object = None,
        n_samples: int = 0) -> EstimatorResult:
    """
    Evaluate an expansion. Without ``draw`` the resolvent of ``ctx`` is
    used and the standard error is zero. Otherwise ``draw(i)`` returns the
    resolvent of sample ``i`` and the Monte Carlo estimate over
    ``n_samples`` samples is returned.
    """
    if draw is None:
        value = evaluate_expansion_sample(expansion, ctx)
        return EstimatorResult(value, 0.0, 1)

    values = []
    for index in range(n_samples):
        local = ctx.replace(resolvent=draw(index))
        values.append(evaluate_expansion_sample(expansion, local))

    return EstimatorResult.from_values(
        np.array(values), seed=getattr(draw, "seed", None))
