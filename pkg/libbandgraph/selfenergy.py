"""
.. module:: selfenergy
    :platform: Linux
    :synopsis: evaluation of self-energy graphs into kernels and checks of
        their symmetry, sum zero and decay properties
"""
import logging
import numpy as np
from libbandgraph.graph import Expansion
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import SpectralPoint
from libbandgraph.kernels import KernelTable
from libbandgraph.kernels import SelfEnergyKernel
from libbandgraph.kernels import kernel_B
from libbandgraph.evaluate import EvalContext
from libbandgraph.evaluate import evaluate_expansion_sample
from libbandgraph.results import check_le
from libbandgraph.texpansion import TEquation
from libbandgraph.texpansion import ExpansionError
from libbandgraph.texpansion import ENERGY_X
from libbandgraph.texpansion import ENERGY_Y

LOGGER = logging.getLogger("bandgraph.selfenergy")

# exact symmetry tolerance
SYMMETRY_TOLERANCE = 1e-12

# relative window of the eta trend of the row sums
TREND_WINDOW = (0.6, 1.4)

# displacements used to check translation invariance
TRANSLATION_SAMPLES = 4


def _row(expansion: Expansion, ctx: EvalContext, origin: int) -> np.ndarray:
    config = ctx.config
    row = np.zeros(config.N, dtype=complex)
    for index in range(config.N):
        local = ctx.replace(externals={ENERGY_X: origin, ENERGY_Y: index})
        row[index] = evaluate_expansion_sample(expansion, local)

    return row


def _profile(config: LatticeConfig, row: np.ndarray) -> np.ndarray:
    """
    Turn ``E(0, y)`` into the profile ``K(a) = E(0, -a)``.
    """
    values = row.reshape(config.shape)
    axes = tuple(range(config.d))
    return np.roll(np.flip(values, axis=axes), 1, axis=axes)


def evaluate_self_energy(
        expansion: Expansion,
        order: int,
        config: LatticeConfig,
        point: SpectralPoint,
        energies: dict = None) -> SelfEnergyKernel:
    """
    Evaluate the deterministic graphs of a self-energy between the
    external atoms ``x = 0`` and every ``y``. ``energies`` holds the
    evaluated lower order self-energies used by labelled diffusive edges.
    """
    if any(term.solid() or term.weights for term in expansion):
        raise ExpansionError("self-energy graphs must be deterministic")

    ctx = EvalContext(config, point, energies=energies or {})
    row = _row(expansion, ctx, 0)

    table = KernelTable(
        config,
        _profile(config, row),
        "self-energy",
        point=point,
        meta={"order": order})

    LOGGER.info("Evaluated self-energy of order %d at %s", order, point)

    return SelfEnergyKernel(order, expansion, table)


def translation_residual(
        kernel: SelfEnergyKernel,
        point: SpectralPoint,
        energies: dict = None) -> float:
    """
    ``max |E(x0, x0 + y) - E(0, y)|`` over a few displacements ``y`` and a
    base site ``x0`` in the middle of the torus.
    """
    config = kernel.table.config
    ctx = EvalContext(config, point, energies=energies or {})

    origin = config.N // 2
    base = config.site(origin)
    residual = 0.0

    step = max(config.N // TRANSLATION_SAMPLES, 1)
    for index in range(0, config.N, step):
        shift = config.site(index)
        target = config.index(
            (base + shift + config.L // 2) % config.L - config.L // 2)
        local = ctx.replace(externals={ENERGY_X: origin, ENERGY_Y: target})
        value = evaluate_expansion_sample(kernel.expansion, local)
        residual = max(residual, abs(value - kernel.table.entry(0, shift)))

    return residual


class SelfEnergyReport:
    """
    Evaluated self-energy of one order at several spectral points, and
    the outcome of its checks.
    """

    def __init__(self, order: int, kernels: dict, checks: list) -> None:
        """
        :param order: order of the self-energy
        :type order: int
        :param kernels: evaluated kernels by eta
        :type kernels: dict
        :param checks: outcome of the checks
        :type checks: list(CheckResult)
        """
        self._order = order
        self._kernels = dict(sorted(kernels.items()))
        self._checks = list(checks)

    @property
    def order(self) -> int:
        """
        Order of the self-energy.
        """
        return self._order

    @property
    def kernels(self) -> dict:
        """
        Evaluated kernels by eta.
        """
        return dict(self._kernels)

    @property
    def checks(self) -> list:
        """
        Checks outcome.
        """
        return list(self._checks)

    def rows(self) -> list:
        """
        Row sums of the kernels, by eta.
        """
        return [
            {
                "order": self._order,
                "eta": eta,
                "row_sum_re": kernel.table.row_sum.real,
                "row_sum_im": kernel.table.row_sum.imag,
                "max_abs": float(np.max(np.abs(kernel.table.values))),
                "evenness": kernel.table.evenness(),
            }
            for eta, kernel in self._kernels.items()
        ]

    def __repr__(self) -> str:
        return \
            f"SelfEnergyReport(order: {self._order}, " \
            f"points: {len(self._kernels)}, checks: {len(self._checks)})"


def _scale(config: LatticeConfig, order: int) -> float:
    return float(config.W) ** (-(order - 2) * config.d / 2)


def _trend_checks(order: int, kernels: dict) -> list:
    checks = []
    etas = sorted(kernels)
    for low, high in zip(etas, etas[1:]):
        name = f"E{order} eta trend {low:g}/{high:g}"
        first = abs(kernels[low].table.row_sum)
        second = abs(kernels[high].table.row_sum)

        if second == 0.0:
            checks.append(check_le(
                name, first, 0.0, hard=False, details="zero kernel"))
            continue

        expected = low / high
        ratio = first / second
        checks.append(check_le(
            name,
            abs(ratio - expected),
            (TREND_WINDOW[1] - 1.0) * expected,
            hard=False,
            details=f"ratio {ratio:.17g}, expected {expected:.17g}"))

    return checks


def extract_self_energy(
        teq: TEquation,
        config: LatticeConfig,
        points: list,
        order: int = None,
        tau: float = 0.5) -> SelfEnergyReport:
    """
    Evaluate the self-energy of order ``order`` (the order of ``teq`` by
    default) at every spectral point and check it:

    - symmetry ``E(0, a) = E(0, -a)``, exact
    - translation invariance, exact
    - sum zero ``|sum_x E(0, x)| <= eta W^(-(l - 2) d / 2 + tau)``
    - linear trend in eta of the row sums
    - pointwise decay ``|E(0, x)| <= W^(-(l - 2) d / 2 + tau) B_0x``
    """
    order = order or teq.order
    energies = teq.energies
    if order not in energies:
        raise ExpansionError(f"T-equation has no self-energy of order {order}")

    bound_b = kernel_B(config)
    scale = _scale(config, order)

    kernels = {}
    checks = []

    for point in points:
        evaluated = {}
        for current in sorted(k for k in energies if k <= order):
            evaluated[current] = evaluate_self_energy(
                energies[current], current, config, point, evaluated)

        kernel = evaluated[order]
        kernels[point.eta] = kernel
        table = kernel.table
        tag = f"E{order} eta={point.eta:g}"

        checks.append(check_le(
            f"{tag} symmetry",
            table.evenness(),
            SYMMETRY_TOLERANCE))

        if len(kernel.expansion) > 0:
            checks.append(check_le(
                f"{tag} translation",
                translation_residual(kernel, point, evaluated),
                SYMMETRY_TOLERANCE))

        checks.append(check_le(
            f"{tag} sum zero",
            abs(table.row_sum),
            point.eta * scale * float(config.W) ** tau,
            hard=False))

        ratio = np.abs(table.values) / (scale * np.abs(bound_b.values))
        checks.append(check_le(
            f"{tag} pointwise",
            float(np.max(ratio)),
            float(config.W) ** tau,
            hard=False))

    checks.extend(_trend_checks(order, kernels))

    report = SelfEnergyReport(order, kernels, checks)
    LOGGER.info("Self-energy extraction: %s", report)

    return report
