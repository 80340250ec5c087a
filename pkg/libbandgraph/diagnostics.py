"""
.. module:: diagnostics
    :platform: Linux
    :synopsis: norms, control variables and spectral diagnostics computed on
        resolvent samples
"""
import math
import logging
import numpy as np
import scipy.linalg
import scipy.stats
from libbandgraph import BandGraphException
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import SpectralPoint
from libbandgraph.kernels import KernelTable
from libbandgraph.kernels import kernel_B
from libbandgraph.kernels import build_variance_profile
from libbandgraph.ensemble import BandMatrixSample
from libbandgraph.ensemble import ResolventSample
from libbandgraph.ensemble import resolvent
from libbandgraph.ensemble import t_variables

LOGGER = logging.getLogger("bandgraph.diagnostics")


class DiagnosticsError(BandGraphException):
    """
    Raised when a diagnostic can't be computed.
    """


def dyadic_scales(config: LatticeConfig) -> list:
    """
    Scales ``W, 2W, 4W, ...`` not larger than ``L/2``.
    """
    scales = []
    scale = config.W
    while scale <= config.L / 2:
        scales.append(scale)
        scale *= 2

    return scales


def _box(config: LatticeConfig, radius: float) -> KernelTable:
    indicator = (config.distance_profile() <= radius).astype(float)
    return KernelTable(config, indicator, "B", meta={"box": radius})


def weak_norm(
        matrix: np.ndarray,
        config: LatticeConfig,
        a: float,
        b: float) -> float:
    """
    The weak-(a, b) norm: the largest entry scaled by ``W^(ad/2)`` plus the
    supremum over dyadic ``K`` of box averages of ``|A_xy| + |A_yx|``
    scaled by ``(W/K)^b K^(ad/2)``.
    """
    if a <= 0 or b <= 0:
        raise DiagnosticsError("a and b must be positive")

    absolute = np.abs(np.asarray(matrix))
    dim = config.d

    norm = config.W ** (a * dim / 2) * float(absolute.max())

    # rows[y, x] = |A_xy| + |A_yx|, so boxes are taken over y
    rows = (absolute + absolute.T).T

    best = 0.0
    for scale in dyadic_scales(config):
        sums = _box(config, scale).apply(rows).real
        average = float(sums.max()) / scale ** dim
        value = (config.W / scale) ** b * scale ** (a * dim / 2) * average
        best = max(best, value)

    return norm + best


def strong_norm(
        matrix: np.ndarray,
        config: LatticeConfig,
        a: float,
        b: float) -> float:
    """
    The strong-(a, b) norm
    ``max (W / <x-y>)^b <x-y>^(ad/2) |A_xy|`` with
    ``<x-y> = ||x-y||_L + W``.
    """
    if a <= 0 or b <= 0:
        raise DiagnosticsError("a and b must be positive")

    bracket = config.distance_matrix() + config.W
    scale = (config.W / bracket) ** b * bracket ** (a * config.d / 2)

    return float(np.max(scale * np.abs(np.asarray(matrix))))


def weak_strong_norms(
        matrix: np.ndarray,
        config: LatticeConfig,
        a: float,
        b: float) -> tuple:
    """
    Return ``(weak, strong)`` (a, b)-norms of a N x N matrix.
    """
    return (
        weak_norm(matrix, config, a, b),
        strong_norm(matrix, config, a, b))


def _window(config: LatticeConfig, center: int, radius: float) -> np.ndarray:
    dist = config.distance_matrix()[center]
    return np.flatnonzero(dist <= radius)


def psi_variable(
        matrix: np.ndarray,
        config: LatticeConfig,
        x: int,
        y: int,
        tau: float = 0.1,
        D: float = 10.0) -> float:
    # pylint: disable=invalid-name
    """
    The control variable ``Psi_xy(tau, D)``: the square root of
    ``W^-D + max s`` over the two ``W^(1+tau)`` windows plus the
    ``W^-((2+2tau)d)`` weighted sum of ``|G|^2`` over the same windows.
    """
    if tau <= 0:
        raise DiagnosticsError("tau must be positive")

    radius = config.W ** (1 + tau)
    xwin = _window(config, x, radius)
    ywin = _window(config, y, radius)

    variance = build_variance_profile(config).matrix().real
    block = np.abs(np.asarray(matrix)[np.ix_(xwin, ywin)]) ** 2

    value = config.W ** (-D)
    value += float(variance[np.ix_(xwin, ywin)].max())
    value += config.W ** (-(2 + 2 * tau) * config.d) * float(block.sum())

    return math.sqrt(value)


class AMatrixReport:
    """
    The Hermitian matrix ``A = (G - G^*) / 2i`` restricted to a box, with
    its spectral data.
    """

    def __init__(self, matrix: np.ndarray, powers: tuple) -> None:
        self._matrix = matrix
        self._eigenvalues = scipy.linalg.eigvalsh(matrix)
        self._traces = {
            power: float(np.sum(self._eigenvalues ** (2 * power)))
            for power in powers
        }

    @property
    def matrix(self) -> np.ndarray:
        """
        The matrix A.
        """
        return self._matrix

    @property
    def traces(self) -> dict:
        """
        ``tr(A^(2p))`` for every requested ``p``.
        """
        return self._traces

    @property
    def min_eigenvalue(self) -> float:
        """
        Smallest eigenvalue.
        """
        return float(self._eigenvalues.min())

    @property
    def opnorm(self) -> float:
        """
        Operator norm.
        """
        return float(np.max(np.abs(self._eigenvalues)))

    def hermitian_residual(self) -> float:
        """
        ``max |A - A^*|``.
        """
        return float(np.max(np.abs(self._matrix - self._matrix.conj().T)))


def a_matrix(
        res: ResolventSample,
        center: int,
        radius: float,
        powers: tuple = (1, 2)) -> AMatrixReport:
    """
    Build ``A_{y'y} = (G_{y'y} - conj(G_{yy'})) / 2i`` over the box of
    sites at distance at most ``radius`` from ``center``.
    """
    config = res.config
    if radius < config.W or radius > config.L / 2:
        raise DiagnosticsError(
            f"radius {radius} outside [W, L/2] = [{config.W}, {config.L / 2}]")

    box = _window(config, center, radius)
    if box.size == 0:
        raise DiagnosticsError("empty box")

    block = res.G[np.ix_(box, box)]
    matrix = (block - block.conj().T) / 2j

    return AMatrixReport(matrix, powers)


def a_matrix_bound(config: LatticeConfig, radius: float, power: int) -> float:
    """
    Bound shape ``K^d (K^4 / W^4)^(2p - 1)`` of ``E tr(A^(2p))``.
    """
    return radius ** config.d * (radius ** 4 / config.W ** 4) ** (2 * power - 1)


def eta_monotonicity(
        sample: BandMatrixSample,
        point: SpectralPoint,
        eta_tilde: float) -> float:
    """
    Largest violation of ``eta Im G_yy(z) <= eta~ Im G_yy(z~)`` for
    ``eta <= eta~``. Non positive when the inequality holds.
    """
    if eta_tilde < point.eta:
        raise DiagnosticsError("eta_tilde must be larger than eta")

    wider = SpectralPoint(E=point.E, eta=eta_tilde, kappa=point.kappa)

    lower = point.eta * np.diag(resolvent(sample, point).G).imag
    upper = eta_tilde * np.diag(resolvent(sample, wider).G).imag

    return float(np.max(lower - upper))


def g_vs_t_fraction(res: ResolventSample, tau: float = 0.5) -> float:
    """
    Fraction of pairs ``x != y`` with ``|G_xy|^2 > W^tau T_xy``.
    """
    config = res.config
    tvar = t_variables(res)
    offdiag = ~np.eye(config.N, dtype=bool)

    above = np.abs(res.G) ** 2 > config.W ** tau * tvar

    return float(np.count_nonzero(above & offdiag)) / offdiag.sum()


class LocalLawStatistics:
    """
    Distance binned ratios ``|G_xy - m delta_xy|^2 / B_xy`` and
    ``T_xy / B_xy`` accumulated over resolvent samples.
    """

    def __init__(self, config: LatticeConfig) -> None:
        self._config = config
        self._dist = config.distance_matrix()
        self._envelope = kernel_B(config).matrix().real
        self._bins = np.unique(self._dist)
        self._g_ratios = {int(b): [] for b in self._bins}
        self._t_ratios = {int(b): [] for b in self._bins}
        self._samples = 0

    @property
    def samples(self) -> int:
        """
        Number of accumulated resolvents.
        """
        return self._samples

    def add(self, res: ResolventSample) -> None:
        """
        Accumulate a resolvent.
        """
        centered = res.G - res.point.m * np.eye(self._config.N)
        gratio = np.abs(centered) ** 2 / self._envelope
        tratio = t_variables(res) / self._envelope

        for dist in self._bins:
            mask = self._dist == dist
            self._g_ratios[int(dist)].append(float(np.median(gratio[mask])))
            self._t_ratios[int(dist)].append(float(np.median(tratio[mask])))

        self._samples += 1

    def rows(self) -> list:
        """
        One row per distance bin with the medians over samples.
        """
        rows = []
        for dist in self._bins:
            rows.append({
                "distance": int(dist),
                "g_ratio": float(np.median(self._g_ratios[int(dist)])),
                "t_ratio": float(np.median(self._t_ratios[int(dist)])),
                "samples": self._samples,
            })

        return rows

    def median_offdiagonal(self) -> float:
        """
        Median of the G ratio over the off-diagonal bins.
        """
        values = []
        for dist in self._bins:
            if dist == 0:
                continue

            values.extend(self._g_ratios[int(dist)])

        return float(np.median(values))

    def slope(self, low: float, high: float) -> float:
        """
        Log-log slope of the G ratio against ``||x - y||_L`` restricted to
        ``[low, high]``. NaN when fewer than two bins are inside.
        """
        points = [
            (math.log(row["distance"]), math.log(row["g_ratio"]))
            for row in self.rows()
            if low <= row["distance"] <= high and row["g_ratio"] > 0
        ]

        if len(points) < 2:
            return math.nan

        xs, ys = zip(*points)
        return float(scipy.stats.linregress(xs, ys).slope)
