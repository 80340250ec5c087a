"""
.. module:: kernels
    :platform: Linux
    :synopsis: translation invariant kernels on the torus, computed through
        their Fourier symbols
"""
import math
import logging
import functools
import typing
import numpy as np
from libbandgraph import BandGraphException
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import SpectralPoint
from libbandgraph.results import check_le

LOGGER = logging.getLogger("bandgraph.kernels")

# smallest denominator accepted in the symbol inversions
SINGULARITY_TOLERANCE = 1e-14

# largest negative value accepted in the variance profile
NEGATIVE_TOLERANCE = 1e-12

# periodization depth of psi(W(p + 2 pi k)) on the dual grid
PERIODIZATION = 2

KINDS = (
    "S",
    "S+",
    "S-",
    "theta",
    "B",
    "chain",
    "theta-n",
    "error-tail",
    "self-energy",
)


class KernelError(BandGraphException):
    """
    Raised when a kernel can't be built.
    """


class SingularityError(KernelError):
    """
    Raised when a Fourier symbol can't be inverted.
    """


class DivergenceError(KernelError):
    """
    Raised when a renormalization series doesn't converge.
    """


class KernelTable:
    """
    Translation invariant kernel ``K_xy = K(x - y)`` stored as a profile
    over displacements, in FFT order. Tables are immutable.
    """

    def __init__(
            self,
            config: LatticeConfig,
            values: np.ndarray,
            kind: str,
            **kwargs: dict) -> None:
        """
        :param config: torus geometry
        :type config: LatticeConfig
        :param values: profile with shape ``config.shape``
        :type values: np.ndarray
        :param kind: one of ``KINDS``
        :type kind: str
        :param point: spectral point the kernel depends on
        :type point: SpectralPoint
        :param label: chain label ``(k, orders)`` of labelled kernels
        :type label: tuple
        :param meta: additional values computed while building the table
        :type meta: dict
        """
        if kind not in KINDS:
            raise KernelError(f"Unknown kernel kind '{kind}'")

        values = np.asarray(values, dtype=complex)
        if values.shape != config.shape:
            raise KernelError(
                f"profile shape {values.shape} doesn't match {config.shape}")

        values = values.copy()
        values.flags.writeable = False

        self._config = config
        self._values = values
        self._kind = kind
        self._point = kwargs.get("point", None)
        self._label = kwargs.get("label", None)
        self._meta = dict(kwargs.get("meta", {}))
        self._symbol = None
        self._matrix = None

    @classmethod
    def from_symbol(
            cls,
            config: LatticeConfig,
            symbol: np.ndarray,
            kind: str,
            real: bool = False,
            **kwargs: dict) -> "KernelTable":
        """
        Build a table from its Fourier symbol.
        """
        values = np.fft.ifftn(symbol)
        if real:
            values = values.real

        table = cls(config, values, kind, **kwargs)
        return table

    @property
    def config(self) -> LatticeConfig:
        """
        Torus geometry.
        """
        return self._config

    @property
    def kind(self) -> str:
        """
        Kernel kind.
        """
        return self._kind

    @property
    def values(self) -> np.ndarray:
        """
        Read-only profile in FFT order.
        """
        return self._values

    @property
    def point(self) -> SpectralPoint:
        """
        Spectral point, if any.
        """
        return self._point

    @property
    def label(self) -> tuple:
        """
        Chain label ``(k, orders)``, if any.
        """
        return self._label

    @property
    def meta(self) -> dict:
        """
        Values computed while building the table.
        """
        return self._meta

    @property
    def symbol(self) -> np.ndarray:
        """
        Fourier symbol, i.e. the eigenvalues of the circulant matrix.
        """
        if self._symbol is None:
            symbol = np.fft.fftn(self._values)
            symbol.flags.writeable = False
            self._symbol = symbol

        return self._symbol

    def __call__(self, displacement: typing.Any) -> complex:
        arr = np.atleast_1d(np.asarray(displacement, dtype=int))
        return complex(self._values[tuple(arr % self._config.L)])

    def entry(self, x: typing.Any, y: typing.Any) -> complex:
        """
        Matrix entry ``K_xy`` for physical sites ``x`` and ``y``.
        """
        xarr = self._config.check_site(x)
        yarr = self._config.check_site(y)
        return self(xarr - yarr)

    def reflected(self) -> np.ndarray:
        """
        The profile evaluated at ``-a``.
        """
        axes = tuple(range(self._config.d))
        return np.roll(np.flip(self._values, axis=axes), 1, axis=axes)

    def evenness(self) -> float:
        """
        ``max |K(a) - K(-a)|``.
        """
        return float(np.max(np.abs(self._values - self.reflected())))

    @property
    def row_sum(self) -> complex:
        """
        ``sum_y K_xy``, the same for every row.
        """
        return complex(self._values.sum())

    def matrix(self) -> np.ndarray:
        """
        Materialize the dense N x N matrix. The result is cached.
        """
        if self._matrix is not None:
            return self._matrix

        res = self._config.residues()
        size = self._config.N
        flat = np.zeros((size, size), dtype=np.intp)

        stride = 1
        for axis in reversed(range(self._config.d)):
            coord = res[:, axis]
            flat += ((coord[:, None] - coord[None, :]) % self._config.L) \
                * stride
            stride *= self._config.L

        matrix = self._values.ravel()[flat]
        matrix.flags.writeable = False
        self._matrix = matrix

        return matrix

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """
        Multiply the kernel with vectors stored on the first axis of an
        array with shape (N, ...), by circulant convolution.
        """
        vectors = np.asarray(vectors)
        tail = vectors.shape[1:]
        shaped = vectors.reshape(self._config.shape + tail)
        axes = tuple(range(self._config.d))

        symbol = self.symbol.reshape(self._config.shape + (1,) * len(tail))
        out = np.fft.ifftn(np.fft.fftn(shaped, axes=axes) * symbol, axes=axes)

        return out.reshape(vectors.shape)

    def conj(self) -> "KernelTable":
        """
        Kernel with conjugated values.
        """
        return KernelTable(
            self._config,
            self._values.conj(),
            self._kind,
            point=self._point,
            label=self._label,
            meta=self._meta)

    def to_dict(self) -> dict:
        """
        Export the kernel with the profile in lexicographic displacement
        order.
        """
        profile = self._config.lexicographic(self._values).ravel()
        point = None
        if self._point:
            point = [self._point.E, self._point.eta]

        data = {
            "kind": self._kind,
            "d": self._config.d,
            "L": self._config.L,
            "W": self._config.W,
            "z": point,
            "profile": [[float(v.real), float(v.imag)] for v in profile],
        }

        if self._label:
            data["label"] = [self._label[0], list(self._label[1])]

        return data

    def __repr__(self) -> str:
        return \
            f"KernelTable(kind: '{self._kind}', config: {self._config}, " \
            f"label: {self._label})"


class SelfEnergyKernel:
    """
    A self-energy of order ``order``: its deterministic graph expansion
    and, once evaluated, its kernel table.
    """

    def __init__(
            self,
            order: int,
            expansion: typing.Any = None,
            table: KernelTable = None) -> None:
        if order < 1:
            raise ValueError("order must be positive")

        self._order = order
        self._expansion = expansion
        self._table = table

    @property
    def order(self) -> int:
        """
        Order of the self-energy.
        """
        return self._order

    @property
    def expansion(self) -> typing.Any:
        """
        Deterministic graph expansion.
        """
        return self._expansion

    @property
    def table(self) -> KernelTable:
        """
        Evaluated kernel, if any.
        """
        return self._table

    def __repr__(self) -> str:
        return \
            f"SelfEnergyKernel(order: {self._order}, " \
            f"evaluated: {self._table is not None})"


@functools.lru_cache(maxsize=32)
def build_variance_profile(config: LatticeConfig) -> KernelTable:
    """
    Build the variance profile ``s_xy = f(x - y)``. ``f`` is the inverse
    discrete Fourier transform of ``p -> psi(W p)`` periodized over the
    dual grid, normalized to sum one.
    """
    LOGGER.info("Building variance profile for %s", config)

    if config.L < config.W ** 1.1:
        LOGGER.warning(
            "L=%d is smaller than W^1.1=%.2f: band and torus scales mix",
            config.L, config.W ** 1.1)

    freqs = config.frequencies()
    symbol = np.zeros(config.shape)

    shifts = range(-PERIODIZATION, PERIODIZATION + 1)
    for shift in np.array(np.meshgrid(*([shifts] * config.d))).T.reshape(
            -1, config.d):
        symbol += config.psi(config.W * (freqs + 2.0 * np.pi * shift))

    profile = np.fft.ifftn(symbol).real
    norm = float(profile.sum())

    if norm <= 0:
        raise KernelError(f"variance profile has non-positive mass: {norm}")

    profile = profile / norm

    lowest = float(profile.min())
    if lowest < -NEGATIVE_TOLERANCE:
        raise KernelError(
            f"variance profile is negative ({lowest:.3e}): "
            f"'{config.psi.name}' is not positive on this grid")

    profile = np.maximum(profile, 0.0)

    LOGGER.debug("Normalization constant Z=%.17g", norm)

    return KernelTable(config, profile, "S", meta={"Z": norm})


def _checked_inverse(denominator: np.ndarray, what: str) -> np.ndarray:
    smallest = float(np.min(np.abs(denominator)))
    if smallest < SINGULARITY_TOLERANCE:
        raise SingularityError(
            f"{what} symbol is singular: |1 - x| = {smallest:.3e}")

    return 1.0 / denominator


def kernel_theta(
        config: LatticeConfig,
        point: SpectralPoint) -> KernelTable:
    """
    The diffusive kernel ``Theta = |m|^2 S (1 - |m|^2 S)^-1``.
    """
    s_hat = build_variance_profile(config).symbol.real
    mm = abs(point.m) ** 2

    symbol = mm * s_hat * _checked_inverse(1.0 - mm * s_hat, "theta")

    return KernelTable.from_symbol(
        config,
        symbol,
        "theta",
        real=True,
        point=point,
        label=(2, ()))


def kernel_s_pm(
        config: LatticeConfig,
        point: SpectralPoint) -> tuple:
    """
    The kernels ``S+ = m^2 S (1 - m^2 S)^-1`` and ``S- = conj(S+)``.
    """
    s_hat = build_variance_profile(config).symbol.real
    m2 = point.m ** 2

    symbol = m2 * s_hat * _checked_inverse(1.0 - m2 * s_hat, "S+")

    plus = KernelTable.from_symbol(config, symbol, "S+", point=point)
    minus = KernelTable(config, plus.values.conj(), "S-", point=point)

    return plus, minus


@functools.lru_cache(maxsize=32)
def kernel_B(config: LatticeConfig) -> KernelTable:
    """
    The envelope ``B(a) = W^-2 (||a||_L + W)^-(d-2)``.
    """
    # pylint: disable=invalid-name
    dist = config.distance_profile().astype(float)
    values = config.W ** -2 * (dist + config.W) ** (-(config.d - 2))

    return KernelTable(config, values, "B")


def _energy_parts(energy: typing.Any) -> tuple:
    if isinstance(energy, SelfEnergyKernel):
        if energy.table is None:
            raise KernelError(
                f"self-energy of order {energy.order} is not evaluated")

        return energy.order, energy.table

    if isinstance(energy, KernelTable):
        order = energy.meta.get("order", None)
        if order is None:
            raise KernelError("self-energy table without order")

        return order, energy

    raise KernelError(f"Unsupported self-energy {repr(energy)}")


def chain_label(orders: typing.Iterable) -> tuple:
    """
    Label ``(k, orders)`` of a chain ``Theta E_1 Theta ... E_l Theta``,
    where ``k = sum(orders) - 2 (l - 1)``. The empty chain is ``Theta``,
    with ``k = 2``.
    """
    orders = tuple(orders)
    if not orders:
        return (2, ())

    for order in orders:
        if order < 4 or order % 2 != 0:
            raise KernelError(
                f"chain orders must be even and at least 4: {orders}")

    return (sum(orders) - 2 * (len(orders) - 1), orders)


def labelled_diffusive_chain(
        config: LatticeConfig,
        point: SpectralPoint,
        energies: list) -> KernelTable:
    """
    Profile of the chain ``Theta E_1 Theta E_2 ... E_l Theta``. Every
    self-energy is a ``SelfEnergyKernel`` or a table carrying its order in
    ``meta["order"]``.
    """
    theta = kernel_theta(config, point)
    symbol = theta.symbol.copy()

    orders = []
    for energy in energies:
        order, table = _energy_parts(energy)
        if table.config != config:
            raise KernelError(
                f"self-energy built on {table.config}, chain on {config}")

        symbol = symbol * table.symbol * theta.symbol
        orders.append(order)

    label = chain_label(orders)
    if not orders:
        return theta

    return KernelTable.from_symbol(
        config,
        symbol,
        "chain",
        point=point,
        label=label)


def renormalized_theta(
        config: LatticeConfig,
        point: SpectralPoint,
        sigma: KernelTable,
        truncation: int) -> tuple:
    """
    Return ``(Theta_n, tail)`` where ``Theta_n = (1 - Theta Sigma)^-1 Theta``
    and ``tail = Theta_n - sum_{k <= truncation} (Theta Sigma)^k Theta``.
    """
    if truncation < 1:
        raise ValueError("truncation must be at least 1")

    if sigma.config != config:
        raise KernelError(f"sigma built on {sigma.config}, not on {config}")

    theta = kernel_theta(config, point)
    ratio = theta.symbol * sigma.symbol

    radius = float(np.max(np.abs(ratio)))
    if radius >= 1.0:
        raise DivergenceError(
            f"spectral radius of Theta Sigma is {radius:.6f} >= 1")

    exact = theta.symbol * _checked_inverse(1.0 - ratio, "renormalized")

    truncated = np.zeros_like(exact)
    power = theta.symbol.copy()
    for _ in range(truncation + 1):
        truncated += power
        power = power * ratio

    exact_table = KernelTable.from_symbol(
        config,
        exact,
        "theta-n",
        point=point,
        meta={"radius": radius})

    tail_table = KernelTable.from_symbol(
        config,
        exact - truncated,
        "error-tail",
        point=point,
        meta={"truncation": truncation})

    return exact_table, tail_table


def kernel_diagnostics(
        config: LatticeConfig,
        point: SpectralPoint,
        tau: float = 0.5) -> list:
    """
    Run the invariant checks of the kernels at ``(config, point)``.
    Exact identities are hard checks, bound shapes with calibrated
    constants are diagnostics.
    :returns: list(CheckResult)
    """
    LOGGER.info("Kernel diagnostics for %s at %s", config, point)

    checks = []

    violations = config.psi.check_admissible(config.d)
    checks.append(check_le(
        "psi_admissible",
        len(violations),
        0,
        details="; ".join(violations)))

    s_table = build_variance_profile(config)
    checks.append(check_le(
        "s_normalization",
        abs(s_table.row_sum - 1.0),
        NEGATIVE_TOLERANCE))
    checks.append(check_le(
        "s_nonnegative",
        -float(s_table.values.real.min()),
        NEGATIVE_TOLERANCE))
    checks.append(check_le(
        "s_symmetric",
        s_table.evenness(),
        NEGATIVE_TOLERANCE))

    theta = kernel_theta(config, point)
    expected = point.m.imag / point.eta
    checks.append(check_le(
        "theta_row_sum",
        abs(theta.row_sum - expected),
        1e-8,
        details=f"Im m / eta = {expected:.17g}"))

    b_table = kernel_B(config)
    ratio = float(np.max(theta.values.real / b_table.values.real))
    checks.append(check_le(
        "theta_bound",
        ratio,
        config.W ** tau,
        hard=False,
        details="max Theta / B against W^tau"))

    plus, minus = kernel_s_pm(config, point)
    checks.append(check_le(
        "s_pm_conjugate",
        float(np.max(np.abs(minus.values - plus.values.conj()))),
        0.0))
    checks.append(check_le(
        "s_pm_even",
        plus.evenness(),
        1e-12))

    dist = config.distance_profile()
    far = dist >= config.W ** (1 + tau)
    support = float(np.max(s_table.values.real[far])) if np.any(far) else 0.0
    checks.append(check_le(
        "s_support",
        support,
        config.W ** (-config.d) * math.exp(-config.W ** (2 * tau) / 4.0),
        hard=False,
        details="max s beyond W^(1+tau) against the gaussian envelope"))

    # decay shape f(x) <= C W^-d (|x| / W)^-4 at |x| = 4 W
    ring = dist == int(round(4 * config.W))
    if np.any(ring):
        decay = float(np.max(s_table.values.real[ring])) * \
            config.W ** config.d * 4.0 ** 4
        checks.append(check_le(
            "s_decay",
            decay,
            10.0,
            hard=False,
            details="W^d (|x|/W)^4 f(x) at |x| = 4W"))

    return checks
