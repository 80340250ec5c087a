"""
.. module:: ensemble
    :platform: Linux
    :synopsis: Gaussian band matrix sampling, resolvents, T-variables and
        Monte Carlo estimators
"""
import math
import logging
import functools
import typing
import numpy as np
from libbandgraph import BandGraphException
from libbandgraph import CapacityError
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import SpectralPoint
from libbandgraph.kernels import build_variance_profile

LOGGER = logging.getLogger("bandgraph.ensemble")

# largest N = L^d accepted by the dense solver
DENSE_BUDGET = 4096

# largest residual ||(H - z) G - I||_max accepted after a solve
RESIDUAL_TOLERANCE = 1e-9


class EnsembleError(BandGraphException):
    """
    Raised when sampling or estimation fails.
    """


class NumericalError(EnsembleError):
    """
    Raised when a linear solve is not accurate enough.
    """


class SeedStream:
    """
    Counter based random streams. Every ``(sample, row, ...)`` key owns an
    independent Philox stream, so resampling one row never perturbs the
    streams of the other rows or samples.
    """

    def __init__(self, seed: int) -> None:
        if seed is None or seed < 0:
            raise ValueError("seed must be a non negative integer")

        self._seed = int(seed)

    @property
    def seed(self) -> int:
        """
        Root seed of the stream.
        """
        return self._seed

    def generator(self, *key: int) -> np.random.Generator:
        """
        Return the generator associated with ``key``.
        """
        seq = np.random.SeedSequence(
            self._seed,
            spawn_key=tuple(int(k) for k in key))

        return np.random.Generator(np.random.Philox(seq))

    def fork(self, *key: int) -> "SeedStream":
        """
        Derive a child stream for sub-tasks.
        """
        child = self.generator(*key).integers(0, 2 ** 63 - 1)
        return SeedStream(int(child))

    def __repr__(self) -> str:
        return f"SeedStream(seed: {self._seed})"


def _check_dense(config: LatticeConfig) -> None:
    if config.N > DENSE_BUDGET:
        raise CapacityError(
            f"N = {config.N} exceeds the dense budget of {DENSE_BUDGET}")


@functools.lru_cache(maxsize=8)
def _deviations(config: LatticeConfig) -> np.ndarray:
    """
    Entry standard deviations ``sqrt(s_xy)`` as a dense matrix.
    """
    variance = build_variance_profile(config).matrix().real
    deviations = np.sqrt(np.maximum(variance, 0.0))
    deviations.flags.writeable = False

    return deviations


class BandMatrixSample:
    """
    A complex Hermitian Gaussian band matrix with ``E |h_xy|^2 = s_xy``.
    Off-diagonal entries have ``Re h, Im h ~ N(0, s_xy / 2)``; diagonal
    entries are real with ``h_xx ~ N(0, s_xx)``.
    """

    def __init__(
            self,
            config: LatticeConfig,
            seed: int,
            sample: int = 0,
            matrix: np.ndarray = None) -> None:
        """
        :param config: torus geometry
        :type config: LatticeConfig
        :param seed: root seed
        :type seed: int
        :param sample: sample index inside the seed stream
        :type sample: int
        :param matrix: the matrix itself. If None, it's drawn from the
            stream ``(seed, sample)``
        :type matrix: np.ndarray
        """
        _check_dense(config)

        self._config = config
        self._stream = SeedStream(seed)
        self._sample = int(sample)

        if matrix is None:
            matrix = self._draw()

        matrix = np.asarray(matrix, dtype=complex)
        matrix.flags.writeable = False
        self._H = matrix

    def _draw(self) -> np.ndarray:
        size = self._config.N
        sigma = _deviations(self._config)
        matrix = np.zeros((size, size), dtype=complex)

        for row in range(size):
            rng = self._stream.generator(self._sample, row)
            normal = rng.standard_normal((2, size - row))

            upper = sigma[row, row:] * (normal[0] + 1j * normal[1]) \
                / math.sqrt(2.0)
            upper[0] = sigma[row, row] * normal[0, 0]

            matrix[row, row:] = upper
            matrix[row + 1:, row] = upper[1:].conj()

        return matrix

    @property
    def config(self) -> LatticeConfig:
        """
        Torus geometry.
        """
        return self._config

    @property
    def seed(self) -> int:
        """
        Root seed.
        """
        return self._stream.seed

    @property
    def sample(self) -> int:
        """
        Sample index.
        """
        return self._sample

    @property
    def H(self) -> np.ndarray:
        # pylint: disable=invalid-name
        """
        Read-only matrix.
        """
        return self._H

    def resampled(self, row: int, draw: int) -> "BandMatrixSample":
        """
        Return a copy where row and column ``row`` are redrawn from the
        inner stream ``(sample, N + row, draw)``, while the minor is kept.
        """
        size = self._config.N
        if row < 0 or row >= size:
            raise EnsembleError(f"row {row} out of range")

        sigma = _deviations(self._config)
        rng = self._stream.generator(self._sample, size + row, draw)
        normal = rng.standard_normal((2, size))

        entries = sigma[row] * (normal[0] + 1j * normal[1]) / math.sqrt(2.0)
        entries[row] = sigma[row, row] * normal[0, row]

        matrix = np.array(self._H)
        matrix[row, :] = entries
        matrix[:, row] = entries.conj()
        matrix[row, row] = entries[row].real

        return BandMatrixSample(
            self._config,
            self._stream.seed,
            sample=self._sample,
            matrix=matrix)

    def __repr__(self) -> str:
        return \
            f"BandMatrixSample(config: {self._config}, " \
            f"seed: {self._stream.seed}, sample: {self._sample})"


def sample_band_matrix(
        config: LatticeConfig,
        seed: int,
        sample: int = 0) -> BandMatrixSample:
    """
    Draw the ``sample``-th band matrix of the stream ``seed``.
    """
    return BandMatrixSample(config, seed, sample=sample)


class ResolventSample:
    """
    The resolvent ``G(z) = (H - z)^-1`` of a band matrix sample.
    """

    def __init__(
            self,
            sample: BandMatrixSample,
            point: SpectralPoint,
            matrix: np.ndarray) -> None:
        matrix = np.asarray(matrix)
        matrix.flags.writeable = False

        self._sample = sample
        self._point = point
        self._G = matrix
        self._conj = None

    @property
    def sample(self) -> BandMatrixSample:
        """
        Band matrix the resolvent is computed from.
        """
        return self._sample

    @property
    def point(self) -> SpectralPoint:
        """
        Spectral point.
        """
        return self._point

    @property
    def config(self) -> LatticeConfig:
        """
        Torus geometry.
        """
        return self._sample.config

    @property
    def G(self) -> np.ndarray:
        # pylint: disable=invalid-name
        """
        ``G(z)``.
        """
        return self._G

    @property
    def Gbar(self) -> np.ndarray:
        # pylint: disable=invalid-name
        """
        Entrywise conjugate of ``G(z)``, i.e. ``Gbar_xy = G(zbar)_yx``.
        """
        if self._conj is None:
            conj = self._G.conj()
            conj.flags.writeable = False
            self._conj = conj

        return self._conj

    def charged(self, charge: int) -> np.ndarray:
        """
        ``G`` for charge +1, ``Gbar`` for charge -1.
        """
        return self._G if charge > 0 else self.Gbar

    def ward_residual(self) -> float:
        """
        Largest relative deviation of
        ``sum_a |G_ay|^2 = Im G_yy / eta`` over the columns.
        """
        lhs = np.sum(np.abs(self._G) ** 2, axis=0)
        rhs = np.diag(self._G).imag / self._point.eta
        return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def resolvent(
        sample: BandMatrixSample,
        point: SpectralPoint) -> ResolventSample:
    """
    Dense solve of ``(H - z) G = I``.
    """
    size = sample.config.N
    shifted = sample.H - point.z * np.eye(size)

    try:
        matrix = np.linalg.solve(shifted, np.eye(size, dtype=complex))
    except np.linalg.LinAlgError as err:
        raise NumericalError(f"resolvent solve failed: {err}") from err

    residual = float(np.max(np.abs(shifted @ matrix - np.eye(size))))
    if residual >= RESIDUAL_TOLERANCE:
        raise NumericalError(
            f"resolvent residual {residual:.3e} above {RESIDUAL_TOLERANCE}")

    return ResolventSample(sample, point, matrix)


class ResolventDraw:
    """
    Callable returning the resolvent of the ``i``-th sample of a seed
    stream. The last resolvents are cached, so evaluating many
    functionals on the same sample solves once.
    """

    def __init__(
            self,
            config: LatticeConfig,
            point: SpectralPoint,
            seed: int,
            cache: int = 4) -> None:
        self._config = config
        self._point = point
        self._seed = seed
        self._draw = functools.lru_cache(maxsize=cache)(self._solve)

    def _solve(self, index: int) -> ResolventSample:
        sample = sample_band_matrix(self._config, self._seed, sample=index)
        return resolvent(sample, self._point)

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
    def seed(self) -> int:
        """
        Root seed.
        """
        return self._seed

    def __call__(self, index: int) -> ResolventSample:
        return self._draw(index)


T_XY = "T_xy"
T_X_YY = "T_x,yy"
T_YY_X = "T_yy,x"


def t_variables(
        res: ResolventSample,
        which: str = T_XY,
        y1: int = None,
        y2: int = None) -> np.ndarray:
    """
    T-variables of a resolvent, computed by circulant convolution with the
    variance profile:

    - ``T_xy = |m|^2 sum_a s_xa |G_ay|^2`` as a N x N matrix
    - ``T_{x,y1y2} = |m|^2 sum_a s_xa G_ay1 Gbar_ay2`` as a vector over x
    - ``T_{y1y2,x} = |m|^2 sum_a G_y1a Gbar_y2a s_ax`` as a vector over x
    """
    s_table = build_variance_profile(res.config)
    mm = abs(res.point.m) ** 2

    if which == T_XY:
        return mm * s_table.apply(np.abs(res.G) ** 2).real

    if y1 is None or y2 is None:
        raise EnsembleError(f"{which} requires y1 and y2")

    if which == T_X_YY:
        column = res.G[:, y1] * res.Gbar[:, y2]
        return mm * s_table.apply(column)

    if which == T_YY_X:
        row = res.G[y1, :] * res.Gbar[y2, :]
        return mm * s_table.apply(row)

    raise EnsembleError(f"Unknown T-variable '{which}'")


class EstimatorResult:
    """
    Sample mean and standard error of a Monte Carlo estimate.
    """

    def __init__(
            self,
            mean: typing.Any,
            stderr: typing.Any,
            samples: int,
            seed: int = None) -> None:
        self._mean = mean
        self._stderr = stderr
        self._samples = samples
        self._seed = seed

    @classmethod
    def from_values(
            cls,
            values: np.ndarray,
            seed: int = None) -> "EstimatorResult":
        """
        Estimate from the sample values stored on the first axis.
        """
        values = np.asarray(values, dtype=complex)
        count = values.shape[0]
        if count < 2:
            raise EnsembleError("at least two samples are required")

        mean = values.mean(axis=0)
        spread = np.sum(np.abs(values - mean) ** 2, axis=0) / (count - 1)
        stderr = np.sqrt(spread / count)

        if np.ndim(mean) == 0:
            mean = complex(mean)
            stderr = float(stderr)

        return cls(mean, stderr, count, seed=seed)

    @property
    def mean(self) -> typing.Any:
        """
        Sample mean.
        """
        return self._mean

    @property
    def stderr(self) -> typing.Any:
        """
        Standard error of the mean.
        """
        return self._stderr

    @property
    def samples(self) -> int:
        """
        Number of samples.
        """
        return self._samples

    @property
    def seed(self) -> int:
        """
        Seed of the stream the samples come from.
        """
        return self._seed

    def to_dict(self) -> dict:
        """
        Export a scalar estimate.
        """
        mean = complex(self._mean)
        return {
            "mean": [mean.real, mean.imag],
            "stderr": float(self._stderr),
            "n": self._samples,
            "seed": self._seed,
        }

    def __repr__(self) -> str:
        return \
            f"EstimatorResult(mean: {self._mean}, " \
            f"stderr: {self._stderr}, samples: {self._samples})"


def mc_expectation(
        evaluable: typing.Callable,
        n_samples: int,
        seed: int = None,
        start: int = 0) -> EstimatorResult:
    """
    Estimate ``E evaluable(i)`` over the sample indexes
    ``start .. start + n_samples - 1``.
    """
    if n_samples < 2:
        raise EnsembleError("n_samples must be at least 2")

    values = [evaluable(index) for index in range(start, start + n_samples)]

    return EstimatorResult.from_values(np.array(values), seed=seed)


class IdentityCheck:
    """
    Comparison of two Monte Carlo estimates computed on the same samples.
    The z-score is the paired difference over its standard error.
    """

    def __init__(
            self,
            name: str,
            lhs: EstimatorResult,
            rhs: EstimatorResult,
            diff: EstimatorResult) -> None:
        self._name = name
        self._lhs = lhs
        self._rhs = rhs
        self._diff = diff

    @property
    def name(self) -> str:
        """
        Name of the identity.
        """
        return self._name

    @property
    def lhs(self) -> EstimatorResult:
        """
        Left hand side estimate.
        """
        return self._lhs

    @property
    def rhs(self) -> EstimatorResult:
        """
        Right hand side estimate.
        """
        return self._rhs

    @property
    def diff(self) -> EstimatorResult:
        """
        Paired difference estimate.
        """
        return self._diff

    @property
    def zscore(self) -> float:
        """
        ``|mean(lhs - rhs)| / stderr(lhs - rhs)``. Zero when both are
        exactly zero.
        """
        mean = abs(self._diff.mean)
        if self._diff.stderr == 0:
            return 0.0 if mean == 0 else math.inf

        return float(mean / self._diff.stderr)

    def passed(self, confidence: float = 3.0) -> bool:
        """
        True if the z-score is within ``confidence``.
        """
        return self.zscore <= confidence

    def __repr__(self) -> str:
        return \
            f"IdentityCheck(name: '{self._name}', " \
            f"zscore: {self.zscore:.3f})"


def mc_compare(
        name: str,
        lhs: typing.Callable,
        rhs: typing.Callable,
        n_samples: int,
        seed: int = None,
        start: int = 0) -> IdentityCheck:
    """
    Estimate ``E lhs(i)`` and ``E rhs(i)`` on the same samples.
    """
    if n_samples < 2:
        raise EnsembleError("n_samples must be at least 2")

    left = []
    right = []
    for index in range(start, start + n_samples):
        left.append(complex(lhs(index)))
        right.append(complex(rhs(index)))

    left = np.array(left)
    right = np.array(right)

    return IdentityCheck(
        name,
        EstimatorResult.from_values(left, seed=seed),
        EstimatorResult.from_values(right, seed=seed),
        EstimatorResult.from_values(left - right, seed=seed))


def partial_expectation_estimate(
        functional: typing.Callable,
        res: ResolventSample,
        x: int,
        inner_samples: int) -> tuple:
    """
    Estimate ``P_x = E_x`` of ``functional(resolvent)`` by resampling row
    and column ``x`` of the band matrix ``inner_samples`` times, keeping
    the minor fixed.
    :returns: (EstimatorResult of P_x, pathwise Q_x estimate)
    """
    if inner_samples < 2:
        raise EnsembleError("inner_samples must be at least 2")

    values = []
    for draw in range(inner_samples):
        inner = res.sample.resampled(x, draw)
        values.append(functional(resolvent(inner, res.point)))

    estimate = EstimatorResult.from_values(
        np.array(values),
        seed=res.sample.seed)

    qvalue = functional(res) - estimate.mean

    return estimate, qvalue


class TolerancePolicy:
    """
    Fixed-W realization of stochastic domination: a measured value is
    accepted when it is below ``W^tau * bound + confidence * stderr``.
    """

    def __init__(
            self,
            tau: float = 0.5,
            confidence: float = 3.0,
            D: float = 10.0) -> None:
        # pylint: disable=invalid-name
        if tau <= 0:
            raise ValueError("tau must be positive")

        if confidence < 1:
            raise ValueError("confidence must be at least 1")

        self._tau = tau
        self._confidence = confidence
        self._D = D

    @property
    def tau(self) -> float:
        """
        Exponent of the ``W^tau`` slack.
        """
        return self._tau

    @property
    def confidence(self) -> float:
        """
        Multiplier of standard errors.
        """
        return self._confidence

    @property
    def D(self) -> float:
        # pylint: disable=invalid-name
        """
        Negligible order cutoff, values below ``W^-D`` are zero.
        """
        return self._D

    def negligible(self, W: float) -> float:
        # pylint: disable=invalid-name
        """
        Size ``W^-D`` below which a value is negligible.
        """
        return W ** (-self._D)

    def accepts(
            self,
            measured: float,
            bound: float,
            W: float,
            stderr: float = 0.0) -> bool:
        # pylint: disable=invalid-name
        """
        True if ``measured <= W^tau bound + confidence stderr``.
        """
        slack = W ** self._tau * bound + self._confidence * stderr
        return measured <= slack + self.negligible(W)

    def __repr__(self) -> str:
        return \
            f"TolerancePolicy(tau: {self._tau}, " \
            f"confidence: {self._confidence}, D: {self._D})"
