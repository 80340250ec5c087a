"""
.. module:: lattice
    :platform: Linux
    :synopsis: torus geometry, variance profile functions and spectral points
"""
import math
import logging
import typing
import numpy as np
from libbandgraph import BandGraphException

LOGGER = logging.getLogger("bandgraph.lattice")

# largest number of sites a kernel profile can be built on
MAX_PROFILE_SITES = 1 << 21


class LatticeError(BandGraphException):
    """
    Raised when the torus geometry or a spectral point is not valid.
    """


class ProfileFunction:
    """
    A symmetric smooth function ``psi`` defined on R^d, which generates the
    variance profile through its Fourier transform.
    """

    def __init__(
            self,
            name: str,
            evaluator: typing.Callable,
            c_psi: float) -> None:
        """
        :param name: name of the profile
        :type name: str
        :param evaluator: vectorized function taking an array of shape
            (..., d) and returning an array of shape (...)
        :type evaluator: Callable
        :param c_psi: constant of the quadratic cap
            ``psi(p) <= max(1 - c_psi |p|^2, 1 - c_psi)``
        :type c_psi: float
        """
        if not name:
            raise ValueError("name is empty")

        if not evaluator:
            raise ValueError("evaluator is empty")

        if c_psi <= 0 or c_psi > 1:
            raise ValueError("c_psi must be inside (0, 1]")

        self._name = name
        self._evaluator = evaluator
        self._c_psi = c_psi

    @property
    def name(self) -> str:
        """
        Name of the profile.
        """
        return self._name

    @property
    def c_psi(self) -> float:
        """
        Quadratic cap constant.
        """
        return self._c_psi

    def __call__(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(self._evaluator(np.asarray(p, dtype=float)))

    def check_admissible(
            self,
            d: int,
            radius: float = 8.0,
            points: int = 33,
            decay_bound: float = 1e3,
            max_power: int = 8) -> list:
        """
        Check ``psi`` on a uniform grid of ``[-radius, radius]^d``.
        :param d: dimension
        :type d: int
        :param radius: half side of the sampled box
        :type radius: float
        :param points: grid points per axis
        :type points: int
        :param decay_bound: bound for ``(1 + |p|)^k |psi(p)|``
        :type decay_bound: float
        :param max_power: largest decay power ``k`` being checked
        :type max_power: int
        :returns: list of violation messages, empty when admissible
        """
        axis = np.linspace(-radius, radius, points)
        mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
        values = self(mesh)
        norm2 = np.sum(mesh ** 2, axis=-1)

        violations = []

        origin = float(self(np.zeros(d)))
        if abs(origin - 1.0) > 1e-12:
            violations.append(f"psi(0) = {origin} != 1")

        if np.any(np.abs(values) > 1.0 + 1e-12):
            violations.append("|psi| > 1 on the grid")

        cap = np.maximum(1.0 - self._c_psi * norm2, 1.0 - self._c_psi)
        if np.any(values > cap + 1e-12):
            violations.append(
                f"psi exceeds the quadratic cap with c_psi={self._c_psi}")

        radial = 1.0 + np.sqrt(norm2)
        for power in range(max_power + 1):
            worst = float(np.max(radial ** power * np.abs(values)))
            if worst > decay_bound:
                violations.append(
                    f"(1+|p|)^{power}|psi| reaches {worst:.3e}")
                break

        return violations

    def __repr__(self) -> str:
        return f"ProfileFunction(name: '{self._name}', c_psi: {self._c_psi})"


def gaussian_profile() -> ProfileFunction:
    """
    The default profile ``psi(p) = exp(-|p|^2)``.
    """
    def _gaussian(p: np.ndarray) -> np.ndarray:
        return np.exp(-np.sum(p ** 2, axis=-1))

    return ProfileFunction("gaussian", _gaussian, 1.0 - math.exp(-1.0))


PROFILES = {
    "gaussian": gaussian_profile,
}


def get_profile(name: str) -> ProfileFunction:
    """
    Return the profile function registered with ``name``.
    """
    factory = PROFILES.get(name, None)
    if not factory:
        raise LatticeError(
            f"Unknown profile '{name}'. Available: {', '.join(PROFILES)}")

    return factory()


class LatticeConfig:
    """
    The torus Z_L^d with band width W. Sites are indexed by their residues
    0..L-1 along each axis, flattened in C order; the physical coordinate
    of a residue ``c`` is ``c`` if ``c <= L/2`` and ``c - L`` otherwise.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param d: dimension
        :type d: int
        :param L: side length, even
        :type L: int
        :param W: band width, ``1 <= W < L``
        :type W: float
        :param psi: profile function. Default is gaussian
        :type psi: ProfileFunction | str
        :param max_sites: largest N = L^d accepted
        :type max_sites: int
        """
        self._d = kwargs.get("d", 1)
        self._L = kwargs.get("L", None)
        self._W = kwargs.get("W", None)
        psi = kwargs.get("psi", None)
        max_sites = kwargs.get("max_sites", MAX_PROFILE_SITES)

        if not isinstance(self._d, (int, np.integer)) or self._d < 1:
            raise LatticeError(f"d must be a positive integer: {self._d}")

        if not isinstance(self._L, (int, np.integer)) or self._L < 2 or \
                self._L % 2 != 0:
            raise LatticeError(
                f"L must be an even positive integer: {self._L}")

        if self._W is None or self._W < 1 or self._W >= self._L:
            raise LatticeError(
                f"W must satisfy 1 <= W < L: W={self._W}, L={self._L}")

        self._d = int(self._d)
        self._L = int(self._L)
        self._W = float(self._W)

        if self.N > max_sites:
            raise LatticeError(
                f"N = L^d = {self.N} exceeds the budget of {max_sites} sites")

        if psi is None:
            psi = gaussian_profile()
        elif isinstance(psi, str):
            psi = get_profile(psi)

        self._psi = psi
        self._distances = None

    @property
    def d(self) -> int:
        """
        Dimension of the torus.
        """
        return self._d

    @property
    def L(self) -> int:
        # pylint: disable=invalid-name
        """
        Side length of the torus.
        """
        return self._L

    @property
    def W(self) -> float:
        # pylint: disable=invalid-name
        """
        Band width.
        """
        return self._W

    @property
    def N(self) -> int:
        # pylint: disable=invalid-name
        """
        Number of sites.
        """
        return self._L ** self._d

    @property
    def psi(self) -> ProfileFunction:
        """
        Profile function.
        """
        return self._psi

    @property
    def shape(self) -> tuple:
        """
        Shape of a displacement profile.
        """
        return (self._L,) * self._d

    def residues(self) -> np.ndarray:
        """
        Residue coordinates of all sites, shape (N, d).
        """
        idx = np.unravel_index(np.arange(self.N), self.shape)
        return np.stack(idx, axis=-1)

    def coordinates(self) -> np.ndarray:
        """
        Physical coordinates in (-L/2, L/2] of all sites, shape (N, d).
        """
        return self.to_physical(self.residues())

    def to_physical(self, residues: np.ndarray) -> np.ndarray:
        """
        Map residues 0..L-1 to representatives in (-L/2, L/2].
        """
        res = np.asarray(residues) % self._L
        return np.where(res > self._L // 2, res - self._L, res)

    def check_site(self, site: typing.Any) -> np.ndarray:
        """
        Validate a physical site and return it as an integer vector.
        """
        arr = np.atleast_1d(np.asarray(site))
        if arr.shape != (self._d,):
            raise LatticeError(
                f"site {site} has not dimension {self._d}")

        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise LatticeError(f"site {site} is not integer")

        arr = arr.astype(int)
        half = self._L // 2

        # -L/2 is accepted as an alias of L/2
        if np.any(arr < -half) or np.any(arr > half):
            raise LatticeError(
                f"site {site} is outside [-{half}, {half}]^{self._d}")

        return self.to_physical(arr)

    def index(self, site: typing.Any) -> int:
        """
        Flat index of a physical site.
        """
        arr = self.check_site(site)
        return int(np.ravel_multi_index(tuple(arr % self._L), self.shape))

    def site(self, index: int) -> np.ndarray:
        """
        Physical site of a flat index.
        """
        if index < 0 or index >= self.N:
            raise LatticeError(f"index {index} out of range")

        res = np.array(np.unravel_index(index, self.shape))
        return self.to_physical(res)

    def norm(self, displacement: typing.Any) -> np.ndarray:
        """
        The l-infinity torus norm of a displacement, or of the last axis of
        an array of displacements.
        """
        phys = self.to_physical(np.asarray(displacement))
        return np.max(np.abs(phys), axis=-1)

    def distance_profile(self) -> np.ndarray:
        """
        ``||a||_L`` for every displacement in profile (FFT) order.
        """
        return self.norm(self.residues()).reshape(self.shape)

    def distance_matrix(self) -> np.ndarray:
        """
        ``||x - y||_L`` for all pairs of sites, shape (N, N).
        """
        if self._distances is not None:
            return self._distances

        res = self.residues()
        dist = np.zeros((self.N, self.N), dtype=int)

        for axis in range(self._d):
            coord = res[:, axis]
            diff = np.abs(self.to_physical(coord[:, None] - coord[None, :]))
            np.maximum(dist, diff, out=dist)

        dist.flags.writeable = False
        self._distances = dist

        return dist

    def frequencies(self) -> np.ndarray:
        """
        Dual torus grid ``p = 2 pi k / L`` in FFT order, shape
        (L, ..., L, d).
        """
        axis = 2.0 * np.pi * np.fft.fftfreq(self._L, d=1.0)
        mesh = np.meshgrid(*([axis] * self._d), indexing="ij")
        return np.stack(mesh, axis=-1)

    def lexicographic(self, profile: np.ndarray) -> np.ndarray:
        """
        Reorder a profile from FFT order into lexicographic displacement
        order, where every axis runs over -L/2+1, ..., L/2.
        """
        shift = -(self._L // 2 + 1)
        return np.roll(profile, [shift] * self._d, axis=tuple(range(self._d)))

    def to_dict(self) -> dict:
        """
        Configuration snapshot.
        """
        return {
            "d": self._d,
            "L": self._L,
            "W": self._W,
            "psi": self._psi.name,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatticeConfig):
            return False

        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash((self._d, self._L, self._W, self._psi.name))

    def __repr__(self) -> str:
        return \
            f"LatticeConfig(d: {self._d}, L: {self._L}, W: {self._W}, " \
            f"psi: '{self._psi.name}')"


def torus_displacement(
        x: typing.Any,
        y: typing.Any,
        config: LatticeConfig) -> np.ndarray:
    """
    Return ``[x - y]_L`` with every coordinate in (-L/2, L/2].
    """
    xarr = config.check_site(x)
    yarr = config.check_site(y)

    return config.to_physical(xarr - yarr)


def semicircle_m(z: complex) -> complex:
    """
    Stieltjes transform of the semicircle law: the root of
    ``m^2 + z m + 1 = 0`` lying in the upper half plane.
    """
    z = complex(z)
    if z.imag <= 0:
        raise LatticeError(f"Im z must be positive: z={z}")

    root = np.sqrt(complex(z * z - 4.0))
    first = (-z + root) / 2.0
    second = (-z - root) / 2.0

    if first.imag > 0:
        return complex(first)

    return complex(second)


class SpectralPoint:
    """
    A spectral parameter ``z = E + i eta`` in the bulk ``|E| < 2 - kappa``.
    """

    def __init__(
            self,
            E: float = 0.0,
            eta: float = 1.0,
            kappa: float = 0.1) -> None:
        # pylint: disable=invalid-name
        if eta <= 0:
            raise LatticeError(f"eta must be positive: {eta}")

        if kappa <= 0 or kappa >= 2:
            raise LatticeError(f"kappa must be inside (0, 2): {kappa}")

        if abs(E) >= 2 - kappa:
            raise LatticeError(
                f"E={E} is outside the bulk (-{2 - kappa}, {2 - kappa})")

        self._E = float(E)
        self._eta = float(eta)
        self._kappa = float(kappa)
        self._m = semicircle_m(self.z)

    @property
    def E(self) -> float:
        # pylint: disable=invalid-name
        """
        Real part of z.
        """
        return self._E

    @property
    def eta(self) -> float:
        """
        Imaginary part of z.
        """
        return self._eta

    @property
    def kappa(self) -> float:
        """
        Bulk margin.
        """
        return self._kappa

    @property
    def z(self) -> complex:
        """
        Spectral parameter.
        """
        return complex(self._E, self._eta)

    @property
    def m(self) -> complex:
        """
        Cached ``m(z)``.
        """
        return self._m

    def conjugate_m(self) -> complex:
        """
        ``m(z)`` conjugated, i.e. the value at ``z`` bar.
        """
        return self._m.conjugate()

    def to_dict(self) -> dict:
        """
        Spectral point snapshot.
        """
        return {
            "E": self._E,
            "eta": self._eta,
            "kappa": self._kappa,
        }

    def __repr__(self) -> str:
        return f"SpectralPoint(E: {self._E}, eta: {self._eta})"
