"""
.. module:: config
    :platform: Linux
    :synopsis: run configuration, read from a JSON file and overridden by
        the command line
"""
import copy
import json
import logging
from libbandgraph import BandGraphException
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import LatticeError
from libbandgraph.lattice import SpectralPoint

LOGGER = logging.getLogger("bandgraph.config")

# largest seed accepted, seeds are unsigned 64 bits integers
MAX_SEED = 2 ** 64 - 1

DEFAULTS = {
    "lattice": {
        "d": 1,
        "L": 32,
        "W": 8,
        "psi": "gaussian",
    },
    "E": 0.0,
    "kappa": 0.1,
    "eta": [1.0],
    "seed": 0,
    "samples": 100,
    "order": 2,
    "error_order": None,
    "op": None,
    "tau": 0.5,
    "confidence": 3.0,
    "max_graphs": 200000,
    "inner_samples": 8,
    "law_constant": 10.0,
}


class ConfigError(BandGraphException):
    """
    Raised when the run configuration is not valid.
    """


def _merge(base: dict, overrides: dict) -> dict:
    result = copy.deepcopy(base)
    for key, value in overrides.items():
        if value is None:
            continue

        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = _merge(result[key], value)
        else:
            result[key] = value

    return result


def load_config(path: str) -> dict:
    """
    Read a JSON configuration file.
    """
    try:
        with open(path, 'r', encoding='utf-8') as data:
            content = json.load(data)
    except OSError as err:
        raise ConfigError(f"Can't read '{path}': {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"'{path}' is not valid JSON: {err}") from err

    if not isinstance(content, dict):
        raise ConfigError(f"'{path}' doesn't contain a JSON object")

    unknown = set(content) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}")

    return content


class RunConfig:
    """
    Configuration of a single command run. The snapshot returned by
    ``to_dict`` is everything a command depends on.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param lattice: torus parameters ``d``, ``L``, ``W``, ``psi``
        :type lattice: dict
        :param E: real part of the spectral parameter
        :type E: float
        :param kappa: bulk margin
        :type kappa: float
        :param eta: imaginary parts of the spectral parameter
        :type eta: list(float)
        :param seed: root seed of the random streams
        :type seed: int
        :param samples: number of Monte Carlo samples
        :type samples: int
        :param order: expansion order n
        :type order: int
        :param error_order: error order D
        :type error_order: int
        :param op: operator or identity verified by ``verify``
        :type op: str
        :param tau: exponent of the ``W^tau`` tolerance
        :type tau: float
        """
        self._data = _merge(DEFAULTS, kwargs)
        self._check()

        self._lattice = None
        self._points = None

    def _check(self) -> None:
        data = self._data

        etas = data["eta"]
        if isinstance(etas, (int, float)):
            etas = [etas]
            data["eta"] = etas

        if not etas:
            raise ConfigError("at least one eta is required")

        data["eta"] = [float(eta) for eta in etas]

        seed = data["seed"]
        if not isinstance(seed, int) or seed < 0 or seed > MAX_SEED:
            raise ConfigError(f"seed must be an unsigned 64 bits integer: {seed}")

        if not isinstance(data["samples"], int) or data["samples"] < 2:
            raise ConfigError(f"samples must be at least 2: {data['samples']}")

        if not isinstance(data["order"], int) or data["order"] < 2:
            raise ConfigError(f"order must be at least 2: {data['order']}")

        error_order = data["error_order"]
        if error_order is not None and \
                (not isinstance(error_order, int) or error_order < data["order"]):
            raise ConfigError(
                f"error order must be an integer >= order: {error_order}")

        if data["tau"] <= 0:
            raise ConfigError(f"tau must be positive: {data['tau']}")

    @property
    def lattice(self) -> LatticeConfig:
        """
        Torus geometry.
        """
        if self._lattice is None:
            try:
                self._lattice = LatticeConfig(**self._data["lattice"])
            except LatticeError as err:
                raise ConfigError(str(err)) from err

        return self._lattice

    @property
    def points(self) -> list:
        """
        Spectral points, one per eta, in the given order.
        """
        if self._points is None:
            try:
                self._points = [
                    SpectralPoint(
                        E=self._data["E"],
                        eta=eta,
                        kappa=self._data["kappa"])
                    for eta in self._data["eta"]
                ]
            except LatticeError as err:
                raise ConfigError(str(err)) from err

        return self._points

    @property
    def seed(self) -> int:
        """
        Root seed.
        """
        return self._data["seed"]

    @property
    def samples(self) -> int:
        """
        Number of Monte Carlo samples.
        """
        return self._data["samples"]

    @property
    def order(self) -> int:
        """
        Expansion order.
        """
        return self._data["order"]

    @property
    def error_order(self) -> int:
        """
        Error order, None for the default ``2 n + 4``.
        """
        return self._data["error_order"]

    @property
    def op(self) -> str:
        """
        Name of the verified operator.
        """
        return self._data["op"]

    @property
    def tau(self) -> float:
        """
        Exponent of the ``W^tau`` tolerance.
        """
        return self._data["tau"]

    def get(self, key: str) -> object:
        """
        Any other configuration value.
        """
        if key not in self._data:
            raise ConfigError(f"Unknown configuration key '{key}'")

        return self._data[key]

    def to_dict(self) -> dict:
        """
        Snapshot of the configuration.
        """
        return copy.deepcopy(self._data)

    def __repr__(self) -> str:
        return \
            f"RunConfig(lattice: {self._data['lattice']}, " \
            f"eta: {self._data['eta']}, seed: {self._data['seed']}, " \
            f"samples: {self._data['samples']}, order: {self._data['order']})"
