"""
Unittests for config module.
"""
import json
import pytest
from libbandgraph.config import DEFAULTS
from libbandgraph.config import ConfigError
from libbandgraph.config import RunConfig
from libbandgraph.config import load_config


class TestConfig:
    """
    Test run configuration.
    """

    def test_defaults(self):
        """
        Test default configuration.
        """
        config = RunConfig()

        assert config.seed == DEFAULTS["seed"]
        assert config.samples == DEFAULTS["samples"]
        assert config.order == 2
        assert config.error_order is None
        assert config.lattice.L == 32
        assert [p.eta for p in config.points] == [1.0]

    def test_nested_merge(self):
        """
        Test that lattice values are merged with defaults.
        """
        config = RunConfig(lattice={"L": 16})

        assert config.lattice.L == 16
        assert config.lattice.W == 8
        assert config.to_dict()["lattice"]["psi"] == "gaussian"

    def test_none_is_ignored(self):
        """
        Test that None values keep the defaults.
        """
        config = RunConfig(seed=None, samples=None)
        assert config.seed == 0
        assert config.samples == 100

    def test_scalar_eta(self):
        """
        Test a single eta is accepted.
        """
        config = RunConfig(eta=0.5)
        assert config.to_dict()["eta"] == [0.5]

    @pytest.mark.parametrize("params", [
        {"eta": []},
        {"seed": -1},
        {"seed": 2 ** 64},
        {"samples": 1},
        {"order": 1},
        {"order": 3, "error_order": 2},
        {"tau": 0.0},
    ])
    def test_invalid(self, params):
        """
        Test configuration validation.
        """
        with pytest.raises(ConfigError):
            RunConfig(**params)

    def test_invalid_lattice(self):
        """
        Test lattice errors are configuration errors.
        """
        config = RunConfig(lattice={"L": 7})
        with pytest.raises(ConfigError):
            _ = config.lattice

    def test_invalid_eta(self):
        """
        Test spectral point errors are configuration errors.
        """
        config = RunConfig(eta=[-1.0])
        with pytest.raises(ConfigError):
            _ = config.points

    def test_get(self):
        """
        Test generic configuration values.
        """
        config = RunConfig(confidence=4.0)
        assert config.get("confidence") == 4.0

        with pytest.raises(ConfigError):
            config.get("unknown")

    def test_load_config(self, tmpdir):
        """
        Test reading a configuration file.
        """
        path = tmpdir / "config.json"
        path.write(json.dumps({"lattice": {"L": 16, "W": 4}, "seed": 3}))

        data = load_config(str(path))
        config = RunConfig(**data)

        assert config.seed == 3
        assert config.lattice.W == 4

    def test_load_config_errors(self, tmpdir):
        """
        Test reading broken configuration files.
        """
        with pytest.raises(ConfigError):
            load_config(str(tmpdir / "missing.json"))

        broken = tmpdir / "broken.json"
        broken.write("{")
        with pytest.raises(ConfigError):
            load_config(str(broken))

        array = tmpdir / "array.json"
        array.write("[]")
        with pytest.raises(ConfigError):
            load_config(str(array))

        unknown = tmpdir / "unknown.json"
        unknown.write(json.dumps({"foo": 1}))
        with pytest.raises(ConfigError):
            load_config(str(unknown))
