"""
Unittests for kernels module.
"""
import numpy as np
import pytest
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import SpectralPoint
from libbandgraph.kernels import KernelError
from libbandgraph.kernels import DivergenceError
from libbandgraph.kernels import KernelTable
from libbandgraph.kernels import SelfEnergyKernel
from libbandgraph.kernels import build_variance_profile
from libbandgraph.kernels import chain_label
from libbandgraph.kernels import kernel_B
from libbandgraph.kernels import kernel_diagnostics
from libbandgraph.kernels import kernel_s_pm
from libbandgraph.kernels import kernel_theta
from libbandgraph.kernels import labelled_diffusive_chain
from libbandgraph.kernels import renormalized_theta


@pytest.fixture
def config():
    """
    Small one dimensional torus.
    """
    yield LatticeConfig(d=1, L=16, W=2)


@pytest.fixture
def point():
    """
    Spectral point z = i.
    """
    yield SpectralPoint(E=0.0, eta=1.0)


class TestKernels:
    """
    Test deterministic kernels.
    """

    def test_table_errors(self, config):
        """
        Test table validation.
        """
        with pytest.raises(KernelError):
            KernelTable(config, np.zeros(config.shape), "unknown")

        with pytest.raises(KernelError):
            KernelTable(config, np.zeros(8), "S")

    def test_table_read_only(self, config):
        """
        Test tables are immutable.
        """
        table = build_variance_profile(config)
        with pytest.raises(ValueError):
            table.values[0] = 1.0

    @pytest.mark.parametrize("lattice", [
        LatticeConfig(d=1, L=16, W=2),
        LatticeConfig(d=2, L=8, W=1.5),
    ])
    def test_variance_profile(self, lattice):
        """
        Test variance profile is a symmetric probability distribution.
        """
        table = build_variance_profile(lattice)

        assert abs(table.row_sum - 1.0) < 1e-12
        assert table.values.real.min() >= 0.0
        assert table.evenness() < 1e-12
        assert np.allclose(table.matrix(), table.matrix().T)

    def test_apply(self, config):
        """
        Test convolution agrees with the dense matrix product.
        """
        table = build_variance_profile(config)
        vectors = np.random.default_rng(0).normal(size=(config.N, 3))

        assert np.allclose(table.apply(vectors), table.matrix() @ vectors)

    def test_entry(self, config):
        """
        Test entries depend only on the displacement.
        """
        table = build_variance_profile(config)
        assert table.entry([3], [1]) == table([2])
        assert table.entry([-8], [7]) == table([1])

    def test_theta(self, config, point):
        """
        Test Theta against its dense definition and its row sum.
        """
        s_mat = build_variance_profile(config).matrix().real
        mm = abs(point.m) ** 2
        expected = mm * s_mat @ np.linalg.inv(np.eye(config.N) - mm * s_mat)

        theta = kernel_theta(config, point)

        assert np.allclose(theta.matrix(), expected, atol=1e-12)
        assert abs(theta.row_sum - point.m.imag / point.eta) < 1e-10
        assert theta.label == (2, ())

    def test_s_pm(self, config, point):
        """
        Test S+ against its dense definition and S- as its conjugate.
        """
        s_mat = build_variance_profile(config).matrix().real
        m2 = point.m ** 2
        expected = m2 * s_mat @ np.linalg.inv(np.eye(config.N) - m2 * s_mat)

        plus, minus = kernel_s_pm(config, point)

        assert np.allclose(plus.matrix(), expected, atol=1e-12)
        assert np.array_equal(minus.values, plus.values.conj())

    def test_b(self, config):
        """
        Test B in one dimension is W^-2 (|a| + W).
        """
        table = kernel_B(config)
        assert abs(table([0]) - config.W ** -2 * config.W) < 1e-15
        assert abs(table([3]) - config.W ** -2 * (3 + config.W)) < 1e-15

    def test_chain_label(self):
        """
        Test chain labels.
        """
        assert chain_label([]) == (2, ())
        assert chain_label([4]) == (4, (4,))
        assert chain_label([4, 6]) == (8, (4, 6))

        with pytest.raises(KernelError):
            chain_label([3])

    def test_labelled_chain(self, config, point):
        """
        Test a chain with one self-energy.
        """
        theta = kernel_theta(config, point)
        values = np.zeros(config.shape)
        values[0] = 0.1
        energy = SelfEnergyKernel(
            4, table=KernelTable(config, values, "self-energy"))

        chain = labelled_diffusive_chain(config, point, [energy])

        expected = theta.matrix() @ (0.1 * theta.matrix())
        assert np.allclose(chain.matrix(), expected, atol=1e-12)
        assert chain.label == (4, (4,))

        empty = labelled_diffusive_chain(config, point, [])
        assert empty.label == (2, ())
        assert np.array_equal(empty.values, theta.values)

    def test_chain_not_evaluated(self, config, point):
        """
        Test chains need evaluated self-energies.
        """
        with pytest.raises(KernelError):
            labelled_diffusive_chain(config, point, [SelfEnergyKernel(4)])

    def test_renormalized_theta(self, config, point):
        """
        Test the renormalized diffusive kernel and its tail.
        """
        values = np.zeros(config.shape)
        values[0] = 0.1
        sigma = KernelTable(config, values, "self-energy")

        exact, tail = renormalized_theta(config, point, sigma, 3)

        theta = kernel_theta(config, point).matrix()
        sig = sigma.matrix()
        expected = np.linalg.inv(np.eye(config.N) - theta @ sig) @ theta

        assert np.allclose(exact.matrix(), expected, atol=1e-12)

        truncated = sum(
            np.linalg.matrix_power(theta @ sig, k) @ theta for k in range(4))
        assert np.allclose(tail.matrix(), expected - truncated, atol=1e-12)

    def test_renormalized_divergence(self, config, point):
        """
        Test a too large self-energy is rejected.
        """
        values = np.zeros(config.shape)
        values[0] = 10.0
        sigma = KernelTable(config, values, "self-energy")

        with pytest.raises(DivergenceError):
            renormalized_theta(config, point, sigma, 2)

    def test_diagnostics(self, config, point):
        """
        Test hard kernel checks pass.
        """
        checks = kernel_diagnostics(config, point)
        names = [check.name for check in checks]

        assert "theta_row_sum" in names
        for check in checks:
            if check.hard:
                assert check.passed, check

    def test_to_dict(self, config, point):
        """
        Test kernel export is in lexicographic order.
        """
        data = kernel_theta(config, point).to_dict()

        assert data["kind"] == "theta"
        assert data["z"] == [0.0, 1.0]
        assert len(data["profile"]) == config.N
        assert data["label"] == [2, []]

        # zero displacement sits at index L/2 - 1
        theta = kernel_theta(config, point)
        assert data["profile"][config.L // 2 - 1][0] == theta([0]).real
