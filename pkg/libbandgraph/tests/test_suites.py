"""
Unittests for suites module.
"""
import pytest
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import SpectralPoint
from libbandgraph.ensemble import ResolventDraw
from libbandgraph.ensemble import T_X_YY
from libbandgraph.ensemble import mc_compare
from libbandgraph.ensemble import mc_expectation
from libbandgraph.ensemble import t_variables
from libbandgraph.evaluate import EvalContext
from libbandgraph.evaluate import PQ_RESAMPLE
from libbandgraph.evaluate import evaluate
from libbandgraph.graph import ATOM_A
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2
from libbandgraph.graph import Label
from libbandgraph.texpansion import seed_second_order
from libbandgraph.suites import COLUMNS
from libbandgraph.suites import EXT_X
from libbandgraph.suites import EXT_Y
from libbandgraph.suites import OPERATORS
from libbandgraph.suites import OP_DOT
from libbandgraph.suites import OP_WEIGHT
from libbandgraph.suites import OP_MULTI_EDGE
from libbandgraph.suites import OP_GG
from libbandgraph.suites import OP_GGBAR
from libbandgraph.suites import OP_QEXPAND
from libbandgraph.suites import OP_TSUB
from libbandgraph.suites import IdentityRow
from libbandgraph.suites import SeedCase
from libbandgraph.suites import SuiteError
from libbandgraph.suites import apply_operator
from libbandgraph.suites import default_externals
from libbandgraph.suites import identity_suite
from libbandgraph.suites import seed_cases
from libbandgraph.suites import t_graph
from libbandgraph.suites import texp_pairs
from libbandgraph.suites import texp_suite


@pytest.fixture
def config():
    """
    Small one dimensional torus.
    """
    yield LatticeConfig(d=1, L=16, W=3)


@pytest.fixture
def point():
    """
    Spectral point in the bulk.
    """
    yield SpectralPoint(E=0.2, eta=0.5)


class TestSeedCases:
    """
    Test the seed graphs of the operator suites.
    """

    def test_counts(self):
        """
        Test every operator has five seed graphs with unique names.
        """
        for name in OPERATORS:
            cases = seed_cases(name)
            assert len(cases) == 5
            assert len({case.name for case in cases}) == 5

    def test_unknown(self):
        """
        Test unknown operators.
        """
        with pytest.raises(SuiteError):
            seed_cases("unknown")

        case = SeedCase("dummy", t_graph())
        with pytest.raises(SuiteError):
            apply_operator("unknown", case, 8)

    def test_atoms(self):
        """
        Test local operators act at an internal atom.
        """
        for name in OPERATORS:
            for case in seed_cases(name):
                if case.atom is None:
                    continue

                assert not case.graph.is_external(case.atom)


class TestIdentityRow:
    """
    Test identity rows.
    """

    def test_exact(self):
        """
        Test equal sides give an exact identity.
        """
        check = mc_compare("same", lambda i: i * 1j, lambda i: i * 1j, 4)
        row = IdentityRow("case", check)

        assert row.exact
        assert row.zscore == 0.0
        assert row.passed
        assert list(row.to_row()) == COLUMNS
        assert row.to_row()["pass"]

    def test_shifted(self):
        """
        Test a constant difference fails.
        """
        check = mc_compare("shift", lambda i: i, lambda i: i + 1, 4)
        row = IdentityRow("case", check)

        assert not row.exact
        assert not row.passed
        assert row.to_row()["lhs_re"] == pytest.approx(1.5)
        assert row.to_row()["rhs_re"] == pytest.approx(2.5)


class TestSuites:
    """
    Test Monte Carlo identity suites.
    """

    def test_default_externals(self, config):
        """
        Test the external sites of the seed graphs.
        """
        sites = default_externals(config)
        assert sites == {EXT_X: 0, EXT_Y: config.index([3])}

    def test_texp_pairs(self, config):
        """
        Test pairs spread along the first axis.
        """
        pairs = texp_pairs(config, 4)

        assert len(pairs) == 4
        assert all(a == 0 for a, _ in pairs)
        assert pairs[1][1] == config.index([2])

        with pytest.raises(SuiteError):
            texp_pairs(config, 0)

    def test_t_graph(self, config, point):
        """
        Test the T-variable graph against the resolvent.
        """
        res = ResolventDraw(config, point, 11)(0)
        ctx = EvalContext(
            config,
            point,
            resolvent=res,
            externals={ATOM_A: 1, ATOM_B1: 5, ATOM_B2: 5})

        expected = t_variables(res, T_X_YY, 5, 5)[1]
        assert evaluate(t_graph(), ctx) == pytest.approx(expected)

    def test_dot_suite(self, config, point):
        """
        Test the dotted edge partition is exact sample by sample.
        """
        rows = identity_suite(OP_DOT, config, point, 3, 5)

        assert len(rows) == 5
        for row in rows:
            assert row.exact
            assert row.passed

    @pytest.mark.parametrize("op_name", [
        OP_DOT,
        OP_WEIGHT,
        OP_MULTI_EDGE,
        OP_GG,
        OP_GGBAR,
    ])
    def test_local_operators(self, config, point, op_name):
        """
        Test local operators keep the expected value of every seed graph.
        """
        rows = identity_suite(op_name, config, point, 20, 7, confidence=4.0)

        assert len(rows) == 5
        for row in rows:
            assert row.passed, row

    @pytest.mark.slow
    @pytest.mark.parametrize("op_name", [OP_QEXPAND, OP_TSUB])
    def test_global_operators(self, config, point, op_name):
        """
        Test Q-expansions and T-variable substitutions keep the expected
        value of every seed graph.
        """
        rows = identity_suite(
            op_name, config, point, 20, 7,
            error_order=8,
            confidence=4.0)

        assert len(rows) == 5
        for row in rows:
            assert row.passed, row

    def test_second_order(self, config, point):
        """
        Test the second order T-expansion against the T-variables of the
        resolvent.
        """
        texp = seed_second_order(8)
        rows = texp_suite(
            texp, config, point, 40, 13,
            pairs=texp_pairs(config, 4),
            confidence=4.0)

        assert len(rows) == 4
        for row in rows:
            assert row.passed, row


class TestQGraphs:
    """
    Test the expected value of Q-graphs.
    """

    @staticmethod
    def q_graphs():
        """
        The Q-expansion seed graphs with every random factor labelled by
        ``Q`` at the seed atom.
        """
        graphs = []
        for case in seed_cases(OP_QEXPAND):
            atom = next(iter(case.graph.labels())).atom
            graphs.append(
                case.graph.strip_labels().label_random(Label("Q", atom)))

        return graphs

    def test_expectation(self, config, point):
        """
        Test Q-graphs are exactly zero in expectation mode.
        """
        ctx = EvalContext(
            config,
            point,
            resolvent=ResolventDraw(config, point, 5)(0),
            externals=default_externals(config))

        graphs = self.q_graphs()
        assert len(graphs) == 5
        for graph in graphs:
            assert evaluate(graph, ctx) == 0

    def test_resample(self, config, point):
        """
        Test the resampled estimate of Q-graphs averages to zero.
        """
        draw = ResolventDraw(config, point, 5)
        ctx = EvalContext(
            config,
            point,
            externals=default_externals(config),
            pq_mode=PQ_RESAMPLE,
            inner_samples=4)

        for graph in self.q_graphs():
            result = mc_expectation(
                lambda i, g=graph: evaluate(
                    g, ctx.replace(resolvent=draw(i))),
                20,
                seed=5)

            assert abs(result.mean) <= 4.0 * result.stderr + 1e-12, graph
