"""
.. module:: suites
    :platform: Linux
    :synopsis: Monte Carlo identity suites checking that graph operators and
        T-expansions preserve expectations
"""
import math
import logging
import dataclasses
from concurrent.futures import ThreadPoolExecutor
from libbandgraph import BandGraphException
from libbandgraph import max_threads
from libbandgraph.coefficient import Coefficient
from libbandgraph.graph import GraphTerm
from libbandgraph.graph import GraphBuilder
from libbandgraph.graph import Expansion
from libbandgraph.graph import Label
from libbandgraph.graph import LIGHT
from libbandgraph.graph import ATOM_A
from libbandgraph.graph import ATOM_B1
from libbandgraph.graph import ATOM_B2
from libbandgraph.lattice import LatticeConfig
from libbandgraph.lattice import SpectralPoint
from libbandgraph.ensemble import ResolventDraw
from libbandgraph.ensemble import IdentityCheck
from libbandgraph.ensemble import T_X_YY
from libbandgraph.ensemble import t_variables
from libbandgraph.ensemble import mc_compare
from libbandgraph.evaluate import EvalContext
from libbandgraph.evaluate import evaluate
from libbandgraph.evaluate import evaluate_expansion_sample
from libbandgraph.operators import op_dot
from libbandgraph.operators import op_weight
from libbandgraph.operators import op_multi_edge
from libbandgraph.operators import op_gg
from libbandgraph.operators import op_ggbar
from libbandgraph.qexpand import q_expand
from libbandgraph.texpansion import TExpansion
from libbandgraph.texpansion import default_error_order
from libbandgraph.texpansion import seed_second_order
from libbandgraph.substitution import substitute_t_variable

LOGGER = logging.getLogger("bandgraph.suites")

OP_DOT = "dot"
OP_WEIGHT = "weight"
OP_MULTI_EDGE = "multi-edge"
OP_GG = "GG"
OP_GGBAR = "GGbar"
OP_QEXPAND = "Q-expansion"
OP_TSUB = "t-substitution"
SUITE_TEXP = "texp"
SUITE_PRESERVATION = "preservation"

OPERATORS = (
    OP_DOT,
    OP_WEIGHT,
    OP_MULTI_EDGE,
    OP_GG,
    OP_GGBAR,
    OP_QEXPAND,
    OP_TSUB,
)

SUITES = OPERATORS + (SUITE_TEXP, SUITE_PRESERVATION)

# relative size of a paired difference that is only rounding
ROUNDING = 1e-10

# names of the external atoms of the seed graphs
EXT_X = "x"
EXT_Y = "y"

# |m|^2
MM = Coefficient.monomial(1, m=1, mb=1)


class SuiteError(BandGraphException):
    """
    Raised when an identity suite is unknown or can't be evaluated.
    """


@dataclasses.dataclass(frozen=True)
class SeedCase:
    """
    A graph the identity of an operator is checked on. ``atom`` is the
    atom the operator acts at, when it needs one.
    """
    name: str
    graph: GraphTerm
    atom: int = None


class IdentityRow:
    """
    Outcome of an identity on one seed case. A paired difference made of
    rounding only is an exact identity, with zero z-score.
    """

    def __init__(self, case: str, check: IdentityCheck,
                 confidence: float = 3.0) -> None:
        self._case = case
        self._check = check
        self._confidence = confidence

    @property
    def case(self) -> str:
        """
        Name of the seed case.
        """
        return self._case

    @property
    def check(self) -> IdentityCheck:
        """
        Underlying comparison.
        """
        return self._check

    @property
    def exact(self) -> bool:
        """
        True if both sides agree sample by sample up to rounding.
        """
        diff = self._check.diff
        scale = max(1.0, abs(self._check.lhs.mean), abs(self._check.rhs.mean))
        spread = diff.stderr * math.sqrt(diff.samples)

        return abs(diff.mean) + spread <= ROUNDING * scale

    @property
    def zscore(self) -> float:
        """
        z-score of the paired difference.
        """
        if self.exact:
            return 0.0

        return self._check.zscore

    @property
    def passed(self) -> bool:
        """
        True if ``|z| <= confidence``.
        """
        return self.zscore <= self._confidence

    def to_row(self) -> dict:
        """
        CSV row of the identity.
        """
        lhs = complex(self._check.lhs.mean)
        rhs = complex(self._check.rhs.mean)
        return {
            "suite": self._check.name,
            "case": self._case,
            "lhs_re": lhs.real,
            "lhs_im": lhs.imag,
            "lhs_stderr": float(self._check.lhs.stderr),
            "rhs_re": rhs.real,
            "rhs_im": rhs.imag,
            "rhs_stderr": float(self._check.rhs.stderr),
            "zscore": self.zscore,
            "pass": self.passed,
        }

    def __repr__(self) -> str:
        return \
            f"IdentityRow(suite: '{self._check.name}', " \
            f"case: '{self._case}', zscore: {self.zscore:.3f})"


COLUMNS = [
    "suite", "case",
    "lhs_re", "lhs_im", "lhs_stderr",
    "rhs_re", "rhs_im", "rhs_stderr",
    "zscore", "pass",
]


def _builder() -> tuple:
    builder = GraphBuilder()
    x = builder.external(EXT_X)
    y = builder.external(EXT_Y)
    return builder, x, y


def _dot_cases() -> list:
    cases = []

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, y, charge=-1)
    cases.append(SeedCase("S_xa G_ay Gb_ay", builder.build()))

    builder, x, y = _builder()
    builder.G(x, y).G(x, y, charge=-1)
    cases.append(SeedCase("G_xy Gb_xy", builder.build()))

    builder, x, y = _builder()
    alpha = builder.internal()
    beta = builder.internal()
    builder.waved(x, alpha).waved(alpha, beta)
    builder.G(alpha, beta).G(beta, y, charge=-1)
    cases.append(SeedCase("S_xa S_ab G_ab Gb_by", builder.build()))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).dot(alpha, y, crossed=True)
    cases.append(SeedCase("S_xa G_ay 1(a!=y)", builder.build()))

    builder, x, y = _builder()
    alpha = builder.internal()
    beta = builder.internal()
    builder.waved(x, alpha).waved(x, beta)
    builder.G(alpha, beta).G(beta, alpha, charge=-1).weight(y)
    cases.append(SeedCase("S_xa S_xb G_ab Gb_ba G_yy", builder.build()))

    return cases


def _weight_cases() -> list:
    cases = []

    builder, x, _ = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).weight(alpha)
    cases.append(SeedCase("S_xa G_aa", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).weight(alpha, charge=-1).G(y, alpha)
    cases.append(SeedCase("S_xa Gb_aa G_ya", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).weight(alpha).G(alpha, y).G(alpha, y, charge=-1)
    cases.append(SeedCase("S_xa G_aa G_ay Gb_ay", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).weight(alpha, form=LIGHT).G(x, y)
    cases.append(SeedCase("S_xa (G_aa - m) G_xy", builder.build(), alpha))

    builder, x, _ = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).weight(alpha).weight(alpha, charge=-1)
    cases.append(SeedCase("S_xa |G_aa|^2", builder.build(), alpha))

    return cases


def _multi_edge_cases() -> list:
    cases = []

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, y, charge=-1)
    builder.G(y, alpha).G(y, alpha, charge=-1)
    cases.append(SeedCase("S_xa |G_ay|^2 |G_ya|^2", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, x)
    cases.append(SeedCase("S_xa G_ay G_ax", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, x, charge=-1).G(y, alpha)
    cases.append(SeedCase("S_xa G_ay Gb_ax G_ya", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y, charge=-1)
    cases.append(SeedCase("S_xa Gb_ay", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(y, alpha).G(x, alpha, charge=-1)
    cases.append(SeedCase("S_xa G_ya Gb_xa", builder.build(), alpha))

    return cases


def _gg_cases() -> list:
    cases = []

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(y, alpha)
    cases.append(SeedCase("S_xa G_ay G_ya", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(x, alpha)
    cases.append(SeedCase("S_xa G_ay G_xa", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y, charge=-1).G(y, alpha, charge=-1)
    cases.append(SeedCase("S_xa Gb_ay Gb_ya", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(y, alpha).G(x, y, charge=-1)
    cases.append(SeedCase("S_xa G_ay G_ya Gb_xy", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    beta = builder.internal()
    builder.waved(x, alpha).G(alpha, beta).G(beta, alpha).waved(beta, y)
    cases.append(SeedCase("S_xa G_ab G_ba S_by", builder.build(), alpha))

    return cases


def _ggbar_cases() -> list:
    cases = []

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, y, charge=-1)
    cases.append(SeedCase("S_xa G_ay Gb_ay", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, x, charge=-1)
    cases.append(SeedCase("S_xa G_ay Gb_ax", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(y, alpha).G(y, alpha, charge=-1)
    cases.append(SeedCase("S_xa G_ya Gb_ya", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, y, charge=-1).G(x, y)
    cases.append(SeedCase("S_xa G_ay Gb_ay G_xy", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    beta = builder.internal()
    builder.waved(x, alpha).G(alpha, beta).G(alpha, beta, charge=-1)
    builder.waved(beta, y)
    cases.append(SeedCase("S_xa G_ab Gb_ab S_by", builder.build(), alpha))

    return cases


def _q_cases() -> list:
    cases = []

    builder, x, y = _builder()
    alpha = builder.internal()
    label = Label("Q", alpha)
    builder.waved(x, alpha).G(alpha, y, pq=label)
    builder.G(alpha, y, charge=-1, pq=label).G(x, y)
    cases.append(SeedCase("G_xy Q_a(G_ay Gb_ay)", builder.build()))

    builder, x, y = _builder()
    alpha = builder.internal()
    label = Label("Q", alpha)
    builder.waved(x, alpha).G(alpha, y, pq=label).G(x, y, charge=-1)
    cases.append(SeedCase("Gb_xy Q_a(G_ay)", builder.build()))

    builder, x, y = _builder()
    alpha = builder.internal()
    label = Label("Q", alpha)
    builder.waved(x, alpha).weight(alpha, pq=label).G(y, x)
    cases.append(SeedCase("G_yx Q_a(G_aa)", builder.build()))

    builder, x, y = _builder()
    alpha = builder.internal()
    label = Label("Q", alpha)
    builder.waved(x, alpha).G(alpha, y, pq=label)
    builder.G(alpha, x, charge=-1, pq=label).weight(y)
    cases.append(SeedCase("G_yy Q_a(G_ay Gb_ax)", builder.build()))

    builder, x, y = _builder()
    alpha = builder.internal()
    label = Label("Q", alpha)
    builder.waved(x, alpha).G(alpha, y, pq=label)
    builder.G(alpha, y, charge=-1, pq=label).G(x, alpha)
    cases.append(SeedCase("G_xa Q_a(G_ay Gb_ay)", builder.build()))

    return cases


def _tsub_cases() -> list:
    cases = []

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, y, charge=-1)
    cases.append(SeedCase("S_xa G_ay Gb_ay", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, x, charge=-1)
    cases.append(SeedCase("S_xa G_ay Gb_ax", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(y, alpha).G(y, alpha, charge=-1)
    cases.append(SeedCase("S_xa G_ya Gb_ya", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, y, charge=-1).G(x, y)
    cases.append(SeedCase("S_xa G_ay Gb_ay G_xy", builder.build(), alpha))

    builder, x, y = _builder()
    alpha = builder.internal()
    builder.waved(x, alpha).G(alpha, y).G(alpha, y, charge=-1)
    builder.dot(alpha, y, crossed=True)
    cases.append(SeedCase("S_xa G_ay Gb_ay 1(a!=y)", builder.build(), alpha))

    return cases


_CASES = {
    OP_DOT: _dot_cases,
    OP_WEIGHT: _weight_cases,
    OP_MULTI_EDGE: _multi_edge_cases,
    OP_GG: _gg_cases,
    OP_GGBAR: _ggbar_cases,
    OP_QEXPAND: _q_cases,
    OP_TSUB: _tsub_cases,
}


def seed_cases(op_name: str) -> list:
    """
    Seed graphs of an operator suite.
    """
    if op_name not in _CASES:
        raise SuiteError(
            f"Unknown operator '{op_name}', choose from {list(OPERATORS)}")

    return _CASES[op_name]()


def apply_operator(
        op_name: str,
        case: SeedCase,
        error_order: int,
        lower: TExpansion = None) -> Expansion:
    """
    Expand a seed graph with an operator.
    """
    graph = case.graph

    if op_name == OP_DOT:
        return op_dot(graph)

    if op_name == OP_WEIGHT:
        return op_weight(graph, case.atom)

    if op_name == OP_MULTI_EDGE:
        return op_multi_edge(graph, case.atom)

    if op_name == OP_GG:
        return op_gg(graph, case.atom)

    if op_name == OP_GGBAR:
        return op_ggbar(graph, case.atom)

    if op_name == OP_QEXPAND:
        return q_expand(graph, error_order).expansion

    if op_name == OP_TSUB:
        lower = lower or seed_second_order(error_order)
        return substitute_t_variable(graph, case.atom, lower, error_order)

    raise SuiteError(f"Unknown operator '{op_name}'")


def default_externals(config: LatticeConfig) -> dict:
    """
    Sites of the external atoms of the seed graphs: ``x`` at the origin
    and ``y`` at distance ``W`` along the first axis.
    """
    site = [0] * config.d
    site[0] = min(int(round(config.W)), config.L // 2)
    return {EXT_X: 0, EXT_Y: config.index(site)}


class _GraphIdentity:
    """
    Both sides of ``E graph = E expansion`` on the samples of a seed
    stream.
    """

    def __init__(self, graph: GraphTerm, expansion: Expansion,
                 ctx: EvalContext, draw: ResolventDraw) -> None:
        self._graph = graph
        self._expansion = expansion
        self._ctx = ctx
        self._draw = draw

    def lhs(self, index: int) -> complex:
        return evaluate(
            self._graph, self._ctx.replace(resolvent=self._draw(index)))

    def rhs(self, index: int) -> complex:
        return evaluate_expansion_sample(
            self._expansion, self._ctx.replace(resolvent=self._draw(index)))


def identity_suite(
        op_name: str,
        config: LatticeConfig,
        point: SpectralPoint,
        n_samples: int,
        seed: int,
        **kwargs: dict) -> list:
    """
    Check ``E graph = E op(graph)`` on every seed graph of an operator,
    evaluating both sides on the same resolvent samples in expectation
    mode.

    :param error_order: error order of Q-expansions and substitutions
    :type error_order: int
    :param confidence: largest accepted z-score
    :type confidence: float
    :param externals: sites of the external atoms
    :type externals: dict
    :param inner_samples: resamplings used to estimate ``P_x``
    :type inner_samples: int
    :returns: list(IdentityRow)
    """
    error_order = kwargs.get("error_order", None) or default_error_order(2)
    confidence = kwargs.get("confidence", 3.0)
    externals = kwargs.get("externals", None) or default_externals(config)
    inner_samples = kwargs.get("inner_samples", 8)

    cases = seed_cases(op_name)
    lower = seed_second_order(error_order) if op_name == OP_TSUB else None

    LOGGER.info("Identity suite '%s' on %d seed graphs", op_name, len(cases))

    def _run(case: SeedCase) -> IdentityRow:
        expansion = apply_operator(op_name, case, error_order, lower)
        ctx = EvalContext(
            config,
            point,
            externals=externals,
            inner_samples=inner_samples)
        draw = ResolventDraw(config, point, seed)
        identity = _GraphIdentity(case.graph, expansion, ctx, draw)

        check = mc_compare(
            op_name, identity.lhs, identity.rhs, n_samples, seed=seed)
        row = IdentityRow(case.name, check, confidence)

        LOGGER.debug("%s on '%s': %d terms, %s",
                     op_name, case.name, len(expansion), row)

        return row

    with ThreadPoolExecutor(max_workers=max_threads()) as pool:
        return list(pool.map(_run, cases))


def texp_pairs(config: LatticeConfig, count: int) -> list:
    """
    ``count`` pairs ``(a, b)`` with ``a`` at the origin and ``b`` spread
    along the first axis.
    """
    if count < 1:
        raise SuiteError("at least one pair is required")

    half = config.L // 2
    pairs = []
    for index in range(count):
        site = [0] * config.d
        site[0] = (index * max(half // count, 1)) % config.L
        pairs.append((0, config.index(site)))

    return pairs


def texp_suite(
        texp: TExpansion,
        config: LatticeConfig,
        point: SpectralPoint,
        n_samples: int,
        seed: int,
        **kwargs: dict) -> list:
    """
    Check ``E T_a,bb = E (right hand side of texp)`` for several pairs
    ``(a, b)``. The left hand side is computed from the resolvent, the
    right hand side from the graphs, in expectation mode.

    :param pairs: list of ``(a, b)`` site pairs
    :type pairs: list
    :param confidence: largest accepted z-score
    :type confidence: float
    :returns: list(IdentityRow)
    """
    confidence = kwargs.get("confidence", 3.0)
    pairs = kwargs.get("pairs", None) or texp_pairs(config, 10)
    inner_samples = kwargs.get("inner_samples", 8)
    terms = texp.terms()

    LOGGER.info("T-expansion identity of order %d on %d pairs",
                texp.order, len(pairs))

    def _run(pair: tuple) -> IdentityRow:
        a, b = pair
        draw = ResolventDraw(config, point, seed)
        ctx = EvalContext(
            config,
            point,
            externals={ATOM_A: a, ATOM_B1: b, ATOM_B2: b},
            inner_samples=inner_samples)

        def lhs(index: int) -> complex:
            return t_variables(draw(index), T_X_YY, y1=b, y2=b)[a]

        def rhs(index: int) -> complex:
            return evaluate_expansion_sample(
                terms, ctx.replace(resolvent=draw(index)))

        check = mc_compare(
            f"{SUITE_TEXP} {texp.order}", lhs, rhs, n_samples, seed=seed)

        return IdentityRow(f"a={a} b={b}", check, confidence)

    with ThreadPoolExecutor(max_workers=max_threads()) as pool:
        return list(pool.map(_run, pairs))


def t_graph() -> GraphTerm:
    """
    ``T_a,b1b2 = |m|^2 sum_alpha s_a,alpha G_alpha,b1 Gbar_alpha,b2`` as a
    graph.
    """
    builder = GraphBuilder()
    a = builder.external(ATOM_A)
    b1 = builder.external(ATOM_B1)
    b2 = builder.external(ATOM_B2)
    alpha = builder.internal()
    builder.waved(a, alpha).G(alpha, b1).G(alpha, b2, charge=-1)

    return builder.build(MM)
