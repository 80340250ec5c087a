"""
.. module:: locallaw
    :platform: Linux
    :synopsis: command collecting distance binned local law statistics
        over a decreasing sequence of eta
"""
import math
import numpy as np
import libbandgraph
from libbandgraph.command import Command
from libbandgraph.config import RunConfig
from libbandgraph.export import ReportWriter
from libbandgraph.results import CommandResults
from libbandgraph.results import check_le
from libbandgraph.lattice import SpectralPoint
from libbandgraph.ensemble import ResolventDraw
from libbandgraph.diagnostics import LocalLawStatistics
from libbandgraph.diagnostics import a_matrix
from libbandgraph.diagnostics import a_matrix_bound
from libbandgraph.diagnostics import eta_monotonicity
from libbandgraph.diagnostics import g_vs_t_fraction

# relative tolerance of the Ward identity
WARD_TOLERANCE = 1e-10

# largest accepted violation of the eta monotonicity
MONOTONICITY_TOLERANCE = 1e-10

# largest accepted negative eigenvalue of the A matrix
SPECTRUM_TOLERANCE = 1e-10

# largest log-log slope magnitude of the binned ratios
FLAT_SLOPE = 0.5

COLUMNS = ["eta", "distance", "g_ratio", "t_ratio", "samples"]


def _law_sweep(
        config: RunConfig,
        point: SpectralPoint,
        samples: int) -> dict:
    """
    Statistics of one spectral point.
    """
    lattice = config.lattice
    draw = ResolventDraw(lattice, point, config.seed)
    stats = LocalLawStatistics(lattice)

    ward = 0.0
    fractions = []
    diagonal = []
    for index in range(samples):
        res = draw(index)
        ward = max(ward, res.ward_residual())
        stats.add(res)
        fractions.append(g_vs_t_fraction(res, config.tau))
        diagonal.append(
            float(np.median(np.abs(np.diag(res.G) - point.m) ** 2)))

    return {
        "stats": stats,
        "ward": ward,
        "fraction": float(np.mean(fractions)),
        "diagonal": float(np.median(diagonal)),
    }


def _a_matrix_checks(
        config: RunConfig,
        point: SpectralPoint,
        radius: float) -> tuple:
    lattice = config.lattice
    res = ResolventDraw(lattice, point, config.seed)(0)
    report = a_matrix(res, 0, radius)

    tag = f"eta={point.eta:g}"
    frobenius = float(np.sum(np.abs(report.matrix) ** 2))
    square = report.traces[1]

    checks = [
        check_le(f"A hermitian {tag}", report.hermitian_residual(), 1e-12),
        check_le(
            f"A nonnegative {tag}",
            -report.min_eigenvalue,
            SPECTRUM_TOLERANCE),
        check_le(
            f"A trace square {tag}",
            abs(square - frobenius) / max(frobenius, 1.0),
            1e-10,
            details="tr(A^2) against the Frobenius norm"),
    ]

    ratios = {
        f"A trace ratio p={power} {tag}":
            value / a_matrix_bound(lattice, radius, power)
        for power, value in report.traces.items()
    }

    return checks, ratios


class LocalLawCommand(Command):
    """
    For every eta, from the largest to the smallest, accumulate the
    distance binned medians of ``|G_xy - m delta_xy|^2 / B_xy`` and
    ``T_xy / B_xy``. The Ward identity and the monotonicity of
    ``eta Im G_yy`` are exact checks, the size and flatness of the ratios
    are calibrated diagnostics.
    """

    @property
    def name(self) -> str:
        return "locallaw"

    @property
    def description(self) -> str:
        return "Local law statistics over a decreasing eta grid"

    @property
    def config_help(self) -> dict:
        return {
            "radius": "box radius of the A matrix, W <= radius <= L/2 "
                      "(default: W)",
        }

    async def run(
            self,
            config: RunConfig,
            writer: ReportWriter) -> CommandResults:
        lattice = config.lattice
        constant = config.get("law_constant")
        points = sorted(config.points, key=lambda p: p.eta, reverse=True)
        radius = self.param("radius", lattice.W, float)

        rows = []
        checks = []
        summary = {}

        for point in points:
            tag = f"eta={point.eta:g}"
            await self.progress(f"Local law at {point}")

            found = await libbandgraph.to_thread(
                _law_sweep, config, point, config.samples)
            stats = found["stats"]

            for row in stats.rows():
                row["eta"] = point.eta
                rows.append(row)

            median = stats.median_offdiagonal()
            slope = stats.slope(2 * lattice.W, lattice.L / 4)

            checks.append(check_le(
                f"ward {tag}", found["ward"], WARD_TOLERANCE))
            checks.append(check_le(
                f"median ratio {tag}",
                median,
                constant,
                hard=False,
                details="median off-diagonal |G - m|^2 / B"))

            if not math.isnan(slope):
                checks.append(check_le(
                    f"flatness {tag}",
                    abs(slope),
                    FLAT_SLOPE,
                    hard=False,
                    details=f"log-log slope over [2W, L/4] is {slope:.17g}"))

            checks.append(check_le(
                f"diagonal {tag}",
                found["diagonal"],
                lattice.W ** (-lattice.d + config.tau),
                hard=False,
                details="median |G_xx - m|^2 against W^(-d + tau)"))

            a_checks, ratios = await libbandgraph.to_thread(
                _a_matrix_checks, config, point, radius)
            checks.extend(a_checks)
            summary.update(ratios)

            summary[f"median {tag}"] = median
            summary[f"slope {tag}"] = slope
            summary[f"G above T fraction {tag}"] = found["fraction"]

        for wider, narrower in zip(points, points[1:]):
            sample = ResolventDraw(lattice, narrower, config.seed)(0).sample
            violation = await libbandgraph.to_thread(
                eta_monotonicity, sample, narrower, wider.eta)

            checks.append(check_le(
                f"eta monotonicity {narrower.eta:g}/{wider.eta:g}",
                violation,
                MONOTONICITY_TOLERANCE))

        await writer.save_csv("locallaw.csv", rows, COLUMNS)

        return CommandResults(
            command=self.name,
            checks=checks,
            outputs=sorted(writer.outputs),
            summary=summary)
