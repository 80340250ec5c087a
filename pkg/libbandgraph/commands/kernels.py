"""
.. module:: kernels
    :platform: Linux
    :synopsis: command exporting the deterministic kernels and checking
        their identities
"""
import libbandgraph
from libbandgraph.command import Command
from libbandgraph.config import RunConfig
from libbandgraph.export import ReportWriter
from libbandgraph.results import CheckResult
from libbandgraph.results import CommandResults
from libbandgraph.kernels import build_variance_profile
from libbandgraph.kernels import kernel_theta
from libbandgraph.kernels import kernel_s_pm
from libbandgraph.kernels import kernel_B
from libbandgraph.kernels import kernel_diagnostics


def tagged(checks: list, tag: str) -> list:
    """
    Append a tag to the names of some checks.
    """
    return [
        CheckResult(
            name=f"{check.name} {tag}",
            measured=check.measured,
            bound=check.bound,
            passed=check.passed,
            hard=check.hard,
            details=check.details)
        for check in checks
    ]


class KernelsCommand(Command):
    """
    Export ``S``, ``B`` and, at every spectral point, ``Theta`` and
    ``S+/-``, then check their exact identities and bound shapes.
    """

    @property
    def name(self) -> str:
        return "kernels"

    @property
    def description(self) -> str:
        return "Export kernels and run their diagnostics"

    async def run(
            self,
            config: RunConfig,
            writer: ReportWriter) -> CommandResults:
        lattice = config.lattice

        await self.progress(f"Kernels of {lattice}")

        s_table = await libbandgraph.to_thread(build_variance_profile, lattice)
        await writer.save_json("kernel_S.json", s_table.to_dict())

        b_table = await libbandgraph.to_thread(kernel_B, lattice)
        await writer.save_json("kernel_B.json", b_table.to_dict())

        checks = []
        rows = []
        for point in config.points:
            tag = f"eta={point.eta:g}"
            await self.progress(f"Diagnostics at {point}")

            theta = await libbandgraph.to_thread(kernel_theta, lattice, point)
            await writer.save_json(f"kernel_Theta_{tag}.json", theta.to_dict())

            plus, minus = await libbandgraph.to_thread(
                kernel_s_pm, lattice, point)
            await writer.save_json(f"kernel_S+_{tag}.json", plus.to_dict())
            await writer.save_json(f"kernel_S-_{tag}.json", minus.to_dict())

            found = await libbandgraph.to_thread(
                kernel_diagnostics, lattice, point, config.tau)

            for check in found:
                row = check.to_row()
                row["eta"] = point.eta
                rows.append(row)

            checks.extend(tagged(found, tag))

        await writer.save_csv(
            "kernels.csv",
            rows,
            ["check", "eta", "measured", "bound", "pass", "hard"])

        return CommandResults(
            command=self.name,
            checks=checks,
            outputs=sorted(writer.outputs),
            summary={
                "N": lattice.N,
                "points": len(config.points),
            })
