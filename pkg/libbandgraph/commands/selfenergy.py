"""
.. module:: selfenergy
    :platform: Linux
    :synopsis: command evaluating the self-energies of a T-equation
"""
import libbandgraph
from libbandgraph.command import Command
from libbandgraph.command import CommandError
from libbandgraph.config import RunConfig
from libbandgraph.export import ReportWriter
from libbandgraph.results import CommandResults
from libbandgraph.builder import ExpansionStore
from libbandgraph.selfenergy import extract_self_energy

COLUMNS = ["order", "eta", "row_sum_re", "row_sum_im", "max_abs", "evenness"]


class SelfEnergyCommand(Command):
    """
    Build the T-equation of order n and evaluate each of its self-energies
    at every spectral point, checking symmetry, translation invariance,
    sum zero with its trend in eta, and the pointwise decay.
    """

    @property
    def name(self) -> str:
        return "selfenergy"

    @property
    def description(self) -> str:
        return "Evaluate and check the self-energies"

    @property
    def config_help(self) -> dict:
        return {
            "only": "evaluate a single self-energy order (default: all)",
        }

    async def run(
            self,
            config: RunConfig,
            writer: ReportWriter) -> CommandResults:
        if config.order < 3:
            raise CommandError("self-energies need order >= 3")

        store = ExpansionStore(
            error_order=config.error_order,
            max_graphs=config.get("max_graphs"))

        await self.progress(f"Building order {config.order}")
        await libbandgraph.to_thread(store.build, config.order)

        teq = store.tequation(config.order)

        orders = sorted(k for k in teq.energies if k >= 3)
        only = self.param("only", None, int)
        if only is not None:
            if only not in orders:
                raise CommandError(
                    f"no self-energy of order {only}, available: {orders}")
            orders = [only]

        rows = []
        checks = []
        summary = {"D": teq.error_order}

        for order in orders:
            await self.progress(f"Self-energy of order {order}")

            report = await libbandgraph.to_thread(
                extract_self_energy,
                teq,
                config.lattice,
                config.points,
                order,
                config.tau)

            for eta, kernel in report.kernels.items():
                await writer.save_json(
                    f"energy_{order}_eta={eta:g}.json",
                    kernel.table.to_dict())

            rows.extend(report.rows())
            checks.extend(report.checks)
            summary[f"E{order} graphs"] = len(teq.energies[order])

        await writer.save_csv("selfenergy.csv", rows, COLUMNS)

        return CommandResults(
            command=self.name,
            checks=checks,
            outputs=sorted(writer.outputs),
            summary=summary)
