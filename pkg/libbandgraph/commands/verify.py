"""
.. module:: verify
    :platform: Linux
    :synopsis: command running the Monte Carlo identity suites
"""
import functools
import libbandgraph
from libbandgraph.command import Command
from libbandgraph.command import CommandError
from libbandgraph.config import RunConfig
from libbandgraph.export import ReportWriter
from libbandgraph.results import CommandResults
from libbandgraph.results import check_le
from libbandgraph.builder import ExpansionStore
from libbandgraph.suites import COLUMNS
from libbandgraph.suites import OPERATORS
from libbandgraph.suites import SUITES
from libbandgraph.suites import SUITE_TEXP
from libbandgraph.suites import SUITE_PRESERVATION
from libbandgraph.suites import identity_suite
from libbandgraph.suites import texp_pairs
from libbandgraph.suites import texp_suite
from libbandgraph.preservation import preservation_trials

# runs every operator suite
ALL = "all"


class VerifyCommand(Command):
    """
    Compare the Monte Carlo means of both sides of an operator identity,
    or of the T-expansion identity, on the same samples. An identity
    passes when the z-score of the paired difference is at most the
    confidence.
    """

    @property
    def name(self) -> str:
        return "verify"

    @property
    def description(self) -> str:
        return "Monte Carlo identity suites"

    @property
    def config_help(self) -> dict:
        return {
            "pairs": "number of (a, b) pairs of the texp suite (default: 10)",
            "trials": "local expansions of the preservation suite "
                      "(default: 1000)",
        }

    def _suites(self, config: RunConfig) -> list:
        op_name = config.op
        if not op_name:
            raise CommandError(
                f"--op is required, choose from {list(SUITES) + [ALL]}")

        if op_name == ALL:
            return list(OPERATORS)

        if op_name not in SUITES:
            raise CommandError(
                f"Unknown suite '{op_name}', choose from "
                f"{list(SUITES) + [ALL]}")

        return [op_name]

    async def run(
            self,
            config: RunConfig,
            writer: ReportWriter) -> CommandResults:
        lattice = config.lattice
        confidence = config.get("confidence")
        suites = self._suites(config)
        names = ", ".join(suites)

        texp = None
        if SUITE_TEXP in suites:
            store = ExpansionStore(
                error_order=config.error_order,
                max_graphs=config.get("max_graphs"))
            texp = await libbandgraph.to_thread(store.build, config.order)

        rows = []
        checks = []

        if SUITE_PRESERVATION in suites:
            suites.remove(SUITE_PRESERVATION)
            await self.progress("Preservation trials")

            report = await libbandgraph.to_thread(functools.partial(
                preservation_trials,
                self.param("trials", 1000, int),
                seed=config.seed,
                error_order=config.error_order))

            await writer.save_json("preservation.json", report.to_dict())
            checks.append(check_le(
                "preservation violations",
                len(report.violations),
                0,
                details=f"trials: {report.trials}"))

        for point in config.points:
            for suite in suites:
                await self.progress(f"Suite '{suite}' at {point}")

                if suite == SUITE_TEXP:
                    pairs = texp_pairs(lattice, self.param("pairs", 10, int))
                    work = functools.partial(
                        texp_suite,
                        texp,
                        lattice,
                        point,
                        config.samples,
                        config.seed,
                        pairs=pairs,
                        confidence=confidence,
                        inner_samples=config.get("inner_samples"))
                else:
                    work = functools.partial(
                        identity_suite,
                        suite,
                        lattice,
                        point,
                        config.samples,
                        config.seed,
                        error_order=config.error_order,
                        confidence=confidence,
                        inner_samples=config.get("inner_samples"))

                found = await libbandgraph.to_thread(work)

                for identity in found:
                    row = identity.to_row()
                    row["eta"] = point.eta
                    rows.append(row)

                    checks.append(check_le(
                        f"{identity.check.name} '{identity.case}' "
                        f"eta={point.eta:g}",
                        identity.zscore,
                        confidence))

        if suites:
            name = "verify_all.csv" if len(suites) > 1 \
                else f"verify_{suites[0]}.csv"
            await writer.save_csv(name, rows, COLUMNS + ["eta"])

        return CommandResults(
            command=self.name,
            checks=checks,
            outputs=sorted(writer.outputs),
            summary={
                "suites": names,
                "samples": config.samples,
                "seed": config.seed,
            })
