"""
.. module:: texpand
    :platform: Linux
    :synopsis: command building the T-equations and T-expansions of
        successive orders
"""
import libbandgraph
from libbandgraph.command import Command
from libbandgraph.config import RunConfig
from libbandgraph.export import ReportWriter
from libbandgraph.export import json_text
from libbandgraph.results import CommandResults
from libbandgraph.results import check_le
from libbandgraph.serialize import graph_to_dict
from libbandgraph.structure import validate_texpansion_extras
from libbandgraph.builder import ExpansionStore
from libbandgraph.texpansion import BUCKET_R
from libbandgraph.texpansion import BUCKET_A
from libbandgraph.texpansion import BUCKET_Q
from libbandgraph.texpansion import BUCKET_ERR
from libbandgraph.texpansion import seed_second_order
from libbandgraph.nonuniversal import build_non_universal

# buckets checked by the structural validator
VALIDATED = (BUCKET_R, BUCKET_A, BUCKET_Q)

COLUMNS = ["kind", "order", "bucket", "k", "graphs", "valid", "pass_rate"]


def validate_buckets(kind: str, expansion: object) -> tuple:
    """
    Run the structural validator on the R, A and Q graphs.
    :returns: (report rows, offending graphs)
    """
    rows = []
    offending = []

    for name in VALIDATED:
        for k, graphs in sorted(expansion.bucket_by_order(name).items()):
            valid = 0
            for graph in graphs:
                report = validate_texpansion_extras(graph, name)
                if report.passed:
                    valid += 1
                    continue

                offending.append({
                    "kind": kind,
                    "bucket": name,
                    "k": k,
                    "failures": report.failures,
                    "graph": graph_to_dict(graph),
                })

            rows.append({
                "kind": kind,
                "order": expansion.order,
                "bucket": name,
                "k": k,
                "graphs": len(graphs),
                "valid": valid,
                "pass_rate": valid / len(graphs) if graphs else 1.0,
            })

    for k, graphs in sorted(expansion.bucket_by_order(BUCKET_ERR).items()):
        rows.append({
            "kind": kind,
            "order": expansion.order,
            "bucket": BUCKET_ERR,
            "k": k,
            "graphs": len(graphs),
            "valid": None,
            "pass_rate": None,
        })

    return rows, offending


class TExpandCommand(Command):
    """
    Build the T-equations and T-expansions of orders 2 to n, save them
    with a structural report, and check the validator pass rates, the
    second order seed, the vanishing of the third order self-energy and
    the agreement of the lower order parts between successive orders.
    """

    @property
    def name(self) -> str:
        return "texpand"

    @property
    def description(self) -> str:
        return "Build T-expansions of orders 2..n"

    @property
    def config_help(self) -> dict:
        return {
            "nonuniversal": "also build the non-universal expansion of "
                            "order n (default: 0)",
        }

    async def _order(
            self,
            store: ExpansionStore,
            order: int,
            writer: ReportWriter) -> tuple:
        texp = await libbandgraph.to_thread(store.build, order)
        teq = store.tequation(order)

        await writer.save_json(f"teq_{order}.json", teq.to_dict())
        await writer.save_json(f"texp_{order}.json", texp.to_dict())

        rows = []
        offending = []
        checks = []

        for kind, expansion in (("teq", teq), ("texp", texp)):
            found, bad = validate_buckets(kind, expansion)
            rows.extend(found)
            offending.extend(bad)

            total = sum(row["graphs"] for row in found if row["valid"] is not None)
            valid = sum(row["valid"] for row in found if row["valid"] is not None)
            checks.append(check_le(
                f"{kind} {order} validator",
                total - valid,
                0,
                details=f"{valid}/{total} graphs pass"))

        if offending:
            path = await writer.save_json(
                f"offending_{order}.json", offending)
            await libbandgraph.events.fire(
                "session_warning",
                f"{len(offending)} graphs fail validation, see {path}")

        if order == 2:
            seed = seed_second_order(store.error_order)
            same = json_text(texp.to_dict()) == json_text(seed.to_dict())
            checks.append(check_le(
                "texp 2 seed", 0 if same else 1, 0,
                details="second order matches the seed"))

        if order >= 3:
            energy = texp.energies.get(3, ())
            checks.append(check_le(
                f"texp {order} E3 empty", len(energy), 0))

        for key, match in sorted(teq.consistency.items()):
            checks.append(check_le(
                f"teq {order} consistency {key}", 0 if match else 1, 0))

        return rows, checks, texp

    async def run(
            self,
            config: RunConfig,
            writer: ReportWriter) -> CommandResults:
        # offending graphs are collected in offending_<n>.json
        store = ExpansionStore(
            error_order=config.error_order,
            max_graphs=config.get("max_graphs"),
            validate=False)

        rows = []
        checks = []
        summary = {}
        texp = None

        for order in range(2, config.order + 1):
            await self.progress(f"Building order {order}")

            found, checked, texp = await self._order(store, order, writer)
            rows.extend(found)
            checks.extend(checked)

            summary[f"texp_{order}"] = str(texp.counts())

        summary["D"] = store.error_order

        if self.param("nonuniversal", False, bool):
            await self.progress(f"Non-universal expansion of order {texp.order}")

            result = await libbandgraph.to_thread(build_non_universal, texp)
            await writer.save_json(
                f"nonuniversal_{texp.order}.json", result.to_dict())

            summary["nonuniversal"] = str(result.counts())
            summary["ghosts"] = str(result.ghost_counts())

        await writer.save_csv("texpand.csv", rows, COLUMNS)

        return CommandResults(
            command=self.name,
            checks=checks,
            outputs=sorted(writer.outputs),
            summary=summary)
