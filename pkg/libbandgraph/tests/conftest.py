"""
Generic stuff for pytest.
"""
import libbandgraph
import pytest
from libbandgraph.command import Command
from libbandgraph.config import RunConfig
from libbandgraph.export import ReportWriter
from libbandgraph.results import CommandResults
from libbandgraph.results import check_le


@pytest.fixture(scope="session")
def event_loop():
    """
    Current event loop. Keep it in session scope, otherwise tests which
    will use same coroutines will be associated to different event_loop.
    In this way, pytest-asyncio plugin will work properly.
    """
    loop = libbandgraph.get_event_loop()

    yield loop

    if not loop.is_closed():
        loop.close()


class DummyCommand(Command):
    """
    A generic command created for testing. ``outcome`` selects the
    checks it reports: "pass", "warn" or "fail".
    """

    @property
    def name(self) -> str:
        return "dummy"

    @property
    def description(self) -> str:
        return "Command used for testing"

    @property
    def config_help(self) -> dict:
        return {
            "outcome": "pass, warn or fail",
        }

    async def run(
            self,
            config: RunConfig,
            writer: ReportWriter) -> CommandResults:
        outcome = self.param("outcome", "pass")

        await self.progress("dummy progress")
        await writer.save_csv(
            "dummy.csv",
            [{"seed": config.seed, "value": 0.1}],
            ["seed", "value"])

        checks = [check_le("exact", 0.0, 1e-10)]
        if outcome == "warn":
            checks.append(check_le("calibrated", 2.0, 1.0, hard=False))
        elif outcome == "fail":
            checks.append(check_le("identity", 2.0, 1.0))

        return CommandResults(
            command=self.name,
            checks=checks,
            outputs=sorted(writer.outputs),
            summary={"outcome": outcome})


@pytest.fixture
def dummy_command():
    """
    A dummy command implementation used for testing.
    """
    obj = DummyCommand()
    obj.setup(name="dummy")
    yield obj


@pytest.fixture
def small_config():
    """
    Small run configuration, quick enough for dense resolvents.
    """
    yield RunConfig(
        lattice={"d": 1, "L": 16, "W": 3},
        eta=[1.0],
        samples=4,
        seed=7)
