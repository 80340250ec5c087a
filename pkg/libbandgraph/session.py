"""
.. module:: session
    :platform: Linux
    :synopsis: session running one command and writing its manifest
"""
import os
import time
import logging
import asyncio
import libbandgraph
from libbandgraph import __version__
from libbandgraph import BandGraphException
from libbandgraph.command import Command
from libbandgraph.config import RunConfig
from libbandgraph.export import ReportWriter


class RunManifest:
    """
    Everything needed to reproduce a command run.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param command: command name and parameters
        :type command: dict
        :param config: configuration snapshot
        :type config: dict
        :param seeds: seeds used by the command
        :type seeds: list(int)
        :param version: tool version
        :type version: str
        :param wall_time: wall time in seconds
        :type wall_time: float
        :param outputs_hash: hash of the written reports
        :type outputs_hash: str
        """
        self._command = kwargs.get("command", None)
        self._config = kwargs.get("config", {})
        self._seeds = list(kwargs.get("seeds", []))
        self._version = kwargs.get("version", __version__)
        self._wall_time = kwargs.get("wall_time", 0.0)
        self._outputs_hash = kwargs.get("outputs_hash", None)

        if not self._command:
            raise ValueError("command is empty")

    @property
    def command(self) -> dict:
        """
        Command name and parameters.
        """
        return self._command

    @property
    def config(self) -> dict:
        """
        Configuration snapshot.
        """
        return self._config

    @property
    def seeds(self) -> list:
        """
        Seeds used by the run.
        """
        return self._seeds

    @property
    def outputs_hash(self) -> str:
        """
        Hash of the written reports.
        """
        return self._outputs_hash

    def to_dict(self) -> dict:
        """
        Export the manifest.
        """
        return {
            "command": self._command,
            "config": self._config,
            "seeds": self._seeds,
            "version": self._version,
            "wall_time": self._wall_time,
            "outputs_hash": self._outputs_hash,
        }

    def __repr__(self) -> str:
        return \
            f"RunManifest(command: {self._command}, " \
            f"seeds: {self._seeds}, outputs_hash: {self._outputs_hash})"


class Session:
    """
    The session runner.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param command: configured command
        :type command: Command
        :param params: command parameters given by the user
        :type params: dict
        :param config: run configuration
        :type config: RunConfig
        :param out_dir: output folder
        :type out_dir: str
        :param strict: treat calibrated diagnostics as failures
        :type strict: bool
        """
        self._logger = logging.getLogger("bandgraph.session")
        self._command = kwargs.get("command", None)
        self._params = kwargs.get("params", {})
        self._config = kwargs.get("config", None)
        self._out_dir = kwargs.get("out_dir", None)
        self._strict = kwargs.get("strict", False)
        self._run_lock = asyncio.Lock()
        self._results = None
        self._manifest = None

        if not isinstance(self._command, Command):
            raise ValueError("command is empty")

        if not isinstance(self._config, RunConfig):
            raise ValueError("config is empty")

        if not self._out_dir:
            raise ValueError("out_dir is empty")

        self._setup_debug_log()

    def _setup_debug_log(self) -> None:
        """
        Save a log file with debugging information inside the output
        folder.
        """
        os.makedirs(self._out_dir, exist_ok=True)

        logger = logging.getLogger()
        logger.setLevel(logging.DEBUG)

        debug_file = os.path.join(self._out_dir, "debug.log")
        handler = logging.FileHandler(debug_file, encoding="utf8")
        handler.setLevel(logging.DEBUG)

        formatter = logging.Formatter(
            "%(asctime)s - %(name)s:%(lineno)s - %(levelname)s - %(message)s")
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    @property
    def results(self) -> object:
        """
        Results of the last run, None before it completes.
        """
        return self._results

    @property
    def manifest(self) -> RunManifest:
        """
        Manifest of the last run.
        """
        return self._manifest

    async def _save(self, writer: ReportWriter, results: object,
                    wall_time: float) -> None:
        if results.checks:
            await writer.save_csv(
                "checks.csv",
                [check.to_row() for check in results.checks],
                ["check", "measured", "bound", "pass", "hard"])

        command = {"name": self._command.name}
        command.update(self._params)

        self._manifest = RunManifest(
            command=command,
            config=self._config.to_dict(),
            seeds=[self._config.seed],
            wall_time=wall_time,
            outputs_hash=writer.outputs_hash())

        report = {
            "manifest": self._manifest.to_dict(),
            "summary": results.summary,
            "stats": {
                "passed": results.passed,
                "failed": results.failed,
                "warnings": results.warnings,
                "strict": self._strict,
            },
            "outputs": sorted(
                os.path.basename(path) for path in writer.outputs),
        }

        await writer.save_json("report.json", report)

    async def run(self) -> object:
        """
        Run the command, then save the checks, the manifest and the
        report inside the output folder.
        :returns: CommandResults
        """
        async with self._run_lock:
            writer = ReportWriter(self._out_dir)

            await libbandgraph.events.fire(
                "session_started", self._command.name, writer.out_dir)

            start = time.monotonic()
            try:
                results = await self._command.run(self._config, writer)
                results.exec_time = time.monotonic() - start

                for check in results.checks:
                    await libbandgraph.events.fire("check_completed", check)

                await self._save(writer, results, results.exec_time)
            except BandGraphException as err:
                self._logger.exception(err)
                await libbandgraph.events.fire("session_error", str(err))
                raise err

            self._results = results

            await libbandgraph.events.fire(
                "session_completed", results, self._strict)

            return results
