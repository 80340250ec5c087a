"""
.. module:: command
    :platform: Linux
    :synopsis: generic batch command definition
"""
import libbandgraph
from libbandgraph import BandGraphException
from libbandgraph.plugin import Plugin
from libbandgraph.config import RunConfig
from libbandgraph.export import ReportWriter
from libbandgraph.results import CommandResults


class CommandError(BandGraphException):
    """
    Raised when a command can't be configured or executed.
    """


class Command(Plugin):
    """
    A batch command. Commands are discovered inside the ``commands``
    folder and configured with ``name:key=value:...`` parameters.
    """

    def __init__(self) -> None:
        self._params = {}

    def setup(self, **kwargs: dict) -> None:
        unknown = set(kwargs) - set(self.config_help) - {"name"}
        if unknown:
            raise CommandError(
                f"'{self.name}' doesn't support parameters {sorted(unknown)}")

        self._params = {
            key: value for key, value in kwargs.items() if key != "name"
        }

    @property
    def config_help(self) -> dict:
        return {}

    @property
    def description(self) -> str:
        """
        One line description of the command.
        """
        raise NotImplementedError()

    def param(self, key: str, default: object = None, kind: type = str) -> object:
        """
        Parameter given with the command name, converted to ``kind``.
        """
        value = self._params.get(key, None)
        if value is None:
            return default

        try:
            if kind is bool:
                return str(value).lower() in ("1", "true", "yes", "on")

            return kind(value)
        except ValueError as err:
            raise CommandError(
                f"'{key}' parameter of '{self.name}' must be "
                f"{kind.__name__}: {value}") from err

    @staticmethod
    async def progress(message: str) -> None:
        """
        Report command progress to the user interface.
        """
        await libbandgraph.events.fire("command_progress", message)

    async def run(
            self,
            config: RunConfig,
            writer: ReportWriter) -> CommandResults:
        """
        Execute the command and write its reports.
        :param config: run configuration
        :type config: RunConfig
        :param writer: reports writer
        :type writer: ReportWriter
        :returns: CommandResults
        """
        raise NotImplementedError()
