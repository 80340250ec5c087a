"""
.. module:: ui
    :platform: Linux
    :synopsis: module that contains user interface
"""
import platform
import libbandgraph
from libbandgraph import __version__
from libbandgraph.results import ResultStatus
from libbandgraph.results import CheckResult
from libbandgraph.results import CommandResults
from libbandgraph.export import format_float

# pylint: disable=missing-function-docstring
# pylint: disable=unused-argument


class ConsoleUserInterface:
    """
    Console based user interface.
    """

    GREEN = "\033[1;32m"
    YELLOW = "\033[1;33m"
    RED = "\033[1;31m"
    CYAN = "\033[1;36m"
    RESET_COLOR = "\033[0m"
    RESET_SCREEN = "\033[2J"

    def __init__(self, no_colors: bool = False) -> None:
        self._no_colors = no_colors

        libbandgraph.events.register("session_started", self.session_started)
        libbandgraph.events.register(
            "session_completed", self.session_completed)
        libbandgraph.events.register("command_progress", self.command_progress)
        libbandgraph.events.register("check_completed", self.check_completed)
        libbandgraph.events.register("session_warning", self.session_warning)
        libbandgraph.events.register("session_error", self.session_error)
        libbandgraph.events.register("internal_error", self.internal_error)

    def _print(self, msg: str, color: str = None, end: str = "\n"):
        """
        Print a message.
        """
        msg = msg.replace(self.RESET_SCREEN, '')
        msg = msg.replace('\r', '')

        if color and not self._no_colors:
            print(f"{color}{msg}{self.RESET_COLOR}", end=end, flush=True)
        else:
            print(msg, end=end, flush=True)

    @staticmethod
    def _user_friendly_duration(duration: float) -> str:
        """
        Return a user-friendly duration time from seconds.
        For example, "3670.234" becomes "1h 0m 10s".
        """
        minutes, seconds = divmod(duration, 60)
        hours, minutes = divmod(minutes, 60)
        uf_time = ""

        if hours > 0:
            uf_time = f"{hours:.0f}h {minutes:.0f}m {seconds:.0f}s"
        elif minutes > 0:
            uf_time = f"{minutes:.0f}m {seconds:.0f}s"
        else:
            uf_time = f"{seconds:.3f}s"

        return uf_time

    def _status(self, check: CheckResult) -> None:
        if check.status == ResultStatus.PASS:
            self._print("pass", color=self.GREEN)
        elif check.status == ResultStatus.WARN:
            self._print("warn", color=self.YELLOW)
        else:
            self._print("fail", color=self.RED)

    async def session_started(self, command: str, out_dir: str) -> None:
        uname = platform.uname()
        message = f"bandgraph {__version__}\n\n"
        message += f"\tCommand: {command}\n"
        message += f"\tPython: {platform.python_version()}\n"
        message += f"\tMachine Architecture: {uname.machine}\n"
        message += f"\tThreads: {libbandgraph.max_threads()}\n"
        message += f"\n\tOutput directory: {out_dir}\n"

        self._print(message)

    async def command_progress(self, message: str) -> None:
        self._print(message, color=self.CYAN)

    async def check_completed(self, check: CheckResult) -> None:
        if check.status == ResultStatus.PASS:
            return

        self._print(f"{check.name}: ", end="")
        self._status(check)

    async def session_completed(
            self,
            results: CommandResults,
            strict: bool) -> None:
        duration = self._user_friendly_duration(results.exec_time)

        message = "\n"
        message += f"Execution time: {duration}\n"
        message += "\n"
        message += f"Command: {results.command}\n"

        for key, value in results.summary.items():
            if isinstance(value, float):
                value = format_float(value)
            message += f"{key}: {value}\n"

        message += "\n"
        message += f"Checks: {len(results.checks)}\n"
        message += f"Passed: {results.passed}\n"
        message += f"Failed: {results.failed}\n"
        message += f"Warnings: {results.warnings}\n"
        message += "\nOutputs:\n"
        for path in results.outputs:
            message += f"\t{path}\n"

        self._print(message)

        if results.ok(strict=strict):
            self._print("Command completed", color=self.GREEN)
        else:
            self._print("Command failed", color=self.RED)

    async def session_warning(self, msg: str) -> None:
        self._print(f"Warning: {msg}", color=self.YELLOW)

    async def session_error(self, error: str) -> None:
        self._print(f"Error: {error}", color=self.RED)

    async def internal_error(self, exc: BaseException, event_name: str) -> None:
        self._print(
            f"\nError while handling '{event_name}': {exc}\n",
            color=self.RED)


class VerboseUserInterface(ConsoleUserInterface):
    """
    Verbose console based user interface, printing every check.
    """

    async def check_completed(self, check: CheckResult) -> None:
        self._print(
            f"{check.name}: {format_float(check.measured)} <= "
            f"{format_float(check.bound)} ", end="")
        self._status(check)
