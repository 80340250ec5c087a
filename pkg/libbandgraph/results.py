"""
.. module:: results
    :platform: Linux
    :synopsis: module containing checks results definition
"""
import math
import typing


class ResultStatus:
    """
    Overall status of a check. Calibrated diagnostics have no hard bound
    coming from an exact identity, so when they fail they are only
    reported as warnings unless strict mode is requested.
    """
    # check passed
    PASS = 0

    # calibrated diagnostic outside its bound
    WARN = 4

    # hard check failure
    FAIL = 16


class CheckResult:
    """
    Result of a single numerical or structural check.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param name: name of the check
        :type name: str
        :param measured: measured value
        :type measured: float
        :param bound: bound the measured value is compared with
        :type bound: float
        :param passed: True if the measured value satisfies the bound
        :type passed: bool
        :param hard: True if the check is an exact identity. False for
            calibrated diagnostics
        :type hard: bool
        :param details: free text describing the check
        :type details: str
        """
        self._name = kwargs.get("name", None)
        self._measured = kwargs.get("measured", math.nan)
        self._bound = kwargs.get("bound", math.nan)
        self._passed = bool(kwargs.get("passed", False))
        self._hard = bool(kwargs.get("hard", True))
        self._details = kwargs.get("details", "")

        if not self._name:
            raise ValueError("name is empty")

    @property
    def name(self) -> str:
        """
        Name of the check.
        """
        return self._name

    @property
    def measured(self) -> float:
        """
        Measured value.
        """
        return self._measured

    @property
    def bound(self) -> float:
        """
        Bound of the check.
        """
        return self._bound

    @property
    def passed(self) -> bool:
        """
        True if the check passed.
        """
        return self._passed

    @property
    def hard(self) -> bool:
        """
        True if the check is gating.
        """
        return self._hard

    @property
    def details(self) -> str:
        """
        Description of the check.
        """
        return self._details

    @property
    def status(self) -> int:
        """
        Status of the check as ``ResultStatus``.
        """
        if self._passed:
            return ResultStatus.PASS

        if self._hard:
            return ResultStatus.FAIL

        return ResultStatus.WARN

    def to_row(self) -> dict:
        """
        CSV row of the check.
        """
        return {
            "check": self._name,
            "measured": self._measured,
            "bound": self._bound,
            "pass": self._passed,
            "hard": self._hard,
        }

    def __repr__(self) -> str:
        return \
            f"CheckResult(name: '{self._name}', " \
            f"measured: {self._measured}, " \
            f"bound: {self._bound}, " \
            f"passed: {self._passed}, " \
            f"hard: {self._hard})"


def check_le(
        name: str,
        measured: float,
        bound: float,
        hard: bool = True,
        details: str = "") -> CheckResult:
    """
    Build a ``CheckResult`` which passes when ``measured <= bound``.
    """
    measured = float(measured)
    return CheckResult(
        name=name,
        measured=measured,
        bound=float(bound),
        passed=not math.isnan(measured) and measured <= bound,
        hard=hard,
        details=details)


class CommandResults:
    """
    Results of a command execution.
    """

    def __init__(self, **kwargs: dict) -> None:
        """
        :param command: name of the command
        :type command: str
        :param checks: list of checks
        :type checks: list(CheckResult)
        :param outputs: files written by the command
        :type outputs: list(str)
        :param exec_time: execution time in seconds
        :type exec_time: float
        :param summary: command specific values reported to the user
        :type summary: dict
        """
        self._command = kwargs.get("command", None)
        self._checks = kwargs.get("checks", [])
        self._outputs = kwargs.get("outputs", [])
        self._exec_time = max(kwargs.get("exec_time", 0.0), 0.0)
        self._summary = kwargs.get("summary", {})

        if not self._command:
            raise ValueError("command is empty")

    @property
    def command(self) -> str:
        """
        Name of the command.
        """
        return self._command

    @property
    def checks(self) -> list:
        """
        Checks executed by the command.
        """
        return self._checks

    @property
    def outputs(self) -> list:
        """
        Files written by the command.
        """
        return self._outputs

    @property
    def summary(self) -> dict:
        """
        Command specific values.
        """
        return self._summary

    @property
    def exec_time(self) -> float:
        """
        Execution time.
        """
        return self._exec_time

    @exec_time.setter
    def exec_time(self, value: float) -> None:
        self._exec_time = max(value, 0.0)

    @property
    def passed(self) -> int:
        """
        Number of passed checks.
        """
        return sum(1 for check in self._checks if check.passed)

    @property
    def failed(self) -> int:
        """
        Number of failed hard checks.
        """
        return sum(
            1 for check in self._checks
            if check.status == ResultStatus.FAIL)

    @property
    def warnings(self) -> int:
        """
        Number of calibrated diagnostics outside their bounds.
        """
        return sum(
            1 for check in self._checks
            if check.status == ResultStatus.WARN)

    def ok(self, strict: bool = False) -> bool:
        """
        True if no hard check failed. In strict mode, warnings fail too.
        """
        if self.failed > 0:
            return False

        if strict and self.warnings > 0:
            return False

        return True

    def extend(self, checks: typing.Iterable) -> None:
        """
        Add checks to the results.
        """
        self._checks.extend(checks)

    def __repr__(self) -> str:
        return \
            f"CommandResults(command: '{self._command}', " \
            f"passed: {self.passed}, " \
            f"failed: {self.failed}, " \
            f"warnings: {self.warnings}, " \
            f"exec_time: {self._exec_time})"
