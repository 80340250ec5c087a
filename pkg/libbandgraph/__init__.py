"""
.. module:: __init__
    :platform: Linux
    :synopsis: application package definition
"""
import os
import typing
import asyncio
from concurrent.futures import ThreadPoolExecutor
from libbandgraph.events import EventsHandler


# bandgraph version
__version__ = '0.3'


class BandGraphException(Exception):
    """
    Root of every error raised by bandgraph. The command line maps it to
    a failing exit code.
    """


class CapacityError(BandGraphException):
    """
    Raised when a computation would exceed one of the configured
    evaluation or enumeration budgets.
    """


events = EventsHandler()


def get_event_loop() -> asyncio.BaseEventLoop:
    """
    Return the current asyncio event loop.
    """
    loop = None

    try:
        loop = asyncio.get_running_loop()
    except (AttributeError, RuntimeError):
        pass

    if not loop:
        try:
            loop = asyncio.get_event_loop()
        except RuntimeError:
            pass

    if not loop:
        loop = asyncio.new_event_loop()
        asyncio.set_event_loop(loop)

    return loop


def create_task(coro: typing.Coroutine) -> asyncio.Task:
    """
    Create a new task.
    """
    loop = get_event_loop()
    task = loop.create_task(coro)

    return task


def cancel_tasks(loop: asyncio.AbstractEventLoop) -> None:
    """
    Cancel the tasks still pending on ``loop`` and wait for them.
    """
    tasks = asyncio.all_tasks(loop=loop)
    if not tasks:
        return

    for task in tasks:
        if task.cancelled() or task.done():
            continue

        task.cancel()

    loop.run_until_complete(
        asyncio.gather(*tasks, return_exceptions=True))

    for task in tasks:
        if task.cancelled():
            continue

        if task.exception() is not None:
            loop.call_exception_handler({
                'message': 'unhandled exception during shutdown',
                'exception': task.exception(),
                'task': task,
            })


def max_threads() -> int:
    """
    Number of worker threads used by numerical work, read from the
    BANDGRAPH_THREADS environment variable.
    """
    value = os.environ.get("BANDGRAPH_THREADS", None)
    if not value:
        return max(os.cpu_count() or 1, 1)

    try:
        threads = int(value)
    except ValueError as err:
        raise BandGraphException(
            f"BANDGRAPH_THREADS must be an integer: {repr(value)}") from err

    return max(threads, 1)


_EXECUTOR = None


def to_thread(callback: callable, *args: typing.Any) -> typing.Any:
    """
    Run ``callback`` on the worker threads shared by every command and
    return an awaitable for its result. The pool is created on first use
    with ``max_threads()`` workers.
    """
    global _EXECUTOR  # pylint: disable=global-statement

    if _EXECUTOR is None:
        _EXECUTOR = ThreadPoolExecutor(
            max_workers=max_threads(),
            thread_name_prefix="bandgraph")

    loop = get_event_loop()
    return loop.run_in_executor(_EXECUTOR, callback, *args)


__all__ = [
    "BandGraphException",
    "CapacityError",
    "events",
    "get_event_loop",
    "max_threads",
    "to_thread",
]
