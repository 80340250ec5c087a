"""
.. module:: events
    :platform: Linux
    :synopsis: events bus connecting sessions, commands and user interface
"""
import typing
import logging
import asyncio
import inspect

# events fired during a session, with the arguments of their callbacks
EVENTS = {
    "session_started": "command name, output folder",
    "command_progress": "message",
    "check_completed": "CheckResult",
    "session_completed": "CommandResults, strict flag",
    "session_warning": "message",
    "session_error": "error message",
    "internal_error": "exception, name of the event that failed",
}


class EventsHandler:
    """
    Asynchronous events bus for the names in ``EVENTS``. Callbacks run
    inside the consumer loop started with ``start``, so sessions never
    wait for the user interface.
    """

    def __init__(self) -> None:
        self._logger = logging.getLogger("bandgraph.events")
        self._queue = asyncio.Queue()
        self._lock = asyncio.Lock()
        self._callbacks = {}
        self._stop = False

    @staticmethod
    def _check_name(event_name: str) -> None:
        if not event_name:
            raise ValueError("event_name is empty")

        if event_name not in EVENTS:
            raise ValueError(
                f"Unknown event '{event_name}', choose from {sorted(EVENTS)}")

    def reset(self) -> None:
        """
        Forget every registered callback.
        """
        self._logger.info("Reset events callbacks")
        self._callbacks.clear()

    def is_registered(self, event_name: str) -> bool:
        """
        True if ``event_name`` has at least one callback.
        """
        self._check_name(event_name)

        return bool(self._callbacks.get(event_name))

    def register(self, event_name: str, callback: typing.Callable) -> None:
        """
        Add a callback to ``event_name``. Coroutine functions and plain
        functions are both accepted.
        :raises ValueError: unknown event or empty callback
        """
        self._check_name(event_name)

        if not callback:
            raise ValueError("callback is empty")

        self._logger.debug("Register callback of %s", repr(event_name))

        self._callbacks.setdefault(event_name, []).append(callback)

    @staticmethod
    async def _call(callback: typing.Callable, *args, **kwargs) -> None:
        ret = callback(*args, **kwargs)
        if inspect.isawaitable(ret):
            await ret

    async def fire(self, event_name: str, *args: list, **kwargs: dict) -> None:
        """
        Queue the callbacks of ``event_name``. When one of them fails, the
        ``internal_error`` callbacks receive the exception and
        ``event_name``.
        :raises ValueError: unknown event
        """
        self._check_name(event_name)

        callbacks = self._callbacks.get(event_name)
        if not callbacks:
            return

        coros = [self._call(cb, *args, **kwargs) for cb in callbacks]

        await self._queue.put((event_name, asyncio.gather(*coros)))

    async def _consume(self) -> None:
        item = await self._queue.get()
        if not item:
            return

        event_name, task = item

        # pylint: disable=broad-except
        try:
            await task
        except asyncio.CancelledError:
            pass
        except Exception as exc:
            self._logger.error("Callback of %s failed: %s", repr(event_name), exc)

            for callback in self._callbacks.get("internal_error", []):
                await self._call(callback, exc, event_name)

    async def stop(self) -> None:
        """
        Stop the consumer loop after draining the queue.
        """
        self._logger.info("Stopping events loop")

        self._stop = True

        await self._queue.put(None)

        async with self._lock:
            pass

        while not self._queue.empty():
            await self._consume()

        self._logger.info("Events loop stopped")

    async def start(self) -> None:
        """
        Run the consumer loop until ``stop``.
        """
        self._stop = False

        try:
            async with self._lock:
                self._logger.info("Starting events loop")

                while not self._stop:
                    await self._consume()
        except asyncio.CancelledError:
            await self.stop()
