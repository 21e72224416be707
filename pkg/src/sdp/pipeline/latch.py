from __future__ import annotations

import threading


class CompletionLatch:
    """Countdown latch: ``wait`` blocks until every launched task has signalled.

    A failing task still counts down, passing its error so the coordinator
    can record it.
    """

    def __init__(self, count: int):
        if count < 0:
            raise ValueError("count must be non-negative")
        self.initial = count
        self._count = count
        self._cond = threading.Condition()
        self.completed: list[str] = []
        self.errors: dict[str, BaseException] = {}

    @property
    def count(self) -> int:
        with self._cond:
            return self._count

    def count_down(self, name: str = "", error: BaseException | None = None) -> None:
        with self._cond:
            if self._count == 0:
                raise RuntimeError("latch already released")
            self._count -= 1
            self.completed.append(name)
            if error is not None:
                self.errors[name] = error
            if self._count == 0:
                self._cond.notify_all()

    def wait(self, timeout: float | None = None) -> bool:
        with self._cond:
            return self._cond.wait_for(lambda: self._count == 0, timeout)
