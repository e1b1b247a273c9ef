import time
from contextlib import contextmanager


class StepTimer:
    """Wall-clock durations of named algorithm steps (monotonic clock)"""

    def __init__(self):
        self.steps = {}

    @contextmanager
    def step(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.steps[name] = self.steps.get(name, 0.0) + elapsed

    def milliseconds(self) -> dict:
        return {name: seconds * 1000.0 for name, seconds in self.steps.items()}

    def total_ms(self) -> float:
        return sum(self.steps.values()) * 1000.0


class NullTimer:
    """Timer that records nothing"""

    @contextmanager
    def step(self, name: str):
        yield


NULL_TIMER = NullTimer()
