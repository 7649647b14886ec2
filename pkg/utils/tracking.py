"""Counters of one attack run."""

import time
from dataclasses import dataclass, field
from threading import Lock
from typing import Optional


@dataclass
class AttackMetrics:
    """Counters of one attack run, safe to update from worker threads."""
    start_time: float = field(default_factory=time.time)
    end_time: Optional[float] = None
    rank_calls: int = 0
    pairs_evaluated: int = 0
    _lock: Lock = field(default_factory=Lock, repr=False, compare=False)

    def add_rank_calls(self, count: int = 1) -> None:
        """Record rank computations, including those of pairs later discarded."""
        with self._lock:
            self.rank_calls += count

    def add_pair(self) -> None:
        with self._lock:
            self.pairs_evaluated += 1

    def finish(self) -> None:
        """Mark the run as finished."""
        self.end_time = time.time()

    @property
    def duration(self) -> float:
        """Run duration in seconds."""
        end = self.end_time or time.time()
        return end - self.start_time

    @property
    def rank_calls_per_second(self) -> float:
        if self.duration <= 0:
            return 0.0
        return self.rank_calls / self.duration
