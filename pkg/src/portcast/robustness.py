"""Run-length smoothing of the per-ship destination prediction stream.

A raw prediction is only reported as-is when it belongs to one of the
k longest contiguous runs of equal predictions in the ship's recent
window; otherwise the port of the dominant run is reported instead.
"""

from collections import deque


class ShipHistory:
    """Bounded window of one ship's raw destination predictions."""

    __slots__ = ("ship_id", "window")

    def __init__(self, ship_id: str, capacity: int):
        if capacity < 1:
            raise ValueError("window capacity must be >= 1")
        self.ship_id = ship_id
        self.window: deque[str] = deque(maxlen=capacity)

    def filter(self, raw: str, k: int = 1) -> str:
        """Append the raw prediction and report the smoothed one."""
        if not raw:
            raise ValueError("raw prediction must be non-empty")
        if k < 1:
            raise ValueError("k must be >= 1")
        self.window.append(raw)
        runs = _runs(self.window)
        ranked = sorted(runs, key=lambda run: (-run[1], -run[2]))
        if any(raw == port for port, _, _ in ranked[:k]):
            return raw
        return ranked[0][0]

    def reset(self) -> None:
        self.window.clear()


def _runs(values) -> list[tuple[str, int, int]]:
    """Maximal runs of equal consecutive values as (value, length, end_index)."""
    runs: list[tuple[str, int, int]] = []
    current = None
    length = 0
    for index, value in enumerate(values):
        if value == current:
            length += 1
        else:
            if current is not None:
                runs.append((current, length, index - 1))
            current = value
            length = 1
    runs.append((current, length, len(values) - 1))
    return runs
