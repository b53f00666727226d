"""Rectangular parameter-grid results and order-independent cell evaluation."""

from __future__ import annotations

import datetime as _dt
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import FloquetError, ParameterError

__all__ = ["TongueMap", "evaluate_cells", "check_grid", "map_metadata"]


@dataclass(eq=False)
class TongueMap:
    """Scalar channels sampled on a ``(len(y), len(x))`` grid.

    ``errors`` maps ``(iy, ix)`` to the message of a cell whose evaluation
    failed; such cells hold NaN in every channel.
    """

    x: np.ndarray
    x_label: str
    y: np.ndarray
    y_label: str
    channels: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)
    errors: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        shape = (self.y.size, self.x.size)
        for name, values in self.channels.items():
            values = np.asarray(values, dtype=float)
            if values.shape != shape:
                raise ParameterError(
                    f"channel '{name}' has shape {values.shape}, expected {shape}"
                )
            self.channels[name] = values

    @property
    def shape(self) -> tuple[int, int]:
        return (self.y.size, self.x.size)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    @property
    def nan_cells(self) -> int:
        """Number of cells with a NaN in any channel."""
        if not self.channels:
            return 0
        stack = np.stack(list(self.channels.values()))
        return int(np.isnan(stack).any(axis=0).sum())


def check_grid(values: Sequence[float], name: str, lower=None, upper=None, lower_open=False, upper_open=False) -> np.ndarray:
    """Validate a strictly increasing axis inside optional bounds."""
    a = np.asarray(values, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ParameterError(f"{name} grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{name} grid contains non-finite values")
    if a.size > 1 and not np.all(np.diff(a) > 0):
        raise ParameterError(f"{name} grid must be strictly increasing")
    if lower is not None and (a[0] <= lower if lower_open else a[0] < lower):
        raise ParameterError(f"{name} grid starts at {a[0]}, outside its lower bound {lower}")
    if upper is not None and (a[-1] >= upper if upper_open else a[-1] > upper):
        raise ParameterError(f"{name} grid ends at {a[-1]}, outside its upper bound {upper}")
    return a


def _guarded(func, cell):
    try:
        return True, func(*cell)
    except FloquetError as exc:
        return False, f"{type(exc).__name__}: {exc}"


class _Guard:
    # picklable wrapper so cells can run in worker processes
    def __init__(self, func):
        self.func = func

    def __call__(self, cell):
        return _guarded(self.func, cell)


def evaluate_cells(func: Callable, cells: Iterable[tuple], workers: int = 1) -> list[tuple[bool, object]]:
    """Evaluate ``func(*cell)`` for every cell, returning ``(ok, value_or_message)``.

    Results come back in input order whatever the worker count, so assembled
    outputs never depend on scheduling. Only :class:`FloquetError` is captured
    per cell; anything else propagates.
    """
    cells = list(cells)
    guard = _Guard(func)
    if workers <= 1 or len(cells) <= 1:
        return [guard(c) for c in cells]
    chunk = max(1, len(cells) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(guard, cells, chunksize=chunk))


def map_metadata(**extra) -> dict:
    from . import __version__

    meta = {"tool_version": __version__}
    meta.update(extra)
    meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return meta
