"""Oriented plane segments stored as complex endpoints."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Segment:
    """The oriented segment ``[start, end] = {(1-t) start + t end : t in [0, 1]}``."""

    start: complex
    end: complex

    def __post_init__(self):
        object.__setattr__(self, "start", complex(self.start))
        object.__setattr__(self, "end", complex(self.end))

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def point(self, t):
        return (1 - t) * self.start + t * self.end

    def samples(self, s: int) -> np.ndarray:
        """``s`` equally spaced points including both endpoints."""
        return self.point(np.linspace(0.0, 1.0, s))

    def midpoints(self, s: int) -> np.ndarray:
        """Centres of the ``s`` equal cells of the segment."""
        return self.point((np.arange(s) + 0.5) / s)

    def distance_to(self, z: complex) -> float:
        d = self.end - self.start
        dd = abs(d) ** 2
        if dd == 0.0:
            return abs(z - self.start)
        t = min(max(((z - self.start) * d.conjugate()).real / dd, 0.0), 1.0)
        return abs(self.point(t) - z)

    def reversed(self) -> "Segment":
        return Segment(self.end, self.start)


def distances_to_segments(points: np.ndarray, starts: np.ndarray, ends: np.ndarray,
                          chunk: int = 2048) -> np.ndarray:
    """Distance from each point to the nearest of the given segments."""
    points = np.asarray(points, dtype=complex).ravel()
    d = ends - starts
    dd = np.abs(d) ** 2
    safe = np.where(dd == 0.0, 1.0, dd)
    out = np.empty(points.shape, dtype=float)
    for lo in range(0, points.size, chunk):
        p = points[lo:lo + chunk, None]
        t = np.clip(((p - starts) * d.conj()).real / safe, 0.0, 1.0)
        t = np.where(dd == 0.0, 0.0, t)
        out[lo:lo + chunk] = np.abs(starts + t * d - p).min(axis=1)
    return out
