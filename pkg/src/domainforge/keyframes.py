"""Energy-based keyframe segmentation of demonstration videos.

Frame energy is the sum of squared grayscale intensities; keyframes are the
local extrema of the energy series under a sliding window of half-width K,
with window bounds clipped at the series edges. Within a maximal run of
adjacent equal-energy extrema of the same kind only the first index is kept,
so plateaus contribute a single representative.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class EmptySeries(ValueError):
    pass


IMAGE_SUFFIXES = (".pgm", ".ppm", ".pnm")


@dataclass(frozen=True)
class FrameSeq:
    """Ordered grayscale frames of identical size, intensities in [0, 255]."""

    frames: tuple[np.ndarray, ...]
    sources: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.frames:
            raise EmptySeries("frame sequence is empty")
        shape = self.frames[0].shape
        for i, f in enumerate(self.frames):
            if f.ndim != 2:
                raise ValueError(f"frame {i} is not a 2-D grayscale image")
            if f.shape != shape:
                raise ValueError(f"frame {i} has size {f.shape}, expected {shape}")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class EnergySeries:
    values: tuple[int, ...]

    def __post_init__(self):
        if not self.values:
            raise EmptySeries("energy series is empty")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class KeyframeSet:
    """Strictly increasing frame indices with the extremum kind of each."""

    indices: tuple[int, ...]
    kinds: tuple[str, ...]  # "max" | "min" | "both", parallel to indices

    def __len__(self) -> int:
        return len(self.indices)


def frame_energy(frame: np.ndarray) -> int:
    """Sum of squared intensities, computed in exact integer arithmetic."""
    arr = np.asarray(frame, dtype=np.int64)
    return int(np.sum(arr * arr))


def rgb_to_gray(frame: np.ndarray) -> np.ndarray:
    """ITU-R BT.601 luma, rounded to the nearest integer."""
    arr = np.asarray(frame, dtype=np.float64)
    gray = 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]
    return np.rint(gray).astype(np.int64)


def extract_keyframes(energies: EnergySeries, window: int = 15) -> KeyframeSet:
    """Select local extrema of the energy series with half-width ``window``."""
    if window < 1:
        raise ValueError("window half-width must be >= 1")
    values = energies.values
    n = len(values)
    is_max = [False] * n
    is_min = [False] * n
    for t in range(n):
        lo = max(0, t - window)
        hi = min(n, t + window + 1)
        segment = values[lo:hi]
        if values[t] == max(segment):
            is_max[t] = True
        if values[t] == min(segment):
            is_min[t] = True

    # Plateau rule, applied per extremum kind: in any maximal run of adjacent
    # selected indices with equal energy, keep only the first.
    def dedupe_runs(flags: list[bool]) -> list[bool]:
        kept = [False] * n
        t = 0
        while t < n:
            if not flags[t]:
                t += 1
                continue
            run_start = t
            while t + 1 < n and flags[t + 1] and values[t + 1] == values[run_start]:
                t += 1
            kept[run_start] = True
            t += 1
        return kept

    keep_max = dedupe_runs(is_max)
    keep_min = dedupe_runs(is_min)

    indices = []
    kinds = []
    for t in range(n):
        if keep_max[t] and keep_min[t]:
            indices.append(t)
            kinds.append("both")
        elif keep_max[t]:
            indices.append(t)
            kinds.append("max")
        elif keep_min[t]:
            indices.append(t)
            kinds.append("min")
    return KeyframeSet(tuple(indices), tuple(kinds))


def segment_demo(frames: FrameSeq, window: int = 15) -> KeyframeSet:
    """Map frames to energies, then extract keyframes."""
    energies = EnergySeries(tuple(frame_energy(f) for f in frames.frames))
    return extract_keyframes(energies, window)


def load_frames_dir(path: str | Path) -> FrameSeq:
    """Load PGM/PPM frames from a directory in lexicographic filename order."""
    from PIL import Image

    directory = Path(path)
    files = sorted(
        p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not files:
        raise EmptySeries(f"no PGM/PPM frames in {directory}")
    frames = []
    for f in files:
        with Image.open(f) as img:
            arr = np.asarray(img)
        if arr.ndim == 3:
            arr = rgb_to_gray(arr)
        frames.append(arr.astype(np.int64))
    return FrameSeq(tuple(frames), tuple(f.name for f in files))


def energies_from_csv(path: str | Path) -> EnergySeries:
    """Read an ``index,energy`` CSV (header optional); rows sorted by index."""
    rows: list[tuple[int, int]] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                idx = int(row[0])
            except ValueError:
                continue  # header line
            rows.append((idx, int(round(float(row[1])))))
    if not rows:
        raise EmptySeries(f"no energy rows in {path}")
    rows.sort()
    return EnergySeries(tuple(v for _, v in rows))


def keyframes_to_json(ks: KeyframeSet, filenames: tuple[str, ...] = ()) -> str:
    entries = []
    for idx, kind in zip(ks.indices, ks.kinds):
        entry = {"index": idx, "kind": kind}
        if filenames:
            entry["filename"] = filenames[idx]
        entries.append(entry)
    return json.dumps(entries, indent=2)


__all__ = [
    "EmptySeries",
    "EnergySeries",
    "extract_keyframes",
    "frame_energy",
    "FrameSeq",
    "KeyframeSet",
    "keyframes_to_json",
    "load_frames_dir",
    "energies_from_csv",
    "rgb_to_gray",
    "segment_demo",
]
