"""Constellation mapping and hard-decision demapping.

Six schemes: QPSK, 8-PSK, two-ring 8-QAM, square 16/64-QAM and cross 32-QAM,
all normalized to unit average symbol energy.  Labels are Gray coded wherever
the geometry allows; the two-ring and cross constellations carry best-effort
labelings (perfect Gray codes do not exist on them).

Decisions are made in an unnormalized "grid" domain where QAM points sit on
exact odd-integer coordinates.  That keeps nearest-point ties exact in
floating point, and ties resolve to the numerically smaller label because the
point table is scanned in label order.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import FramingError

SCHEMES = ("qpsk", "8psk", "8qam", "16qam", "32qam", "64qam")


@dataclass(frozen=True)
class Constellation:
    name: str
    bits_per_symbol: int
    grid: np.ndarray   # unnormalized decision points, indexed by label
    scale: float       # points = grid / scale

    @property
    def order(self) -> int:
        return 1 << self.bits_per_symbol

    @property
    def points(self) -> np.ndarray:
        return self.grid / self.scale

    def min_distance(self) -> float:
        p = self.points
        d = np.abs(p[:, None] - p[None, :])
        return float(d[d > 0].min())


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _pam_axis(n_bits: int) -> np.ndarray:
    """Gray-labeled amplitude levels: label 0..0 maps to the most positive."""
    levels = 1 << n_bits
    axis = np.zeros(levels)
    for rank in range(levels):
        axis[_gray(rank)] = (levels - 1) - 2 * rank
    return axis


def _grid_product(i_bits: int, q_bits: int) -> np.ndarray:
    """Rectangular QAM grid: leading bits pick I, trailing bits pick Q."""
    i_axis = _pam_axis(i_bits)
    q_axis = _pam_axis(q_bits)
    grid = np.empty(1 << (i_bits + q_bits), dtype=complex)
    for label in range(grid.size):
        grid[label] = i_axis[label >> q_bits] + 1j * q_axis[label & ((1 << q_bits) - 1)]
    return grid


def _grid_psk(n_bits: int) -> np.ndarray:
    m = 1 << n_bits
    grid = np.empty(m, dtype=complex)
    for rank in range(m):
        grid[_gray(rank)] = np.exp(2j * np.pi * rank / m)
    return grid


# Two-ring 8-QAM: inner square at (+-1 +-1j), outer points at (+-3, +-3j).
# The inner square alone forms the minimum-distance pairs (d = 2/sqrt(5.5),
# larger than 8-PSK's), so the dominant errors are Gray; half of the
# second-tier inner/outer pairs are Gray as well.  A rectangular 2x4 grid was
# tried first but its higher neighbor count makes it lose to 8-PSK at low
# SNR, inverting the required modulation ordering.
def _grid_tworing8() -> np.ndarray:
    grid = np.empty(8, dtype=complex)
    inner = (1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j)     # at 45 + 90k degrees
    outer = (3 + 0j, 3j, -3 + 0j, -3j)             # at 90k degrees
    for rank in range(4):
        grid[_gray(rank)] = inner[rank]
        grid[0b100 | _gray(rank)] = outer[rank]
    return grid


# Cross 32-QAM: 6x6 odd-integer grid minus the (+-5, +-5) corners.  Two Gray
# quadrant bits pick the signs; three bits walk a Gray path through the eight
# first-quadrant points.  Mirrored quadrants keep every boundary-crossing
# neighbor pair at one differing bit; two chord pairs per quadrant remain
# non-Gray, which is the unavoidable defect of the cross shape.
_CROSS_PATH = ((1, 1), (1, 3), (1, 5), (3, 5), (3, 3), (3, 1), (5, 1), (5, 3))


def _grid_cross32() -> np.ndarray:
    grid = np.empty(32, dtype=complex)
    for quad in range(4):
        sx = -1 if quad & 1 else 1
        sy = -1 if quad & 2 else 1
        for rank, (x, y) in enumerate(_CROSS_PATH):
            grid[(quad << 3) | _gray(rank)] = sx * x + 1j * sy * y
    return grid


def _build(name: str, n_bits: int, grid: np.ndarray) -> Constellation:
    scale = float(np.sqrt(np.mean(np.abs(grid) ** 2)))
    return Constellation(name, n_bits, grid, scale)


CONSTELLATIONS: dict[str, Constellation] = {
    "qpsk": _build("qpsk", 2, _grid_product(1, 1)),
    "8psk": _build("8psk", 3, _grid_psk(3)),
    "8qam": _build("8qam", 3, _grid_tworing8()),
    "16qam": _build("16qam", 4, _grid_product(2, 2)),
    "32qam": _build("32qam", 5, _grid_cross32()),
    "64qam": _build("64qam", 6, _grid_product(3, 3)),
}

_ALIASES = {"4qam": "qpsk", "qam4": "qpsk", "psk8": "8psk", "qam8": "8qam",
            "qam16": "16qam", "qam32": "32qam", "qam64": "64qam"}


def get_constellation(name: str) -> Constellation:
    key = name.strip().lower().replace("-", "").replace("_", "")
    key = _ALIASES.get(key, key)
    if key not in CONSTELLATIONS:
        raise KeyError(f"unknown modulation {name!r}; known: {', '.join(SCHEMES)}")
    return CONSTELLATIONS[key]


def map_bits(data: np.ndarray, c: Constellation) -> np.ndarray:
    """Group log2(M) bits (MSB first) into one unit-energy complex symbol."""
    data = np.asarray(data, dtype=np.uint8)
    b = c.bits_per_symbol
    if data.shape[-1] % b:
        raise FramingError(
            f"{data.shape[-1]} bits do not fill whole {c.name} symbols of {b} bits"
        )
    groups = data.reshape(data.shape[:-1] + (-1, b))
    weights = 1 << np.arange(b - 1, -1, -1)
    labels = (groups * weights).sum(axis=-1)
    return c.points[labels]


def demap_symbols(symbols: np.ndarray, c: Constellation, chunk: int = 1 << 15) -> np.ndarray:
    """Hard decisions: nearest point in Euclidean distance, MSB-first bits."""
    flat = np.asarray(symbols).reshape(-1) * c.scale
    labels = np.empty(flat.size, dtype=np.intp)
    for start in range(0, flat.size, chunk):
        z = flat[start : start + chunk]
        dr = z.real[:, None] - c.grid.real[None, :]
        di = z.imag[:, None] - c.grid.imag[None, :]
        labels[start : start + z.size] = np.argmin(dr * dr + di * di, axis=1)
    b = c.bits_per_symbol
    shifts = np.arange(b - 1, -1, -1)
    bits = (labels[:, None] >> shifts) & 1
    shape = np.shape(symbols)
    return bits.astype(np.uint8).reshape(shape[:-1] + (-1,) if shape else (b,))


def write_point_table(path) -> None:
    """Dump every scheme's labeled points as CSV with round-trip-exact floats."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["scheme", "label_bits", "real", "imag"])
        for name in SCHEMES:
            c = CONSTELLATIONS[name]
            points = c.points
            for label in range(c.order):
                writer.writerow([
                    name,
                    format(label, f"0{c.bits_per_symbol}b"),
                    repr(float(points[label].real)),
                    repr(float(points[label].imag)),
                ])


def read_point_table(path) -> dict[str, np.ndarray]:
    """Parse the fixture back into label-indexed point arrays."""
    tables: dict[str, list] = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            tables.setdefault(row["scheme"], []).append(
                (int(row["label_bits"], 2), float(row["real"]), float(row["imag"]))
            )
    out = {}
    for name, rows in tables.items():
        arr = np.empty(len(rows), dtype=complex)
        for label, re, im in rows:
            arr[label] = re + 1j * im
        out[name] = arr
    return out
