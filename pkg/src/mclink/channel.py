"""Per-subcarrier Rayleigh block fading and AWGN injection.

Every subcarrier of every space-time block sees an independent n_rx x n_tx
matrix of unit-variance circularly-symmetric complex Gaussian gains, held
constant over the block's ``coherence`` time slots (quasi-static).  Noise is
i.i.d. across antennas, slots and subcarriers with variance sigma2 per
complex sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseConfig:
    """Noise level from an Es/N0 target, with unit received symbol energy."""

    snr_db: float

    @property
    def sigma2(self) -> float:
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return 10.0 ** (-self.snr_db / 10.0)


@dataclass
class ChannelRealization:
    """Gains with shape (..., n_subcarriers, n_rx, n_tx); h[..., j, i] links
    transmit antenna i to receive antenna j."""

    h: np.ndarray
    coherence: int = 2

    @property
    def n_rx(self) -> int:
        return self.h.shape[-2]

    @property
    def n_tx(self) -> int:
        return self.h.shape[-1]


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: real and imaginary parts each with variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def draw_channel(
    rng: np.random.Generator,
    n_subcarriers: int,
    n_blocks: int | None = None,
    n_rx: int = 4,
    n_tx: int = 2,
    coherence: int = 2,
) -> ChannelRealization:
    """Independent fading per subcarrier (and per block when batched)."""
    shape = (n_subcarriers, n_rx, n_tx)
    if n_blocks is not None:
        shape = (n_blocks,) + shape
    return ChannelRealization(complex_normal(rng, shape), coherence)


def apply_channel(
    x: np.ndarray,
    ch: ChannelRealization,
    noise: NoiseConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """y_j = sum_i h_ij a_i + n_j per subcarrier and slot.

    ``x`` holds per-antenna frequency-domain frames with shape
    (n_tx, n_slots, n_subcarriers); the realization must be batched with one
    gain matrix per coherence interval, i.e. n_slots = coherence * n_blocks.
    Returns the received frames, shape (n_rx, n_slots, n_subcarriers).
    """
    x = np.asarray(x)
    if x.ndim != 3 or ch.h.ndim != 4:
        raise ValueError("expected x (n_tx, n_slots, n_sc) and batched gains")
    n_tx, n_slots, n_sc = x.shape
    n_blocks = ch.h.shape[0]
    if n_tx != ch.n_tx or n_sc != ch.h.shape[1] or n_slots != n_blocks * ch.coherence:
        raise ValueError(
            f"stream shape {x.shape} does not match gains {ch.h.shape} "
            f"with coherence {ch.coherence}"
        )
    xb = x.reshape(n_tx, n_blocks, ch.coherence, n_sc)
    y = np.einsum("bnji,ibcn->jbcn", ch.h, xb).reshape(ch.n_rx, n_slots, n_sc)
    if noise.sigma2 > 0.0:
        y = y + complex_normal(rng, y.shape) * np.sqrt(noise.sigma2)
    return y
