"""Bit-level stages: PRBS source, direct-sequence spreading, rate-1/2 FEC.

Bit streams are numpy uint8 arrays of 0/1 values.  Every function accepts a
trailing-axis layout, so a batch of frames can be processed as a 2-D array
``(n_frames, n_bits)`` in one call.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FramingError


class Prbs:
    """Fibonacci LFSR over GF(2).

    ``taps`` is the feedback polynomial as an integer bit mask including the
    highest-order and constant terms, e.g. x^3 + x^2 + 1 -> 0b1101 (0o15).
    The register state advances with each generated bit, so consecutive calls
    continue the same sequence.  A maximal-length tap set yields period
    2^r - 1 for an r-bit register.
    """

    def __init__(self, taps: int, state: int):
        degree = taps.bit_length() - 1
        if degree < 1:
            raise ValueError(f"tap mask {taps:#o} has no feedback terms")
        if not taps & 1:
            raise ValueError(f"tap mask {taps:#o} must include the constant term")
        if state == 0:
            raise ValueError("LFSR seeded with all-zero state would lock up")
        if not 0 < state < (1 << degree):
            raise ValueError(f"state {state:#b} does not fit in {degree} register bits")
        self.taps = taps
        self.state = state
        self.degree = degree
        # feedback taps exclude the x^r term; output is the register LSB
        self._fb_mask = taps & ((1 << degree) - 1)

    def generate(self, n: int) -> np.ndarray:
        """Emit the next ``n`` bits, advancing the register."""
        if n < 0:
            raise ValueError("bit count must be non-negative")
        out = np.empty(n, dtype=np.uint8)
        state = self.state
        mask = self._fb_mask
        top = self.degree - 1
        for i in range(n):
            out[i] = state & 1
            fb = (state & mask).bit_count() & 1
            state = (state >> 1) | (fb << top)
        self.state = state
        return out


def prbs_generate(prbs: Prbs, n: int) -> np.ndarray:
    return prbs.generate(n)


@dataclass(frozen=True)
class SpreadingCode:
    """8-chip spreading signature; one payload bit becomes 8 chips."""

    chips: tuple[int, ...] = (1, 0, 1, 1, 0, 0, 1, 0)

    def __post_init__(self):
        if len(self.chips) != 8:
            raise ValueError(f"spreading code must have 8 chips, got {len(self.chips)}")
        if any(c not in (0, 1) for c in self.chips):
            raise ValueError("spreading chips must be 0/1")
        if len(set(self.chips)) < 2:
            raise ValueError("all-equal spreading code makes despreading degenerate")

    @property
    def factor(self) -> int:
        return len(self.chips)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.chips, dtype=np.uint8)


def spread(data: np.ndarray, code: SpreadingCode) -> np.ndarray:
    """XOR each data bit with the chip sequence: output is 8x longer."""
    data = np.asarray(data, dtype=np.uint8)
    chips = data[..., :, None] ^ code.as_array()
    return chips.reshape(data.shape[:-1] + (data.shape[-1] * code.factor,))


def despread(chips: np.ndarray, code: SpreadingCode) -> np.ndarray:
    """Majority-vote 8 chips back into one bit.

    A 4/4 tie resolves to 0, so a bit decision flips only when 5 or more of
    its chips are corrupted.
    """
    chips = np.asarray(chips, dtype=np.uint8)
    sf = code.factor
    if chips.shape[-1] % sf:
        raise FramingError(
            f"chip count {chips.shape[-1]} is not a multiple of the spreading factor {sf}"
        )
    blocks = chips.reshape(chips.shape[:-1] + (-1, sf)) ^ code.as_array()
    votes = blocks.sum(axis=-1, dtype=np.int16)
    return (votes > sf // 2).astype(np.uint8)


@dataclass(frozen=True)
class ConvCode:
    """Rate-1/2 feedforward convolutional code with zero-flush termination."""

    constraint_length: int = 3
    generators: tuple[int, int] = (0o7, 0o5)

    def __post_init__(self):
        if len(self.generators) != 2:
            raise ValueError("rate-1/2 code needs exactly two generators")
        k = self.constraint_length
        if k < 2:
            raise ValueError("constraint length must be at least 2")
        for g in self.generators:
            if not 0 < g < (1 << k):
                raise ValueError(f"generator {g:#o} does not fit in {k} taps")
            if not g & 1:
                raise ValueError(f"generator {g:#o} must tap the newest bit")

    @property
    def n_states(self) -> int:
        return 1 << (self.constraint_length - 1)


def conv_encode(data: np.ndarray, code: ConvCode = ConvCode()) -> np.ndarray:
    """Encode with K-1 zero tail bits; output length is 2*(len + K - 1).

    Output bit pairs are (g0, g1) per input step.  The register starts
    all-zero, and the flush returns it to zero so the decoder can assume a
    terminated trellis.
    """
    data = np.asarray(data, dtype=np.uint8)
    k = code.constraint_length
    n_steps = data.shape[-1] + k - 1
    # window w_n = (u[n-K+1] .. u[n]); generator bit p taps u[n-p]
    padded = np.zeros(data.shape[:-1] + (n_steps + k - 1,), dtype=np.uint8)
    padded[..., k - 1 : k - 1 + data.shape[-1]] = data
    streams = []
    for g in code.generators:
        acc = np.zeros(data.shape[:-1] + (n_steps,), dtype=np.uint8)
        for p in range(k):
            if (g >> p) & 1:
                acc ^= padded[..., k - 1 - p : k - 1 - p + n_steps]
        streams.append(acc)
    out = np.stack(streams, axis=-1)
    return out.reshape(data.shape[:-1] + (2 * n_steps,))


def _trellis_tables(code: ConvCode):
    """Predecessor and branch-output tables indexed by (next_state, branch)."""
    k = code.constraint_length
    n_states = code.n_states
    pred = np.empty((n_states, 2), dtype=np.intp)
    out0 = np.empty((n_states, 2), dtype=np.uint8)
    out1 = np.empty((n_states, 2), dtype=np.uint8)
    g0, g1 = code.generators
    for s_next in range(n_states):
        b = s_next & 1
        for j in range(2):
            s_prev = (s_next >> 1) | (j << (k - 2))
            w = (s_prev << 1) | b
            pred[s_next, j] = s_prev
            out0[s_next, j] = (w & g0).bit_count() & 1
            out1[s_next, j] = (w & g1).bit_count() & 1
    return pred, out0, out1


def viterbi_decode(coded: np.ndarray, code: ConvCode = ConvCode()) -> np.ndarray:
    """Minimum-Hamming-distance sequence decoder for a zero-flushed stream.

    Accepts a single stream or a batch ``(n_frames, n_coded)``; every frame
    must have the same length.  Metric ties prefer the lower-indexed
    predecessor state, which makes the decoder deterministic.
    """
    coded = np.asarray(coded, dtype=np.uint8)
    single = coded.ndim == 1
    rx = np.atleast_2d(coded)
    if rx.shape[-1] % 2:
        raise FramingError(f"coded length {rx.shape[-1]} is odd")
    n_steps = rx.shape[-1] // 2
    k = code.constraint_length
    if n_steps == 0:
        out = np.zeros(rx.shape[:-1] + (0,), dtype=np.uint8)
        return out[0] if single else out
    if n_steps < k - 1:
        raise FramingError(f"{n_steps} coded pairs cannot hold a {k - 1}-bit flush tail")

    pred, out0, out1 = _trellis_tables(code)
    n_frames = rx.shape[0]
    n_states = code.n_states
    big = np.int32(1 << 24)

    metric = np.full((n_frames, n_states), big, dtype=np.int32)
    metric[:, 0] = 0
    back = np.empty((n_frames, n_steps, n_states), dtype=np.uint8)
    r0 = rx[:, 0::2].astype(np.int32)
    r1 = rx[:, 1::2].astype(np.int32)
    for t in range(n_steps):
        bm = (out0[None, :, :] ^ r0[:, t, None, None]) + (out1[None, :, :] ^ r1[:, t, None, None])
        cand = metric[:, pred] + bm
        take1 = cand[:, :, 1] < cand[:, :, 0]
        metric = np.where(take1, cand[:, :, 1], cand[:, :, 0])
        back[:, t, :] = take1

    # terminated trellis: trace back from the all-zero state
    bits = np.empty((n_frames, n_steps), dtype=np.uint8)
    state = np.zeros(n_frames, dtype=np.intp)
    rows = np.arange(n_frames)
    for t in range(n_steps - 1, -1, -1):
        bits[:, t] = state & 1
        state = pred[state, back[rows, t, state]]
    data = bits[:, : n_steps - (k - 1)]
    return data[0] if single else data
