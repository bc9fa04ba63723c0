"""Alamouti space-time coding and linear detection.

Two detectors solve the same per-subcarrier least-squares problem:

* ``zf_detect`` stacks the two received slots (second slot conjugated) into an
  effective tall complex system and applies the pseudo-inverse weights
  W = (H^H H)^-1 H^H.
* ``realzf_detect`` rewrites the raw slot equations over the reals, stacking
  [a1_re, a2_re, a1_im, a2_im], and solves the real normal equations.

They must agree to numerical precision; keeping the constructions independent
makes that agreement a meaningful cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import modem
from .errors import FramingError, SingularChannelError

COND_CAP_DEFAULT = 1e8


def stbc_encode(frames: np.ndarray) -> np.ndarray:
    """Alamouti arrangement over slot pairs along the leading axis.

    For each symbol pair (a1, a2): antenna 1 sends [a1, -conj(a2)] and
    antenna 2 sends [a2, conj(a1)].  Output shape is (2,) + frames.shape.
    Transmit power weighting is left to the caller.
    """
    frames = np.asarray(frames)
    if frames.shape[0] % 2:
        raise FramingError(f"{frames.shape[0]} slots do not form whole Alamouti pairs")
    a1 = frames[0::2]
    a2 = frames[1::2]
    out = np.empty((2,) + frames.shape, dtype=complex)
    out[0, 0::2] = a1
    out[0, 1::2] = -np.conj(a2)
    out[1, 0::2] = a2
    out[1, 1::2] = np.conj(a1)
    return out


@dataclass
class EffectiveChannel:
    """Stacked linear model y_eff = H_eff a for one (or a batch of) block."""

    h_eff: np.ndarray  # (..., 2*n_rx, 2)
    y_eff: np.ndarray  # (..., 2*n_rx)


@dataclass
class RealDecomposition:
    """Real-valued form of the same block model: y_hat = H_hat u."""

    h_hat: np.ndarray  # (..., 4*n_rx, 4), columns (a1_re, a2_re, a1_im, a2_im)
    y_hat: np.ndarray  # (..., 4*n_rx)


@dataclass
class DetectorOutput:
    estimates: np.ndarray       # (..., 2) complex symbol estimates per block
    bits: np.ndarray | None = None


def alamouti_effective(h: np.ndarray) -> np.ndarray:
    """Stack per-antenna rows [h1j, h2j] and [conj(h2j), -conj(h1j)].

    ``h`` has shape (..., n_rx, 2).  The result's Gram matrix is
    (sum |h|^2) * I, the Alamouti orthogonality property.
    """
    h = np.asarray(h)
    n_rx = h.shape[-2]
    h1 = h[..., 0]
    h2 = h[..., 1]
    heff = np.empty(h.shape[:-2] + (2 * n_rx, 2), dtype=complex)
    heff[..., 0::2, 0] = h1
    heff[..., 0::2, 1] = h2
    heff[..., 1::2, 0] = np.conj(h2)
    heff[..., 1::2, 1] = -np.conj(h1)
    return heff


def stack_received(y: np.ndarray) -> np.ndarray:
    """Interleave slot-1 samples with conjugated slot-2 samples per antenna."""
    y = np.asarray(y)
    yeff = np.empty(y.shape[:-2] + (2 * y.shape[-2],), dtype=complex)
    yeff[..., 0::2] = y[..., 0]
    yeff[..., 1::2] = np.conj(y[..., 1])
    return yeff


def build_effective(h: np.ndarray, y: np.ndarray) -> EffectiveChannel:
    """From gains (..., n_rx, 2) and received slots (..., n_rx, 2)."""
    if np.shape(h)[-1] != 2 or np.shape(y)[-1] != 2:
        raise ValueError("expected 2 transmit streams and 2 time slots")
    return EffectiveChannel(alamouti_effective(h), stack_received(y))


def _gram(h: np.ndarray) -> np.ndarray:
    return np.einsum("...ji,...jk->...ik", np.conj(h), h)


def _gram_condition(gram: np.ndarray) -> np.ndarray:
    """Condition number of H from its 2x2 Gram eigenvalues, in closed form."""
    tr = gram[..., 0, 0].real + gram[..., 1, 1].real
    det = (gram[..., 0, 0] * gram[..., 1, 1] - gram[..., 0, 1] * gram[..., 1, 0]).real
    disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
    lo = (tr - disc) / 2.0
    hi = (tr + disc) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.sqrt(hi / lo)
    return np.where(lo > 0.0, cond, np.inf)


def zf_weights(h_eff: np.ndarray, cond_cap: float = COND_CAP_DEFAULT) -> np.ndarray:
    """Left pseudo-inverse W = (H^H H)^-1 H^H for 2-column channels.

    Raises when any block's condition number exceeds the cap; the caller is
    expected to redraw such channels and account for them in diagnostics.
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    if h_eff.shape[-1] != 2:
        raise ValueError("weights are defined for 2 transmit streams")
    gram = _gram(h_eff)
    cond = _gram_condition(gram)
    if np.any(cond > cond_cap):
        n_bad = int(np.count_nonzero(cond > cond_cap))
        raise SingularChannelError(
            f"{n_bad} channel block(s) exceed condition cap {cond_cap:g}"
        )
    det = gram[..., 0, 0] * gram[..., 1, 1] - gram[..., 0, 1] * gram[..., 1, 0]
    inv = np.empty_like(gram)
    inv[..., 0, 0] = gram[..., 1, 1]
    inv[..., 1, 1] = gram[..., 0, 0]
    inv[..., 0, 1] = -gram[..., 0, 1]
    inv[..., 1, 0] = -gram[..., 1, 0]
    inv = inv / det[..., None, None]
    return np.einsum("...ik,...jk->...ij", inv, np.conj(h_eff))


def zf_detect(
    eff: EffectiveChannel,
    constellation: modem.Constellation | None = None,
    cond_cap: float = COND_CAP_DEFAULT,
) -> DetectorOutput:
    """Apply the pseudo-inverse weights to the stacked receive vector."""
    w = zf_weights(eff.h_eff, cond_cap)
    est = np.einsum("...ij,...j->...i", w, eff.y_eff)
    bits = modem.demap_symbols(est, constellation) if constellation else None
    return DetectorOutput(est, bits)


def real_decomposition(h: np.ndarray, y: np.ndarray) -> RealDecomposition:
    """Real-valued stacking of the raw two-slot equations.

    Per receive antenna j the four rows are Re/Im of slot 1 and Re/Im of
    slot 2, acting on u = [a1_re, a2_re, a1_im, a2_im].  Conjugations in the
    Alamouti slot-2 transmission are linear over the reals, so no slot needs
    pre-conjugation here.
    """
    h = np.asarray(h)
    y = np.asarray(y)
    n_rx = h.shape[-2]
    h1r, h1i = h[..., 0].real, h[..., 0].imag
    h2r, h2i = h[..., 1].real, h[..., 1].imag

    hh = np.empty(h.shape[:-2] + (4 * n_rx, 4))
    hh[..., 0::4, 0], hh[..., 0::4, 1], hh[..., 0::4, 2], hh[..., 0::4, 3] = h1r, h2r, -h1i, -h2i
    hh[..., 1::4, 0], hh[..., 1::4, 1], hh[..., 1::4, 2], hh[..., 1::4, 3] = h1i, h2i, h1r, h2r
    hh[..., 2::4, 0], hh[..., 2::4, 1], hh[..., 2::4, 2], hh[..., 2::4, 3] = h2r, -h1r, h2i, -h1i
    hh[..., 3::4, 0], hh[..., 3::4, 1], hh[..., 3::4, 2], hh[..., 3::4, 3] = h2i, -h1i, -h2r, h1r

    yh = np.empty(y.shape[:-2] + (4 * n_rx,))
    yh[..., 0::4] = y[..., 0].real
    yh[..., 1::4] = y[..., 0].imag
    yh[..., 2::4] = y[..., 1].real
    yh[..., 3::4] = y[..., 1].imag
    return RealDecomposition(hh, yh)


def realzf_detect(
    h: np.ndarray,
    y: np.ndarray,
    constellation: modem.Constellation | None = None,
) -> DetectorOutput:
    """Solve the real normal equations (H_hat^T H_hat) u = H_hat^T y_hat."""
    dec = real_decomposition(h, y)
    a = np.einsum("...ji,...jk->...ik", dec.h_hat, dec.h_hat)
    b = np.einsum("...ji,...j->...i", dec.h_hat, dec.y_hat)
    try:
        u = np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularChannelError("real-valued channel matrix is singular") from exc
    est = u[..., 0:2] + 1j * u[..., 2:4]
    bits = modem.demap_symbols(est, constellation) if constellation else None
    return DetectorOutput(est, bits)
