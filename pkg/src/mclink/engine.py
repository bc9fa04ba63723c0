"""End-to-end chain assembly and Monte Carlo BER estimation.

Transmit chain per frame: message bits -> chip spreading -> rate-1/2
convolutional encoding -> constellation mapping -> serial/parallel framing ->
Alamouti pairing per subcarrier over two consecutive multicarrier symbols ->
IDFT + cyclic prefix per antenna.  The receiver mirrors it: prefix strip +
DFT, per-subcarrier linear detection, demapping, Viterbi decoding,
majority-vote despreading, payload comparison.

Fading is flat per subcarrier and quasi-static over each Alamouti pair, so
the channel acts on the frequency-domain symbols directly; the multicarrier
transform round-trips every sample to keep the chain faithful and the energy
bookkeeping exact.

Work is split into fixed-size chunks of whole FEC frames.  Each chunk derives
its own RNG substream from (seed, modulation, SNR, chunk index), and the stop
rule consumes chunks strictly in index order, which makes every output
independent of worker count and scheduling.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import modem
from .bits import ConvCode, Prbs, SpreadingCode, conv_encode, despread, spread, viterbi_decode
from .channel import ChannelRealization, NoiseConfig, apply_channel, complex_normal, draw_channel
from .config import SimConfig, validate
from .mimo import build_effective, realzf_detect, stbc_encode, zf_detect
from .ofdm import OfdmConfig, ofdm_demodulate, ofdm_modulate
from .results import BerRecord, GainRecord, gain_vs_reference, write_ber_csv, write_gain_csv, write_manifest

#: Blocks whose total channel energy falls below this are redrawn; with
#: continuous fading this never fires, it guards injected degenerate cases.
GRAM_FLOOR = 1e-12


def _chunk_seed(seed: int, modulation: str, snr_db: float, chunk: int) -> np.random.SeedSequence:
    name_word = int.from_bytes(modulation.encode("ascii"), "big")
    snr_word = int(np.float64(snr_db).view(np.uint64))
    return np.random.SeedSequence([seed, name_word, snr_word, chunk])


def effective_es_n0_db(cfg: SimConfig, c: modem.Constellation, snr_db: float) -> float:
    """Symbol-level Es/N0 for a grid SNR under the configured reference."""
    if cfg.snr_reference == "es" or math.isinf(snr_db):
        return snr_db
    code_rate = 0.5 if cfg.fec else 1.0
    return snr_db + 10.0 * math.log10(c.bits_per_symbol * code_rate)


def _redraw_weak_blocks(ch: ChannelRealization, rng: np.random.Generator) -> int:
    """Replace blocks with numerically zero energy; returns the redraw count."""
    total = 0
    while True:
        g = np.sum(np.abs(ch.h) ** 2, axis=(-2, -1))
        bad = ~(g > GRAM_FLOOR)
        n_bad = int(np.count_nonzero(bad))
        if n_bad == 0:
            return total
        total += n_bad
        ch.h[bad] = complex_normal(rng, (n_bad,) + ch.h.shape[-2:])


def _frame_grid(stream: np.ndarray, n_subcarriers: int, pair_slots: bool) -> np.ndarray:
    """Zero-pad a symbol stream into (n_slots, n_subcarriers) frames."""
    n_slots = -(-stream.size // n_subcarriers)
    if pair_slots and n_slots % 2:
        n_slots += 1
    grid = np.zeros(n_slots * n_subcarriers, dtype=complex)
    grid[: stream.size] = stream
    return grid.reshape(n_slots, n_subcarriers)


def _detect_alamouti(cfg: SimConfig, frames: np.ndarray, snr_db: float,
                     rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Frames through STBC, OFDM, fading and linear detection; returns the
    per-slot symbol estimates and the weak-channel redraw count."""
    ofdm_cfg = OfdmConfig(cfg.n_subcarriers, cfg.cp_len)
    amp = 1.0 / math.sqrt(2.0) if cfg.split_tx_power else 1.0

    tx_time = ofdm_modulate(stbc_encode(frames) * amp, ofdm_cfg)
    x_freq = ofdm_demodulate(tx_time, ofdm_cfg)

    n_slots = frames.shape[0]
    ch = draw_channel(rng, cfg.n_subcarriers, n_blocks=n_slots // 2, n_rx=cfg.n_rx)
    redraws = _redraw_weak_blocks(ch, rng)
    y = apply_channel(x_freq, ch, NoiseConfig(snr_db), rng)

    # one detection problem per (pair, subcarrier)
    h_blocks = ch.h * amp
    y_blocks = y.reshape(cfg.n_rx, n_slots // 2, 2, cfg.n_subcarriers).transpose(1, 3, 0, 2)
    if cfg.detector == "realzf":
        out = realzf_detect(h_blocks, y_blocks)
    else:
        out = zf_detect(build_effective(h_blocks, y_blocks), cond_cap=cfg.cond_cap)
    est = out.estimates.transpose(0, 2, 1).reshape(n_slots, cfg.n_subcarriers)
    return est, redraws


def _detect_siso(cfg: SimConfig, frames: np.ndarray, snr_db: float,
                 rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Single-antenna reference path: per-subcarrier scalar inversion."""
    ofdm_cfg = OfdmConfig(cfg.n_subcarriers, cfg.cp_len)
    x_freq = ofdm_demodulate(ofdm_modulate(frames, ofdm_cfg), ofdm_cfg)
    ch = draw_channel(rng, cfg.n_subcarriers, n_blocks=frames.shape[0],
                      n_rx=1, n_tx=1, coherence=1)
    redraws = _redraw_weak_blocks(ch, rng)
    y = apply_channel(x_freq[None], ch, NoiseConfig(snr_db), rng)[0]
    return y / ch.h[:, :, 0, 0], redraws


def _run_chunk(cfg: SimConfig, modulation: str, snr_db: float, chunk: int) -> tuple[int, int, int]:
    """One deterministic batch of frames; returns (bits, errors, redraws)."""
    c = modem.get_constellation(modulation)
    rng = np.random.default_rng(_chunk_seed(cfg.seed, c.name, snr_db, chunk))

    degree = cfg.message_taps.bit_length() - 1
    source = Prbs(cfg.message_taps, int(rng.integers(1, 1 << degree)))
    payload = source.generate(cfg.frames_per_chunk * cfg.frame_payload_bits)
    payload = payload.reshape(cfg.frames_per_chunk, cfg.frame_payload_bits)

    code = SpreadingCode(cfg.spreading_chips)
    conv = ConvCode(cfg.conv_constraint_length, cfg.conv_generators)
    tx_bits = spread(payload, code) if cfg.spreading else payload
    coded = conv_encode(tx_bits, conv) if cfg.fec else tx_bits
    coded_len = coded.shape[-1]
    pad = (-coded_len) % c.bits_per_symbol
    if pad:
        coded = np.concatenate(
            [coded, np.zeros(coded.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1
        )
    symbols = modem.map_bits(coded, c)
    stream = symbols.reshape(-1)

    es_db = effective_es_n0_db(cfg, c, snr_db)
    if cfg.tx_mode == "siso":
        frames = _frame_grid(stream, cfg.n_subcarriers, pair_slots=False)
        est, redraws = _detect_siso(cfg, frames, es_db, rng)
    else:
        frames = _frame_grid(stream, cfg.n_subcarriers, pair_slots=True)
        est, redraws = _detect_alamouti(cfg, frames, es_db, rng)

    est_stream = est.reshape(-1)[: stream.size].reshape(symbols.shape)
    rx_coded = modem.demap_symbols(est_stream, c)[..., :coded_len]
    rx_bits = viterbi_decode(rx_coded, conv) if cfg.fec else rx_coded
    rx_payload = despread(rx_bits, code) if cfg.spreading else rx_bits

    errors = int(np.count_nonzero(rx_payload != payload))
    return payload.size, errors, redraws


def run_chain(cfg: SimConfig, modulation: str, snr_db: float) -> BerRecord:
    """Accumulate chunks until min_bits is reached and either the error
    target is met or the bit cap is hit.  Deterministic in (cfg, seed)."""
    cfg = validate(cfg)
    name = modem.get_constellation(modulation).name
    bits = errors = redraws = 0
    chunk = 0
    while True:
        b, e, r = _run_chunk(cfg, name, snr_db, chunk)
        bits += b
        errors += e
        redraws += r
        chunk += 1
        if bits >= cfg.min_bits and (errors >= cfg.max_bit_errors or bits >= cfg.max_bits):
            break
    return BerRecord.from_counts(name, snr_db, bits, errors, redraws)


def sweep(cfg: SimConfig) -> list[BerRecord]:
    """Every modulation at every grid SNR, in deterministic row order."""
    cfg = validate(cfg)
    points = [(mod, snr) for mod in cfg.modulations for snr in cfg.snr_grid_db]
    if cfg.workers == 1:
        return [run_chain(cfg, mod, snr) for mod, snr in points]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda p: run_chain(cfg, p[0], p[1]), points))


def compute_gains(records: list[BerRecord], cfg: SimConfig) -> list[GainRecord]:
    """Gain of each swept modulation against the configured reference."""
    cfg = validate(cfg)
    ref = modem.get_constellation(cfg.gain_reference).name
    have = {r.modulation for r in records}
    at = cfg.gain_at_snr_db
    if ref not in have or not any(r.snr_db == at for r in records if r.modulation == ref):
        return []
    return [
        gain_vs_reference(records, mod, ref, at)
        for mod in cfg.modulations
        if mod in have
    ]


def emit_results(records, gains, cfg: SimConfig, out_dir, wall_time_s: float) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "ber": out / "ber.csv",
        "gains": out / "gains.csv",
        "manifest": out / "manifest.json",
    }
    write_ber_csv(records, paths["ber"])
    write_gain_csv(gains, paths["gains"])
    write_manifest(
        cfg, paths["manifest"], wall_time_s,
        {"total_redraws": sum(r.redraws for r in records)},
    )
    return paths


def run_sweep_and_emit(cfg: SimConfig, out_dir) -> tuple[list[BerRecord], list[GainRecord], dict]:
    start = time.perf_counter()
    records = sweep(cfg)
    gains = compute_gains(records, cfg)
    paths = emit_results(records, gains, cfg, out_dir, time.perf_counter() - start)
    return records, gains, paths
