"""Controlled fidelity reduction: downsampling, requantization, truncation.

These simulate cheaper hardware: a shorter capture window, a slower ADC,
a less precise ADC. Composition order in `apply` is truncate -> resample
-> quantize, so the reduced precision is what the simulated sensor emits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .audio_io import AudioClip
from .errors import InvalidDepth, InvalidLength, InvalidRate, UpsampleUnsupported

log = logging.getLogger(__name__)

FULL_LENGTH = "full"

ANTIALIAS_TAPS = 127
ANTIALIAS_CUTOFF_FRACTION = 0.45  # of the target rate


class ResampleMode(Enum):
    """How sample-rate reduction picks its output samples."""

    DECIMATE = "decimate"  # periodic nearest-sample pick, no filtering
    ANTIALIASED = "antialiased"  # windowed-sinc low-pass, then pick


@dataclass(frozen=True)
class DegradationConfig:
    """One grid point: target rate, target depth, and capture length.

    clip_length_s is a positive number of seconds or the string "full"
    (keep the native length).
    """

    sample_rate_hz: int
    bit_depth: int
    clip_length_s: float | str = FULL_LENGTH

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise InvalidRate(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if not 1 <= self.bit_depth <= 32:
            raise InvalidDepth(f"bit_depth must be in 1..32, got {self.bit_depth}")
        if self.clip_length_s != FULL_LENGTH:
            if not isinstance(self.clip_length_s, (int, float)) or self.clip_length_s <= 0:
                raise InvalidLength(
                    f"clip_length_s must be positive or 'full', got {self.clip_length_s!r}"
                )


def resample(clip: AudioClip, target_hz: int, mode: ResampleMode = ResampleMode.DECIMATE) -> AudioClip:
    """Reduce the sample rate to target_hz (upsampling is unsupported).

    DECIMATE picks the source sample nearest each output instant via a
    phase accumulator, handling non-integer ratios (22050 -> 16000).
    ANTIALIASED first applies a linear-phase windowed-sinc low-pass FIR
    (127 taps, cutoff 0.45 * target_hz) so content above the new Nyquist
    is attenuated instead of aliased. Output length is
    floor(len * target / source); resampling to the source rate is the
    identity in either mode.
    """
    if target_hz <= 0:
        raise InvalidRate(f"target_hz must be positive, got {target_hz}")
    if target_hz > clip.sample_rate_hz:
        raise UpsampleUnsupported(
            f"target {target_hz} Hz exceeds source {clip.sample_rate_hz} Hz"
        )
    if target_hz == clip.sample_rate_hz:
        return clip

    x = clip.samples
    if mode is ResampleMode.ANTIALIASED:
        cutoff = ANTIALIAS_CUTOFF_FRACTION * target_hz / clip.sample_rate_hz  # cycles/sample
        m = np.arange(ANTIALIAS_TAPS) - (ANTIALIAS_TAPS - 1) / 2
        taps = 2.0 * cutoff * np.sinc(2.0 * cutoff * m) * np.hamming(ANTIALIAS_TAPS)
        taps /= taps.sum()  # unit DC gain
        x = np.convolve(x, taps, mode="same")  # odd-length kernel: zero net delay
        x = np.clip(x, -1.0, 1.0)  # FIR overshoot

    n_out = int(np.floor(x.size * target_hz / clip.sample_rate_hz))
    n_out = max(n_out, 1)
    step = clip.sample_rate_hz / target_hz
    # phase accumulator: output instant n maps to source index round(n * step)
    idx = np.floor(np.arange(n_out) * step + 0.5).astype(np.int64)
    idx = np.minimum(idx, x.size - 1)
    return AudioClip(
        samples=x[idx],
        sample_rate_hz=int(target_hz),
        source_bit_depth=clip.source_bit_depth,
        label=clip.label,
        origin=clip.origin,
    )


def quantize(clip: AudioClip, bit_depth: int) -> AudioClip:
    """Requantize to bit_depth with a mid-tread uniform quantizer.

    q = clamp(round_half_away_from_zero(x * 2^(b-1)), -2^(b-1), 2^(b-1)-1)
    and x' = q / 2^(b-1). Zero maps to zero, the operation is idempotent,
    and |x - x'| <= 2^-b for x in [-1, 1 - 2^-(b-1)]. No dithering.
    Precision can only be reduced: bit_depth must not exceed the source
    depth.
    """
    if not 1 <= bit_depth <= clip.source_bit_depth:
        raise InvalidDepth(
            f"bit_depth must be in 1..{clip.source_bit_depth} (source depth), got {bit_depth}"
        )
    half = float(1 << (bit_depth - 1))
    q = np.sign(clip.samples) * np.floor(np.abs(clip.samples) * half + 0.5)
    q = np.clip(q, -half, half - 1.0)
    return AudioClip(
        samples=q / half,
        sample_rate_hz=clip.sample_rate_hz,
        source_bit_depth=int(bit_depth),
        label=clip.label,
        origin=clip.origin,
    )


def truncate(clip: AudioClip, length_s: float) -> AudioClip:
    """Keep the first floor(length_s * rate) samples.

    A clip already shorter than length_s is returned unchanged (the very
    same object, so callers can detect that nothing was shortened); the
    case is also logged at debug level.
    """
    if length_s <= 0:
        raise InvalidLength(f"length_s must be positive, got {length_s}")
    n_keep = int(np.floor(length_s * clip.sample_rate_hz))
    if n_keep >= clip.samples.size:
        log.debug("truncate: clip %s already <= %.3fs, shortened=false", clip.origin, length_s)
        return clip
    return AudioClip(
        samples=clip.samples[:n_keep],
        sample_rate_hz=clip.sample_rate_hz,
        source_bit_depth=clip.source_bit_depth,
        label=clip.label,
        origin=clip.origin,
    )


def apply(clip: AudioClip, cfg: DegradationConfig, mode: ResampleMode = ResampleMode.DECIMATE) -> AudioClip:
    """Apply one grid point: truncate, then resample, then quantize.

    Stages whose target equals the clip's current property are skipped,
    so the identity config returns the clip unchanged; otherwise the
    result equals the sequential application of the three operations.
    """
    out = clip
    if cfg.clip_length_s != FULL_LENGTH:
        out = truncate(out, float(cfg.clip_length_s))
    if cfg.sample_rate_hz != out.sample_rate_hz:
        out = resample(out, cfg.sample_rate_hz, mode)
    if cfg.bit_depth != out.source_bit_depth:
        out = quantize(out, cfg.bit_depth)
    return out
