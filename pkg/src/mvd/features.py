"""MFCC front end: framing, mel filterbank, DCT, clip-level statistics.

A clip of any length, rate, or depth maps to a fixed-size vector
(per-coefficient mean and population standard deviation over frames),
which is what makes accuracies comparable across degradation configs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .audio_io import AudioClip
from .errors import FilterbankDegenerate, InvalidInput


@dataclass(frozen=True)
class MfccParams:
    """Feature recipe. One instance is meant to serve every swept rate:
    fmax_hz=None follows the clip's Nyquist, and a too-high fmax is
    clamped at use time."""

    num_coefficients: int = 40
    num_mel_filters: int = 64
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    fmin_hz: float = 0.0
    fmax_hz: float | None = None
    log_floor: float = 1e-10
    include_std: bool = True  # False: mean-only aggregation (ablation)

    def __post_init__(self):
        if self.num_coefficients < 1 or self.num_mel_filters < 1:
            raise ValueError("coefficient and filter counts must be positive")
        if self.num_coefficients > self.num_mel_filters:
            raise ValueError(
                f"num_coefficients ({self.num_coefficients}) cannot exceed "
                f"num_mel_filters ({self.num_mel_filters})"
            )
        if self.frame_ms <= 0 or self.hop_ms <= 0:
            raise ValueError("frame_ms and hop_ms must be positive")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    @property
    def feature_dim(self) -> int:
        return self.num_coefficients * (2 if self.include_std else 1)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Fixed-length clip descriptor: MFCC means (+ stds) and the label."""

    values: np.ndarray
    label: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", values)


def next_pow2(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def frame_signal(clip: AudioClip, params: MfccParams) -> np.ndarray:
    """Slice the clip into Hann-windowed frames (rows).

    Frame length N = round(frame_ms * sr / 1000), hop H likewise; frame
    count is 1 + floor((len - N) / H). Clips shorter than one frame are
    zero-padded to exactly one frame.
    """
    sr = clip.sample_rate_hz
    n = max(int(round(params.frame_ms * sr / 1000.0)), 1)
    hop = max(int(round(params.hop_ms * sr / 1000.0)), 1)
    x = clip.samples
    if x.size < n:
        x = np.concatenate([x, np.zeros(n - x.size)])
    n_frames = 1 + (x.size - n) // hop
    idx = hop * np.arange(n_frames)[:, None] + np.arange(n)[None, :]
    return x[idx] * np.hanning(n)


def power_spectrum(frames: np.ndarray) -> np.ndarray:
    """|DFT|^2 / nfft over the one-sided bins, nfft = next power of two >= N.

    Accepts a single frame or a (frames x N) matrix; frames are
    zero-padded to nfft. A unit impulse yields the flat value 1/nfft.
    """
    arr = np.asarray(frames, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    n = arr.shape[-1]
    if n == 0:
        raise InvalidInput("cannot take the spectrum of an empty frame")
    nfft = next_pow2(n)
    spectrum = np.abs(np.fft.rfft(arr, n=nfft, axis=-1)) ** 2 / nfft
    return spectrum[0] if single else spectrum


def mel_filterbank(params: MfccParams, sample_rate_hz: int, fft_size: int) -> np.ndarray:
    """Triangular mel filters evaluated at the FFT bin frequencies.

    Centers are uniform in mel between fmin and fmax (clamped to
    Nyquist). A triangle narrower than the bin spacing collapses onto
    its single nearest bin so every row keeps mass even at low rates.
    More filters than one-sided bins cannot be resolved at all and raise
    FilterbankDegenerate.
    """
    nyquist = sample_rate_hz / 2.0
    fmax = nyquist if params.fmax_hz is None else min(params.fmax_hz, nyquist)
    if not params.fmin_hz < fmax:
        raise ValueError(f"fmin ({params.fmin_hz}) must be below fmax ({fmax})")
    n_bins = fft_size // 2 + 1
    n_filt = params.num_mel_filters
    if n_filt > n_bins:
        raise FilterbankDegenerate(
            f"{n_filt} filters cannot be resolved by {n_bins} FFT bins "
            f"(fft_size={fft_size}); rows would be all-zero"
        )

    edges_hz = mel_to_hz(np.linspace(hz_to_mel(params.fmin_hz), hz_to_mel(fmax), n_filt + 2))
    bin_freqs = np.arange(n_bins) * sample_rate_hz / fft_size
    weights = np.zeros((n_filt, n_bins))
    for j in range(n_filt):
        lo, center, hi = edges_hz[j], edges_hz[j + 1], edges_hz[j + 2]
        rising = (bin_freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - bin_freqs) / max(hi - center, 1e-12)
        row = np.maximum(0.0, np.minimum(rising, falling))
        if not row.any():
            row[np.argmin(np.abs(bin_freqs - center))] = 1.0
        weights[j] = row
    return weights


def mfcc(clip: AudioClip, params: MfccParams) -> np.ndarray:
    """Per-frame MFCC matrix (frames x num_coefficients).

    Log mel energies are floored at params.log_floor, then decorrelated
    with an orthonormal DCT-II, keeping the first num_coefficients.
    """
    frames = frame_signal(clip, params)
    spectra = np.atleast_2d(power_spectrum(frames))
    fft_size = next_pow2(frames.shape[-1])
    fbank = mel_filterbank(params, clip.sample_rate_hz, fft_size)
    energies = spectra @ fbank.T
    logs = np.log(np.maximum(energies, params.log_floor))
    coeffs = scipy.fft.dct(logs, type=2, norm="ortho", axis=-1)
    return coeffs[:, : params.num_coefficients]


def aggregate(mfcc_matrix: np.ndarray, label: str = "", include_std: bool = True) -> FeatureVector:
    """Collapse a frame matrix to per-coefficient mean (and population std)."""
    m = np.atleast_2d(np.asarray(mfcc_matrix, dtype=np.float64))
    if m.size == 0:
        raise InvalidInput("cannot aggregate an empty MFCC matrix")
    means = m.mean(axis=0)
    if not include_std:
        return FeatureVector(values=means, label=label)
    stds = m.std(axis=0)  # population (ddof=0)
    constant = m.max(axis=0) == m.min(axis=0)  # exact zero, not mean-rounding fuzz
    stds = np.where(constant, 0.0, stds)
    return FeatureVector(values=np.concatenate([means, stds]), label=label)


def featurize(clip: AudioClip, params: MfccParams) -> FeatureVector:
    """Full front end for one clip: frames -> MFCC -> statistics."""
    return aggregate(mfcc(clip, params), label=clip.label, include_std=params.include_std)


@dataclass(frozen=True)
class Normalizer:
    """Per-dimension z-score fitted on a training split.

    Dimensions whose training std is below 1e-12 pass through unchanged
    (no shift, no scale), so constant features stay constant.
    """

    shift: np.ndarray
    scale: np.ndarray

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.shift) * self.scale


def fit_normalizer(train: list[FeatureVector]) -> Normalizer:
    if not train:
        raise InvalidInput("cannot fit a normalizer on an empty training set")
    matrix = np.stack([v.values for v in train])
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    active = std >= 1e-12
    shift = np.where(active, mean, 0.0)
    scale = np.where(active, 1.0 / np.where(active, std, 1.0), 1.0)
    return Normalizer(shift=shift, scale=scale)


def apply_normalizer(normalizer: Normalizer, vector: FeatureVector) -> FeatureVector:
    return FeatureVector(values=normalizer.transform(vector.values), label=vector.label)
