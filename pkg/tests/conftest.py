import struct

import numpy as np
import pytest

from mvd.audio_io import AudioClip, SynthSpec, generate_synthetic


def fft_peak_hz(samples: np.ndarray, rate: int) -> float:
    """Independent oracle: frequency of the strongest rFFT bin."""
    spectrum = np.abs(np.fft.rfft(samples))
    return float(np.argmax(spectrum) * rate / len(samples))


def sine_clip(freq_hz: float, rate: int, duration_s: float = 1.0, amplitude: float = 0.9) -> AudioClip:
    t = np.arange(int(rate * duration_s)) / rate
    return AudioClip(
        samples=amplitude * np.sin(2 * np.pi * freq_hz * t),
        sample_rate_hz=rate,
        source_bit_depth=16,
        label="sine",
        origin=f"sine:{freq_hz}",
    )


def pcm16_wav_bytes(samples_i16, rate: int = 44_100, channels: int = 1) -> bytes:
    """Hand-assembled 16-bit PCM WAV, independent of the package writer."""
    payload = struct.pack(f"<{len(samples_i16)}h", *samples_i16)
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, channels, rate, rate * 2 * channels, 2 * channels, 16)
    header += b"data" + struct.pack("<I", len(payload))
    return header + payload


@pytest.fixture(scope="session")
def small_corpus():
    """3 classes x 8 clips, 0.5 s: enough signal for fast sweep tests."""
    spec = SynthSpec(
        num_classes=3, clips_per_class=8, sample_rate_hz=16_000,
        duration_s=0.5, seed=97, max_content_hz=1_000.0,
    )
    return generate_synthetic(spec)
