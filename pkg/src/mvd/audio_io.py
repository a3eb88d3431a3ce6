"""PCM WAV reading/writing, dataset manifests, and synthetic corpora.

Audio is normalized at the boundary: every clip in the toolkit is mono
float64 in [-1, 1] plus the sample rate and the bit depth it came from.
The parser is deliberately strict (integer PCM, 8/16/24/32 bit, 1-2
channels) so that degradation sweeps always start from known-good input.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidDataset, InvalidSpec, ParseError, UnsupportedFormat

SUPPORTED_FILE_DEPTHS = (8, 16, 24, 32)

# Characteristics of the corpora the degradation grids were designed
# around: sample rate (Hz), bit depth, clip length (s), clip count,
# class count. Used for default grid selection and documentation; the
# audio itself is always user-supplied via a manifest.
DATASET_PRESETS = {
    "esc50": (44_100, 16, 5.0, 2_000, 50),
    "gtzan": (22_050, 16, 30.0, 1_000, 10),
    "tess": (24_414, 16, 1.5, 1_400, 7),
    "audiomnist": (48_000, 16, 0.7, 30_000, 10),
}


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono sample buffer with provenance.

    samples: float64 amplitudes in [-1, 1], non-empty.
    sample_rate_hz: positive sampling rate.
    source_bit_depth: precision of the lattice the samples live on (4..32).
    label: class identifier ("" when unlabeled).
    origin: source path or synthetic descriptor, for diagnostics.
    """

    samples: np.ndarray
    sample_rate_hz: int
    source_bit_depth: int
    label: str = ""
    origin: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("AudioClip requires a non-empty 1-D sample buffer")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        # files carry 8..32 bits; quantization may reduce a buffer to 1 bit
        if not 1 <= self.source_bit_depth <= 32:
            raise ValueError(f"source_bit_depth must be in 1..32, got {self.source_bit_depth}")
        peak = float(np.max(np.abs(samples)))
        if not peak <= 1.0:  # also catches NaN/inf
            raise ValueError(f"amplitudes must lie in [-1, 1], found peak {peak}")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class DatasetManifest:
    """Ordered (path, label) pairs naming one dataset."""

    entries: tuple[tuple[str, str], ...]
    name: str
    expected_sample_rate_hz: int | None = None

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted({label for _, label in self.entries}))


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a seeded synthetic corpus of harmonic tones in noise.

    max_content_hz is the highest class-discriminative frequency; all
    generated partials stay at or below it, so the corpus remains fully
    classifiable at any sample rate above 2 * max_content_hz.
    """

    num_classes: int = 5
    clips_per_class: int = 40
    sample_rate_hz: int = 44_100
    duration_s: float = 2.0
    seed: int = 1729
    max_content_hz: float = 1_500.0


# --- WAV parsing ---------------------------------------------------------


def _decode_pcm(raw: bytes, bits: int, channels: int) -> np.ndarray:
    """Decode little-endian integer PCM to mono float64 in [-1, 1]."""
    bytes_per_sample = bits // 8
    frame_size = bytes_per_sample * channels
    if len(raw) % frame_size != 0:
        raise ParseError("data chunk size is not a whole number of frames")
    if bits == 8:
        # 8-bit WAV is unsigned with midpoint 128
        x = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
        x = (x - 128.0) / 128.0
    elif bits == 16:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = (v ^ 0x800000) - 0x800000  # sign-extend 24 -> 32 bits
        x = v.astype(np.float64) / float(1 << 23)
    else:  # bits == 32
        x = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
    if channels == 2:
        x = x.reshape(-1, 2).mean(axis=1)
    return x


def read_wav(path) -> AudioClip:
    """Read a RIFF/WAVE integer PCM file as a mono AudioClip.

    Stereo is averaged to mono; integer codes are scaled to [-1, 1] by
    2^(bits-1). Raises ParseError for malformed containers and
    UnsupportedFormat for non-PCM or unsupported layouts.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ParseError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + chunk_size > len(data):
            raise ParseError(f"{path}: truncated chunk {chunk_id!r}")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise ParseError(f"{path}: fmt chunk too short ({chunk_size} bytes)")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif chunk_id == b"data":
            payload = data[body_start : body_start + chunk_size]
        pos = body_start + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or payload is None:
        raise ParseError(f"{path}: missing fmt or data chunk")

    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedFormat(
            f"{path}: format tag {audio_format} (only integer PCM is supported)"
        )
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{path}: {channels} channels (mono/stereo only)")
    if bits not in SUPPORTED_FILE_DEPTHS:
        raise UnsupportedFormat(f"{path}: {bits}-bit PCM is not supported")
    if sample_rate <= 0:
        raise ParseError(f"{path}: non-positive sample rate {sample_rate}")

    samples = _decode_pcm(payload, bits, channels)
    if samples.size == 0:
        raise ParseError(f"{path}: empty data chunk")
    return AudioClip(
        samples=samples,
        sample_rate_hz=int(sample_rate),
        source_bit_depth=int(bits),
        origin=str(path),
    )


def _encode_pcm(samples: np.ndarray, bits: int) -> bytes:
    """Mid-tread quantize float samples to integer PCM bytes."""
    half = float(1 << (bits - 1))
    q = np.sign(samples) * np.floor(np.abs(samples) * half + 0.5)
    q = np.clip(q, -half, half - 1).astype(np.int64)
    if bits == 8:
        return (q + 128).astype(np.uint8).tobytes()
    if bits == 16:
        return q.astype("<i2").tobytes()
    if bits == 24:
        u = (q & 0xFFFFFF).astype(np.uint32)
        out = np.empty((q.size, 3), dtype=np.uint8)
        out[:, 0] = u & 0xFF
        out[:, 1] = (u >> 8) & 0xFF
        out[:, 2] = (u >> 16) & 0xFF
        return out.tobytes()
    return q.astype("<i4").tobytes()


def write_wav(clip: AudioClip, bit_depth: int, path) -> None:
    """Write a mono PCM WAV at one of the standard container depths.

    Round-trips within one quantization step of the written depth:
    read_wav(write_wav(clip, b)) differs from clip by at most 2^-(b-1).
    """
    if bit_depth not in SUPPORTED_FILE_DEPTHS:
        raise ValueError(f"bit_depth must be one of {SUPPORTED_FILE_DEPTHS}, got {bit_depth}")
    payload = _encode_pcm(clip.samples, bit_depth)
    block_align = bit_depth // 8
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH",
        16,
        1,  # integer PCM
        1,  # mono
        clip.sample_rate_hz,
        clip.sample_rate_hz * block_align,
        block_align,
        bit_depth,
    )
    header += b"data" + struct.pack("<I", len(payload))
    Path(path).write_bytes(header + payload)


# --- Manifests -----------------------------------------------------------


def load_manifest(path, expected_sample_rate_hz: int | None = None) -> DatasetManifest:
    """Load a `path,label` CSV manifest; paths resolve against its directory.

    File existence is not checked here: missing audio is reported
    per-entry at sweep time instead of failing the whole load. An
    expected sample rate (e.g. from DATASET_PRESETS) is carried along so
    loaders can flag off-spec files.
    """
    path = Path(path)
    root = path.parent
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidDataset(f"{path}: empty manifest") from None
        if [col.strip().lower() for col in header] != ["path", "label"]:
            raise ParseError(f"{path}: manifest header must be 'path,label', got {header!r}")
        entries = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise ParseError(f"{path}: row {reader.line_num} has {len(row)} columns")
            rel, label = row[0].strip(), row[1].strip()
            resolved = rel if Path(rel).is_absolute() else str(root / rel)
            entries.append((resolved, label))

    paths = [p for p, _ in entries]
    if len(set(paths)) != len(paths):
        dupes = sorted({p for p in paths if paths.count(p) > 1})
        raise InvalidDataset(f"{path}: duplicate paths {dupes[:3]}")
    labels = {label for _, label in entries}
    if len(labels) < 2:
        raise InvalidDataset(f"{path}: need at least 2 distinct labels, found {len(labels)}")
    return DatasetManifest(
        entries=tuple(entries),
        name=path.stem,
        expected_sample_rate_hz=expected_sample_rate_hz,
    )


# --- Synthetic corpus ----------------------------------------------------


def generate_synthetic(spec: SynthSpec) -> list[AudioClip]:
    """Generate a seeded corpus of harmonic-stack tones in Gaussian noise.

    Class c has fundamental f_c = max_content_hz * (c+1) / num_classes and
    up to three partials (k*f_c for k where k*f_c <= max_content_hz) with
    1/k amplitudes and per-clip random phases. Noise sits at -20 dB
    relative to the clean peak; the mix is peak-normalized to 0.9 and
    snapped to the 16-bit lattice. Pure function of the spec.
    """
    if spec.num_classes < 2:
        raise InvalidSpec(f"num_classes must be >= 2, got {spec.num_classes}")
    if spec.clips_per_class < 4:
        raise InvalidSpec(f"clips_per_class must be >= 4, got {spec.clips_per_class}")
    if spec.sample_rate_hz <= 0 or spec.duration_s <= 0:
        raise InvalidSpec("sample_rate_hz and duration_s must be positive")
    nyquist = spec.sample_rate_hz / 2
    if not 0 < spec.max_content_hz < nyquist:
        raise InvalidSpec(
            f"max_content_hz={spec.max_content_hz} must lie in (0, {nyquist}) "
            f"for sample_rate_hz={spec.sample_rate_hz}"
        )

    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration_s * spec.sample_rate_hz))
    t = np.arange(n) / spec.sample_rate_hz
    clips = []
    for c in range(spec.num_classes):
        fundamental = spec.max_content_hz * (c + 1) / spec.num_classes
        harmonics = [k for k in (1, 2, 3) if k * fundamental <= spec.max_content_hz]
        for i in range(spec.clips_per_class):
            phases = rng.uniform(0.0, 2 * np.pi, size=len(harmonics))
            signal = np.zeros(n)
            for k, phase in zip(harmonics, phases):
                signal += np.sin(2 * np.pi * k * fundamental * t + phase) / k
            peak = np.max(np.abs(signal))
            noise = rng.normal(0.0, 0.1 * peak, size=n)  # -20 dB re clean peak
            x = signal + noise
            x *= 0.9 / np.max(np.abs(x))
            x = np.clip(np.round(x * 32768.0), -32768, 32767) / 32768.0
            clips.append(
                AudioClip(
                    samples=x,
                    sample_rate_hz=spec.sample_rate_hz,
                    source_bit_depth=16,
                    label=f"class{c}",
                    origin=f"synth:seed={spec.seed}:class={c}:clip={i}",
                )
            )
    return clips
