import struct

import numpy as np
import pytest

from mvd.audio_io import (
    AudioClip,
    SynthSpec,
    generate_synthetic,
    load_manifest,
    read_wav,
    write_wav,
)
from mvd.errors import InvalidDataset, InvalidSpec, ParseError, UnsupportedFormat

from conftest import fft_peak_hz, pcm16_wav_bytes, sine_clip


# --- reading -------------------------------------------------------------


def test_read_16bit_scaling_against_byte_fixture(tmp_path):
    # 0, 16384, -32768 scale by 2^15 to 0.0, 0.5, -1.0
    path = tmp_path / "fixture.wav"
    path.write_bytes(pcm16_wav_bytes([0, 16384, -32768]))
    clip = read_wav(path)
    assert clip.sample_rate_hz == 44_100
    assert clip.source_bit_depth == 16
    np.testing.assert_array_equal(clip.samples, [0.0, 0.5, -1.0])


def test_read_8bit_midpoint_is_silence(tmp_path):
    payload = bytes([128])
    header = b"RIFF" + struct.pack("<I", 36 + 1) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, 8000, 8000, 1, 8)
    header += b"data" + struct.pack("<I", 1)
    path = tmp_path / "one.wav"
    path.write_bytes(header + payload)
    clip = read_wav(path)
    assert clip.samples.tolist() == [0.0]
    assert clip.source_bit_depth == 8


def test_read_gtzan_shaped_file(tmp_path):
    # 22,050 Hz / 16-bit / 30 s -> 661,500 samples
    clip = sine_clip(440.0, rate=22_050, duration_s=30.0)
    path = tmp_path / "gtzan_like.wav"
    write_wav(clip, 16, path)
    loaded = read_wav(path)
    assert loaded.sample_rate_hz == 22_050
    assert loaded.source_bit_depth == 16
    assert loaded.samples.size == 661_500


def test_stereo_averages_to_mono(tmp_path):
    path = tmp_path / "stereo.wav"
    # L/R pairs: (16384, -16384) -> 0.0, (16384, 16384) -> 0.5
    path.write_bytes(pcm16_wav_bytes([16384, -16384, 16384, 16384], channels=2))
    clip = read_wav(path)
    np.testing.assert_allclose(clip.samples, [0.0, 0.5])
    assert np.max(np.abs(clip.samples)) <= 1.0


def test_unknown_chunks_are_skipped(tmp_path):
    # LIST metadata between fmt and data must not confuse the parser
    payload = struct.pack("<2h", 8192, -8192)
    list_chunk = b"LIST" + struct.pack("<I", 5) + b"INFOx" + b"\x00"  # odd size: pad byte
    header = b"RIFF" + struct.pack("<I", 36 + len(list_chunk) + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, 8_000, 16_000, 2, 16)
    body = list_chunk + b"data" + struct.pack("<I", len(payload)) + payload
    path = tmp_path / "chunked.wav"
    path.write_bytes(header + body)
    clip = read_wav(path)
    np.testing.assert_array_equal(clip.samples, [0.25, -0.25])


def test_24bit_decode_against_byte_fixture(tmp_path):
    # codes 0x400000 (4194304 -> 0.5) and 0x800000 (-8388608 -> -1.0)
    payload = bytes([0x00, 0x00, 0x40, 0x00, 0x00, 0x80])
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, 48_000, 48_000 * 3, 3, 24)
    header += b"data" + struct.pack("<I", len(payload))
    path = tmp_path / "f24.wav"
    path.write_bytes(header + payload)
    clip = read_wav(path)
    np.testing.assert_array_equal(clip.samples, [0.5, -1.0])
    assert clip.source_bit_depth == 24


def test_nonfinite_amplitudes_rejected():
    with pytest.raises(ValueError):
        AudioClip(samples=np.array([0.0, np.nan]), sample_rate_hz=8_000, source_bit_depth=16)
    with pytest.raises(ValueError):
        AudioClip(samples=np.array([np.inf]), sample_rate_hz=8_000, source_bit_depth=16)


def test_malformed_riff_header_raises_parse_error(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"NOTARIFFFILE" + b"\x00" * 64)
    with pytest.raises(ParseError):
        read_wav(path)


def test_truncated_chunk_raises_parse_error(tmp_path):
    data = pcm16_wav_bytes([0, 1, 2, 3])
    path = tmp_path / "trunc.wav"
    path.write_bytes(data[:-5])
    with pytest.raises(ParseError):
        read_wav(path)


def test_float_wav_raises_unsupported_format(tmp_path):
    payload = struct.pack("<2f", 0.0, 0.5)
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 3, 1, 44_100, 44_100 * 4, 4, 32)
    header += b"data" + struct.pack("<I", len(payload))
    path = tmp_path / "float.wav"
    path.write_bytes(header + payload)
    with pytest.raises(UnsupportedFormat):
        read_wav(path)


# --- writing / round trips -------------------------------------------------


@pytest.mark.parametrize("depth", [8, 16, 24, 32])
def test_round_trip_error_within_one_step(tmp_path, depth):
    rng = np.random.default_rng(depth)
    clip = AudioClip(
        samples=rng.uniform(-1.0, 1.0, 2_000),
        sample_rate_hz=8_000,
        source_bit_depth=32,
    )
    path = tmp_path / f"rt{depth}.wav"
    write_wav(clip, depth, path)
    loaded = read_wav(path)
    assert loaded.source_bit_depth == depth
    step = 2.0 ** -(depth - 1)
    assert np.max(np.abs(loaded.samples - clip.samples)) <= step


def test_16bit_round_trip_error_bound(tmp_path):
    rng = np.random.default_rng(0)
    clip = AudioClip(samples=rng.uniform(-1, 1, 5_000), sample_rate_hz=16_000, source_bit_depth=16)
    path = tmp_path / "rt.wav"
    write_wav(clip, 16, path)
    assert np.max(np.abs(read_wav(path).samples - clip.samples)) <= 2.0**-15


def test_all_zero_clip_writes_zero_payload(tmp_path):
    clip = AudioClip(samples=np.zeros(100), sample_rate_hz=8_000, source_bit_depth=16)
    path = tmp_path / "zeros.wav"
    write_wav(clip, 16, path)
    assert path.read_bytes()[44:] == b"\x00" * 200


def test_sine_survives_write_read_fft_peak(tmp_path):
    clip = sine_clip(440.0, rate=44_100)
    path = tmp_path / "sine.wav"
    write_wav(clip, 16, path)
    assert fft_peak_hz(read_wav(path).samples, 44_100) == pytest.approx(440.0, abs=1.0)


def test_write_rejects_nonstandard_depth(tmp_path):
    clip = AudioClip(samples=np.zeros(10), sample_rate_hz=8_000, source_bit_depth=16)
    with pytest.raises(ValueError):
        write_wav(clip, 12, tmp_path / "x.wav")


def test_write_unwritable_path_raises_oserror(tmp_path):
    clip = AudioClip(samples=np.zeros(10), sample_rate_hz=8_000, source_bit_depth=16)
    with pytest.raises(OSError):
        write_wav(clip, 16, tmp_path / "no" / "such" / "dir" / "x.wav")


# --- manifests -------------------------------------------------------------


def test_manifest_order_and_classes(tmp_path):
    m = tmp_path / "m.csv"
    m.write_text("path,label\na.wav,dog\nb.wav,rain\nc.wav,dog\n")
    manifest = load_manifest(m)
    assert len(manifest.entries) == 3
    assert manifest.labels == ("dog", "rain")
    assert [p for p, _ in manifest.entries] == [str(tmp_path / n) for n in ("a.wav", "b.wav", "c.wav")]


def test_empty_manifest_rejected(tmp_path):
    m = tmp_path / "empty.csv"
    m.write_text("")
    with pytest.raises(InvalidDataset):
        load_manifest(m)


def test_single_label_rejected(tmp_path):
    m = tmp_path / "one.csv"
    m.write_text("path,label\na.wav,dog\nb.wav,dog\n")
    with pytest.raises(InvalidDataset):
        load_manifest(m)


def test_duplicate_paths_rejected(tmp_path):
    m = tmp_path / "dup.csv"
    m.write_text("path,label\na.wav,dog\na.wav,rain\n")
    with pytest.raises(InvalidDataset):
        load_manifest(m)


def test_esc50_shaped_manifest(tmp_path):
    # 2,000 rows over 50 labels -> 50 classes, 40 clips each
    rows = ["path,label"]
    for label in range(50):
        for i in range(40):
            rows.append(f"clip_{label}_{i}.wav,label{label:02d}")
    m = tmp_path / "esc50.csv"
    m.write_text("\n".join(rows) + "\n")
    manifest = load_manifest(m)
    assert len(manifest.entries) == 2_000
    assert len(manifest.labels) == 50
    counts = {}
    for _, label in manifest.entries:
        counts[label] = counts.get(label, 0) + 1
    assert set(counts.values()) == {40}


def test_missing_files_do_not_fail_load(tmp_path):
    m = tmp_path / "m.csv"
    m.write_text("path,label\nmissing1.wav,a\nmissing2.wav,b\n")
    manifest = load_manifest(m)  # existence is checked at sweep time
    assert len(manifest.entries) == 2


def test_dataset_presets_match_published_characteristics():
    from mvd.audio_io import DATASET_PRESETS

    assert DATASET_PRESETS["esc50"] == (44_100, 16, 5.0, 2_000, 50)
    assert DATASET_PRESETS["gtzan"] == (22_050, 16, 30.0, 1_000, 10)
    assert DATASET_PRESETS["tess"] == (24_414, 16, 1.5, 1_400, 7)
    assert DATASET_PRESETS["audiomnist"] == (48_000, 16, 0.7, 30_000, 10)


def test_manifest_carries_expected_rate(tmp_path):
    m = tmp_path / "m.csv"
    m.write_text("path,label\na.wav,x\nb.wav,y\n")
    manifest = load_manifest(m, expected_sample_rate_hz=22_050)
    assert manifest.expected_sample_rate_hz == 22_050


# --- synthetic corpus ------------------------------------------------------


def test_synthetic_deterministic_for_fixed_seed():
    spec = SynthSpec(num_classes=2, clips_per_class=4, sample_rate_hz=8_000, duration_s=0.25, seed=5)
    first = generate_synthetic(spec)
    second = generate_synthetic(spec)
    assert len(first) == 8
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.samples, b.samples)
        assert a.label == b.label


def test_synthetic_class0_fundamental():
    spec = SynthSpec(num_classes=5, clips_per_class=4, sample_rate_hz=44_100, duration_s=1.0, seed=9, max_content_hz=1_500.0)
    clips = generate_synthetic(spec)
    clip = next(c for c in clips if c.label == "class0")
    # f_0 = 1500 * 1/5 = 300 Hz
    assert fft_peak_hz(clip.samples, 44_100) == pytest.approx(300.0, abs=1.0)


def test_synthetic_nyquist_violation():
    with pytest.raises(InvalidSpec):
        generate_synthetic(SynthSpec(sample_rate_hz=44_100, max_content_hz=30_000.0))


def test_synthetic_amplitude_and_lattice():
    spec = SynthSpec(num_classes=2, clips_per_class=4, sample_rate_hz=8_000, duration_s=0.25, seed=12, max_content_hz=1_000.0)
    for clip in generate_synthetic(spec):
        assert clip.source_bit_depth == 16
        assert np.max(np.abs(clip.samples)) == pytest.approx(0.9, abs=2.0**-15)
        codes = clip.samples * 32768.0
        np.testing.assert_array_equal(codes, np.round(codes))  # on the 16-bit lattice
