import numpy as np
import pytest
from scipy.io import wavfile

from coughseg.audio import (
    AudioClip,
    load_audio,
    peak_normalize,
    waveform_peaks,
    write_wav,
)
from coughseg.errors import AudioFormatError, EmptyClipError, UnsupportedCodecError


class TestAudioClip:
    def test_basic_properties(self):
        clip = AudioClip(np.zeros(4800), 48000, "rec-a")
        assert len(clip) == 4800
        assert clip.duration_ms == pytest.approx(100.0)
        assert clip.source_id == "rec-a"
        assert clip.samples.dtype == np.float64

    def test_coerces_input_dtype(self):
        clip = AudioClip(np.array([0, 1, 0], dtype=np.int32), 8000)
        assert clip.samples.dtype == np.float64

    def test_rejects_2d(self):
        with pytest.raises(ValueError, match="1-D"):
            AudioClip(np.zeros((10, 2)), 48000)

    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError, match="non-finite"):
            AudioClip(np.array([0.0, np.nan]), 48000)
        with pytest.raises(ValueError, match="non-finite"):
            AudioClip(np.array([np.inf, 0.0]), 48000)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match=r"exceed \[-1.0, 1.0\]"):
            AudioClip(np.array([1.0001]), 48000)
        with pytest.raises(ValueError):
            AudioClip(np.array([-1.5]), 48000)

    def test_rejects_bad_rate(self):
        for rate in (0, -1, 44100.0):
            with pytest.raises(ValueError, match="sample_rate"):
                AudioClip(np.zeros(10), rate)

    def test_empty_clip_is_legal(self):
        clip = AudioClip(np.array([]), 48000)
        assert len(clip) == 0
        assert clip.duration_ms == 0.0


class TestLoadAudio:
    def test_int16_scaling(self, tmp_path):
        raw = np.array([0, 16384, -32768, 32767], dtype=np.int16)
        wavfile.write(tmp_path / "a.wav", 48000, raw)
        clip = load_audio(tmp_path / "a.wav")
        assert clip.sample_rate == 48000
        assert clip.source_id == "a"
        np.testing.assert_allclose(
            clip.samples, [0.0, 0.5, -1.0, 32767 / 32768], rtol=0, atol=0
        )

    def test_int32_scaling(self, tmp_path):
        # 24-bit material commonly arrives as int32 with the low byte zero;
        # full-scale division by 2^31 keeps that exact.
        raw = np.array([0, 1 << 30, -(1 << 31)], dtype=np.int32)
        wavfile.write(tmp_path / "b.wav", 44100, raw)
        clip = load_audio(tmp_path / "b.wav")
        np.testing.assert_array_equal(clip.samples, [0.0, 0.5, -1.0])

    def test_uint8_scaling(self, tmp_path):
        raw = np.array([128, 255, 0, 192], dtype=np.uint8)
        wavfile.write(tmp_path / "c.wav", 8000, raw)
        clip = load_audio(tmp_path / "c.wav")
        np.testing.assert_array_equal(clip.samples, [0.0, 127 / 128, -1.0, 0.5])

    def test_float32_passthrough_and_clamp(self, tmp_path):
        raw = np.array([0.25, -0.5, 1.5, -2.0], dtype=np.float32)
        wavfile.write(tmp_path / "d.wav", 48000, raw)
        clip = load_audio(tmp_path / "d.wav")
        np.testing.assert_array_equal(clip.samples, [0.25, -0.5, 1.0, -1.0])

    def test_stereo_downmix_is_mean(self, tmp_path):
        left = np.array([32767, 0, -32768], dtype=np.int16)
        right = np.array([0, 0, -32768], dtype=np.int16)
        wavfile.write(tmp_path / "e.wav", 48000, np.stack([left, right], axis=1))
        clip = load_audio(tmp_path / "e.wav")
        expected = (left / 32768.0 + right / 32768.0) / 2
        np.testing.assert_allclose(clip.samples, expected, rtol=0, atol=1e-15)

    def test_rejects_non_riff(self, tmp_path):
        bad = tmp_path / "song.wav"
        bad.write_bytes(b"ID3\x03\x00" + b"\x00" * 64)
        with pytest.raises(UnsupportedCodecError, match="convert externally"):
            load_audio(bad)

    def test_rejects_riff_garbage(self, tmp_path):
        bad = tmp_path / "junk.wav"
        bad.write_bytes(b"RIFF" + bytes(range(256)))
        with pytest.raises(AudioFormatError):
            load_audio(bad)

    def test_rejects_truncated_payload(self, tmp_path):
        path = tmp_path / "cut.wav"
        wavfile.write(path, 48000, np.zeros(48000, dtype=np.int16))
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(AudioFormatError):
            load_audio(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_audio(tmp_path / "nope.wav")


class TestWriteWav:
    def test_round_trip_error_bound(self, tmp_path):
        rng = np.random.default_rng(42)
        original = AudioClip(rng.uniform(-1, 1, 9600), 48000, "rt")
        write_wav(original, tmp_path / "rt.wav")
        loaded = load_audio(tmp_path / "rt.wav")
        assert loaded.sample_rate == 48000
        assert len(loaded) == len(original)
        assert np.max(np.abs(loaded.samples - original.samples)) <= 1 / 32768

    def test_second_trip_is_exact(self, tmp_path):
        """Quantization is idempotent: once through 16-bit, always stable."""
        rng = np.random.default_rng(7)
        clip = AudioClip(rng.uniform(-1, 1, 4800), 48000)
        write_wav(clip, tmp_path / "one.wav")
        first = load_audio(tmp_path / "one.wav")
        write_wav(first, tmp_path / "two.wav")
        second = load_audio(tmp_path / "two.wav")
        np.testing.assert_array_equal(first.samples, second.samples)

    def test_full_scale_clips_to_int16_range(self, tmp_path):
        clip = AudioClip(np.array([1.0, -1.0]), 48000)
        write_wav(clip, tmp_path / "fs.wav")
        _, raw = wavfile.read(tmp_path / "fs.wav")
        assert raw.dtype == np.int16
        np.testing.assert_array_equal(raw, [32767, -32768])

    def test_refuses_empty(self, tmp_path):
        with pytest.raises(EmptyClipError):
            write_wav(AudioClip(np.array([]), 48000), tmp_path / "x.wav")


class TestPeakNormalize:
    def test_scales_peak_to_one(self):
        clip = AudioClip(np.array([0.1, -0.25, 0.2]), 48000, "p")
        normalized = peak_normalize(clip)
        assert np.max(np.abs(normalized.samples)) == 1.0
        np.testing.assert_allclose(normalized.samples, [0.4, -1.0, 0.8])
        assert normalized.source_id == "p"

    def test_zero_and_empty_pass_through(self):
        silent = AudioClip(np.zeros(100), 48000)
        assert peak_normalize(silent) is silent
        empty = AudioClip(np.array([]), 48000)
        assert peak_normalize(empty) is empty

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        clip = AudioClip(rng.uniform(-0.3, 0.3, 1000), 48000)
        once = peak_normalize(clip)
        twice = peak_normalize(once)
        np.testing.assert_array_equal(once.samples, twice.samples)


class TestWaveformPeaks:
    def test_short_signal_one_bucket_per_sample(self):
        samples = np.array([0.5, -0.25, 0.0])
        assert waveform_peaks(samples, max_pairs=2000) == [
            [0.5, 0.5],
            [-0.25, -0.25],
            [0.0, 0.0],
        ]

    def test_empty(self):
        assert waveform_peaks(np.array([])) == []

    def test_cap_and_coverage(self):
        rng = np.random.default_rng(11)
        samples = rng.uniform(-1, 1, 50_000)
        peaks = waveform_peaks(samples, max_pairs=2000)
        assert len(peaks) == 2000
        assert min(p[0] for p in peaks) == samples.min()
        assert max(p[1] for p in peaks) == samples.max()

    def test_matches_brute_force_buckets(self):
        rng = np.random.default_rng(5)
        for n, b in [(10, 4), (1000, 7), (2048, 2000), (333, 100)]:
            samples = rng.uniform(-1, 1, n)
            peaks = waveform_peaks(samples, max_pairs=b)
            buckets = min(b, n)
            for i in range(buckets):
                lo = i * n // buckets
                hi = (i + 1) * n // buckets
                chunk = samples[lo:hi]
                assert peaks[i] == [chunk.min(), chunk.max()]

    def test_spike_lands_in_its_time_bucket(self):
        samples = np.zeros(20_000)
        samples[15_000] = 0.9
        peaks = waveform_peaks(samples, max_pairs=2000)
        bucket = 15_000 * 2000 // 20_000
        assert peaks[bucket][1] == 0.9
        assert all(p[1] == 0.0 for i, p in enumerate(peaks) if i != bucket)
