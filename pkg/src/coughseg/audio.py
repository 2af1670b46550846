"""WAV I/O and amplitude utilities.

Everything downstream (segmentation, the annotation server) works on a
canonical representation: mono float64 samples in [-1, 1] plus a sample
rate. This module is the only place that touches WAV bytes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.io.wavfile import WavFileWarning

from coughseg.errors import AudioFormatError, EmptyClipError, UnsupportedCodecError

# Full-scale divisors per integer sample width (24-bit arrives packed in int32).
_INT_SCALE = {
    np.dtype(np.uint8): 128.0,
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
}


@dataclass(frozen=True)
class AudioClip:
    """Decoded mono audio: float samples in [-1, 1] at a fixed rate.

    Empty clips are legal; segmenters must cope with them.
    """

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        if samples.size and (samples.min() < -1.0 or samples.max() > 1.0):
            raise ValueError("samples exceed [-1.0, 1.0]")
        if not (isinstance(self.sample_rate, (int, np.integer)) and self.sample_rate > 0):
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_ms(self) -> float:
        return self.samples.size / self.sample_rate * 1000.0


def load_audio(path: str | Path) -> AudioClip:
    """Load a PCM WAV file as a mono clip scaled to [-1, 1].

    Accepts 8/16/24/32-bit integer and 32-bit float PCM with any channel
    count. Integer samples are divided by the type's full-scale value;
    multi-channel input is downmixed by the per-frame arithmetic mean.
    ``source_id`` is the file stem.

    Raises:
        FileNotFoundError / OSError: unreadable file.
        UnsupportedCodecError: not a RIFF/PCM file (e.g. MP3) — convert
            externally to PCM WAV first.
        AudioFormatError: RIFF file with a malformed or truncated layout.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic not in (b"RIFF", b"RIFX", b"RF64"):
        raise UnsupportedCodecError(
            f"{path.name}: not a PCM WAV file (magic {magic!r}); "
            "convert externally to PCM WAV first"
        )
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WavFileWarning)
            warnings.filterwarnings("error", message="Reached EOF prematurely")
            rate, data = wavfile.read(path)
    except WavFileWarning as exc:
        raise AudioFormatError(f"{path.name}: truncated WAV data ({exc})") from exc
    except ValueError as exc:
        msg = str(exc)
        if "Unknown wave file format" in msg or "Unsupported bit depth" in msg:
            raise UnsupportedCodecError(
                f"{path.name}: {msg}; convert externally to PCM WAV first"
            ) from exc
        raise AudioFormatError(f"{path.name}: malformed WAV ({msg})") from exc
    except Exception as exc:  # scipy can die mid-parse on corrupt chunk tables
        raise AudioFormatError(f"{path.name}: malformed WAV ({exc})") from exc

    samples = np.asarray(data)
    scale = _INT_SCALE.get(samples.dtype)
    if scale is not None:
        if samples.dtype == np.uint8:
            samples = (samples.astype(np.float64) - 128.0) / 128.0
        else:
            samples = samples.astype(np.float64) / scale
    elif samples.dtype in (np.float32, np.float64):
        # Float WAVs may legally poke past full scale; clamp to keep the
        # clip invariant.
        samples = np.clip(samples.astype(np.float64), -1.0, 1.0)
    else:
        raise UnsupportedCodecError(
            f"{path.name}: unsupported sample type {samples.dtype}; "
            "convert externally to PCM WAV first"
        )

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioClip(samples=samples, sample_rate=int(rate), source_id=path.stem)


def peak_normalize(clip: AudioClip) -> AudioClip:
    """Scale so the peak magnitude is exactly 1.0.

    An all-zero (or empty) clip passes through unchanged. Idempotent:
    normalizing twice equals normalizing once, bit for bit.
    """
    if clip.samples.size == 0:
        return clip
    peak = np.max(np.abs(clip.samples))
    if peak == 0.0:
        return clip
    return AudioClip(
        samples=clip.samples / peak,
        sample_rate=clip.sample_rate,
        source_id=clip.source_id,
    )


def write_wav(clip: AudioClip, path: str | Path) -> None:
    """Write the clip as 16-bit PCM mono WAV.

    Quantizes with round(x * 32768) clamped to int16 range, so a
    load -> write -> load round trip is exact to within 1/32768 per sample.

    Raises:
        EmptyClipError: zero-sample clip (an empty segment upstream is a bug).
        OSError: destination not writable.
    """
    if clip.samples.size == 0:
        raise EmptyClipError(f"refusing to write empty clip {clip.source_id!r}")
    pcm = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(str(path), clip.sample_rate, pcm)


def waveform_peaks(samples: np.ndarray, max_pairs: int = 2000) -> list[list[float]]:
    """Downsample a waveform to at most ``max_pairs`` (min, max) pairs.

    Bucket i covers samples [floor(i*n/B), floor((i+1)*n/B)), so a spike
    lands in the bucket matching its time position regardless of length.
    Used by the annotation server to feed browser-side waveform drawing.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.size
    if n == 0:
        return []
    buckets = min(max_pairs, n)
    edges = (np.arange(buckets) * n) // buckets
    mins = np.minimum.reduceat(samples, edges)
    maxs = np.maximum.reduceat(samples, edges)
    return [[float(lo), float(hi)] for lo, hi in zip(mins, maxs)]
