"""Automatic single-cough segmentation.

Two detectors over a mono clip:

* ``hysteresis_segment`` — a two-threshold comparator on a short-time RMS
  envelope. Thresholds are multiples (0.1 / 2.0 by default) of the global
  RMS of the whole signal; a region opens when the envelope reaches the
  high threshold and closes when it drops below the low one.
* ``rms_threshold_segment`` — peak-normalize, chop into fixed
  non-overlapping frames (2048 samples at 48 kHz), mark frames whose RMS
  exceeds a fixed threshold (0.09), keep runs of marked frames within a
  duration window, then widen each by a few context frames.

Both return sample-indexed ``SegmentBounds`` and are fully deterministic.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from coughseg.audio import AudioClip, peak_normalize, write_wav
from coughseg.errors import CoughsegError, EmptyClipError

METHOD_HYSTERESIS = "hysteresis"
METHOD_RMS = "rms_threshold"
# Assigned by `coughseg ingest` for pre-segmented files; never produced
# by the detectors themselves.
METHOD_MANUAL = "manual"

_FILENAME_SAFE = re.compile(r"[^A-Za-z0-9._-]")


@dataclass(frozen=True, order=True)
class SegmentBounds:
    """One candidate single-cough region, [start_sample, end_sample)."""

    start_sample: int
    end_sample: int
    method: str = ""
    source_id: str = ""

    def __post_init__(self):
        if not (0 <= self.start_sample < self.end_sample):
            raise ValueError(
                f"invalid bounds [{self.start_sample}, {self.end_sample})"
            )

    @property
    def length(self) -> int:
        return self.end_sample - self.start_sample


@dataclass(frozen=True)
class HysteresisParams:
    """Tuning for the hysteresis comparator (defaults match the reference
    configuration: multipliers 0.1/2.0, 200 ms minimum, 0 ms padding)."""

    low_mult: float = 0.1
    high_mult: float = 2.0
    min_len_ms: float = 200.0
    pad_ms: float = 0.0
    envelope_window_ms: float = 20.0
    envelope_hop_ms: float = 10.0

    def __post_init__(self):
        if not (0 < self.low_mult < self.high_mult):
            raise ValueError("need 0 < low_mult < high_mult")
        if self.min_len_ms <= 0:
            raise ValueError("min_len_ms must be positive")
        if self.pad_ms < 0:
            raise ValueError("pad_ms must be non-negative")
        if not (0 < self.envelope_hop_ms <= self.envelope_window_ms):
            raise ValueError("need 0 < envelope_hop_ms <= envelope_window_ms")


@dataclass(frozen=True)
class RmsThresholdParams:
    """Tuning for the fixed-threshold frame detector (defaults: threshold
    0.09 on the peak-normalized signal, 2048-sample frames at 48 kHz,
    300 ms..3 s candidates, 3 context frames each side)."""

    threshold: float = 0.09
    frame_ms: float = 42.67
    min_len_ms: float = 300.0
    max_len_ms: float = 3000.0
    context_frames: int = 3

    def __post_init__(self):
        if not (0 < self.threshold < 1):
            raise ValueError("threshold must be in (0, 1)")
        if self.frame_ms <= 0:
            raise ValueError("frame_ms must be positive")
        if not (0 < self.min_len_ms <= self.max_len_ms):
            raise ValueError("need 0 < min_len_ms <= max_len_ms")
        if self.context_frames < 0:
            raise ValueError("context_frames must be >= 0")


def _ms_to_samples(ms: float, rate: int) -> int:
    return int(round(ms * rate / 1000.0))


def global_rms(clip: AudioClip) -> float:
    """RMS over all samples of the clip.

    Raises:
        EmptyClipError: the clip has no samples.
    """
    if clip.samples.size == 0:
        raise EmptyClipError("global RMS of an empty clip is undefined")
    return float(np.sqrt(np.mean(np.square(clip.samples))))


def rms_envelope(
    clip: AudioClip, window_ms: float, hop_ms: float
) -> list[tuple[int, float]]:
    """Short-time RMS envelope as (frame_start_sample, rms) pairs.

    Windows are round(window_ms * rate / 1000) samples long, hopped by
    round(hop_ms * rate / 1000). The final partial window is included and
    normalized by its true length. An empty clip yields an empty list.
    """
    if window_ms <= 0 or hop_ms <= 0:
        raise ValueError("window_ms and hop_ms must be positive")
    n = clip.samples.size
    if n == 0:
        return []
    window = max(1, _ms_to_samples(window_ms, clip.sample_rate))
    hop = max(1, _ms_to_samples(hop_ms, clip.sample_rate))

    starts = np.arange(0, n, hop)
    ends = np.minimum(starts + window, n)
    cumsq = np.concatenate(([0.0], np.cumsum(np.square(clip.samples))))
    rms = np.sqrt((cumsq[ends] - cumsq[starts]) / (ends - starts))
    return [(int(s), float(r)) for s, r in zip(starts, rms)]


def hysteresis_segment(
    clip: AudioClip, params: HysteresisParams = HysteresisParams()
) -> list[SegmentBounds]:
    """Detect cough regions with a two-threshold comparator.

    With R = global RMS of the clip, a region opens at the first envelope
    frame >= high_mult * R and closes at the first subsequent frame
    < low_mult * R (segment end = that frame's start sample; a region
    still open at end of clip closes at the clip length). Regions shorter
    than min_len_ms are dropped, survivors are padded by pad_ms per side
    and clamped to the clip. A silent clip (R = 0) yields no segments.
    """
    n = clip.samples.size
    if n == 0:
        return []
    rms = global_rms(clip)
    if rms == 0.0:
        return []
    low = params.low_mult * rms
    high = params.high_mult * rms

    envelope = rms_envelope(clip, params.envelope_window_ms, params.envelope_hop_ms)
    raw: list[tuple[int, int]] = []
    open_start = -1
    for frame_start, value in envelope:
        if open_start < 0:
            if value >= high:
                open_start = frame_start
        elif value < low:
            raw.append((open_start, frame_start))
            open_start = -1
    if open_start >= 0:
        raw.append((open_start, n))

    min_len = _ms_to_samples(params.min_len_ms, clip.sample_rate)
    pad = _ms_to_samples(params.pad_ms, clip.sample_rate)
    out = []
    for start, end in raw:
        if end - start < min_len:
            continue
        out.append(
            SegmentBounds(
                start_sample=max(0, start - pad),
                end_sample=min(n, end + pad),
                method=METHOD_HYSTERESIS,
                source_id=clip.source_id,
            )
        )
    return out


def rms_threshold_segment(
    clip: AudioClip, params: RmsThresholdParams = RmsThresholdParams()
) -> list[SegmentBounds]:
    """Detect cough regions by thresholding per-frame RMS.

    The clip is peak-normalized, then split into consecutive
    non-overlapping frames of round(frame_ms * rate / 1000) samples; a
    final partial frame is kept only if at least half a frame long. Frames
    with RMS strictly above the threshold are active, and each maximal run
    of active frames whose span lies within [min_len_ms, max_len_ms]
    becomes a segment, widened by context_frames frames per side (clamped
    to the clip). Overlapping widened segments are not merged. Output is
    invariant to amplitude scaling of the input.
    """
    n = clip.samples.size
    if n == 0:
        return []
    normalized = peak_normalize(clip)
    frame_len = max(1, _ms_to_samples(params.frame_ms, clip.sample_rate))

    # Frame table: full frames, plus the trailing remainder if >= half a frame.
    n_full = n // frame_len
    remainder = n - n_full * frame_len
    starts = np.arange(n_full) * frame_len
    ends = starts + frame_len
    if remainder * 2 >= frame_len:
        starts = np.append(starts, n_full * frame_len)
        ends = np.append(ends, n)
    if starts.size == 0:
        return []

    cumsq = np.concatenate(([0.0], np.cumsum(np.square(normalized.samples))))
    frame_rms = np.sqrt((cumsq[ends] - cumsq[starts]) / (ends - starts))
    active = frame_rms > params.threshold

    min_len = _ms_to_samples(params.min_len_ms, clip.sample_rate)
    max_len = _ms_to_samples(params.max_len_ms, clip.sample_rate)
    context = params.context_frames * frame_len

    out = []
    i = 0
    n_frames = active.size
    while i < n_frames:
        if not active[i]:
            i += 1
            continue
        j = i
        while j + 1 < n_frames and active[j + 1]:
            j += 1
        start, end = int(starts[i]), int(ends[j])
        # Duration gate applies to the raw run, before context widening:
        # widening alone must not rescue a too-short burst.
        if min_len <= end - start <= max_len:
            out.append(
                SegmentBounds(
                    start_sample=max(0, start - context),
                    end_sample=min(n, end + context),
                    method=METHOD_RMS,
                    source_id=clip.source_id,
                )
            )
        i = j + 1
    return out


# --- manifest -----------------------------------------------------------


@dataclass
class ManifestEntry:
    """One source file's segmentation record: method, parameter snapshot,
    segment bounds, and the exported filenames (one per segment)."""

    source_id: str
    method: str
    params: dict
    segments: list[SegmentBounds]
    files: list[str]

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "method": self.method,
            "params": dict(self.params),
            "segments": [
                {"start_sample": s.start_sample, "end_sample": s.end_sample}
                for s in self.segments
            ],
            "files": list(self.files),
        }


@dataclass
class SegmentManifest:
    """Full record of a segmentation run, serializable to manifest.json."""

    entries: list[ManifestEntry] = field(default_factory=list)
    created_at: str = ""
    tool_version: str = ""

    def __post_init__(self):
        if not self.created_at:
            self.created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        if not self.tool_version:
            from coughseg import __version__

            self.tool_version = __version__

    def add(self, entry: ManifestEntry) -> None:
        self.entries.append(entry)
        self.validate()

    def validate(self) -> None:
        names = [f for e in self.entries for f in e.files]
        if len(names) != len(set(names)):
            dupes = sorted({x for x in names if names.count(x) > 1})
            raise CoughsegError(f"duplicate exported filenames in manifest: {dupes}")
        for e in self.entries:
            if len(e.files) != len(e.segments):
                raise CoughsegError(
                    f"entry {e.source_id}/{e.method}: "
                    f"{len(e.files)} files for {len(e.segments)} segments"
                )

    def all_files(self) -> list[str]:
        return [f for e in self.entries for f in e.files]

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "created_at": self.created_at,
            "entries": [e.to_dict() for e in self.entries],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SegmentManifest":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CoughsegError(f"{path}: not valid manifest JSON ({exc})") from exc
        entries = []
        for e in raw.get("entries", []):
            segments = [
                SegmentBounds(
                    start_sample=s["start_sample"],
                    end_sample=s["end_sample"],
                    method=e["method"],
                    source_id=e["source_id"],
                )
                for s in e["segments"]
            ]
            entries.append(
                ManifestEntry(
                    source_id=e["source_id"],
                    method=e["method"],
                    params=e.get("params", {}),
                    segments=segments,
                    files=list(e["files"]),
                )
            )
        manifest = cls(
            entries=entries,
            created_at=raw.get("created_at", ""),
            tool_version=raw.get("tool_version", ""),
        )
        manifest.validate()
        return manifest


def safe_name(name: str) -> str:
    """Map a source stem onto the filename charset [A-Za-z0-9._-]."""
    return _FILENAME_SAFE.sub("-", name)


def segment_filename(source_id: str, method: str, index: int) -> str:
    return f"{safe_name(source_id)}_{method}_{index:03}.wav"


def export_segments(
    clip: AudioClip,
    segments: list[SegmentBounds],
    out_dir: str | Path,
    params: HysteresisParams | RmsThresholdParams | dict | None = None,
    method: str | None = None,
    overwrite: bool = False,
) -> ManifestEntry:
    """Write one WAV per segment and return the manifest entry.

    Files are named ``{source_id}_{method}_{index:03}.wav`` with the index
    counting from 0 in start order. Refuses to clobber existing files
    unless ``overwrite`` is set. ``method`` only needs to be passed when
    the segment list is empty (there is nothing to infer it from).
    """
    out_dir = Path(out_dir)
    segments = sorted(segments, key=lambda s: (s.start_sample, s.end_sample))
    n = clip.samples.size
    for seg in segments:
        if seg.end_sample > n:
            raise ValueError(
                f"segment [{seg.start_sample}, {seg.end_sample}) exceeds clip length {n}"
            )
    methods = {s.method for s in segments}
    if len(methods) > 1:
        raise ValueError(f"segments mix methods: {sorted(methods)}")
    if methods:
        inferred = methods.pop()
        if method is not None and method != inferred:
            raise ValueError(f"method {method!r} does not match segments ({inferred!r})")
        method = inferred
    elif method is None:
        method = ""
    if isinstance(params, dict) or params is None:
        params_dict = dict(params or {})
    else:
        params_dict = asdict(params)

    files = []
    for idx, seg in enumerate(segments):
        name = segment_filename(clip.source_id, seg.method, idx)
        target = out_dir / name
        if target.exists() and not overwrite:
            raise CoughsegError(f"refusing to overwrite existing file {target}")
        piece = AudioClip(
            samples=clip.samples[seg.start_sample : seg.end_sample],
            sample_rate=clip.sample_rate,
            source_id=clip.source_id,
        )
        write_wav(piece, target)
        files.append(name)

    return ManifestEntry(
        source_id=clip.source_id,
        method=method,
        params=params_dict,
        segments=segments,
        files=files,
    )
