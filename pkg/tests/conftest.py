"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np

from coughseg.audio import AudioClip

RATE = 48000


def noise_clip(total_s, bursts=(), rate=RATE, bg_amp=0.01, seed=0, source_id="clip"):
    """Uniform noise floor with louder uniform-noise bursts laid on top.

    ``bursts`` is a sequence of (start_s, duration_s, amplitude) triples.
    """
    rng = np.random.default_rng(seed)
    n = int(round(total_s * rate))
    samples = rng.uniform(-bg_amp, bg_amp, n)
    for start_s, dur_s, amp in bursts:
        a = int(round(start_s * rate))
        b = min(n, a + int(round(dur_s * rate)))
        samples[a:b] = rng.uniform(-amp, amp, b - a)
    return AudioClip(np.clip(samples, -1.0, 1.0), rate, source_id)


def square_clip(total_s, bursts=(), rate=RATE, bg_amp=0.01, source_id="clip"):
    """Like noise_clip but with alternating-sign constant magnitudes, so
    every window RMS is known exactly (floor RMS == bg_amp, burst RMS ==
    its amplitude). Used where tests assert exact boundary samples."""
    n = int(round(total_s * rate))
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    samples = signs * bg_amp
    for start_s, dur_s, amp in bursts:
        a = int(round(start_s * rate))
        b = min(n, a + int(round(dur_s * rate)))
        samples[a:b] = signs[a:b] * amp
    return AudioClip(samples, rate, source_id)
