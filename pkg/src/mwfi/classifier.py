"""Waveform-type decision from scan-trace envelope features.

Time-invariant signals give clean pulses, frequency-modulated signals give
envelopes filled with random power values; filled envelopes are continuous
for chirps and discrete for hop sequences. Counting envelopes separates
single- from multiple-frequency inputs.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.ndimage import uniform_filter1d

from .scan_engine import ScanTrace

__all__ = ["EnvelopeFeatures", "ClassLabel", "compute_features", "classify"]


class ClassLabel(Enum):
    SINGLE_FREQUENCY = "single"
    MULTIPLE_FREQUENCY = "multiple"
    CHIRPED = "chirped"
    FREQUENCY_HOPPING = "hopping"
    UNKNOWN = "unknown"

    @property
    def token(self) -> str:
        """Serialized form used in reports."""
        return self.value


@dataclass(frozen=True)
class EnvelopeFeatures:
    n_envelopes: int
    filled: bool
    continuous: bool | None  # None when not filled (not meaningful)


def _is_continuous(trace: ScanTrace, gap_threshold: float) -> bool:
    """Check the filled region for sustained dips below half the envelope.

    Works on a pulse-width-smoothed profile so the random fill itself does
    not read as gaps; only scan stretches with no nearby component leave a
    sub-half-level hole longer than gap_threshold.
    """
    hint = trace.pulse_width_hint or trace.grid.duration / 100.0
    size = max(3, int(round(hint * trace.grid.sample_rate)))
    smooth = uniform_filter1d(trace.power, size=size, mode="nearest")
    floor = float(np.median(trace.power))
    half = floor + 0.5 * (float(np.max(smooth)) - floor)
    above = np.flatnonzero(smooth >= half)
    lo, hi = int(above[0]), int(above[-1])
    below = smooth[lo : hi + 1] < half
    max_gap = 0
    run = 0
    for flag in below:
        run = run + 1 if flag else 0
        max_gap = max(max_gap, run)
    return bool(max_gap * trace.grid.dt < gap_threshold)


def compute_features(
    events,
    trace: ScanTrace,
    fill_threshold: float = 0.25,
    gap_threshold: float | None = None,
) -> EnvelopeFeatures:
    """Envelope features for classification.

    events must come from detect_pulses on the same trace. gap_threshold
    defaults to one nominal pulse width; a filled region with an internal
    sub-half-level hole at least that long counts as discrete.
    """
    n = len(events)
    filled = any(ev.fill_randomness >= fill_threshold for ev in events)
    continuous = None
    if filled:
        if gap_threshold is None:
            gap_threshold = trace.pulse_width_hint or trace.grid.duration / 100.0
        continuous = _is_continuous(trace, gap_threshold)
    return EnvelopeFeatures(n_envelopes=n, filled=filled, continuous=continuous)


def classify(features: EnvelopeFeatures) -> ClassLabel:
    """Decision table: fill separates modulated from static, then envelope
    count (static) or continuity (modulated) picks the type."""
    if features.n_envelopes == 0:
        return ClassLabel.UNKNOWN
    if not features.filled:
        if features.n_envelopes == 1:
            return ClassLabel.SINGLE_FREQUENCY
        return ClassLabel.MULTIPLE_FREQUENCY
    if features.continuous:
        return ClassLabel.CHIRPED
    return ClassLabel.FREQUENCY_HOPPING
