"""Frequency-to-power mapping pipeline (instantaneous measurement).

The MZI turns frequency into transmitted power; inverting the tabulated
monotone response recovers instantaneous frequency sample by sample. A
bandstop prefilter removes jamming tones, whose dwells then fall below the
noise floor and are flagged as noise rather than frequency.
"""

from dataclasses import dataclass

import numpy as np

from .rf_signals import RfScenario, TimeGrid, component_tracks
from .photonic_link import (
    LinkModels,
    ModulatorModel,
    MziModel,
    modulator_sideband_weight,
    mzi_port_response,
    notch_response,
    pd_detect,
)

__all__ = [
    "AcfLut",
    "IfmTrace",
    "InstFreqEstimate",
    "build_lut",
    "simulate_ifm",
    "extract_inst_freq",
    "estimate_static_frequency",
    "lut_to_csv",
    "lut_from_csv",
    "ifm_trace_to_csv",
    "inst_freq_to_csv",
]

DEFAULT_BAND = (10e9, 20e9)


@dataclass(frozen=True)
class AcfLut:
    """Invertible frequency-vs-value table over a monotone band.

    single_port mode stores the normalized power transmission of one MZI
    output including the modulator roll-off (the curve an end-to-end power
    calibration would see), scaled so the band maximum is 1. ratio mode
    stores the two-port power ratio in dB, where the roll-off cancels.
    """

    mode: str  # "single_port" or "ratio"
    port: int  # 1 or 2 (single_port mode)
    band: tuple  # (f_lo, f_hi) Hz
    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        d = np.diff(self.values)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("LUT values must be strictly monotone over the band")

    @property
    def rising(self) -> bool:
        return bool(self.values[-1] > self.values[0])

    @property
    def step(self) -> float:
        """Knot spacing in Hz."""
        return float(self.freqs[1] - self.freqs[0])

    def evaluate(self, f):
        return np.interp(f, self.freqs, self.values)

    def invert(self, value):
        """Frequency whose tabulated value matches; inputs outside the value
        range clamp to the band edges."""
        v = np.asarray(value, dtype=float)
        if self.rising:
            return np.interp(v, self.values, self.freqs)
        return np.interp(v, self.values[::-1], self.freqs[::-1])


@dataclass(frozen=True)
class IfmTrace:
    """Detected single-port power record with its full-scale reference."""

    grid: TimeGrid
    power: np.ndarray
    normalization: float  # power of a unit-amplitude component at the band maximum

    def __post_init__(self):
        object.__setattr__(self, "power", np.asarray(self.power, dtype=float))
        if self.power.shape != (self.grid.n_samples,):
            raise ValueError("power length must equal grid.n_samples")


NOISE = float("nan")


@dataclass(frozen=True)
class InstFreqEstimate:
    """Per-sample frequency track; NaN marks samples classified as noise."""

    times: np.ndarray
    freq: np.ndarray  # Hz, NaN where flagged
    upper_limit: float

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "freq", np.asarray(self.freq, dtype=float))

    @property
    def is_noise(self) -> np.ndarray:
        return np.isnan(self.freq)


def _single_tone_power(mod: ModulatorModel, mzi: MziModel, port: int, f) -> np.ndarray:
    """Detected power of a unit-amplitude tone at f through the MZI path.

    Includes the modulator roll-off and the residual-carrier and
    image-sideband leakage, i.e. exactly the curve an end-to-end power
    calibration measures (bandstop filter off).
    """
    cs = 10.0 ** (-mod.carrier_suppression / 10.0)
    imgs = 10.0 ** (-mod.image_sideband_suppression / 10.0)
    f = np.asarray(f, dtype=float)
    w = modulator_sideband_weight(mod, f)
    return (
        w * mzi_port_response(mzi, f, port)
        + imgs * w * mzi_port_response(mzi, -f, port)
        + cs * mzi_port_response(mzi, 0.0, port)
    )


def build_lut(
    mzi: MziModel,
    band=DEFAULT_BAND,
    mode: str = "single_port",
    port: int = 2,
    n_knots: int = 4096,
    modulator: ModulatorModel | None = None,
) -> AcfLut:
    """Tabulate the frequency-to-power curve for inversion.

    The band must stay within one monotone half-period of the MZI fringe
    (width <= fsr/2); construction fails if the sampled curve is not
    strictly monotone.
    """
    f_lo, f_hi = float(band[0]), float(band[1])
    if not f_lo < f_hi:
        raise ValueError("band must satisfy f_lo < f_hi")
    if f_hi - f_lo > mzi.fsr / 2.0:
        raise ValueError(
            f"band width {(f_hi - f_lo) / 1e9:.1f} GHz exceeds half the MZI FSR "
            f"({mzi.fsr / 2e9:.1f} GHz); response would not be invertible"
        )
    if n_knots < 2:
        raise ValueError("need at least 2 knots")
    if modulator is None:
        modulator = ModulatorModel()
    freqs = np.linspace(f_lo, f_hi, n_knots)
    if mode == "single_port":
        values = _single_tone_power(modulator, mzi, port, freqs)
        values = values / float(np.max(values))
    elif mode == "ratio":
        values = 10.0 * np.log10(
            _single_tone_power(modulator, mzi, 1, freqs)
            / _single_tone_power(modulator, mzi, 2, freqs)
        )
    else:
        raise ValueError(f"unknown LUT mode {mode!r}")
    return AcfLut(mode=mode, port=port, band=(f_lo, f_hi), freqs=freqs, values=values)


def simulate_ifm(
    scenario: RfScenario,
    models: LinkModels,
    grid: TimeGrid,
    port: int = 2,
    band=DEFAULT_BAND,
) -> IfmTrace:
    """Detected power of the bandstop-filtered MZI path.

    Per sample the instantaneous components contribute
    amplitude^2 x modulator roll-off x bandstop transmission x port response,
    plus residual-carrier and image-sideband leakage. The normalization is
    the detected power of a unit-amplitude component at the band maximum of
    the port response (bandstop excluded).
    """
    for hop in scenario.hops:
        if grid.sample_rate * hop.dwell < 10.0:
            raise ValueError(
                f"grid rate {grid.sample_rate:.3e} S/s undersamples the "
                f"{hop.dwell:.2e} s hop dwell (need >= 10 samples per dwell)"
            )
    mod = models.modulator
    cs = 10.0 ** (-mod.carrier_suppression / 10.0)
    imgs = 10.0 ** (-mod.image_sideband_suppression / 10.0)

    def path_response(freqs):
        resp = modulator_sideband_weight(mod, np.abs(freqs)) * mzi_port_response(
            models.mzi, freqs, port
        )
        if models.notch is not None:
            resp = resp * notch_response(models.notch, freqs)
        return resp

    total = np.zeros(grid.n_samples)
    sideband_power = 0.0
    for tone in scenario.tones:
        p = tone.amplitude**2
        sideband_power += p
        total += p * (
            float(path_response(tone.freq)) + imgs * float(path_response(-tone.freq))
        )
    if scenario.chirps or scenario.hops:
        dynamic = RfScenario(chirps=scenario.chirps, hops=scenario.hops)
        for freq, amp, active in component_tracks(dynamic, grid):
            p = np.where(active, amp**2, 0.0)
            sideband_power = sideband_power + p
            total += p * path_response(freq)
            total += imgs * p * path_response(-freq)
    total += cs * sideband_power * float(path_response(0.0))
    total *= models.link.link_gain

    power = pd_detect(total, models.pd, grid)
    ref = np.linspace(band[0], band[1], 2048)
    peak = float(np.max(_single_tone_power(mod, models.mzi, port, ref)))
    normalization = models.link.link_gain * models.pd.responsivity * peak
    return IfmTrace(grid=grid, power=power, normalization=normalization)


def extract_inst_freq(
    trace: IfmTrace,
    lut: AcfLut,
    noise_floor: float = 0.05,
    upper_limit: float = 20e9,
    reference_trace: IfmTrace | None = None,
) -> InstFreqEstimate:
    """Invert the lookup sample by sample.

    A sample is flagged as noise when its normalized power sits below
    noise_floor, outside the tabulated value range, or implies a frequency
    above upper_limit (frequencies beyond the table cannot be told apart
    from noise). For a ratio LUT, trace must be the port-1 record and
    reference_trace the port-2 record.
    """
    if not lut.band[0] <= upper_limit <= lut.band[1]:
        raise ValueError("upper_limit must lie within the LUT band")
    if lut.mode == "ratio":
        if reference_trace is None:
            raise ValueError("ratio-mode extraction needs the complementary port trace")
        with np.errstate(divide="ignore", invalid="ignore"):
            metric = 10.0 * np.log10(trace.power / reference_trace.power)
        signal = (trace.power + reference_trace.power) / (2.0 * trace.normalization)
        valid = np.isfinite(metric) & (signal >= noise_floor)
    else:
        metric = trace.power / trace.normalization
        valid = metric >= noise_floor

    v_lo = float(np.min(lut.values))
    v_hi = float(np.max(lut.values))
    in_range = (metric >= v_lo) & (metric <= v_hi)
    freq = np.full(trace.grid.n_samples, NOISE)
    ok = valid & in_range
    freq[ok] = lut.invert(metric[ok])
    freq[freq > upper_limit] = NOISE
    return InstFreqEstimate(times=trace.grid.times(), freq=freq, upper_limit=upper_limit)


def estimate_static_frequency(trace: IfmTrace, lut: AcfLut, noise_floor: float = 0.05) -> float:
    """Invert the trace's mean power; noise averages out for a static tone."""
    if lut.mode != "single_port":
        raise ValueError("static estimation works on single-port traces")
    mean_p = float(np.mean(trace.power)) / trace.normalization
    if mean_p < noise_floor:
        raise ValueError("no signal: mean power below the noise floor")
    return float(lut.invert(mean_p))


def lut_to_csv(lut: AcfLut, path):
    """Two-column knot table under a single header naming mode/port/band."""
    with open(path, "w", newline="\n") as fh:
        fh.write(
            f"# mode={lut.mode} port={lut.port} "
            f"f_lo_hz={lut.band[0]:.10e} f_hi_hz={lut.band[1]:.10e}\n"
        )
        for f, v in zip(lut.freqs, lut.values):
            fh.write(f"{f:.10e},{v:.10e}\n")


def lut_from_csv(path) -> AcfLut:
    with open(path) as fh:
        header = fh.readline().strip()
    if not header.startswith("#"):
        raise ValueError(f"{path}: missing LUT header line")
    meta = dict(item.split("=", 1) for item in header[1:].split())
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return AcfLut(
        mode=meta["mode"],
        port=int(meta["port"]),
        band=(float(meta["f_lo_hz"]), float(meta["f_hi_hz"])),
        freqs=data[:, 0],
        values=data[:, 1],
    )


def ifm_trace_to_csv(trace: IfmTrace, path):
    times = trace.grid.times()
    with open(path, "w", newline="\n") as fh:
        fh.write("time_s,power\n")
        for t, p in zip(times, trace.power):
            fh.write(f"{t:.10e},{p:.10e}\n")


def inst_freq_to_csv(est: InstFreqEstimate, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("time_s,freq_hz_or_NOISE\n")
        for t, f in zip(est.times, est.freq):
            if np.isnan(f):
                fh.write(f"{t:.10e},NOISE\n")
            else:
                fh.write(f"{t:.10e},{f:.10e}\n")
