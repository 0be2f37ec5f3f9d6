"""Transfer-function models of the on-chip photonic elements.

All frequencies are RF offsets from the optical carrier: the carrier sits at
0, the signal sideband of an RF tone at +f, its image at -f. Transmissions
are power ratios in [0, 1]; the photodetector output is in normalized
photocurrent units (responsivity x optical power).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter, lfilter_zi

from .rf_signals import TimeGrid

__all__ = [
    "ModulatorModel",
    "MrrModel",
    "MziModel",
    "NotchFilterModel",
    "PdModel",
    "LinkConfig",
    "LinkModels",
    "modulator_sideband_weight",
    "mrr_drop_response",
    "mrr_resonance_offset",
    "thermal_lag",
    "mzi_port_response",
    "acf",
    "notch_response",
    "pd_detect",
]


@dataclass(frozen=True)
class ModulatorModel:
    """Single-sideband modulator: first-order roll-off plus leakage terms.

    carrier_suppression / image_sideband_suppression give the residual
    carrier and image powers in dB below a full-amplitude sideband; the
    suppression of a real modulator is imperfect, so both leak through at a
    fixed level.
    """

    bw_3db: float = 22e9  # Hz
    carrier_suppression: float = 25.0  # dB
    image_sideband_suppression: float = 25.0  # dB

    def __post_init__(self):
        if self.bw_3db <= 0:
            raise ValueError("modulator bandwidth must be > 0")
        if self.carrier_suppression < 0 or self.image_sideband_suppression < 0:
            raise ValueError("suppressions must be >= 0 dB")


@dataclass(frozen=True)
class MrrModel:
    """Thermally scanned microring: periodic Lorentzian bandpass.

    The tracked resonance sits f_offset0 above the carrier at 0 V and shifts
    quadratically with drive voltage (thermal power heating); the heater
    responds with a first-order lag of time constant tau_thermal.
    """

    fsr: float = 80e9  # Hz
    fwhm: float = 875e6  # Hz, 3 dB width of the power transmission
    f_offset0: float = 8e9  # Hz above carrier at 0 V
    k_thermal: float = 2.0e9  # Hz / V^2
    tau_thermal: float = 37.3e-6  # s
    peak_transmission: float = 1.0

    def __post_init__(self):
        if not (0 < self.fwhm < self.fsr):
            raise ValueError("need 0 < fwhm < fsr")
        if self.k_thermal <= 0 or self.tau_thermal <= 0:
            raise ValueError("thermal coefficients must be > 0")


@dataclass(frozen=True)
class MziModel:
    """Asymmetric MZI with complementary sinusoidal output ports."""

    fsr: float = 144e9  # Hz
    extinction_ratio: float = 18.0  # dB
    f_ref: float = 0.0  # Hz, frequency of the port-1 maximum
    insertion_loss: float = 0.0  # dB

    def __post_init__(self):
        if self.fsr <= 0:
            raise ValueError("fsr must be > 0")
        if self.extinction_ratio <= 0:
            raise ValueError("extinction ratio must be > 0 dB")

    @property
    def fringe_contrast(self) -> float:
        """gamma = (R-1)/(R+1) for power extinction ratio R."""
        r = 10.0 ** (self.extinction_ratio / 10.0)
        return (r - 1.0) / (r + 1.0)


@dataclass(frozen=True)
class NotchFilterModel:
    """Cascaded ring notches; staggering the centers broadens the stopband."""

    centers: tuple = (10e9,)  # Hz, 1-3 entries
    fwhm_each: float = 300e6  # Hz
    rejection: float = 20.0  # dB per ring

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if not 1 <= len(self.centers) <= 3:
            raise ValueError("need 1-3 notch centers")
        if self.fwhm_each <= 0:
            raise ValueError("fwhm_each must be > 0")


@dataclass(frozen=True)
class PdModel:
    """Band-limited photodetector with additive Gaussian noise.

    noise_sigma is the noise std as a fraction of the waveform's full-scale
    detected power. The noise stream comes from a counter-based Philox
    generator keyed by `seed`, so equal seeds give bit-identical output.
    """

    bw_3db: float = 33e9  # Hz
    responsivity: float = 1.0
    noise_sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.bw_3db <= 0:
            raise ValueError("PD bandwidth must be > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class LinkConfig:
    """Lumped link parameters: carrier bookkeeping and EDFA/loss gain factor."""

    carrier_freq: float = 193.1e12  # Hz, documentation only in this model
    link_gain: float = 1.0

    def __post_init__(self):
        if self.link_gain <= 0:
            raise ValueError("link_gain must be > 0")


@dataclass(frozen=True)
class LinkModels:
    """Parameter bundle for a full link simulation."""

    modulator: ModulatorModel = field(default_factory=ModulatorModel)
    mrr: MrrModel = field(default_factory=MrrModel)
    mzi: MziModel = field(default_factory=MziModel)
    notch: NotchFilterModel | None = None
    pd: PdModel = field(default_factory=PdModel)
    link: LinkConfig = field(default_factory=LinkConfig)


def modulator_sideband_weight(model: ModulatorModel, f):
    """First-order low-pass power roll-off: w(f) = 1 / (1 + (f/bw)^2)."""
    f = np.asarray(f, dtype=float)
    return 1.0 / (1.0 + (f / model.bw_3db) ** 2)


def mrr_drop_response(model: MrrModel, detuning):
    """Lorentzian bandpass, periodic in the FSR.

    T(d) = peak / (1 + (2 d' / fwhm)^2) with d' the detuning wrapped to the
    nearest resonance of the comb.
    """
    d = np.asarray(detuning, dtype=float)
    half_fsr = model.fsr / 2.0
    if d.size and (d.min() < -half_fsr or d.max() > half_fsr):
        d = d - model.fsr * np.round(d / model.fsr)
    return model.peak_transmission / (1.0 + (2.0 * d / model.fwhm) ** 2)


def mrr_resonance_offset(model: MrrModel, v_effective):
    """Tracked-resonance offset above the carrier for an effective drive voltage."""
    v = np.asarray(v_effective, dtype=float)
    if np.any(v < 0):
        raise ValueError("v_effective must be >= 0")
    return model.f_offset0 + model.k_thermal * v**2


def thermal_lag(drive_power, tau: float, grid: TimeGrid) -> np.ndarray:
    """First-order heater lag applied to a drive-power (V^2) waveform.

    y[k+1] = y[k] + (dt/tau) (x[k] - y[k]), y[0] = x[0]. The grid must
    resolve the lag: dt < tau/4.
    """
    x = np.asarray(drive_power, dtype=float)
    dt = grid.dt
    if dt >= tau / 4.0:
        raise ValueError(
            f"grid interval {dt:.3e} s undersamples thermal dynamics (need < tau/4 = {tau / 4.0:.3e} s)"
        )
    alpha = dt / tau
    # IIR form of the recurrence: y[n] = (1-alpha) y[n-1] + alpha x[n-1]
    y = lfilter([0.0, alpha], [1.0, -(1.0 - alpha)], x, zi=np.array([x[0]]))[0]
    return y


def mzi_port_response(model: MziModel, f, port: int):
    """Power transmission of one MZI output port.

    port 1: L (1 + g cos(2 pi (f - f_ref) / fsr)) / 2
    port 2: L (1 - g cos(2 pi (f - f_ref) / fsr)) / 2
    with g the fringe contrast from the extinction ratio and L the insertion
    loss factor. The two ports are complementary: port1 + port2 = L.
    """
    if port not in (1, 2):
        raise ValueError("port must be 1 or 2")
    f = np.asarray(f, dtype=float)
    g = model.fringe_contrast
    loss = 10.0 ** (-model.insertion_loss / 10.0)
    c = np.cos(2.0 * np.pi * (f - model.f_ref) / model.fsr)
    sign = 1.0 if port == 1 else -1.0
    return loss * (1.0 + sign * g * c) / 2.0


def acf(model: MziModel, f):
    """Amplitude comparison function: 10 log10(port1 / port2) in dB."""
    p1 = mzi_port_response(model, f, 1)
    p2 = mzi_port_response(model, f, 2)
    return 10.0 * np.log10(p1 / p2)


def notch_response(model: NotchFilterModel, f):
    """Cascaded bandstop transmission: product of inverted Lorentzians."""
    f = np.asarray(f, dtype=float)
    r = 10.0 ** (-model.rejection / 10.0)
    t = np.ones_like(f)
    for c in model.centers:
        t = t * (1.0 - (1.0 - r) / (1.0 + (2.0 * (f - c) / model.fwhm_each) ** 2))
    return t


def pd_detect(power, model: PdModel, grid: TimeGrid) -> np.ndarray:
    """Photodetection: responsivity scaling, bandwidth limit, additive noise.

    The single-pole low-pass only engages when the grid can represent it
    (Nyquist >= bw_3db); at the slow scan rates used here the PD is
    transparent. Noise std is noise_sigma x max(power); output is clamped
    at zero.
    """
    p = np.asarray(power, dtype=float)
    if np.any(p < 0):
        raise ValueError("power samples must be >= 0")
    out = model.responsivity * p
    nyquist = grid.sample_rate / 2.0
    if nyquist >= model.bw_3db:
        # bilinear single-pole low-pass at bw_3db
        wc = 2.0 * np.pi * model.bw_3db
        k = wc * grid.dt / 2.0
        b = [k / (1.0 + k), k / (1.0 + k)]
        a = [1.0, (k - 1.0) / (1.0 + k)]
        out = lfilter(b, a, out, zi=lfilter_zi(b, a) * out[0])[0]
    if model.noise_sigma > 0:
        scale = model.noise_sigma * float(np.max(p)) if p.size else 0.0
        if scale > 0:
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(model.seed)))
            out = out + rng.normal(0.0, scale, size=out.shape)
    return np.maximum(out, 0.0)
