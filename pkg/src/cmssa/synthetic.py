"""Seeded synthetic mixtures for controlled recovery experiments.

A background draw is the sum of many random sinusoids (uniform frequency,
amplitude, phase, and vertical offset) plus white Gaussian noise. A
foreground draw is an independent mixture of the same form with a known
low-variance sub-signal added; recovering that sub-signal is the point of
the exercise. The default sub-signal is an amplitude-modulated sinusoid
whose carrier sits outside the default background frequency band, so it
is spectrally separable yet far below the mixture in variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError, ShapeError
from .ingest import TimeSeries


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for one mixture draw. Frequencies are in cycles per sample."""

    length: int = 2000
    n_sinusoids: int = 500
    noise_sigma: float = 1.0
    amplitude_range: tuple[float, float] = (0.5, 2.0)
    frequency_range: tuple[float, float] = (0.002, 0.05)
    phase_range: tuple[float, float] = (0.0, 2.0 * np.pi)
    offset_range: tuple[float, float] = (-1.0, 1.0)
    carrier_freq: float = 0.08
    envelope_freq: float = 0.00125
    variance_fraction: float = 0.05
    subsignal_waveform: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.length < 2:
            raise ParameterError(f"length must be >= 2, got {self.length}")
        if self.n_sinusoids < 1:
            raise ParameterError(
                f"n_sinusoids must be >= 1, got {self.n_sinusoids}"
            )
        if self.noise_sigma < 0:
            raise ParameterError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.variance_fraction < 0:
            raise ParameterError(
                f"variance_fraction must be >= 0, got {self.variance_fraction}"
            )
        for name in ("amplitude_range", "frequency_range", "phase_range", "offset_range"):
            low, high = getattr(self, name)
            if not low <= high:
                raise ParameterError(f"{name} ({low}, {high}) is not ordered")
        if self.subsignal_waveform is not None:
            wave = np.asarray(self.subsignal_waveform, dtype=np.float64).reshape(-1)
            if wave.size != self.length:
                raise ShapeError(
                    f"subsignal waveform has {wave.size} samples, "
                    f"series length is {self.length}"
                )
            object.__setattr__(self, "subsignal_waveform", wave)


def _mixture(config: SynthConfig) -> np.ndarray:
    """One seeded mixture draw; the draw order below is part of the contract."""
    rng = np.random.default_rng(config.seed)
    freqs = rng.uniform(*config.frequency_range, config.n_sinusoids)
    amps = rng.uniform(*config.amplitude_range, config.n_sinusoids)
    phases = rng.uniform(*config.phase_range, config.n_sinusoids)
    offsets = rng.uniform(*config.offset_range, config.n_sinusoids)
    t = np.arange(config.length)
    waves = amps[:, None] * np.sin(
        2.0 * np.pi * freqs[:, None] * t[None, :] + phases[:, None]
    )
    return waves.sum(axis=0) + offsets.sum() + rng.normal(0.0, config.noise_sigma, config.length)


def _default_subsignal(config: SynthConfig) -> np.ndarray:
    t = np.arange(config.length)
    return np.sin(2.0 * np.pi * config.envelope_freq * t) * np.sin(
        2.0 * np.pi * config.carrier_freq * t
    )


def generate_background(config: SynthConfig, series_id: str = "background") -> TimeSeries:
    """A pure mixture draw, single channel."""
    return TimeSeries(_mixture(config)[:, None], series_id)


def generate_foreground(
    config: SynthConfig, series_id: str = "foreground"
) -> tuple[TimeSeries, np.ndarray]:
    """An independent mixture draw with the sub-signal injected.

    Returns the composite series and the clean injected sub-signal. The
    sub-signal (configured waveform or the default amplitude-modulated
    sinusoid) is rescaled so its variance is ``variance_fraction`` times
    the mixture variance; the composite is mixture + sub-signal, so the
    residual after removing the returned sub-signal is exactly the
    mixture this seed would produce on its own.
    """
    mixture = _mixture(config)
    if config.subsignal_waveform is not None:
        raw = config.subsignal_waveform
    else:
        raw = _default_subsignal(config)
    raw_var = raw.var()
    if raw_var > 0:
        scale = np.sqrt(config.variance_fraction * mixture.var() / raw_var)
    else:
        scale = 0.0
    subsignal = raw * scale
    composite = mixture + subsignal
    limit = config.variance_fraction * composite.var() * (1.0 + 1e-3)
    if subsignal.var() > limit:
        raise NumericError(
            "sub-signal variance exceeds the configured fraction of the "
            "composite variance"
        )
    return TimeSeries(composite[:, None], series_id), subsignal
