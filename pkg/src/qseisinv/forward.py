"""Physics decoder: wavelet, linearized reflectivity, convolution, and
their analytic adjoints with respect to the impedances.

Reflectivity is the small-contrast log-impedance form. At normal
incidence r = 0.5 * d(ln Zp); at angle theta the two-term impedance
expression

    r(theta) = 0.5 * (1 + tan^2(theta)) * d(ln Zp)
               - 4 * gamma^2 * sin^2(theta) * d(ln Zs)

is used with a constant background Vs/Vp ratio gamma (density term
dropped; the encoder only provides Zp and Zs). Reflectivity series keep
the trace length by a trailing zero, and synthetics use centered
("same") convolution with implicit zero extension.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ENDPOINT_RATIO = 1e-3
MAX_ANGLE_DEG = 40.0


@dataclass(frozen=True)
class Wavelet:
    """Zero-phase source pulse on a symmetric odd-length grid."""

    samples: np.ndarray
    dt: float
    peak_frequency: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size % 2 != 1:
            raise ValueError("wavelet must be a 1-D array of odd length")
        if not np.allclose(samples, samples[::-1], atol=1e-12):
            raise ValueError("wavelet must be symmetric about its center")
        peak = np.max(np.abs(samples))
        if abs(samples[0]) > ENDPOINT_RATIO * peak:
            raise ValueError("wavelet endpoints exceed the truncation rule")
        object.__setattr__(self, "samples", samples)

    @property
    def center(self) -> int:
        return self.samples.size // 2


def ricker(peak_frequency: float, dt: float) -> Wavelet:
    """Ricker pulse (1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2), unit peak.

    Truncated at the smallest odd length whose tail stays below 1e-3 of
    the peak (checking the whole tail, not just the endpoint, so a
    sample landing on a zero crossing cannot cut the side lobes off).
    """
    nyquist = 0.5 / dt
    if not 0.0 < peak_frequency < nyquist:
        raise ValueError(
            f"peak frequency {peak_frequency} Hz outside (0, Nyquist={nyquist} Hz)"
        )
    # beta = (pi f t)^2 = 14 puts the envelope around 2e-5, safely sub-threshold
    t_max = np.sqrt(14.0) / (np.pi * peak_frequency)
    k_max = max(1, int(np.ceil(t_max / dt)))
    t = np.arange(1, k_max + 1) * dt
    beta = (np.pi * peak_frequency * t) ** 2
    half = (1.0 - 2.0 * beta) * np.exp(-beta)
    above = np.nonzero(np.abs(half) > ENDPOINT_RATIO)[0]
    n_half = int(above[-1]) + 2 if above.size else 1
    half = half[:n_half]
    samples = np.concatenate([half[::-1], [1.0], half])
    return Wavelet(samples, float(dt), float(peak_frequency))


@dataclass
class ImpedanceModel:
    """P- and optional S-impedance, km/s*g/cc, strictly positive.

    Arrays are 1-D traces (time) or 2-D sections (time x trace).
    """

    zp: np.ndarray
    zs: np.ndarray | None = None

    def __post_init__(self):
        self.zp = np.asarray(self.zp, dtype=np.float64)
        if self.zp.ndim not in (1, 2) or self.zp.size == 0:
            raise ValueError("zp must be a nonempty 1-D or 2-D array")
        if not np.all(self.zp > 0.0):
            raise ValueError("impedances must be strictly positive")
        if self.zs is not None:
            self.zs = np.asarray(self.zs, dtype=np.float64)
            if self.zs.shape != self.zp.shape:
                raise ValueError("zs must match the shape of zp")
            if not np.all(self.zs > 0.0):
                raise ValueError("impedances must be strictly positive")

    @property
    def n_samples(self) -> int:
        return self.zp.shape[0]


@dataclass
class SeismicGather:
    """Amplitude matrix (time x column) with one incidence angle per column."""

    data: np.ndarray
    angles: tuple
    dt: float

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim == 1:
            self.data = self.data[:, None]
        self.angles = tuple(float(a) for a in self.angles)
        if len(self.angles) < 1 or self.data.shape[1] != len(self.angles):
            raise ValueError("one angle per data column is required")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]


def _check_trace(z: np.ndarray, name: str) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size < 2:
        raise ValueError(f"{name} must be a 1-D trace with at least 2 samples")
    if not np.all(z > 0.0):
        raise ValueError(f"{name} must be strictly positive")
    return z


def normal_incidence_reflectivity(zp: np.ndarray) -> np.ndarray:
    """0.5 * (ln zp[t+1] - ln zp[t]) with a trailing zero pad."""
    zp = _check_trace(zp, "zp")
    r = np.zeros_like(zp)
    r[:-1] = 0.5 * np.diff(np.log(zp))
    return r


def _angle_coefficients(angle_deg: float, gamma: float) -> tuple[float, float]:
    th = np.deg2rad(angle_deg)
    return 0.5 * (1.0 + np.tan(th) ** 2), -4.0 * gamma ** 2 * np.sin(th) ** 2


def aki_richards_reflectivity(
    zp: np.ndarray, zs: np.ndarray, angle_deg: float, gamma: float = 0.5
) -> np.ndarray:
    """Two-term linearized angle reflectivity in the impedance domain."""
    zp = _check_trace(zp, "zp")
    zs = _check_trace(zs, "zs")
    if zs.shape != zp.shape:
        raise ValueError("zp and zs must share a shape")
    if not 0.0 <= angle_deg <= MAX_ANGLE_DEG:
        raise ValueError(f"angle {angle_deg} deg outside [0, {MAX_ANGLE_DEG}]")
    a, b = _angle_coefficients(angle_deg, gamma)
    r = np.zeros_like(zp)
    r[:-1] = a * np.diff(np.log(zp)) + b * np.diff(np.log(zs))
    return r


def convolve_same(r: np.ndarray, wavelet: Wavelet) -> np.ndarray:
    """Centered linear convolution, output length = len(r)."""
    r = np.asarray(r, dtype=np.float64)
    w = wavelet.samples
    if w.size >= 2 * r.size:
        raise ValueError(
            f"wavelet of {w.size} samples too long for a {r.size}-sample trace"
        )
    full = np.convolve(r, w)
    return full[wavelet.center : wavelet.center + r.size]


def correlate_same(g: np.ndarray, wavelet: Wavelet) -> np.ndarray:
    """Adjoint of convolve_same: centered correlation with the wavelet."""
    g = np.asarray(g, dtype=np.float64)
    w = wavelet.samples
    full = np.convolve(g, w[::-1])
    start = w.size - 1 - wavelet.center
    return full[start : start + g.size]


def forward_model(
    model: ImpedanceModel, angles, wavelet: Wavelet, gamma: float = 0.5
) -> SeismicGather:
    """Synthesize one gather column per incidence angle."""
    angles = tuple(float(a) for a in angles)
    if model.zp.ndim != 1:
        raise ValueError("forward_model operates on 1-D impedance traces")
    if model.zs is None and any(a != 0.0 for a in angles):
        raise ValueError("S-impedance is required for nonzero incidence angles")
    cols = []
    for angle in angles:
        if model.zs is None:
            r = normal_incidence_reflectivity(model.zp)
        else:
            r = aki_richards_reflectivity(model.zp, model.zs, angle, gamma)
        cols.append(convolve_same(r, wavelet))
    return SeismicGather(np.stack(cols, axis=1), angles, wavelet.dt)


def forward_gradient(
    model: ImpedanceModel,
    angles,
    wavelet: Wavelet,
    gamma: float,
    dL_dseis: np.ndarray,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Exact chain rule of forward_model: returns (dL/dzp, dL/dzs).

    Correlation undoes the convolution, the adjoint of the forward
    difference is a negated backward difference (the padded final
    reflectivity sample is constant and contributes nothing), and
    d(ln z)/dz = 1/z maps log-impedance gradients back to impedance.
    """
    angles = tuple(float(a) for a in angles)
    if model.zp.ndim != 1:
        raise ValueError("forward_gradient operates on 1-D impedance traces")
    if model.zs is None and any(a != 0.0 for a in angles):
        raise ValueError("S-impedance is required for nonzero incidence angles")
    dL_dseis = np.asarray(dL_dseis, dtype=np.float64)
    n = model.n_samples
    if dL_dseis.shape != (n, len(angles)):
        raise ValueError(
            f"dL_dseis shape {dL_dseis.shape} != expected {(n, len(angles))}"
        )
    g_lnzp = np.zeros(n)
    g_lnzs = np.zeros(n) if model.zs is not None else None
    for j, angle in enumerate(angles):
        dr = correlate_same(dL_dseis[:, j], wavelet)[: n - 1]
        if model.zs is None:
            a, b = 0.5, 0.0
        else:
            a, b = _angle_coefficients(angle, gamma)
        g_lnzp[1:] += a * dr
        g_lnzp[:-1] -= a * dr
        if g_lnzs is not None:
            g_lnzs[1:] += b * dr
            g_lnzs[:-1] -= b * dr
    dzp = g_lnzp / model.zp
    dzs = g_lnzs / model.zs if g_lnzs is not None else None
    return dzp, dzs


def build_prior(model: ImpedanceModel, window: int) -> ImpedanceModel:
    """Low-frequency background: moving average of ln(z), reflective ends."""
    if window < 1 or window % 2 == 0:
        raise ValueError("smoothing window must be an odd positive integer")

    def smooth(z: np.ndarray) -> np.ndarray:
        if window == 1:
            return z.copy()
        half = window // 2
        if half > z.shape[0] - 1:
            raise ValueError(
                f"window {window} too large for a {z.shape[0]}-sample trace"
            )
        kernel = np.full(window, 1.0 / window)
        ln = np.log(z)
        if ln.ndim == 1:
            padded = np.pad(ln, half, mode="reflect")
            return np.exp(np.convolve(padded, kernel, mode="valid"))
        cols = []
        for c in range(ln.shape[1]):
            padded = np.pad(ln[:, c], half, mode="reflect")
            cols.append(np.convolve(padded, kernel, mode="valid"))
        return np.exp(np.stack(cols, axis=1))

    return ImpedanceModel(
        smooth(model.zp), smooth(model.zs) if model.zs is not None else None
    )
