"""Desk-scale synthetic models: layered traces, lateral wedge sections,
and ready-to-invert bundles of (truth, prior, observed data).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import (
    ImpedanceModel,
    SeismicGather,
    Wavelet,
    build_prior,
    convolve_same,
    forward_model,
    normal_incidence_reflectivity,
    ricker,
)


@dataclass
class SynthBundle:
    """One section's ground truth, smoothed prior, and observed data."""

    truth: ImpedanceModel
    prior: ImpedanceModel
    observed: SeismicGather


def layered_trace(n_samples: int, values, boundaries) -> np.ndarray:
    """Piecewise-constant trace; boundaries are fractions of the length."""
    values = tuple(float(v) for v in values)
    edges = [0] + [int(round(b * n_samples)) for b in boundaries] + [n_samples]
    if len(values) != len(edges) - 1:
        raise ValueError("need one value per layer (len(boundaries) + 1)")
    if any(e1 >= e2 for e1, e2 in zip(edges, edges[1:])):
        raise ValueError("layer boundaries must be strictly increasing fractions")
    out = np.empty(n_samples)
    for value, lo, hi in zip(values, edges, edges[1:]):
        out[lo:hi] = value
    return out


def wedge_section(
    n_samples: int, n_traces: int, values, top: float, ramp: tuple[float, float]
) -> np.ndarray:
    """Three-layer section whose second boundary deepens across traces."""
    if len(values) != 3:
        raise ValueError("wedge sections use exactly three layers")
    bottoms = np.linspace(ramp[0], ramp[1], n_traces)
    cols = [
        layered_trace(n_samples, values, (top, float(b))) for b in bottoms
    ]
    return np.stack(cols, axis=1)


def add_noise(gather: SeismicGather, sigma: float, rng: np.random.Generator):
    if sigma <= 0.0:
        return gather
    noisy = gather.data + rng.normal(0.0, sigma, size=gather.data.shape)
    return SeismicGather(noisy, gather.angles, gather.dt)


def post_stack_bundle(
    n_samples: int = 64,
    dt: float = 0.002,
    frequency: float = 40.0,
    zp_values=(6.0, 7.8, 6.6),
    boundaries=(0.35, 0.7),
    prior_window: int = 15,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> SynthBundle:
    """Three-layer 1-D acoustic model and its zero-offset trace."""
    truth = ImpedanceModel(layered_trace(n_samples, zp_values, boundaries))
    prior = build_prior(truth, prior_window)
    wavelet = ricker(frequency, dt)
    observed = forward_model(truth, (0.0,), wavelet)
    observed = add_noise(observed, noise_sigma, np.random.default_rng(seed))
    return SynthBundle(truth, prior, observed)


def pre_stack_bundle(
    n_samples: int = 64,
    dt: float = 0.002,
    frequency: float = 40.0,
    zp_values=(6.0, 7.8, 6.6),
    zs_values=(3.1, 4.3, 3.4),
    boundaries=(0.35, 0.7),
    angles=(5.0, 15.0, 25.0),
    gamma: float = 0.5,
    prior_window: int = 15,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> SynthBundle:
    """Three-layer elastic model and its angle gathers."""
    truth = ImpedanceModel(
        layered_trace(n_samples, zp_values, boundaries),
        layered_trace(n_samples, zs_values, boundaries),
    )
    prior = build_prior(truth, prior_window)
    wavelet = ricker(frequency, dt)
    observed = forward_model(truth, angles, wavelet, gamma)
    observed = add_noise(observed, noise_sigma, np.random.default_rng(seed))
    return SynthBundle(truth, prior, observed)


def section_gather(zp: np.ndarray, wavelet: Wavelet) -> SeismicGather:
    cols = [
        convolve_same(normal_incidence_reflectivity(zp[:, c]), wavelet)
        for c in range(zp.shape[1])
    ]
    data = np.stack(cols, axis=1)
    return SeismicGather(data, (0.0,) * zp.shape[1], wavelet.dt)


def section_bundles(
    n_sections: int = 2,
    n_samples: int = 16,
    n_traces: int = 16,
    dt: float = 0.004,
    frequency: float = 40.0,
    zp_values=(6.0, 7.8, 6.6),
    top: float = 0.25,
    ramps=((0.55, 0.85), (0.5, 0.8)),
    prior_window: int = 5,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> list[SynthBundle]:
    """Lateral 2-D wedge sections at normal incidence, one bundle each."""
    if len(ramps) < n_sections:
        raise ValueError("need one boundary ramp per section")
    wavelet = ricker(frequency, dt)
    rng = np.random.default_rng(seed)
    bundles = []
    for s in range(n_sections):
        zp = wedge_section(n_samples, n_traces, zp_values, top, tuple(ramps[s]))
        truth = ImpedanceModel(zp)
        prior = build_prior(truth, prior_window)
        observed = add_noise(section_gather(zp, wavelet), noise_sigma, rng)
        bundles.append(SynthBundle(truth, prior, observed))
    return bundles
