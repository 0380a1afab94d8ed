"""Prepare-and-measure BB84 key-rate bounds with a size-limited eavesdropper.

The eavesdropper can only intercept photons entering her limited collection
aperture, parameterised by the per-photon collection probability ``eta_ae``.
Rounds in which she caught *no* photon are secret for free; rounds where a
single photon was sent and she caught it are charged the usual single-photon
penalty.  With gain ``Q`` and error rate ``E`` estimated from the sifted key,
the asymptotic rate is bounded by

    R >= q Q [ -f h(E) + (S11_L / Q)(1 - h(e11_U)) + S0_L / Q ]

with  S0_L  = max{Q - (1 - p0_eve), 0},
      S11_L = max{Q - (1 - p11), 0},
      e11_U = min{E Q / S11_L, 1/2}          (= 1/2 when S11_L = 0),

where ``p0_eve`` is the probability Eve holds zero photons of a round and
``p11`` the probability exactly one photon was emitted and she holds it.
Both follow from the source model: an ideal single-photon source gives
(1 - eta_ae, eta_ae); a phase-randomised weak coherent pulse of mean photon
number ``mu`` gives (exp(-mu eta_ae), mu eta_ae exp(-mu)).

The channel itself is a simple threshold-detector model: two detectors of
dark-count probability ``p_dc`` each, overall transmission
``eta = eta_ch * eta_d``, misalignment error ``e_d`` on signal detections and
random (1/2) error on dark counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # inverse golden ratio


@dataclass(frozen=True)
class DvParams:
    """Source, channel and post-processing parameters for one operating point."""

    source: Literal["sps", "wcp"]
    eta_ch: float          # channel transmissivity
    eta_d: float           # detector efficiency
    p_dc: float            # dark-count probability per detector per gate
    e_d: float             # misalignment error probability
    f: float               # error-correction inefficiency, >= 1
    q: float               # sifting factor, (0, 1]
    eta_ae: float          # Eve's per-photon collection probability, (0, 1]
    mu: float = 1.0        # mean photon number (WCP only)

    def __post_init__(self):
        if self.source not in ("sps", "wcp"):
            raise ValueError(f"source must be 'sps' or 'wcp', got {self.source!r}")
        if self.mu <= 0.0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        for name, lo, hi in (("eta_ch", 0.0, 1.0), ("eta_d", 0.0, 1.0)):
            val = getattr(self, name)
            if not lo < val <= hi:
                raise ValueError(f"{name} must lie in ({lo}, {hi}], got {val}")
        if not 0.0 <= self.p_dc < 1.0:
            raise ValueError(f"p_dc must lie in [0, 1), got {self.p_dc}")
        if not 0.0 <= self.e_d <= 0.5:
            raise ValueError(f"e_d must lie in [0, 0.5], got {self.e_d}")
        if self.f < 1.0:
            raise ValueError(f"f must be >= 1, got {self.f}")
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")
        if not 0.0 < self.eta_ae <= 1.0:
            raise ValueError(f"eta_ae must lie in (0, 1], got {self.eta_ae}")

    @property
    def eta(self) -> float:
        """End-to-end photon transmission probability."""
        return self.eta_ch * self.eta_d


@dataclass(frozen=True)
class DvObservables:
    """Sifted-key statistics: total gain and quantum bit error rate."""

    gain: float
    qber: float

    def __post_init__(self):
        if not 0.0 < self.gain <= 1.0:
            raise ValueError(f"gain must lie in (0, 1], got {self.gain}")
        if not 0.0 <= self.qber <= 0.5:
            raise ValueError(f"qber must lie in [0, 0.5], got {self.qber}")


def binary_entropy(x: float) -> float:
    """Shannon entropy of a bit with bias ``x``, in bits; h(0) = h(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary_entropy argument must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def channel_observables(p: DvParams) -> DvObservables:
    """Expected gain and QBER of the threshold-detector channel model.

    WCP: Q = 1 - (1 - p_dc)^2 exp(-eta mu); SPS: Q = 1 - (1 - p_dc)^2 (1 - eta).
    Errors: e_d on rounds with at least one signal photon detected, 1/2 on
    dark-count-only clicks.
    """
    if p.source == "wcp":
        p_signal = -math.expm1(-p.eta * p.mu)
    else:
        p_signal = p.eta
    no_dark = (1.0 - p.p_dc) ** 2
    gain = 1.0 - no_dark * (1.0 - p_signal)
    eq = p.e_d * p_signal + 0.5 * (gain - p_signal)
    qber = eq / gain if gain > 0.0 else 0.5
    return DvObservables(gain=gain, qber=min(qber, 0.5))


def photon_number_bounds(p: DvParams) -> "tuple[float, float]":
    """(p0_eve, p11): Eve holds nothing / exactly the one photon that was sent."""
    if p.source == "sps":
        return 1.0 - p.eta_ae, p.eta_ae
    return math.exp(-p.mu * p.eta_ae), p.mu * p.eta_ae * math.exp(-p.mu)


def restricted_rate(p: DvParams, obs: DvObservables) -> float:
    """Lower bound on the key rate (bits/pulse); negative values are returned as-is.

    For the single-photon source the best of three bounds is returned: the
    restricted bound above, its variant without the S0 credit, and the
    eavesdropper-independent bound q Q [1 - (1 + f) h(E)] that treats every
    detection as a single-photon event.
    """
    gain, qber = obs.gain, obs.qber
    if gain <= 0.0:
        raise ValueError("gain must be positive")
    p0_eve, p11 = photon_number_bounds(p)
    s0 = max(gain - (1.0 - p0_eve), 0.0)
    s11 = max(gain - (1.0 - p11), 0.0)
    e11 = 0.5 if s11 == 0.0 else min(qber * gain / s11, 0.5)
    h_e = binary_entropy(qber)
    rate = p.q * (-p.f * gain * h_e + s11 * (1.0 - binary_entropy(e11)) + s0)
    if p.source == "sps":
        no_s0 = p.q * gain * (-p.f * h_e + 1.0 - binary_entropy(e11))
        all_single = p.q * gain * (1.0 - (1.0 + p.f) * h_e)
        rate = max(rate, no_s0, all_single)
    return rate


def rate_at(p: DvParams) -> float:
    """Convenience: model the channel, then bound the rate."""
    return restricted_rate(p, channel_observables(p))


@dataclass(frozen=True)
class MuOptimum:
    mu: float
    rate: float


def optimize_mu(p: DvParams, *, mu_range: "tuple[float, float]" = (1e-4, 1e3),
                coarse_points: int = 200, tol: float = 1e-6) -> MuOptimum:
    """Maximise the WCP rate over the pulse intensity.

    A log-spaced coarse scan brackets the maximum, then golden-section search
    on log10(mu) polishes it to ``tol``.  If no intensity gives a positive
    rate the returned rate is 0.0 and mu is the coarse-scan argmax, which
    keeps sweeps well-defined in the no-key region.
    """
    if p.source != "wcp":
        raise ValueError("mu optimisation only applies to the WCP source")
    lo, hi = math.log10(mu_range[0]), math.log10(mu_range[1])
    if not hi > lo:
        raise ValueError(f"empty mu range {mu_range}")

    def rate_log(x: float) -> float:
        return rate_at(replace(p, mu=10.0 ** x))

    xs = [lo + (hi - lo) * i / (coarse_points - 1) for i in range(coarse_points)]
    rates = [rate_log(x) for x in xs]
    k = max(range(coarse_points), key=lambda i: rates[i])
    if rates[k] <= 0.0:
        return MuOptimum(mu=10.0 ** xs[k], rate=0.0)

    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, coarse_points - 1)]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = rate_log(c), rate_log(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = rate_log(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = rate_log(d)
    x_best = 0.5 * (a + b)
    r_best = rate_log(x_best)
    if rates[k] > r_best:  # guard against a non-unimodal bracket
        x_best, r_best = xs[k], rates[k]
    return MuOptimum(mu=10.0 ** x_best, rate=r_best)
