"""Observables of the two-oscillator network.

All state-based quantities are exact finite sums over coherent overlaps of the
dyad representation; they accept batched snapshots (leading time axis).
Rate-based coherence factors take ``DampingRates`` and use the oscillator sums
``sum_plus = g1+ + g2+`` and ``sum_minus = g1- + g2-``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import InitialSuperposition, JointStateSnapshot, coherent_overlap
from .errors import NoDissipation
from .params import DampingRates

STATE_KINDS = ("product_cat", "eigen_minus", "eigen_plus")


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite values in series {self.label!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def argmax(self) -> int:
        return int(np.argmax(self.values))

    def max(self) -> float:
        return float(np.max(self.values))


@dataclass(frozen=True)
class DecoherenceReport:
    """Decoherence and correlation times; ``tau_C is None`` means unbounded."""

    tau_D: float
    tau_D_reference: float
    ratio: float
    tau_C: float | None
    tau_ratio: float | None

    @property
    def tau_C_unbounded(self) -> bool:
        return self.tau_C is None

    def to_dict(self) -> dict:
        return {
            "tau_D": self.tau_D,
            "tau_D_reference": self.tau_D_reference,
            "ratio": self.ratio,
            "tau_C": self.tau_C,
            "tau_C_unbounded": self.tau_C_unbounded,
            "tau_ratio": self.tau_ratio,
        }


# ---------------------------------------------------------------- overlap algebra

def _cross_gram(x, y, u, v):
    """G[..., n, k] = <x_n, y_n | u_k, v_k>; pass y=v=None for one mode."""
    x = np.asarray(x)[..., :, None]
    u = np.asarray(u)[..., None, :]
    g = coherent_overlap(x, u)
    if y is not None:
        g = g * coherent_overlap(np.asarray(y)[..., :, None], np.asarray(v)[..., None, :])
    return g


def trace_product(C, x, y, D, u, v=None):
    """Tr[rho sigma] for rho = sum C_mn |x_m y_m><x_n y_n| and sigma built likewise from D, u, v.

    ``y`` and ``v`` are ``None`` for single-mode operators.
    """
    A = _cross_gram(x, y, u, v)                 # <x_n|u_k>
    B = _cross_gram(u, v, x, y)                 # <u_l|x_m>
    prod = np.asarray(C) @ A @ np.asarray(D) @ B
    return np.real(np.trace(prod, axis1=-2, axis2=-1))


def _initial_operator(init: InitialSuperposition, swap: bool = False):
    b = init.betas
    C0 = init.norm_squared * init.signs
    if swap:
        return C0, b[:, 1], b[:, 0]
    return C0, b[:, 0], b[:, 1]


def _clip_prob(p):
    return np.clip(p, 0.0, 1.0)


def recurrence_probability(init: InitialSuperposition, snapshot: JointStateSnapshot):
    """P_R(t) = Tr[rho(t) rho(0)]."""
    D, u, v = _initial_operator(init)
    return _clip_prob(trace_product(snapshot.coeffs, snapshot.sigma, snapshot.zeta, D, u, v))


def swap_probability(init: InitialSuperposition, snapshot: JointStateSnapshot):
    """P_S(t) = Tr[rho(t) rho(0) with the oscillator labels exchanged]."""
    D, u, v = _initial_operator(init, swap=True)
    return _clip_prob(trace_product(snapshot.coeffs, snapshot.sigma, snapshot.zeta, D, u, v))


def purity(state):
    """Tr rho^2 for a joint or reduced snapshot."""
    if isinstance(state, JointStateSnapshot):
        return trace_product(state.coeffs, state.sigma, state.zeta, state.coeffs, state.sigma, state.zeta)
    return trace_product(state.coeffs, state.labels, None, state.coeffs, state.labels)


def linear_entropies(snapshot: JointStateSnapshot):
    """(S12, S1, S2, I) with S = 1 - Tr rho^2 and I = S1 + S2 - S12."""
    s12 = 1.0 - purity(snapshot)
    s1 = 1.0 - purity(snapshot.reduce(1))
    s2 = 1.0 - purity(snapshot.reduce(2))
    return s12, s1, s2, s1 + s2 - s12


def find_state_probability(snapshot: JointStateSnapshot, target: str, mode: int):
    """<psi|rho_mode(t)|psi> for the initial cat of mode 1 or the initial coherent state of mode 2.

    ``target`` is ``"cat_in_mode"`` (the superposition N(|b_I^1> +- |b_II^1>))
    or ``"coherent_in_mode"`` (the coherent state |b_I^2>).
    """
    init = snapshot.init
    if target == "cat_in_mode":
        labels = np.array([init.beta_I_1, init.beta_II_1])
        s = init.relative_sign
        ov = coherent_overlap(labels[1], labels[0])
        n2 = 1.0 / (2.0 + 2.0 * s * np.real(ov))
        D = n2 * np.array([[1.0, s], [s, 1.0]])
    elif target == "coherent_in_mode":
        labels = np.array([init.beta_I_2])
        D = np.ones((1, 1))
    else:
        raise ValueError(f"unknown target {target!r}")
    red = snapshot.reduce(mode)
    return _clip_prob(trace_product(red.coeffs, red.labels, None, D, labels))


def joint_coherence(snapshot: JointStateSnapshot):
    """|C_{I,II}| / N^2: off-diagonal weight of the joint dyad representation."""
    return np.abs(snapshot.coeffs[..., 0, 1]) / snapshot.init.norm_squared


def reduced_coherence(snapshot: JointStateSnapshot, mode: int):
    """|c_{I,II}| / N^2 of the reduced state of ``mode``.

    For the product cat this follows the rate-based reduced factor exactly,
    including the mode-2 value exp(-2|alpha|^2) at t=0: the overlap of the two
    cat components, since no cat coherence sits in mode 2 initially.
    """
    return np.abs(snapshot.reduce(mode).coeffs[..., 0, 1]) / snapshot.init.norm_squared


# ---------------------------------------------------------------- rate-based factors

def coherence_factor_joint(state_kind: str, rates: DampingRates, alpha, t):
    """Joint-state coherence factor for the three initial-state families."""
    a2 = abs(alpha) ** 2
    t = np.asarray(t, dtype=float)
    sp, sm = rates.sum_plus, rates.sum_minus
    if state_kind == "product_cat":
        return np.exp(-a2 * (2.0 - np.exp(-sp * t) - np.exp(-sm * t)))
    if state_kind == "eigen_minus":
        return np.exp(-4.0 * a2 * (1.0 - np.exp(-sm * t)))
    if state_kind == "eigen_plus":
        return np.exp(-4.0 * a2 * (1.0 - np.exp(-sp * t)))
    raise ValueError(f"unknown state kind {state_kind!r}")


def cross_decay_decomposition(state_kind: str, rates: DampingRates, alpha, t):
    """Eigenstate factors written as (usual channel) x (cross-decay channel)."""
    a2 = abs(alpha) ** 2
    t = np.asarray(t, dtype=float)
    usual = np.exp(-(rates.sum_plus + rates.sum_minus) * t / 2.0)
    cross = np.exp((rates.sum_plus - rates.sum_minus) * t / 2.0)
    if state_kind == "eigen_minus":
        return np.exp(-4.0 * a2 * (1.0 - usual * cross))
    if state_kind == "eigen_plus":
        return np.exp(-4.0 * a2 * (1.0 - usual / cross))
    raise ValueError(f"no cross-decay decomposition for {state_kind!r}")


def coherence_factor_reduced(mode: int, rates: DampingRates, coupling: float, alpha, t):
    """Cat coherence carried by oscillator ``mode`` for the product-cat state.

    exp{-2|a|^2 [1 - (e^{-S+ t} + e^{-S- t} + 2 cos(2 lambda t + phi) e^{-(S+ + S-) t/2}) / 4]}
    with phi = 0 for mode 1 and pi for mode 2. For identical oscillators
    S+- = 2 gamma+-; for unequal damping S+- are the oscillator sums.
    """
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    a2 = abs(alpha) ** 2
    t = np.asarray(t, dtype=float)
    sp, sm = rates.sum_plus, rates.sum_minus
    phi = 0.0 if mode == 1 else math.pi
    f = np.exp(-sp * t) + np.exp(-sm * t) + 2.0 * np.cos(2.0 * coupling * t + phi) * np.exp(-(sp + sm) * t / 2.0)
    return np.exp(-2.0 * a2 * (1.0 - f / 4.0))


def isolated_mode_factor(relaxation_rate: float, alpha, t):
    """Cat coherence of a single uncoupled oscillator with energy decay rate Gamma."""
    t = np.asarray(t, dtype=float)
    return np.exp(-2.0 * abs(alpha) ** 2 * (1.0 - np.exp(-relaxation_rate * t)))


# ---------------------------------------------------------------- decoherence times

def joint_decoherence_time(state_kind: str, rates: DampingRates, alpha) -> float:
    """Linearised decoherence time: inverse of the slope of the exponent at t=0."""
    a2 = abs(alpha) ** 2
    if state_kind == "product_cat":
        slope = a2 * (rates.sum_plus + rates.sum_minus)
    elif state_kind == "eigen_minus":
        slope = 4.0 * a2 * rates.sum_minus
    elif state_kind == "eigen_plus":
        slope = 4.0 * a2 * rates.sum_plus
    else:
        raise ValueError(f"unknown state kind {state_kind!r}")
    return math.inf if slope == 0 else 1.0 / slope


def reference_decoherence_time(relaxation_rate: float, alpha) -> float:
    """Isolated-mode benchmark tau_R / 2|alpha|^2 with tau_R = 1/Gamma."""
    return 1.0 / (2.0 * abs(alpha) ** 2 * relaxation_rate)


def correlation_time(rates: DampingRates, alpha) -> float | None:
    """Time scale for the minima of the reduced entropies to reach ~0.1; None if unbounded."""
    cross = rates.sum_plus - rates.sum_minus
    if cross == 0.0:
        return None
    return 1.0 / (5.0 * abs(alpha) * abs(cross))


def decoherence_report(rates: DampingRates, alpha, relaxation_rate: float | None = None,
                       state_kind: str = "product_cat") -> DecoherenceReport:
    """Collect tau_D, the isolated-mode benchmark, tau_C and their ratios.

    ``relaxation_rate`` is the Gamma of the oscillator holding the cat; it
    defaults to twice the oscillator-1 rate at the drive frequency.
    """
    if rates.is_zero():
        raise NoDissipation("all damping rates vanish; decoherence times are unbounded")
    if abs(alpha) == 0:
        raise ValueError("alpha must be nonzero")
    gamma = relaxation_rate if relaxation_rate is not None else 2.0 * rates.gamma_at_drive_1
    if not gamma > 0:
        raise ValueError("relaxation_rate must be positive")
    tau_d = joint_decoherence_time(state_kind, rates, alpha)
    ref = reference_decoherence_time(gamma, alpha)
    tau_c = correlation_time(rates, alpha)
    return DecoherenceReport(
        tau_D=tau_d,
        tau_D_reference=ref,
        ratio=tau_d / ref,
        tau_C=tau_c,
        tau_ratio=None if tau_c is None else tau_c / tau_d,
    )


def numeric_decoherence_time(times, factor) -> float | None:
    """First time at which -ln(factor) reaches 1, linearly interpolated; None if never."""
    t = np.asarray(times, dtype=float)
    x = -np.log(np.asarray(factor, dtype=float))
    idx = np.nonzero(x >= 1.0)[0]
    if idx.size == 0:
        return None
    i = int(idx[0])
    if i == 0:
        return float(t[0])
    return float(t[i - 1] + (1.0 - x[i - 1]) * (t[i] - t[i - 1]) / (x[i] - x[i - 1]))
