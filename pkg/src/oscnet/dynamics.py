"""Closed-form T=0 evolution of two-term coherent superpositions.

Time arguments may be scalars or 1-D arrays; every returned array then carries
the time axis first, followed by the dyad indices (m, n) in {I, II} = {0, 1}.

Sign conventions
----------------
The drift equations d(alpha)/dt = B + E alpha define *backward* characteristics:
the evolved P-function is the initial one evaluated at alpha(t). The coherent
labels of the evolved density operator follow the *forward* flow, which is the
same solution run with t -> -t. With the propagator functions this reads
W+(-t) = W-(t), Z+(-t) = -Z+(t) (and likewise for the lower signs), which turns
the characteristic solution into the label map with W-/-Z+ for mode 1 and
W+/-Z- for mode 2 and the decay factor exp(-Lambda t). Both forms are
implemented; tests check the label map against an RK4 integration of the
forward drift and against the Fock-space oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCoupling
from .params import DerivedCoefficients


def log_overlap(b, a):
    """Closed-form logarithm of the coherent overlap <b|a>."""
    b = np.asarray(b)
    a = np.asarray(a)
    return -0.5 * np.abs(a) ** 2 - 0.5 * np.abs(b) ** 2 + np.conj(b) * a


def coherent_overlap(b, a):
    """<b|a> for coherent states."""
    return np.exp(log_overlap(b, a))


@dataclass(frozen=True)
class PropagatorSample:
    t: np.ndarray
    W_plus: np.ndarray
    W_minus: np.ndarray
    Z_plus: np.ndarray
    Z_minus: np.ndarray
    exp_neg_Lambda_t: np.ndarray


def _times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    return t


def propagator(coeffs: DerivedCoefficients, t) -> PropagatorSample:
    """Evaluate W+-(t), Z+-(t) and exp(-Lambda t)."""
    if coeffs.coupling == 0.0:
        raise DegenerateCoupling("lambda = 0: Delta/lambda and Theta/lambda are undefined")
    t = _times(t)
    lam = coeffs.coupling
    d = coeffs.Delta / lam
    th = coeffs.Theta / lam
    ch = np.cosh(coeffs.Phi * t)
    sh = np.sinh(coeffs.Phi * t)
    co = np.cos(lam * t)
    si = np.sin(lam * t)
    return PropagatorSample(
        t=t,
        W_plus=ch * (co + d * si) + 1j * sh * (si - d * co),
        W_minus=ch * (co - d * si) + 1j * sh * (si + d * co),
        Z_plus=(sh * co + th * ch * si) + 1j * (ch * si - th * sh * co),
        Z_minus=(sh * co - th * ch * si) + 1j * (ch * si + th * sh * co),
        exp_neg_Lambda_t=np.exp(-coeffs.Lambda * t),
    )


def characteristic_trajectories(coeffs: DerivedCoefficients, alpha1_0, alpha2_0, t):
    """Backward characteristics of the drift equation (grow as exp(Re Lambda t))."""
    p = propagator(coeffs, t)
    G1, G2 = coeffs.G
    grow = np.exp(coeffs.Lambda * p.t)
    a1 = grow * ((alpha1_0 - G1) * p.W_plus + (alpha2_0 - G2) * p.Z_plus) + G1
    a2 = grow * ((alpha2_0 - G2) * p.W_minus + (alpha1_0 - G1) * p.Z_minus) + G2
    return a1, a2


def _labels(p: PropagatorSample, G, beta1, beta2):
    G1, G2 = G
    e = p.exp_neg_Lambda_t
    sigma = e * ((beta1 - G1) * p.W_minus - (beta2 - G2) * p.Z_plus) + G1
    zeta = e * ((beta2 - G2) * p.W_plus - (beta1 - G1) * p.Z_minus) + G2
    return sigma, zeta


def label_map(coeffs: DerivedCoefficients, beta1, beta2, t):
    """Forward evolution of a coherent pair |beta1, beta2> -> |sigma(t), zeta(t)>."""
    return _labels(propagator(coeffs, t), coeffs.G, beta1, beta2)


@dataclass(frozen=True)
class InitialSuperposition:
    """N (|b_I^1, b_I^2> + s |b_II^1, b_II^2>) with s = relative_sign."""

    beta_I_1: complex
    beta_I_2: complex
    beta_II_1: complex
    beta_II_2: complex
    relative_sign: int = 1

    def __post_init__(self):
        if self.relative_sign not in (1, -1):
            raise ValueError("relative_sign must be +1 or -1")
        if not self.norm_squared > 0 or not np.isfinite(self.norm_squared):
            raise ValueError("superposition has zero norm")

    @classmethod
    def product_cat(cls, alpha, eta, sign: int = 1) -> "InitialSuperposition":
        """(|alpha> +- |-alpha>)_1 (x) |eta>_2."""
        return cls(complex(alpha), complex(eta), -complex(alpha), complex(eta), sign)

    @classmethod
    def eigen_minus(cls, alpha, sign: int = 1) -> "InitialSuperposition":
        """|alpha, -alpha> +- |-alpha, alpha>: eigenstate of the lower normal mode."""
        a = complex(alpha)
        return cls(a, -a, -a, a, sign)

    @classmethod
    def eigen_plus(cls, alpha, sign: int = 1) -> "InitialSuperposition":
        """|alpha, alpha> +- |-alpha, -alpha>: eigenstate of the upper normal mode."""
        a = complex(alpha)
        return cls(a, a, -a, -a, sign)

    @property
    def betas(self) -> np.ndarray:
        """Array ``[m, mode]`` of coherent amplitudes."""
        return np.array([[self.beta_I_1, self.beta_I_2], [self.beta_II_1, self.beta_II_2]], dtype=complex)

    @property
    def norm_squared(self) -> float:
        ov = coherent_overlap(self.beta_II_1, self.beta_I_1) * coherent_overlap(self.beta_II_2, self.beta_I_2)
        den = 2.0 + 2.0 * self.relative_sign * float(np.real(ov))
        return 1.0 / den if den > 0 else float("inf")

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared))

    @property
    def signs(self) -> np.ndarray:
        s = float(self.relative_sign)
        return np.array([[1.0, s], [s, 1.0]])

    @property
    def max_amplitude(self) -> float:
        return float(np.max(np.abs(self.betas)))

    def swapped(self) -> "InitialSuperposition":
        """Same state with the two oscillators exchanged."""
        return InitialSuperposition(self.beta_I_2, self.beta_I_1, self.beta_II_2, self.beta_II_1, self.relative_sign)


@dataclass(frozen=True)
class JointStateSnapshot:
    """rho_12(t) = sum_mn C_mn |sigma_m, zeta_m><sigma_n, zeta_n|.

    ``sigma``/``zeta`` have shape ``t.shape + (2,)``; ``coeffs`` has shape
    ``t.shape + (2, 2)``; ``thetas`` stacks the four phase functions on a
    leading axis of length 4.
    """

    t: np.ndarray
    sigma: np.ndarray
    zeta: np.ndarray
    coeffs: np.ndarray
    thetas: np.ndarray
    init: InitialSuperposition
    sample: PropagatorSample
    derived: DerivedCoefficients

    def trace(self):
        ov = _gram(self.sigma) * _gram(self.zeta)
        return np.real(np.sum(self.coeffs * np.swapaxes(ov, -1, -2), axis=(-2, -1)))

    def reduce(self, mode: int) -> "ReducedStateSnapshot":
        return reduce_to_mode(self, mode)

    def at(self, index: int) -> "JointStateSnapshot":
        """Pick one time from a batched snapshot."""
        s = self.sample
        sample = PropagatorSample(*(np.asarray(getattr(s, f))[index] for f in
                                    ("t", "W_plus", "W_minus", "Z_plus", "Z_minus", "exp_neg_Lambda_t")))
        return JointStateSnapshot(
            t=self.t[index], sigma=self.sigma[index], zeta=self.zeta[index], coeffs=self.coeffs[index],
            thetas=self.thetas[:, index], init=self.init, sample=sample, derived=self.derived,
        )


@dataclass(frozen=True)
class ReducedStateSnapshot:
    """rho_l(t) = sum_mn c_mn |x_m><x_n| for a single oscillator."""

    t: np.ndarray
    mode: int
    labels: np.ndarray
    coeffs: np.ndarray

    def trace(self):
        ov = _gram(self.labels)
        return np.real(np.sum(self.coeffs * np.swapaxes(ov, -1, -2), axis=(-2, -1)))


def _gram(labels):
    """Overlap matrix O[..., n, m] = <x_n|x_m>."""
    labels = np.asarray(labels)
    return coherent_overlap(labels[..., :, None], labels[..., None, :])


def _phases(p: PropagatorSample, G, betas):
    """Phase functions theta^(1..4)_mn.

    theta^(2) and theta^(4) are complex and enter the exponent without a factor i.
    """
    cj = np.conj
    G1, G2 = G
    b1 = betas[:, 0]
    b2 = betas[:, 1]
    # (m, n) grids
    b1m, b1n = b1[:, None], b1[None, :]
    b2m, b2n = b2[:, None], b2[None, :]

    def ex(x):
        return np.asarray(x)[..., None, None]

    Wp, Wm, Zp, Zm = ex(p.W_plus), ex(p.W_minus), ex(p.Z_plus), ex(p.Z_minus)
    e = ex(p.exp_neg_Lambda_t)
    ec = cj(e)
    decay = np.abs(e) ** 2

    th1 = np.imag(ec * (cj(Wp) * (cj(b2m) - cj(b2n)) - cj(Zm) * (cj(b1m) - cj(b1n)))
                  * (e * (G1 * Zm - G2 * Wp) + G2))
    th2 = 0.5 * decay * (Wp * cj(Zm) * (cj(b1n) * (b2m - b2n) - (cj(b1m) - cj(b1n)) * b2m)
                         - cj(Wp) * Zm * (b1m * (cj(b2m) - cj(b2n)) - (b1m - b1n) * cj(b2n)))
    th3 = np.imag(ec * (cj(Wm) * (cj(b1m) - cj(b1n)) - cj(Zp) * (cj(b2m) - cj(b2n)))
                  * (e * (G2 * Zp - G1 * Wm) + G1))
    th4 = 0.5 * decay * (Wm * cj(Zp) * ((b1m - b1n) * cj(b2n) - b1m * (cj(b2m) - cj(b2n)))
                         - cj(Wm) * Zp * ((cj(b1m) - cj(b1n)) * b2m - cj(b1n) * (b2m - b2n)))
    return np.stack(np.broadcast_arrays(th1 + 0j, th2, th3 + 0j, th4))


def evolve_joint_state(init: InitialSuperposition, coeffs: DerivedCoefficients, t) -> JointStateSnapshot:
    """Evolve ``init`` to time(s) ``t`` in closed form."""
    p = propagator(coeffs, t)
    betas = init.betas
    sigma, zeta = _labels(_expand(p), coeffs.G, betas[:, 0], betas[:, 1])

    decay = np.abs(p.exp_neg_Lambda_t) ** 2  # exp(-2 Re Lambda t)
    x1 = 1.0 - decay * (np.abs(p.W_minus) ** 2 + np.abs(p.Z_minus) ** 2)
    x2 = 1.0 - decay * (np.abs(p.W_plus) ** 2 + np.abs(p.Z_plus) ** 2)
    # log <beta_n|beta_m> laid out as [m, n]
    L1 = log_overlap(betas[None, :, 0], betas[:, None, 0])
    L2 = log_overlap(betas[None, :, 1], betas[:, None, 1])
    th = _phases(p, coeffs.G, betas)
    exponent = (np.asarray(x1)[..., None, None] * L1 + np.asarray(x2)[..., None, None] * L2
                + 1j * (th[0] + th[2]) + th[1] + th[3])
    C = init.norm_squared * init.signs * np.exp(exponent)
    return JointStateSnapshot(t=p.t, sigma=sigma, zeta=zeta, coeffs=C, thetas=th, init=init,
                              sample=p, derived=coeffs)


def _expand(p: PropagatorSample) -> PropagatorSample:
    """Append a trailing axis so samples broadcast against the dyad index."""
    return PropagatorSample(*(np.asarray(getattr(p, f))[..., None] for f in
                              ("t", "W_plus", "W_minus", "Z_plus", "Z_minus", "exp_neg_Lambda_t")))


def reduce_to_mode(snapshot: JointStateSnapshot, mode: int) -> ReducedStateSnapshot:
    """Reduced state of oscillator ``mode`` (1 or 2) in the four-dyad form."""
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    p = snapshot.sample
    init = snapshot.init
    betas = init.betas
    decay = np.abs(p.exp_neg_Lambda_t) ** 2
    L1 = log_overlap(betas[None, :, 0], betas[:, None, 0])
    L2 = log_overlap(betas[None, :, 1], betas[:, None, 1])
    th = snapshot.thetas
    if mode == 1:
        x1 = 1.0 - decay * np.abs(p.W_minus) ** 2
        x2 = 1.0 - decay * np.abs(p.Z_plus) ** 2
        phase = 1j * th[2] + th[3]
        labels = snapshot.sigma
    else:
        x1 = 1.0 - decay * np.abs(p.Z_minus) ** 2
        x2 = 1.0 - decay * np.abs(p.W_plus) ** 2
        phase = 1j * th[0] + th[1]
        labels = snapshot.zeta
    exponent = np.asarray(x1)[..., None, None] * L1 + np.asarray(x2)[..., None, None] * L2 + phase
    c = init.norm_squared * init.signs * np.exp(exponent)
    return ReducedStateSnapshot(t=snapshot.t, mode=mode, labels=labels, coeffs=c)


def product_cat_coefficients(alpha, eta, sign: int, coeffs: DerivedCoefficients, t):
    """C_mn(t) for N(|a> +- |-a>) (x) |eta> in the specialised one-overlap form.

    The decay exponent -2|a|^2 [1 - e^{-2 Re Lambda t}(|W-|^2 + |Z-|^2)] is the
    off-diagonal overlap weight; diagonal entries carry |<b|b>| = 1. The phase
    keeps only Im(theta2 + theta4), which is the whole of theta2 + theta4 here.
    """
    init = InitialSuperposition.product_cat(alpha, eta, sign)
    p = propagator(coeffs, t)
    th = _phases(p, coeffs.G, init.betas)
    decay = np.abs(p.exp_neg_Lambda_t) ** 2
    x = 1.0 - decay * (np.abs(p.W_minus) ** 2 + np.abs(p.Z_minus) ** 2)
    off = np.exp(-2.0 * abs(alpha) ** 2 * np.asarray(x))[..., None, None]
    weight = np.where(np.eye(2, dtype=bool), 1.0, off)
    phase = np.exp(1j * (np.real(th[0] + th[2]) + np.imag(th[1] + th[3])))
    return init.norm_squared * init.signs * weight * phase
