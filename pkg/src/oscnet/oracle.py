"""Brute-force Fock-space integration of the T=0 master equation.

The density matrix of the two modes lives on the product basis |n1, n2> with
index n1 * N2 + n2. Superoperators act on the row-major vectorisation
vec(rho)[i * D + j] = rho[i, j], for which vec(A rho B) = (A kron B^T) vec(rho).
The superoperator is stored sparse: at N = 16 per mode it has 65536^2 entries,
of which only a few per row are nonzero.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .dynamics import InitialSuperposition, JointStateSnapshot
from .errors import StepSizeError, TruncationError
from .params import DampingRates, SystemConfig, evaluate_rates

MAX_STEP = 0.05       # largest accepted lambda * dt
MAX_FAST_STEP = 0.2   # largest accepted (|Omega| + lambda) * dt
DEFAULT_STEP = 0.01
DEFAULT_FAST_STEP = 0.04


def minimum_truncation(amplitude: float) -> int:
    """Smallest N with N > 4|a|^2 + 6|a| + 4."""
    a = abs(amplitude)
    return int(math.floor(4 * a * a + 6 * a + 4)) + 1


def check_truncation(amplitude: float, truncation) -> None:
    need = minimum_truncation(amplitude)
    for n in truncation:
        if n < need:
            raise TruncationError(
                f"truncation N={n} too small for amplitude {abs(amplitude):.6g}; need N >= {need}", need)


@dataclass
class FockDensityMatrix:
    dim1: int
    dim2: int
    data: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        d = self.dim1 * self.dim2
        if self.data.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {self.data.shape}")

    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def partial_trace(self, keep: int) -> np.ndarray:
        r = self.data.reshape(self.dim1, self.dim2, self.dim1, self.dim2)
        if keep == 1:
            return np.einsum("ajbj->ab", r)
        if keep == 2:
            return np.einsum("iaib->ab", r)
        raise ValueError("keep must be 1 or 2")

    def expectation(self, op) -> complex:
        return complex(np.trace(self.data @ op))

    def mean_amplitudes(self) -> tuple[complex, complex]:
        """(<a1>, <a2>)."""
        a1, a2 = mode_operators(self.dim1, self.dim2, sparse=False)
        return self.expectation(a1), self.expectation(a2)


@dataclass
class LiouvillianMatrix:
    matrix: sp.csr_matrix
    dim1: int
    dim2: int
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def trace_leak(self) -> float:
        """max |sum_i L[(i,i), :]|: zero for a trace-preserving generator."""
        d = self.dim1 * self.dim2
        diag = np.arange(d) * (d + 1)
        return float(np.max(np.abs(np.asarray(self.matrix[diag, :].sum(axis=0)))))


def _lowering(n: int):
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, shape=(n, n), dtype=complex, format="csr")


def mode_operators(n1: int, n2: int, sparse: bool = True):
    """Lowering operators a1, a2 on the product space."""
    a1 = sp.kron(_lowering(n1), sp.identity(n2, dtype=complex), format="csr")
    a2 = sp.kron(sp.identity(n1, dtype=complex), _lowering(n2), format="csr")
    if sparse:
        return a1, a2
    return a1.toarray(), a2.toarray()


def _left(A, eye):
    return sp.kron(A, eye, format="csr")


def _right(B, eye):
    return sp.kron(eye, B.T, format="csr")


def _sandwich(A, B):
    """vec(A rho B)."""
    return sp.kron(A, B.T, format="csr")


def _dissipator(A, B):
    """vec(2 A rho B^dag - B^dag A rho - rho B^dag A)."""
    Bd = B.conj().T
    eye = sp.identity(A.shape[0], dtype=complex, format="csr")
    return 2.0 * _sandwich(A, Bd) - _left(Bd @ A, eye) - _right(Bd @ A, eye)


def drive_correction_weights(Omega, coupling, drive_amplitude, rates: DampingRates, regime: str = "strong",
                             relaxation_rates=None):
    """Prefactors k_l of the drive corrections k_l [rho, a_l - a_l^dag]."""
    if drive_amplitude == 0.0:
        return 0.0, 0.0
    F = drive_amplitude
    den = Omega * Omega - coupling * coupling
    if relaxation_rates is None:
        relaxation_rates = (rates.gamma_plus_1 + rates.gamma_minus_1, rates.gamma_plus_2 + rates.gamma_minus_2)
    out = []
    for l, (gp, gm, gw) in enumerate(zip(rates.plus, rates.minus,
                                         (rates.gamma_at_drive_1, rates.gamma_at_drive_2)), start=1):
        d1, d2 = float(l == 1), float(l == 2)
        if regime == "weak":
            # gamma_l(omega_l0) = Gamma_l / 2
            out.append(F / den * (Omega * d2 - coupling * d1) * (gw - 0.5 * relaxation_rates[l - 1]))
        else:
            out.append(F / (2.0 * den) * ((Omega * d1 - coupling * d2) * (gm - gp)
                                          + (Omega * d2 - coupling * d1) * (2.0 * gw - gm - gp)))
    return tuple(out)


def liouvillian_from_parameters(
    Omega: float,
    coupling: float,
    rates: DampingRates,
    truncation,
    drive_amplitude: float = 0.0,
    regime: str = "strong",
    relaxation_rates=None,
    drive_corrections: bool | None = None,
) -> LiouvillianMatrix:
    """Sparse generator of d rho/dt in the frame rotating at the drive frequency.

    ``regime="weak"`` builds the standard per-mode Lindblad form with energy
    decay rates ``relaxation_rates`` (Gamma_1, Gamma_2) and no cross-decay;
    ``regime="strong"`` uses the split rates and the cross-decay channel.
    """
    n1, n2 = (int(x) for x in truncation)
    if n1 < 2 or n2 < 2:
        raise TruncationError("truncation must be at least 2 levels per mode", 2)
    if regime not in ("weak", "strong"):
        raise ValueError("regime must be 'weak' or 'strong'")
    if drive_corrections is None:
        drive_corrections = drive_amplitude != 0.0
    a1, a2 = mode_operators(n1, n2)
    ops = (a1, a2)
    d = n1 * n2
    eye = sp.identity(d, dtype=complex, format="csr")

    H = Omega * (a1.conj().T @ a1 + a2.conj().T @ a2) + coupling * (a1.conj().T @ a2 + a2.conj().T @ a1)
    if drive_amplitude != 0.0:
        H = H + drive_amplitude * (a2 + a2.conj().T)
    L = -1j * _left(H, eye) + 1j * _right(H, eye)
    terms = ["von_neumann"]

    if regime == "weak":
        if relaxation_rates is None:
            relaxation_rates = (rates.gamma_plus_1 + rates.gamma_minus_1, rates.gamma_plus_2 + rates.gamma_minus_2)
        for G, a in zip(relaxation_rates, ops):
            if G:
                L = L + 0.5 * G * _dissipator(a, a)
        terms.append("local_damping")
    else:
        for gp, gm, a in zip(rates.plus, rates.minus, ops):
            if gp + gm:
                L = L + 0.5 * (gp + gm) * _dissipator(a, a)
        terms.append("local_damping")
        cross_weights = [gp - gm for gp, gm in zip(rates.plus, rates.minus)]
        if any(cross_weights):
            for l, w in enumerate(cross_weights):
                if not w:
                    continue
                al, am = ops[l], ops[1 - l]
                ald, amd = al.conj().T, am.conj().T
                # a_m rho a_l^dag - a_l^dag a_m rho + a_l rho a_m^dag - rho a_m^dag a_l
                block = (_sandwich(am, ald) - _left(ald @ am, eye)
                         + _sandwich(al, amd) - _right(amd @ al, eye))
                L = L + 0.5 * w * block
            terms.append("cross_decay")

    if drive_corrections and drive_amplitude != 0.0:
        ks = drive_correction_weights(Omega, coupling, drive_amplitude, rates, regime, relaxation_rates)
        for k, a in zip(ks, ops):
            if k:
                X = a - a.conj().T
                L = L + k * (_right(X, eye) - _left(X, eye))
        terms.append("drive_corrections")

    meta = {
        "regime": regime,
        "terms": terms,
        "Omega": Omega,
        "coupling": coupling,
        "drive_amplitude": drive_amplitude,
        "truncation": [n1, n2],
    }
    return LiouvillianMatrix(matrix=L.tocsr(), dim1=n1, dim2=n2, metadata=meta)


def build_liouvillian(config: SystemConfig, truncation, rates: DampingRates | None = None,
                      regime: str | None = None, drive_corrections: bool | None = None,
                      max_amplitude: float | None = None) -> LiouvillianMatrix:
    """Generator for ``config``; ``max_amplitude`` activates the truncation guard."""
    if max_amplitude is not None:
        check_truncation(max_amplitude, truncation)
    rates = rates if rates is not None else evaluate_rates(config)
    regime = regime or config.resolved_regime
    return liouvillian_from_parameters(
        config.Omega, config.coupling, rates, truncation,
        drive_amplitude=config.drive_amplitude, regime=regime,
        relaxation_rates=(config.gamma1, config.gamma2),
        drive_corrections=drive_corrections,
    )


def coherent_vector(beta: complex, n: int) -> np.ndarray:
    """Truncated Fock amplitudes e^{-|b|^2/2} b^k / sqrt(k!)."""
    v = np.empty(n, dtype=complex)
    v[0] = np.exp(-0.5 * abs(beta) ** 2)
    for k in range(1, n):
        v[k] = v[k - 1] * beta / math.sqrt(k)
    return v


def _dyads_to_fock(coeffs, labels1, labels2, truncation, t=0.0) -> FockDensityMatrix:
    n1, n2 = truncation
    kets = [np.kron(coherent_vector(x, n1), coherent_vector(y, n2)) for x, y in zip(labels1, labels2)]
    rho = np.zeros((n1 * n2, n1 * n2), dtype=complex)
    for m, km in enumerate(kets):
        for n, kn in enumerate(kets):
            rho += coeffs[m, n] * np.outer(km, kn.conj())
    return FockDensityMatrix(n1, n2, rho, t)


def coherent_superposition_to_fock(init: InitialSuperposition, truncation) -> FockDensityMatrix:
    check_truncation(init.max_amplitude, truncation)
    b = init.betas
    return _dyads_to_fock(init.norm_squared * init.signs, b[:, 0], b[:, 1], truncation)


def snapshot_to_fock(snapshot: JointStateSnapshot, truncation) -> FockDensityMatrix:
    """Fock matrix of a single-time snapshot."""
    if np.ndim(snapshot.t) != 0:
        raise ValueError("snapshot_to_fock needs a single-time snapshot; use snapshot.at(i)")
    amp = max(np.max(np.abs(snapshot.sigma)), np.max(np.abs(snapshot.zeta)), snapshot.init.max_amplitude)
    check_truncation(amp, truncation)
    return _dyads_to_fock(snapshot.coeffs, snapshot.sigma, snapshot.zeta, truncation, float(snapshot.t))


def default_step(L: LiouvillianMatrix) -> float:
    """0.01 / lambda, shortened when the frame frequency Omega dominates lambda."""
    lam = abs(L.metadata.get("coupling", 0.0))
    fast = abs(L.metadata.get("Omega", 0.0)) + lam
    steps = [DEFAULT_STEP / lam] if lam > 0 else []
    if fast > 0:
        steps.append(DEFAULT_FAST_STEP / fast)
    return min(steps) if steps else DEFAULT_STEP


def check_step(L: LiouvillianMatrix, dt: float) -> None:
    lam = abs(L.metadata.get("coupling", 0.0))
    fast = abs(L.metadata.get("Omega", 0.0)) + lam
    if lam * dt > MAX_STEP:
        raise StepSizeError(f"lambda*dt = {lam * dt:.3g} exceeds {MAX_STEP}")
    if fast * dt > MAX_FAST_STEP:
        raise StepSizeError(f"(|Omega|+lambda)*dt = {fast * dt:.3g} exceeds {MAX_FAST_STEP}")


def integrate(L: LiouvillianMatrix, rho0: FockDensityMatrix, t_grid, dt: float | None = None):
    """Fixed-step RK4 from t=0; returns one FockDensityMatrix per grid time.

    ``dt`` defaults to 0.01 / lambda (see ``default_step``); each grid interval is split into equal
    steps no longer than ``dt``. The state is re-symmetrised after every step.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] < 0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be a non-empty, non-decreasing grid of times >= 0")
    if dt is None:
        dt = default_step(L)
    check_step(L, dt)
    d = L.dim1 * L.dim2
    M = L.matrix
    v = np.array(rho0.data, dtype=complex).reshape(-1)
    out = []
    t_now = 0.0
    for t_target in t_grid:
        span = t_target - t_now
        steps = int(math.ceil(span / dt - 1e-12)) if span > 0 else 0
        if steps:
            h = span / steps
            for _ in range(steps):
                k1 = M @ v
                k2 = M @ (v + 0.5 * h * k1)
                k3 = M @ (v + 0.5 * h * k2)
                k4 = M @ (v + h * k3)
                v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                r = v.reshape(d, d)
                v = (0.5 * (r + r.conj().T)).reshape(-1)
        t_now = float(t_target)
        out.append(FockDensityMatrix(L.dim1, L.dim2, v.reshape(d, d).copy(), t_now))
    return out


def _psd_sqrt(rho):
    w, V = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2."""
    s = _psd_sqrt(a)
    w = np.linalg.eigvalsh(s @ b @ s)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)


def dyad_coefficients(rho: FockDensityMatrix, labels1, labels2) -> np.ndarray:
    """Hilbert-Schmidt projection of rho onto span{|x_m, y_m><x_n, y_n|}.

    Returns c_mn such that sum c_mn |m><n| is the closest operator in that span.
    """
    kets = np.stack([np.kron(coherent_vector(x, rho.dim1), coherent_vector(y, rho.dim2))
                     for x, y in zip(labels1, labels2)], axis=1)
    S = kets.conj().T @ kets                       # S[k, m] = <k|m>
    R = kets.conj().T @ rho.data @ kets            # R[k, l] = <k|rho|l>
    Sinv = np.linalg.inv(S)
    return Sinv @ R @ Sinv.conj().T


def compare(oracle_rho: FockDensityMatrix, snapshot: JointStateSnapshot):
    """(trace distance, fidelity, |c_I,II oracle| / |C_I,II closed form|)."""
    closed = snapshot_to_fock(snapshot, (oracle_rho.dim1, oracle_rho.dim2))
    td = trace_distance(oracle_rho.data, closed.data)
    fid = fidelity(oracle_rho.data, closed.data)
    c = dyad_coefficients(oracle_rho, snapshot.sigma, snapshot.zeta)
    ref = abs(snapshot.coeffs[0, 1])
    ratio = abs(c[0, 1]) / ref if ref > 0 else float("nan")
    return td, fid, ratio


# ---------------------------------------------------------------- binary dumps

_MAGIC = b"OSCRHO01"
_HEADER = struct.Struct("<8s1s7xqqd")


def dump_states(path, states) -> None:
    """Write snapshots as header (magic, endianness tag, dims, t) + little-endian complex128, row-major."""
    with open(path, "wb") as fh:
        for s in states:
            fh.write(_HEADER.pack(_MAGIC, b"<", s.dim1, s.dim2, float(s.t)))
            fh.write(np.ascontiguousarray(s.data, dtype="<c16").tobytes(order="C"))


def load_states(path) -> list[FockDensityMatrix]:
    out = []
    with open(path, "rb") as fh:
        while True:
            head = fh.read(_HEADER.size)
            if not head:
                break
            magic, endian, n1, n2, t = _HEADER.unpack(head)
            if magic != _MAGIC or endian != b"<":
                raise ValueError("not an oscnet state dump")
            d = n1 * n2
            raw = fh.read(16 * d * d)
            data = np.frombuffer(raw, dtype="<c16").reshape(d, d).astype(complex)
            out.append(FockDensityMatrix(n1, n2, data, t))
    return out
