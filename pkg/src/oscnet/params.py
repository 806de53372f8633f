"""Physical configuration, reservoir damping rates and closed-form coefficients.

All frequencies and rates are plain floats in a common unit; configs and the
built-in scenarios use units of the bare frequency of oscillator 1 (omega10 = 1).
Time is the conjugate unit (1/omega10).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

from .errors import ConfigError, DegenerateDrive

#: Relative tolerance on |Omega^2 - lambda^2| below which a driven system is degenerate.
DEGENERACY_TOL = 1e-9
#: Relative tolerance for the drive/frequency constraint F = (w10 - w20)(1 + l^2/(4 w10 w20)).
DRIVE_CONSTRAINT_RTOL = 1e-6
#: lambda must be at least this multiple of the largest damping scale.
COUPLING_GUARD = 10.0
#: lambda / omega_l0 below which the weak-coupling regime is inferred.
WEAK_COUPLING_RATIO = 0.1


@dataclass(frozen=True)
class MarkovianWhite:
    """Flat reservoir spectral density."""

    name = "markovian"


@dataclass(frozen=True)
class Lorentzian:
    """Spectral density suppressed at both normal-mode frequencies."""

    eps_plus: float
    eps_minus: float
    name = "lorentzian"

    def __post_init__(self):
        _check_eps("eps_plus", self.eps_plus)
        _check_eps("eps_minus", self.eps_minus)


@dataclass(frozen=True)
class WideLorentzian:
    """Spectral density suppressed only at the lower normal mode."""

    eps_minus: float
    name = "wide_lorentzian"

    def __post_init__(self):
        _check_eps("eps_minus", self.eps_minus)


SpectralModel = Union[MarkovianWhite, Lorentzian, WideLorentzian]


def _check_eps(label, value):
    if not (0.0 < value <= 1.0):
        raise ConfigError(f"{label} must lie in (0, 1], got {value!r}")


def spectral_model_from_dict(entry: dict) -> SpectralModel:
    """Build a spectral model from ``{"model": ..., "eps_plus": ..., "eps_minus": ...}``."""
    kind = str(entry.get("model", "markovian")).lower().replace("-", "_")
    if kind in ("markovian", "markovian_white", "white"):
        return MarkovianWhite()
    if kind == "lorentzian":
        try:
            return Lorentzian(float(entry["eps_plus"]), float(entry["eps_minus"]))
        except KeyError as exc:
            raise ConfigError(f"lorentzian model needs {exc.args[0]}") from None
    if kind in ("wide_lorentzian", "widelorentzian"):
        try:
            return WideLorentzian(float(entry["eps_minus"]))
        except KeyError:
            raise ConfigError("wide_lorentzian model needs eps_minus") from None
    raise ConfigError(f"unknown spectral model {kind!r}")


def spectral_model_to_dict(model: SpectralModel) -> dict:
    out = {"model": model.name}
    if isinstance(model, Lorentzian):
        out["eps_plus"] = model.eps_plus
    if isinstance(model, (Lorentzian, WideLorentzian)):
        out["eps_minus"] = model.eps_minus
    return out


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters of the driven, coupled, damped oscillator pair.

    ``drive_frequency=None`` selects the resonance omega = omega20 when the drive
    is on and the lab frame (omega = 0) when it is off. ``regime=None`` infers
    weak coupling when lambda < 0.1 * min(omega10, omega20).

    ``enforce_coupling_guard`` rejects lambda < 10 * max(gamma1, gamma2). The
    closed form is built on lambda >> damping; figure scenarios that use smaller
    illustrative ratios switch the guard off explicitly.
    """

    omega10: float
    omega20: float
    coupling: float
    drive_amplitude: float = 0.0
    drive_frequency: float | None = None
    gamma1: float = 0.0
    gamma2: float = 0.0
    spectral1: SpectralModel = field(default_factory=MarkovianWhite)
    spectral2: SpectralModel = field(default_factory=MarkovianWhite)
    regime: str | None = None
    gamma_at_drive1: float | None = None
    gamma_at_drive2: float | None = None
    enforce_coupling_guard: bool = True

    def __post_init__(self):
        if not (self.omega10 > 0 and self.omega20 > 0):
            raise ConfigError("omega10 and omega20 must be positive", key="omega10")
        if self.coupling < 0:
            raise ConfigError("coupling lambda must be non-negative", key="lambda")
        if self.drive_amplitude < 0:
            raise ConfigError("drive amplitude F must be non-negative", key="F")
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ConfigError("damping scales gamma1, gamma2 must be non-negative", key="gamma1")
        if self.regime not in (None, "weak", "strong"):
            raise ConfigError(f"regime must be 'weak' or 'strong', got {self.regime!r}", key="regime")
        if self.enforce_coupling_guard and self.coupling < COUPLING_GUARD * max(self.gamma1, self.gamma2):
            raise ConfigError(
                f"coupling lambda={self.coupling} must be >= {COUPLING_GUARD:g} x max damping "
                f"({max(self.gamma1, self.gamma2)}); set enforce_coupling_guard=false to override",
                key="lambda",
            )
        if self.drive_amplitude != 0.0:
            required = self.required_drive_amplitude
            if abs(self.drive_amplitude - required) > DRIVE_CONSTRAINT_RTOL * max(required, self.omega10):
                raise ConfigError(
                    f"drive amplitude F={self.drive_amplitude!r} violates the equal-frequency "
                    f"constraint; required F={required!r} for these omega10, omega20, lambda",
                    key="F",
                )
        elif self.omega10 != self.omega20:
            warnings.warn(
                "undriven oscillators with omega10 != omega20: the shifted frequencies differ "
                "and the common-frequency model is only approximate; using omega1",
                stacklevel=3,
            )

    @staticmethod
    def drive_amplitude_for(omega10: float, omega20: float, coupling: float) -> float:
        """Drive amplitude that makes the two shifted frequencies coincide."""
        return (omega10 - omega20) * (1.0 + coupling**2 / (4.0 * omega10 * omega20))

    @property
    def required_drive_amplitude(self) -> float:
        return self.drive_amplitude_for(self.omega10, self.omega20, self.coupling)

    @property
    def omega_drive(self) -> float:
        if self.drive_frequency is not None:
            return self.drive_frequency
        return self.omega20 if self.drive_amplitude != 0.0 else 0.0

    @property
    def resolved_regime(self) -> str:
        if self.regime is not None:
            return self.regime
        weak = self.coupling < WEAK_COUPLING_RATIO * min(self.omega10, self.omega20)
        return "weak" if weak else "strong"

    @property
    def shifted_frequency(self) -> float:
        """Lab-frame oscillator frequency omega_l after the coupling/drive shift."""
        return self.omega10 * (1.0 + self.coupling**2 / (4.0 * self.omega10 * self.omega20))

    @property
    def Omega(self) -> float:
        """Common frequency in the frame rotating at the drive frequency."""
        return self.shifted_frequency - self.omega_drive

    def to_dict(self) -> dict:
        out = {
            "omega10": self.omega10,
            "omega20": self.omega20,
            "lambda": self.coupling,
            "F": self.drive_amplitude,
            "omega_drive": self.omega_drive,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "spectral1": spectral_model_to_dict(self.spectral1),
            "spectral2": spectral_model_to_dict(self.spectral2),
            "regime": self.resolved_regime,
            "enforce_coupling_guard": self.enforce_coupling_guard,
        }
        if self.gamma_at_drive1 is not None:
            out["gamma_at_drive1"] = self.gamma_at_drive1
        if self.gamma_at_drive2 is not None:
            out["gamma_at_drive2"] = self.gamma_at_drive2
        return out


@dataclass(frozen=True)
class DampingRates:
    """Damping rates at the two normal-mode frequencies, per reservoir."""

    gamma_plus_1: float
    gamma_minus_1: float
    gamma_plus_2: float
    gamma_minus_2: float
    gamma_at_drive_1: float = 0.0
    gamma_at_drive_2: float = 0.0

    def __post_init__(self):
        for name in ("gamma_plus_1", "gamma_minus_1", "gamma_plus_2", "gamma_minus_2",
                     "gamma_at_drive_1", "gamma_at_drive_2"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")

    @classmethod
    def identical(cls, gamma_plus: float, gamma_minus: float) -> "DampingRates":
        return cls(gamma_plus, gamma_minus, gamma_plus, gamma_minus)

    @property
    def plus(self) -> tuple[float, float]:
        return (self.gamma_plus_1, self.gamma_plus_2)

    @property
    def minus(self) -> tuple[float, float]:
        return (self.gamma_minus_1, self.gamma_minus_2)

    @property
    def sum_plus(self) -> float:
        return self.gamma_plus_1 + self.gamma_plus_2

    @property
    def sum_minus(self) -> float:
        return self.gamma_minus_1 + self.gamma_minus_2

    @property
    def cross_decay(self) -> float:
        """Sum over reservoirs of gamma+ - gamma-; zero means no cross-decay channel."""
        return self.sum_plus - self.sum_minus

    def is_zero(self) -> bool:
        return self.sum_plus == 0.0 and self.sum_minus == 0.0


@dataclass(frozen=True)
class DerivedCoefficients:
    """Every constant entering the closed-form T=0 solution.

    Tuples are indexed by oscillator (0 -> oscillator 1, 1 -> oscillator 2).
    """

    Omega: float
    coupling: float
    drive_amplitude: float
    omega_plus: float
    omega_minus: float
    Lambda: complex
    Delta: float
    Phi: float
    Theta: float
    E_plus: tuple[complex, complex]
    E_minus: tuple[complex, complex]
    B: tuple[complex, complex]
    G: tuple[complex, complex]
    Pi: tuple[float, float]
    rates: DampingRates

    def drift_matrix(self):
        """Matrix E with d(alpha)/dt = B + E alpha along the backward characteristics."""
        import numpy as np

        return np.array([[self.E_plus[0], self.E_minus[0]], [self.E_minus[1], self.E_plus[1]]])

    def to_dict(self) -> dict:
        def c(z):
            return [float(z.real), float(z.imag)]

        return {
            "Omega": self.Omega,
            "lambda": self.coupling,
            "F": self.drive_amplitude,
            "omega_plus": self.omega_plus,
            "omega_minus": self.omega_minus,
            "Lambda": c(self.Lambda),
            "Delta": self.Delta,
            "Phi": self.Phi,
            "Theta": self.Theta,
            "E_plus": [c(z) for z in self.E_plus],
            "E_minus": [c(z) for z in self.E_minus],
            "B": [c(z) for z in self.B],
            "G": [c(z) for z in self.G],
            "Pi": list(self.Pi),
            "rates": {
                "gamma_plus": list(self.rates.plus),
                "gamma_minus": list(self.rates.minus),
                "gamma_at_drive": [self.rates.gamma_at_drive_1, self.rates.gamma_at_drive_2],
            },
        }


def normal_mode_frequencies(config: SystemConfig) -> tuple[float, float]:
    """Lab-frame normal-mode frequencies (omega_l + lambda, omega_l - lambda)."""
    w = config.shifted_frequency
    return (w + config.coupling, w - config.coupling)


def _rates_for(model: SpectralModel, gamma: float, driven: bool, regime: str) -> tuple[float, float]:
    if regime == "weak":
        # both normal modes sit near omega_l0, at the spectral maximum
        return gamma / 2.0, gamma / 2.0
    if isinstance(model, MarkovianWhite):
        # lower mode at zero frequency when undriven: half-range delta integral
        return gamma / 2.0, (gamma / 2.0 if driven else gamma / 4.0)
    if isinstance(model, Lorentzian):
        return model.eps_plus * gamma / 2.0, model.eps_minus * gamma / 2.0
    if isinstance(model, WideLorentzian):
        return gamma / 2.0, model.eps_minus * gamma / 2.0
    raise ConfigError(f"unsupported spectral model {model!r}")


def evaluate_rates(config: SystemConfig) -> DampingRates:
    """Evaluate the spectral models into the four normal-mode damping rates."""
    driven = config.drive_amplitude != 0.0
    regime = config.resolved_regime
    gp1, gm1 = _rates_for(config.spectral1, config.gamma1, driven, regime)
    gp2, gm2 = _rates_for(config.spectral2, config.gamma2, driven, regime)
    gd1 = config.gamma1 / 2.0 if config.gamma_at_drive1 is None else config.gamma_at_drive1
    gd2 = config.gamma2 / 2.0 if config.gamma_at_drive2 is None else config.gamma_at_drive2
    return DampingRates(gp1, gm1, gp2, gm2, gd1, gd2)


def frame_coefficients(
    Omega: float,
    coupling: float,
    rates: DampingRates,
    drive_amplitude: float = 0.0,
    omega_plus: float | None = None,
    omega_minus: float | None = None,
) -> DerivedCoefficients:
    """Closed-form coefficients directly from rotating-frame quantities.

    Raises DegenerateDrive when the drive is on and Omega^2 == lambda^2.
    """
    lam = float(coupling)
    F = float(drive_amplitude)
    Om = float(Omega)
    gp1, gp2 = rates.plus
    gm1, gm2 = rates.minus

    E_plus = (0.5 * (gp1 + gm1 + 2j * Om), 0.5 * (gp2 + gm2 + 2j * Om))
    E_minus = (0.5 * (gp1 - gm1 + 2j * lam), 0.5 * (gp2 - gm2 + 2j * lam))
    Pi = (0.5 * (gm1 + gp1), 0.5 * (gm2 + gp2))

    if F != 0.0:
        gap = Om * Om - lam * lam
        if abs(gap) <= DEGENERACY_TOL * max(Om * Om, lam * lam):
            raise DegenerateDrive(
                f"driven system with Omega={Om} == lambda={lam}: closed form not available"
            )
        pref = F / (2.0 * gap)
        gd = (rates.gamma_at_drive_1, rates.gamma_at_drive_2)
        B = []
        for idx in (0, 1):
            d1, d2 = (1.0, 0.0) if idx == 0 else (0.0, 1.0)
            corr = (Om * d2 - lam * d1) * (2.0 * gd[idx] - rates.minus[idx] - rates.plus[idx]) + (
                Om * d1 - lam * d2
            ) * (rates.minus[idx] - rates.plus[idx])
            B.append(1j * F * d2 - pref * corr)
        B = (complex(B[0]), complex(B[1]))
        det = E_plus[0] * E_plus[1] - E_minus[0] * E_minus[1]
        G = (
            (B[1] * E_minus[0] - B[0] * E_plus[1]) / det,
            (B[0] * E_minus[1] - B[1] * E_plus[0]) / det,
        )
    else:
        B = (0j, 0j)
        G = (0j, 0j)

    return DerivedCoefficients(
        Omega=Om,
        coupling=lam,
        drive_amplitude=F,
        omega_plus=Om + lam if omega_plus is None else omega_plus,
        omega_minus=Om - lam if omega_minus is None else omega_minus,
        Lambda=(gp1 + gp2 + gm1 + gm2) / 4.0 + 1j * Om,
        Delta=(gp1 - gp2 + gm1 - gm2) / 4.0,
        Phi=(gp1 + gp2 - gm1 - gm2) / 4.0,
        Theta=(gp1 - gp2 - gm1 + gm2) / 4.0,
        E_plus=E_plus,
        E_minus=E_minus,
        B=B,
        G=G,
        Pi=Pi,
        rates=rates,
    )


def derive_coefficients(config: SystemConfig, rates: DampingRates | None = None) -> DerivedCoefficients:
    """Closed-form coefficients for ``config`` (rates evaluated if not given)."""
    if rates is None:
        rates = evaluate_rates(config)
    wp, wm = normal_mode_frequencies(config)
    return frame_coefficients(config.Omega, config.coupling, rates, config.drive_amplitude, wp, wm)


# ---------------------------------------------------------------------------
# config files

try:  # pragma: no cover - version dependent
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover
    import tomli as _toml

_SYSTEM_KEYS = {
    "omega10", "omega20", "lambda", "F", "omega_drive", "gamma1", "gamma2",
    "spectral1", "spectral2", "regime", "gamma_at_drive1", "gamma_at_drive2",
    "enforce_coupling_guard",
}


def _line_of(text: str, key: str) -> int | None:
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(key) and stripped[len(key):].lstrip().startswith("="):
            return lineno
    return None


def config_from_mapping(data: dict, *, source: str = "<config>", text: str = "") -> SystemConfig:
    """Build a SystemConfig from a parsed key-value mapping (config-file keys)."""
    unknown = set(data) - _SYSTEM_KEYS
    if unknown:
        key = sorted(unknown)[0]
        line = _line_of(text, key)
        where = f"{source}:{line}" if line else source
        raise ConfigError(f"{where}: unknown key {key!r}")
    current = None
    try:
        kwargs = {}
        auto_drive = data.get("F") == "auto"
        for cfg_key, attr in (
            ("omega10", "omega10"), ("omega20", "omega20"), ("lambda", "coupling"),
            ("F", "drive_amplitude"), ("omega_drive", "drive_frequency"),
            ("gamma1", "gamma1"), ("gamma2", "gamma2"),
            ("gamma_at_drive1", "gamma_at_drive1"), ("gamma_at_drive2", "gamma_at_drive2"),
        ):
            if cfg_key in data and not (cfg_key == "F" and auto_drive):
                current = cfg_key
                kwargs[attr] = float(data[cfg_key])
        for key in ("spectral1", "spectral2"):
            if key in data:
                current = key
                kwargs[key] = spectral_model_from_dict(dict(data[key]))
        if "regime" in data:
            current = "regime"
            kwargs["regime"] = str(data["regime"])
        if "enforce_coupling_guard" in data:
            current = "enforce_coupling_guard"
            kwargs["enforce_coupling_guard"] = bool(data["enforce_coupling_guard"])
        for required in ("omega10", "omega20", "coupling"):
            if required not in kwargs:
                raise ConfigError(f"missing required key {'lambda' if required == 'coupling' else required!r}")
        current = None
        if auto_drive:
            current = "F"
            kwargs["drive_amplitude"] = SystemConfig.drive_amplitude_for(
                kwargs["omega10"], kwargs["omega20"], kwargs["coupling"])
        return SystemConfig(**kwargs)
    except (ConfigError, TypeError, ValueError) as exc:
        key = current or getattr(exc, "key", None)
        line = _line_of(text, key) if key else None
        where = f"{source}:{line}" if line else source
        raise ConfigError(f"{where}: {exc}", key=key) from None


def load_config(path) -> SystemConfig:
    """Read a TOML config file into a SystemConfig."""
    with open(path, "rb") as fh:
        raw = fh.read()
    text = raw.decode("utf-8")
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping(data, source=str(path), text=text)
