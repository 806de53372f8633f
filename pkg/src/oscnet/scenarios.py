"""Scenario definitions, built-in figure scenarios and the sweep/validation runners.

All frequencies and rates are in units of omega10; time grids are specified as
a maximum of lambda * t and a sample count.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import observables as obs
from .dynamics import InitialSuperposition, evolve_joint_state
from .errors import ConfigError, NoDissipation
from .oracle import (
    build_liouvillian,
    coherent_superposition_to_fock,
    compare,
    integrate,
    minimum_truncation,
)
from .params import (
    MarkovianWhite,
    SystemConfig,
    _line_of,
    config_from_mapping,
    derive_coefficients,
    evaluate_rates,
)

try:  # pragma: no cover - version dependent
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover
    import tomli as _toml

STATE_OBSERVABLES = {
    "recurrence", "swap",
    "find_cat_mode1", "find_coherent_mode1", "find_cat_mode2", "find_coherent_mode2",
    "entropy_joint", "entropy_mode1", "entropy_mode2", "excess_entropy",
    "closed_coherence_joint", "closed_coherence_mode1", "closed_coherence_mode2",
}
RATE_OBSERVABLES = {
    "coherence_joint", "coherence_mode1", "coherence_mode2", "coherence_isolated1", "coherence_isolated2",
}
OBSERVABLES = STATE_OBSERVABLES | RATE_OBSERVABLES

TRACE_DISTANCE_LIMIT = 1e-3
COHERENCE_DEVIATION_LIMIT = 1e-3


@dataclass(frozen=True)
class InitialStateSpec:
    kind: str = "product_cat"
    alpha: complex = 1.0
    eta: complex = 1.0
    sign: int = 1

    def build(self) -> InitialSuperposition:
        if self.kind == "product_cat":
            return InitialSuperposition.product_cat(self.alpha, self.eta, self.sign)
        if self.kind == "eigen_minus":
            return InitialSuperposition.eigen_minus(self.alpha, self.sign)
        if self.kind == "eigen_plus":
            return InitialSuperposition.eigen_plus(self.alpha, self.sign)
        raise ConfigError(f"unknown initial state kind {self.kind!r}", key="kind")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": _num(self.alpha), "eta": _num(self.eta), "sign": self.sign}


@dataclass(frozen=True)
class OracleOptions:
    enabled: bool = False
    truncation: int | None = None
    dt: float | None = None
    t_max: float = 4.0 * math.pi     # lambda * t
    points: int = 8


@dataclass(frozen=True)
class Scenario:
    name: str
    config: SystemConfig
    initial_state: InitialStateSpec = field(default_factory=InitialStateSpec)
    observables: tuple[str, ...] = ("recurrence", "swap")
    t_max: float = 4.0 * math.pi     # lambda * t
    samples: int = 1001
    oracle: OracleOptions = field(default_factory=OracleOptions)
    figure: str | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples < 2:
            raise ConfigError("sample count must be at least 2", key="samples")
        if not self.t_max > 0:
            raise ConfigError("t_max must be positive", key="t_max")
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad:
            raise ConfigError(f"unknown observable {bad[0]!r}", key="observables")

    def times(self) -> np.ndarray:
        lam = self.config.coupling
        return np.linspace(0.0, self.t_max / lam, self.samples)


def _num(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


# ---------------------------------------------------------------- built-ins

def _cfg(**kw) -> SystemConfig:
    kw.setdefault("omega10", 1.0)
    kw.setdefault("omega20", 1.0)
    return SystemConfig(**kw)


def _fig4f_config() -> SystemConfig:
    w10, w20, lam = 1.0, 0.5, 2e-2
    F = SystemConfig.drive_amplitude_for(w10, w20, lam)
    return _cfg(omega20=w20, coupling=lam, drive_amplitude=F, drive_frequency=1e-2, regime="weak")


PR_PS = ("recurrence", "swap")
FIG5_SERIES = ("coherence_joint", "coherence_mode1", "coherence_mode2", "coherence_isolated1")
ENTROPIES = ("entropy_joint", "entropy_mode1", "entropy_mode2", "excess_entropy")
# weak coupling: lambda t = pi spans ~1/lambda periods of Omega, so RK4 needs a finer step
WEAK_ORACLE = OracleOptions(dt=1e-2, t_max=math.pi)


def builtin_scenarios() -> dict[str, Scenario]:
    pi = math.pi
    markov = MarkovianWhite()
    out = [
        Scenario("fig4a", _cfg(coupling=2e-2), observables=PR_PS, t_max=4 * pi, samples=4001, oracle=WEAK_ORACLE,
                 figure="Fig. 4(a)", notes={"description": "weak coupling, no damping, no drive"}),
        Scenario("fig4b", _cfg(coupling=1.0, regime="strong"), observables=PR_PS, t_max=20 * pi, samples=8001,
                 figure="Fig. 4(b)", notes={"description": "intermediate coupling, no damping, no drive"}),
        Scenario("fig4c", _cfg(coupling=2.0), observables=PR_PS, t_max=4 * pi, samples=2001,
                 figure="Fig. 4(c)", notes={"description": "strong coupling with Omega/lambda = 1"}),
        Scenario("fig4d", _cfg(coupling=2e-2, gamma1=2e-3, gamma2=2e-3, regime="weak"),
                 observables=PR_PS, t_max=20.0, samples=8001, oracle=WEAK_ORACLE,
                 figure="Fig. 4(d)", notes={"description": "weak coupling with damping gamma = Gamma/2"}),
        Scenario("fig4e", _cfg(coupling=2.0, gamma1=2e-3, gamma2=2e-3, spectral1=markov, spectral2=markov,
                               regime="strong"),
                 observables=PR_PS, t_max=1000.0, samples=20001,
                 figure="Fig. 4(e)", notes={"description": "strong coupling, Markovian white noise"}),
        Scenario("fig4f", _fig4f_config(), observables=PR_PS, t_max=4 * pi, samples=40001,
                 oracle=OracleOptions(dt=1e-2, t_max=pi / 8, points=3),
                 figure="Fig. 4(f)", notes={"description": "weak coupling with drive, omega/omega10 = 1e-2"}),
        Scenario("fig5", _cfg(coupling=2.0, gamma1=0.4, gamma2=0.4, regime="strong", enforce_coupling_guard=False),
                 observables=FIG5_SERIES, t_max=25.0, samples=2001,
                 oracle=OracleOptions(truncation=16),
                 figure="Fig. 5", notes={"description": "identical oscillators, Markovian, lambda/Gamma = 5"}),
        Scenario("fig6", _cfg(coupling=5e-2, gamma1=1e-2, gamma2=1e-4, regime="weak", enforce_coupling_guard=False),
                 observables=FIG5_SERIES + ("coherence_isolated2",), t_max=25.0, samples=1000, oracle=WEAK_ORACLE,
                 figure="Fig. 6", notes={"description": "Gamma1/Gamma2 = 100, lambda/Gamma1 = 5, weak coupling"}),
        Scenario("fig7a", _cfg(coupling=2.0, gamma1=0.1, gamma2=0.1, regime="strong"),
                 observables=("find_cat_mode1", "find_coherent_mode1"), t_max=40.0, samples=4001,
                 figure="Fig. 7(a)", notes={"description": "state-finding probabilities in oscillator 1"}),
        Scenario("fig7b", _cfg(coupling=2.0, gamma1=0.1, gamma2=0.1, regime="strong"),
                 observables=("find_coherent_mode2", "find_cat_mode2"), t_max=40.0, samples=4001,
                 figure="Fig. 7(b)", notes={"description": "state-finding probabilities in oscillator 2"}),
        Scenario("fig8a", _cfg(coupling=2.0, gamma1=0.1, gamma2=0.1, regime="strong"),
                 observables=ENTROPIES, t_max=12.0, samples=2001,
                 figure="Fig. 8(a)", notes={"description": "linear entropies up to about tau_C, lambda/Gamma = 20"}),
        Scenario("fig8b", _cfg(coupling=2.0, gamma1=1.0, gamma2=1.0, regime="strong", enforce_coupling_guard=False),
                 observables=ENTROPIES, t_max=40.0, samples=2001,
                 figure="Fig. 8(b)", notes={"description": "relaxation of the network, lambda/Gamma = 2"}),
    ]
    return {s.name: s for s in out}


# ---------------------------------------------------------------- scenario files

_SCENARIO_KEYS = {"name", "figure", "system", "initial_state", "observables", "grid", "oracle"}


def _where(source, text, key):
    line = _line_of(text, key) if key else None
    return f"{source}:{line}" if line else source


def scenario_from_mapping(data: dict, *, source: str = "<scenario>", text: str = "") -> Scenario:
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{_where(source, text, key)}: unknown key {key!r}", key=key)
    if "system" not in data:
        raise ConfigError(f"{source}: missing [system] table", key="system")
    config = config_from_mapping(dict(data["system"]), source=source, text=text)
    key = None
    try:
        st = dict(data.get("initial_state", {}))
        for key in st:
            if key not in ("kind", "alpha", "eta", "sign"):
                raise ConfigError(f"unknown key {key!r}", key=key)
        key = None
        init = InitialStateSpec(
            kind=str(st.get("kind", "product_cat")),
            alpha=_complex(st.get("alpha", 1.0)),
            eta=_complex(st.get("eta", 1.0)),
            sign=int(st.get("sign", 1)),
        )
        init.build()
        grid = dict(data.get("grid", {}))
        for key in grid:
            if key not in ("t_max", "samples"):
                raise ConfigError(f"unknown key {key!r}", key=key)
        key = None
        orc = dict(data.get("oracle", {}))
        for key in orc:
            if key not in ("enabled", "truncation", "dt", "t_max", "points"):
                raise ConfigError(f"unknown key {key!r}", key=key)
        key = None
        oracle = OracleOptions(
            enabled=bool(orc.get("enabled", False)),
            truncation=None if "truncation" not in orc else int(orc["truncation"]),
            dt=None if "dt" not in orc else float(orc["dt"]),
            t_max=float(orc.get("t_max", 4 * math.pi)),
            points=int(orc.get("points", 8)),
        )
        return Scenario(
            name=str(data.get("name", Path(source).stem)),
            config=config,
            initial_state=init,
            observables=tuple(data.get("observables", ("recurrence", "swap"))),
            t_max=float(grid.get("t_max", 4 * math.pi)),
            samples=int(grid.get("samples", 1001)),
            oracle=oracle,
            figure=data.get("figure"),
        )
    except (ConfigError, TypeError, ValueError) as exc:
        key = key or getattr(exc, "key", None)
        msg = str(exc)
        raise ConfigError(f"{_where(source, text, key)}: {msg}", key=key) from None


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError("complex amplitudes are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def load_scenario(path) -> Scenario:
    raw = Path(path).read_bytes()
    text = raw.decode("utf-8")
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return scenario_from_mapping(data, source=str(path), text=text)


def resolve_scenario(ref: str) -> Scenario:
    """Built-in name or path to a TOML scenario file."""
    builtins = builtin_scenarios()
    if ref in builtins:
        return builtins[ref]
    p = Path(ref)
    if p.exists():
        return load_scenario(p)
    raise ConfigError(f"unknown scenario {ref!r}: not a built-in name or an existing file")


def with_overrides(s: Scenario, *, alpha=None, eta=None, truncation=None, dt=None, oracle=None) -> Scenario:
    init = s.initial_state
    if alpha is not None:
        init = replace(init, alpha=complex(alpha), eta=complex(alpha if eta is None else eta))
    elif eta is not None:
        init = replace(init, eta=complex(eta))
    orc = s.oracle
    if truncation is not None:
        orc = replace(orc, truncation=int(truncation))
    if dt is not None:
        orc = replace(orc, dt=float(dt))
    if oracle is not None:
        orc = replace(orc, enabled=bool(oracle))
    return replace(s, initial_state=init, oracle=orc)


# ---------------------------------------------------------------- evaluation

def evaluate_observables(s: Scenario, times=None) -> dict[str, np.ndarray]:
    """Every requested observable on the scenario time grid."""
    t = s.times() if times is None else np.asarray(times, dtype=float)
    cfg = s.config
    rates = evaluate_rates(cfg)
    coeffs = derive_coefficients(cfg, rates)
    init = s.initial_state.build()
    alpha = s.initial_state.alpha
    out: dict[str, np.ndarray] = {}
    needs_state = any(o in STATE_OBSERVABLES for o in s.observables)
    snap = evolve_joint_state(init, coeffs, t) if needs_state else None
    entropies = None
    for name in s.observables:
        if name == "recurrence":
            v = obs.recurrence_probability(init, snap)
        elif name == "swap":
            v = obs.swap_probability(init, snap)
        elif name.startswith("find_"):
            _, what, mode = name.split("_")
            v = obs.find_state_probability(snap, f"{what}_in_mode", int(mode[-1]))
        elif name in ("entropy_joint", "entropy_mode1", "entropy_mode2", "excess_entropy"):
            if entropies is None:
                entropies = obs.linear_entropies(snap)
            v = entropies[("entropy_joint", "entropy_mode1", "entropy_mode2", "excess_entropy").index(name)]
        elif name == "closed_coherence_joint":
            v = obs.joint_coherence(snap)
        elif name.startswith("closed_coherence_mode"):
            v = obs.reduced_coherence(snap, int(name[-1]))
        elif name == "coherence_joint":
            v = obs.coherence_factor_joint(init_kind(s), rates, alpha, t)
        elif name.startswith("coherence_mode"):
            v = obs.coherence_factor_reduced(int(name[-1]), rates, cfg.coupling, alpha, t)
        elif name == "coherence_isolated1":
            v = obs.isolated_mode_factor(cfg.gamma1, alpha, t)
        elif name == "coherence_isolated2":
            v = obs.isolated_mode_factor(cfg.gamma2, alpha, t)
        else:  # pragma: no cover - guarded by Scenario validation
            raise ConfigError(f"unknown observable {name!r}")
        out[name] = np.asarray(v, dtype=float)
    return out


def init_kind(s: Scenario) -> str:
    return s.initial_state.kind


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, t: np.ndarray, lam: float, values: np.ndarray) -> None:
    lines = ["t,lambda_t,value"]
    lines += [f"{_fmt(a)},{_fmt(lam * a)},{_fmt(v)}" for a, v in zip(t, values)]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _report(s: Scenario, rates) -> dict | None:
    try:
        gamma = s.config.gamma1 if s.config.gamma1 > 0 else None
        kind = s.initial_state.kind
        return obs.decoherence_report(rates, s.initial_state.alpha, relaxation_rate=gamma, state_kind=kind).to_dict()
    except (NoDissipation, ValueError):
        return None


def scenario_manifest(s: Scenario) -> dict:
    cfg = s.config
    rates = evaluate_rates(cfg)
    coeffs = derive_coefficients(cfg, rates)
    params = cfg.to_dict()
    if cfg.drive_amplitude:
        G1, G2 = coeffs.G
        params["F_over_omega20"] = cfg.drive_amplitude / cfg.omega20
        params["omega_drive_over_omega10"] = cfg.omega_drive / cfg.omega10
        params["drive_offset_G1_minus_G2"] = _num(G1 - G2)
        params["F_over_Omega_minus_lambda"] = cfg.drive_amplitude / (cfg.Omega - cfg.coupling)
    return {
        "scenario": s.name,
        "figure": s.figure,
        "notes": s.notes,
        "version": __version__,
        "parameters": params,
        "initial_state": s.initial_state.to_dict(),
        "grid": {"lambda_t_max": s.t_max, "samples": s.samples},
        "coefficients": coeffs.to_dict(),
        "decoherence_report": _report(s, rates),
    }


def run_scenario(s: Scenario, out_dir) -> dict:
    """Write one CSV per observable plus manifest.json into ``out_dir/<name>``."""
    start = time.perf_counter()
    target = Path(out_dir) / s.name
    target.mkdir(parents=True, exist_ok=True)
    t = s.times()
    series = evaluate_observables(s, t)
    files = []
    for name, values in series.items():
        obs.TimeSeries(t, values, name)  # validates finiteness and ordering
        path = target / f"{name}.csv"
        write_csv(path, t, s.config.coupling, values)
        files.append(path.name)
    manifest = scenario_manifest(s)
    manifest["files"] = files
    if s.oracle.enabled:
        manifest["validation"] = validate(s)
    manifest["timing"] = {"wall_clock_seconds": time.perf_counter() - start}
    with open(target / "manifest.json", "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def validate(s: Scenario) -> dict:
    """Closed form versus Fock-space integration on the oracle grid."""
    cfg = s.config
    rates = evaluate_rates(cfg)
    coeffs = derive_coefficients(cfg, rates)
    init = s.initial_state.build()
    lam = cfg.coupling
    t_end = min(s.oracle.t_max, s.t_max) / lam
    t = np.linspace(0.0, t_end, max(s.oracle.points, 2))
    snap = evolve_joint_state(init, coeffs, t)
    # driven labels can swing beyond the initial amplitudes between grid points
    sweep = evolve_joint_state(init, coeffs, np.linspace(0.0, t_end, 1025))
    amp = max(init.max_amplitude, float(np.max(np.abs(sweep.sigma))), float(np.max(np.abs(sweep.zeta))))
    n = s.oracle.truncation or minimum_truncation(amp)
    trunc = (n, n)
    L = build_liouvillian(cfg, trunc, rates=rates, max_amplitude=amp)
    rho0 = coherent_superposition_to_fock(init, trunc)
    start = time.perf_counter()
    states = integrate(L, rho0, t, dt=s.oracle.dt)
    tds, devs = [], []
    for i, rho in enumerate(states):
        td, _, ratio = compare(rho, snap.at(i))
        tds.append(td)
        devs.append(abs(ratio - 1.0))
    max_td = float(max(tds))
    max_dev = float(max(devs))
    return {
        "truncation": n,
        "lambda_t": [float(x) for x in lam * t],
        "trace_distance": tds,
        "max_trace_distance": max_td,
        "max_coherence_deviation": max_dev,
        "thresholds": {"trace_distance": TRACE_DISTANCE_LIMIT, "coherence_deviation": COHERENCE_DEVIATION_LIMIT},
        "passed": bool(max_td <= TRACE_DISTANCE_LIMIT and max_dev <= COHERENCE_DEVIATION_LIMIT),
        "seconds": time.perf_counter() - start,
    }


__all__ = [
    "InitialStateSpec", "OracleOptions", "Scenario", "builtin_scenarios", "load_scenario", "resolve_scenario",
    "run_scenario", "validate", "evaluate_observables", "scenario_from_mapping", "with_overrides",
]
