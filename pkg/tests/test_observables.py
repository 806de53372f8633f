import math

import numpy as np
import pytest

from oscnet import DampingRates, Lorentzian, NoDissipation, SystemConfig, WideLorentzian, evaluate_rates, frame_coefficients
from oscnet.dynamics import InitialSuperposition, evolve_joint_state
from oscnet.observables import (
    TimeSeries,
    coherence_factor_joint,
    coherence_factor_reduced,
    correlation_time,
    cross_decay_decomposition,
    decoherence_report,
    find_state_probability,
    isolated_mode_factor,
    joint_coherence,
    linear_entropies,
    numeric_decoherence_time,
    purity,
    recurrence_probability,
    reduced_coherence,
    swap_probability,
)
from oscnet.oracle import coherent_superposition_to_fock, coherent_vector, snapshot_to_fock

N = 16
T = np.array([0.0, 0.7, 1.6, 3.9])


def swap_modes(rho, n):
    r = rho.reshape(n, n, n, n)
    return r.transpose(1, 0, 3, 2).reshape(n * n, n * n)


@pytest.fixture
def driven():
    rates = DampingRates(0.05, 0.02, 0.01, 0.03, 0.04, 0.01)
    return frame_coefficients(1.3, 1.0, rates, drive_amplitude=0.3)


STATES = [InitialSuperposition.product_cat(0.8, 0.3j), InitialSuperposition.eigen_minus(0.7, -1),
          InitialSuperposition(0.3, 1j, -0.5, 0.2, -1)]


# -- state observables against the Fock representation

@pytest.mark.parametrize("init", STATES)
def test_probabilities_match_fock(init, driven):
    snap = evolve_joint_state(init, driven, T)
    rho0 = coherent_superposition_to_fock(init, (N, N)).data
    pr, ps = recurrence_probability(init, snap), swap_probability(init, snap)
    for i in range(T.size):
        rho = snapshot_to_fock(snap.at(i), (N, N)).data
        assert pr[i] == pytest.approx(np.real(np.trace(rho @ rho0)), abs=1e-10)
        assert ps[i] == pytest.approx(np.real(np.trace(rho @ swap_modes(rho0, N))), abs=1e-10)


@pytest.mark.parametrize("init", STATES)
def test_entropies_match_fock(init, driven):
    snap = evolve_joint_state(init, driven, T)
    s12, s1, s2, excess = linear_entropies(snap)
    for i in range(T.size):
        rho = snapshot_to_fock(snap.at(i), (N, N))
        r1, r2 = rho.partial_trace(1), rho.partial_trace(2)
        assert s12[i] == pytest.approx(1 - np.real(np.trace(rho.data @ rho.data)), abs=1e-10)
        assert s1[i] == pytest.approx(1 - np.real(np.trace(r1 @ r1)), abs=1e-10)
        assert s2[i] == pytest.approx(1 - np.real(np.trace(r2 @ r2)), abs=1e-10)
    assert np.allclose(excess, s1 + s2 - s12)


def test_find_state_probabilities_match_fock(driven):
    init = STATES[0]
    snap = evolve_joint_state(init, driven, T)
    cat = init.norm * (coherent_vector(0.8, N) + coherent_vector(-0.8, N))
    coh = coherent_vector(0.3j, N)
    for mode in (1, 2):
        p_cat = find_state_probability(snap, "cat_in_mode", mode)
        p_coh = find_state_probability(snap, "coherent_in_mode", mode)
        for i in range(T.size):
            r = snapshot_to_fock(snap.at(i), (N, N)).partial_trace(mode)
            assert p_cat[i] == pytest.approx(np.real(cat.conj() @ r @ cat), abs=1e-10)
            assert p_coh[i] == pytest.approx(np.real(coh.conj() @ r @ coh), abs=1e-10)


def test_find_state_rejects_unknown_target(driven):
    snap = evolve_joint_state(STATES[0], driven, 1.0)
    with pytest.raises(ValueError):
        find_state_probability(snap, "vacuum", 1)


def test_initial_values():
    c = frame_coefficients(2.0, 1.0, DampingRates.identical(0.05, 0.025))
    init = STATES[0]
    snap = evolve_joint_state(init, c, 0.0)
    assert recurrence_probability(init, snap) == pytest.approx(1.0)
    assert purity(snap) == pytest.approx(1.0)
    assert find_state_probability(snap, "cat_in_mode", 1) == pytest.approx(1.0)
    assert find_state_probability(snap, "coherent_in_mode", 2) == pytest.approx(1.0)


def test_undamped_evolution_stays_pure():
    c = frame_coefficients(1.0, 1.0, DampingRates.identical(0.0, 0.0))
    snap = evolve_joint_state(STATES[2], c, np.linspace(0, 20, 41))
    assert np.max(np.abs(purity(snap) - 1.0)) < 1e-12
    s12, s1, s2, _ = linear_entropies(snap)
    assert np.max(np.abs(s12)) < 1e-12
    assert np.max(np.abs(s1 - s2)) < 1e-12


def test_swap_complete_at_quarter_period_without_damping():
    # Omega = -lambda cancels the -i picked up by the exchanged labels
    c = frame_coefficients(-1.0, 1.0, DampingRates.identical(0.0, 0.0))
    init = STATES[0]
    snap = evolve_joint_state(init, c, np.pi / 2)
    assert swap_probability(init, snap) == pytest.approx(1.0, abs=1e-12)


# -- rate-based coherence factors against the closed-form states

def identical_markov(gamma=0.1):
    return DampingRates.identical(gamma / 2, gamma / 4)


@pytest.mark.parametrize("kind,make", [("product_cat", lambda a: InitialSuperposition.product_cat(a, 0.0)),
                                       ("eigen_minus", InitialSuperposition.eigen_minus),
                                       ("eigen_plus", InitialSuperposition.eigen_plus)])
def test_joint_factor_matches_state(kind, make):
    rates = identical_markov()
    c = frame_coefficients(2.0, 1.0, rates)
    t = np.linspace(0, 30, 121)
    snap = evolve_joint_state(make(0.9), c, t)
    assert np.max(np.abs(joint_coherence(snap) - coherence_factor_joint(kind, rates, 0.9, t))) < 1e-12


@pytest.mark.parametrize("rates", [identical_markov(), DampingRates(0.05, 0.02, 0.05, 0.02)])
def test_reduced_factor_matches_state(rates):
    c = frame_coefficients(2.0, 1.0, rates)
    t = np.linspace(0, 30, 121)
    snap = evolve_joint_state(InitialSuperposition.product_cat(0.9, 0.0), c, t)
    for mode in (1, 2):
        ref = coherence_factor_reduced(mode, rates, 1.0, 0.9, t)
        assert np.max(np.abs(reduced_coherence(snap, mode) - ref)) < 1e-12


def test_reduced_factor_unequal_oscillators_first_order():
    # with different damping on the two oscillators the summed-rate factor
    # misses a term linear in (rate asymmetry) / lambda; the state form does not
    rates = DampingRates(0.05, 0.02, 0.01, 0.03)
    t = np.linspace(0, 30, 121)
    errs = []
    for lam in (1.0, 2.0, 4.0):
        snap = evolve_joint_state(InitialSuperposition.product_cat(0.9, 0.0), frame_coefficients(2.0, lam, rates), t)
        errs.append(np.max(np.abs(reduced_coherence(snap, 1) - coherence_factor_reduced(1, rates, lam, 0.9, t))))
    asym = max(abs(rates.gamma_plus_1 - rates.gamma_plus_2), abs(rates.gamma_minus_1 - rates.gamma_minus_2))
    assert errs[0] < 0.5 * asym
    assert 1.7 < errs[0] / errs[1] < 3.0
    assert 1.7 < errs[1] / errs[2] < 3.0


def test_reduced_factor_initial_values():
    rates = identical_markov()
    assert coherence_factor_reduced(1, rates, 1.0, 0.9, 0.0) == pytest.approx(1.0)
    assert coherence_factor_reduced(2, rates, 1.0, 0.9, 0.0) == pytest.approx(math.exp(-2 * 0.81))


def test_reduced_factor_rejects_bad_mode():
    with pytest.raises(ValueError):
        coherence_factor_reduced(0, identical_markov(), 1.0, 0.9, 0.0)


@pytest.mark.parametrize("kind", ["eigen_minus", "eigen_plus"])
def test_cross_decay_decomposition_is_the_same_factor(kind):
    rates = DampingRates(0.05, 0.02, 0.01, 0.03)
    t = np.linspace(0, 50, 26)
    assert np.allclose(cross_decay_decomposition(kind, rates, 1.1, t), coherence_factor_joint(kind, rates, 1.1, t),
                       rtol=1e-14)


def test_cross_decay_rejects_product_cat():
    with pytest.raises(ValueError):
        cross_decay_decomposition("product_cat", identical_markov(), 1.0, 0.0)


def test_isolated_factor_hand_value():
    assert isolated_mode_factor(0.1, 1.0, 10.0) == pytest.approx(math.exp(-2 * (1 - math.exp(-1))))


# -- decoherence times

def test_markovian_ratio_four_thirds():
    r = decoherence_report(identical_markov(0.2), 3.0, relaxation_rate=0.2)
    assert r.ratio == pytest.approx(4 / 3)
    assert r.tau_D_reference == pytest.approx(1 / (2 * 9 * 0.2))


@pytest.mark.parametrize("eps", [0.01, 0.3])
def test_wide_lorentzian_ratio(eps):
    cfg = SystemConfig(1.0, 1.0, 2.0, gamma1=0.1, gamma2=0.1, spectral1=WideLorentzian(eps),
                       spectral2=WideLorentzian(eps), regime="strong")
    r = decoherence_report(evaluate_rates(cfg), 2.0, relaxation_rate=0.1)
    assert r.ratio == pytest.approx(2 / (1 + eps))


def test_lorentzian_ratio_and_unbounded_correlation():
    cfg = SystemConfig(1.0, 1.0, 2.0, gamma1=0.1, gamma2=0.1, spectral1=Lorentzian(0.05, 0.05),
                       spectral2=Lorentzian(0.05, 0.05), regime="strong")
    r = decoherence_report(evaluate_rates(cfg), 2.0, relaxation_rate=0.1)
    assert r.ratio == pytest.approx(1 / 0.05)
    assert r.tau_C is None and r.tau_C_unbounded and r.tau_ratio is None
    assert r.to_dict()["tau_C_unbounded"] is True


def test_correlation_time_hand_value():
    rates = identical_markov(0.2)  # sums 0.2 and 0.1
    assert correlation_time(rates, 2.0) == pytest.approx(1 / (5 * 2 * 0.1))


def test_eigenstate_times():
    rates = identical_markov(0.2)
    assert decoherence_report(rates, 1.0, 0.2, state_kind="eigen_minus").tau_D == pytest.approx(1 / (4 * 0.1))
    assert decoherence_report(rates, 1.0, 0.2, state_kind="eigen_plus").tau_D == pytest.approx(1 / (4 * 0.2))


def test_report_errors():
    with pytest.raises(NoDissipation):
        decoherence_report(DampingRates.identical(0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        decoherence_report(identical_markov(), 0.0, 0.1)
    with pytest.raises(ValueError):
        decoherence_report(identical_markov(), 1.0, 0.1, state_kind="w_state")
    with pytest.raises(ValueError):
        decoherence_report(identical_markov(), 1.0)


def test_linearised_time_matches_numeric_for_short_times():
    # exponent 2|a|^2 (1 - e^{-Gt}) reaches 1 at t = -ln(1 - 1/(2|a|^2)) / G, close to 1/(2|a|^2 G) for large |a|
    t = np.linspace(0, 5, 50001)
    tau = numeric_decoherence_time(t, isolated_mode_factor(0.1, 10.0, t))
    assert tau == pytest.approx(-math.log(1 - 1 / 200) / 0.1, rel=1e-8)
    assert tau == pytest.approx(1 / (200 * 0.1), rel=1e-2)


def test_numeric_time_none_when_never_reached():
    assert numeric_decoherence_time([0, 1, 2], [1.0, 0.9, 0.8]) is None


def test_time_series_validation():
    s = TimeSeries([0, 1, 2], [0.1, 0.5, 0.2], "x")
    assert s.argmax() == 1 and s.max() == 0.5
    with pytest.raises(ValueError):
        TimeSeries([0, 0, 1], [1, 2, 3], "x")
    with pytest.raises(ValueError):
        TimeSeries([0, 1], [1, np.nan], "x")
    with pytest.raises(ValueError):
        TimeSeries([0, 1], [1], "x")
