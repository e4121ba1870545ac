import json

import numpy as np
import pytest

from dyntime import action_angle as aa
from dyntime.classical import ConstantForce, FreeParticle, HarmonicOscillator, PhasePoint
from dyntime.errors import InsufficientSamples
from dyntime.io import state_from_json, point_from_json
from dyntime.projective import PureState, expectation
from dyntime.simultaneity import (
    OrbitKind,
    check_group_law,
    classical_flow,
    classify_orbit,
    level_set_pairs,
    quantum_flow,
    tau_samples,
    verify_time_function,
)
from dyntime.spectral import HermitianOperator, random_hermitian, spectral_decompose

QUBIT = spectral_decompose(HermitianOperator.diagonal([1, -1]))


def test_group_law_of_handles(rng):
    S = spectral_decompose(random_hermitian(rng, 4))
    f = quantum_flow(S)
    assert check_group_law(f, f.sample(rng), rng) < 1e-9
    for sys in (FreeParticle(2.0), ConstantForce(1.0, (0, 1, 0)), HarmonicOscillator(1, 2)):
        g = classical_flow(sys)
        assert check_group_law(g, g.sample(rng), rng) < 1e-9


@pytest.mark.parametrize("nu", [0.5, 1.0, 3.0])
def test_classify_oscillator_orbit(nu):
    ho = HarmonicOscillator(1.0, nu)
    out = classify_orbit(classical_flow(ho), PhasePoint([1], [0]), horizon=2.5 * 2 * np.pi / nu)
    assert out.kind is OrbitKind.PERIODIC
    assert abs(out.period - 2 * np.pi / nu) < 1e-9


def test_classify_examples():
    out = classify_orbit(classical_flow(HarmonicOscillator(1, 1)), PhasePoint([1], [0]), 10)
    assert out.kind is OrbitKind.PERIODIC and abs(out.period - 2 * np.pi) < 1e-9
    fp = classical_flow(FreeParticle())
    assert classify_orbit(fp, PhasePoint([0, 0, 0], [1, 0, 0]), 10).kind is OrbitKind.NON_PERIODIC_UP_TO_HORIZON
    assert classify_orbit(fp, PhasePoint([1, 2, 3], [0, 0, 0]), 10).kind is OrbitKind.FIXED
    qf = quantum_flow(QUBIT)
    assert classify_orbit(qf, PureState([1, 0]), 10).kind is OrbitKind.FIXED
    out = classify_orbit(qf, PureState([1, 1]), 10)
    assert out.kind is OrbitKind.PERIODIC and abs(out.period - np.pi) < 1e-9


def test_classify_incommensurate_three_level():
    S = spectral_decompose(HermitianOperator.diagonal([0, 1, np.sqrt(2)]))
    out = classify_orbit(quantum_flow(S), PureState([1, 1, 1]), 20)
    assert out.kind is OrbitKind.NON_PERIODIC_UP_TO_HORIZON


def test_level_set_pairs_examples(rng):
    fp = FreeParticle(1.0)
    assert level_set_pairs(fp.time_function, fp.sample, 1e-8, 0, seed=1, flow=classical_flow(fp)) == []
    a, b = PhasePoint([2, 0, 0], [1, 0, 0]), PhasePoint([4, 0, 0], [2, 0, 0])
    assert fp.time_function(a) == fp.time_function(b) == 2.0
    pairs = level_set_pairs(fp.time_function, lambda r: a, 1e-8, 1, seed=0,
                            partner=lambda r, x: b)
    assert pairs == [(a, b)]
    partner = aa.level_set_partner(QUBIT, 2, 1)
    pairs = level_set_pairs(lambda p: aa.time_function(p, QUBIT, 2, 1),
                            lambda r: aa.random_reduced_state(r, QUBIT), 1e-10, 5, seed=3,
                            partner=partner)
    for p1, p2 in pairs:
        assert abs(aa.time_function(p1, QUBIT, 2, 1) - aa.time_function(p2, QUBIT, 2, 1)) < 1e-10
        assert abs(aa.chart(p1, QUBIT, 1).actions[0] - aa.chart(p2, QUBIT, 1).actions[0]) > 0


def test_level_set_pairs_generic_slide(rng):
    for sys in (FreeParticle(1.3), ConstantForce(2.0, (1, 1, 0)), HarmonicOscillator(1, 0.7)):
        pairs = level_set_pairs(sys.time_function, sys.sample, 1e-9, 8, seed=5, flow=classical_flow(sys))
        assert len(pairs) == 8
        for x1, x2 in pairs:
            assert abs(sys.time_function(x1) - sys.time_function(x2)) < 1e-9


def test_level_set_pairs_insufficient():
    fp = FreeParticle()
    with pytest.raises(InsufficientSamples):
        level_set_pairs(fp.time_function, fp.sample, 1e-8, 3, seed=0,
                        partner=lambda r, x: PhasePoint(x.q + 1, x.p))
    with pytest.raises(ValueError):
        level_set_pairs(fp.time_function, fp.sample, 1e-8, 3, seed=0)


def test_tau_samples_avoid_zero(rng):
    taus = tau_samples(rng, 33, 5.0)
    assert taus.size == 33 and np.all(np.abs(taus) >= 1e-6) and np.all(np.abs(taus) <= 5.0)


def test_verify_free_particle_time_of_arrival():
    fp = FreeParticle(1.5)
    rep = verify_time_function(classical_flow(fp), fp.time_function, False, 16, 16, seed=2,
                               partner=fp.level_set_partner)
    assert rep.passed and rep.condition_1.checks == 256 and rep.condition_2.checks == 256


def test_verify_free_particle_constant_fails_condition_1():
    fp = FreeParticle(1.5)
    speed = lambda x: float(np.linalg.norm(x.p))
    rep = verify_time_function(classical_flow(fp), speed, False, 8, 8, tol=1e-8, seed=4)
    assert not rep.passed and not rep.condition_1.passed
    assert rep.condition_2.passed
    # counterexamples are sound when re-evaluated from their serialized states
    for ce in rep.condition_1.counterexamples:
        x = point_from_json(ce["state"])
        regen = fp.sample(np.random.default_rng(ce["sample_seed"]))
        assert regen == x
        assert abs(speed(fp.flow(x, ce["tau"])) - speed(x)) < 1e-8 / 2


def test_verify_oscillator_periodic():
    ho = HarmonicOscillator(0.8, 2.5)
    rep = verify_time_function(classical_flow(ho), ho.time_function, True, 12, 12,
                               seed=9, period=ho.period)
    assert rep.passed


def test_verify_oscillator_wrong_period_fails():
    ho = HarmonicOscillator(1.0, 1.0)
    rep = verify_time_function(classical_flow(ho), ho.time_function, True, 6, 6,
                               seed=9, period=1.1 * ho.period)
    assert not rep.condition_1.passed
    for ce in rep.condition_1.counterexamples:
        x = point_from_json(ce["state"])
        gap = abs(ho.time_function(ho.flow(x, ce["tau_2"])) - ho.time_function(ho.flow(x, ce["tau_1"])))
        if ce["violation"] == "no return after whole periods":
            assert gap > 1e-8 / 2
        else:
            assert gap < 1e-8


def test_verify_quantum_time_functions(rng):
    S = spectral_decompose(random_hermitian(rng, 4))
    f = quantum_flow(S)
    for j in aa.admissible_indices(S, 2):
        rep = verify_time_function(f, lambda p: aa.time_function(p, S, j, 2), True, 8, 8, seed=1,
                                   period=aa.time_function_period(S, j, 2),
                                   partner=aa.level_set_partner(S, j, 2))
        assert rep.passed, rep.to_json()


def test_verify_quantum_population_fails(rng):
    S = spectral_decompose(random_hermitian(rng, 3))
    E1 = HermitianOperator(np.outer(S.eigenbasis[:, 0], S.eigenbasis[:, 0].conj()))
    rep = verify_time_function(quantum_flow(S), lambda p: expectation(E1, p), False, 6, 6, seed=0)
    assert not rep.condition_1.passed
    for ce in rep.condition_1.counterexamples:
        p = state_from_json(ce["state"])
        moved = quantum_flow(S).evolve(p, ce["tau"])
        assert abs(expectation(E1, moved) - expectation(E1, p)) < 1e-8 / 2


def test_report_is_deterministic_and_serializable():
    cf = ConstantForce(1.0, (0, 0, 2))
    args = (classical_flow(cf), cf.time_function, False, 6, 6)
    r1 = verify_time_function(*args, seed=11).to_json()
    r2 = verify_time_function(*args, seed=11).to_json()
    assert r1 == r2
    d = json.loads(r1)
    for key in ("condition_1", "condition_2", "seed", "tolerances", "samples_used", "passed"):
        assert key in d
    assert "counterexamples" in d["condition_1"]


def test_periodic_requires_period():
    ho = HarmonicOscillator()
    with pytest.raises(ValueError):
        verify_time_function(classical_flow(ho), ho.time_function, True)
