"""End-to-end acceptance checks, one test per criterion.

Each test reports through the ``criterion`` fixture; the terminal summary
prints a PASS or FAIL line for every criterion that ran.
"""
import io
import json
import time

import numpy as np
import pytest
from scipy.special import erfc

from hyperbell import elements
from hyperbell.cli import main
from hyperbell.elements import apply
from hyperbell.hbsa import (
    POLARIZATION_FIRST,
    SPATIAL_FIRST,
    hbsa,
    hbsa_branches,
    label_distribution,
    label_from_transcript,
    pol_parity_qnd,
    port_phases,
    spatial_parity_qnd,
    spatial_phase_qnd,
)
from hyperbell.hilbert import (
    ALL_HYPER_LABELS,
    BellKind,
    Dof,
    HyperBellLabel,
    Parity,
    PureState,
    SpatialPath,
    bell_weights,
    decompose_in_bell_basis,
    fidelity,
    hyper_bell,
    make_bell,
    tensor,
)
from hyperbell.kerr import (
    KerrConfig,
    ProbeRegister,
    Signature,
    enumerate_outcomes,
    homodyne_error_rate,
    wrap_phase,
)
from hyperbell.protocols import TeleportInput, swap, teleport
from oracle import assert_equal_up_to_phase, ket, random_ket

PSI_M = HyperBellLabel(BellKind.PSI_MINUS, BellKind.PSI_MINUS)


def test_criterion_1_complete_discrimination(criterion, cfg):
    start = time.perf_counter()
    out = io.StringIO()
    code = main(["classify"], out=out)
    elapsed = time.perf_counter() - start
    report = json.loads(out.getvalue())
    confusion = np.array(report["confusion"])
    assert code == 0
    assert np.max(np.abs(confusion - np.eye(16))) <= 1e-9
    for label in ALL_HYPER_LABELS:
        for order in (SPATIAL_FIRST, POLARIZATION_FIRST):
            branches = hbsa_branches(hyper_bell(label), (0, 1), cfg, order)
            assert {b.label for b in branches} == {label}
            assert all(label_from_transcript(b.transcript) == label for b in branches)
    assert elapsed < 1.0
    criterion(f"16x16 identity, max deviation {np.max(np.abs(confusion - np.eye(16))):.1e}, {elapsed:.2f} s")


def _partners(rng):
    return [np.array([1, 0, 0, 0]), np.array([0, 0, 0, 1]), random_ket(rng, 4)]


def test_criterion_2_qnd_parity_tables(criterion, cfg, rng):
    worst = 1.0
    for dof, qnd in ((Dof.SPATIAL, spatial_parity_qnd), (Dof.POLARIZATION, pol_parity_qnd)):
        for kind in BellKind:
            for partner in _partners(rng):
                state = make_bell(dof, kind, partner)
                (only,) = qnd(state, (0, 1), cfg)
                assert only.parity == kind.parity
                want = cfg.theta if kind.parity is Parity.EVEN else 0.0
                assert abs(only.probe_class - want) <= 1e-12
                f = fidelity(only.post, state)
                worst = min(worst, f)
                assert f >= 1 - 1e-12
    criterion(f"8 Bell states x 3 partners, min post-state fidelity {worst:.15f}")


def test_criterion_3_port_phase_sums(criterion):
    worst = 0.0
    for theta in (0.1, 0.05, 0.3, 0.37):
        cfg = KerrConfig(theta=theta)
        t1, t2, t3, t4 = (w * theta for w in cfg.port_weights)
        want = {"c1c2": t1 + t3, "d1d2": t2 + t4, "c1d2": t1 + t4, "d1c2": t2 + t3}
        got = port_phases(cfg)
        for key in want:
            worst = max(worst, abs(got[key] - want[key]))
        seen = set()
        for kind in BellKind:
            state = make_bell(Dof.SPATIAL, kind, [1, 0, 0, 0])
            for outcome in spatial_phase_qnd(state, (0, 1), cfg):
                port = outcome.ports.pair
                seen.add(port)
                worst = max(worst, abs(wrap_phase(outcome.probe_class - want[port])))
        assert seen == set(want)
    assert worst <= 1e-12
    criterion(f"all four port sums at 4 theta values, max error {worst:.1e}")


def test_criterion_4_teleportation(criterion, cfg, rng):
    start = time.perf_counter()
    worst = 1.0
    for _ in range(100):
        inp = TeleportInput.random(rng)
        branches = teleport(inp, cfg)
        assert len(branches) == 16
        worst = min(worst, min(b.fidelity for b in branches))
        assert abs(sum(b.prob for b in branches) - 1) <= 1e-9
    elapsed = time.perf_counter() - start

    inp = TeleportInput.random(rng)
    a, b, g, d = inp.alpha, inp.beta, inp.gamma, inp.delta
    before = {br.label: br for br in teleport(inp, cfg)}[PSI_M].bob_state_before
    # (a|V> - b|H>)(g|c2> - d|c1>)
    listed = ket({"H1": b * d, "V1": -a * d, "H2": -b * g, "V2": a * g}, normalize=False)
    assert_equal_up_to_phase(before.amps, listed, 1e-12)

    assert worst >= 1 - 1e-9
    assert elapsed < 5.0
    criterion(f"100 Haar inputs, min fidelity {worst:.15f}, {elapsed:.2f} s; PsiMinus/PsiMinus branch matches")


def test_criterion_5_swapping(criterion, cfg):
    branches = swap(cfg)
    assert {b.bc_label for b in branches} == set(ALL_HYPER_LABELS)
    prob_err = max(abs(b.prob - 1 / 16) for b in branches)
    worst = min(b.fidelity_to_phi_plus for b in branches)
    assert prob_err <= 1e-9
    assert worst >= 1 - 1e-9
    before = {b.bc_label: b for b in branches}[PSI_M].ad_state_before
    # (|HV> - |VH>)(|a1 d2> - |a2 d1>)/2
    listed = ket({"H1,V2": 1, "H2,V1": -1, "V1,H2": -1, "V2,H1": 1})
    assert_equal_up_to_phase(before.amps, listed, 1e-12)
    criterion(f"16 outcomes, max |p - 1/16| {prob_err:.1e}, min fidelity {worst:.15f}")


def _magnitude(coeff):
    return float(np.sum(np.abs(coeff) ** 2))


def test_criterion_6_oracle_equivalence(criterion, cfg, rng):
    hits = 0
    for trial in range(1000):
        label = ALL_HYPER_LABELS[int(rng.integers(16))]
        state = PureState(np.exp(1j * rng.uniform(0, 2 * np.pi)) * hyper_bell(label).amps)
        pair = (0, 1)
        if trial % 10 == 0:
            # a spectator photon rides along and is left untouched
            spectator = PureState(random_ket(rng, 4))
            if trial % 20 == 0:
                state, pair = tensor(spectator, state), (1, 2)
            else:
                state = tensor(state, spectator)
        coeffs = decompose_in_bell_basis(state, pair)
        oracle = max(coeffs, key=lambda lc: _magnitude(lc[1]))[0]
        got = hbsa(state, pair, cfg, rng=rng).label
        assert got == oracle == label
        hits += 1

    worst = 0.0
    for trial in range(60):
        if trial % 3 == 0:
            state, pair = PureState(random_ket(rng, 64)), (0, 2)
        else:
            state, pair = PureState(random_ket(rng, 16)), (0, 1)
        dist = label_distribution(state, pair, cfg)
        weights = bell_weights(state, pair)
        for label in ALL_HYPER_LABELS:
            worst = max(worst, abs(dist.get(label, 0.0) - weights[label]))
    assert worst <= 1e-9
    criterion(f"{hits}/1000 exact inputs match argmax; superposition max deviation {worst:.1e}")


def test_criterion_7_property_suite(criterion, cfg, rng):
    constructors = [
        elements.identity(),
        elements.beam_splitter(),
        elements.r45_waveplate(),
        elements.pbs(),
        elements.phase_on_path(SpatialPath.PATH1, np.pi),
        elements.phase_on_path(SpatialPath.PATH2, 0.3),
        elements.mode_swap(),
        elements.sigma_x(),
        elements.sigma_z(),
        elements.minus_i_sigma_y(),
    ]
    unit_err = max(np.max(np.abs(u.matrix.conj().T @ u.matrix - np.eye(4))) for u in constructors)
    assert unit_err <= 1e-12

    norm_err = 0.0
    for _ in range(300):
        n = int(rng.integers(1, 5))
        state = PureState(random_ket(rng, 4**n))
        u = constructors[int(rng.integers(len(constructors)))]
        norm_err = max(norm_err, abs(apply(state, u, int(rng.integers(n))).norm() - 1))
    assert norm_err <= 1e-12

    comm_err = 0.0
    for _ in range(50):
        p = elements.pol_unitary(elements.random_unitary(rng, 2), "p")
        s = elements.path_unitary(elements.random_unitary(rng, 2), "s")
        state = PureState(random_ket(rng, 16))
        a = apply(apply(state, p, 0), s, 0)
        b = apply(apply(state, s, 0), p, 0)
        comm_err = max(comm_err, np.max(np.abs(a.amps - b.amps)))
    assert comm_err <= 1e-12

    for _ in range(50):
        state = PureState(random_ket(rng, 16))
        phases = rng.uniform(-np.pi, np.pi, 16)
        plus = enumerate_outcomes(state, ProbeRegister(phases), Signature.X_QUADRATURE)
        minus = enumerate_outcomes(state, ProbeRegister(-phases), Signature.X_QUADRATURE)
        assert [o.phase_class for o in plus] == pytest.approx([o.phase_class for o in minus], abs=1e-12)
        assert [o.prob for o in plus] == pytest.approx([o.prob for o in minus], abs=1e-12)

    order_err = 0.0
    for _ in range(30):
        state = PureState(random_ket(rng, 16))
        a = label_distribution(state, (0, 1), cfg, SPATIAL_FIRST)
        b = label_distribution(state, (0, 1), cfg, POLARIZATION_FIRST)
        order_err = max(order_err, max(abs(a.get(k, 0) - b.get(k, 0)) for k in ALL_HYPER_LABELS))
    assert order_err <= 1e-12
    criterion(
        f"unitarity {unit_err:.1e}, norm {norm_err:.1e}, commutation {comm_err:.1e}, "
        f"stage order {order_err:.1e}"
    )


def test_criterion_8_noise_model(criterion):
    trials = 100_000
    rng = np.random.default_rng(8)
    candidates = (0.0, np.pi / 2)
    parts = []
    for delta in (0.5, 1.0, 2.0, 4.0, 8.0):
        cfg = KerrConfig(theta=np.pi / 2, alpha=delta / 2)
        _, rate = homodyne_error_rate(candidates, cfg, trials, rng)
        p = erfc(delta / (2 * np.sqrt(2))) / 2
        se = np.sqrt(p * (1 - p) / trials)
        assert abs(rate - p) <= 3 * se, (delta, rate, p, se)
        parts.append(f"{delta:g}:{rate:.4g}")
        if delta == 8.0:
            assert rate < 1e-4
    _, coin = homodyne_error_rate(candidates, KerrConfig(theta=np.pi / 2, alpha=5e-4), trials, rng)
    assert abs(coin - 0.5) <= 3 * np.sqrt(0.25 / trials)
    criterion(f"error rates {' '.join(parts)}; near-zero separation {coin:.4f}")
