"""Teleportation of a two-qubit photon and hyperentanglement swapping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import elements
from .elements import LocalUnitary
from .hbsa import ConsistencyError, HbsaResult, hbsa_branches
from .hilbert import (
    ALL_HYPER_LABELS,
    BellKind,
    HyperBellLabel,
    PureState,
    SpatialPath,
    fidelity,
    hyper_bell,
    photon_state,
    tensor,
)
from .kerr import KerrConfig, choose

NORMALIZATION_TOL = 1e-12
FIDELITY_TOL = 1e-9

ENUMERATE = "enumerate"
SAMPLE = "sample"

_OPS = {
    "identity": elements.identity,
    "sigma_x": elements.sigma_x,
    "sigma_z": elements.sigma_z,
    "minus_i_sigma_y": elements.minus_i_sigma_y,
    "phase_pi_path1": lambda: elements.phase_on_path(SpatialPath.PATH1, np.pi),
    "mode_swap": elements.mode_swap,
}

_POL_FIX = {
    BellKind.PHI_PLUS: ("identity",),
    BellKind.PHI_MINUS: ("sigma_z",),
    BellKind.PSI_PLUS: ("sigma_x",),
    BellKind.PSI_MINUS: ("minus_i_sigma_y",),
}
_SPAT_FIX = {
    BellKind.PHI_PLUS: ("identity",),
    BellKind.PHI_MINUS: ("phase_pi_path1",),
    BellKind.PSI_PLUS: ("mode_swap",),
    BellKind.PSI_MINUS: ("phase_pi_path1", "mode_swap"),
}


@dataclass(frozen=True)
class TeleportInput:
    """Photon state ``(alpha|H> + beta|V>)(gamma|path1> + delta|path2>)``."""

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self):
        for name, (a, b) in (("alpha/beta", (self.alpha, self.beta)), ("gamma/delta", (self.gamma, self.delta))):
            norm = abs(a) ** 2 + abs(b) ** 2
            if abs(norm - 1) > NORMALIZATION_TOL:
                raise ValueError(f"|{name}|^2 sums to {norm}, expected 1")

    @classmethod
    def random(cls, rng: np.random.Generator) -> "TeleportInput":
        """Haar-random polarization and path qubits."""
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        p, s = z[:2] / np.linalg.norm(z[:2]), z[2:] / np.linalg.norm(z[2:])
        return cls(complex(p[0]), complex(p[1]), complex(s[0]), complex(s[1]))

    def state(self) -> PureState:
        return photon_state((self.alpha, self.beta), (self.gamma, self.delta))

    def to_json(self) -> dict:
        return {k: [getattr(self, k).real, getattr(self, k).imag] for k in ("alpha", "beta", "gamma", "delta")}


@dataclass(frozen=True)
class CorrectionRule:
    pol_ops: tuple[str, ...]
    spat_ops: tuple[str, ...]

    def operations(self) -> list[LocalUnitary]:
        """Polarization operations first, then spatial ones, in application order."""
        return [_OPS[name]() for name in self.pol_ops + self.spat_ops]

    def unitary(self) -> LocalUnitary:
        ops = self.operations()
        total = ops[0]
        for op in ops[1:]:
            total = total.then(op)
        return total


def correction_for(label: HyperBellLabel) -> CorrectionRule:
    return CorrectionRule(_POL_FIX[label.pol], _SPAT_FIX[label.spat])


CORRECTIONS = {label: correction_for(label) for label in ALL_HYPER_LABELS}


@dataclass(frozen=True)
class TeleportBranch:
    label: HyperBellLabel
    prob: float
    bob_state_before: PureState
    bob_state_after_correction: PureState
    fidelity: float

    def to_json(self, with_states: bool = False) -> dict:
        out = {"label": str(self.label), "prob": self.prob, "fidelity": self.fidelity}
        if with_states:
            out["bob_state_before"] = self.bob_state_before.to_json()
            out["bob_state_after_correction"] = self.bob_state_after_correction.to_json()
        return out


@dataclass(frozen=True)
class SwapBranch:
    bc_label: HyperBellLabel
    prob: float
    ad_state_before: PureState
    ad_state_after_correction: PureState
    fidelity_to_phi_plus: float

    def to_json(self, with_states: bool = False) -> dict:
        out = {"bc_label": str(self.bc_label), "prob": self.prob, "fidelity": self.fidelity_to_phi_plus}
        if with_states:
            out["ad_state_before"] = self.ad_state_before.to_json()
            out["ad_state_after_correction"] = self.ad_state_after_correction.to_json()
        return out


def _group_by_label(branches: list[HbsaResult]) -> dict[HyperBellLabel, tuple[float, PureState]]:
    """Merge analyzer branches with the same label.

    Branches of one label differ only in ports and clicks, which leave the
    residual photons in the same state up to a global phase.
    """
    grouped: dict[HyperBellLabel, tuple[float, PureState]] = {}
    for b in branches:
        if b.label not in grouped:
            grouped[b.label] = (b.prob, b.residual)
            continue
        prob, ref = grouped[b.label]
        if fidelity(ref, b.residual) < 1 - FIDELITY_TOL:
            raise ConsistencyError(f"branches of {b.label} leave different residual states")
        grouped[b.label] = (prob + b.prob, ref)
    return grouped


def _select(grouped, mode: str, rng):
    labels = [label for label in ALL_HYPER_LABELS if label in grouped]
    if mode == ENUMERATE:
        return labels
    if mode != SAMPLE:
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        raise ValueError("sample mode needs an rng")
    return [labels[choose(rng, [grouped[label][0] for label in labels])]]


def teleport(inp: TeleportInput, cfg: KerrConfig, mode: str = ENUMERATE, rng=None) -> list[TeleportBranch]:
    """Teleport photon A's state onto photon C through a hyperentangled B-C channel.

    Photons are ordered A, B, C. The analyzer runs on (A, B); the correction
    applied to C depends only on the reported label.
    """
    target = inp.state()
    state = tensor(target, hyper_bell(HyperBellLabel(BellKind.PHI_PLUS, BellKind.PHI_PLUS)))
    grouped = _group_by_label(hbsa_branches(state, (0, 1), cfg))
    out = []
    for label in _select(grouped, mode, rng):
        prob, bob = grouped[label]
        fixed = elements.apply_many(bob, CORRECTIONS[label].operations(), 0)
        out.append(TeleportBranch(label, prob, bob, fixed, fidelity(fixed, target)))
    return out


PHI_PLUS_HYPER = HyperBellLabel(BellKind.PHI_PLUS, BellKind.PHI_PLUS)


def swap(cfg: KerrConfig, mode: str = ENUMERATE, rng=None) -> list[SwapBranch]:
    """Entangle A and D by analyzing B and C of two hyperentangled pairs.

    Photons are ordered A, B, C, D; the residual pair is (A, D) and the
    correction acts on D.
    """
    target = hyper_bell(PHI_PLUS_HYPER)
    state = tensor(target, target)
    grouped = _group_by_label(hbsa_branches(state, (1, 2), cfg))
    out = []
    for label in _select(grouped, mode, rng):
        prob, ad = grouped[label]
        fixed = elements.apply_many(ad, CORRECTIONS[label].operations(), 1)
        out.append(SwapBranch(label, prob, ad, fixed, fidelity(fixed, target)))
    return out
