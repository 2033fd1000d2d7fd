"""Two-stage hyperentangled Bell-state analyzer.

Spatial stage: a parity check on the rails, then beam splitters and a
port-resolving probe. Polarization stage: a parity check on H/V, then R45
plates, PBSs and four detectors. Every stage enumerates its outcomes, so the
analyzer returns the full branch tree of a measurement rather than one draw.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import elements
from .hilbert import (
    BellKind,
    HyperBellLabel,
    Parity,
    Polarization,
    PureState,
    Sign,
    SpatialPath,
    local_labels,
    project_pair,
)
from .kerr import (
    CLASS_TOL,
    PROB_FLOOR,
    KerrConfig,
    ProbeRegister,
    Signature,
    choose,
    couple,
    enumerate_outcomes,
    on_path,
    on_pol,
    wrap_phase,
)

Pair = tuple[int, int]

SPATIAL_FIRST = "spatial-first"
POLARIZATION_FIRST = "polarization-first"

# Port names: rail letter (c = path1, d = path2) plus 1/2 for the first/second photon of the pair.
PLUS_PORTS = frozenset({"c1c2", "d1d2"})
MINUS_PORTS = frozenset({"c1d2", "d1c2"})
# Detectors: D1/D2 take H/V of the first photon, D3/D4 H/V of the second.
_DETECTOR = {(0, Polarization.H): "D1", (0, Polarization.V): "D2",
             (1, Polarization.H): "D3", (1, Polarization.V): "D4"}
PLUS_CLICKS = frozenset({"D1D3", "D2D4"})


_BS = elements.beam_splitter()
_R45 = elements.r45_waveplate()
_PBS = elements.pbs()


class ConsistencyError(RuntimeError):
    """A measurement produced an outcome the analyzer's decision table does not allow."""


@dataclass(frozen=True)
class PortRecord:
    photon_ports: tuple[str, str]

    def __post_init__(self):
        if self.pair not in PLUS_PORTS | MINUS_PORTS:
            raise ValueError(f"invalid port pair {self.photon_ports}")

    @property
    def pair(self) -> str:
        return "".join(self.photon_ports)


@dataclass(frozen=True)
class TranscriptEntry:
    stage: str
    outcome_class: Optional[float] = None
    ports: Optional[str] = None
    clicks: Optional[str] = None

    def to_json(self) -> dict:
        out = {"stage": self.stage, "outcome_class": self.outcome_class}
        if self.ports is not None:
            out["ports"] = self.ports
        if self.clicks is not None:
            out["clicks"] = self.clicks
        return out


@dataclass(frozen=True)
class ParityOutcome:
    parity: Parity
    prob: float
    post: PureState
    probe_class: float


@dataclass(frozen=True)
class PortOutcome:
    sign: Sign
    ports: PortRecord
    prob: float
    post: PureState
    probe_class: float


@dataclass(frozen=True)
class SpatialBsaOutcome:
    kind: BellKind
    ports: PortRecord
    prob: float
    post: PureState
    transcript: tuple[TranscriptEntry, ...]


@dataclass(frozen=True)
class DetectionOutcome:
    sign: Sign
    clicks: str
    prob: float
    residual: Optional[PureState]
    rails: tuple[SpatialPath, SpatialPath]


@dataclass(frozen=True)
class HbsaResult:
    """One branch of a complete analysis.

    ``prob`` is the branch probability; ``consumed`` lists the photons
    absorbed by the final detectors, and ``residual`` holds the remaining
    photons (``None`` for a bare pair).
    """

    label: HyperBellLabel
    ports: PortRecord
    residual: Optional[PureState]
    transcript: tuple[TranscriptEntry, ...]
    prob: float
    consumed: Pair = field(default=(0, 1))

    def to_json(self) -> dict:
        return {
            "label": str(self.label),
            "prob": self.prob,
            "ports": self.ports.pair,
            "transcript": [t.to_json() for t in self.transcript],
        }


def port_phases(cfg: KerrConfig) -> dict[str, float]:
    """Probe phase for each port pair; raises if two pairs are indistinguishable."""
    t1, t2, t3, t4 = (w * cfg.theta for w in cfg.port_weights)
    sums = {"c1c2": t1 + t3, "d1d2": t2 + t4, "c1d2": t1 + t4, "d1c2": t2 + t3}
    wrapped = {k: float(wrap_phase(v)) for k, v in sums.items()}
    for (a, pa), (b, pb) in itertools.combinations(wrapped.items(), 2):
        gap = abs(wrap_phase(pa - pb))
        if gap <= 1e3 * CLASS_TOL:
            raise ValueError(
                f"port phases for {a} and {b} coincide modulo 2*pi at theta={cfg.theta}; "
                "choose another theta or port_weights"
            )
    return sums


def _parity_from_class(probe_class: float) -> Parity:
    return Parity.ODD if abs(probe_class) <= CLASS_TOL else Parity.EVEN


def _parity_outcomes(state: PureState, pair: Pair, cfg: KerrConfig, mode_first, mode_second) -> list[ParityOutcome]:
    i, j = pair
    reg = ProbeRegister.zeros(state)
    reg = couple(state, reg, i, mode_first, cfg.theta)
    reg = couple(state, reg, j, mode_second, -cfg.theta)
    return [
        ParityOutcome(_parity_from_class(o.phase_class), o.prob, o.post, o.phase_class)
        for o in enumerate_outcomes(state, reg, Signature.X_QUADRATURE)
    ]


def spatial_parity_qnd(state: PureState, pair: Pair, cfg: KerrConfig) -> list[ParityOutcome]:
    """Rail parity check: +theta on the first photon's path1, -theta on the second's path2."""
    return _parity_outcomes(state, pair, cfg, on_path(SpatialPath.PATH1), on_path(SpatialPath.PATH2))


def pol_parity_qnd(state: PureState, pair: Pair, cfg: KerrConfig) -> list[ParityOutcome]:
    """Polarization parity check: +theta on the first photon's H, -theta on the second's V."""
    return _parity_outcomes(state, pair, cfg, on_pol(Polarization.H), on_pol(Polarization.V))


def _occupied_paths(state: PureState, photon: int) -> set[SpatialPath]:
    labels = local_labels(state.n_photons)[:, photon]
    present = labels[np.abs(state.amps) ** 2 > 0]
    return {SpatialPath(int(x) // 2) for x in np.unique(present)}


def spatial_phase_qnd(state: PureState, pair: Pair, cfg: KerrConfig) -> list[PortOutcome]:
    """Beam splitter on each photon, then a full-phase probe that resolves the output ports.

    Ports c1c2/d1d2 mean the "+" member of the parity group, c1d2/d1c2 the "-" member.
    """
    i, j = pair
    expected = port_phases(cfg)
    t1, t2, t3, t4 = (w * cfg.theta for w in cfg.port_weights)
    bs = _BS
    state = elements.apply(elements.apply(state, bs, i), bs, j)
    reg = ProbeRegister.zeros(state)
    for photon, (tc, td) in ((i, (t1, t2)), (j, (t3, t4))):
        reg = couple(state, reg, photon, on_path(SpatialPath.PATH1), tc)
        reg = couple(state, reg, photon, on_path(SpatialPath.PATH2), td)
    out = []
    for o in enumerate_outcomes(state, reg, Signature.FULL_PHASE):
        match = [k for k, v in expected.items() if abs(wrap_phase(v - o.phase_class)) <= CLASS_TOL]
        if len(match) != 1:
            raise ConsistencyError(f"probe phase {o.phase_class} matches no port pair")
        ports = match[0]
        record = PortRecord((ports[:2], ports[2:]))
        paths_i, paths_j = _occupied_paths(o.post, i), _occupied_paths(o.post, j)
        want_i = SpatialPath.PATH1 if ports[0] == "c" else SpatialPath.PATH2
        want_j = SpatialPath.PATH1 if ports[2] == "c" else SpatialPath.PATH2
        if paths_i != {want_i} or paths_j != {want_j}:
            raise ConsistencyError(f"ports {ports} disagree with post-state support")
        sign = Sign.PLUS if ports in PLUS_PORTS else Sign.MINUS
        out.append(PortOutcome(sign, record, o.prob, o.post, o.phase_class))
    return out


def spatial_bsa(state: PureState, pair: Pair, cfg: KerrConfig) -> list[SpatialBsaOutcome]:
    """Both spatial stages; each branch carries its rail Bell label and ports."""
    out = []
    for par in spatial_parity_qnd(state, pair, cfg):
        first = TranscriptEntry("spatial_parity", par.probe_class)
        for ph in spatial_phase_qnd(par.post, pair, cfg):
            kind = BellKind.from_bits(par.parity, ph.sign)
            second = TranscriptEntry("spatial_phase", ph.probe_class, ports=ph.ports.pair)
            out.append(SpatialBsaOutcome(kind, ph.ports, par.prob * ph.prob, ph.post, (first, second)))
    return out


def pol_phase_detect(state: PureState, pair: Pair) -> list[DetectionOutcome]:
    """R45 and PBS on both photons, then one click per photon. Destroys the pair.

    Coincidences D1D3/D2D4 mean the "+" member of the parity group,
    D1D4/D2D3 the "-" member. Outcomes are split by the PBS output rail each
    photon left through, since a detector sits behind every output.
    """
    i, j = pair
    r45, splitter = _R45, _PBS
    for photon in pair:
        state = elements.apply(elements.apply(state, r45, photon), splitter, photon)
    projections = project_pair(state, pair)
    out = []
    for local_i, local_j in itertools.product(range(4), range(4)):
        prob, residual = projections[4 * local_i + local_j]
        if prob < PROB_FLOOR:
            continue
        pattern = (
            _DETECTOR[(0, Polarization(local_i % 2))] + _DETECTOR[(1, Polarization(local_j % 2))]
        )
        rails = (SpatialPath(local_i // 2), SpatialPath(local_j // 2))
        sign = Sign.PLUS if pattern in PLUS_CLICKS else Sign.MINUS
        out.append(DetectionOutcome(sign, pattern, prob, residual, rails))
    total = sum(o.prob for o in out)
    return [
        DetectionOutcome(o.sign, o.clicks, o.prob / total, o.residual, o.rails) for o in out
    ]


def hbsa_branches(
    state: PureState, pair: Pair, cfg: KerrConfig, order: str = SPATIAL_FIRST
) -> list[HbsaResult]:
    """Every branch of a complete analysis on ``pair``, with probabilities.

    ``order`` selects whether the polarization parity check runs after the
    spatial stages (the default) or before them; the destructive detection
    always comes last.
    """
    if state.n_photons < 2:
        raise ValueError("need at least two photons")
    if order not in (SPATIAL_FIRST, POLARIZATION_FIRST):
        raise ValueError(f"unknown order {order!r}")

    def pol_parity(st):
        return [
            (p.parity, p.prob, p.post, (TranscriptEntry("pol_parity", p.probe_class),))
            for p in pol_parity_qnd(st, pair, cfg)
        ]

    def spatial(st):
        return [(s.kind, s.ports, s.prob, s.post, s.transcript) for s in spatial_bsa(st, pair, cfg)]

    stages = []
    if order == SPATIAL_FIRST:
        for kind, ports, p1, st, tr1 in spatial(state):
            for parity, p2, st2, tr2 in pol_parity(st):
                stages.append((kind, ports, parity, p1 * p2, st2, tr1 + tr2))
    else:
        for parity, p1, st, tr1 in pol_parity(state):
            for kind, ports, p2, st2, tr2 in spatial(st):
                stages.append((kind, ports, parity, p1 * p2, st2, tr1 + tr2))

    out = []
    for kind, ports, parity, prob, st, tr in stages:
        for det in pol_phase_detect(st, pair):
            label = HyperBellLabel(BellKind.from_bits(parity, det.sign), kind)
            transcript = tr + (TranscriptEntry("pol_detect", clicks=det.clicks),)
            out.append(HbsaResult(label, ports, det.residual, transcript, prob * det.prob, pair))
    return out


def label_from_transcript(transcript) -> HyperBellLabel:
    """Rebuild the label from the recorded probe classes, ports and clicks alone."""
    by_stage = {t.stage: t for t in transcript}
    spat = BellKind.from_bits(
        _parity_from_class(by_stage["spatial_parity"].outcome_class),
        Sign.PLUS if by_stage["spatial_phase"].ports in PLUS_PORTS else Sign.MINUS,
    )
    pol = BellKind.from_bits(
        _parity_from_class(by_stage["pol_parity"].outcome_class),
        Sign.PLUS if by_stage["pol_detect"].clicks in PLUS_CLICKS else Sign.MINUS,
    )
    return HyperBellLabel(pol, spat)


def hbsa(
    state: PureState,
    pair: Pair,
    cfg: KerrConfig,
    rng: np.random.Generator | None = None,
    order: str = SPATIAL_FIRST,
) -> HbsaResult:
    """Run the analyzer once, drawing a single branch with ``rng``."""
    if rng is None:
        rng = np.random.default_rng()
    branches = hbsa_branches(state, pair, cfg, order)
    return branches[choose(rng, [b.prob for b in branches])]


def label_distribution(state: PureState, pair: Pair, cfg: KerrConfig, order: str = SPATIAL_FIRST) -> dict[HyperBellLabel, float]:
    """Total probability of each label reported by the analyzer."""
    dist: dict[HyperBellLabel, float] = {}
    for b in hbsa_branches(state, pair, cfg, order):
        dist[b.label] = dist.get(b.label, 0.0) + b.prob
    return dist
