"""Cross-Kerr coupling to a coherent probe and the probe readout.

The probe is never simulated as a field. Every basis component of the photon
state carries the total phase the probe would have picked up on that branch
(a :class:`ProbeRegister`). Reading the probe groups branches whose phases the
chosen measurement cannot tell apart and projects onto one group.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc

from .hilbert import PHOTON_BASIS, PhotonBasis, Polarization, PureState, SpatialPath, local_labels

CLASS_TOL = 1e-9
# outcome classes lighter than this are numerical dust from exact cancellations
PROB_FLOOR = 1e-20

# x-quadrature readout: mean 2*alpha*cos(phase), unit variance (vacuum units)
HOMODYNE_GAIN = 2.0
HOMODYNE_VARIANCE = 1.0


@dataclass(frozen=True)
class KerrConfig:
    """Per-photon probe phase ``theta`` and probe amplitude ``alpha``.

    ``port_weights`` scale ``theta`` for the four media of the port-resolving
    stage (rails c and d of the first photon, then of the second).
    """

    theta: float = 0.1
    alpha: float = 4.0
    port_weights: tuple[float, float, float, float] = (1.0, 2.0, 4.0, 8.0)

    def __post_init__(self):
        if not (0 < self.theta <= np.pi / 2):
            raise ValueError(f"theta must lie in (0, pi/2], got {self.theta}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if len(self.port_weights) != 4:
            raise ValueError("port_weights needs exactly four entries")
        object.__setattr__(self, "port_weights", tuple(float(w) for w in self.port_weights))


class Signature(enum.Enum):
    X_QUADRATURE = "XQuadrature"
    FULL_PHASE = "FullPhase"


@dataclass(frozen=True)
class ProbeRegister:
    branch_phase: np.ndarray

    @classmethod
    def zeros(cls, state: PureState) -> "ProbeRegister":
        return cls(np.zeros(state.dim))


@dataclass(frozen=True)
class OutcomeRecord:
    phase_class: float
    prob: float
    post: PureState


def on_path(path: SpatialPath) -> Callable[[PhotonBasis], bool]:
    return lambda b: b.path == path


def on_pol(pol: Polarization) -> Callable[[PhotonBasis], bool]:
    return lambda b: b.pol == pol


def couple(
    state: PureState,
    reg: ProbeRegister,
    photon: int,
    mode: Callable[[PhotonBasis], bool],
    shift: float,
) -> ProbeRegister:
    """Add ``shift`` to every branch where ``photon`` occupies ``mode``.

    Amplitudes are left alone; only the probe bookkeeping changes.
    """
    if reg.branch_phase.shape != (state.dim,):
        raise ValueError(
            f"register length {reg.branch_phase.shape} does not match state dimension {state.dim}"
        )
    if not 0 <= photon < state.n_photons:
        raise IndexError(f"photon index {photon} out of range")
    hit = np.array([mode(b) for b in PHOTON_BASIS])
    mask = hit[local_labels(state.n_photons)[:, photon]]
    return ProbeRegister(reg.branch_phase + shift * mask)


def wrap_phase(phase):
    """Map phases to (-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(phase, dtype=float)))


def canonical_class(phase, sig: Signature):
    w = wrap_phase(phase)
    return np.abs(w) if sig is Signature.X_QUADRATURE else w


def _cluster(values: np.ndarray, sig: Signature) -> np.ndarray:
    """Label each value with its cluster id; clusters merge values within CLASS_TOL."""
    order = np.argsort(values, kind="stable")
    ids = np.empty(values.size, dtype=int)
    current, anchor = -1, None
    for idx in order:
        v = values[idx]
        if anchor is None or v - anchor > CLASS_TOL:
            current += 1
            anchor = v
        ids[idx] = current
    if sig is Signature.FULL_PHASE and current > 0:
        # -pi and pi are the same point on the circle
        first, last = order[0], order[-1]
        if values[first] + 2 * np.pi - values[last] <= CLASS_TOL:
            ids[ids == current] = ids[first]
    return ids


def enumerate_outcomes(state: PureState, reg: ProbeRegister, sig: Signature) -> list[OutcomeRecord]:
    """All probe outcomes with their probabilities and post-measurement states.

    Surviving branch phases are treated as compensated: the post-state is the
    plain renormalized restriction, relative signs inside a class intact.
    """
    if reg.branch_phase.shape != (state.dim,):
        raise ValueError("register does not match state")
    amps = state.amps
    weights = np.abs(amps) ** 2
    support = weights > 0
    classes = canonical_class(reg.branch_phase, sig)
    ids = np.full(state.dim, -1)
    ids[support] = _cluster(classes[support], sig)
    out = []
    for cid in np.unique(ids[support]):
        members = ids == cid
        prob = float(weights[members].sum())
        if prob < PROB_FLOOR:
            continue
        post = np.where(members, amps, 0)
        rep = float(classes[members][np.argmax(weights[members])])
        out.append(OutcomeRecord(rep, prob, PureState(post, state.n_photons, normalize=True)))
    total = sum(o.prob for o in out)
    # renormalize after dropping dust so probabilities still sum to one
    out = [OutcomeRecord(o.phase_class, o.prob / total, o.post) for o in out]
    out.sort(key=lambda o: o.phase_class)
    return out


def sample_outcome(state: PureState, reg: ProbeRegister, sig: Signature, rng: np.random.Generator) -> OutcomeRecord:
    outcomes = enumerate_outcomes(state, reg, sig)
    return outcomes[choose(rng, [o.prob for o in outcomes])]


def choose(rng: np.random.Generator, probs: Sequence[float]) -> int:
    """Index drawn from ``probs``; a single outcome consumes no randomness."""
    if len(probs) == 1:
        return 0
    p = np.asarray(probs, dtype=float)
    return int(rng.choice(p.size, p=p / p.sum()))


def homodyne_mean(phase, alpha: float):
    return HOMODYNE_GAIN * alpha * np.cos(phase)


def noisy_homodyne_classify(
    true_phase: float,
    candidates: Sequence[float],
    config: KerrConfig,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Read the x quadrature once and return the maximum-likelihood candidate.

    With ``size`` set, draws that many independent readouts and returns an
    array of chosen candidates. Candidates sharing a mean (``phi`` and
    ``-phi``) resolve to the first one listed.
    """
    if len(candidates) == 0:
        raise ValueError("candidates must be non-empty")
    cand = np.asarray(candidates, dtype=float)
    means = homodyne_mean(cand, config.alpha)
    x = rng.normal(homodyne_mean(true_phase, config.alpha), np.sqrt(HOMODYNE_VARIANCE), size=size)
    nearest = np.argmin(np.abs(np.subtract.outer(x, means)), axis=-1)
    return cand[nearest] if size is not None else float(cand[nearest])


def ml_error_probability(separation) -> np.ndarray:
    """Two equiprobable unit-variance Gaussians ``separation`` apart, ML decision."""
    return 0.5 * erfc(np.asarray(separation, dtype=float) / (2 * np.sqrt(2)))


def separation(phase_a: float, phase_b: float, alpha: float) -> float:
    return float(abs(homodyne_mean(phase_a, alpha) - homodyne_mean(phase_b, alpha)))


def homodyne_error_rate(
    candidates: tuple[float, float],
    config: KerrConfig,
    trials: int,
    rng: np.random.Generator,
) -> tuple[int, float]:
    """Monte-Carlo misclassification count and rate with a uniform prior on the two candidates."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    pick = rng.integers(0, 2, size=trials)
    errors = 0
    for k, phase in enumerate(candidates):
        n = int(np.sum(pick == k))
        if n == 0:
            continue
        got = noisy_homodyne_classify(phase, candidates, config, rng, size=n)
        errors += int(np.sum(got != phase))
    return errors, errors / trials
