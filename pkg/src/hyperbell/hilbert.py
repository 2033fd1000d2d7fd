"""Pure states of up to four photons carrying a polarization and a path qubit.

Each photon lives in a 4-dimensional space spanned by (polarization, path)
labels. The local index of a label is ``2 * path + pol`` with ``H = 0``,
``V = 1``, ``path1 = 0`` and ``path2 = 1``. A multi-photon amplitude vector is
the lexicographic product of the per-photon local indices, first photon most
significant.
"""
from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

MAX_PHOTONS = 4
NORM_TOL = 1e-10

_SQRT1_2 = 1 / np.sqrt(2)


class Polarization(enum.IntEnum):
    H = 0
    V = 1


class SpatialPath(enum.IntEnum):
    PATH1 = 0
    PATH2 = 1


@dataclass(frozen=True)
class PhotonBasis:
    pol: Polarization
    path: SpatialPath

    @property
    def index(self) -> int:
        return 2 * int(self.path) + int(self.pol)

    @classmethod
    def from_index(cls, index: int) -> "PhotonBasis":
        return cls(Polarization(index % 2), SpatialPath(index // 2))


PHOTON_BASIS = tuple(PhotonBasis.from_index(i) for i in range(4))


class Dof(enum.Enum):
    POLARIZATION = "polarization"
    SPATIAL = "spatial"


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


class Sign(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


class BellKind(enum.Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"

    @property
    def parity(self) -> Parity:
        return Parity.EVEN if self in (BellKind.PHI_PLUS, BellKind.PHI_MINUS) else Parity.ODD

    @property
    def sign(self) -> Sign:
        return Sign.PLUS if self in (BellKind.PHI_PLUS, BellKind.PSI_PLUS) else Sign.MINUS

    @classmethod
    def from_bits(cls, parity: Parity, sign: Sign) -> "BellKind":
        return _KIND_FROM_BITS[(parity, sign)]

    def vector(self) -> np.ndarray:
        """Two-qubit amplitudes indexed ``2 * q_first + q_second``."""
        return _BELL_VECTORS[self].copy()


_KIND_FROM_BITS = {(k.parity, k.sign): k for k in BellKind}

_BELL_VECTORS = {
    BellKind.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) * _SQRT1_2,
    BellKind.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) * _SQRT1_2,
    BellKind.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) * _SQRT1_2,
    BellKind.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) * _SQRT1_2,
}


@dataclass(frozen=True)
class BellLabel:
    dof: Dof
    kind: BellKind


@dataclass(frozen=True)
class HyperBellLabel:
    pol: BellKind
    spat: BellKind

    def __str__(self) -> str:
        return f"{self.pol.value}_P/{self.spat.value}_S"

    @classmethod
    def parse(cls, text: str) -> "HyperBellLabel":
        pol, spat = text.split("/")
        return cls(BellKind(pol.removesuffix("_P")), BellKind(spat.removesuffix("_S")))


ALL_HYPER_LABELS = tuple(
    HyperBellLabel(p, s) for p, s in itertools.product(BellKind, BellKind)
)


class PureState:
    """Immutable normalized amplitude vector over ``n_photons`` photons."""

    __slots__ = ("_amps", "_n")

    def __init__(self, amps, n_photons: int | None = None, *, normalize: bool = False):
        amps = np.array(amps, dtype=complex).reshape(-1)
        if n_photons is None:
            n_photons = _photons_for_dim(amps.size)
        if not 1 <= n_photons <= MAX_PHOTONS:
            raise ValueError(f"n_photons must be in 1..{MAX_PHOTONS}, got {n_photons}")
        if amps.size != 4**n_photons:
            raise ValueError(f"expected {4 ** n_photons} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.flags.writeable = False
        self._amps = amps
        self._n = n_photons

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    @property
    def n_photons(self) -> int:
        return self._n

    @property
    def dim(self) -> int:
        return self._amps.size

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of length 4 per photon."""
        return self._amps.reshape((4,) * self._n)

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))

    def __repr__(self) -> str:
        return f"PureState(n_photons={self._n}, amps={self._amps!r})"

    def to_json(self) -> dict:
        return {
            "n_photons": self._n,
            "amps": [[float(a.real), float(a.imag)] for a in self._amps],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PureState":
        amps = [complex(re, im) for re, im in data["amps"]]
        return cls(amps, data["n_photons"])

    @classmethod
    def basis(cls, *labels: PhotonBasis) -> "PureState":
        """Product basis state with one label per photon."""
        amps = np.zeros(4 ** len(labels), dtype=complex)
        amps[_flat_index([lab.index for lab in labels])] = 1
        return cls(amps, len(labels))


def _photons_for_dim(dim: int) -> int:
    n = 0
    while 4**n < dim:
        n += 1
    if 4**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 4")
    return n


def _flat_index(local: Sequence[int]) -> int:
    idx = 0
    for i in local:
        idx = 4 * idx + i
    return idx


@functools.lru_cache(maxsize=None)
def local_labels(n_photons: int) -> np.ndarray:
    """Array of shape ``(4**n, n)`` with each photon's local index per basis index."""
    grid = np.indices((4,) * n_photons).reshape(n_photons, -1).T.copy()
    grid.flags.writeable = False
    return grid


def photon_state(pol: Sequence[complex] = (1, 0), path: Sequence[complex] = (1, 0)) -> PureState:
    """Single photon ``(a|H> + b|V>) (c|path1> + d|path2>)``."""
    return PureState(np.kron(np.asarray(path, complex), np.asarray(pol, complex)), 1)


Partner = Union[BellKind, Sequence[complex], None]


def _two_qubit(partner: Partner) -> np.ndarray:
    if partner is None:
        return BellKind.PHI_PLUS.vector()
    if isinstance(partner, BellKind):
        return partner.vector()
    vec = np.asarray(partner, dtype=complex).reshape(-1)
    if vec.size != 4:
        raise ValueError("a two-photon ket for one degree of freedom needs 4 amplitudes")
    return vec / np.linalg.norm(vec)


def two_photon_state(pol: Partner, spat: Partner) -> PureState:
    """Two-photon product of a polarization ket and a spatial ket.

    Each ket is a :class:`BellKind` or 4 amplitudes indexed
    ``2 * q_first + q_second`` (``|HH>, |HV>, |VH>, |VV>`` and
    ``|11>, |12>, |21>, |22>``).
    """
    p = _two_qubit(pol).reshape(2, 2)
    s = _two_qubit(spat).reshape(2, 2)
    # axes: path_a, pol_a, path_b, pol_b
    amps = np.einsum("ik,jl->jilk", p, s)
    return PureState(amps.reshape(-1), 2)


def make_bell(dof: Dof, kind: BellKind, partner_state: Partner = None) -> PureState:
    """Bell state ``kind`` in ``dof``, tensored with ``partner_state`` in the other dof."""
    if dof is Dof.POLARIZATION:
        return two_photon_state(kind, partner_state)
    return two_photon_state(partner_state, kind)


def hyper_bell(label: HyperBellLabel) -> PureState:
    return two_photon_state(label.pol, label.spat)


def tensor(a: PureState, b: PureState) -> PureState:
    n = a.n_photons + b.n_photons
    if n > MAX_PHOTONS:
        raise ValueError(f"combined photon count {n} exceeds {MAX_PHOTONS}")
    return PureState(np.kron(a.amps, b.amps), n)


def inner(a: PureState, b: PureState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: PureState, b: PureState) -> float:
    return min(1.0, abs(inner(a, b)) ** 2)


def _pair_first(tensor_amps: np.ndarray, pair: tuple[int, int]) -> np.ndarray:
    n = tensor_amps.ndim
    i, j = pair
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"invalid photon pair {pair} for {n} photons")
    return np.moveaxis(tensor_amps, (i, j), (0, 1))


def decompose_in_bell_basis(state: PureState, pair: tuple[int, int] = (0, 1)):
    """Expand ``state`` in the 16 hyper-Bell states of the photons in ``pair``.

    Returns ``[(label, coefficient), ...]`` in :data:`ALL_HYPER_LABELS` order.
    For a two-photon state each coefficient is a complex number. With more
    photons it is the unnormalized amplitude vector of the remaining photons
    (original order kept), so ``sum(|c|^2)`` still equals one.
    """
    if state.n_photons < 2:
        raise ValueError("need at least two photons")
    moved = _pair_first(state.tensor_view(), pair).reshape(16, -1)
    out = []
    for label in ALL_HYPER_LABELS:
        coeff = hyper_bell(label).amps.conj() @ moved
        out.append((label, complex(coeff[0]) if state.n_photons == 2 else coeff))
    return out


def recombine(components, pair: tuple[int, int], n_photons: int) -> PureState:
    """Inverse of :func:`decompose_in_bell_basis`."""
    rest = 4 ** (n_photons - 2)
    acc = np.zeros((16, rest), dtype=complex)
    for label, coeff in components:
        acc += np.outer(hyper_bell(label).amps, np.atleast_1d(coeff))
    moved = acc.reshape((4,) * n_photons)
    return PureState(np.moveaxis(moved, (0, 1), pair).reshape(-1), n_photons, normalize=True)


def bell_weights(state: PureState, pair: tuple[int, int] = (0, 1)) -> dict[HyperBellLabel, float]:
    """Probability of each hyper-Bell outcome on ``pair``."""
    return {
        label: float(np.sum(np.abs(coeff) ** 2))
        for label, coeff in decompose_in_bell_basis(state, pair)
    }


def project_pair(state: PureState, pair: tuple[int, int]) -> list[tuple[float, PureState | None]]:
    """Project ``pair`` onto each of its 16 product basis states.

    Entry ``4 * local_first + local_second`` holds the outcome probability and
    the normalized state of the other photons, or ``None`` when nothing is
    left or the probability vanishes.
    """
    moved = _pair_first(state.tensor_view(), pair).reshape(16, -1)
    probs = np.sum(np.abs(moved) ** 2, axis=1)
    out = []
    for k in range(16):
        prob = float(probs[k])
        if state.n_photons == 2 or prob == 0:
            out.append((prob, None))
        else:
            out.append((prob, PureState(moved[k], state.n_photons - 2, normalize=True)))
    return out
