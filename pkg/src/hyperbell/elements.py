"""Single-photon linear-optical operations.

Every element is a 4x4 unitary on one photon's (path, polarization) space,
built as ``kron(path_op, pol_op)`` to match the local index ``2*path + pol``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import PureState, SpatialPath

UNITARY_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |H><V| - |V><H|
_MINUS_I_Y = np.array([[0, 1], [-1, 0]], dtype=complex)


@dataclass(frozen=True)
class LocalUnitary:
    name: str
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"{self.name}: expected a 4x4 matrix, got {m.shape}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(4)))
        if err > UNITARY_TOL:
            raise ValueError(f"{self.name}: matrix is not unitary (max error {err:.2e})")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def then(self, other: "LocalUnitary") -> "LocalUnitary":
        """Apply ``self`` first, ``other`` second."""
        return LocalUnitary(f"{self.name};{other.name}", other.matrix @ self.matrix)


def pol_unitary(u2, name: str) -> LocalUnitary:
    """Lift a 2x2 polarization operator to the photon space (identity on path)."""
    return LocalUnitary(name, np.kron(_I2, np.asarray(u2, dtype=complex)))


def path_unitary(u2, name: str) -> LocalUnitary:
    """Lift a 2x2 path operator to the photon space (identity on polarization)."""
    return LocalUnitary(name, np.kron(np.asarray(u2, dtype=complex), _I2))


def identity() -> LocalUnitary:
    return LocalUnitary("identity", np.eye(4))


def beam_splitter() -> LocalUnitary:
    """50:50 beam splitter: path1 -> (1 + 2)/sqrt2, path2 -> (1 - 2)/sqrt2."""
    return path_unitary(_HADAMARD, "beam_splitter")


def r45_waveplate() -> LocalUnitary:
    """45 degree rotation: H -> (H + V)/sqrt2, V -> (H - V)/sqrt2."""
    return pol_unitary(_HADAMARD, "r45")


def pbs() -> LocalUnitary:
    """Polarizing beam splitter: H keeps its rail, V swaps rails."""
    perm = np.zeros((4, 4), dtype=complex)
    for path in (0, 1):
        perm[2 * path + 0, 2 * path + 0] = 1
        perm[2 * (1 - path) + 1, 2 * path + 1] = 1
    return LocalUnitary("pbs", perm)


def phase_on_path(target: SpatialPath, phase: float) -> LocalUnitary:
    diag = np.ones(2, dtype=complex)
    diag[int(target)] = np.exp(1j * phase)
    return path_unitary(np.diag(diag), f"phase({SpatialPath(target).name.lower()},{phase:g})")


def mode_swap() -> LocalUnitary:
    return path_unitary(_X, "mode_swap")


def sigma_x() -> LocalUnitary:
    return pol_unitary(_X, "sigma_x")


def sigma_z() -> LocalUnitary:
    return pol_unitary(_Z, "sigma_z")


def minus_i_sigma_y() -> LocalUnitary:
    return pol_unitary(_MINUS_I_Y, "minus_i_sigma_y")


def apply(state: PureState, u: LocalUnitary, photon: int) -> PureState:
    """Apply ``u`` to one photon of ``state``."""
    n = state.n_photons
    if not 0 <= photon < n:
        raise IndexError(f"photon index {photon} out of range for {n} photons")
    t = np.tensordot(u.matrix, state.tensor_view(), axes=([1], [photon]))
    t = np.moveaxis(t, 0, photon)
    return PureState(t.reshape(-1), n)


def apply_many(state: PureState, ops, photon: int) -> PureState:
    for u in ops:
        state = apply(state, u, photon)
    return state


def random_unitary(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Haar-random ``dim x dim`` unitary."""
    from scipy.stats import unitary_group

    return unitary_group.rvs(dim, random_state=rng)
