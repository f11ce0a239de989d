"""Six-dimensional working model on the polarization x path space.

Basis ``|1>..|6>`` is ``|H,p0>, |V,p0>, |H,p1>, |V,p1>, |H,p2>, |V,p2>``, so
the zero-based index is ``2 * path + pol`` with ``pol = 0`` for H. Positions
1-4 hold the half-filled (1,1) sector, positions 5-6 the particle (2,1) or
hole (0,1) sector.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fock
from .linalg import eigensystem

DIM = 6
SECTORS = ("particle", "hole")

BASIS_LABELS = ("H,path0", "V,path0", "H,path1", "V,path1", "H,path2", "V,path2")
FERMION_LABELS = {
    "particle": ("c0u+ c0d+", "c0u+ c1d+", "c0d+ c1u+", "c1u+ c1d+", "c0u+ c1u+ c1d+", "c0u+ c0d+ c1u+"),
    "hole": ("c0u+ c0d+", "c0u+ c1d+", "c0d+ c1u+", "c1u+ c1d+", "c0d+", "c1d+"),
}

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class BasisMap:
    """Optical label and fermionic meaning of each working basis vector."""

    sector: str
    optical: tuple
    fermionic: tuple
    fock_indices: tuple

    def describe(self) -> list[str]:
        return [f"|{i + 1}> = |{o}> <-> {f} |vac>" for i, (o, f) in enumerate(zip(self.optical, self.fermionic))]


def basis_map(sector: str = "particle") -> BasisMap:
    _check_sector(sector)
    extra = (2, 1) if sector == "particle" else (0, 1)
    idx = tuple(fock.sector_indices(1, 1) + fock.sector_indices(*extra))
    return BasisMap(sector, BASIS_LABELS, FERMION_LABELS[sector], idx)


def _check_sector(sector: str) -> None:
    if sector not in SECTORS:
        raise ValueError(f"sector must be 'particle' or 'hole', got {sector!r}")


@dataclass(frozen=True)
class SixObservable:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (DIM, DIM):
            raise ValueError(f"expected a 6x6 matrix, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError(f"observable {self.label!r} is not Hermitian")

    def expectation(self, state) -> float:
        psi = np.asarray(state)
        return float(np.real(np.vdot(psi, self.matrix @ psi)))


@dataclass(frozen=True)
class MeasurementSetting:
    """Basis rotation followed by a computational-basis readout.

    The represented observable is ``rotation^H diag(outcome_values) rotation``;
    outcome ``k`` occurs with probability ``|<k|rotation|psi>|^2``.
    """

    rotation: np.ndarray
    outcome_values: np.ndarray
    label: str = ""

    def observable(self) -> np.ndarray:
        r = self.rotation
        return r.conj().T @ np.diag(self.outcome_values) @ r

    def probabilities(self, state) -> np.ndarray:
        return np.abs(self.rotation @ np.asarray(state)) ** 2


def six_dim_matrix(t: float, U: float, sector: str = "particle") -> np.ndarray:
    """The working Hamiltonian without argument validation.

    The hole block carries ``-t`` off the diagonal: that is what the (0,1)
    basis ``{c0d+, c1d+}|vac>`` gives under the fixed mode ordering.
    """
    _check_sector(sector)
    off = t if sector == "particle" else -t
    return np.array(
        [
            [0.0, -t, t, 0.0, 0.0, 0.0],
            [-t, -U, 0.0, -t, 0.0, 0.0],
            [t, 0.0, -U, t, 0.0, 0.0],
            [0.0, -t, t, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -U / 2, off],
            [0.0, 0.0, 0.0, 0.0, off, -U / 2],
        ]
    )


def build_six_dim(t: float, U: float, sector: str = "particle") -> SixObservable:
    if not t > 0:
        raise ValueError(f"hopping t must be positive, got {t}")
    return SixObservable(six_dim_matrix(t, U, sector), f"H_six[{sector}](t={t}, U={U})")


def hamiltonian_terms(t: float, U: float, sector: str = "particle") -> list[tuple[str, np.ndarray]]:
    """Three-term split: Z x path hopping, X x path weights, diagonal part."""
    _check_sector(sector)
    p01 = np.zeros((3, 3))
    p01[0, 1] = p01[1, 0] = 1.0
    p2 = 1.0 if sector == "particle" else -1.0
    weights = np.diag([-1.0, 1.0, p2])
    # path is the slow index, polarization the fast one
    zterm = t * np.kron(p01, _PAULI_Z)
    xterm = t * np.kron(weights, _PAULI_X)
    diag = np.diag([0.0, -U, -U, 0.0, -U / 2, -U / 2])
    return [("Z(x)hop01", zterm), ("X(x)weights", xterm), ("diagonal", diag)]


@lru_cache(maxsize=64)
def _settings_cached(t: float, U: float, sector: str) -> tuple:
    out = []
    for label, term in hamiltonian_terms(t, U, sector):
        if label == "diagonal":
            rot, vals = np.eye(DIM), np.diag(term).copy()
        else:
            es = eigensystem(term)
            rot, vals = es.eigenvectors.conj().T, es.eigenvalues
            # exact zeros read cleaner in the outcome tables
            vals = np.where(np.abs(vals) < 1e-14, 0.0, vals)
        rot.setflags(write=False)
        vals.setflags(write=False)
        out.append(MeasurementSetting(rot, vals, label))
    return tuple(out)


def hamiltonian_settings(t: float, U: float, sector: str = "particle") -> list[MeasurementSetting]:
    """Measurement settings whose observables sum to the working Hamiltonian."""
    return list(_settings_cached(float(t), float(U), sector))


def reconstruct(settings) -> np.ndarray:
    return sum(s.observable() for s in settings)


@lru_cache(maxsize=8)
def _momentum_block(k: str, kind: str) -> np.ndarray:
    op = fock.momentum_operator(k, kind)
    target = (2, 1) if kind == "create" else (0, 1)
    block = fock.project(op, fock.sector_indices(*target), fock.sector_indices(1, 1))
    block.setflags(write=False)
    return block


def momentum_creation_block(k) -> np.ndarray:
    """2x4 matrix of ``c~^+_{k,up}`` from the (1,1) basis to the (2,1) basis."""
    return _momentum_block(fock.momentum_label(k), "create").copy()


def momentum_annihilation_block(k) -> np.ndarray:
    """2x4 matrix of ``c~_{k,up}`` from the (1,1) basis to the (0,1) basis."""
    return _momentum_block(fock.momentum_label(k), "annihilate").copy()


def transition_block(k, sector: str = "particle") -> np.ndarray:
    _check_sector(sector)
    return momentum_creation_block(k) if sector == "particle" else momentum_annihilation_block(k)
