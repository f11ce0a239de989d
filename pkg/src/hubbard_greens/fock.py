"""Exact two-site Hubbard model on the full 16-dimensional Fock space.

This is the ground-truth side of the package. Everything here is built from
explicit fermionic operator matrices and diagonalized with the Jacobi solver,
and nothing here depends on the six-dimensional working model.

Mode ordering is fixed to ``(site0 up, site0 down, site1 up, site1 down)``,
modes 0..3. A Fock basis index encodes occupations as a 4-bit string read
left to right in mode order, i.e. ``index = sum_m n_m * 2**(3 - m)``; the
vacuum is index 0 and ``c0u^+ c0d^+ |vac>`` is ``0b1100 = 12``. A basis
state is the product of creation operators in ascending mode order acting on
the vacuum, which gives the Jordan-Wigner sign ``(-1)**(occupied modes
before m)`` for any operator on mode ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .linalg import eigensystem

N_MODES = 4
DIM = 2**N_MODES
SPINS = ("up", "down")
MOMENTA = ("0", "pi")
POLE_MERGE_TOL = 1e-9


def mode_index(site: int, spin: str) -> int:
    if site not in (0, 1):
        raise ValueError(f"site must be 0 or 1, got {site!r}")
    if spin not in SPINS:
        raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")
    return 2 * site + SPINS.index(spin)


def occupations(index: int) -> tuple[int, ...]:
    """Occupation bits of a Fock index in mode order."""
    if not 0 <= index < DIM:
        raise ValueError(f"Fock index out of range: {index}")
    return tuple((index >> (N_MODES - 1 - m)) & 1 for m in range(N_MODES))


def fock_index(occ) -> int:
    return sum(int(b) << (N_MODES - 1 - m) for m, b in enumerate(occ))


def state_index(*modes: int) -> int:
    """Index of ``c^+_{m1} c^+_{m2} ... |vac>`` for distinct ascending modes."""
    occ = [0] * N_MODES
    for m in modes:
        occ[m] = 1
    return fock_index(occ)


@lru_cache(maxsize=None)
def _mode_operator(mode: int, create: bool) -> np.ndarray:
    mat = np.zeros((DIM, DIM))
    for idx in range(DIM):
        occ = list(occupations(idx))
        if occ[mode] == int(create):
            continue
        sign = -1.0 if sum(occ[:mode]) % 2 else 1.0
        occ[mode] = 1 - occ[mode]
        mat[fock_index(occ), idx] = sign
    mat.setflags(write=False)
    return mat


def fermion_operator(site: int, spin: str, kind: str) -> np.ndarray:
    """16x16 matrix of ``c^+_{site,spin}`` (kind="create") or ``c_{site,spin}``."""
    if kind not in ("create", "annihilate"):
        raise ValueError(f"kind must be 'create' or 'annihilate', got {kind!r}")
    return _mode_operator(mode_index(site, spin), kind == "create").copy()


def number_operator(site: int, spin: str) -> np.ndarray:
    return fermion_operator(site, spin, "create") @ fermion_operator(site, spin, "annihilate")


def total_number(spin: str) -> np.ndarray:
    return number_operator(0, spin) + number_operator(1, spin)


def momentum_sign(k) -> int:
    """+1 for k = 0, -1 for k = pi. Accepts "0", "pi", 0 or numpy.pi."""
    if isinstance(k, str):
        key = k.strip().lower()
        if key in ("0", "k0"):
            return 1
        if key in ("pi", "kpi", "π"):
            return -1
    elif k == 0:
        return 1
    elif np.isclose(float(k), np.pi):
        return -1
    raise ValueError(f"momentum must be 0 or pi, got {k!r}")


def momentum_label(k) -> str:
    return "0" if momentum_sign(k) == 1 else "pi"


def momentum_operator(k, kind: str = "annihilate") -> np.ndarray:
    """``(c_{0,up} + (-1)^{k/pi} c_{1,up}) / sqrt(2)`` or its adjoint."""
    s = momentum_sign(k)
    return (fermion_operator(0, "up", kind) + s * fermion_operator(1, "up", kind)) / np.sqrt(2.0)


def build_hubbard(t: float, U: float) -> np.ndarray:
    """Particle-hole symmetric two-site Hubbard Hamiltonian on the Fock space."""
    if not t > 0:
        raise ValueError(f"hopping t must be positive, got {t}")
    if U < 0:
        raise ValueError(f"interaction U must be non-negative, got {U}")
    h = np.zeros((DIM, DIM))
    for spin in SPINS:
        hop = fermion_operator(0, spin, "create") @ fermion_operator(1, spin, "annihilate")
        h -= t * (hop + hop.T)
    for site in (0, 1):
        h += U * number_operator(site, "up") @ number_operator(site, "down")
        for spin in SPINS:
            h -= 0.5 * U * number_operator(site, spin)
    return h


# explicit basis orderings for the three sectors that matter; any other
# sector is listed in ascending Fock index
_SECTOR_ORDER = {
    (1, 1): [state_index(0, 1), state_index(0, 3), state_index(1, 2), state_index(2, 3)],
    (2, 1): [state_index(0, 2, 3), state_index(0, 1, 2)],
    (0, 1): [state_index(1), state_index(3)],
}


def sector_indices(n_up: int, n_down: int) -> list[int]:
    """Fock indices spanning the sector with fixed up/down electron counts.

    The (1,1), (2,1) and (0,1) sectors follow the working basis order
    ``{c0u c0d, c0u c1d, c0d c1u, c1u c1d}``, ``{c0u c1u c1d, c0u c0d c1u}``
    and ``{c0d, c1d}`` (creation operators acting on the vacuum).
    """
    for name, n in (("n_up", n_up), ("n_down", n_down)):
        if not 0 <= n <= 2:
            raise ValueError(f"{name} must be in [0, 2], got {n}")
    if (n_up, n_down) in _SECTOR_ORDER:
        return list(_SECTOR_ORDER[(n_up, n_down)])
    out = []
    for idx in range(DIM):
        occ = occupations(idx)
        if occ[0] + occ[2] == n_up and occ[1] + occ[3] == n_down:
            out.append(idx)
    return out


def project(matrix: np.ndarray, rows: list[int], cols: list[int] | None = None) -> np.ndarray:
    return matrix[np.ix_(rows, rows if cols is None else cols)]


@dataclass(frozen=True)
class PoleData:
    """One Lehmann pole: excited-state energy and transition weight.

    ``energy`` is the eigenenergy of the particle/hole state, not the pole
    position; use :meth:`position` for the latter.
    """

    sector: str
    k: str
    energy: float
    weight: float
    provenance: str = "exact"
    energy_stderr: float = 0.0
    weight_stderr: float = 0.0

    def position(self, ground_energy: float) -> float:
        if self.sector == "particle":
            return self.energy - ground_energy
        return ground_energy - self.energy


@dataclass(frozen=True)
class SpectrumSeries:
    """Spectral function sampled on an omega grid, one array per momentum."""

    omega_grid: np.ndarray
    values: dict
    eta: float
    poles: tuple
    ground_energy: float
    provenance: str = "exact"
    meta: dict = field(default_factory=dict)


def lorentzian_sum(omega: np.ndarray, positions, weights, eta: float) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    for pos, w in zip(positions, weights):
        out += (w / np.pi) * eta / ((omega - pos) ** 2 + eta**2)
    return out


def _grouped_poles(energies, weights, sector, k):
    poles: list[PoleData] = []
    for e, w in sorted(zip(energies, weights)):
        if poles and abs(e - poles[-1].energy) < POLE_MERGE_TOL:
            last = poles.pop()
            poles.append(PoleData(sector, k, last.energy, last.weight + w))
        else:
            poles.append(PoleData(sector, k, float(e), float(w)))
    return poles


def ground_state(t: float, U: float) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the (1,1) block, vector given on the full Fock space."""
    h = build_hubbard(t, U)
    idx = sector_indices(1, 1)
    es = eigensystem(project(h, idx))
    gs = np.zeros(DIM)
    gs[idx] = es.eigenvectors[:, 0]
    return float(es.eigenvalues[0]), gs


def exact_poles(t: float, U: float, k) -> list[PoleData]:
    """Lehmann poles of the particle (2,1) and hole (0,1) sectors for one momentum."""
    k = momentum_label(k)
    h = build_hubbard(t, U)
    _, gs = ground_state(t, U)
    cdag_gs = momentum_operator(k, "create") @ gs
    c_gs = momentum_operator(k, "annihilate") @ gs
    poles = []
    for sector, (nu, nd), vec in (("particle", (2, 1), cdag_gs), ("hole", (0, 1), c_gs)):
        idx = sector_indices(nu, nd)
        es = eigensystem(project(h, idx))
        amps = es.eigenvectors.conj().T @ vec[idx]
        poles.extend(_grouped_poles(es.eigenvalues, np.abs(amps) ** 2, sector, k))
    return poles


def exact_spectral_function(t: float, U: float, k=None, omega_grid=None, eta: float = 0.1) -> SpectrumSeries:
    """Zero-temperature up-spin spectral function from the full Lehmann sum.

    ``k=None`` evaluates both momenta.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if omega_grid is None:
        omega_grid = np.linspace(-10.0, 10.0, 2001)
    grid = np.asarray(omega_grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("omega grid must be non-empty and strictly ascending")
    e_gs, _ = ground_state(t, U)
    ks = MOMENTA if k is None else (momentum_label(k),)
    values, poles = {}, []
    for kk in ks:
        pk = exact_poles(t, U, kk)
        poles.extend(pk)
        values[kk] = lorentzian_sum(grid, [p.position(e_gs) for p in pk], [p.weight for p in pk], eta)
    return SpectrumSeries(grid, values, float(eta), tuple(poles), e_gs, "exact")


@dataclass(frozen=True)
class SixDimReport:
    sector: str
    max_deviation: float
    flagged: tuple
    projection: np.ndarray
    hole_offdiag_sign: int | None = None

    @property
    def ok(self) -> bool:
        return not self.flagged


def six_dim_projection(t: float, U: float, sector: str = "particle") -> np.ndarray:
    """Fock Hamiltonian projected on (1,1) followed by the (2,1) or (0,1) basis."""
    extra = {"particle": (2, 1), "hole": (0, 1)}[sector]
    idx = sector_indices(1, 1) + sector_indices(*extra)
    return project(build_hubbard(t, U), idx)


def verify_six_dim(t: float, U: float, sector: str = "particle", reference=None, tol: float = 1e-12) -> SixDimReport:
    """Compare the six-dimensional working Hamiltonian with the Fock projection.

    ``reference`` overrides the matrix under test (defaults to the working
    matrix from :mod:`hubbard_greens.sixdim`); entries deviating by more than ``tol`` are
    flagged as ``(row, col, deviation)`` with 1-based indices.
    """
    if reference is None:
        from .sixdim import six_dim_matrix

        reference = six_dim_matrix(t, U, sector)
    # t == 0 is allowed here for the hopping-off limit
    proj = _projection_allow_zero_t(t, U, sector)
    diff = np.abs(np.asarray(reference) - proj)
    flagged = tuple(
        (int(i) + 1, int(j) + 1, float(diff[i, j])) for i, j in zip(*np.nonzero(diff > tol))
    )
    sign = None
    if sector == "hole" and t != 0:
        sign = int(np.sign(proj[4, 5] / t))
    return SixDimReport(sector, float(diff.max()), flagged, proj, sign)


def _projection_allow_zero_t(t, U, sector):
    if t > 0:
        return six_dim_projection(t, U, sector)
    if t != 0:
        raise ValueError(f"hopping t must be non-negative, got {t}")
    # U-only Hamiltonian: scale hopping term away from a t=1 build
    return six_dim_projection(1.0, U, sector) - six_dim_projection(1.0, 0.0, sector)
