"""Small dense Hermitian eigensolver (cyclic Jacobi).

The matrices handled by this package are at most 16x16, so a plain cyclic
Jacobi sweep is fast enough and gives fully deterministic output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OFF_DIAGONAL_TOL = 1e-13
MAX_SWEEPS = 100
HERMITIAN_TOL = 1e-10


class NotHermitianError(ValueError):
    """Raised when a matrix handed to :func:`eigensystem` is not Hermitian."""

    def __init__(self, asymmetry: float):
        super().__init__(f"matrix is not Hermitian: max |A - A^H| = {asymmetry:.3e}")
        self.asymmetry = asymmetry


class JacobiConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        return iter((self.eigenvalues, self.eigenvectors))

    def residual(self, matrix: np.ndarray) -> float:
        """Largest ``||H v - lambda v||`` over all eigenpairs."""
        r = matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return float(np.max(np.linalg.norm(r, axis=0))) if r.size else 0.0


def _off_norm(a: np.ndarray) -> float:
    # sum only off-diagonal entries; total minus diagonal cancels catastrophically
    off = a[~np.eye(a.shape[0], dtype=bool)]
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    # make the first largest-magnitude component of each column real positive
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        i = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        out[:, j] = col * (np.conj(col[i]) / mags[i])
    return out


def eigensystem(matrix, *, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS) -> EigenSystem:
    """Diagonalize a small Hermitian matrix with cyclic Jacobi rotations.

    Complex pivots are first rotated onto the real axis by a diagonal phase,
    then annihilated with a real Givens rotation. Iteration stops once the
    off-diagonal Frobenius norm drops below ``tol * max(1, ||A||_F)``.

    Args:
        matrix: Square Hermitian array (real or complex).
        tol: Relative off-diagonal threshold.
        max_sweeps: Sweep budget before :class:`JacobiConvergenceError`.

    Returns:
        EigenSystem with eigenvalues ascending. Eigenvectors are real when the
        input is real.
    """
    a = np.array(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if asym > HERMITIAN_TOL:
        raise NotHermitianError(asym)

    is_complex = np.iscomplexobj(a) and np.any(a.imag != 0)
    dtype = complex if is_complex else float
    a = 0.5 * (a + a.conj().T)
    a = a.astype(dtype) if is_complex else a.real.astype(float)
    n = a.shape[0]
    v = np.eye(n, dtype=dtype)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    for _ in range(max_sweeps + 1):
        if _off_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                if is_complex:
                    phase = np.conj(apq) / abs(apq)
                    a[:, q] *= phase
                    a[q, :] *= np.conj(phase)
                    v[:, q] *= phase
                    apq = a[p, q].real
                theta = (a[q, q].real - a[p, p].real) / (2.0 * apq)
                if abs(theta) > 1e150:
                    # pivot negligible against the diagonal gap
                    a[p, q] = a[q, p] = 0.0
                    continue
                tan = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(tan * tan + 1.0)
                s = tan * c
                rot = np.array([[c, s], [-s, c]])
                a[:, [p, q]] = a[:, [p, q]] @ rot
                a[[p, q], :] = rot.T @ a[[p, q], :]
                a[p, q] = a[q, p] = 0.0
                v[:, [p, q]] = v[:, [p, q]] @ rot
    else:
        raise JacobiConvergenceError(f"Jacobi did not converge within {max_sweeps} sweeps")

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return EigenSystem(w[order], _fix_phase(v[:, order]))


def unitary_deviation(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))
