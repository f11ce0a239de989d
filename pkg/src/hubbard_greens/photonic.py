"""Single-photon ansatz preparation and shot-sampled readout.

States live on the six-mode polarization x path space of
:mod:`hubbard_greens.sixdim`. Sampling draws one multinomial per
measurement setting; nothing else about the detectors is modelled.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .sixdim import DIM, MeasurementSetting

PARAM_NAMES = ("theta1", "theta2", "theta4", "theta5", "theta6")
DEFAULT_SHOTS = 10_000


@dataclass(frozen=True)
class AnsatzParams:
    """Rotation angles in radians. There is no theta3."""

    theta1: float = 0.0
    theta2: float = 0.0
    theta4: float = 0.0
    theta5: float = 0.0
    theta6: float = 0.0

    def __post_init__(self):
        for name in PARAM_NAMES:
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def with_value(self, name: str, value: float) -> "AnsatzParams":
        return replace(self, **{name: float(value)})

    def as_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in PARAM_NAMES}


@dataclass(frozen=True)
class ExpectationEstimate:
    value: float
    stderr: float
    shots_used: int | None
    mode: str

    def __post_init__(self):
        if self.mode == "exact" and self.stderr != 0.0:
            raise ValueError("exact estimates carry no standard error")


def ry(theta: float) -> np.ndarray:
    """cos(theta/2)(|H><H| + |V><V|) + sin(theta/2)(|H><V| - |V><H|)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, s], [-s, c]])


def ground_branch(theta2: float, theta4: float, theta5: float) -> np.ndarray:
    c2, s2 = np.cos(theta2 / 2), np.sin(theta2 / 2)
    return np.array(
        [
            c2 * np.cos(theta4 / 2),
            -c2 * np.sin(theta4 / 2),
            -s2 * np.sin(theta5 / 2),
            -s2 * np.cos(theta5 / 2),
        ]
    )


def excited_branch(theta6: float) -> np.ndarray:
    return np.array([np.sin(theta6 / 2), np.cos(theta6 / 2)])


def prepare_ansatz(params: AnsatzParams) -> np.ndarray:
    """Closed-form ansatz ``cos(t1/2)|GS(t2,t4,t5)> - sin(t1/2)|ES(t6)>``."""
    psi = np.zeros(DIM)
    psi[:4] = np.cos(params.theta1 / 2) * ground_branch(params.theta2, params.theta4, params.theta5)
    psi[4:] = -np.sin(params.theta1 / 2) * excited_branch(params.theta6)
    return psi


# -- element-level optics ----------------------------------------------------


def plate(theta: float, path: int) -> np.ndarray:
    """Rotation plate acting on the polarization of one path only."""
    u = np.eye(DIM)
    sl = slice(2 * path, 2 * path + 2)
    u[sl, sl] = ry(theta)
    return u


def beam_displacer() -> np.ndarray:
    """H shifts from path j to path j-1, V stays put.

    H on path 0 leaves the three-path window; it is routed back to path 2 so
    the element stays a permutation. The layout below never feeds light into
    that port.
    """
    u = np.zeros((DIM, DIM))
    for path in range(3):
        u[2 * path + 1, 2 * path + 1] = 1.0
        u[2 * ((path - 1) % 3), 2 * path] = 1.0
    return u


INPUT_MODE = 4  # |H, path2>


def element_sequence(params: AnsatzParams) -> list[tuple[str, np.ndarray]]:
    """Ordered optical elements that build the ansatz from ``|H, path2>``.

    The theta1 plate splits the photon between the ground branch (H, sent
    up to path 1 by the first displacer) and the excited branch (V, stays
    on path 2). The theta2 plate then splits the ground branch between
    paths 0 and 1 at the second displacer, and the last three plates set
    the polarization on each path.
    """
    return [
        ("RY(theta1) @ path2", plate(params.theta1, 2)),
        ("BD1", beam_displacer()),
        ("RY(theta2) @ path1", plate(params.theta2, 1)),
        ("BD2", beam_displacer()),
        ("RY(theta4) @ path0", plate(params.theta4, 0)),
        ("RY(theta5) @ path1", plate(params.theta5, 1)),
        ("RY(theta6) @ path2", plate(params.theta6, 2)),
    ]


def prepare_ansatz_via_elements(params: AnsatzParams, return_trace: bool = False):
    psi = np.zeros(DIM)
    psi[INPUT_MODE] = 1.0
    trace = [("input", psi.copy())]
    for label, u in element_sequence(params):
        psi = u @ psi
        trace.append((label, psi.copy()))
    return (psi, trace) if return_trace else psi


def phase_distance(a, b) -> float:
    """``1 - |<a|b>|`` for normalized vectors: zero iff equal up to phase."""
    return float(1.0 - abs(np.vdot(a, b)))


def check_element_layout(n_samples: int = 100, seed: int = 0, tol: float = 1e-12) -> float:
    """Max deviation between element-level and closed-form preparation.

    Raises RuntimeError when the layout fails to reproduce the closed form.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        p = AnsatzParams(*rng.uniform(-2 * np.pi, 2 * np.pi, size=5))
        a, b = prepare_ansatz(p), prepare_ansatz_via_elements(p)
        phase = np.vdot(b, a)
        phase = phase / abs(phase) if abs(phase) > 0 else 1.0
        worst = max(worst, float(np.max(np.abs(a - phase * b))))
    if worst > tol:
        raise RuntimeError(f"optical element layout is inconsistent with the ansatz (deviation {worst:.3e})")
    return worst


# -- sampling ----------------------------------------------------------------


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_counts(probabilities, shots: int, seed=None) -> np.ndarray:
    """Multinomial photon counts over the six detector outcomes."""
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (DIM,) or np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-10:
        raise ValueError(f"invalid probability vector: {p}")
    if int(shots) < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = np.clip(p, 0.0, None)
    return _as_rng(seed).multinomial(int(shots), p / p.sum())


def measure_expectation(state, settings, shots: int | None = None, seed=None) -> ExpectationEstimate:
    """Estimate ``sum_s <psi|O_s|psi>`` over measurement settings.

    ``shots=None`` returns the exact value. Otherwise each setting is read
    out with ``shots`` photons and the standard error comes from the
    multinomial variance of the sampled frequencies.
    """
    psi = np.asarray(state)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("state must be normalized")
    if shots is None:
        value = sum(float(s.outcome_values @ s.probabilities(psi)) for s in settings)
        return ExpectationEstimate(value, 0.0, None, "exact")
    if int(shots) < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    rng = _as_rng(seed)
    value, var = 0.0, 0.0
    for s in settings:
        freq = sample_counts(s.probabilities(psi), shots, rng) / shots
        d = s.outcome_values
        mean = float(d @ freq)
        value += mean
        var += max(float((d * d) @ freq) - mean * mean, 0.0) / shots
    return ExpectationEstimate(value, float(np.sqrt(var)), int(shots), "sampled")


def projector_setting(vector, label: str = "projector") -> MeasurementSetting:
    """Single setting measuring ``|v><v|``: the rotation sends ``v/|v|`` to ``|1>``.

    Built from a Householder reflection, so it is Hermitian and unitary.
    """
    v = np.asarray(vector, dtype=complex)
    norm = float(np.linalg.norm(v))
    values = np.zeros(DIM)
    if norm < 1e-12:
        return MeasurementSetting(np.eye(DIM), values, label)
    u = v / norm
    phase = u[0] / abs(u[0]) if abs(u[0]) > 1e-15 else 1.0
    w = u - phase * np.eye(DIM)[0]
    wn = np.linalg.norm(w)
    if wn < 1e-15:
        rot = np.eye(DIM, dtype=complex) * np.conj(phase)
    else:
        w = w / wn
        rot = (np.eye(DIM) - 2.0 * np.outer(w, w.conj())) * np.conj(phase)
    if np.all(np.abs(rot.imag) < 1e-15):
        rot = rot.real
    values[0] = norm**2
    return MeasurementSetting(rot, values, label)
