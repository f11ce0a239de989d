"""Transition amplitudes and the Lehmann spectral function from VQE states.

The particle sector uses ``c~^+_k`` from the (1,1) block into the (2,1)
block; the hole sector uses ``c~_k`` into the (0,1) block. Each sector has
two states, the VQE minimum ``ES(theta6*)`` and its orthogonal partner
``ES(theta6* + pi)``. For every momentum only the brighter of the two is
kept as a pole; the other is recorded as the dark transition.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .fock import MOMENTA, PoleData, SpectrumSeries, exact_spectral_function, lorentzian_sum, momentum_label
from .photonic import AnsatzParams, ExpectationEstimate, excited_branch, measure_expectation, prepare_ansatz, projector_setting
from .sixdim import DIM, MeasurementSetting, SixObservable, transition_block
from .vqe import VqeConfig, VqeTrace, energy_at, run_vqe

DEFAULT_ETA = 0.1
DEFAULT_GRID = (-10.0, 10.0, 2001)
DARK_TOL = 1e-12


def default_grid() -> np.ndarray:
    lo, hi, n = DEFAULT_GRID
    return np.linspace(lo, hi, n)


@dataclass(frozen=True)
class TransitionProjector:
    observable: SixObservable
    setting: MeasurementSetting
    vector: np.ndarray
    dark: bool


def transition_projector(es_state, k, sector: str = "particle") -> TransitionProjector:
    """Observable ``|v><v|`` with ``v = B^H |ES>`` embedded in the (1,1) block.

    ``B`` is the momentum creation (particle) or annihilation (hole) block,
    so ``<GS|v><v|GS> = |<ES|B|GS>|^2``.
    """
    es = np.asarray(es_state)
    if es.shape != (2,) or abs(np.linalg.norm(es) - 1.0) > 1e-10:
        raise ValueError("es_state must be a normalized 2-vector")
    v4 = transition_block(k, sector).conj().T @ es
    v = np.zeros(DIM, dtype=v4.dtype)
    v[:4] = v4
    label = f"transition[{sector}, k={momentum_label(k)}]"
    dark = float(np.linalg.norm(v)) < DARK_TOL
    if dark:
        v = np.zeros(DIM)
    return TransitionProjector(SixObservable(np.outer(v, v.conj()), label), projector_setting(v, label), v, dark)


def transition_weight_exact(gs_params: AnsatzParams, es_state, k, sector: str = "particle") -> float:
    """Direct inner-product value of ``|<ES|B_k|GS>|^2`` for cross-checks."""
    gs = prepare_ansatz(replace(gs_params, theta1=0.0))[:4]
    return float(abs(np.vdot(np.asarray(es_state), transition_block(k, sector) @ gs)) ** 2)


def measure_transition_amplitude(gs_params: AnsatzParams, es_params, k, shots: int | None = None, seed=None,
                                 sector: str = "particle") -> ExpectationEstimate:
    """Estimate the transition weight with one rotated projective setting.

    ``es_params`` is either an :class:`AnsatzParams` (its theta6 is used) or
    the excited-branch 2-vector itself.
    """
    es = excited_branch(es_params.theta6) if isinstance(es_params, AnsatzParams) else np.asarray(es_params)
    proj = transition_projector(es, k, sector)
    gs = prepare_ansatz(replace(gs_params, theta1=0.0))
    return measure_expectation(gs, [proj.setting], shots, seed)


@dataclass(frozen=True)
class SectorStates:
    """Both states of one two-dimensional sector with their measured energies."""

    sector: str
    trace: VqeTrace | None
    params: tuple
    energies: tuple
    weights: dict = field(default_factory=dict)
    dark: tuple = ()


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def _rng_streams(seed, n):
    return [np.random.default_rng(s) for s in _seed_sequence(seed).spawn(n)]


def weight_param_stderr(gs_params: AnsatzParams, es_params: AnsatzParams, k, sector: str, param_stderr: dict,
                        h: float = 1e-6) -> float:
    """Weight uncertainty inherited from the optimized angles.

    Linear propagation of per-angle standard errors through the ansatz map,
    using central differences of the exact inner-product weight.
    """
    var = 0.0
    for name, sig in param_stderr.items():
        if not sig:
            continue
        vals = []
        for d in (h, -h):
            g, e = gs_params, es_params
            if name == "theta6":
                e = e.with_value(name, e.theta6 + d)
            else:
                g = g.with_value(name, getattr(g, name) + d)
            vals.append(transition_weight_exact(g, excited_branch(e.theta6), k, sector))
        var += ((vals[0] - vals[1]) / (2 * h) * sig) ** 2
    return float(np.sqrt(var))


def sector_poles(gs_params: AnsatzParams, sector: str, shots: int | None = None, seed=None, *, t: float = 1.0,
                 U: float = 6.0, es_init: AnsatzParams | None = None, tol: float | None = None,
                 max_sweeps: int = 50, gs_param_stderr: dict | None = None, guard_factor: float = 10.0) -> tuple[list[PoleData], SectorStates]:
    """Excited-sector VQE plus transition measurements for one sector.

    Reported weight errors combine the shot noise of the transition
    measurement with the propagated uncertainty of the ground angles
    (``gs_param_stderr``) and of the optimized theta6.
    """
    vqe_rng, e_rng, w_rng = _rng_streams(seed, 3)
    init = es_init if es_init is not None else gs_params
    cfg = VqeConfig(sector="excited", initial_params=init, shots_per_setting=shots, convergence_rel_tol=tol,
                    max_sweeps=max_sweeps, seed=None, t=t, U=U, variant=sector, guard_factor=guard_factor)
    trace = _run_with_rng(cfg, vqe_rng)
    low = trace.final_params
    high = low.with_value("theta6", low.theta6 + np.pi)
    e_low = ExpectationEstimate(trace.final_energy, trace.final_stderr, shots, "exact" if shots is None else "sampled")
    e_high = energy_at(high, shots, e_rng, t=t, U=U, variant=sector)

    weights, poles, dark = {}, [], []
    for k in MOMENTA:
        ws = [measure_transition_amplitude(gs_params, p, k, shots, w_rng, sector) for p in (low, high)]
        weights[k] = tuple(ws)
        bright = int(np.argmax([w.value for w in ws]))
        e = (e_low, e_high)[bright]
        w = ws[bright]
        w_err = w.stderr
        if shots is not None:
            angle_err = {**(gs_param_stderr or {}), "theta6": trace.param_stderr.get("theta6", 0.0)}
            w_err = float(np.hypot(w_err, weight_param_stderr(gs_params, (low, high)[bright], k, sector, angle_err)))
        poles.append(PoleData(sector, k, e.value, w.value, "vqe", e.stderr, w_err))
        dark.append((k, ("low", "high")[1 - bright], ws[1 - bright].value))
    states = SectorStates(sector, trace, (low, high), (e_low, e_high), weights, tuple(dark))
    return poles, states


def _run_with_rng(cfg: VqeConfig, rng: np.random.Generator) -> VqeTrace:
    # run_vqe seeds its own generator; hand it a derived integer seed
    return run_vqe(replace(cfg, seed=int(rng.integers(2**63))))


def mirror_poles(particle_poles) -> list[PoleData]:
    """Hole poles from particle poles: k -> k + pi, omega -> -omega, same weight.

    With a symmetric spectrum the hole eigenenergy equals the particle one,
    which flips the pole position about zero.
    """
    out = []
    for p in particle_poles:
        k = "pi" if p.k == "0" else "0"
        out.append(PoleData("hole", k, p.energy, p.weight, p.provenance, p.energy_stderr, p.weight_stderr))
    return sorted(out, key=lambda q: MOMENTA.index(q.k))


def hole_part(gs_params: AnsatzParams, shots: int | None = None, seed=None, method: str = "direct", *,
              particle_poles=None, **kw) -> list[PoleData]:
    if method == "direct":
        return sector_poles(gs_params, "hole", shots, seed, **kw)[0]
    if method == "mirror":
        if particle_poles is None:
            particle_poles = sector_poles(gs_params, "particle", shots, seed, **kw)[0]
        return mirror_poles(particle_poles)
    raise ValueError(f"method must be 'direct' or 'mirror', got {method!r}")


def spectral_function(poles, ground_energy: float, omega_grid=None, eta: float = DEFAULT_ETA,
                      provenance: str = "vqe") -> SpectrumSeries:
    """Lorentzian-broadened spectral function for both momenta."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    grid = default_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("omega grid must be non-empty and strictly ascending")
    values = {}
    for k in MOMENTA:
        pk = [p for p in poles if p.k == k]
        # clip: sampled weights can dip below zero by noise
        values[k] = lorentzian_sum(grid, [p.position(ground_energy) for p in pk],
                                   [max(p.weight, 0.0) for p in pk], eta)
    return SpectrumSeries(grid, values, float(eta), tuple(poles), float(ground_energy), provenance)


def propagate_spectrum_error(poles, ground_energy: float, ground_stderr: float, omega_grid, eta: float,
                             n_draws: int = 400, seed=None) -> dict:
    """Pointwise standard deviation of the spectrum under Gaussian input errors.

    Pole energies, weights and the ground energy are drawn independently
    from their estimates and standard errors; the spread of the resulting
    curves keeps the second-order shift of a sharp peak that linear
    propagation would miss at the peak centre.
    """
    rng = np.random.default_rng(seed)
    grid = np.asarray(omega_grid, dtype=float)
    out = {}
    for k in MOMENTA:
        pk = [p for p in poles if p.k == k]
        draws = np.empty((n_draws, grid.size))
        for i in range(n_draws):
            eg = ground_energy + ground_stderr * rng.standard_normal()
            pos, ws = [], []
            for p in pk:
                e = p.energy + p.energy_stderr * rng.standard_normal()
                pos.append(e - eg if p.sector == "particle" else eg - e)
                ws.append(max(p.weight + p.weight_stderr * rng.standard_normal(), 0.0))
            draws[i] = lorentzian_sum(grid, pos, ws, eta)
        out[k] = draws.std(axis=0)
    return out


@dataclass
class PipelineResult:
    ground: VqeTrace
    particle: SectorStates
    hole: SectorStates | None
    poles: list
    mirror: list
    spectrum: SpectrumSeries
    exact: SpectrumSeries
    sigma: dict | None
    hole_method: str

    @property
    def ground_energy(self) -> float:
        return self.ground.final_energy

    def max_relative_deviation(self) -> float:
        """Largest |A_vqe - A_exact| on the grid over the exact peak height."""
        peak = max(float(v.max()) for v in self.exact.values.values())
        dev = max(float(np.max(np.abs(self.spectrum.values[k] - self.exact.values[k]))) for k in MOMENTA)
        return dev / peak

    def within_sigma_fraction(self, n_sigma: float = 3.0) -> float:
        if self.sigma is None:
            raise ValueError("no propagated errors for an exact run")
        ok, total = 0, 0
        for k in MOMENTA:
            diff = np.abs(self.spectrum.values[k] - self.exact.values[k])
            ok += int(np.sum(diff <= n_sigma * self.sigma[k] + 1e-12))
            total += diff.size
        return ok / total

    def sum_rules(self) -> dict:
        return {k: sum(p.weight for p in self.poles if p.k == k) for k in MOMENTA}

    @property
    def converged(self) -> bool:
        traces = [self.ground, self.particle.trace] + ([self.hole.trace] if self.hole else [])
        return all(tr.converged for tr in traces)


def vqe_spectrum(t: float = 1.0, U: float = 6.0, shots: int | None = None, seed=None,
                 initial_params: AnsatzParams | None = None, eta: float = DEFAULT_ETA, omega_grid=None,
                 hole_method: str = "direct", tol: float | None = None, max_sweeps: int = 50,
                 n_error_draws: int = 400, guard_factor: float = 10.0) -> PipelineResult:
    """Full pipeline: ground VQE, both excited sectors, transitions, spectrum.

    Runs of non-converged VQE stages still produce a spectrum from the best
    parameters found; check :attr:`PipelineResult.converged`.
    """
    from .vqe import preset_params

    grid = default_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    init = initial_params if initial_params is not None else preset_params("preset1")
    gs_seed, p_seed, h_seed, err_seed = _seed_sequence(seed).spawn(4)
    gs_cfg = VqeConfig("ground", init, shots, tol, max_sweeps, int(np.random.default_rng(gs_seed).integers(2**63)), t, U,
                       guard_factor=guard_factor)
    gs_trace = run_vqe(gs_cfg)
    gs_params = gs_trace.final_params
    kw = dict(t=t, U=U, es_init=init, tol=tol, max_sweeps=max_sweeps, gs_param_stderr=gs_trace.param_stderr,
              guard_factor=guard_factor)

    p_poles, p_states = sector_poles(gs_params, "particle", shots, p_seed, **kw)
    mirrored = mirror_poles(p_poles)
    h_states = None
    if hole_method == "direct":
        h_poles, h_states = sector_poles(gs_params, "hole", shots, h_seed, **kw)
    elif hole_method == "mirror":
        h_poles = mirrored
    else:
        raise ValueError(f"hole_method must be 'direct' or 'mirror', got {hole_method!r}")

    poles = p_poles + h_poles
    e_gs = gs_trace.final_energy
    spectrum = spectral_function(poles, e_gs, grid, eta)
    exact = exact_spectral_function(t, U, None, grid, eta)
    sigma = None
    if shots is not None:
        sigma = propagate_spectrum_error(poles, e_gs, gs_trace.final_stderr, grid, eta, n_error_draws, err_seed)
    return PipelineResult(gs_trace, p_states, h_states, poles, mirrored, spectrum, exact, sigma, hole_method)
