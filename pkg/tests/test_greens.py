import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hubbard_greens.fock import PoleData, exact_spectral_function
from hubbard_greens.greens import (
    default_grid,
    hole_part,
    measure_transition_amplitude,
    mirror_poles,
    propagate_spectrum_error,
    sector_poles,
    spectral_function,
    transition_projector,
    transition_weight_exact,
    vqe_spectrum,
)
from hubbard_greens.photonic import AnsatzParams, excited_branch
from hubbard_greens.sixdim import six_dim_matrix
from hubbard_greens.vqe import VqeConfig, preset_params, run_vqe

from . import oracle


@pytest.fixture(scope="module")
def gs_params():
    return run_vqe(VqeConfig("ground", preset_params("preset1"), shots_per_setting=None)).final_params


@pytest.fixture(scope="module")
def exact_run():
    return vqe_spectrum(shots=None)


@pytest.fixture(scope="module")
def sampled_run():
    return vqe_spectrum(shots=10_000, seed=3)


def test_default_grid():
    g = default_grid()
    assert g.size == 2001 and g[0] == -10.0 and g[-1] == 10.0


def test_projector_vector_and_validation():
    from hubbard_greens.sixdim import momentum_creation_block

    es = np.array([1.0, 1.0]) / np.sqrt(2)
    proj = transition_projector(es, "0")
    assert not proj.dark
    assert np.allclose(proj.vector[:4], momentum_creation_block("0").T @ es)
    assert not np.any(proj.vector[4:])
    assert np.allclose(proj.setting.observable(), proj.observable.matrix, atol=1e-12)
    with pytest.raises(ValueError):
        transition_projector(np.array([1.0, 1.0]), "0")


@pytest.mark.parametrize("sector", ["particle", "hole"])
@pytest.mark.parametrize("k", ["0", "pi"])
def test_exact_transition_weights_match_oracle(gs_params, sector, k):
    block = six_dim_matrix(1.0, 6.0, sector)[4:, 4:]
    vals, vecs = np.linalg.eigh(block)
    ref = oracle.poles(1.0, 6.0)
    eg = oracle.E_GS_U6
    total = 0.0
    for e, v in zip(vals, vecs.T):
        w = measure_transition_amplitude(gs_params, v, k, sector=sector).value
        total += w
        omega = e - eg if sector == "particle" else eg - e
        expect_omega, expect_w = ref[(sector, k)]
        if abs(omega - expect_omega) < 1e-9:
            assert w == pytest.approx(expect_w, abs=1e-10)
        else:
            assert w == pytest.approx(0.0, abs=1e-10)
        assert w == pytest.approx(transition_weight_exact(gs_params, v, k, sector), abs=1e-12)
    assert total == pytest.approx(ref[(sector, k)][1], abs=1e-10)


def test_sampled_transition_amplitude_is_reproducible(gs_params):
    es = excited_branch(-np.pi / 2)
    a = measure_transition_amplitude(gs_params, es, "pi", 5000, seed=2)
    b = measure_transition_amplitude(gs_params, es, "pi", 5000, seed=2)
    assert a == b
    assert abs(a.value - oracle.BRIGHT_W_U6) < 5 * a.stderr


def test_sector_poles_exact(gs_params):
    poles, states = sector_poles(gs_params, "particle", es_init=preset_params("preset1"))
    eg = oracle.E_GS_U6
    got = {p.k: p for p in poles}
    assert got["pi"].position(eg) == pytest.approx(oracle.BRIGHT_OMEGA_U6, abs=1e-10)
    assert got["0"].position(eg) == pytest.approx(oracle.SUB_OMEGA_U6, abs=1e-10)
    assert got["pi"].weight == pytest.approx(oracle.BRIGHT_W_U6, abs=1e-10)
    assert got["0"].weight == pytest.approx(oracle.SUB_W_U6, abs=1e-10)
    assert states.energies[0].value == pytest.approx(-4.0, abs=1e-12)
    assert states.energies[1].value == pytest.approx(-2.0, abs=1e-12)
    assert all(w < 1e-10 for _, _, w in states.dark)


def test_mirror_matches_direct_hole(gs_params):
    kw = dict(es_init=preset_params("preset1"))
    particle = sector_poles(gs_params, "particle", **kw)[0]
    direct = hole_part(gs_params, **kw)
    mirrored = hole_part(gs_params, method="mirror", particle_poles=particle)
    for d, m in zip(sorted(direct, key=lambda p: p.k), sorted(mirrored, key=lambda p: p.k)):
        assert (d.k, d.sector) == (m.k, m.sector)
        assert d.energy == pytest.approx(m.energy, abs=1e-10)
        assert d.weight == pytest.approx(m.weight, abs=1e-10)
    with pytest.raises(ValueError):
        hole_part(gs_params, method="sideways")


def test_mirror_poles_mapping():
    p = [PoleData("particle", "0", -2.0, 0.2, "vqe"), PoleData("particle", "pi", -4.0, 0.8, "vqe")]
    m = mirror_poles(p)
    assert [(q.sector, q.k, q.energy, q.weight) for q in m] == [("hole", "0", -4.0, 0.8), ("hole", "pi", -2.0, 0.2)]


def test_spectral_function_from_exact_poles_matches_oracle():
    ex = exact_spectral_function(1.0, 6.0)
    s = spectral_function(list(ex.poles), ex.ground_energy)
    for k in ("0", "pi"):
        assert np.allclose(s.values[k], ex.values[k], atol=1e-15)


def test_spectral_function_validation_and_clipping():
    poles = [PoleData("particle", "0", 1.0, -0.01), PoleData("hole", "pi", -1.0, 1.0)]
    s = spectral_function(poles, 0.0, np.linspace(-2, 2, 5), 0.1)
    assert np.all(s.values["0"] == 0.0)
    with pytest.raises(ValueError):
        spectral_function(poles, 0.0, eta=0.0)
    with pytest.raises(ValueError):
        spectral_function(poles, 0.0, omega_grid=[0.0, 0.0])


def test_exact_pipeline(exact_run):
    r = exact_run
    assert r.converged and r.sigma is None
    assert r.ground_energy == pytest.approx(oracle.E_GS_U6, abs=1e-12)
    assert r.max_relative_deviation() <= 1e-8
    for k, total in r.sum_rules().items():
        assert total == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        r.within_sigma_fraction()


def test_sampled_pipeline(sampled_run):
    r = sampled_run
    assert r.sigma is not None and set(r.sigma) == {"0", "pi"}
    assert r.within_sigma_fraction(3.0) >= 0.99
    for p in r.poles:
        assert p.weight_stderr > 0
        ref_omega, ref_w = oracle.poles(1.0, 6.0)[(p.sector, p.k)]
        assert abs(p.weight - ref_w) < 5 * p.weight_stderr
    for s in r.spectrum.values.values():
        assert np.all(s >= 0)


def test_pipeline_determinism():
    a = vqe_spectrum(shots=3000, seed=11)
    b = vqe_spectrum(shots=3000, seed=11)
    for k in ("0", "pi"):
        assert np.array_equal(a.spectrum.values[k], b.spectrum.values[k])
        assert np.array_equal(a.sigma[k], b.sigma[k])


def test_pipeline_mirror_method():
    r = vqe_spectrum(shots=None, hole_method="mirror")
    assert r.hole is None
    assert r.max_relative_deviation() <= 1e-8
    with pytest.raises(ValueError):
        vqe_spectrum(shots=None, hole_method="guess")


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.0, 0.3), st.floats(0.0, 0.2))
def test_error_propagation_scales(w_err, e_err, g_err):
    poles = [PoleData("particle", "0", -2.0, 0.5, "vqe", e_err, w_err), PoleData("hole", "0", -4.0, 0.5, "vqe")]
    grid = np.linspace(-5, 5, 51)
    sig = propagate_spectrum_error(poles, -6.6, g_err, grid, 0.1, n_draws=50, seed=0)
    assert set(sig) == {"0", "pi"}
    assert np.all(sig["0"] >= 0) and not np.any(sig["pi"])
    again = propagate_spectrum_error(poles, -6.6, g_err, grid, 0.1, n_draws=50, seed=0)
    assert np.array_equal(sig["0"], again["0"])


def test_nonconverged_stage_is_flagged():
    r = vqe_spectrum(shots=None, max_sweeps=1, initial_params=AnsatzParams(0.0, 0.82, 0.99, 0.11, 0.52))
    assert not r.converged
    assert np.isfinite(r.max_relative_deviation())
