import math

import numpy as np
import pytest

from pairloss.fock import TruncatedSpace, basis_projector, coherent_state, product_density
from pairloss.integrate import IntegratorConfig
from pairloss.lindblad import evolve, rhs_rwa
from pairloss.model import SystemParams, build_rwa_generator, hamiltonian_lab
from pairloss.redfield import (
    EigenDecompositionError,
    build_redfield,
    diagonalize,
    evolve_redfield,
    redfield_superoperator,
    rhs_redfield,
)

SPACE = TruncatedSpace(6)


def random_hermitian(d, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def coherent_pair(a1, a2, M):
    return product_density(coherent_state(a1, M), coherent_state(a2, M))


def test_eigensystem_invariants():
    H = hamiltonian_lab(SystemParams(), SPACE)
    eig = diagonalize(H, SPACE)
    V, E = eig.vectors, eig.energies
    assert np.all(np.diff(E) >= 0)
    assert np.max(np.abs(H @ V - V * E)) / np.max(np.abs(E)) < 1e-10
    assert np.max(np.abs(V.conj().T @ V - np.eye(36))) < 1e-10


def test_eigensystem_rejects_non_hermitian():
    H = hamiltonian_lab(SystemParams(), SPACE)
    H[0, 1] += 1.0
    with pytest.raises(EigenDecompositionError):
        diagonalize(H, SPACE)


def test_bohr_frequencies_without_kerr_or_coupling():
    gen = build_redfield(SystemParams(mu1=0, mu2=0, lam=0), SPACE)
    w = gen.bohr_frequencies()
    for S in gen.coupling_ops_eigen:
        freqs = np.round(w[np.abs(S) > 1e-9], 9)
        assert set(np.unique(np.abs(freqs))) <= {0.0, 2.0}


def test_zero_temperature_rates_vanish_upwards():
    # (Lambda)_jk carries gamma(E_k - E_j): zero whenever E_k < E_j at T = 0
    gen = build_redfield(SystemParams(), SPACE)
    up = gen.bohr_frequencies() > 1e-9
    for Lam in gen.lambda_ops:
        assert np.all(Lam[up] == 0)
        assert np.all(np.isfinite(Lam))


def test_kerr_shift_of_two_quantum_transition():
    # first order in mu: E(n) - E(0) = n omega0 + mu (n + n^2), so 6 mu for n = 2
    mu = 1e-3
    gen = build_redfield(SystemParams(mu1=mu, mu2=mu, lam=0), TruncatedSpace(10))
    V, E = gen.eigensystem.vectors, gen.eigensystem.energies
    k0 = np.argmax(np.abs(V[0]))
    k2 = np.argmax(np.abs(V[TruncatedSpace(10).index(2, 0)]))
    assert (E[k2] - E[k0] - 2) == pytest.approx(6 * mu, rel=1e-2)


def test_rhs_traceless_and_matches_superoperator():
    gen = build_redfield(SystemParams(temperature=0.2), SPACE)
    L = redfield_superoperator(gen)
    rho = random_hermitian(36, 5)
    d = rhs_redfield(gen, rho)
    assert abs(np.trace(d)) < 1e-12
    assert np.max(np.abs((L @ rho.ravel()).reshape(36, 36) - d)) < 1e-12


def test_shape_mismatch():
    gen = build_redfield(SystemParams(), TruncatedSpace(3))
    with pytest.raises(ValueError):
        rhs_redfield(gen, np.eye(4))


def test_vacuum_stationary():
    gen = build_redfield(SystemParams(mu1=0, mu2=0, lam=0), SPACE)
    rho = gen.eigensystem.to_eigen(basis_projector(SPACE, 0, 0).matrix)
    assert np.max(np.abs(rhs_redfield(gen, rho))) < 1e-15


def test_interacting_ground_state_stationary():
    gen = build_redfield(SystemParams(), SPACE)
    rho = np.zeros((36, 36), dtype=complex)
    rho[0, 0] = 1
    assert np.max(np.abs(rhs_redfield(gen, rho))) < 1e-18


def test_two_quantum_decay_rate_matches_rwa():
    p = SystemParams(mu1=0, mu2=0, lam=0)
    gen = build_redfield(p, SPACE)
    eig = gen.eigensystem
    rho2 = basis_projector(SPACE, 2, 0).matrix
    rate_rf = eig.to_fock(rhs_redfield(gen, eig.to_eigen(rho2)))[12, 12].real
    rwa = build_rwa_generator(p, SPACE)
    rate_rwa = rhs_rwa(rwa, rho2)[12, 12].real
    assert rate_rf == pytest.approx(-2 * p.gamma0, rel=1e-12)
    assert rate_rf == pytest.approx(rate_rwa, rel=1e-12)


def test_unitary_when_undamped():
    gen = build_redfield(SystemParams(gamma0=0), SPACE)
    rho0 = coherent_pair(1, 0.5, 6)
    traj = evolve_redfield(gen, rho0, IntegratorConfig(50.0, 11), keep_states=True)
    pops0 = np.diag(gen.eigensystem.to_eigen(rho0.matrix)).real
    for s in traj.states:
        assert np.max(np.abs(np.diag(gen.eigensystem.to_eigen(s)).real - pops0)) < 1e-10


def test_uncoupled_modes_stay_product():
    gen = build_redfield(SystemParams(lam=0, gamma0=0.01), SPACE)
    traj = evolve_redfield(gen, coherent_pair(1, 0.5, 6), IntegratorConfig(200.0, 5), keep_states=True)
    for s in traj.states:
        t = s.reshape(6, 6, 6, 6)
        r1 = np.einsum("ijkj->ik", t)
        r2 = np.einsum("ijil->jl", t)
        assert np.max(np.abs(s - np.kron(r1, r2))) < 1e-6


def test_asymmetric_dissipation_supported():
    gen = build_redfield(SystemParams(gamma2=3e-3), SPACE)
    assert np.max(np.abs(gen.lambda_ops[1])) == pytest.approx(3 * np.max(np.abs(gen.lambda_ops[0])))


@pytest.fixture(scope="module")
def fig1_pair():
    p = SystemParams()
    rho0 = coherent_pair(1, 0, 6)
    cfg = IntegratorConfig(4 * math.pi / p.lam, 1001, method="propagator")
    rf = evolve_redfield(build_redfield(p, SPACE), rho0, cfg)
    rwa = evolve(build_rwa_generator(p, SPACE), rho0, cfg)
    return rf, rwa


def test_redfield_run_diagnostics(fig1_pair):
    rf, _ = fig1_pair
    assert rf.max_trace_drift < 1e-8
    assert np.max(rf.diagnostics["hermiticity"]) < 1e-9
    assert rf.min_eigenvalue > -10 * 1e-3


def test_manifold_populations_agree_with_rwa(fig1_pair):
    rf, rwa = fig1_pair
    for name in ("p00", "p01", "p10"):
        assert np.max(np.abs(rf.column(name) - rwa.column(name))) < 5e-2
