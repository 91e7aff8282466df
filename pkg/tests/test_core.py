"""Oracle tests for the dense operator kernel.

Expected values are produced by independent routes: closed-form
algebra, scipy's general-purpose ODE integrator, or hand-evaluated
2x2 formulas, never by the functions under test.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from topobus import core
from topobus.core import (
    DensityMatrix,
    DimensionMismatchError,
    HilbertSpace,
    NonHermitianError,
    Operator,
    ResourceLimitError,
    StepPolicy,
    StepPolicyError,
)


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def op(m):
    return Operator(HilbertSpace((m.shape[0],)), m)


class TestTensor:
    def test_identity_product(self):
        i2 = op(np.eye(2, dtype=complex))
        i3 = op(np.eye(3, dtype=complex))
        out = core.tensor([i2, i3])
        assert out.space.factor_dims == (2, 3)
        np.testing.assert_allclose(out.matrix, np.eye(6))

    def test_sigma_z_with_identity_spectrum(self):
        out = core.tensor([core.sigma_z(), op(np.eye(2, dtype=complex))])
        w = np.linalg.eigvalsh(out.matrix)
        np.testing.assert_allclose(w, [-1, -1, 1, 1], atol=1e-12)

    def test_sigma_x_squared_identity(self):
        xx = core.tensor([core.sigma_x(), core.sigma_x()])
        np.testing.assert_allclose(xx.matrix @ xx.matrix, np.eye(4), atol=1e-12)

    def test_dimension_cap(self):
        big = op(np.eye(128, dtype=complex))
        with pytest.raises(ResourceLimitError):
            core.tensor([big, big], dim_cap=10_000)

    def test_factor_order_preserved(self):
        a = op(np.diag([1.0, 2.0]).astype(complex))
        b = op(np.diag([10.0, 20.0, 30.0]).astype(complex))
        out = core.tensor([a, b])
        np.testing.assert_allclose(np.diag(out.matrix).real,
                                   [10, 20, 30, 20, 40, 60])


class TestEigHermitian:
    def test_sigma_z(self):
        w, _ = core.eig_hermitian(core.sigma_z())
        np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-14)

    def test_sigma_x_eigenvectors(self):
        w, v = core.eig_hermitian(core.sigma_x())
        np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-14)
        # eigenvectors (|0> -+ |1>)/sqrt(2) up to phase
        for k, sign in ((0, -1.0), (1, 1.0)):
            vec = core.gauge_phase(v[:, k])
            np.testing.assert_allclose(vec, np.array([1.0, sign]) / np.sqrt(2), atol=1e-12)

    def test_rejects_non_hermitian(self):
        m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(NonHermitianError):
            core.eig_hermitian(op(m))

    @given(st.integers(0, 10**6))
    def test_unitary_and_reconstruction_random_50(self, seed):
        h = random_hermitian(50, seed)
        w, v = core.eig_hermitian(op(h))
        assert np.abs(v.conj().T @ v - np.eye(50)).max() < 1e-9
        rec = (v * w) @ v.conj().T
        assert np.linalg.norm(rec - h) / np.linalg.norm(h) < 1e-9

    @pytest.mark.slow
    def test_reconstruction_dim_2000(self):
        h = random_hermitian(2000, seed=7)
        w, v = core.eig_hermitian(op(h))
        rec = (v * w) @ v.conj().T
        assert np.linalg.norm(rec - h) / np.linalg.norm(h) < 1e-9


class TestPropagate:
    def test_zero_hamiltonian(self):
        u = core.propagate(op(np.zeros((3, 3), dtype=complex)), 0.0, 5.0)
        np.testing.assert_allclose(u.matrix, np.eye(3), atol=1e-14)

    def test_sigma_z_full_period(self):
        omega = 2.0
        h = Operator(core.qubit_space(), (omega / 2) * core.sigma_z().matrix)
        u = core.propagate(h, 0.0, 2 * np.pi / omega)
        np.testing.assert_allclose(u.matrix, -np.eye(2), atol=1e-12)

    def test_jc_single_excitation_swap(self):
        # On span{|1>_t|0>_c, |0>_t|1>_c} the exchange coupling acts as
        # g*sx; the analytic propagator is cos(gt) I - i sin(gt) sx,
        # a full swap (up to -i) at t = pi/(2g).
        g = 0.3
        n_fock = 4
        sp = core.sigma_plus().matrix
        sm = core.sigma_minus().matrix
        a = core.annihilation(n_fock).matrix
        h = g * (np.kron(sp, a) + np.kron(sm, a.conj().T))
        space = HilbertSpace((2, n_fock))
        hop = Operator(space, h)
        t = np.pi / (2 * g)
        u = core.propagate(hop, 0.0, t)
        psi0 = np.zeros(2 * n_fock, dtype=complex)
        psi0[n_fock] = 1.0  # |1>_t |0>_c
        psi1 = u.matrix @ psi0
        expect = np.zeros_like(psi0)
        expect[1] = -1j  # |0>_t |1>_c with Rabi phase
        np.testing.assert_allclose(psi1, expect, atol=1e-10)

    def test_commuting_time_dependence_analytic(self):
        # H(t) = f(t) sz with f(t) = cos(t): U = exp(-i sin(T) sz)
        sz = core.sigma_z().matrix
        T = 3.7
        expect = np.diag(np.exp(-1j * np.array([-1.0, 1.0]) * np.sin(T)))
        errs = []
        for phase in (0.02, 0.01):
            u = core.propagate(lambda t: op(np.cos(t) * sz), 0.0, T,
                               StepPolicy(max_phase=phase, char_frequencies=(1.0,)))
            errs.append(np.abs(u.matrix - expect).max())
        assert errs[1] < 1e-5
        # halving the step must shrink the error ~4x (second order)
        assert 2.5 < errs[0] / errs[1] < 6.0

    def test_noncommuting_vs_scipy_ivp(self):
        # Driven qubit, oracle = scipy's adaptive integrator at tight tol.
        delta, omega_r, omega_d = 1.3, 0.45, 2.1
        sx, sz = core.sigma_x().matrix, core.sigma_z().matrix

        def hmat(t):
            return 0.5 * delta * sz + 0.5 * omega_r * np.cos(omega_d * t) * sx

        T = 8.0
        psi0 = np.array([1.0, 0.0], dtype=complex)
        sol = solve_ivp(lambda t, y: -1j * (hmat(t) @ y), (0.0, T), psi0,
                        rtol=1e-11, atol=1e-13, dense_output=True)
        ref = sol.y[:, -1]
        u = core.propagate(lambda t: op(hmat(t)), 0.0, T,
                           StepPolicy(max_phase=0.01, char_frequencies=(omega_d,)))
        np.testing.assert_allclose(u.matrix @ psi0, ref, atol=5e-6)

    def test_unitarity_random_time_dependent(self):
        h0 = random_hermitian(6, 11)
        h1 = random_hermitian(6, 12)
        u = core.propagate(lambda t: op(h0 + np.sin(2.0 * t) * h1), 0.0, 4.0,
                           StepPolicy(max_phase=0.05, char_frequencies=(2.0,)))
        assert np.abs(u.matrix.conj().T @ u.matrix - np.eye(6)).max() < 1e-8

    def test_explicit_dt_violating_policy_rejected(self):
        h = Operator(core.qubit_space(), 10.0 * core.sigma_z().matrix)
        pol = StepPolicy(max_phase=0.05, dt=1.0)
        with pytest.raises(StepPolicyError):
            core.propagate(lambda t: h, 0.0, 2.0, pol)

    def test_propagate_states_matches_propagator(self):
        h0 = random_hermitian(5, 3)
        h1 = random_hermitian(5, 4)
        src = lambda t: op(h0 + np.cos(1.5 * t) * h1)
        pol = StepPolicy(max_phase=0.02, char_frequencies=(1.5,))
        t_grid = np.linspace(0.0, 3.0, 7)
        psi0 = np.eye(5, dtype=complex)[:, :2]
        traj = core.propagate_states(src, psi0, t_grid, pol)
        u = core.propagate(src, 0.0, 3.0, pol)
        np.testing.assert_allclose(traj[-1], u.matrix @ psi0, atol=1e-8)


class TestPartialTrace:
    def test_product_state(self):
        rho_a = np.array([[0.7, 0.1j], [-0.1j, 0.3]], dtype=complex)
        rho_b = np.diag([0.5, 0.25, 0.25]).astype(complex)
        rho = DensityMatrix(HilbertSpace((2, 3)), np.kron(rho_a, rho_b))
        red = core.partial_trace(rho, [0])
        np.testing.assert_allclose(red.matrix, rho_a, atol=1e-12)

    def test_bell_state(self):
        psi = np.zeros(4, dtype=complex)
        psi[0] = psi[3] = 1 / np.sqrt(2)
        rho = DensityMatrix.from_pure(HilbertSpace((2, 2)), psi)
        red = core.partial_trace(rho, [1])
        np.testing.assert_allclose(red.matrix, np.eye(2) / 2, atol=1e-12)

    def test_thermal_cavity_factor(self):
        n_c = 1e-3
        rho_ic = np.diag([1 - n_c, n_c, 0.0]).astype(complex)
        q = np.zeros((2, 2), dtype=complex)
        q[0, 0] = 1.0
        rho = DensityMatrix(HilbertSpace((2, 3)), np.kron(q, rho_ic))
        red = core.partial_trace(rho, [1])
        np.testing.assert_allclose(red.matrix, rho_ic, atol=1e-12)

    @given(st.integers(0, 10**6))
    def test_trace_preserving_and_positive(self, seed):
        rng = np.random.default_rng(seed)
        dims = (2, 3, 2)
        d = int(np.prod(dims))
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m = a @ a.conj().T
        m /= np.trace(m).real
        rho = DensityMatrix(HilbertSpace(dims), m)
        red = core.partial_trace(rho, [0, 2])
        assert abs(np.trace(red.matrix) - 1.0) < 1e-12
        assert np.abs(red.matrix - red.matrix.conj().T).max() < 1e-12
        assert np.linalg.eigvalsh(red.matrix)[0] >= -1e-9

    def test_index_out_of_range(self):
        rho = DensityMatrix(HilbertSpace((2, 2)), np.eye(4, dtype=complex) / 4)
        with pytest.raises(DimensionMismatchError):
            core.partial_trace(rho, [2])


class TestFidelity:
    def test_pure_match(self):
        psi = np.array([1.0, 1j]) / np.sqrt(2)
        rho = DensityMatrix.from_pure(core.qubit_space(), psi)
        assert core.fidelity(rho, psi) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        rho = DensityMatrix.from_pure(core.qubit_space(), np.array([1.0, 0.0]))
        assert core.fidelity(rho, np.array([0.0, 1.0])) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        rho = DensityMatrix(core.qubit_space(), np.eye(2, dtype=complex) / 2)
        psi = np.array([0.6, 0.8j])
        assert core.fidelity(rho, psi) == pytest.approx(0.5, abs=1e-12)

    @given(st.integers(0, 10**6), st.floats(0.0, 1.0))
    def test_linearity_in_rho(self, seed, p):
        rng = np.random.default_rng(seed)
        psis = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        rho1 = DensityMatrix.from_pure(core.qubit_space(), psis[0])
        rho2 = DensityMatrix.from_pure(core.qubit_space(), psis[1])
        target = psis[2] / np.linalg.norm(psis[2])
        mix = DensityMatrix(core.qubit_space(),
                            p * rho1.matrix + (1 - p) * rho2.matrix, check=False)
        lhs = core.fidelity(mix, target)
        rhs = p * core.fidelity(rho1, target) + (1 - p) * core.fidelity(rho2, target)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestDensityMatrixInvariants:
    def test_rejects_bad_trace(self):
        with pytest.raises(core.InvariantViolationError):
            DensityMatrix(core.qubit_space(), np.eye(2, dtype=complex))

    def test_rejects_negative(self):
        m = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(core.InvariantViolationError):
            DensityMatrix(core.qubit_space(), m)

    def test_rejects_non_hermitian(self):
        m = np.array([[0.5, 0.3], [0.1, 0.5]], dtype=complex)
        with pytest.raises(core.InvariantViolationError):
            DensityMatrix(core.qubit_space(), m)


class TestGaugePhase:
    def test_largest_entry_made_real(self):
        v = np.array([0.1, 0.9j, -0.2])
        out = core.gauge_phase(v)
        assert out[1] == pytest.approx(0.9)

    @given(st.integers(0, 10**6))
    def test_idempotent_modulus(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.normal(size=6) + 1j * rng.normal(size=6)
        out = core.gauge_phase(v)
        np.testing.assert_allclose(np.abs(out), np.abs(v), atol=1e-12)
