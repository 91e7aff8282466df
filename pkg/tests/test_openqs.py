"""Tests for the Lindblad integrator and transfer experiments.

Analytic oracles: the two-level decay rate under the dissipator
normalization, the cavity relaxation law <n>(t) = n0 e^(-kt) +
n_c(1 - e^(-kt)), the thermal fixed point, and unitary propagation.
"""

import math

import numpy as np
import pytest

from topobus import constants, core, drivebus, openqs

G = 0.0407737490903529


def _empty_h(n_fock):
    space = core.qubit_space() * core.fock_space(n_fock)
    return core.Operator(space, np.zeros((2 * n_fock, 2 * n_fock)))


def _cavity_spec(kappa, n_c, n_fock):
    return openqs.LindbladSpec.qubit_cavity(_empty_h(n_fock), kappa,
                                            0.0, 0.0, n_c, n_fock)


class TestLindbladSpec:
    def test_rejects_negative_rates(self):
        for kwargs in (dict(kappa=-1.0), dict(gamma1=-1.0),
                       dict(gamma2=-0.1), dict(n_c=-1e-3)):
            base = dict(kappa=0.0, gamma1=0.0, gamma2=0.0, n_c=0.0)
            base.update(kwargs)
            with pytest.raises(ValueError):
                openqs.LindbladSpec.qubit_cavity(_empty_h(3), n_fock=3, **base)

    def test_rejects_shape_mismatch(self):
        space = core.qubit_space() * core.fock_space(3)
        with pytest.raises(core.DimensionMismatchError):
            openqs.LindbladSpec(hamiltonian=_empty_h(3), kappa=0.1,
                                gamma1=0.0, gamma2=0.0, n_c=0.0, space=space,
                                cavity_op=np.eye(4))

    def test_qubit_cavity_operators(self):
        spec = openqs.LindbladSpec.qubit_cavity(_empty_h(4), 1.0, 1.0, 1.0,
                                                0.0, 4)
        a = np.diag(np.sqrt(np.arange(1, 4)), k=1)
        assert np.array_equal(spec.cavity_op, np.kron(np.eye(2), a))
        assert np.array_equal(spec.relax_ops[0],
                              np.kron([[0, 1], [0, 0]], np.eye(4)))
        assert np.array_equal(spec.dephase_ops[0],
                              np.kron(np.diag([-1.0, 1.0]), np.eye(4)))


class TestRhs:
    def _random_density(self, d, seed=3):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = m @ m.conj().T
        return rho / np.trace(rho)

    def test_zero_rates_is_unitary_commutator(self):
        h = drivebus.jc_hamiltonian(G, 4)
        spec = openqs.LindbladSpec.qubit_cavity(h, 0.0, 0.0, 0.0, 0.0, 4)
        rho = self._random_density(8)
        want = -1j * (h.matrix @ rho - rho @ h.matrix)
        assert np.abs(openqs.lindblad_rhs(rho, spec) - want).max() < 1e-14

    def test_trace_and_hermiticity_preserved(self):
        spec = openqs.LindbladSpec.qubit_cavity(
            drivebus.jc_hamiltonian(G, 5), G / 1000, G / 1000, G / 1000,
            0.2, 5)
        d = openqs.lindblad_rhs(self._random_density(10), spec)
        assert abs(np.trace(d)) < 1e-12
        assert np.abs(d - d.conj().T).max() < 1e-12

    def test_two_level_decay_rate(self):
        # Gamma1 D(sigma-)/2 acting on |1><1| gives d<sz>/dt = -2 Gamma1
        gamma1 = 0.37
        spec = openqs.LindbladSpec.qubit_cavity(_empty_h(3), 0.0, gamma1,
                                                0.0, 0.0, 3)
        rho = np.zeros((6, 6), dtype=complex)
        rho[3, 3] = 1.0
        d = openqs.lindblad_rhs(rho, spec)
        sz = np.kron(np.diag([-1.0, 1.0]), np.eye(3))
        assert np.trace(sz @ d).real == pytest.approx(-2.0 * gamma1,
                                                      rel=1e-12)

    def test_dephasing_never_moves_populations(self):
        spec = openqs.LindbladSpec.qubit_cavity(_empty_h(3), 0.0, 0.0, 0.9,
                                                0.0, 3)
        d = openqs.lindblad_rhs(self._random_density(6), spec)
        assert np.abs(np.diag(d)).max() < 1e-14

    def test_dimension_mismatch(self):
        spec = _cavity_spec(0.1, 0.0, 3)
        with pytest.raises(core.DimensionMismatchError):
            openqs.lindblad_rhs(np.eye(4) / 4.0, spec)


class TestEvolve:
    def test_constant_without_generator(self):
        spec = _cavity_spec(0.0, 0.0, 3)
        rho0 = core.DensityMatrix.from_pure(
            spec.space, core.basis_state(spec.space, 4))
        traj = openqs.evolve(rho0, spec, np.linspace(0, 5, 7))
        for r in traj:
            assert np.abs(r.matrix - rho0.matrix).max() < 1e-14

    def test_matches_unitary_oracle(self):
        h = drivebus.jc_hamiltonian(G, 5)
        spec = openqs.LindbladSpec.qubit_cavity(h, 0.0, 0.0, 0.0, 0.0, 5)
        psi0 = (core.basis_state(spec.space, 0)
                + core.basis_state(spec.space, 5)) / np.sqrt(2)
        grid = np.linspace(0, math.pi / G, 21)
        traj = openqs.evolve(core.DensityMatrix.from_pure(spec.space, psi0),
                             spec, grid)
        states = core.propagate_states(h, psi0, grid)
        for r, psi in zip(traj, states):
            assert np.abs(r.matrix - np.outer(psi, psi.conj())).max() < 1e-8

    def test_cavity_relaxation_law(self):
        kappa, n_c, n0 = 0.8, 0.3, 3
        spec = _cavity_spec(kappa, n_c, 16)
        m = np.zeros((32, 32), dtype=complex)
        m[n0, n0] = 1.0
        grid = np.linspace(0, 2.0, 5)
        traj = openqs.evolve(core.DensityMatrix(spec.space, m), spec, grid)
        nop = np.kron(np.eye(2), np.diag(np.arange(16.0)))
        for t, r in zip(grid, traj):
            n_t = np.trace(nop @ r.matrix).real
            want = n0 * math.exp(-kappa * t) + n_c * (1 - math.exp(-kappa * t))
            assert n_t == pytest.approx(want, abs=1e-7)

    def test_thermal_fixed_point(self):
        kappa, n_c = 0.8, 0.3
        spec = _cavity_spec(kappa, n_c, 16)
        rho0 = core.DensityMatrix.from_pure(
            spec.space, core.basis_state(spec.space, 0))
        traj = openqs.evolve(rho0, spec, np.array([0.0, 40.0]))
        pops = np.diag(traj[-1].matrix).real[:6]
        boltzmann = (n_c / (1 + n_c)) ** np.arange(6) / (1 + n_c)
        assert np.abs(pops - boltzmann).max() < 1e-6

    def test_damping_monotone(self):
        spec = _cavity_spec(0.5, 0.0, 6)
        m = np.zeros((12, 12), dtype=complex)
        m[4, 4] = 1.0
        traj = openqs.evolve(core.DensityMatrix(spec.space, m), spec,
                             np.linspace(0, 3, 16))
        nop = np.kron(np.eye(2), np.diag(np.arange(6.0)))
        ns = [np.trace(nop @ r.matrix).real for r in traj]
        assert all(b <= a + 1e-12 for a, b in zip(ns, ns[1:]))

    def test_rejects_bad_grid(self):
        spec = _cavity_spec(0.1, 0.0, 3)
        rho0 = core.DensityMatrix.from_pure(
            spec.space, core.basis_state(spec.space, 0))
        with pytest.raises(core.DimensionMismatchError):
            openqs.evolve(rho0, spec, np.array([0.0, 2.0, 1.0]))

    def test_invariant_check_diagnostic(self):
        with pytest.raises(core.InvariantViolationError, match="dt"):
            openqs._check_density(np.eye(4, dtype=complex), 1.0, 1e-3)
        bad = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
        with pytest.raises(core.InvariantViolationError, match="eigenvalue"):
            openqs._check_density(bad, 0.5, 1e-3)


class TestTransferExperiment:
    def test_unitary_limit_exact(self):
        res = openqs.transfer_experiment(G, 0.0, 0.0, 0.0)
        assert abs(res.f1_at_transfer - 1.0) < 1e-6
        assert res.transfer_time == pytest.approx(math.pi / (2 * G), rel=1e-12)

    def test_paper_rates_fidelity(self):
        r = G / 1000
        res = openqs.transfer_experiment(G, r, r, r)
        assert res.f1_at_transfer >= 0.998
        assert res.max_f1 == pytest.approx(res.f1_at_transfer, abs=1e-9)
        assert res.cutoff_defect < 1e-6
        # both fidelity readings are reported and close at these rates
        i = int(np.argmin(np.abs(res.times - res.transfer_time)))
        assert res.reduced.fidelities[i] >= res.joint.fidelities[i]
        assert abs(res.reduced.fidelities[i] - res.joint.fidelities[i]) < 2e-3

    def test_transfer_point_on_grid(self):
        res = openqs.transfer_experiment(G, 0.0, 0.0, 0.0, n_times=201)
        assert math.pi / (2 * G) in res.times

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            openqs.transfer_experiment(0.0, 0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            openqs.transfer_experiment(G, 0.0, 0.0, 0.0, n_c=1.0)

    def test_cutoff_guard_trips(self):
        with pytest.raises(drivebus.CutoffError):
            openqs.transfer_experiment(G, G / 1000, 0.0, 0.0,
                                       cutoff_tol=1e-30)

    @pytest.mark.slow
    def test_max_f1_monotone_in_rates(self):
        rates = [G / 1000, 3 * G / 1000, 10 * G / 1000]
        f = np.empty((3, 3, 3))
        for i, k in enumerate(rates):
            for j, g1 in enumerate(rates):
                for l, g2 in enumerate(rates):
                    f[i, j, l] = openqs.transfer_experiment(
                        G, k, g1, g2, cutoff_tol=None).max_f1
        for axis in range(3):
            assert np.all(np.diff(f, axis=axis) <= 1e-12)


class TestThermalScan:
    def test_occupation_frozen_value(self):
        n_c = constants.thermal_occupation(2 * math.pi * 5.2, 0.020)
        assert 2e-6 <= n_c <= 6e-6
        assert n_c == pytest.approx(3.8094e-6, rel=1e-3)

    def test_cold_limit_reproduces_vacuum(self):
        r = G / 1000
        pts = openqs.thermal_scan(G, (r, r, r), [0.001], 2 * math.pi * 5.2)
        vac = openqs.transfer_experiment(G, r, r, r)
        assert pts[0].max_f1 == pytest.approx(vac.max_f1, abs=1e-9)

    def test_thermal_reduction_small(self):
        # fidelity loss relative to the cold limit stays under 0.2%
        r = G / 1000
        pts = openqs.thermal_scan(G, (r, r, r), [0.020, 0.035],
                                  2 * math.pi * 5.2)
        vac = openqs.transfer_experiment(G, r, r, r)
        for p in pts:
            assert vac.max_f1 - p.max_f1 <= 0.002
        assert pts[0].max_f1 > pts[1].max_f1

    def test_rejects_nonpositive_temperature(self):
        with pytest.raises(ValueError):
            openqs.thermal_scan(G, (0, 0, 0), [0.0], 2 * math.pi * 5.2)
