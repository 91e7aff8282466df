"""Reduction of the driven-junction model to a Jaynes-Cummings bus.

A sinusoidal phase drive at frequency omega turns the junction
coupling into a Bessel-function sideband series.  Driving the first
sideband into resonance with the cavity (omega_c = omega + omega_tq)
leaves a static exchange coupling g(a sigma+ + a^dag sigma-), with g
set by the first Bessel function of the drive amplitude theta.  The
module computes the effective parameters, reports the smallness
conditions behind the sideband truncation, and validates the
rotating-wave reduction by propagating the unreduced time-dependent
model.

All frequencies and energies are angular (rad/ns = angular GHz).
Comparisons between the full and reduced models sample at multiples
of the drive period, where the oscillating-frame transformations of
the sideband expansion reduce to the identity; only the static qubit
rotating frame has to be undone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.optimize
import scipy.special

from . import core
from .core import (HilbertSpace, Operator, StepPolicy, TopobusError,
                   annihilation, basis_state, fock_space, qubit_space,
                   sigma_plus, sigma_x, sigma_z, tensor)

__all__ = [
    "ResonanceError",
    "CutoffError",
    "JunctionDriveParams",
    "EffectiveJcParams",
    "SidebandReport",
    "RwaResult",
    "bessel_j",
    "theta_star",
    "effective_params",
    "neglect_condition",
    "full_hamiltonian",
    "jc_hamiltonian",
    "jc_ajc_hamiltonian",
    "validate_rwa",
]


class ResonanceError(TopobusError):
    pass


class CutoffError(TopobusError):
    pass


def bessel_j(n: int, x: float) -> float:
    """First-kind Bessel function on the validated argument range."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 0:
        raise ValueError("order n must be a non-negative integer")
    if n > 60:
        raise ValueError("order n must be <= 60")
    if not abs(x) <= 50:
        raise ValueError("argument |x| must be <= 50")
    return float(scipy.special.jv(n, x))


@lru_cache(maxsize=1)
def theta_star() -> float:
    """First positive zero of J0: the drive amplitude that cancels the
    static transverse field, leaving omega_tq equal to the bare
    splitting and the transverse coupling maximal."""
    root = scipy.optimize.brentq(lambda x: bessel_j(0, x), 2.0, 3.0,
                                 xtol=1e-15, rtol=8.9e-16)
    assert abs(bessel_j(0, root)) < 1e-12
    return float(root)


@dataclass(frozen=True)
class JunctionDriveParams:
    """Physical inputs of the driven junction + cavity (angular GHz).

    Only e = e2 - e1 enters the qubit subspace; e1 is bounded well
    below e2 in practice and defaults to zero, which drops it.  theta
    = lambda_g/omega is the phase-drive amplitude and g0 =
    e_m*lambda_c/(2*omega_c) the bare sideband coupling scale.
    """

    e2: float = 2 * math.pi * 0.2
    e1: float = 0.0
    e_m: float = 2 * math.pi * 0.5
    lambda_g: float = theta_star() * 2 * math.pi * 5.0
    lambda_c: float = 0.05 * 2 * math.pi * 5.2
    omega: float = 2 * math.pi * 5.0
    omega_c: float = 2 * math.pi * 5.2
    phi0: float = math.pi
    n_fock: int = 5

    def __post_init__(self):
        if self.omega <= 0 or self.omega_c <= 0:
            raise ValueError("drive and cavity frequencies must be positive")
        if self.e_m < 0 or self.lambda_c < 0 or self.lambda_g < 0:
            raise ValueError("coupling energies must be >= 0")
        if self.lambda_c / self.omega_c > 0.1:
            raise ValueError(
                "lambda_c/omega_c > 0.1: outside the perturbative regime")
        if self.n_fock < 3:
            raise ValueError("n_fock must be >= 3")

    @property
    def e(self) -> float:
        return self.e2 - self.e1

    @property
    def theta(self) -> float:
        return self.lambda_g / self.omega

    @property
    def g0(self) -> float:
        return self.e_m * self.lambda_c / (2.0 * self.omega_c)

    def with_theta(self, theta: float) -> "JunctionDriveParams":
        return replace(self, lambda_g=theta * self.omega)


@dataclass(frozen=True)
class EffectiveJcParams:
    """Derived Jaynes-Cummings parameters of the first-sideband bus."""

    omega_tq: float
    vartheta: float
    g: float
    g_prime: float
    omega_res: float

    @property
    def g_over_2pi_mhz(self) -> float:
        return self.g / (2 * math.pi) * 1e3


def effective_params(p: JunctionDriveParams) -> EffectiveJcParams:
    """Qubit splitting, mixing angle and sideband couplings.

    The static transverse field is -cos(phi0) J0(theta) e_m; at the
    default phi0 = pi this reduces to J0(theta) e_m, so omega_tq =
    sqrt(e^2 + (J0 e_m)^2) and g = g0 cos(vartheta) J1(theta).  At
    theta = theta* the transverse field vanishes: omega_tq = e,
    g_prime = 0.  omega_res is the drive frequency that puts the
    first sideband on cavity resonance.
    """
    bx = -math.cos(p.phi0) * bessel_j(0, p.theta) * p.e_m
    omega_tq = math.hypot(p.e, bx)
    vartheta = math.atan2(bx, p.e)
    g_s = -math.cos(p.phi0) * p.g0 * bessel_j(1, p.theta)
    return EffectiveJcParams(
        omega_tq=omega_tq,
        vartheta=vartheta,
        g=g_s * math.cos(vartheta),
        g_prime=g_s * math.sin(vartheta),
        omega_res=p.omega_c - omega_tq,
    )


@dataclass(frozen=True)
class SidebandReport:
    """Smallness bookkeeping of the oscillating-frame expansion.

    betas[m-1] is the m-th transformation angle including its phi0
    prefactor (odd orders carry sin(phi0) and vanish at the default
    operating point); magnitudes[m-1] is the phi0-independent scale
    |J_m(theta) e_m / (m omega)| that bounds it.  all_small tests the
    actual |beta_m| against the threshold.  j1_residual_bound =
    J1(2|beta_2|) bounds the coupling distortion left by the dominant
    even-order transformation.
    """

    betas: tuple
    magnitudes: tuple
    threshold: float
    all_small: bool
    j1_residual_bound: float


def neglect_condition(p: JunctionDriveParams, max_order: int = 8,
                      threshold: float = 0.05) -> SidebandReport:
    betas = []
    mags = []
    for m in range(1, max_order + 1):
        scale = p.e_m * bessel_j(m, p.theta) / (m * p.omega)
        if m % 2:
            beta = (-1.0) ** ((m - 1) // 2) * math.sin(p.phi0) * scale
        else:
            beta = math.cos(p.phi0) * scale
        betas.append(beta)
        mags.append(abs(scale))
    beta2 = betas[1] if max_order >= 2 else 0.0
    return SidebandReport(
        betas=tuple(betas),
        magnitudes=tuple(mags),
        threshold=threshold,
        all_small=all(abs(b) < threshold for b in betas),
        j1_residual_bound=bessel_j(1, 2 * abs(beta2)),
    )


@lru_cache(maxsize=8)
def _model_operators(n_fock: int):
    """Cached constant matrices on qubit x Fock(n_fock)."""
    space = qubit_space() * fock_space(n_fock)
    eye_c = Operator(fock_space(n_fock), np.eye(n_fock, dtype=complex))
    a = annihilation(n_fock)
    a_dag = a.dagger()
    sz = tensor([sigma_z(), eye_c]).matrix
    sx = tensor([sigma_x(), eye_c]).matrix
    xa = tensor([sigma_x(), a]).matrix
    pa = tensor([sigma_plus(), a]).matrix        # a sigma+
    pad = tensor([sigma_plus(), a_dag]).matrix   # a^dag sigma+
    return space, sz, sx, xa, pa, pad


def full_hamiltonian(t: float, p: JunctionDriveParams) -> Operator:
    """Unreduced driven model on qubit x cavity (cavity rotating frame)."""
    space, sz, sx, xa, _, _ = _model_operators(p.n_fock)
    phase = p.theta * math.cos(p.omega * t) + p.phi0
    drive = np.exp(-1j * p.omega_c * t) * xa
    h = (0.5 * p.e * sz
         - 0.5 * p.e_m * math.cos(phase) * sx
         - p.g0 * math.sin(phase) * (drive + drive.conj().T))
    return Operator(space, h, unit="rad/ns")


def jc_hamiltonian(g: float, n_fock: int) -> Operator:
    """Resonant exchange coupling g(a sigma+ + a^dag sigma-)."""
    space, _, _, _, pa, _ = _model_operators(n_fock)
    return Operator(space, g * (pa + pa.conj().T), unit="rad/ns")


def jc_ajc_hamiltonian(g: float, omega_tq: float, n_fock: int):
    """Source adding the slowest neglected pair, rotating at 2*omega_tq."""
    space, _, _, _, pa, pad = _model_operators(n_fock)
    jc = g * (pa + pa.conj().T)

    def source(t: float) -> Operator:
        osc = np.exp(2j * omega_tq * t)
        h = jc + g * (osc * pad + np.conj(osc) * pad.conj().T)
        return Operator(space, h, unit="rad/ns")

    return source


def _superposition_in(space: HilbertSpace) -> np.ndarray:
    n_fock = space.factor_dims[1]
    psi = basis_state(space, 0) + basis_state(space, n_fock)
    return psi / np.linalg.norm(psi)


def _transfer_target(space: HilbertSpace) -> np.ndarray:
    # |0> x (|0> - i|1>)/sqrt(2): the qubit superposition moved onto the cavity
    psi = basis_state(space, 0) - 1j * basis_state(space, 1)
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class RwaResult:
    """Stroboscopic transfer-fidelity traces of the three models."""

    times: np.ndarray
    f_full: np.ndarray
    f_jc: np.ndarray
    f_jc_ajc: np.ndarray
    effective: EffectiveJcParams
    cutoff_defect: float

    def __post_init__(self):
        for name in ("times", "f_full", "f_jc", "f_jc_ajc"):
            v = np.asarray(getattr(self, name), dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def max_jc_ajc_gap(self) -> float:
        return float(np.max(np.abs(self.f_jc - self.f_jc_ajc)))

    @property
    def max_full_jc_gap(self) -> float:
        return float(np.max(np.abs(self.f_full - self.f_jc)))


def _check_trace(name: str, states: np.ndarray) -> None:
    norms = np.linalg.norm(states[-1], axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise core.InvariantViolationError(
            f"{name} propagation lost norm: {norms}")


def _full_trace(p: JunctionDriveParams, eff: EffectiveJcParams,
                times: np.ndarray) -> np.ndarray:
    # fastest relevant tone: cavity frame frequency plus the high drive
    # harmonics that theta ~ 2.4 still populates
    policy = StepPolicy(max_phase=0.05,
                        char_frequencies=(p.omega_c + 4 * p.omega,))
    space, sz, *_ = _model_operators(p.n_fock)
    target = _transfer_target(space)

    def source(t: float) -> Operator:
        return full_hamiltonian(t, p)

    psi0 = _superposition_in(space)
    states = core.propagate_states(source, psi0[:, None], times, policy)
    _check_trace("full", states)
    # undo the qubit rotating frame; drive-period sampling already makes
    # the oscillating-frame factors of the sideband expansion trivial
    half_sz = np.diagonal(sz).real / 2.0
    out = np.empty(len(times))
    for k, t in enumerate(times):
        rot = np.exp(1j * eff.omega_tq * t * half_sz)
        out[k] = core.state_fidelity(target, rot * states[k, :, 0])
    return out


def validate_rwa(p: JunctionDriveParams, periods: int = 3,
                 cutoff_tol: float = 1e-6) -> RwaResult:
    """Transfer fidelity under the full, JC, and JC+AJC models.

    Propagates (|0> + |1>)/sqrt(2) x |0> and reports fidelity against
    the transferred state |0> x (|0> - i|1>)/sqrt(2), sampled at
    drive-period multiples over `periods` Rabi periods.  The full
    trace is recomputed at twice the Fock cutoff and must agree to
    cutoff_tol.  With no coupling (g = 0) the Rabi period degenerates
    and the window covers `periods` drive periods instead.
    """
    eff = effective_params(p)
    if abs(p.omega - eff.omega_res) > 1e-9 * p.omega_c:
        raise ResonanceError(
            f"drive off the first-sideband resonance: omega = {p.omega:.6f}, "
            f"omega_c - omega_tq = {eff.omega_res:.6f}")
    if eff.g < 0:
        raise ValueError("effective coupling must be >= 0 for a transfer run")

    t_drive = 2 * math.pi / p.omega
    t_total = periods * math.pi / eff.g if eff.g > 0 else periods * t_drive
    times = np.arange(0, math.ceil(t_total / t_drive) + 1) * t_drive

    space, *_ = _model_operators(p.n_fock)
    psi0 = _superposition_in(space)
    target = _transfer_target(space)

    policy_slow = StepPolicy(max_phase=0.05,
                             char_frequencies=(2 * eff.omega_tq,))
    jc_states = core.propagate_states(jc_hamiltonian(eff.g, p.n_fock),
                                      psi0[:, None], times, policy_slow)
    ajc_states = core.propagate_states(
        jc_ajc_hamiltonian(eff.g, eff.omega_tq, p.n_fock),
        psi0[:, None], times, policy_slow)
    _check_trace("jc", jc_states)
    _check_trace("jc_ajc", ajc_states)
    f_jc = np.array([core.state_fidelity(target, s[:, 0]) for s in jc_states])
    f_jc_ajc = np.array([core.state_fidelity(target, s[:, 0])
                         for s in ajc_states])

    f_full = _full_trace(p, eff, times)
    f_full_big = _full_trace(replace(p, n_fock=2 * p.n_fock), eff, times)
    defect = float(np.max(np.abs(f_full - f_full_big)))
    if defect > cutoff_tol:
        raise CutoffError(
            f"Fock cutoff n={p.n_fock} not converged: doubling moves the "
            f"trace by {defect:.3e}")

    return RwaResult(times=times, f_full=f_full, f_jc=f_jc, f_jc_ajc=f_jc_ajc,
                     effective=eff, cutoff_defect=defect)
