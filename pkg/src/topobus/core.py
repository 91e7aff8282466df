"""Dense operator algebra on composite Hilbert spaces.

Everything downstream (nanowire diagonalization, driven-junction
propagation, Lindblad integration, GHZ generation) sits on the small
set of primitives defined here: tensor products, Hermitian
eigendecomposition, short-step unitary propagation, partial trace and
fidelity.  All arrays are dense complex numpy; types are immutable
after construction so they can be shared freely between worker tasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "TopobusError",
    "DimensionMismatchError",
    "NonHermitianError",
    "ResourceLimitError",
    "StepPolicyError",
    "InvariantViolationError",
    "HilbertSpace",
    "Operator",
    "DensityMatrix",
    "StepPolicy",
    "DEFAULT_DIM_CAP",
    "tensor",
    "eig_hermitian",
    "propagate",
    "propagate_states",
    "partial_trace",
    "fidelity",
    "state_fidelity",
    "gauge_phase",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "sigma_plus",
    "sigma_minus",
    "qubit_space",
    "fock_space",
    "annihilation",
    "number_operator",
    "basis_state",
]


class TopobusError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(TopobusError):
    pass


class NonHermitianError(TopobusError):
    pass


class ResourceLimitError(TopobusError):
    pass


class StepPolicyError(TopobusError):
    pass


class InvariantViolationError(TopobusError):
    pass


# Hard ceiling for dense tensor products; 8192^2 complex doubles is
# already 1 GiB, anything larger must go through a structured solver.
DEFAULT_DIM_CAP = 8192


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor factorization of a finite-dimensional state space."""

    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionMismatchError(f"invalid factor dims {self.factor_dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def __mul__(self, other: "HilbertSpace") -> "HilbertSpace":
        return HilbertSpace(self.factor_dims + other.factor_dims)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tied to a HilbertSpace; immutable."""

    space: HilbertSpace
    matrix: np.ndarray
    unit: str = ""

    def __post_init__(self):
        m = _readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"operator matrix must be square, got {m.shape}")
        if m.shape[0] != self.space.total_dim:
            raise DimensionMismatchError(
                f"matrix dim {m.shape[0]} does not match space dim {self.space.total_dim}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T, self.unit)

    def hermitian_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


class DensityMatrix:
    """State of a (possibly composite) system.

    Invariants: Hermitian to 1e-10, unit trace to 1e-9, eigenvalues
    bounded below by -1e-9.  `check=False` skips the eigenvalue test
    for hot loops; integrators are expected to re-validate at sample
    times.
    """

    HERM_TOL = 1e-10
    TRACE_TOL = 1e-9
    EIG_TOL = 1e-9

    def __init__(self, space: HilbertSpace, matrix: np.ndarray, check: bool = True):
        self.space = space
        m = _readonly(matrix)
        if m.shape != (space.total_dim, space.total_dim):
            raise DimensionMismatchError(
                f"density matrix shape {m.shape} does not match space dim {space.total_dim}"
            )
        self.matrix = m
        if check:
            self.validate()

    @classmethod
    def from_pure(cls, space: HilbertSpace, psi: np.ndarray) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex).ravel()
        n = np.linalg.norm(v)
        if n == 0:
            raise DimensionMismatchError("zero state vector")
        v = v / n
        return cls(space, np.outer(v, v.conj()), check=False)

    def validate(self, eig_tol: float | None = None) -> None:
        m = self.matrix
        herm = float(np.abs(m - m.conj().T).max())
        if herm > self.HERM_TOL:
            raise InvariantViolationError(f"density matrix not Hermitian: defect {herm:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > self.TRACE_TOL:
            raise InvariantViolationError(f"density matrix trace {tr} != 1")
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        tol = self.EIG_TOL if eig_tol is None else eig_tol
        if w[0] < -tol:
            raise InvariantViolationError(f"density matrix min eigenvalue {w[0]:.3e}")

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


@dataclass(frozen=True)
class StepPolicy:
    """Fixed-step propagation policy.

    The step is chosen so max_phase bounds (fastest rate) * dt, where
    the fastest rate is the larger of the sampled spectral radius and
    any caller-supplied characteristic frequencies (drive frequencies
    are invisible to a spectral-radius probe and must be listed here).
    An explicit dt is honored but rejected if it violates the bound.
    """

    max_phase: float = 0.05
    char_frequencies: tuple[float, ...] = ()
    probe_points: int = 17
    dt: float | None = None

    def step_size(self, omega_max: float) -> float:
        omega = max(float(omega_max), *(abs(f) for f in self.char_frequencies), 1e-30)
        dt_bound = self.max_phase / omega
        if self.dt is not None:
            if self.dt > dt_bound * (1.0 + 1e-12):
                raise StepPolicyError(
                    f"explicit dt {self.dt:.3e} exceeds policy bound {dt_bound:.3e} "
                    f"(rate {omega:.3e} x dt > {self.max_phase})"
                )
            return float(self.dt)
        return dt_bound


def tensor(ops: Sequence[Operator], dim_cap: int = DEFAULT_DIM_CAP) -> Operator:
    """Kronecker product of operators, factor order preserved."""
    if not ops:
        raise DimensionMismatchError("tensor() needs at least one operand")
    total = 1
    for op in ops:
        total *= op.dim
    if total > dim_cap:
        raise ResourceLimitError(
            f"tensor product dimension {total} exceeds cap {dim_cap}; "
            "use a structured (symmetric-subspace) representation instead"
        )
    m = ops[0].matrix
    dims: tuple[int, ...] = ops[0].space.factor_dims
    for op in ops[1:]:
        m = np.kron(m, op.matrix)
        dims = dims + op.space.factor_dims
    return Operator(HilbertSpace(dims), m, ops[0].unit)


def eig_hermitian(op: Operator | np.ndarray, herm_tol: float = 1e-9):
    """Eigendecomposition of a Hermitian operator, eigenvalues ascending.

    Rejects inputs whose Hermiticity defect exceeds `herm_tol` rather
    than silently symmetrizing them.
    """
    m = op.matrix if isinstance(op, Operator) else np.asarray(op, dtype=complex)
    defect = float(np.abs(m - m.conj().T).max())
    if defect > herm_tol:
        raise NonHermitianError(f"Hermiticity defect {defect:.3e} exceeds {herm_tol:.1e}")
    w, v = np.linalg.eigh(m)
    return w, v


def _expm_i_hermitian(h: np.ndarray, tau: float) -> np.ndarray:
    """exp(-i h tau) for Hermitian h via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * w * tau)
    return (v * phase) @ v.conj().T


def _as_matrix_source(h_source) -> Callable[[float], np.ndarray]:
    if isinstance(h_source, Operator):
        m = h_source.matrix
        return lambda t: m
    if callable(h_source):
        def f(t: float) -> np.ndarray:
            h = h_source(t)
            return h.matrix if isinstance(h, Operator) else np.asarray(h, dtype=complex)
        return f
    raise DimensionMismatchError("hamiltonian source must be an Operator or a callable")


def _probe_rate(h: Callable[[float], np.ndarray], t0: float, t1: float,
                policy: StepPolicy, herm_tol: float = 1e-9) -> float:
    ts = np.linspace(t0, t1, max(2, policy.probe_points))
    radius = 0.0
    for t in ts:
        m = h(float(t))
        defect = float(np.abs(m - m.conj().T).max())
        if defect > herm_tol:
            raise NonHermitianError(f"H(t={t:.6g}) defect {defect:.3e}")
        radius = max(radius, float(np.abs(np.linalg.eigvalsh(m)).max()))
    return radius


def propagate(h_source, t0: float, t1: float, policy: StepPolicy | None = None,
              unitarity_tol: float = 1e-8) -> Operator:
    """Time-ordered unitary propagator from t0 to t1.

    A static Hamiltonian is exponentiated exactly; a time-dependent one
    is stepped with the second-order midpoint-exponential rule under the
    StepPolicy bound.  The returned matrix is checked to be unitary.
    """
    policy = policy or StepPolicy()
    h = _as_matrix_source(h_source)
    static = isinstance(h_source, Operator)
    span = t1 - t0
    if static or span == 0.0:
        u = _expm_i_hermitian(h(t0), span)
        space = h_source.space if isinstance(h_source, Operator) else None
    else:
        rate = _probe_rate(h, t0, t1, policy)
        dt = policy.step_size(rate)
        n_steps = max(1, math.ceil(abs(span) / dt))
        step = span / n_steps
        dim = h(t0).shape[0]
        u = np.eye(dim, dtype=complex)
        for k in range(n_steps):
            t_mid = t0 + (k + 0.5) * step
            u = _expm_i_hermitian(h(t_mid), step) @ u
        space = None
    defect = float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())
    if defect > unitarity_tol:
        raise InvariantViolationError(f"propagator unitarity defect {defect:.3e}")
    if space is None:
        space = HilbertSpace((u.shape[0],))
    return Operator(space, u)


def propagate_states(h_source, states: np.ndarray, t_grid: np.ndarray,
                     policy: StepPolicy | None = None) -> np.ndarray:
    """Evolve one or more pure states, sampling exactly on t_grid.

    `states` has shape (dim,) or (dim, n_states); the result prepends a
    time axis.  Sample times are hit exactly: each interval between
    consecutive grid points is subdivided into whole policy steps.
    """
    policy = policy or StepPolicy()
    h = _as_matrix_source(h_source)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1 or np.any(np.diff(t_grid) < 0):
        raise DimensionMismatchError("t_grid must be a nondecreasing 1-d array")
    psi = np.asarray(states, dtype=complex)
    squeeze = psi.ndim == 1
    if squeeze:
        psi = psi[:, None]
    out = np.empty((len(t_grid),) + psi.shape, dtype=complex)

    static = isinstance(h_source, Operator)
    if static:
        w, v = eig_hermitian(h_source)
        coeff = v.conj().T @ psi
        for i, t in enumerate(t_grid):
            out[i] = v @ (np.exp(-1j * w * (t - t_grid[0]))[:, None] * coeff)
    else:
        rate = _probe_rate(h, float(t_grid[0]), float(t_grid[-1]), policy)
        dt = policy.step_size(rate)
        cur = psi.copy()
        out[0] = cur
        for i in range(1, len(t_grid)):
            a, b = float(t_grid[i - 1]), float(t_grid[i])
            if b == a:
                out[i] = cur
                continue
            n_steps = max(1, math.ceil((b - a) / dt))
            step = (b - a) / n_steps
            for k in range(n_steps):
                t_mid = a + (k + 0.5) * step
                cur = _expm_i_hermitian(h(t_mid), step) @ cur
            out[i] = cur
    if squeeze:
        out = out[:, :, 0]
    return out


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out all factors not listed in `keep` (order preserved ascending)."""
    dims = rho.space.factor_dims
    n = len(dims)
    keep_sorted = sorted(set(int(k) for k in keep))
    if not keep_sorted or keep_sorted[0] < 0 or keep_sorted[-1] >= n:
        raise DimensionMismatchError(f"keep indices {keep} out of range for {n} factors")
    t = rho.matrix.reshape(dims + dims)
    # einsum subscripts: traced factors share row/col index, kept ones stay
    row = list(range(n))
    col = [i + n if i in keep_sorted else i for i in range(n)]
    out_sub = keep_sorted + [i + n for i in keep_sorted]
    reduced = np.einsum(t, row + col, out_sub)
    kept_dims = tuple(dims[i] for i in keep_sorted)
    d = int(np.prod(kept_dims))
    return DensityMatrix(HilbertSpace(kept_dims), reduced.reshape(d, d), check=False)


def fidelity(rho: DensityMatrix, psi: np.ndarray) -> float:
    """<psi|rho|psi> for a pure target state, clipped to [0, 1]."""
    v = np.asarray(psi, dtype=complex).ravel()
    if v.shape[0] != rho.matrix.shape[0]:
        raise DimensionMismatchError(
            f"state dim {v.shape[0]} vs density matrix dim {rho.matrix.shape[0]}"
        )
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise DimensionMismatchError("zero target state")
    v = v / nrm
    val = complex(v.conj() @ rho.matrix @ v)
    if abs(val.imag) > 1e-9:
        raise InvariantViolationError(f"fidelity has imaginary residue {val.imag:.3e}")
    return float(min(max(val.real, 0.0), 1.0))


def state_fidelity(phi: np.ndarray, psi: np.ndarray) -> float:
    """|<phi|psi>|^2 between two pure states (normalized internally)."""
    a = np.asarray(phi, dtype=complex).ravel()
    b = np.asarray(psi, dtype=complex).ravel()
    if a.shape != b.shape:
        raise DimensionMismatchError(f"state dims {a.shape} vs {b.shape}")
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return float(min(abs(np.vdot(a, b)) ** 2, 1.0))


def gauge_phase(a: np.ndarray) -> np.ndarray:
    """Rephase so the largest-magnitude entry is real positive."""
    arr = np.asarray(a, dtype=complex)
    idx = np.unravel_index(np.argmax(np.abs(arr)), arr.shape)
    z = arr[idx]
    if z == 0:
        return arr.copy()
    return arr * (abs(z) / z)


# ---------------------------------------------------------------------------
# Elementary building blocks.  Qubit convention: index 0 = |0> (ground),
# index 1 = |1> (excited); sigma_z = diag(-1, +1) so the excited state
# carries +1 and H = (w/2) sigma_z puts it at +w/2.  sigma_x sigma_y = i sigma_z.

_S0 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
_SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
_SP = np.array([[0, 0], [1, 0]], dtype=complex)   # |1><0|
_SM = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1|

_QUBIT = HilbertSpace((2,))


def qubit_space() -> HilbertSpace:
    return _QUBIT


def sigma_x() -> Operator:
    return Operator(_QUBIT, _SX)


def sigma_y() -> Operator:
    return Operator(_QUBIT, _SY)


def sigma_z() -> Operator:
    return Operator(_QUBIT, _SZ)


def sigma_plus() -> Operator:
    return Operator(_QUBIT, _SP)


def sigma_minus() -> Operator:
    return Operator(_QUBIT, _SM)


def fock_space(n_fock: int) -> HilbertSpace:
    return HilbertSpace((int(n_fock),))


def annihilation(n_fock: int) -> Operator:
    a = np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), k=1)
    return Operator(fock_space(n_fock), a)


def number_operator(n_fock: int) -> Operator:
    return Operator(fock_space(n_fock), np.diag(np.arange(n_fock, dtype=float)))


def basis_state(space: HilbertSpace, index: int) -> np.ndarray:
    v = np.zeros(space.total_dim, dtype=complex)
    v[index] = 1.0
    return v
