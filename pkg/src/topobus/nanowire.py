"""Tight-binding model of a proximitized spin-orbit nanowire.

A chain of n_sites sites carries four Nambu orbitals per site, ordered
(particle-up, particle-down, hole-up, hole-down).  The particle block
has on-site energy mu_i +/- h per spin (mu_i band-referenced so the
low-energy sector sits at the zone edge), hopping -t, and the
spin-flip hopping lambda from spin-orbit coupling; singlet pairing
Delta_i closes the Nambu structure.  The antiunitary particle-hole
operation (site-local particle/hole swap followed by complex
conjugation) anticommutes with every Hamiltonian this module builds,
which is checked, not assumed.

Scans and disorder ensembles exploit the fixed bandwidth of the chain:
eigenvalues come from a banded solver and the two near-zero edge
eigenvectors from shifted inverse iteration, which is what makes
hundred-realization ensembles cheap.  The public `diagonalize` keeps
the plain dense contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from . import core
from .constants import HBARSQ_OVER_2ME_MEV_NM2
from .core import HilbertSpace, Operator, TopobusError

__all__ = [
    "SymmetryError",
    "AntisymmetryError",
    "DegenerateEdgeError",
    "FitError",
    "NanowireParams",
    "DisorderSpec",
    "DisorderRealization",
    "BdgSpectrum",
    "EdgeStatePair",
    "EnvelopeFit",
    "ScanResult",
    "EnsembleStats",
    "build_bdg",
    "particle_hole_operator",
    "diagonalize",
    "extract_edge_states",
    "critical_field",
    "zeeman_scan",
    "length_scan",
    "fit_splitting_envelope",
    "disorder_ensemble",
    "draw_realization",
    "site_density",
    "left_fraction",
    "envelope_overlap",
    "gauge_fixed_overlap",
]


class SymmetryError(TopobusError):
    pass


class AntisymmetryError(TopobusError):
    pass


class DegenerateEdgeError(TopobusError):
    pass


class FitError(TopobusError):
    pass


# 2x2 spin blocks, up = index 0.
_S0 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_ISY = np.array([[0, 1], [-1, 0]], dtype=complex)  # i*sy, the singlet matrix

_BANDWIDTH = 7  # max |row - col| coupling: orbital 4i+0 to 4(i+1)+3


@dataclass(frozen=True)
class NanowireParams:
    """Geometry and material constants of the chain (meV, nm)."""

    n_sites: int
    a_nm: float = 10.0
    m_star: float = 0.015
    alpha_mev_nm: float = 20.0
    delta_mev: float = 0.5
    mu_eff_mev: float = 1.0
    zeeman_h_mev: float = 1.5

    def __post_init__(self):
        if self.n_sites < 4:
            raise ValueError("need at least 4 sites")
        if self.a_nm <= 0 or self.m_star <= 0:
            raise ValueError("lattice spacing and effective mass must be positive")
        if self.delta_mev < 0:
            raise ValueError("pairing amplitude must be >= 0")

    @property
    def hopping_mev(self) -> float:
        return HBARSQ_OVER_2ME_MEV_NM2 / (self.m_star * self.a_nm**2)

    @property
    def so_mev(self) -> float:
        return self.alpha_mev_nm / (2.0 * self.a_nm)

    @property
    def length_nm(self) -> float:
        return self.n_sites * self.a_nm

    def with_length(self, length_nm: float) -> "NanowireParams":
        n = int(round(length_nm / self.a_nm))
        return NanowireParams(n, self.a_nm, self.m_star, self.alpha_mev_nm,
                              self.delta_mev, self.mu_eff_mev, self.zeeman_h_mev)

    def with_zeeman(self, h_mev: float) -> "NanowireParams":
        return NanowireParams(self.n_sites, self.a_nm, self.m_star,
                              self.alpha_mev_nm, self.delta_mev,
                              self.mu_eff_mev, h_mev)


_DISORDER_KINDS = ("chemical_potential", "pairing_phase", "nuclear_zeeman")


@dataclass(frozen=True)
class DisorderSpec:
    """Ensemble of independent uniform on-site perturbations.

    amplitude W is in meV for chemical_potential and nuclear_zeeman and
    in radians for pairing_phase.
    """

    kind: str
    amplitude: float
    n_realizations: int = 100
    master_seed: int = 0

    def __post_init__(self):
        if self.kind not in _DISORDER_KINDS:
            raise ValueError(f"unknown disorder kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("amplitude W must be >= 0")
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")


@dataclass(frozen=True)
class DisorderRealization:
    kind: str
    values: np.ndarray  # (n,) site values, or (n, 3) Zeeman vectors
    seed: int

    def __post_init__(self):
        v = np.asarray(self.values)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def draw_realization(spec: DisorderSpec, n_sites: int, index: int) -> DisorderRealization:
    """Deterministic draw for realization `index` of an ensemble.

    The stream depends only on (master_seed, index), never on how the
    ensemble is scheduled across workers.
    """
    ss = np.random.SeedSequence(entropy=spec.master_seed, spawn_key=(index,))
    seed = int(ss.generate_state(1, np.uint64)[0])
    rng = np.random.default_rng(seed)
    w = spec.amplitude
    if spec.kind == "nuclear_zeeman":
        # uniform in the ball of radius W: component draws with rejection
        out = np.empty((n_sites, 3))
        for i in range(n_sites):
            while True:
                v = rng.uniform(-w, w, size=3) if w > 0 else np.zeros(3)
                if v @ v <= w * w:
                    out[i] = v
                    break
        return DisorderRealization(spec.kind, out, seed)
    values = rng.uniform(-w, w, size=n_sites)
    return DisorderRealization(spec.kind, values, seed)


def _assemble(params: NanowireParams,
              realization: DisorderRealization | None = None) -> np.ndarray:
    """Dense Nambu matrix; orbital order per site (p-up, p-dn, h-up, h-dn)."""
    n = params.n_sites
    t = params.hopping_mev
    lam = params.so_mev
    mu_clean = params.mu_eff_mev - 2.0 * t  # band-referenced on-site level

    mu = np.full(n, mu_clean)
    delta = np.full(n, params.delta_mev, dtype=complex)
    zeeman = np.zeros((n, 3))
    zeeman[:, 2] = params.zeeman_h_mev

    if realization is not None:
        if realization.kind == "chemical_potential":
            mu = mu + realization.values
        elif realization.kind == "pairing_phase":
            delta = delta * np.exp(1j * realization.values)
        elif realization.kind == "nuclear_zeeman":
            zeeman = zeeman + realization.values
        else:
            raise ValueError(f"unknown disorder kind {realization.kind!r}")

    dim = 4 * n
    h = np.zeros((dim, dim), dtype=complex)

    # on-site particle block P_i = mu_i I + B_i . sigma, hole block -P_i*
    p_blocks = (mu[:, None, None] * _S0
                + zeeman[:, 0, None, None] * _SX
                + zeeman[:, 1, None, None] * _SY
                + zeeman[:, 2, None, None] * _SZ)
    pair_blocks = delta[:, None, None] * _ISY

    idx = 4 * np.arange(n)
    for r in range(2):
        for c in range(2):
            h[idx + r, idx + c] = p_blocks[:, r, c]
            h[idx + 2 + r, idx + 2 + c] = -np.conj(p_blocks[:, r, c])
            h[idx + r, idx + 2 + c] = pair_blocks[:, r, c]
            h[idx + 2 + r, idx + c] = np.conj(pair_blocks[:, c, r])

    # hopping particle block T = -t I + lambda (i sy); holes get -T*
    t_block = -t * _S0 + lam * _ISY
    jdx = idx[:-1]
    for r in range(2):
        for c in range(2):
            h[jdx + r, jdx + 4 + c] = t_block[r, c]
            h[jdx + 4 + c, jdx + r] = np.conj(t_block[r, c])
            h[jdx + 2 + r, jdx + 6 + c] = -np.conj(t_block[r, c])
            h[jdx + 6 + c, jdx + 2 + r] = -t_block[r, c]
    return h


def build_bdg(params: NanowireParams,
              realization: DisorderRealization | None = None) -> Operator:
    """Bogoliubov-de Gennes matrix of the (possibly disordered) chain."""
    h = _assemble(params, realization)
    op = Operator(HilbertSpace((4 * params.n_sites,)), h, unit="meV")
    particle_hole_operator(params.n_sites).verify(h)
    return op


@dataclass(frozen=True)
class ParticleHoleOperator:
    """Antiunitary particle-hole conjugation; squares to +1.

    Acts as psi -> conj(psi) followed by the site-local particle/hole
    orbital swap.  Being an involution it equals its own inverse and
    adjoint, so the `apply` below implements both Sigma and Sigma^dagger.
    """

    n_sites: int
    permutation: np.ndarray

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return np.conj(psi)[self.permutation]

    def conjugate_matrix(self, h: np.ndarray) -> np.ndarray:
        p = self.permutation
        return np.conj(h)[np.ix_(p, p)]

    def verify(self, h: np.ndarray, tol: float = 1e-10) -> float:
        """Check the defining anticommutation against H; abort on failure."""
        scale = max(1.0, float(np.abs(h).max()))
        defect = float(np.abs(self.conjugate_matrix(h) + h).max()) / scale
        if defect > tol:
            raise SymmetryError(
                f"particle-hole anticommutation violated: relative defect {defect:.3e}"
            )
        return defect


def particle_hole_operator(n_sites: int) -> ParticleHoleOperator:
    base = 4 * np.arange(n_sites)[:, None]
    perm = (base + np.array([2, 3, 0, 1])[None, :]).ravel()
    return ParticleHoleOperator(n_sites, perm)


class BdgSpectrum:
    """Eigen-decomposition with the symmetric +/-n labeling.

    Level +n is the n-th smallest non-negative eigenvalue, -n its
    particle-hole partner; `eps(n)` and `vector(n)` accept signed n.
    """

    def __init__(self, eigenvalues: np.ndarray, eigenvectors: np.ndarray | None,
                 antisym_tol: float = 1e-9):
        w = np.asarray(eigenvalues, dtype=float)
        if w.ndim != 1 or len(w) % 2:
            raise AntisymmetryError("spectrum must have even length")
        defect = float(np.abs(w + w[::-1]).max())
        if defect > antisym_tol:
            raise AntisymmetryError(
                f"spectrum not antisymmetric: max |eps_n + eps_(-n)| = {defect:.3e} meV"
            )
        self.eigenvalues = w
        self.eigenvectors = eigenvectors
        self.antisymmetry_defect = defect

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def _index(self, n: int) -> int:
        half = self.dim // 2
        if n == 0 or abs(n) > half:
            raise IndexError(f"level label {n} out of range")
        return half + n - 1 if n > 0 else half + n

    def eps(self, n: int) -> float:
        return float(self.eigenvalues[self._index(n)])

    def vector(self, n: int) -> np.ndarray:
        if self.eigenvectors is None:
            raise ValueError("spectrum was computed without eigenvectors")
        return self.eigenvectors[:, self._index(n)]


def diagonalize(h: Operator) -> BdgSpectrum:
    """Full dense eigendecomposition with antisymmetry enforcement."""
    w, v = core.eig_hermitian(h)
    return BdgSpectrum(w, v)


def critical_field(params: NanowireParams) -> float:
    """Zeeman threshold of the topological phase."""
    return float(np.hypot(params.mu_eff_mev, params.delta_mev))


# --- banded fast paths ------------------------------------------------------

def _upper_bands(h: np.ndarray) -> np.ndarray:
    dim = h.shape[0]
    ab = np.zeros((_BANDWIDTH + 1, dim), dtype=complex)
    for k in range(_BANDWIDTH + 1):
        ab[_BANDWIDTH - k, k:] = np.diagonal(h, k)
    return ab


def _eigvals_banded(h: np.ndarray, antisym_tol: float = 1e-9) -> np.ndarray:
    w = sla.eig_banded(_upper_bands(h), lower=False, eigvals_only=True)
    defect = float(np.abs(w + w[::-1]).max())
    if defect > antisym_tol:
        raise AntisymmetryError(
            f"spectrum not antisymmetric: max |eps_n + eps_(-n)| = {defect:.3e} meV"
        )
    return w


def _general_bands(h: np.ndarray) -> np.ndarray:
    dim = h.shape[0]
    u = l = _BANDWIDTH
    ab = np.zeros((2 * u + 1, dim), dtype=complex)
    for k in range(-l, u + 1):
        sl = slice(k, None) if k >= 0 else slice(None, k)
        ab[u - k, sl] = np.diagonal(h, k)
    return ab


def _edge_ritz_pair(h: np.ndarray, eps1: float, eps2: float,
                    max_iter: int = 12, rtol: float = 1e-10):
    """Eigenvectors of the +/-eps1 pair by inverse subspace iteration.

    Solves against the banded factorization with shift 0 (the pair is
    the near-kernel), then Rayleigh-Ritz in the captured 2-d subspace.
    Falls back to a dense partial eigensolve if contraction stalls,
    e.g. when eps1 is not well separated from eps2.
    """
    dim = h.shape[0]
    scale = float(np.abs(h).max())
    ab = _general_bands(h)
    rng = np.random.default_rng(0x5EED)
    x = rng.normal(size=(dim, 2)) + 1j * rng.normal(size=(dim, 2))
    try:
        for _ in range(max_iter):
            y = sla.solve_banded((_BANDWIDTH, _BANDWIDTH), ab, x)
            q, _ = np.linalg.qr(y)
            hq = h @ q
            small = q.conj().T @ hq
            small = 0.5 * (small + small.conj().T)
            ww, vv = np.linalg.eigh(small)
            x = q @ vv
            resid = np.abs(h @ x - x * ww).max()
            if resid < rtol * scale:
                return ww, x
    except np.linalg.LinAlgError:
        pass
    # dense fallback: exact partial solve of the central pair
    half = dim // 2
    ww, x = sla.eigh(h, subset_by_index=[half - 1, half])
    return ww, x


def site_density(psi: np.ndarray) -> np.ndarray:
    """Per-site probability density (all four Nambu orbitals summed)."""
    d = np.abs(np.asarray(psi)) ** 2
    return d.reshape(-1, 4).sum(axis=1)


def left_fraction(psi: np.ndarray, fraction: float = 0.25) -> float:
    d = site_density(psi)
    cut = max(1, int(round(fraction * len(d))))
    return float(d[:cut].sum())


def envelope_overlap(psi_a: np.ndarray, psi_b: np.ndarray) -> float:
    """Spatial envelope overlap sum_i sqrt(d_a(i) d_b(i)).

    Phase-insensitive measure of how much two localized states share
    support; the literal inner product of the two chirality partners
    vanishes identically, so this is the quantity that detects their
    residual tail overlap.
    """
    return float(np.sqrt(site_density(psi_a) * site_density(psi_b)).sum())


def gauge_fixed_overlap(psi_a: np.ndarray, psi_b: np.ndarray) -> float:
    """|<a|b>|, the global-phase-maximized real overlap."""
    return float(abs(np.vdot(psi_a, psi_b)))


@dataclass(frozen=True)
class EdgeStatePair:
    """Chirality-resolved localized end states.

    psi_l and psi_r carry particle-hole chirality +1 and -1; the energy
    eigenvectors are recovered as (psi_l +/- psi_r)/sqrt(2) exactly.
    """

    psi_l: np.ndarray
    psi_r: np.ndarray
    epsilon_1: float

    def __post_init__(self):
        for name in ("psi_l", "psi_r"):
            v = np.asarray(getattr(self, name))
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def psi_plus(self) -> np.ndarray:
        return (self.psi_l + self.psi_r) / np.sqrt(2.0)

    @property
    def psi_minus(self) -> np.ndarray:
        return (self.psi_l - self.psi_r) / np.sqrt(2.0)


def _chirality_pair(psi_plus1: np.ndarray, psi_partner: np.ndarray | None,
                    sigma: ParticleHoleOperator, eps1: float) -> tuple[np.ndarray, np.ndarray]:
    """Split the near-zero doublet into left/right chirality states.

    Builds two orthonormal chirality +1 vectors from the doublet, then
    rotates within that real plane to maximize weight on the left half
    of the chain; the -1 partner follows from the same rotation, so
    (psi_l + psi_r)/sqrt(2) stays exactly the +eps1 eigenvector.  Only
    a common sign of the pair is free, fixed from psi_l's largest
    component; flipping one member alone would swap the +-1 roles.
    """
    n = sigma.n_sites
    chi = sigma.apply(psi_plus1)
    e1 = psi_plus1 + chi
    e2 = 1j * (psi_plus1 - chi)
    if np.linalg.norm(e2) < 1e-6 and psi_partner is not None:
        # eigensolver returned an (almost) chirality-real vector;
        # rebuild the second direction from the partner state
        e2 = psi_partner + sigma.apply(psi_partner)
        e2 = e2 - e1 * (np.vdot(e1, e2).real / max(np.vdot(e1, e1).real, 1e-30))
    e1 = e1 / np.linalg.norm(e1)
    e2 = e2 - e1 * np.vdot(e1, e2).real
    e2 = e2 / np.linalg.norm(e2)

    mask = np.zeros(4 * n)
    mask[: 4 * (n // 2)] = 1.0
    q11 = float((np.abs(e1) ** 2 * mask).sum())
    q22 = float((np.abs(e2) ** 2 * mask).sum())
    q12 = float((np.conj(e1) * mask * e2).sum().real)
    qw, qv = np.linalg.eigh(np.array([[q11, q12], [q12, q22]]))
    c, s = qv[:, 1]  # leading eigenvector: maximal left weight
    psi_l = c * e1 + s * e2
    psi_r = 1j * (s * e1 - c * e2)
    k = int(np.argmax(np.abs(psi_l)))
    if psi_l[k].real < 0:
        psi_l, psi_r = -psi_l, -psi_r
    return psi_l, psi_r


def extract_edge_states(spectrum: BdgSpectrum, n_sites: int | None = None,
                        gap_tol: float = 1e-6) -> EdgeStatePair:
    """Localized end states from the lowest particle level.

    Refuses to proceed if the edge doublet is not separated from the
    first bulk level by at least gap_tol (meV).
    """
    eps1, eps2 = spectrum.eps(1), spectrum.eps(2)
    if eps2 - eps1 < gap_tol:
        raise DegenerateEdgeError(
            f"edge sector ill-separated: eps2 - eps1 = {eps2 - eps1:.3e} meV"
        )
    if n_sites is None:
        n_sites = spectrum.dim // 4
    sigma = particle_hole_operator(n_sites)
    psi_l, psi_r = _chirality_pair(spectrum.vector(1), spectrum.vector(2),
                                   sigma, eps1)
    _check_chirality(psi_l, psi_r, sigma)
    return EdgeStatePair(psi_l, psi_r, eps1)


def _check_chirality(psi_l: np.ndarray, psi_r: np.ndarray,
                     sigma: ParticleHoleOperator, tol: float = 1e-8) -> None:
    dl = float(np.linalg.norm(sigma.apply(psi_l) - psi_l))
    dr = float(np.linalg.norm(sigma.apply(psi_r) + psi_r))
    if dl > tol or dr > tol:
        raise SymmetryError(f"chirality defect: left {dl:.3e}, right {dr:.3e}")


# --- scans ------------------------------------------------------------------

@dataclass(frozen=True)
class ScanResult:
    """(grid, eps1, eps2) triples from eigenvalue-only sweeps."""

    grid: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray
    kind: str

    def __post_init__(self):
        for name in ("grid", "eps1", "eps2"):
            v = np.asarray(getattr(self, name), dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, name, v)


def zeeman_scan(params: NanowireParams, h_grid: Sequence[float]) -> ScanResult:
    h_grid = np.asarray(h_grid, dtype=float)
    if np.any(np.diff(h_grid) <= 0):
        raise ValueError("h grid must be strictly increasing")
    eps1 = np.empty(len(h_grid))
    eps2 = np.empty(len(h_grid))
    for k, h in enumerate(h_grid):
        w = _eigvals_banded(_assemble(params.with_zeeman(float(h))))
        half = len(w) // 2
        eps1[k], eps2[k] = w[half], w[half + 1]
    return ScanResult(h_grid, eps1, eps2, "zeeman")


def length_scan(params: NanowireParams, l_grid_nm: Sequence[float]) -> ScanResult:
    l_grid_nm = np.asarray(l_grid_nm, dtype=float)
    if np.any(np.diff(l_grid_nm) <= 0):
        raise ValueError("L grid must be strictly increasing")
    eps1 = np.empty(len(l_grid_nm))
    eps2 = np.empty(len(l_grid_nm))
    for k, length in enumerate(l_grid_nm):
        w = _eigvals_banded(_assemble(params.with_length(float(length))))
        half = len(w) // 2
        eps1[k], eps2[k] = w[half], w[half + 1]
    return ScanResult(l_grid_nm, eps1, eps2, "length")


@dataclass(frozen=True)
class EnvelopeFit:
    """Exponential envelope of the splitting oscillations.

    decay_length_nm is the raw e-folding length of the fitted envelope
    exp(-L/decay_length).  xi_nm is the same decay expressed as a
    coherence length in the BCS normalization, xi = decay_length/pi,
    which is the convention under which it lands on hbar v_F/(pi E_gap).
    correlation is |Pearson r| of the log-maxima linear fit.
    """

    xi_nm: float
    decay_length_nm: float
    correlation: float
    n_peaks: int
    peak_positions_nm: np.ndarray
    peak_values_mev: np.ndarray

    def __post_init__(self):
        for name in ("peak_positions_nm", "peak_values_mev"):
            v = np.asarray(getattr(self, name), dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, name, v)


def fit_splitting_envelope(scan: ScanResult, min_peaks: int = 3) -> EnvelopeFit:
    """Coherence length from the local maxima of the oscillating splitting.

    Three-point peak detection, then linear least squares of log(eps1)
    against L.
    """
    l, e = scan.grid, scan.eps1
    inner = (e[1:-1] > e[:-2]) & (e[1:-1] > e[2:]) & (e[1:-1] > 1e-14)
    idx = np.flatnonzero(inner) + 1
    if len(idx) < min_peaks:
        raise FitError(f"only {len(idx)} envelope maxima found, need {min_peaks}")
    x, y = l[idx], np.log(e[idx])
    slope, intercept = np.polyfit(x, y, 1)
    r = abs(float(np.corrcoef(x, y)[0, 1]))
    if slope >= 0:
        raise FitError("splitting envelope does not decay with length")
    decay = float(-1.0 / slope)
    return EnvelopeFit(xi_nm=decay / np.pi, decay_length_nm=decay,
                       correlation=r, n_peaks=len(idx),
                       peak_positions_nm=x, peak_values_mev=e[idx])


# --- disorder ensembles -----------------------------------------------------

@dataclass(frozen=True)
class EnsembleRow:
    realization: int
    seed: int
    eps1: float
    eps2: float
    overlap_l: float
    overlap_r: float
    flagged: bool


@dataclass(frozen=True)
class EnsembleStats:
    """Per-realization rows plus the headline statistics."""

    params: NanowireParams
    spec: DisorderSpec
    clean_eps1: float
    clean_eps2: float
    rows: tuple[EnsembleRow, ...]

    @property
    def eps1_values(self) -> np.ndarray:
        return np.array([r.eps1 for r in self.rows])

    @property
    def mean_eps1(self) -> float:
        return float(self.eps1_values.mean())

    @property
    def sigma_eps1(self) -> float:
        v = self.eps1_values
        return float(np.sqrt(max((v**2).mean() - v.mean() ** 2, 0.0)))

    @property
    def eta(self) -> float:
        m = self.mean_eps1
        return float("inf") if m == 0 else self.sigma_eps1 / m

    @property
    def mean_overlap_l(self) -> float:
        return float(np.mean([r.overlap_l for r in self.rows]))

    @property
    def mean_overlap_r(self) -> float:
        return float(np.mean([r.overlap_r for r in self.rows]))

    @property
    def flagged(self) -> tuple[int, ...]:
        return tuple(r.realization for r in self.rows if r.flagged)


def _ensemble_task(params: NanowireParams, spec: DisorderSpec, index: int,
                   ref_l: np.ndarray, ref_r: np.ndarray) -> EnsembleRow:
    real = draw_realization(spec, params.n_sites, index)
    h = _assemble(params, real)
    sigma = particle_hole_operator(params.n_sites)
    sigma.verify(h)
    flagged = False
    try:
        w = _eigvals_banded(h)
    except AntisymmetryError:
        flagged = True
        w = np.sort(sla.eigvalsh(h))
    half = len(w) // 2
    eps1, eps2 = float(w[half]), float(w[half + 1])
    ww, x = _edge_ritz_pair(h, eps1, eps2)
    order = np.argsort(ww)
    psi_minus, psi_plus = x[:, order[0]], x[:, order[1]]
    psi_l, psi_r = _chirality_pair(psi_plus, psi_minus, sigma, eps1)
    return EnsembleRow(
        realization=index,
        seed=real.seed,
        eps1=eps1,
        eps2=eps2,
        overlap_l=gauge_fixed_overlap(ref_l, psi_l),
        overlap_r=gauge_fixed_overlap(ref_r, psi_r),
        flagged=flagged,
    )


def disorder_ensemble(params: NanowireParams, spec: DisorderSpec,
                      workers: int = 1) -> EnsembleStats:
    """Splitting statistics and wavefunction overlaps over an ensemble.

    The clean chain is solved once for the reference left/right states;
    every realization reports |<psi_clean|psi_disordered>| for both.
    Realizations with a numerically broken antisymmetric spectrum are
    flagged in their row, never dropped.
    """
    h0 = _assemble(params)
    sigma = particle_hole_operator(params.n_sites)
    sigma.verify(h0)
    w0 = _eigvals_banded(h0)
    half = len(w0) // 2
    clean_eps1, clean_eps2 = float(w0[half]), float(w0[half + 1])
    ww, x = _edge_ritz_pair(h0, clean_eps1, clean_eps2)
    order = np.argsort(ww)
    ref_l, ref_r = _chirality_pair(x[:, order[1]], x[:, order[0]], sigma, clean_eps1)

    indices = range(spec.n_realizations)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(
                _ensemble_task,
                [params] * spec.n_realizations,
                [spec] * spec.n_realizations,
                indices,
                [ref_l] * spec.n_realizations,
                [ref_r] * spec.n_realizations,
            ))
    else:
        rows = [_ensemble_task(params, spec, i, ref_l, ref_r) for i in indices]
    rows.sort(key=lambda r: r.realization)
    return EnsembleStats(params=params, spec=spec, clean_eps1=clean_eps1,
                         clean_eps2=clean_eps2, rows=tuple(rows))
