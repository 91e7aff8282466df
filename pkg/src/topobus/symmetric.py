"""Permutation-symmetric sector evolution for identical qubits in one cavity.

A register of N identical qubits driven through collective spin operators,
with the *same* local dissipation channel on every qubit, never leaves the
permutation-invariant operator subspace if it starts there.  That subspace
splits into total-spin blocks:

    rho = sum_j sum_{m,m'} c_j[m, m'] T_j[m, m']  (tensor cavity),
    T_j[m, m'] = sum_alpha |j m alpha><j m' alpha|,

where alpha counts the d_j degenerate copies of spin j.  Storing one
coefficient block per j shrinks the qubit side from 4^N to
sum_j (2j+1)^2 entries (165 instead of 65536 at N = 8) while keeping every
collective expectation value exact.

The block basis, the per-block collective operators, and the block-to-block
action of the summed local channels sum_i A_i X A_i^dag are built once per
register size by brute force in the computational basis and cached.  The
builder cross-checks itself: multiplicities against the Catalan-triangle
formula and channel decompositions against a Hilbert-Schmidt Parseval
identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import core

__all__ = [
    "SpinStructure",
    "spin_structure",
    "local_lower_sandwich",
    "dephase_mask",
    "SymmetricModel",
]

MAX_QUBITS = 10


def _site_matrix(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    m = np.array([[1.0]], dtype=complex)
    for i in range(n_qubits):
        m = np.kron(m, op if i == site else np.eye(2, dtype=complex))
    return m


def local_lower_sandwich(rho: np.ndarray, n_qubits: int) -> np.ndarray:
    """sum_i sigma^-_i rho sigma^+_i by pure index arithmetic.

    Accepts a (2^n, 2^n) matrix or a (2^n, F, 2^n, F) array carrying a
    cavity factor; no operator products are formed.
    """
    q = 1 << n_qubits
    if rho.shape[0] != q:
        raise core.DimensionMismatchError(
            f"leading dimension {rho.shape[0]} is not 2^{n_qubits}")
    f = 1 if rho.ndim == 2 else rho.shape[1]
    xr = rho.reshape((2,) * n_qubits + (f,) + (2,) * n_qubits + (f,))
    out = np.zeros_like(xr)
    for i in range(n_qubits):
        src = [slice(None)] * (2 * n_qubits + 2)
        dst = list(src)
        src[i] = 1
        src[n_qubits + 1 + i] = 1
        dst[i] = 0
        dst[n_qubits + 1 + i] = 0
        out[tuple(dst)] += xr[tuple(src)]
    return out.reshape(rho.shape)


@lru_cache(maxsize=None)
def dephase_mask(n_qubits: int) -> np.ndarray:
    """sum_i z_i outer z_i with z_i the sigma^z_i diagonal (+1 = excited).

    sum_i sigma^z_i rho sigma^z_i acts elementwise on the computational-
    basis matrix as mask * rho.
    """
    dim = 1 << n_qubits
    idx = np.arange(dim)
    mask = np.zeros((dim, dim))
    for i in range(n_qubits):
        z = np.where((idx >> (n_qubits - 1 - i)) & 1, 1.0, -1.0)
        mask += np.outer(z, z)
    mask.setflags(write=False)
    return mask


@dataclass(frozen=True)
class _PairMap:
    """One (source j) -> (target j') component of a summed local channel.

    The window [src_lo, src_lo+width) of row/column indices in the source
    block maps onto [dst_lo, dst_lo+width) in the target block with the
    elementwise weight matrix `weights`.
    """

    src: int
    dst: int
    src_lo: int
    dst_lo: int
    width: int
    weights: np.ndarray


@dataclass(frozen=True)
class SpinStructure:
    """Cached total-spin decomposition of an N-qubit register.

    Blocks are ordered by descending j; within a block the basis index p
    encodes m = -j + p (ascending).  `basis[bi][p]` holds the d_j columns
    |j, m, alpha> in the computational basis with a ladder-consistent
    alpha labelling, so collective matrix elements are alpha-independent.
    """

    n_qubits: int
    spins: tuple[float, ...]
    block_dims: tuple[int, ...]
    multiplicities: tuple[int, ...]
    jx_blocks: tuple[np.ndarray, ...]
    basis: tuple[tuple[np.ndarray, ...], ...]
    lower_maps: tuple[_PairMap, ...]
    dephase_maps: tuple[_PairMap, ...]

    def m_values(self, block: int) -> np.ndarray:
        j = self.spins[block]
        return -j + np.arange(self.block_dims[block], dtype=float)

    def assemble(self, blocks: list[np.ndarray]) -> np.ndarray:
        """Dense density matrix from coefficient blocks (tests/diagnostics).

        Blocks may be (s, s) qubit-only or (s, F, s, F) with a cavity factor.
        """
        q = 1 << self.n_qubits
        with_cavity = blocks[0].ndim == 4
        f = blocks[0].shape[1] if with_cavity else 1
        out = np.zeros((q, f, q, f), dtype=complex)
        for bi, c in enumerate(blocks):
            s = self.block_dims[bi]
            c4 = c.reshape(s, f, s, f)
            vs = np.stack([self.basis[bi][p] for p in range(s)])  # (s, q, d)
            out += np.einsum("pxa,pfqh,qya->xfyh", vs, c4, vs.conj(),
                             optimize=True)
        if with_cavity:
            return out.reshape(q * f, q * f)
        return out.reshape(q, q)

    def project(self, rho: np.ndarray, n_fock: int = 1) -> list[np.ndarray]:
        """Coefficient blocks of a permutation-invariant density matrix."""
        q = 1 << self.n_qubits
        r4 = rho.reshape(q, n_fock, q, n_fock)
        blocks = []
        for bi in range(len(self.spins)):
            s = self.block_dims[bi]
            d = self.multiplicities[bi]
            vs = np.stack([self.basis[bi][p] for p in range(s)])
            c = np.einsum("pxa,xfyh,qya->pfqh", vs.conj(), r4, vs,
                          optimize=True) / d
            blocks.append(c if n_fock > 1 else c.reshape(s, s))
        return blocks


def _bucket_eigenbasis(n: int, spins: tuple[float, ...]):
    """Simultaneous (J^2, Jz) eigenbasis, keyed by (block index, m index).

    J^2 + Jz has spectrum j(j+1) + m whose values are distinct across the
    whole (j, m) grid (consecutive-j ranges [j^2, (j+1)^2 - 1] never
    overlap), so one real-symmetric eigh resolves every sector.
    """
    dim = 1 << n
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    jx = sum(_site_matrix(sx, i, n) for i in range(n)) / 2.0
    jminus = sum(_site_matrix(core.sigma_minus().matrix, i, n)
                 for i in range(n))
    jplus = jminus.conj().T
    idx = np.arange(dim)
    jz_diag = sum(np.where((idx >> (n - 1 - i)) & 1, 0.5, -0.5)
                  for i in range(n))
    jy = (jplus - jminus) / 2j
    j2 = jx @ jx + jy @ jy + np.diag(jz_diag ** 2)
    a = np.real(j2 + np.diag(jz_diag))
    a = 0.5 * (a + a.T)
    lam, vec = np.linalg.eigh(a)

    table = {}
    for bi, j in enumerate(spins):
        for p in range(int(round(2 * j)) + 1):
            m = -j + p
            table[(bi, p)] = j * (j + 1) + m
    buckets: dict[tuple[int, int], list[np.ndarray]] = {}
    for col, lv in enumerate(lam):
        key = min(table, key=lambda k: abs(table[k] - lv))
        if abs(table[key] - lv) > 1e-6:
            raise core.InvariantViolationError(
                f"spin-sector eigenvalue {lv:.6f} matches no (j, m) entry")
        buckets.setdefault(key, []).append(vec[:, col])
    return jx, jminus, buckets


@lru_cache(maxsize=None)
def spin_structure(n_qubits: int) -> SpinStructure:
    """Build (and cache) the total-spin block structure for a register."""
    if not isinstance(n_qubits, int) or isinstance(n_qubits, bool):
        raise ValueError("n_qubits must be an integer")
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}]")
    n = n_qubits
    spins = tuple(n / 2.0 - i for i in range(n // 2 + 1))
    jx, jminus, buckets = _bucket_eigenbasis(n, spins)

    basis: list[tuple[np.ndarray, ...]] = []
    dims: list[int] = []
    mults: list[int] = []
    for bi, j in enumerate(spins):
        s = int(round(2 * j)) + 1
        k = int(round(n / 2 - j))
        expected = math.comb(n, k) - (math.comb(n, k - 1) if k >= 1 else 0)
        top = np.stack(buckets[(bi, s - 1)], axis=1)
        if top.shape[1] != expected:
            raise core.InvariantViolationError(
                f"j={j} multiplicity {top.shape[1]} != {expected}")
        cols = [None] * s
        cols[s - 1] = top.astype(complex)
        for p in range(s - 2, -1, -1):
            w = jminus @ cols[p + 1]
            norms = np.linalg.norm(w, axis=0)
            if norms.min() < 1e-12:
                raise core.InvariantViolationError("lowering chain collapsed")
            cols[p] = w / norms
        for p in range(s):
            gram = cols[p].conj().T @ cols[p]
            if np.abs(gram - np.eye(top.shape[1])).max() > 1e-10:
                raise core.InvariantViolationError(
                    f"non-orthonormal alpha family at j={j}, p={p}")
            cols[p].setflags(write=False)
        basis.append(tuple(cols))
        dims.append(s)
        mults.append(top.shape[1])

    jx_blocks = []
    for bi, j in enumerate(spins):
        s = dims[bi]
        d = mults[bi]
        x = np.empty((s, s), dtype=complex)
        for p in range(s):
            for q in range(s):
                x[p, q] = basis[bi][p][:, 0].conj() @ (jx @ basis[bi][q][:, 0])
        if d > 1:
            x1 = np.empty_like(x)
            for p in range(s):
                for q in range(s):
                    x1[p, q] = basis[bi][p][:, 1].conj() @ (jx @ basis[bi][q][:, 1])
            if np.abs(x - x1).max() > 1e-10:
                raise core.InvariantViolationError(
                    f"alpha-dependent collective matrix elements at j={j}")
        x.setflags(write=False)
        jx_blocks.append(x)

    zmask = dephase_mask(n)

    def decompose(kind: str) -> tuple[_PairMap, ...]:
        # kind "lower": sum sigma^-_i X sigma^+_i shifts m by -1;
        # kind "dephase": sum sigma^z_i X sigma^z_i keeps m.
        shift = -1 if kind == "lower" else 0
        weights: dict[tuple[int, int], np.ndarray] = {}
        windows: dict[tuple[int, int], tuple[int, int, int]] = {}
        for bi, j in enumerate(spins):
            for bj, j2 in enumerate(spins):
                if abs(j - j2) > 1.0:
                    continue
                m_lo = max(-j, -j2 - shift)
                m_hi = min(j, j2 - shift)
                width = int(round(m_hi - m_lo)) + 1
                if width <= 0:
                    continue
                windows[(bi, bj)] = (int(round(m_lo + j)),
                                     int(round(m_lo + shift + j2)), width)
                weights[(bi, bj)] = np.zeros((width, width))
        for bi, j in enumerate(spins):
            pairs = [(bj, windows[(bi, bj)]) for bj in range(len(spins))
                     if (bi, bj) in windows]
            src_lo = min(w[0] for _, w in pairs)
            src_hi = max(w[0] + w[2] for _, w in pairs)
            for p in range(src_lo, src_hi):
                for q in range(src_lo, src_hi):
                    t = basis[bi][p] @ basis[bi][q].conj().T
                    if kind == "lower":
                        y = local_lower_sandwich(t, n)
                    else:
                        y = zmask * t
                    total = 0.0
                    for bj, (lo, dst_lo, width) in pairs:
                        if not (lo <= p < lo + width and lo <= q < lo + width):
                            continue
                        r = dst_lo + (p - lo)
                        c = dst_lo + (q - lo)
                        coef = np.einsum("xa,xy,ya->", basis[bj][r].conj(), y,
                                         basis[bj][c], optimize=True)
                        coef /= mults[bj]
                        if abs(coef.imag) > 1e-10:
                            raise core.InvariantViolationError(
                                "complex channel coefficient in a real basis")
                        weights[(bi, bj)][p - lo, q - lo] = coef.real
                        total += mults[bj] * abs(coef) ** 2
                    ynorm = float(np.vdot(y, y).real)
                    if abs(ynorm - total) > 1e-8 * max(1.0, ynorm):
                        raise core.InvariantViolationError(
                            f"channel leaks out of the invariant subspace "
                            f"(HS norm {ynorm:.3e} vs {total:.3e})")
        out = []
        for (bi, bj), w in weights.items():
            if np.abs(w).max() == 0.0:
                continue
            w.setflags(write=False)
            lo, dst_lo, width = windows[(bi, bj)]
            out.append(_PairMap(bi, bj, lo, dst_lo, width, w))
        return tuple(out)

    return SpinStructure(
        n_qubits=n,
        spins=spins,
        block_dims=tuple(dims),
        multiplicities=tuple(mults),
        jx_blocks=tuple(jx_blocks),
        basis=tuple(basis),
        lower_maps=decompose("lower"),
        dephase_maps=decompose("dephase"),
    )


class SymmetricModel:
    """Lindblad generator for a collective-drive register in the block basis.

    Hamiltonian g (a e^{-i nu t} + a^dag e^{i nu t}) Jx acts within each
    spin block; cavity decay kappa, qubit relaxation gamma1 (summed
    sigma^-_i channels) and dephasing gamma2 (summed sigma^z_i channels)
    use the dissipator convention (rate/2)(2 A rho A^dag - {A^dag A, rho}).
    State vectors are the packed coefficient blocks, each shaped
    (2j+1, n_fock, 2j+1, n_fock).
    """

    def __init__(self, structure: SpinStructure, n_fock: int, g: float,
                 nu: float, kappa: float, gamma1: float, gamma2: float):
        if n_fock < 2:
            raise ValueError("n_fock must be >= 2")
        if min(kappa, gamma1, gamma2) < 0:
            raise ValueError("rates must be >= 0")
        if g < 0 or nu <= 0:
            raise ValueError("need g >= 0 and nu > 0")
        self.structure = structure
        self.n_fock = int(n_fock)
        self.g = float(g)
        self.nu = float(nu)
        self.kappa = float(kappa)
        self.gamma1 = float(gamma1)
        self.gamma2 = float(gamma2)

        nf = self.n_fock
        n = structure.n_qubits
        self.shapes = [(s, nf, s, nf) for s in structure.block_dims]
        sizes = [s * s * nf * nf for s in structure.block_dims]
        self.offsets = np.concatenate(([0], np.cumsum(sizes)))
        self.size = int(self.offsets[-1])
        self._sq = np.sqrt(np.arange(1, nf))
        self._cav_pair = np.outer(self._sq, self._sq)
        photons = np.arange(nf, dtype=float)
        self._damp = []
        for bi, s in enumerate(structure.block_dims):
            m = structure.m_values(bi)
            ew = (-(self.kappa / 2.0) * (photons[None, :, None, None]
                                         + photons[None, None, None, :])
                  - (self.gamma1 / 2.0) * (n + m[:, None, None, None]
                                           + m[None, None, :, None])
                  - self.gamma2 * n
                  + np.zeros((s, nf, s, nf)))
            ew.setflags(write=False)
            self._damp.append(ew)
        # per-block scratch reused across rhs calls (the returned state is
        # always freshly allocated; only intermediates live here)
        self._row = [np.empty(sh, dtype=complex) for sh in self.shapes]
        self._col = [np.empty(sh, dtype=complex) for sh in self.shapes]
        self._tmp = [np.empty(sh, dtype=complex) for sh in self.shapes]

    def unpack(self, y: np.ndarray) -> list[np.ndarray]:
        return [y[self.offsets[i]:self.offsets[i + 1]].reshape(sh)
                for i, sh in enumerate(self.shapes)]

    def initial_ground(self) -> np.ndarray:
        """|0...0> x |0>_c: the m = -N/2 corner of the largest-j block."""
        y = np.zeros(self.size, dtype=complex)
        y[0] = 1.0
        return y

    def rate_scale(self) -> float:
        field = 2.0 * math.sqrt(self.n_fock - 1)
        return max(self.g * field * self.structure.n_qubits / 2.0, self.nu,
                   self.kappa, self.gamma1, self.gamma2)

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        blocks = self.unpack(y)
        out = np.zeros_like(y)
        outb = self.unpack(out)
        ph = self.g * np.exp(-1j * self.nu * t)
        cph = np.conj(ph)
        sq = self._sq
        nf = self.n_fock
        for bi, c in enumerate(blocks):
            x = self.structure.jx_blocks[bi]
            row, col, tmp = self._row[bi], self._col[bi], self._tmp[bi]
            row[:, nf - 1] = 0.0
            np.multiply(c[:, 1:], (-1j * ph) * sq[None, :, None, None],
                        out=row[:, :nf - 1])
            row[:, 1:] += (-1j * cph) * sq[None, :, None, None] * c[:, :nf - 1]
            col[..., 0] = 0.0
            np.multiply(c[..., :nf - 1], (1j * ph) * sq[None, None, None, :],
                        out=col[..., 1:])
            col[..., :nf - 1] += (1j * cph) * sq[None, None, None, :] * c[..., 1:]
            o = outb[bi]
            o += np.tensordot(x, row, axes=(1, 0))
            o += np.tensordot(col, x, axes=(2, 0)).transpose(0, 1, 3, 2)
            np.multiply(self._damp[bi], c, out=tmp)
            o += tmp
            if self.kappa:
                o[:, :nf - 1, :, :nf - 1] += (
                    self.kappa * self._cav_pair[None, :, None, :]
                    * c[:, 1:, :, 1:])
        if self.gamma1:
            for pm in self.structure.lower_maps:
                cs = blocks[pm.src]
                d0, d1 = pm.dst_lo, pm.dst_lo + pm.width
                s0, s1 = pm.src_lo, pm.src_lo + pm.width
                outb[pm.dst][d0:d1, :, d0:d1] += (
                    self.gamma1 * pm.weights[:, None, :, None]
                    * cs[s0:s1, :, s0:s1])
        if self.gamma2:
            for pm in self.structure.dephase_maps:
                cs = blocks[pm.src]
                d0, d1 = pm.dst_lo, pm.dst_lo + pm.width
                s0, s1 = pm.src_lo, pm.src_lo + pm.width
                outb[pm.dst][d0:d1, :, d0:d1] += (
                    self.gamma2 * pm.weights[:, None, :, None]
                    * cs[s0:s1, :, s0:s1])
        return out

    def trace(self, y: np.ndarray) -> complex:
        blocks = self.unpack(y)
        return sum(d * np.einsum("pfpf->", c)
                   for d, c in zip(self.structure.multiplicities, blocks))

    def top_block_reduced(self, y: np.ndarray) -> np.ndarray:
        """Cavity-traced coefficient block of the maximal-spin sector."""
        return np.einsum("pfqf->pq", self.unpack(y)[0])

    def top_block_fidelity(self, y: np.ndarray, v: np.ndarray) -> float:
        val = float(np.real(v.conj() @ self.top_block_reduced(y) @ v))
        return min(max(val, 0.0), 1.0)

    def check_state(self, y: np.ndarray, t: float, dt: float) -> None:
        drift = abs(self.trace(y) - 1.0)
        if drift > 1e-7:
            raise core.InvariantViolationError(
                f"block-state trace drift {drift:.2e} at t={t:.4g}; "
                f"step dt={dt:.3e} is too coarse")
        for bi, c in enumerate(self.unpack(y)):
            s, nf = c.shape[0], c.shape[1]
            m = c.reshape(s * nf, s * nf)
            herm = float(np.abs(m - m.conj().T).max())
            if herm > 1e-9:
                raise core.InvariantViolationError(
                    f"block {bi} hermiticity defect {herm:.2e} at t={t:.4g}")
            w_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
            if w_min < -1e-7:
                raise core.InvariantViolationError(
                    f"block {bi} min eigenvalue {w_min:.2e} at t={t:.4g}; "
                    f"step dt={dt:.3e} is too coarse")
