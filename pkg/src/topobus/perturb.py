"""Perturbation theory for the edge-state splitting under local disorder.

The chirality of the two end states forces every diagonal element
<psi|V|psi> of a particle-hole-odd perturbation to vanish, so the
first-order shift of the +/-1 doublet comes entirely from the
left-right cross element.  With the normalized chirality pair of
`nanowire.extract_edge_states` (so that psi_{+-1} = (psi_L +/- psi_R)
/ sqrt(2) exactly) the corrections are

    d1_{+-1}   = +- Re<psi_L|V|psi_R>
    d2_{+1}    = sum_{m not in {+-1}} |<psi_m|V|psi_{+1}>|^2
                 / (eps_1 - eps_m)   +   |Im<psi_L|V|psi_R>|^2/(2 eps_1)

and the -1 level mirrors both with the opposite sign.  The module
computes the two levels from independent sums and exposes the
bulk/edge split of d2; `compare_exact` validates the whole expansion
against direct diagonalization, where the leftover residual must
scale as the third power of the disorder strength.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import core, nanowire
from .core import Operator, TopobusError
from .nanowire import (BdgSpectrum, DisorderRealization, DisorderSpec,
                       EdgeStatePair, NanowireParams)

__all__ = [
    "DegenerateSplittingError",
    "FirstOrder",
    "PerturbationResult",
    "CleanReference",
    "CompareRow",
    "perturbation_operator",
    "first_order",
    "second_order",
    "compare_exact",
    "median_residuals",
    "residual_slope",
]


class DegenerateSplittingError(TopobusError):
    """eps_1 at (or below) numerical zero: Eq-type 1/eps_1 terms undefined."""


def perturbation_operator(params: NanowireParams, spec: DisorderSpec,
                          realization: DisorderRealization) -> Operator:
    """V = H(disordered) - H(clean), verified particle-hole odd."""
    if realization.kind != spec.kind:
        raise ValueError(
            f"realization kind {realization.kind!r} does not match spec {spec.kind!r}")
    v = nanowire._assemble(params, realization) - nanowire._assemble(params)
    nanowire.particle_hole_operator(params.n_sites).verify(v)
    return Operator(core.HilbertSpace((4 * params.n_sites,)), v, unit="meV")


@dataclass(frozen=True)
class FirstOrder:
    delta_plus: float
    delta_minus: float
    cross: complex          # <psi_L|V|psi_R>
    diag_l: float           # <psi_L|V|psi_L>, identically 0 up to roundoff
    diag_r: float


def first_order(edge: EdgeStatePair, v: Operator | np.ndarray) -> FirstOrder:
    """Level shifts of the +/-1 doublet; both evaluated directly."""
    vm = v.matrix if isinstance(v, Operator) else np.asarray(v)
    vl = vm @ edge.psi_l
    vr = vm @ edge.psi_r
    plus, minus = edge.psi_plus, edge.psi_minus
    return FirstOrder(
        delta_plus=float(np.vdot(plus, vm @ plus).real),
        delta_minus=float(np.vdot(minus, vm @ minus).real),
        cross=complex(np.vdot(edge.psi_l, vr)),
        diag_l=float(np.vdot(edge.psi_l, vl).real),
        diag_r=float(np.vdot(edge.psi_r, vr).real),
    )


@dataclass(frozen=True)
class PerturbationResult:
    """Second-order shifts of the doublet, split into bulk and edge parts.

    term_edge is the contribution of the opposite doublet member (the
    only small denominator); term_bulk collects every state outside
    the doublet.  l_elements[m], r_elements[m] are <psi_L|V|psi_m> and
    <psi_m|V|psi_R> over the full ascending eigenbasis.
    """

    delta_plus: float
    delta_minus: float
    term_bulk_plus: float
    term_edge_plus: float
    term_bulk_minus: float
    term_edge_minus: float
    l_elements: np.ndarray
    r_elements: np.ndarray

    def __post_init__(self):
        for name in ("l_elements", "r_elements"):
            a = np.asarray(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def second_order(spectrum: BdgSpectrum, edge: EdgeStatePair,
                 v: Operator | np.ndarray) -> PerturbationResult:
    """Exact second-order sums over the full eigenbasis.

    Requires the un-perturbed spectrum with eigenvectors; refuses to
    evaluate at an exact magic point (eps_1 below 1e-12 meV) where the
    doublet denominator would make the series meaningless.

    The intra-doublet element <psi_{-1}|V|psi_{+1}> = psi_{+1}^T (M V)
    psi_{+1} with M the particle-hole permutation; M V is antisymmetric
    whenever V is Hermitian and particle-hole odd, so term_edge
    vanishes identically for every physical disorder, not just
    exponentially in L.  It is still evaluated (as the m = -1 member
    of the exact sum) so the cancellation is observed, not assumed.
    """
    eps1 = spectrum.eps(1)
    if eps1 < 1e-12:
        raise DegenerateSplittingError(
            f"eps_1 = {eps1:.3e} meV: degenerate doublet, "
            "second-order expression is singular")
    vm = v.matrix if isinstance(v, Operator) else np.asarray(v)
    w = spectrum.eigenvalues
    vecs = spectrum.eigenvectors
    half = len(w) // 2
    i_plus, i_minus = half, half - 1

    lv = vecs.conj().T @ (vm @ edge.psi_l)   # <psi_m|V|psi_L>
    rv = vecs.conj().T @ (vm @ edge.psi_r)   # <psi_m|V|psi_R>
    amp_plus = (lv + rv) / np.sqrt(2.0)      # <psi_m|V|psi_{+1}>
    amp_minus = (lv - rv) / np.sqrt(2.0)     # <psi_m|V|psi_{-1}>

    bulk = np.ones(len(w), dtype=bool)
    bulk[[i_plus, i_minus]] = False

    bulk_plus = float(np.sum(np.abs(amp_plus[bulk]) ** 2 / (eps1 - w[bulk])))
    edge_plus = float(np.abs(amp_plus[i_minus]) ** 2 / (2.0 * eps1))
    bulk_minus = float(np.sum(np.abs(amp_minus[bulk]) ** 2 / (-eps1 - w[bulk])))
    edge_minus = float(np.abs(amp_minus[i_plus]) ** 2 / (-2.0 * eps1))

    return PerturbationResult(
        delta_plus=bulk_plus + edge_plus,
        delta_minus=bulk_minus + edge_minus,
        term_bulk_plus=bulk_plus,
        term_edge_plus=edge_plus,
        term_bulk_minus=bulk_minus,
        term_edge_minus=edge_minus,
        l_elements=np.conj(lv),
        r_elements=rv,
    )


@dataclass(frozen=True)
class CleanReference:
    """One dense solve of the clean chain, reused across realizations."""

    params: NanowireParams
    spectrum: BdgSpectrum
    edge: EdgeStatePair

    @classmethod
    def build(cls, params: NanowireParams) -> "CleanReference":
        spectrum = nanowire.diagonalize(nanowire.build_bdg(params))
        edge = nanowire.extract_edge_states(spectrum)
        return cls(params=params, spectrum=spectrum, edge=edge)


@dataclass(frozen=True)
class CompareRow:
    realization: int
    w: float
    eps1_exact: float
    eps1_pert: float
    d1: float
    d2_bulk: float
    d2_edge: float

    @property
    def residual(self) -> float:
        return self.eps1_exact - self.eps1_pert


def compare_exact(params: NanowireParams, spec: DisorderSpec,
                  reference: CleanReference | None = None) -> list[CompareRow]:
    """Perturbative prediction against direct diagonalization.

    eps1_pert = eps1 + d1_{+1} + d2_{+1}; the residual carries every
    third-and-higher-order contribution.
    """
    ref = reference if reference is not None else CleanReference.build(params)
    eps1_clean = ref.spectrum.eps(1)
    rows = []
    for j in range(spec.n_realizations):
        real = nanowire.draw_realization(spec, params.n_sites, j)
        v = perturbation_operator(params, spec, real)
        fo = first_order(ref.edge, v)
        so = second_order(ref.spectrum, ref.edge, v)
        h_dis = nanowire._assemble(params, real)
        w_dis = nanowire._eigvals_banded(h_dis)
        eps1_exact = float(w_dis[len(w_dis) // 2])
        rows.append(CompareRow(
            realization=j,
            w=spec.amplitude,
            eps1_exact=eps1_exact,
            eps1_pert=eps1_clean + fo.delta_plus + so.delta_plus,
            d1=fo.delta_plus,
            d2_bulk=so.term_bulk_plus,
            d2_edge=so.term_edge_plus,
        ))
    return rows


def median_residuals(rows: Iterable[CompareRow]) -> dict[float, float]:
    """Median |residual| per disorder strength."""
    groups: dict[float, list[float]] = {}
    for r in rows:
        groups.setdefault(r.w, []).append(abs(r.residual))
    return {w: float(np.median(vals)) for w, vals in sorted(groups.items())}


def residual_slope(rows: Iterable[CompareRow]) -> float:
    """Log-log scaling exponent of the median residual vs W.

    An expansion exact through second order leaves a residual growing
    as W^3, so the fitted slope should sit near 3.
    """
    med = median_residuals(rows)
    if len(med) < 2:
        raise ValueError("need residuals at >= 2 distinct W to fit a slope")
    w = np.log(np.array(list(med.keys())))
    r = np.log(np.array(list(med.values())))
    slope, _ = np.polyfit(w, r, 1)
    return float(slope)
