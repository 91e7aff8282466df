"""Perturbation-theory tests: cancellation identities, scaling, guards."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topobus import nanowire as nw
from topobus import perturb as pt


@pytest.fixture(scope="module")
def ref300():
    return pt.CleanReference.build(nw.NanowireParams(n_sites=300, zeeman_h_mev=1.5))


def make_v(params, kind, w, seed, index=0):
    spec = nw.DisorderSpec(kind, w, index + 1, seed)
    real = nw.draw_realization(spec, params.n_sites, index)
    return spec, pt.perturbation_operator(params, spec, real)


class TestPerturbationOperator:
    def test_zero_disorder(self):
        p = nw.NanowireParams(n_sites=40, zeeman_h_mev=1.5)
        _, v = make_v(p, "chemical_potential", 0.0, 1)
        assert np.all(v.matrix == 0)

    def test_chemical_is_diagonal_and_bounded(self):
        p = nw.NanowireParams(n_sites=40, zeeman_h_mev=1.5)
        _, v = make_v(p, "chemical_potential", 0.3, 2)
        off = v.matrix - np.diag(np.diagonal(v.matrix))
        assert np.max(np.abs(off)) == 0.0
        assert np.max(np.abs(v.matrix)) <= 0.3

    def test_kind_mismatch_rejected(self):
        p = nw.NanowireParams(n_sites=20, zeeman_h_mev=1.5)
        spec_a = nw.DisorderSpec("chemical_potential", 0.1, 1, 3)
        real_b = nw.draw_realization(
            nw.DisorderSpec("pairing_phase", 0.1, 1, 3), 20, 0)
        with pytest.raises(ValueError):
            pt.perturbation_operator(p, spec_a, real_b)

    @settings(max_examples=12)
    @given(seed=st.integers(0, 9999),
           kind=st.sampled_from(["chemical_potential", "pairing_phase",
                                 "nuclear_zeeman"]))
    def test_particle_hole_odd(self, seed, kind):
        p = nw.NanowireParams(n_sites=24, zeeman_h_mev=1.5)
        w = 0.1 if kind != "pairing_phase" else 0.8
        _, v = make_v(p, kind, w, seed)
        sigma = nw.particle_hole_operator(24)
        assert np.max(np.abs(sigma.conjugate_matrix(v.matrix) + v.matrix)) < 1e-12


class TestFirstOrder:
    def test_diagonal_identity_all_kinds(self, ref300):
        p = ref300.params
        for kind, w in (("chemical_potential", 0.2),
                        ("pairing_phase", 0.8),
                        ("nuclear_zeeman", 0.1)):
            _, v = make_v(p, kind, w, 17)
            fo = pt.first_order(ref300.edge, v)
            bound = 1e-10 * np.linalg.norm(v.matrix, 2)
            assert abs(fo.diag_l) < bound
            assert abs(fo.diag_r) < bound

    def test_shift_equals_re_cross(self, ref300):
        _, v = make_v(ref300.params, "chemical_potential", 0.1, 23)
        fo = pt.first_order(ref300.edge, v)
        assert fo.delta_plus == pytest.approx(fo.cross.real, abs=1e-15)
        assert fo.delta_minus == pytest.approx(-fo.cross.real, abs=1e-15)

    def test_small_relative_shift(self, ref300):
        # the tail-suppressed cross element stays well below eps1
        eps1 = ref300.spectrum.eps(1)
        for seed in range(5):
            _, v = make_v(ref300.params, "chemical_potential", 0.1, 31 + seed)
            fo = pt.first_order(ref300.edge, v)
            assert abs(fo.delta_plus) / eps1 < 0.2


class TestSecondOrder:
    def test_split_invariant_and_antisymmetry(self, ref300):
        for kind, w in (("chemical_potential", 0.08), ("pairing_phase", 0.3),
                        ("nuclear_zeeman", 0.05)):
            _, v = make_v(ref300.params, kind, w, 41)
            so = pt.second_order(ref300.spectrum, ref300.edge, v)
            assert so.delta_plus == pytest.approx(
                so.term_bulk_plus + so.term_edge_plus, abs=1e-12)
            assert abs(so.delta_plus + so.delta_minus) < 1e-10 * abs(so.delta_plus)

    def test_doublet_element_vanishes_identically(self, ref300):
        # M V antisymmetric => <psi_-1|V|psi_+1> = 0 exactly, so the
        # small-denominator term never activates for physical disorder
        for kind, w in (("chemical_potential", 0.2), ("pairing_phase", 0.8),
                        ("nuclear_zeeman", 0.1)):
            _, v = make_v(ref300.params, kind, w, 53)
            el = np.vdot(ref300.edge.psi_minus, v.matrix @ ref300.edge.psi_plus)
            assert abs(el) < 1e-13 * np.linalg.norm(v.matrix, 2)
            so = pt.second_order(ref300.spectrum, ref300.edge, v)
            assert abs(so.term_edge_plus) < 1e-25

    def test_matrix_elements_definition(self, ref300):
        _, v = make_v(ref300.params, "pairing_phase", 0.5, 61)
        so = pt.second_order(ref300.spectrum, ref300.edge, v)
        n = ref300.spectrum.dim // 2 + 5  # an arbitrary bulk level
        psi_n = ref300.spectrum.eigenvectors[:, n]
        assert so.l_elements[n] == pytest.approx(
            complex(np.vdot(ref300.edge.psi_l, v.matrix @ psi_n)), abs=1e-14)
        assert so.r_elements[n] == pytest.approx(
            complex(np.vdot(psi_n, v.matrix @ ref300.edge.psi_r)), abs=1e-14)

    def test_degenerate_point_refused(self):
        w = np.array([-0.5, -1e-13, 1e-13, 0.5])
        spec = nw.BdgSpectrum(w, np.eye(4, dtype=complex))
        edge = nw.EdgeStatePair(np.eye(4, dtype=complex)[:, 0],
                                np.eye(4, dtype=complex)[:, 1], 1e-13)
        with pytest.raises(pt.DegenerateSplittingError):
            pt.second_order(spec, edge, np.zeros((4, 4), dtype=complex))


class TestCompareExact:
    def test_zero_disorder_zero_residual(self):
        p = nw.NanowireParams(n_sites=100, zeeman_h_mev=1.6)
        rows = pt.compare_exact(p, nw.DisorderSpec("chemical_potential", 0.0, 2, 7))
        for r in rows:
            assert abs(r.residual) < 1e-10
            assert r.d1 == 0.0 and r.d2_bulk == 0.0

    def test_third_order_scaling_small_chain(self):
        p = nw.NanowireParams(n_sites=150, zeeman_h_mev=1.6)
        ref = pt.CleanReference.build(p)
        rows = []
        for w in (0.01, 0.02, 0.04, 0.08):
            rows += pt.compare_exact(
                p, nw.DisorderSpec("chemical_potential", w, 8, 77), ref)
        slope = pt.residual_slope(rows)
        assert 2.5 < slope < 3.5

    def test_residual_below_second_order(self):
        p = nw.NanowireParams(n_sites=150, zeeman_h_mev=1.6)
        ref = pt.CleanReference.build(p)
        rows = pt.compare_exact(
            p, nw.DisorderSpec("chemical_potential", 0.02, 8, 3), ref)
        med_res = np.median([abs(r.residual) for r in rows])
        med_d2 = np.median([abs(r.d2_bulk + r.d2_edge) for r in rows])
        assert med_res < med_d2


class TestScalingHelpers:
    def test_known_cubic(self):
        rows = [pt.CompareRow(0, w, w**3, 0.0, 0, 0, 0)
                for w in (0.01, 0.02, 0.04, 0.08)]
        assert pt.residual_slope(rows) == pytest.approx(3.0, abs=1e-12)

    def test_single_w_rejected(self):
        rows = [pt.CompareRow(0, 0.01, 1e-6, 0.0, 0, 0, 0)]
        with pytest.raises(ValueError):
            pt.residual_slope(rows)

    def test_median_grouping(self):
        rows = [pt.CompareRow(j, 0.1, 1.0 + j, 1.0, 0, 0, 0) for j in range(3)]
        med = pt.median_residuals(rows)
        assert med == {0.1: 1.0}
