import math

import numpy as np
import pytest

from rdolp import (
    BoundStatus,
    BracketFailure,
    InfeasibleLevel,
    PathCompleteCertificate,
    jsr_lower_bound,
    jsr_upper_bound,
    membership_by_simulation,
    multi_ellipsoid_invariant_set,
    normalize_rhs,
    path_complete_feasible,
    solve_outer,
    spectral_radius,
    switched_fixed_point,
    switched_inner_qp,
    switched_inner_sdp,
    switched_lower_bound,
    verify_certificate,
)
from rdolp.core import InsideUpTo

import sample_instances as si


class TestJsrLowerBound:
    def test_single_matrix_is_spectral_radius(self, corner_box):
        G = corner_box.dynamics.matrices[0]
        lb = jsr_lower_bound(corner_box.dynamics, 3)
        assert lb == pytest.approx(spectral_radius(G), abs=1e-10)

    def test_switched_pair_near_one(self, switched_pair):
        # sqrt of rho(G1 G2) dominates the short products here
        lb = jsr_lower_bound(switched_pair.dynamics, 2)
        assert lb == pytest.approx(0.99501, abs=1e-4)

    def test_grows_with_k(self, switched_pair):
        l2 = jsr_lower_bound(switched_pair.dynamics, 2)
        l4 = jsr_lower_bound(switched_pair.dynamics, 4)
        assert l4 >= l2 - 1e-12

    def test_zero_dynamics(self, zero_dynamics):
        assert jsr_lower_bound(zero_dynamics.dynamics, 3) == 0.0


class TestPathCompleteFeasible:
    def test_pair_needs_two_forms(self, switched_pair):
        assert path_complete_feasible(switched_pair.dynamics, 1) is None
        cert = path_complete_feasible(switched_pair.dynamics, 2)
        assert cert is not None
        assert cert.l == 2
        assert cert.margin >= 1e-6
        assert set(dict(cert.forms)) == {(0,), (1,)}

    def test_rank_one_pair_single_form(self):
        inst = si.one_hot_pair(0.7)
        cert = path_complete_feasible(inst.dynamics, 1)
        assert cert is not None
        assert verify_certificate(cert, inst.dynamics)

    def test_certificate_survives_reverification(self, switched_pair):
        cert = path_complete_feasible(switched_pair.dynamics, 2)
        assert verify_certificate(cert, switched_pair.dynamics)

    def test_tampered_certificate_fails(self, switched_pair):
        cert = path_complete_feasible(switched_pair.dynamics, 2)
        bad = PathCompleteCertificate(
            l=cert.l,
            forms=tuple((w, -H) for w, H in cert.forms),
            margin=cert.margin,
        )
        assert not verify_certificate(bad, switched_pair.dynamics)

    def test_single_stable_matrix(self, corner_box):
        cert = path_complete_feasible(corner_box.dynamics, 1)
        assert cert is not None

    def test_expanding_family_infeasible(self):
        inst = si.switched_pair(scale=0.6)  # products grow without bound
        assert path_complete_feasible(inst.dynamics, 1) is None
        assert path_complete_feasible(inst.dynamics, 2) is None


class TestJsrUpperBound:
    def test_single_matrix_bracket(self, corner_box):
        rho = spectral_radius(corner_box.dynamics.matrices[0])
        jb = jsr_upper_bound(corner_box.dynamics, l=1, tol=1e-3)
        assert jb.lower == pytest.approx(rho, abs=1e-10)
        assert rho <= jb.upper <= rho * 1.01
        assert jb.upper - jb.lower <= 2e-3 * jb.upper

    def test_switched_pair_bracket(self, switched_pair):
        jb = jsr_upper_bound(switched_pair.dynamics, l=2, tol=1e-3)
        assert jb.lower == pytest.approx(0.99501, abs=1e-4)
        assert jb.upper >= jb.lower - 1e-9
        assert jb.upper <= 1.0  # the pair is certifiably stable
        assert jb.iterations <= 40

    def test_zero_dynamics(self, zero_dynamics):
        jb = jsr_upper_bound(zero_dynamics.dynamics)
        assert (jb.lower, jb.upper) == (0.0, 0.0)

    def test_upper_certifies_scaled_feasibility(self, switched_pair):
        """At any beta above the returned upper bound the level-l family
        must be feasible."""
        jb = jsr_upper_bound(switched_pair.dynamics, l=2, tol=1e-2)
        from rdolp.core import Dynamics

        beta = jb.upper * 1.001
        scaled = Dynamics(
            tuple(M / beta for M in switched_pair.dynamics.matrices)
        )
        assert path_complete_feasible(scaled, 2) is not None

    def test_bracket_failure_carries_norm_bound(self):
        err = BracketFailure("no certificate", norm_bound=2.5)
        assert err.norm_bound == 2.5


class TestMultiEllipsoidInvariantSet:
    def test_family_shape_and_level(self, switched_pair):
        fam = multi_ellipsoid_invariant_set(switched_pair, 2)
        assert fam.l == 2
        assert len(fam.forms) == 2
        assert fam.alpha > 0

    def test_invariance_on_samples(self, switched_pair, rng):
        """W(G_j x) <= W(x) for every generator on sampled members."""
        fam = multi_ellipsoid_invariant_set(switched_pair, 2)
        count = 0
        while count < 100:
            x = rng.uniform(-1.0, 1.0, size=2)
            if fam.value(x) > fam.alpha:
                continue
            count += 1
            for G in switched_pair.dynamics.matrices:
                assert fam.value(G @ x) <= fam.value(x) + 1e-9

    def test_containment_in_polytope(self, switched_pair):
        fam = multi_ellipsoid_invariant_set(switched_pair, 2)
        A, b = switched_pair.polytope.A, switched_pair.polytope.b
        for i in range(A.shape[0]):
            assert fam.support(A[i]) <= b[i] + 1e-7

    def test_infeasible_level_raises(self, switched_pair):
        with pytest.raises(InfeasibleLevel):
            multi_ellipsoid_invariant_set(switched_pair, 1)


class TestSwitchedOuter:
    def test_lower_values(self, switched_pair):
        vals = [switched_lower_bound(switched_pair, r).lower for r in range(3)]
        np.testing.assert_allclose(
            vals, [-4.0 / 3.0, -0.937445, -0.865705], atol=1e-5
        )

    def test_no_fixed_point_early(self, switched_pair):
        assert not switched_fixed_point(switched_pair, 0)
        assert not switched_fixed_point(switched_pair, 2)

    def test_solve_outer_caps(self, switched_pair):
        led = solve_outer(switched_pair, r_max=3)
        assert led.status is BoundStatus.LEVEL_CAP_REACHED


class TestSwitchedInnerQp:
    def test_nonincreasing_and_above_lower(self, switched_pair):
        fam = multi_ellipsoid_invariant_set(switched_pair, 2)
        best_lower = switched_lower_bound(switched_pair, 2).lower
        prev = math.inf
        for r in range(3):
            lv = switched_inner_qp(switched_pair, fam, r)
            assert lv.value <= prev + 1e-8
            assert lv.value >= best_lower - 1e-6
            prev = lv.value

    def test_witness_membership(self, switched_pair):
        fam = multi_ellipsoid_invariant_set(switched_pair, 2)
        lv = switched_inner_qp(switched_pair, fam, 1)
        verdict = membership_by_simulation(switched_pair, lv.witness, 10)
        assert isinstance(verdict, InsideUpTo)


class TestSwitchedInnerSdp:
    def test_level_values(self, switched_pair):
        vals = [switched_inner_sdp(switched_pair, 2, r).value for r in range(3)]
        np.testing.assert_allclose(
            vals, [-0.797325, -0.824908, -0.841749], atol=5e-4
        )

    def test_tighter_than_fixed_family(self, switched_pair):
        fam = multi_ellipsoid_invariant_set(switched_pair, 2)
        for r in range(2):
            qp = switched_inner_qp(switched_pair, fam, r).value
            sdp = switched_inner_sdp(switched_pair, 2, r).value
            assert sdp <= qp + 1e-6

    def test_family_certificate_properties(self, switched_pair, rng):
        """The per-level family must itself be invariant and sit inside P."""
        lv = switched_inner_sdp(switched_pair, 2, 1)
        fam = lv.ellipsoid
        norm = normalize_rhs(switched_pair)
        A = norm.polytope.A
        ref = fam.form((0,))
        for i in range(A.shape[0]):
            a = A[i]
            assert math.sqrt(
                fam.alpha * float(a @ np.linalg.solve(ref, a))
            ) <= 1.0 + 1e-6
        for _ in range(50):
            x = rng.uniform(-0.6, 0.6, size=2)
            if fam.value(x) > fam.alpha:
                continue
            for G in switched_pair.dynamics.matrices:
                assert fam.value(G @ x) <= fam.alpha + 1e-7

    def test_witness_membership(self, switched_pair):
        lv = switched_inner_sdp(switched_pair, 2, 2)
        verdict = membership_by_simulation(switched_pair, lv.witness, 10)
        assert isinstance(verdict, InsideUpTo)

    def test_single_form_level(self):
        inst = si.one_hot_pair(0.7)
        lv = switched_inner_sdp(inst, 1, 0)
        assert lv.value <= 0.0 + 1e-9
        assert lv.ellipsoid.l == 1
