"""Tests for the coefficient ladder and the interpolation series."""

import math

import mpmath
import numpy as np
import pytest

from discinterp.geometry import DiscSequence
from discinterp.growth import GrowthFunction
from discinterp.interpolation import (
    LadderError,
    TargetData,
    build_interpolant,
    build_ladder,
    growth_report,
    ladder_for_sequence,
    max_term_bound_report,
    select_exponents,
)
from discinterp.products import CanonicalProduct

from helpers import lattice_instance, small_radial_instance

GF1 = GrowthFunction.power(1.0)


class TestBuildLadder:
    def test_zeroth_coefficient_is_value_at_zero(self):
        # the conjugate objective is decreasing in u at n = 0, so the sup
        # sits at u = 0 and ln phi_0 = C0 psi_tilde(C0)
        for gf in (GF1, GrowthFunction.log_power(2.0)):
            for C0 in (2.0, 8.0):
                ladder = build_ladder(gf, C0, 10)
                assert ladder.log_coeffs[0] == pytest.approx(
                    C0 * float(gf.psi_tilde(C0)), rel=1e-12)

    def test_power_one_closed_form_conjugate(self):
        # for psi = x the conjugate of C0 (C0 e^u - 1) is explicit
        C0 = 2.0
        ladder = build_ladder(GF1, C0, 30)
        for n in range(31):
            if n <= C0**2:
                expected = -(C0**2 - C0)
            else:
                expected = n * math.log(n / C0**2) - n + C0
            assert -ladder.log_coeffs[n] == pytest.approx(expected, abs=1e-8)

    def test_kappa_nondecreasing_exactly(self):
        for gf in (GrowthFunction.power(0.5), GF1, GrowthFunction.power(2.0),
                   GrowthFunction.log_power(2.0), GrowthFunction.exp_log_power(0.5)):
            ladder = build_ladder(gf, 8.0, 400)
            diffs = np.diff(ladder.log_kappas[1:])
            assert np.all(diffs >= 0.0)

    def test_too_slow_growth_raises(self):
        with pytest.raises(LadderError):
            build_ladder(GrowthFunction.log_power(0.0), 2.0, 50)

    def test_c0_floor(self):
        with pytest.raises(LadderError):
            build_ladder(GF1, 1.0, 10)


class TestSelectExponents:
    def test_bucket_matches_scan_oracle(self):
        rng = np.random.default_rng(50)
        seq = DiscSequence([0.3, 0.6, 0.85, 0.93])
        ladder = ladder_for_sequence(GF1, 8.0, seq)
        s = select_exponents(ladder, seq)
        for k, p in enumerate(seq):
            log_t = -math.log1p(-p.modulus)
            arr = ladder.log_coeffs + np.arange(len(ladder.log_coeffs)) * log_t
            best = len(arr) - 1 - int(np.argmax(arr[::-1]))  # ties to larger
            assert s[k] == best

    def test_monotone_in_modulus(self):
        seq = DiscSequence([0.2, 0.5, 0.8, 0.95])
        ladder = ladder_for_sequence(GrowthFunction.power(2.0), 8.0, seq)
        s = select_exponents(ladder, seq)
        assert np.all(np.diff(s) >= 0)

    def test_clamped_lowest_bucket(self):
        # a node essentially at the origin falls below kappa_1
        seq = DiscSequence([1e-8])
        ladder = build_ladder(GrowthFunction.log_power(2.0), 2.0, 50)
        s = select_exponents(ladder, seq)
        assert s[0] == 1

    def test_ladder_too_short(self):
        seq = DiscSequence([0.99])
        ladder = build_ladder(GF1, 8.0, 5)
        with pytest.raises(LadderError):
            select_exponents(ladder, seq)


class TestMaxTermBounds:
    @pytest.mark.parametrize("gf", [GrowthFunction.power(0.5), GF1,
                                    GrowthFunction.power(2.0),
                                    GrowthFunction.log_power(2.0),
                                    GrowthFunction.exp_log_power(0.5)],
                             ids=lambda g: f"{g.family}-{g.param}")
    def test_literal_bounds_at_c0_two(self, gf):
        ladder = build_ladder(gf, 2.0, 2000)
        grid = np.geomspace(1.0, 50.0, 50)
        rep = max_term_bound_report(ladder, grid)
        assert rep.t0_literal is not None

    def test_scaled_bounds_at_c0_eight(self):
        ladder = build_ladder(GF1, 8.0, 4000)
        grid = np.geomspace(1.0, 40.0, 50)
        rep = max_term_bound_report(ladder, grid)
        assert rep.t0_scaled is not None


class TestTargets:
    def test_admissibility_constant(self):
        seq = DiscSequence([0.5, 0.9])
        tilde = np.asarray(GF1.psi_tilde(1 / (1 - seq.moduli)))
        values = [math.exp(2.0 * tilde[0]), math.exp(0.5 * tilde[1])]
        td = TargetData.from_values(seq, GF1, values)
        assert td.admissibility_constant == pytest.approx(2.0, rel=1e-12)

    def test_zero_targets_have_zero_constant(self):
        seq = DiscSequence([0.5, 0.9])
        td = TargetData.from_values(seq, GF1, [0.0, 0.0])
        assert td.admissibility_constant == 0.0

    def test_length_mismatch(self):
        with pytest.raises(Exception):
            TargetData.from_values(DiscSequence([0.5]), GF1, [1.0, 2.0])


class TestInterpolationIdentity:
    def test_forced_singleton(self):
        seq = DiscSequence([0.5])
        f = build_interpolant(seq, [1.0], GF1)
        assert f.eval(0.5) == pytest.approx(1.0, abs=1e-12)

    def test_zero_targets_give_zero_function(self):
        seq = DiscSequence([0.5, -0.3j, 0.7])
        f = build_interpolant(seq, [0.0, 0.0, 0.0], GF1)
        for z in (0.0, 0.2 + 0.2j, 0.5, 0.9):
            assert f.eval(z) == 0.0

    def test_empty_sequence(self):
        f = build_interpolant(DiscSequence([]), [], GF1)
        assert f.eval(0.3) == 0.0

    @pytest.mark.parametrize("gf", [GrowthFunction.power(0.5), GF1,
                                    GrowthFunction.power(2.0),
                                    GrowthFunction.log_power(2.0)],
                             ids=lambda g: f"{g.family}-{g.param}")
    def test_identity_on_lattice_instances(self, gf):
        seq, targets = lattice_instance(seed=7, gf=gf, max_points=40)
        f = build_interpolant(seq, targets, gf)
        assert float(f.interpolation_errors().max()) < 1e-8

    def test_node_values_exact_bitwise(self):
        seq, targets = small_radial_instance(GF1)
        f = build_interpolant(seq, targets, GF1)
        vals = f.eval_many(seq.values)
        # the k-th term cancels the cached node derivative exactly and the
        # other terms vanish identically, so only log-sum rounding remains
        assert np.all(np.abs(vals - targets) <= 1e-10 * (1 + np.abs(targets)))


class TestNearNodeEvaluation:
    def _mp_eval(self, seq, s, exps, targets, z, prec=60):
        """Independent high-precision evaluation of the raw series."""
        with mpmath.workprec(int(prec * 3.33)):
            nodes = [mpmath.mpc(v) for v in seq.values]

            def E(w):
                q = mpmath.fsum([w**j / j for j in range(1, s + 1)])
                return (1 - w) * mpmath.exp(q)

            def A(n, zz):
                return (1 - abs(nodes[n]) ** 2) / (1 - mpmath.conj(nodes[n]) * zz)

            def P(zz):
                return mpmath.fprod([E(A(n, zz)) for n in range(len(nodes))])

            total = mpmath.mpc(0)
            for n in range(len(nodes)):
                pn = mpmath.diff(P, nodes[n])
                term = (mpmath.mpc(targets[n]) / (z - nodes[n])) * P(z) / pn
                term *= A(n, z) ** (exps[n] - 1)
                total += term
            return complex(total)

    def test_matches_high_precision_near_node(self):
        seq = DiscSequence([0.4, -0.2 + 0.3j, 0.65, 0.1 - 0.5j])
        gf = GF1
        targets = np.array([1.5, -2.0 + 1j, 3j, 0.7])
        f = build_interpolant(seq, targets, gf, C0=2.0)
        for k in (0, 2):
            zk = seq[k].value
            z = zk + 1e-9 * (1 - seq[k].modulus)
            ours = f.eval(z)
            oracle = self._mp_eval(seq, gf.genus, f.exponents, targets, mpmath.mpc(z))
            assert ours == pytest.approx(oracle, rel=1e-8)
            assert abs(ours - targets[k]) < 1e-6 * (1 + abs(targets[k]))

    def test_continuity_walk_onto_node(self):
        seq = DiscSequence([0.3, 0.55, -0.4 + 0.35j, 0.7j, -0.8])
        targets = np.array([1.5, -2.0 + 1j, 3j, 0.7, -1.0])
        # moderate C0 keeps the exponents, hence the local slope, small
        f = build_interpolant(seq, targets, GF1, C0=2.0)
        k = 1
        zk, bk = seq[k].value, targets[k]
        errs = []
        for expo in (4, 6, 9):
            z = zk + 10.0**(-expo) * (1 - seq[k].modulus)
            errs.append(abs(f.eval(z) - bk) / (1 + abs(bk)))
        assert errs[-1] < 1e-6
        assert errs[-1] <= errs[0] + 1e-12


class TestTermDecayChain:
    def test_moebius_power_bounded_by_max_term_ratio(self):
        # s_n ln|A_n(z)| <= ln mu(2/(1-|z|)) - ln mu(1/(1-|z_n|))
        seq, targets = lattice_instance(seed=11, gf=GF1, max_points=25)
        f = build_interpolant(seq, targets, GF1)
        ladder = f.ladder
        rng = np.random.default_rng(51)
        for z in 0.95 * np.sqrt(rng.uniform(size=30)) * np.exp(
                2j * np.pi * rng.uniform(size=30)):
            mu_z, _ = ladder.log_max_term(math.log(2.0) - math.log1p(-abs(z)))
            for k, p in enumerate(seq):
                mu_n, _ = ladder.log_max_term(-math.log1p(-p.modulus))
                a_abs = abs((1 - p.modulus**2) / (1 - np.conj(p.value) * z))
                assert f.exponents[k] * math.log(a_abs) <= mu_z - mu_n + 1e-9

    def test_full_term_bound(self):
        # ln|term_n(z)| <= ln|b_n| + 2^{s+2} sum_{m != n} |A_m|^{s+1}
        #                + sum_j 2^j/j + |ln|B_n(z_n)|| - H_s + mu ratio
        seq, targets = lattice_instance(seed=13, gf=GF1, max_points=20)
        f = build_interpolant(seq, targets, GF1)
        cp, ladder, s = f.product, f.ladder, f.product.genus
        q_cap = sum(2.0**j / j for j in range(1, s + 1))
        rng = np.random.default_rng(52)
        zs = 0.9 * np.sqrt(rng.uniform(size=15)) * np.exp(
            2j * np.pi * rng.uniform(size=15))
        L = f._term_logs(np.asarray(zs, dtype=complex))
        for i, z in enumerate(zs):
            mu_z, _ = ladder.log_max_term(math.log(2.0) - math.log1p(-abs(z)))
            full_sum = float(cp.factor_abs_power_sum(z))
            for k, p in enumerate(seq):
                a_abs = abs((1 - p.modulus**2) / (1 - np.conj(p.value) * z))
                rest = full_sum - a_abs ** (s + 1)
                mu_n, _ = ladder.log_max_term(-math.log1p(-p.modulus))
                bound = (
                    math.log(abs(targets[k]))
                    + 2.0 ** (s + 2) * rest
                    + q_cap
                    + abs(cp.log_B_at_node(k).log_modulus)
                    - cp.harmonic
                    + (mu_z - mu_n)
                )
                assert L[k, i].real <= bound + 1e-8


class TestGrowthReport:
    def test_zero_function_rows(self):
        seq = DiscSequence([0.5])
        f = build_interpolant(seq, [0.0], GF1)
        table = growth_report(f, GF1, [0.5, 0.9], theta_count=32)
        assert table.rows[0].ln_max_modulus == -math.inf
        assert math.isnan(table.rows[0].ratio)

    def test_singleton_ratio_stable(self):
        f = build_interpolant(DiscSequence([0.5]), [2.0], GF1)
        table = growth_report(f, GF1, [0.5, 0.9, 0.99], theta_count=64)
        ratios = [row.ratio for row in table.rows]
        assert all(math.isfinite(r) for r in ratios)
        assert max(ratios) <= 10 * max(min(ratios), 0.1)

    def test_ratio_no_blow_up_between_consecutive_radii(self):
        seq, targets = lattice_instance(seed=17, gf=GF1, max_points=30)
        f = build_interpolant(seq, targets, GF1)
        table = growth_report(f, GF1, [0.9, 0.99, 0.999], theta_count=128)
        ratios = [row.ratio for row in table.rows]
        for a, b in zip(ratios, ratios[1:]):
            assert b <= 2.0 * max(a, 0.1)

    def test_row_count_and_radii_validation(self):
        f = build_interpolant(DiscSequence([0.5]), [1.0], GF1)
        table = growth_report(f, GF1, [0.3, 0.6, 0.9], theta_count=16)
        assert len(table.rows) == 3
        with pytest.raises(Exception):
            growth_report(f, GF1, [1.5])
