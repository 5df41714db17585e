import math

import numpy as np
import pytest

from gradflow import (
    AdmissibilityConfig,
    BoxDomain,
    TABLE1_COEFFS,
    admissibility_measure,
    make_custom,
    make_quadratic,
    make_v_alpha,
    rho,
    rho_bruteforce,
    table1,
    write_sweep_csv,
)


def random_pairs(n, seed, p_max=10.0):
    """Seeded (x, p) pairs with |p| <= p_max."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-5.0, 5.0, size=(n, 3))
    ps = rng.uniform(-1.0, 1.0, size=(n, 3))
    ps *= (rng.uniform(0.0, p_max, size=(n, 1)) /
           np.maximum(np.linalg.norm(ps, axis=1, keepdims=True), 1e-12))
    return xs, ps


class TestRho:
    def test_p_along_f1_is_zero(self):
        assert rho([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]) == 0.0

    def test_p_orthogonal(self):
        assert rho([0.0, 0.0, 0.0], [0.0, 1.0, 0.0]) == 1.0

    def test_frozen_value(self):
        # |0.3*sin 0.7 + 0.4*cos 0.7|, high-precision reference
        assert rho([0.0, 0.0, 0.7], [0.3, -0.4, 5.0]) == pytest.approx(
            0.4992021810851027, abs=1e-12)

    def test_bounded_by_p_norm(self):
        xs, ps = random_pairs(500, seed=31)
        for x, p in zip(xs, ps):
            r = rho(x, p)
            assert 0.0 <= r <= np.linalg.norm(p) + 1e-12

    def test_zero_on_controllable_span(self):
        rng = np.random.default_rng(32)
        from gradflow import vector_fields
        for _ in range(100):
            x = rng.uniform(-3, 3, size=3)
            f1, f2 = vector_fields(x)
            p = rng.normal() * f1 + rng.normal() * f2
            assert rho(x, p) <= 1e-12


class TestRhoBruteforce:
    def test_projection_length(self):
        assert rho_bruteforce([0.0, 0.0, 0.0], [0.0, 1.0, 0.0]) == pytest.approx(
            1.0, abs=1e-4)

    def test_zero_p_exact(self):
        assert rho_bruteforce([0.3, -0.2, 1.1], [0.0, 0.0, 0.0]) == 0.0

    def test_quarter_turn(self):
        val = rho_bruteforce([0.0, 0.0, math.pi / 2], [2.0, 0.0, 0.0])
        assert val == pytest.approx(2.0, abs=1e-4)

    def test_matches_closed_form(self):
        xs, ps = random_pairs(100, seed=33)
        for x, p in zip(xs, ps):
            assert rho_bruteforce(x, p) == pytest.approx(rho(x, p), abs=1e-4)

    def test_rejects_small_search_box(self):
        with pytest.raises(ValueError, match="coarse_range"):
            rho_bruteforce([0, 0, 0], [3.0, 0.0, 0.0], coarse_range=1.0)


class TestBoxDomain:
    def test_measure(self):
        box = BoxDomain(lo=[-1, -2, 0], hi=[1, 0, 3])
        assert box.measure == pytest.approx(12.0, rel=1e-12)

    def test_cube(self):
        box = BoxDomain.cube(1.0)
        assert np.array_equal(box.lo, [-1, -1, -1])
        assert box.measure == 8.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            BoxDomain(lo=[0, 0, 0], hi=[1, 0, 1])


class TestConfigValidation:
    def test_rejects_nonpositive_q(self):
        with pytest.raises(ValueError, match="q"):
            AdmissibilityConfig(q=-1.0)

    def test_rejects_odd_grid(self):
        with pytest.raises(ValueError, match="grid_n"):
            AdmissibilityConfig(grid_n=201)

    def test_rejects_bad_method(self):
        with pytest.raises(ValueError, match="method"):
            AdmissibilityConfig(method="simpson")


class TestMeasure:
    def test_heading_only_potential_is_admissible(self):
        # grad V along f2 everywhere: the flow is exactly realizable
        pot = make_custom(lambda x: float(np.asarray(x)[2] ** 2),
                          lambda x: np.array([0.0, 0.0, 2.0 * np.asarray(x)[2]]))
        res = admissibility_measure(pot, cfg=AdmissibilityConfig(grid_n=20))
        assert res.value == 0.0
        assert res.excluded == 0

    def test_sum_of_squares_is_one_third(self):
        # analytic value by symmetry of the unit-coefficient integrand
        res = admissibility_measure(make_quadratic(1, 1, 1),
                                    cfg=AdmissibilityConfig(grid_n=100))
        assert res.value == pytest.approx(1.0 / 3.0, abs=5e-4)
        assert res.method == "midpoint"
        assert res.stderr is None
        assert res.points == 100 ** 3

    def test_integrand_bounded_value_in_unit_interval(self):
        for coeffs in [(1, 1, 1), (4, 0.25, 4), (0.3, 2.0, 1.1)]:
            res = admissibility_measure(make_quadratic(*coeffs),
                                        cfg=AdmissibilityConfig(grid_n=24))
            assert 0.0 <= res.value <= 1.0

    def test_scale_invariance(self):
        cfg = AdmissibilityConfig(grid_n=50)
        base = admissibility_measure(make_v_alpha(1.0), cfg=cfg).value
        for c in (0.5, 3.0):
            scaled = admissibility_measure(make_v_alpha(1.0).scaled(c), cfg=cfg).value
            assert abs(scaled - base) <= 1e-3

    def test_v_alpha_sequence_decreases(self):
        cfg = AdmissibilityConfig(grid_n=50)
        js = [admissibility_measure(make_v_alpha(a), cfg=cfg).value for a in (2, 4, 10)]
        assert js[0] > js[1] > js[2]

    def test_monte_carlo_agrees_with_midpoint(self):
        cfg_mc = AdmissibilityConfig(method="monte_carlo", samples=400_000, seed=7)
        cfg_mp = AdmissibilityConfig(grid_n=100)
        pot = make_quadratic(2, 1, 1)
        mc = admissibility_measure(pot, cfg=cfg_mc)
        mp = admissibility_measure(pot, cfg=cfg_mp)
        # midpoint error at this resolution is well under 1e-4
        assert abs(mc.value - mp.value) <= 3.0 * (mc.stderr + 1e-4)

    def test_monte_carlo_deterministic_and_jobs_independent(self):
        cfg = AdmissibilityConfig(method="monte_carlo", samples=300_000, seed=42)
        pot = make_v_alpha(4.0)
        r1 = admissibility_measure(pot, cfg=cfg, jobs=1)
        r2 = admissibility_measure(pot, cfg=cfg, jobs=3)
        assert r1.value == r2.value
        assert r1.stderr == r2.stderr

    def test_monte_carlo_seed_changes_estimate(self):
        pot = make_v_alpha(1.0)
        a = admissibility_measure(pot, cfg=AdmissibilityConfig(
            method="monte_carlo", samples=10_000, seed=1))
        b = admissibility_measure(pot, cfg=AdmissibilityConfig(
            method="monte_carlo", samples=10_000, seed=2))
        assert a.value != b.value

    def test_generic_path_matches_quadratic_kernel(self):
        coeffs = np.array([2.0, 1.0, 0.5])
        pot = make_custom(lambda x: float(np.sum(coeffs * np.asarray(x) ** 2)),
                          lambda x: 2.0 * coeffs * np.asarray(x))
        cfg = AdmissibilityConfig(grid_n=24)
        generic = admissibility_measure(pot, cfg=cfg)
        kernel = admissibility_measure(make_quadratic(*coeffs), cfg=cfg)
        assert generic.value == pytest.approx(kernel.value, abs=1e-13)

    def test_degenerate_potential_rejected(self):
        flat = make_custom(lambda x: 1.0, lambda x: np.zeros(3))
        with pytest.raises(ValueError, match="degenerate"):
            admissibility_measure(flat, cfg=AdmissibilityConfig(grid_n=8))

    def test_even_grid_excludes_nothing_for_quadratics(self):
        res = admissibility_measure(make_quadratic(1, 1, 1),
                                    cfg=AdmissibilityConfig(grid_n=40))
        assert res.excluded == 0

    def test_off_center_domain(self):
        # gradient never vanishes on a box away from the origin
        box = BoxDomain(lo=[0.5, 0.5, 0.5], hi=[1.5, 1.5, 1.5])
        res = admissibility_measure(make_quadratic(1, 1, 1), box,
                                    AdmissibilityConfig(grid_n=30))
        assert 0.0 < res.value < 1.0


class TestTable1:
    def test_row_order_and_count(self):
        assert len(TABLE1_COEFFS) == 7
        assert TABLE1_COEFFS[0] == (1.0, 1.0, 1.0)

    def test_jobs_do_not_change_values(self):
        cfg = AdmissibilityConfig(grid_n=24)
        seq = table1(cfg=cfg)
        par = table1(cfg=cfg, jobs=4)
        for (ca, ra), (cb, rb) in zip(seq, par):
            assert ca == cb
            assert ra.value == rb.value


class TestSweepCsv:
    def test_format(self, tmp_path):
        cfg = AdmissibilityConfig(grid_n=10)
        res = admissibility_measure(make_quadratic(1, 1, 1), cfg=cfg)
        mc = admissibility_measure(make_quadratic(1, 1, 1), cfg=AdmissibilityConfig(
            method="monte_carlo", samples=1000, seed=3))
        path = tmp_path / "sweep.csv"
        write_sweep_csv([((1, 1, 1), 2.0, res), ((1, 1, 1), 2.0, mc)], path)
        lines = path.read_text().splitlines()
        assert lines[0] == "c1,c2,c3,q,method,points,J,stderr,excluded"
        assert lines[1].split(",")[4] == "midpoint"
        assert lines[1].split(",")[7] == ""  # midpoint has no stderr
        assert float(lines[2].split(",")[7]) > 0.0
