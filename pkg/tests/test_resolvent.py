import cmath
import math

import numpy as np
import pytest

from cmvwalk import SparseSpec, VerblunskySequence, truncate, verblunsky
from cmvwalk.dynamics import abel_t_max, evolve, return_amplitudes
from cmvwalk.errors import PreconditionError
from cmvwalk.resolvent import (
    CircleGrid,
    autocorrelation_integral,
    caratheodory,
    caratheodory_mean,
    parseval_check,
    poisson_kernel,
    return_integral,
    solve_resolvent,
    solve_resolvent_windowed,
)
from cmvwalk.transfer import gz_cocycle

from oracles import dense_resolvent, random_sequence


def random_outside_points(rng, count, eps_range=(0.02, 0.5)):
    eps = rng.uniform(*eps_range, count)
    th = rng.uniform(0.0, 2.0 * np.pi, count)
    return np.exp(eps + 1j * th)


class TestPoissonKernel:
    def test_zero_radius(self):
        for tau in (1.0, -1.0, np.exp(0.3j)):
            assert poisson_kernel(0.0, tau) == 1.0

    def test_tau_one_closed_form(self):
        for r in (0.1, 0.5, 0.9):
            assert poisson_kernel(r, 1.0) == pytest.approx(
                (1 + r) / (1 - r), rel=1e-15
            )

    def test_unit_mean_over_circle(self):
        n = 512
        taus = np.exp(2j * np.pi * np.arange(n) / n)
        mean = math.fsum(poisson_kernel(0.5, t) for t in taus) / n
        assert mean == pytest.approx(1.0, abs=1e-12)

    def test_positive(self, rng):
        for _ in range(50):
            r = rng.uniform(0, 0.999)
            tau = np.exp(1j * rng.uniform(0, 2 * np.pi))
            assert poisson_kernel(r, tau) > 0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            poisson_kernel(1.0, 1.0)
        with pytest.raises(ValueError):
            poisson_kernel(0.5, 2.0)


class TestSolveResolvent:
    def test_free_closed_form(self):
        z = cmath.exp(0.7j + 0.05)
        sol = solve_resolvent(VerblunskySequence.zero(), z, n_out=9)
        assert abs(sol.u[0] + 1.0 / z) < 1e-15
        assert abs(sol.u[1] + z**-2) < 1e-15
        assert sol.u[2] == 0
        for k in (3, 5, 7):
            assert abs(sol.u[k] + z ** (-(k + 3) / 2)) < 1e-15

    def test_matches_large_dense_window(self, rng):
        seq = random_sequence(rng, 24)
        z = cmath.exp(0.7j + 0.05)
        sol = solve_resolvent(seq, z, n_out=60)
        want = dense_resolvent(seq, z, 2000)
        np.testing.assert_allclose(sol.u, want[:61], atol=1e-10, rtol=0)

    def test_windowed_route_agrees(self, rng):
        seq = random_sequence(rng, 16)
        z = cmath.exp(0.3j + 0.1)
        a = solve_resolvent(seq, z, n_out=50)
        b = solve_resolvent_windowed(seq, z, 800)
        np.testing.assert_allclose(a.u[:51], b.u[:51], atol=1e-11, rtol=0)

    def test_residual_bound(self, rng):
        for _ in range(10):
            seq = random_sequence(rng, 12)
            z = complex(random_outside_points(rng, 1)[0])
            sol = solve_resolvent(seq, z)
            assert sol.error_bound <= 1e-12 * math.sqrt(sol.norm_sq())

    def test_block_pairing(self, rng):
        seq = random_sequence(rng, 12)
        sol = solve_resolvent(seq, cmath.exp(1.1j + 0.08), n_out=20)
        for k in range(1, 10):
            lhs = abs(sol.u[2 * k - 1]) ** 2 + abs(sol.u[2 * k]) ** 2
            rhs = abs(sol.v[2 * k - 1]) ** 2 + abs(sol.v[2 * k]) ** 2
            assert abs(lhs - rhs) <= 1e-12

    def test_inside_circle_rejected(self, rng):
        seq = random_sequence(rng, 4)
        with pytest.raises(ValueError):
            solve_resolvent(seq, 0.5 + 0.1j)

    def test_support_assertion_checked(self, rng):
        seq = random_sequence(rng, 10)
        with pytest.raises(PreconditionError):
            solve_resolvent(seq, cmath.exp(0.1), support_end=4)

    @pytest.mark.parametrize("lengths,N", [((2, 4), 2), ((3, 9), 2)])
    def test_truncated_tail_structure(self, lengths, N):
        # beyond the last barrier: even sites vanish identically and odd
        # sites advance by exactly 1/z every two steps
        seq = truncate(verblunsky(SparseSpec(0.5, lengths)), N)
        m = lengths[N - 1]
        z = cmath.exp(0.9j + 0.04)
        sol = solve_resolvent(seq, z, n_out=m + 9)
        for k in range(m + 1, m + 9):
            if k % 2 == 0:
                assert sol.u[k] == 0
        odd0 = m + 1 if (m + 1) % 2 else m + 2
        for k in range(odd0, m + 7, 2):
            ratio = sol.u[k + 2] / sol.u[k]
            assert abs(ratio - 1.0 / z) <= 1e-12
        # the degenerate component at the first tail site
        if m % 2 == 0:
            assert abs(sol.v[m + 1]) <= 1e-12 * math.sqrt(sol.norm_sq())
        else:
            assert abs(sol.u[m + 1]) <= 1e-12 * math.sqrt(sol.norm_sq())

    def test_truncated_tail_matches_dense(self):
        seq = truncate(verblunsky(SparseSpec(0.5, (2, 4))), 2)
        z = cmath.exp(0.9j + 0.04)
        sol = solve_resolvent(seq, z, n_out=16)
        want = dense_resolvent(seq, z, 1200)
        np.testing.assert_allclose(sol.u, want[:17], atol=1e-11, rtol=0)
        for k in (5, 7, 9):
            assert abs(want[k + 2] / want[k] - 1.0 / z) <= 1e-10


class TestCaratheodory:
    def test_free_is_minus_one(self, rng):
        for z in random_outside_points(rng, 5):
            sol = solve_resolvent(VerblunskySequence.zero(), complex(z))
            assert abs(caratheodory(sol) + 1.0) < 1e-14

    def test_real_part_negative_outside(self, battery, rng):
        for name, seq in battery.items():
            for z in random_outside_points(rng, 5):
                F = caratheodory(solve_resolvent(seq, complex(z)))
                assert F.real < 0, name

    def test_norm_identity(self, battery, rng):
        for name, seq in battery.items():
            for z in random_outside_points(rng, 10):
                z = complex(z)
                sol = solve_resolvent(seq, z)
                F = caratheodory(sol)
                lhs = sol.norm_sq()
                rhs = F.real / (1.0 - abs(z) ** 2)
                assert abs(lhs - rhs) <= 1e-9 * abs(lhs), name

    def test_construction_identity(self, rng):
        seq = random_sequence(rng, 8)
        z = complex(random_outside_points(rng, 1)[0])
        sol = solve_resolvent(seq, z)
        F = caratheodory(sol)
        assert F == 1.0 + 2.0 * z * sol.u[0]

    def test_cocycle_reconstruction(self, battery, rng):
        # (u_n, v_n) = Z(n,0;z) (F+1, F-1)^T / (2z) on the whole window
        for name, seq in battery.items():
            if name == "sparse3":
                continue  # window 67: covered by the acceptance suite
            for z in random_outside_points(rng, 3):
                z = complex(z)
                sol = solve_resolvent(seq, z, n_out=24)
                F = caratheodory(sol)
                seed = np.array([F + 1.0, F - 1.0]) / (2.0 * z)
                scale = math.sqrt(sol.norm_sq())
                for n in range(1, 22):
                    got = gz_cocycle(seq, n, 0, z).matrix() @ seed
                    assert abs(got[0] - sol.u[n]) <= 1e-9 * scale, name
                    assert abs(got[1] - sol.v[n]) <= 1e-9 * scale, name


class TestCaratheodoryMean:
    def test_free_exact_at_every_node(self):
        grid = CircleGrid(0.25, 256)
        mean = caratheodory_mean(VerblunskySequence.zero(), grid, refine=False)
        assert mean == pytest.approx(-1.0, abs=1e-13)

    def test_random_eps_tenth(self, rng):
        seq = random_sequence(rng, 16)
        mean = caratheodory_mean(seq, CircleGrid(0.1, 4096), refine=False)
        assert mean == pytest.approx(-1.0, abs=1e-10)

    def test_random_small_eps_more_nodes(self, rng):
        seq = random_sequence(rng, 16)
        mean = caratheodory_mean(seq, CircleGrid(0.01, 8192), refine=False)
        assert mean == pytest.approx(-1.0, abs=1e-8)

    def test_refinement_converges(self, rng):
        seq = random_sequence(rng, 12)
        mean = caratheodory_mean(seq, CircleGrid(0.05, 64), refine=True)
        assert mean == pytest.approx(-1.0, abs=1e-9)

    def test_thread_count_does_not_change_bits(self, rng):
        seq = random_sequence(rng, 12)
        grid = CircleGrid(0.1, 128)
        a = caratheodory_mean(seq, grid, refine=False, threads=1)
        b = caratheodory_mean(seq, grid, refine=False, threads=2)
        assert a == b


class TestReturnAndAutocorrelation:
    def test_free_return_integral(self):
        eps = 0.2
        amps = return_amplitudes(VerblunskySequence.zero(), 200)
        J = return_integral(amps, eps)
        assert J == pytest.approx(-math.expm1(-2 * eps), rel=1e-14)

    def test_large_eps_saturates(self):
        amps = return_amplitudes(VerblunskySequence.zero(), 10)
        assert return_integral(amps, 20.0) == pytest.approx(1.0, abs=1e-12)

    def test_record_input(self, rng):
        seq = random_sequence(rng, 8)
        rec = evolve(seq, 200)
        assert return_integral(rec, 0.2) == return_integral(rec.return_amps, 0.2)

    def test_insufficient_horizon(self):
        amps = return_amplitudes(VerblunskySequence.zero(), 10)
        with pytest.raises(PreconditionError):
            return_integral(amps, 0.05)

    def test_free_autocorrelation(self):
        eps = 0.2
        I = autocorrelation_integral(
            VerblunskySequence.zero(), eps, CircleGrid(eps, 256), refine=False
        )
        assert I == pytest.approx(-math.expm1(-2 * eps), rel=1e-13)

    @pytest.mark.parametrize("eps", [0.2, 0.05])
    def test_return_autocorrelation_identity(self, battery, eps):
        # J = (1 - e^{-2 eps})/2 + I/2, and hence J <= I
        for name, seq in battery.items():
            amps = return_amplitudes(seq, abel_t_max(1.0 / eps))
            J = return_integral(amps, eps)
            I = autocorrelation_integral(seq, eps, CircleGrid(eps), refine=False)
            assert abs(J - 0.5 * (-math.expm1(-2 * eps)) - 0.5 * I) <= 1e-9, name
            assert J <= I + 1e-10, name
            assert I >= -math.expm1(-2 * eps) - 1e-10, name


class TestReturnThreshold:
    def test_origin_weight_equals_return_integral(self, rng):
        # atilde(0, T) and J(1/T) are the same weighted sum of |<d0,C^t d0>|^2
        from cmvwalk.dynamics import abel_average

        seq = random_sequence(rng, 12)
        T = 8.0
        ta = abel_average(seq, T)
        J = return_integral(return_amplitudes(seq, abel_t_max(T)), 1.0 / T)
        assert float(ta.atilde[0]) == pytest.approx(J, abs=1e-13)

    def test_half_mass_bound_and_its_boundary(self):
        # For J <= 1/2 the threshold M = 1/(8J) keeps half the mass outside;
        # a strongly localized model with J > 1/2 is a counterexample to the
        # unqualified statement, since P(n >= M) = 1 - atilde(0) = 1 - J
        # whenever M < 1 (the proof's site count #{n < M} = 1 exceeds M).
        from cmvwalk.dynamics import abel_average, outside_prob

        T = 10.0
        mild = random_sequence(np.random.default_rng(7), 16, rmax=0.75)
        ta = abel_average(mild, T)
        J = return_integral(return_amplitudes(mild, abel_t_max(T)), 1.0 / T)
        assert J <= 0.5
        assert outside_prob(ta, 1.0 / (8.0 * J)) >= 0.5 - 1e-9

        localized = random_sequence(np.random.default_rng(7), 16, rmax=0.9)
        ta = abel_average(localized, T)
        J = return_integral(return_amplitudes(localized, abel_t_max(T)), 1.0 / T)
        assert J > 0.5
        P = outside_prob(ta, 1.0 / (8.0 * J))
        assert P == pytest.approx(1.0 - J, abs=1e-10)
        assert P < 0.5


class TestParseval:
    def test_free_single_time_term(self):
        T = 5.0
        lhs, rhs, gap = parseval_check(VerblunskySequence.zero(), 1, T)
        want = -math.expm1(-2.0 / T) * math.exp(-2.0 / T)
        assert lhs == pytest.approx(want, rel=1e-12)
        assert rhs == pytest.approx(want, rel=1e-10)
        assert gap <= 1e-10

    def test_random_site_three(self, rng):
        seq = random_sequence(rng, 16)
        lhs, rhs, gap = parseval_check(seq, 3, 10.0)
        assert gap <= 1e-8

    def test_site_beyond_reachable_mass(self, rng):
        seq = random_sequence(rng, 8)
        lhs, rhs, gap = parseval_check(seq, 30, 0.5)
        assert lhs <= 1e-12 and rhs <= 1e-12
