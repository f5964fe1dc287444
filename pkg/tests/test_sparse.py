import math

import numpy as np
import pytest

from cmvwalk import SparseSpec, barrier_coefficient, coin_sequence, nu, verblunsky
from cmvwalk.sparse import reflector_coin, so2_coin


class TestSparseSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SparseSpec(1.5, (2, 4))
        with pytest.raises(ValueError):
            SparseSpec(0.5, (4, 4))
        with pytest.raises(ValueError):
            SparseSpec(0.5, ())
        with pytest.raises(ValueError):
            SparseSpec(0.5, (2, 4), lambda_phase=2.0)

    def test_default_lengths_double_factorially(self):
        spec = SparseSpec.default(count=4)
        assert spec.lengths == (2, 4, 64, 2**24)


class TestNu:
    def test_first_is_zero(self):
        assert nu(SparseSpec(0.5, (2, 4)), 1) == 0.0

    def test_two_four(self):
        assert nu(SparseSpec(0.5, (2, 4)), 2) == pytest.approx(0.5, abs=1e-15)

    def test_factorial_logs(self):
        # log2(L_j) = j! gives nu_3 = (1! + 2!)/3! = 0.5
        spec = SparseSpec.default(count=3)
        assert nu(spec, 3) == pytest.approx(0.5, abs=1e-14)

    def test_huge_lengths_stay_in_log_space(self):
        spec = SparseSpec.default(count=5)  # L_5 = 2**120
        assert nu(spec, 5) == pytest.approx(33.0 / 120.0, abs=1e-13)

    def test_tail_non_increasing_on_default(self):
        spec = SparseSpec.default(count=5)
        values = [nu(spec, N) for N in range(2, 6)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_range_error(self):
        with pytest.raises(IndexError):
            nu(SparseSpec(0.5, (2, 4)), 3)


class TestBarrierCoefficient:
    def test_eta_half_L4(self):
        c = barrier_coefficient(4, 0.5)
        assert c.rho == 0.5
        assert c.alpha == pytest.approx(math.sqrt(3) / 2, abs=1e-16)

    def test_unit_base(self):
        c = barrier_coefficient(1, 0.5)
        assert c.rho == 1.0 and c.alpha == 0.0

    def test_eta_half_L100(self):
        c = barrier_coefficient(100, 0.5)
        assert abs(c.alpha) ** 2 == pytest.approx(0.99, abs=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            barrier_coefficient(0, 0.5)
        with pytest.raises(ValueError):
            barrier_coefficient(4, 0.0)


class TestVerblunsky:
    def test_support_is_the_barrier_set(self):
        seq = verblunsky(SparseSpec(0.5, (2, 4, 64)))
        for n in range(70):
            c = seq.coefficient(n)
            if n in (2, 4, 64):
                assert c.alpha != 0
            else:
                assert c.alpha == 0 and c.rho == 1.0

    def test_barrier_value(self):
        seq = verblunsky(SparseSpec(0.5, (2, 4)))
        want = barrier_coefficient(4, 0.5)
        got = seq.coefficient(4)
        assert got.alpha == want.alpha and got.rho == want.rho

    def test_lambda_negates_alpha(self):
        plain = verblunsky(SparseSpec(0.5, (2, 4)))
        flipped = verblunsky(SparseSpec(0.5, (2, 4), lambda_phase=-1.0))
        for n in (2, 4):
            assert flipped.coefficient(n).alpha == -plain.coefficient(n).alpha
            assert flipped.coefficient(n).rho == plain.coefficient(n).rho


class TestCoinSequence:
    def test_reflectivity_formula(self):
        coins = coin_sequence(SparseSpec(0.5, (5,)))
        assert coins.reflectivities[0] == pytest.approx(1.0 / 3.0, abs=1e-16)

    def test_identity_off_barrier(self):
        coins = coin_sequence(SparseSpec(0.5, (5,)))
        np.testing.assert_array_equal(coins.coin(4), np.eye(2))

    def test_coins_are_rotations(self):
        coins = coin_sequence(SparseSpec(0.3, (2, 9, 31)))
        for site in coins.sites:
            c = coins.coin(site)
            assert np.all(c.imag == 0)
            np.testing.assert_allclose(c @ c.T.conj(), np.eye(2), atol=1e-15)
            assert np.linalg.det(c).real == pytest.approx(1.0, abs=1e-15)

    def test_small_r_approaches_reflector(self):
        np.testing.assert_allclose(
            so2_coin(1e-12), reflector_coin(), atol=2e-12, rtol=0
        )

    def test_matches_cmv_barrier_at_doubled_site(self):
        # the walk coin at site L lands on operator index 2L-1 with the
        # same rho; exactness matters for the entrywise correspondence
        spec = SparseSpec(0.5, (5, 9))
        coins = coin_sequence(spec)
        for L, r in zip(coins.sites, coins.reflectivities):
            assert r == barrier_coefficient(2 * L - 1, spec.eta).rho
