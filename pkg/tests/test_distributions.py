from fractions import Fraction
from itertools import product
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from freechaos.distributions import (
    EqualParamSpec,
    FreeFamilySpec,
    charlier,
    charlier_power_expansion,
    cumulant,
    cumulants_from_moments,
    dumps_limit_spec,
    equalparam_moment_closed,
    free_poisson_moment_single,
    limit_spec_from_dict,
    limit_spec_to_dict,
    semicircle_moment,
    target_moment,
)
from freechaos.errors import DomainError
from freechaos.partitions import catalan

lams = st.fractions(min_value=Fraction(1, 4), max_value=5, max_denominator=8)


def narayana_moment(lam, n):
    """Uncentered free Poisson moment: sum_k N(n, k) lam^k."""
    if n == 0:
        return lam**0
    return sum(Fraction(comb(n, k) * comb(n, k - 1), n) * lam**k for k in range(1, n + 1))


def centered_from_raw(lam, n):
    return sum(comb(n, k) * narayana_moment(lam, k) * (-lam) ** (n - k) for k in range(n + 1))


def poly_moment(coeffs_a, coeffs_b, lam):
    total = 0
    for i, a in enumerate(coeffs_a):
        for j, b in enumerate(coeffs_b):
            total += a * b * centered_from_raw(lam, i + j)
    return total


class TestSingleLaws:
    @pytest.mark.parametrize("n", range(0, 11))
    def test_semicircle(self, n):
        want = 0 if n % 2 else catalan(n // 2) * 3 ** (n // 2)
        assert semicircle_moment(3, n) == want

    @given(lams, st.integers(1, 8))
    def test_free_poisson_against_narayana(self, lam, n):
        assert free_poisson_moment_single(lam, n, centered=False) == narayana_moment(lam, n)
        assert free_poisson_moment_single(lam, n) == centered_from_raw(lam, n)

    @given(lams, st.integers(1, 8))
    def test_equal_param_closed_form(self, lam, m):
        assert equalparam_moment_closed(lam, m) == target_moment(EqualParamSpec(lam, {0: 1}), [0] * m)
        assert equalparam_moment_closed(lam, m) == free_poisson_moment_single(lam, m)

    def test_closed_form_values(self):
        assert [equalparam_moment_closed(1, m) for m in range(1, 7)] == [0, 1, 1, 3, 6, 15]

    def test_domain(self):
        with pytest.raises(DomainError):
            semicircle_moment(1, -1)
        with pytest.raises(DomainError):
            equalparam_moment_closed(1, 0)


class TestCharlier:
    def test_low_degree(self):
        assert charlier(0, 2) == [1]
        assert charlier(1, 2) == [0, 1]
        assert charlier(2, 2) == [-2, -1, 1]

    @given(lams, st.integers(0, 5), st.integers(0, 5))
    def test_orthogonal_under_centered_free_poisson(self, lam, m, n):
        val = poly_moment(charlier(m, lam), charlier(n, lam), lam)
        assert val == (lam**n if m == n else 0)

    @given(lams, st.integers(0, 7))
    def test_power_expansion_inverts(self, lam, k):
        coeffs = charlier_power_expansion(k, lam)
        poly = [Fraction(0)] * (k + 1)
        for j, c in enumerate(coeffs):
            for i, a in enumerate(charlier(j, lam)):
                poly[i] += c * a
        assert poly == [0] * k + [1]
        assert coeffs[0] == free_poisson_moment_single(lam, k)

    def test_negative(self):
        with pytest.raises(DomainError):
            charlier(-1, 1)
        with pytest.raises(DomainError):
            charlier_power_expansion(-1, 1)


class TestFamilies:
    def test_free_cumulants(self):
        spec = FreeFamilySpec({1: (2, 3), 2: (1, 1)})
        assert cumulant(spec, [1, 1, 1]) == 54
        assert cumulant(spec, [1, 2]) == 0
        assert cumulant(spec, [1]) == 0
        assert cumulant(FreeFamilySpec({1: (2, 3)}, centered=False), [1]) == 6

    def test_equal_param_cumulants(self):
        spec = EqualParamSpec(2, {1: 3, 2: 5})
        assert cumulant(spec, [1, 2, 2]) == 2 * 3 * 5 * 5
        assert spec.alpha("missing") == 1

    @given(st.lists(st.tuples(st.sampled_from([1, 2, 3]), st.integers(1, 3)), min_size=1, max_size=4))
    def test_freeness_factorizes_blocks(self, runs):
        # a word made of consecutive runs with distinct neighbouring labels, where each
        # run is a power of a single variable; check against the run-level NC formula
        spec = FreeFamilySpec({1: (Fraction(1), Fraction(2)), 2: (Fraction(3), Fraction(1)), 3: (Fraction(1, 2), 1)})
        runs = [r for k, r in enumerate(runs) if k == 0 or r[0] != runs[k - 1][0]]
        chi = [lab for lab, n in runs for _ in range(n)]
        if len({lab for lab, _ in runs}) == len(runs):
            want = 1
            for lab, n in runs:
                want *= target_moment(spec, [lab] * n)
            assert target_moment(spec, chi) == want

    def test_two_free_single_labels(self):
        spec = FreeFamilySpec({1: (1, 1), 2: (2, 1)})
        # phi(a1 a2 a1 a2) vanishes for centered free variables with vanishing first cumulant
        assert target_moment(spec, [1, 2, 1, 2]) == 0
        assert target_moment(spec, [1, 1, 2, 2]) == 2
        assert target_moment(spec, [1, 1, 1]) == 1

    @given(lams, st.dictionaries(st.sampled_from([1, 2]), lams, min_size=2, max_size=2), st.booleans())
    def test_moment_cumulant_round_trip(self, lam, alphas, centered):
        spec = EqualParamSpec(lam, alphas, centered=centered)
        words = [w for n in range(1, 5) for w in product([1, 2], repeat=n)]
        moms = {w: target_moment(spec, w) for w in words}
        kap = cumulants_from_moments(moms)
        for w in words:
            assert kap[w] == cumulant(spec, w)

    def test_missing_subword(self):
        with pytest.raises(DomainError):
            cumulants_from_moments({(1, 1): 1})

    def test_validation(self):
        with pytest.raises(DomainError):
            FreeFamilySpec({1: (0, 1)})
        with pytest.raises(DomainError):
            FreeFamilySpec({1: (1, 0)})
        with pytest.raises(DomainError):
            EqualParamSpec(-1, {1: 1})
        with pytest.raises(DomainError):
            target_moment(FreeFamilySpec({1: (1, 1)}), [])
        with pytest.raises(DomainError):
            target_moment(FreeFamilySpec({1: (1, 1)}), [7, 7])


class TestJson:
    @pytest.mark.parametrize(
        "spec",
        [FreeFamilySpec({1: (2.0, 0.5), "x": (1.5, 1.0)}), EqualParamSpec(2.5, {1: 1.0, 2: 3.0}, centered=False)],
    )
    def test_round_trip(self, spec):
        assert limit_spec_from_dict(limit_spec_to_dict(spec)) == spec
        assert dumps_limit_spec(spec) == dumps_limit_spec(limit_spec_from_dict(limit_spec_to_dict(spec)))

    @pytest.mark.parametrize("d", [{}, {"kind": "other"}, {"kind": "free_family"}, {"kind": "equal_param"}])
    def test_malformed(self, d):
        with pytest.raises(DomainError):
            limit_spec_from_dict(d)
