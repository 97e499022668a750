import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freechaos.chaos import poisson_moment, wigner_moment
from freechaos.distributions import EqualParamSpec, FreeFamilySpec, target_moment
from freechaos.errors import DomainError, ResourceLimitError
from freechaos.harness import (
    THEOREMS,
    FamilyConfig,
    check_contraction_conditions,
    check_em_vanishing,
    check_fmt_conditions,
    estimate_word_count,
    exact_wigner_moment,
    family_counterexample,
    family_exact_wigner,
    family_from_config,
    family_perturbed_wigner,
    family_poisson_spread,
    label_words,
    verify,
)
from freechaos.kernels import norm

from _util import poisson_moment_q1, trace_moment_q2


class TestExactWigner:
    def test_free_target_exact(self):
        fam = family_exact_wigner({1: 2, 2: 3}, alphas={1: 1.0, 2: 0.5})
        rep = verify(fam, max_order=5, n_list=(1,))
        assert rep.verdict and rep.max_error() <= 1e-12
        assert rep.theorem == "wigner-free"

    def test_equal_target_exact(self):
        fam = family_exact_wigner({1: 2, 2: 2}, alphas={1: 1.0, 2: -2.0}, equal_param=True)
        assert isinstance(fam.target, EqualParamSpec)
        rep = verify(fam, max_order=5, n_list=(1,))
        assert rep.verdict, rep.failures[:3]

    def test_against_trace_oracle(self):
        fam = family_exact_wigner({1: 3, 2: 1}, alphas={1: 2.0, 2: 1.0})
        for w in label_words([1, 2], 5, 2):
            ks = [fam.kernel(1, c) for c in w]
            assert trace_moment_q2(ks) == pytest.approx(float(target_moment(fam.target, w)))

    def test_q4_conditions(self):
        fam = family_exact_wigner({1: 2, 2: 3}, q=4)
        assert not fam.exact
        same = check_contraction_conditions(fam, 1, 1, 1).values
        assert same["arc_fixed[2]"] == 0.0
        cross = check_contraction_conditions(fam, 1, 2, 1).values
        assert all(v == 0.0 for v in cross.values())

    def test_em_words(self):
        assert check_em_vanishing(family_exact_wigner({1: 3}), [1] * 6, 1) == 0.0
        # the diagonal q = 4 kernel keeps its off-middle self contractions, so E words survive
        assert check_em_vanishing(family_exact_wigner({1: 3}, q=4), [1] * 5, 1) > 0

    def test_em_needs_even_wigner(self):
        fam = family_poisson_spread({1: 1.0}, q=1)
        with pytest.raises(DomainError):
            check_em_vanishing(fam, [1, 1, 1], 1)

    def test_validation(self):
        with pytest.raises(DomainError):
            family_exact_wigner({1: 1.5})
        with pytest.raises(DomainError):
            family_exact_wigner({1: 2}, q=3)
        with pytest.raises(DomainError):
            family_exact_wigner({1: 2, 2: 3}, equal_param=True)


class TestNonIntegerRank:
    @pytest.mark.parametrize("lam", [1, 2, 2.5, 0.75])
    def test_interpolated_moments_hit_target(self, lam):
        spec = FreeFamilySpec({1: (Fraction(str(lam)), 1), 2: (Fraction(str(lam)), 1)})
        for w in label_words([1, 2], 6, 2):
            assert exact_wigner_moment(lam, w) == pytest.approx(float(target_moment(spec, w)), rel=1e-12, abs=1e-12)

    def test_single_letter(self):
        assert exact_wigner_moment(2.5, [1]) == 0.0


class TestPerturbed:
    def test_decay(self):
        fam = family_perturbed_wigner({1: 2, 2: 3}, seed=3)
        rep = verify(fam, max_order=5, n_list=(8, 64))
        assert rep.verdict, rep.failures[:3]
        assert 0 < rep.max_error(64) < rep.max_error(8)

    @given(st.integers(0, 50))
    @settings(max_examples=10)
    def test_errors_monotone_in_n(self, seed):
        fam = family_perturbed_wigner({1: 3}, seed=seed)
        errs = []
        for n in (2, 4, 8, 16):
            errs.append(abs(wigner_moment([fam.kernel(n, 1)] * 4) - float(target_moment(fam.target, [1] * 4))))
        assert errs == sorted(errs, reverse=True)

    def test_seed_reproducible(self):
        a = family_perturbed_wigner({1: 3}, seed=7).kernel(8, 1)
        b = family_perturbed_wigner({1: 3}, seed=7).kernel(8, 1)
        assert a == b

    def test_config_requires_q2(self):
        with pytest.raises(DomainError):
            family_from_config(FamilyConfig(builder="perturbed_wigner", q=4))


class TestPoissonSpread:
    @pytest.mark.parametrize("lams", [{1: 2.5}, {1: 1.0, 2: 0.5}, {"a": 3.0}])
    def test_q1_exact(self, lams):
        fam = family_poisson_spread(lams, q=1)
        rep = verify(fam, max_order=5, n_list=(1,))
        assert rep.verdict and rep.max_error() <= 1e-9

    def test_q1_against_oracle(self):
        fam = family_poisson_spread({1: 1.5, 2: 2.0}, q=1, alphas={1: 1.0, 2: -0.5})
        for w in label_words([1, 2], 5, 2):
            ks = [fam.kernel(1, c) for c in w]
            assert poisson_moment(ks) == pytest.approx(poisson_moment_q1(ks))
            assert poisson_moment(ks) == pytest.approx(float(target_moment(fam.target, w)))

    @pytest.mark.parametrize("n", [1, 4, 16])
    def test_q2_star_norm(self, n):
        fam = family_poisson_spread({1: 2}, q=2)
        vals = check_contraction_conditions(fam, 1, 1, n).values
        assert vals["arc_fixed[1]"] == pytest.approx(0.0, abs=1e-12)
        assert vals["star[1]"] ** 2 == pytest.approx(2 / n)
        assert vals["star[2]"] ** 2 == pytest.approx(2 / n)
        assert norm(fam.kernel(n, 1)) ** 2 == pytest.approx(2.0)

    def test_q2_refinement_invariant(self):
        a = family_poisson_spread({1: 1}, q=2).kernel(4, 1)
        b = family_poisson_spread({1: 1}, q=2, cells_per_block=3).kernel(4, 1)
        assert poisson_moment([a] * 4) == pytest.approx(poisson_moment([b] * 4))

    def test_q2_decay(self):
        fam = family_poisson_spread({1: 1, 2: 2}, q=2)
        rep = verify(fam, max_order=4, n_list=(4, 16, 64))
        assert rep.verdict, rep.failures[:3]
        assert "note" in rep.hypotheses
        assert rep.max_error(64) < rep.max_error(4)

    def test_unsupported(self):
        with pytest.raises(DomainError):
            family_poisson_spread({1: 1}, q=3)
        with pytest.raises(DomainError):
            family_poisson_spread({1: 1.5}, q=2)


class TestCounterexample:
    def test_fails_with_matched_covariance(self):
        fam = family_counterexample(lam=1.0)
        rep = verify(fam, max_order=4, n_list=(8, 64))
        assert not rep.verdict
        rec = [c for c in rep.conditions if c.n == 64][0]
        assert rec.values["covariance"] < 1e-12
        assert rec.values["fourth"] > 0.5


class TestTheoremChecks:
    def test_ids(self):
        assert set(THEOREMS) == {"wigner-free", "poisson-free", "wigner-equal", "poisson-equal"}

    @pytest.mark.parametrize("theorem", ["poisson-free", "wigner-equal", "nonsense"])
    def test_mismatch(self, theorem):
        fam = family_exact_wigner({1: 2})
        with pytest.raises(DomainError):
            verify(fam, theorem=theorem, n_list=(1,))

    def test_parity(self):
        fam = family_exact_wigner({1: 2}, flavor="wigner")
        fam.q = 3
        with pytest.raises(DomainError):
            check_fmt_conditions(fam, 1, 1, 1)

    def test_fmt_keys(self):
        free = family_exact_wigner({1: 2, 2: 1})
        assert set(check_fmt_conditions(free, 1, 1, 1).values) == {"covariance", "fourth", "third"}
        assert set(check_fmt_conditions(free, 1, 2, 1).values) == {"covariance", "mixed_fourth", "mixed_third"}
        assert all(v == 0 for v in check_fmt_conditions(free, 1, 2, 1).values.values())

    def test_word_cap(self):
        fam = family_exact_wigner({1: 1, 2: 1, 3: 1})
        est = estimate_word_count(fam, 8, 2)
        with pytest.raises(ResourceLimitError) as exc:
            verify(fam, max_order=8, word_cap=est - 1)
        assert exc.value.cost["words"] == est

    def test_bad_arguments(self):
        fam = family_exact_wigner({1: 1})
        with pytest.raises(DomainError):
            verify(fam, max_order=1)
        with pytest.raises(DomainError):
            verify(fam, n_list=())


class TestReports:
    def test_deterministic_json(self):
        mk = lambda: verify(family_perturbed_wigner({1: 2}, seed=1), max_order=4, n_list=(8, 64))
        a, b = mk().to_json(), mk().to_json()
        assert a == b
        d = json.loads(a)
        assert d["verdict"] == "pass" and "runtime_seconds" not in d
        assert set(d["max_moment_error"]) == {"8", "64"}

    def test_timing_and_workers(self):
        fam = family_exact_wigner({1: 2, 2: 1})
        a = verify(fam, max_order=4, n_list=(1,), workers=3, timing=True)
        b = verify(fam, max_order=4, n_list=(1,))
        assert a.runtime is not None
        assert [r.computed for r in a.moments] == [r.computed for r in b.moments]

    def test_csv(self):
        rep = verify(family_exact_wigner({1: 1}), max_order=3, n_list=(1,))
        lines = rep.moment_csv().splitlines()
        assert lines[0] == "n,word,computed,target,error"
        assert len(lines) == 1 + 3


class TestConfig:
    def test_round_trip(self):
        d = {"builder": "poisson_spread", "q": 1, "lambda": {"1": 2.5, "2": 1.0}, "alpha": {"2": -1.0}}
        cfg = FamilyConfig.from_dict(d)
        assert cfg.lam == {1: 2.5, 2: 1.0}
        assert FamilyConfig.from_dict(cfg.to_dict()) == cfg
        fam = family_from_config(cfg)
        assert fam.alpha(2) == -1.0 and fam.alpha(1) == 1.0

    def test_scalar_lambda(self):
        assert FamilyConfig.from_dict({"builder": "exact_wigner", "lambda": 3}).lam == {1: 3.0}

    @pytest.mark.parametrize(
        "d", [{}, {"builder": "exact_wigner"}, {"builder": "exact_wigner", "lambda": 1, "q": "x"}]
    )
    def test_malformed(self, d):
        with pytest.raises(DomainError):
            FamilyConfig.from_dict(d)

    def test_unknown_builder(self):
        with pytest.raises(DomainError):
            family_from_config(FamilyConfig(builder="nope"))

    def test_counterexample_single_label(self):
        with pytest.raises(DomainError):
            family_from_config(FamilyConfig(builder="counterexample", lam={1: 1.0, 2: 1.0}))
