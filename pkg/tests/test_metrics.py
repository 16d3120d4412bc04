import numpy as np
import pytest

from hereditas.errors import InvalidConfigError, InvalidDimensionError, UnsupportedDistributionError
from hereditas.metrics import (
    LOGNORMAL01,
    STANDARD_NORMAL,
    TruthSpec,
    aggregate,
    mse,
    msh,
    msh_counts,
    sensitivity,
    sensitivity_by_class,
    snr,
    snr_monte_carlo,
    specificity,
    specificity_by_class,
)
from hereditas.simulate import build_truth, preset
from hereditas.terms import canonical_terms, inter, main, quad

TS10 = canonical_terms(10)


def truth_setting1():
    return build_truth(preset("setting1"))


class TestMsh:
    def test_one_of_two_parents(self):
        assert msh({inter(0, 1), main(0)}) == pytest.approx(0.5)
        assert msh_counts({inter(0, 1), main(0)}) == (1, 2)

    def test_all_parents_present(self):
        sel = {main(0), main(1), main(2), inter(0, 1), inter(0, 2), quad(0)}
        assert msh(sel) == 1.0

    def test_vacuous_is_one(self):
        assert msh({main(2)}) == 1.0
        assert msh(set()) == 1.0

    def test_worked_example_selection_scores_one(self):
        # The back-transformed selection: every parent of every selected
        # second-order term is itself selected.
        sel = {main(j) for j in range(10) if j != 7}
        sel |= {inter(0, 1), inter(0, 2), inter(1, 2), inter(1, 9), inter(2, 3),
                inter(2, 5), inter(2, 6), inter(2, 8), inter(3, 4), quad(0), quad(4)}
        assert msh(sel) == 1.0


class TestSensitivitySpecificity:
    def test_two_of_three(self):
        truth = TruthSpec(canonical_terms(2),
                          {main(0): 1.0, main(1): 1.0, inter(0, 1): 1.0}, 1.0)
        sel = {main(0), inter(0, 1)}
        assert sensitivity(sel, truth) == pytest.approx(2 / 3)

    def test_perfect_recovery(self):
        truth = truth_setting1()
        assert sensitivity(truth.active, truth) == 1.0
        assert specificity(truth.active, truth) == 1.0

    def test_select_everything(self):
        truth = truth_setting1()
        everything = frozenset(TS10.terms)
        assert len(truth.active) == 9
        assert sensitivity(everything, truth) == 1.0
        assert specificity(everything, truth) == 0.0

    def test_by_class_decomposition(self):
        rng = np.random.default_rng(0)
        truth = truth_setting1()
        sel = frozenset(t for t in TS10.terms if rng.random() < 0.4)
        sens_c = sensitivity_by_class(sel, truth)
        spec_c = specificity_by_class(sel, truth)
        num_sens = sum(len({t for t in sel if t.kind == k} & truth.active)
                       for k in ("main", "inter", "quad"))
        assert num_sens == len(sel & truth.active)
        # per-class denominators add up to the overall ones
        assert sum(
            round(sens_c[k] * len({t for t in truth.active if t.kind == k}))
            for k in sens_c
        ) == len(sel & truth.active)
        inactive = frozenset(TS10.terms) - truth.active
        assert sum(
            round(spec_c[k] * len({t for t in inactive if t.kind == k}))
            for k in spec_c
        ) == len(inactive - sel)

    def test_relabel_invariance(self):
        rng = np.random.default_rng(1)
        perm = rng.permutation(10)

        def relabel(t):
            if t.kind == "main":
                return main(int(perm[t.i]))
            if t.kind == "quad":
                return quad(int(perm[t.i]))
            return inter(int(perm[t.i]), int(perm[t.j]))

        truth = truth_setting1()
        sel = frozenset(t for t in TS10.terms if rng.random() < 0.3)
        truth2 = TruthSpec(TS10, {relabel(t): v for t, v in truth.active_coefs.items()},
                           truth.sigma)
        sel2 = frozenset(relabel(t) for t in sel)
        assert sensitivity(sel, truth) == sensitivity(sel2, truth2)
        assert specificity(sel, truth) == specificity(sel2, truth2)

    def test_empty_denominators_absent(self):
        truth = TruthSpec(canonical_terms(2), {main(0): 1.0, main(1): 2.0}, 1.0)
        sens_c = sensitivity_by_class({main(0)}, truth)
        assert sens_c["inter"] is None and sens_c["quad"] is None
        # all mains active -> main-specificity undefined
        spec_c = specificity_by_class({main(0)}, truth)
        assert spec_c["main"] is None


class TestMse:
    def test_exact_predictions(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_unit_residuals(self):
        assert mse([1.0, -1.0], [0.0, 0.0]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(InvalidDimensionError):
            mse([1.0], [1.0, 2.0])


class TestSnr:
    def test_setting_values(self):
        assert snr(truth_setting1()).value == pytest.approx(12 / 64)
        assert snr(build_truth(preset("setting7"))).value == pytest.approx(25 / 64)
        assert snr(build_truth(preset("setting2"))).value == pytest.approx(39 / 256)

    @pytest.mark.parametrize("name", [f"setting{i}" for i in range(1, 10)])
    def test_analytic_matches_monte_carlo(self, name):
        truth = build_truth(preset(name))
        exact = snr(truth)
        mc = snr_monte_carlo(truth, STANDARD_NORMAL, mc_draws=1_000_000, seed=5)
        assert abs(mc.value - exact.value) <= 3 * mc.se

    def test_lognormal_uses_monte_carlo(self):
        truth = build_truth(preset("R1"))
        est = snr(truth, LOGNORMAL01, mc_draws=1_000_000, seed=2)
        assert est.method == "monte-carlo"
        assert est.se is not None and est.se > 0
        assert est.value > 0

    def test_unsupported_distribution(self):
        with pytest.raises(UnsupportedDistributionError):
            snr(truth_setting1(), "cauchy")

    def test_mc_draw_floor(self):
        with pytest.raises(ValueError):
            snr_monte_carlo(truth_setting1(), STANDARD_NORMAL, mc_draws=1000)


class TestAggregate:
    def test_two_point_hand_arithmetic(self):
        agg = aggregate([0.2, 0.6])
        assert agg.mean == pytest.approx(0.4)
        assert agg.median == pytest.approx(0.4)
        sd = np.std([0.2, 0.6], ddof=1)
        assert agg.se == pytest.approx(sd / np.sqrt(2))
        assert agg.n == 2

    def test_skips_absent(self):
        agg = aggregate([0.5, None, 1.0, None])
        assert agg.n == 2
        assert agg.mean == pytest.approx(0.75)

    def test_all_absent(self):
        assert aggregate([None, None]) is None


class TestTruthSpec:
    def test_rejects_zero_coefficient(self):
        with pytest.raises(InvalidConfigError):
            TruthSpec(canonical_terms(2), {main(0): 0.0}, 1.0)

    def test_rejects_foreign_term(self):
        with pytest.raises(InvalidConfigError):
            TruthSpec(canonical_terms(2), {main(5): 1.0}, 1.0)

    def test_rejects_bad_sigma(self):
        with pytest.raises(InvalidConfigError):
            TruthSpec(canonical_terms(2), {main(0): 1.0}, 0.0)
