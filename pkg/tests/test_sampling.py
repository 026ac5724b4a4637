import numpy as np
import pytest

from cfident.conditions import UnknownCondition, catalog, condition_holds, xy, xy_z, xy_zeq, xz, xz_yeq, yz, yz_xeq
from cfident.models import ObservedSummary, causal_effect_oracle, intervention_joint, observed_joint, summary
from cfident.prob_core import X, Y, Z, CiQuery, check_ci, max_minor, pair_slices
from cfident.sampling import (
    DegenerateBase,
    UnsatisfiableConstraintSet,
    model_from_summary,
    perturb_outside_summary,
    sample_model,
    simplex,
    witness_pair,
)
from cfident.modelio import model_to_dict

from test_models import uniform_a


def test_simplex_rows():
    draws = simplex(np.random.default_rng(0), 4, (50,))
    assert draws.shape == (50, 4)
    np.testing.assert_allclose(draws.sum(axis=-1), 1.0, atol=1e-15)
    assert draws.min() > 0


@pytest.mark.parametrize("family", "AB")
def test_deterministic_in_seed(family):
    m1 = sample_model(family, (3, 2, 3), [xy_zeq(1), yz_xeq(2)], seed=11)
    m2 = sample_model(family, (3, 2, 3), [xy_zeq(1), yz_xeq(2)], seed=11)
    m3 = sample_model(family, (3, 2, 3), [xy_zeq(1), yz_xeq(2)], seed=12)
    assert model_to_dict(m1) == model_to_dict(m2)
    assert model_to_dict(m1) != model_to_dict(m3)


def test_unconstrained_is_generic():
    m = sample_model("A", (3, 3, 3), seed=0)
    failing = [c for c in catalog(m.dims) if not condition_holds(m, c)[0]]
    assert len(failing) == len(catalog(m.dims)) - 1  # only X_|_Z holds by construction


def test_xy_given_z_copies_row_zero():
    m = sample_model("A", (3, 3, 3), [xy_z()], seed=3)
    for i in range(3):
        np.testing.assert_allclose(m.u[i], m.b[0], atol=1e-12)


def test_rank_one_slice():
    m = sample_model("A", (3, 3, 3), [xz_yeq(1)], seed=5)
    (sl,) = pair_slices(intervention_joint(m), CiQuery(X, Z, (Y, 1)))
    assert max_minor(sl) <= 1e-9
    # u^1 over (x, z) itself has rank one
    assert np.linalg.matrix_rank(m.u[:, :, 1], tol=1e-9) == 1


@pytest.mark.parametrize("family", "AB")
@pytest.mark.parametrize("dims", [(2, 2, 2), (3, 2, 3), (2, 3, 3), (4, 2, 3)])
def test_combined_constraints(family, dims):
    K, M, N = dims
    sets = [
        [xy()],
        [yz()],
        [yz_xeq(x) for x in range(1, K)] + [xy_zeq(N - 1)],
        [xy_z(), yz_xeq(0)],
        [xz_yeq(1), xy_zeq(0)],
        [xz(), xy()],
    ]
    for seed, constraints in enumerate(sets):
        m = sample_model(family, dims, constraints, seed=seed)
        jt = intervention_joint(m)
        for cond in constraints:
            assert check_ci(jt, cond.query(), 1e-9)[0], (constraints, cond)


def test_unsupported_set_reported():
    # a rank-one slab for every outcome value leaves no free component to
    # absorb the remaining mass; the constructor refuses instead of relaxing
    with pytest.raises(UnsatisfiableConstraintSet, match="all 2 outcome values"):
        sample_model("A", (3, 2, 3), [xz_yeq(0), xz_yeq(1)], seed=0)


def test_out_of_range_constraint():
    with pytest.raises(UnknownCondition):
        sample_model("A", (2, 2, 2), [xy_zeq(2)], seed=0)


class TestWitness:
    def test_binary_example(self):
        base = uniform_a()
        pair = witness_pair(base, seed=0)
        assert pair.observed_gap == 0.0
        e1, e2 = pair.effects
        assert e1 == pytest.approx(0.5, abs=1e-12)
        assert e2 == pytest.approx(0.7, abs=1e-12)
        assert pair.effect_gap == pytest.approx(0.2, abs=1e-12)

    @pytest.mark.parametrize("family", "AB")
    def test_pairs_share_observations(self, family):
        for seed in range(10):
            pair = witness_pair(sample_model(family, (3, 3, 3), seed=seed), seed=seed)
            np.testing.assert_allclose(observed_joint(pair.model_1).cells, observed_joint(pair.model_2).cells,
                                       atol=1e-12)
            assert pair.effect_gap >= 0.05

    def test_from_summary(self):
        s = ObservedSummary("B", [0.5, 0.5], [0.3, 0.7], [[0.2, 0.8], [0.6, 0.4]])
        pair = witness_pair(s, seed=1)
        np.testing.assert_array_equal(summary(pair.model_1).b0, s.b0)
        np.testing.assert_array_equal(summary(pair.model_2).c, s.c)

    def test_degenerate_base(self):
        # nearly all mass at X = 0 leaves nothing counterfactual to move
        s = ObservedSummary("A", [0.99, 0.01], [0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(DegenerateBase):
            witness_pair(s, seed=0)


def test_model_from_summary_round_trip():
    s = ObservedSummary("A", [0.2, 0.3, 0.5], [0.6, 0.4], [[0.1, 0.9], [0.7, 0.3]])
    m = model_from_summary(s, seed=3)
    back = summary(m)
    np.testing.assert_array_equal(back.a, s.a)
    np.testing.assert_array_equal(back.b0, s.b0)


def test_perturb_outside_summary_keeps_summary():
    m = sample_model("B", (3, 3, 2), seed=2)
    p = perturb_outside_summary(m, seed=9)
    assert causal_effect_oracle(m) != causal_effect_oracle(p)
    np.testing.assert_array_equal(summary(m).b0, summary(p).b0)
    np.testing.assert_array_equal(summary(m).c, summary(p).c)
