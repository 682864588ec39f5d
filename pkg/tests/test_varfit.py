"""Deterministic and stochastic divergence minimization over families."""

import json

import numpy as np
import pytest

from renyi_vi.distributions import make_gaussian
from renyi_vi.models import exponential_model, gaussian_mean_model
from renyi_vi.varfit import (
    DominanceError,
    FAMILY_BUILDERS,
    fit,
    fit_stochastic,
    gamma_family,
    gaussian_family,
    isotropic_gaussian_family,
    laplace_family,
)

ANISO = make_gaussian([0.0, 0.0], [[1.0, 0.9], [0.9, 1.0]])


def iso_renyi_optimum(alpha, lams=(1.9, 0.1)):
    """Dense-grid oracle for the isotropic-variance optimum, written directly
    from the same-mean divergence in terms of target eigenvalues."""
    l1, l2 = lams
    lo = (alpha - 1.0) * max(lams) / alpha + 1e-9
    s2 = np.linspace(lo, 5.0, 200001)
    v1 = alpha * s2 + (1 - alpha) * l1
    v2 = alpha * s2 + (1 - alpha) * l2
    d = -(np.log(v1) + np.log(v2) - (1 - alpha) * (np.log(l1) + np.log(l2))
          - 2.0 * alpha * np.log(s2)) / (2.0 * (alpha - 1.0))
    return float(s2[int(np.argmin(d))])


class TestConjugateRecovery:
    @pytest.mark.parametrize("kind,alpha", [("renyi-alpha", 2.0),
                                            ("kl-forward", None),
                                            ("kl-reverse", None)])
    def test_family_containing_target_recovers_it(self, kind, alpha):
        post = make_gaussian(0.75, 0.25)
        res = fit(post, gaussian_family(), kind, alpha=alpha)
        assert abs(res.params[0] - 0.75) <= 1e-6
        assert 1 - 1e-4 <= res.params[1] ** 2 / 0.25 <= 1 + 1e-4
        assert res.objective.value <= 1e-8
        assert res.converged


class TestIsotropicFits:
    def test_forward_kl_moment_matches(self):
        res = fit(ANISO, isotropic_gaussian_family(), "kl-forward", budget=700)
        assert abs(res.params[2] ** 2 - 1.0) <= 0.01

    def test_reverse_kl_collapses(self):
        res = fit(ANISO, isotropic_gaussian_family(), "kl-reverse", budget=700)
        assert abs(res.params[2] ** 2 - 0.19) <= 0.01

    def test_renyi_matches_grid_search_oracle(self):
        for alpha in (2.0, 5.0):
            res = fit(ANISO, isotropic_gaussian_family(), "renyi-alpha",
                      alpha=alpha, budget=700)
            assert abs(res.params[2] ** 2 - iso_renyi_optimum(alpha)) <= 0.01

    def test_spread_ordering_chain(self):
        s2 = {}
        for key, kind, a in [("rev", "kl-reverse", None), ("fwd", "kl-forward", None),
                             ("a2", "renyi-alpha", 2.0), ("a5", "renyi-alpha", 5.0)]:
            res = fit(ANISO, isotropic_gaussian_family(), kind, alpha=a, budget=700)
            s2[key] = float(res.params[2] ** 2)
        assert s2["rev"] < s2["fwd"] <= s2["a2"] + 1e-9
        assert s2["a2"] <= s2["a5"] + 1e-9
        assert s2["a5"] <= 1.9 + 0.05


class TestFitMechanics:
    def test_trace_objective_nonincreasing(self):
        post = make_gaussian(0.2, 0.04)
        res = fit(post, laplace_family(), "renyi-alpha", alpha=2.0, quad_tol=1e-7)
        objs = [t["objective"] for t in res.trace]
        assert all(objs[i + 1] <= objs[i] for i in range(len(objs) - 1))

    def test_dominance_error(self):
        with pytest.raises(DominanceError, match="dominate"):
            fit(make_gaussian(0.0, 1.0), gamma_family(), "renyi-alpha", alpha=2.0)

    def test_budget_limits_evaluations(self):
        post = make_gaussian(0.0, 1.0)
        res = fit(post, laplace_family(), "renyi-alpha", alpha=2.0, budget=60,
                  quad_tol=1e-6)
        assert res.n_evals <= 60

    def test_alpha_required_for_renyi(self):
        with pytest.raises(ValueError, match="alpha"):
            fit(make_gaussian(0, 1), gaussian_family(), "renyi-alpha")

    def test_unknown_objective_rejected(self):
        with pytest.raises(ValueError, match="objective"):
            fit(make_gaussian(0, 1), gaussian_family(), "hellinger")

    def test_result_serializes_to_json(self):
        res = fit(make_gaussian(0.3, 0.5), gaussian_family(), "kl-forward")
        blob = res.to_json()
        parsed = json.loads(blob)
        assert parsed["objective_kind"] == "kl-forward"
        assert len(parsed["params"]) == 2
        assert parsed["converged"] is True

    def test_model_data_target_form(self):
        m = gaussian_mean_model(0.0, 1.0)
        data = m.simulate(0.5, 30, seed=1)
        res = fit((m, data), gaussian_family(), "renyi-alpha", alpha=2.0)
        post = m.exact_posterior(data)
        assert abs(res.params[0] - float(post.mean[0])) <= 1e-6

    def test_gamma_family_on_exponential_posterior(self):
        m = exponential_model()
        data = m.simulate(2.0, 150, seed=5)
        res = fit((m, data), gamma_family(), "renyi-alpha", alpha=2.0,
                  budget=260, quad_tol=1e-7)
        post = m.exact_posterior(data)
        assert abs(res.params[0] - float(post.mean[0])) <= 0.01
        assert res.objective.value <= 1e-3  # posterior is Gamma up to truncation


class TestFitStochastic:
    MODEL = gaussian_mean_model(0.0, 1.0)
    DATA = MODEL.simulate(0.5, 10, 42)

    def test_conjugate_target_reaches_small_divergence(self):
        res = fit_stochastic((self.MODEL, self.DATA), gaussian_family(), alpha=2.0,
                             steps=2000, batch_size=256, seed=0)
        assert res.objective.value <= 1e-3

    def test_bit_identical_rerun(self):
        a = fit_stochastic((self.MODEL, self.DATA), gaussian_family(), alpha=2.0,
                           steps=60, batch_size=64, seed=9)
        b = fit_stochastic((self.MODEL, self.DATA), gaussian_family(), alpha=2.0,
                           steps=60, batch_size=64, seed=9)
        assert a.trace == b.trace
        assert np.array_equal(a.params, b.params)

    def test_accepted_subsequence_monotone(self):
        res = fit_stochastic((self.MODEL, self.DATA), gaussian_family(), alpha=2.0,
                             steps=120, batch_size=64, seed=2)
        accepted = [t["objective"] for t in res.trace if t["accepted"]]
        assert all(accepted[i + 1] <= accepted[i] for i in range(len(accepted) - 1))

    def test_figure1_target_alpha_ordering(self):
        s2 = {}
        for alpha in (2.0, 5.0):
            res = fit_stochastic(ANISO, isotropic_gaussian_family(), alpha=alpha,
                                 steps=900, batch_size=256, seed=4)
            s2[alpha] = float(res.params[2] ** 2)
        assert s2[5.0] >= s2[2.0] - 0.02

    def test_mc_bound_tracks_log_evidence(self):
        # near the optimum the population bound equals log evidence plus
        # ((alpha-1)/alpha) D ~ 0; the estimate sits within sampling noise
        res = fit_stochastic((self.MODEL, self.DATA), gaussian_family(), alpha=2.0,
                             steps=500, batch_size=256, seed=1)
        le = self.MODEL.log_evidence(self.DATA)
        assert abs(res.extras["final_mc_bound"] - le) <= 0.01

    def test_family_without_reparameterization_rejected(self):
        with pytest.raises(ValueError, match="location-scale"):
            fit_stochastic((self.MODEL, self.DATA), gamma_family(), alpha=2.0,
                           steps=10, batch_size=16, seed=0)

    def test_divergent_trajectory_raises_with_trace(self):
        with pytest.raises(RuntimeError, match="divergent") as exc_info:
            fit_stochastic((self.MODEL, self.DATA), gaussian_family(), alpha=2.0,
                           steps=200, batch_size=16, seed=0,
                           step_size=lambda t: 1e7)
        assert len(exc_info.value.trace) >= 1


def test_family_registry_complete():
    assert set(FAMILY_BUILDERS) == {
        "gaussian", "laplace", "logistic", "gamma", "isotropic-gaussian-2d"
    }
    for name, builder in FAMILY_BUILDERS.items():
        fam = builder()
        assert fam.name == name
        assert len(fam.param_names) == len(fam.param_bounds) == len(fam.param_roles)
