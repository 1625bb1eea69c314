"""scikit-learn style front end to the power-control game."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .baselines import get_rule
from .game import GameParams, run_to_convergence
from .model import DEFAULT_NOISE_POWER, DEFAULT_P_MAX, NetworkScenario


class PowerControlGame(TransformerMixin, BaseEstimator):
    """Solve the power-control game for a set of link gains.

    ``X`` is a :class:`NetworkScenario`, a length-``n`` vector of gains to a
    shared receiver, or an ``n x n`` cross-gain matrix (row = receiver).
    ``fit`` runs the chosen update rule to its fixed point and stores the
    outcome; ``transform`` returns the equilibrium power vector.

    Attributes
    ----------
    power_ : ndarray of shape (n,)
        Equilibrium transmit powers in watts.
    sinr_ : ndarray of shape (n,)
        SINR achieved at ``power_``.
    n_iter_ : int
        Iterations performed.
    converged_ : bool
    result_ : RunResult
    """

    def __init__(
        self,
        target=5.0,
        alpha=0.0,
        price=5100.0,
        rule="priced",
        tol=1e-9,
        max_iters=5000,
        initial_power=8e-3,
        pricing_sign=-1,
        noise_power=DEFAULT_NOISE_POWER,
        p_max=DEFAULT_P_MAX,
    ):
        self.target = target
        self.alpha = alpha
        self.price = price
        self.rule = rule
        self.tol = tol
        self.max_iters = max_iters
        self.initial_power = initial_power
        self.pricing_sign = pricing_sign
        self.noise_power = noise_power
        self.p_max = p_max

    def _params(self):
        return GameParams(
            target=self.target,
            alpha=self.alpha,
            price=self.price,
            tol=self.tol,
            max_iters=self.max_iters,
            initial_power=self.initial_power,
            pricing_sign=self.pricing_sign,
        )

    def _scenario(self, X):
        if isinstance(X, NetworkScenario):
            return X
        gains = check_array(X, ensure_2d=False, dtype=np.float64)
        return NetworkScenario.from_gains(gains, self.noise_power, self.p_max)

    def _solve(self, X, p0=None):
        scenario = self._scenario(X)
        return scenario, run_to_convergence(scenario, self._params(), get_rule(self.rule), p0)

    def fit(self, X, y=None, p0=None):
        self.scenario_, self.result_ = self._solve(X, p0)
        self.power_ = self.result_.final_powers
        self.sinr_ = self.result_.final_sinrs
        self.n_iter_ = self.result_.iterations_used
        self.converged_ = self.result_.converged
        return self

    def transform(self, X):
        check_is_fitted(self, "power_")
        return np.array(self._solve(X)[1].final_powers)

    def fit_transform(self, X, y=None, **fit_params):
        return np.array(self.fit(X, y, **fit_params).power_)
