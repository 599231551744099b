"""Estimator-style wrappers around the index computations.

Each estimator holds its numerical parameters (``get_params`` /
``set_params`` / ``clone`` work as in scikit-learn), ``fit`` computes the
index of one model, and ``predict`` maps a sequence of models to their
indices.  Models may be given as :class:`BlochModel`, as a raw description
dict, or as a ``"qwz:<m>"`` / ``"file:<path>"`` string.
"""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .bulk import berry_chern_oracle, bulk_report
from .disc import disc_spectral_flow
from .edge import edge_spectral_flow
from .exceptions import ValidationError
from .fredholm import aps_edge_index
from .models import BlochModel, EdgeSymbolFamily, load_model_json, qwz_model, validate_model


def check_model(model) -> BlochModel:
    """Coerce a model-like input to a validated :class:`BlochModel`."""
    if isinstance(model, BlochModel):
        return model
    if isinstance(model, str):
        kind, _, arg = model.partition(":")
        if kind == "qwz" and arg:
            try:
                return qwz_model(float(arg))
            except ValueError:
                raise ValidationError(f"bad qwz mass {arg!r}") from None
        if kind == "file" and arg:
            return load_model_json(arg)
        raise ValidationError(f"model spec must be 'qwz:<m>' or 'file:<path>', got {model!r}")
    return validate_model(model)


def check_models(models) -> list[BlochModel]:
    if isinstance(models, (BlochModel, str, dict)):
        models = [models]
    return [check_model(m) for m in models]


def check_scalar(x, name, target_type=numbers.Real, min_val=None, max_val=None, include_min=True, include_max=True):
    """Type and range check for a scalar parameter; returns ``x``."""
    if not isinstance(x, target_type) or isinstance(x, bool):
        raise ValidationError(f"{name} must be {getattr(target_type, '__name__', target_type)}, got {type(x).__name__}")
    if min_val is not None and (x < min_val or (x == min_val and not include_min)):
        raise ValidationError(f"{name}={x} below {'' if include_min else 'or at '}{min_val}")
    if max_val is not None and (x > max_val or (x == max_val and not include_max)):
        raise ValidationError(f"{name}={x} above {'' if include_max else 'or at '}{max_val}")
    return x


class _IndexEstimator(BaseEstimator):
    def predict(self, models) -> np.ndarray:
        """Integer index of each model, computed with this estimator's parameters."""
        return np.array([self._index(check_model(m)) for m in check_models(models)], dtype=int)

    def fit(self, model, y=None):
        self.model_ = check_model(model)
        self._fit(self.model_)
        return self

    @property
    def index_(self) -> int:
        check_is_fitted(self, "model_")
        return self._fitted_index

    def _index(self, model):
        return type(self)(**self.get_params()).fit(model).index_


class BulkIndex(_IndexEstimator):
    """Chern number of the eigenbundle above (or below) ``mu``.

    Parameters
    ----------
    mu : float, default=0.0
        Fermi level; must lie in a spectral gap.
    grid : int, default=40
        Points per torus direction.
    bundle : {"positive", "negative"}, default="positive"

    Attributes
    ----------
    report_ : ChernReport
    oracle_ : float or None
        Berry-curvature value at ``oracle_grid`` when that is set.
    """

    def __init__(self, mu=0.0, grid=40, bundle="positive", oracle_grid=None):
        self.mu = mu
        self.grid = grid
        self.bundle = bundle
        self.oracle_grid = oracle_grid

    def _fit(self, model):
        check_scalar(self.mu, "mu")
        check_scalar(self.grid, "grid", numbers.Integral, min_val=8)
        self.report_ = bulk_report(model, float(self.mu), int(self.grid), self.bundle)
        self.oracle_ = None
        if self.oracle_grid:
            self.oracle_ = berry_chern_oracle(model, float(self.mu), self.bundle, int(self.oracle_grid))
        self._fitted_index = self.report_.chern


class EdgeIndex(_IndexEstimator):
    """Spectral flow of the left-localized branches of the truncated edge family."""

    def __init__(self, mu=0.0, sites=60, steps=200, theta=0.7, delta=None):
        self.mu = mu
        self.sites = sites
        self.steps = steps
        self.theta = theta
        self.delta = delta

    def _fit(self, model):
        check_scalar(self.sites, "sites", numbers.Integral, min_val=8)
        check_scalar(self.steps, "steps", numbers.Integral, min_val=16)
        check_scalar(self.theta, "theta", min_val=0.5, max_val=1.0, include_min=False, include_max=False)
        self.report_ = edge_spectral_flow(
            EdgeSymbolFamily.from_model(model), float(self.mu), int(self.sites), int(self.steps), float(self.theta), self.delta
        )
        self._fitted_index = self.report_.index


class DiscIndex(_IndexEstimator):
    """Spectral flow of the disc Toeplitz family for a Hardy or weighted Bergman space."""

    def __init__(self, mu=0.0, degree=60, steps=200, weight="hardy", theta=0.7):
        self.mu = mu
        self.degree = degree
        self.steps = steps
        self.weight = weight
        self.theta = theta

    def _fit(self, model):
        check_scalar(self.degree, "degree", numbers.Integral, min_val=2)
        check_scalar(self.steps, "steps", numbers.Integral, min_val=16)
        self.result_ = disc_spectral_flow(
            EdgeSymbolFamily.from_model(model), float(self.mu), int(self.degree), int(self.steps), self.weight, float(self.theta)
        )
        self._fitted_index = self.result_.flow


class APSIndex(_IndexEstimator):
    """Index of the discretized ``d/dt - (H#(t) - mu)`` on the loop."""

    def __init__(self, mu=0.0, sites=40, steps=96, tol_rel=1e-6):
        self.mu = mu
        self.sites = sites
        self.steps = steps
        self.tol_rel = tol_rel

    def _fit(self, model):
        check_scalar(self.sites, "sites", numbers.Integral, min_val=8)
        check_scalar(self.steps, "steps", numbers.Integral, min_val=16)
        self.estimate_ = aps_edge_index(
            EdgeSymbolFamily.from_model(model), float(self.mu), int(self.sites), int(self.steps), float(self.tol_rel)
        )
        self._fitted_index = self.estimate_.index


class BulkEdgeCheck(BaseEstimator):
    """Computes bulk and edge indices of a model and whether they agree."""

    def __init__(self, mu=0.0, grid=40, sites=60, steps=200, theta=0.7):
        self.mu = mu
        self.grid = grid
        self.sites = sites
        self.steps = steps
        self.theta = theta

    def fit(self, model, y=None):
        model = check_model(model)
        self.bulk_ = BulkIndex(self.mu, self.grid).fit(model)
        self.edge_ = EdgeIndex(self.mu, self.sites, self.steps, self.theta).fit(model)
        self.match_ = self.bulk_.index_ == self.edge_.index_
        return self

    def predict(self, models) -> np.ndarray:
        """True where bulk and edge indices agree."""
        return np.array([type(self)(**self.get_params()).fit(m).match_ for m in check_models(models)], dtype=bool)
