"""
scikit-learn style wrappers around the entanglement pipeline.

Nothing is learned from data: ``fit`` only validates the configuration and
records the feature layout, so the estimators can sit in pipelines, grid
searches or ``cross_val_score`` next to data-driven classifiers, e.g. to
compare a learned boundary with the exact one.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import numkit
from .core import stability_check, stationary_covariance
from .entanglement import partial_trace
from .sweep import MODELS, build_system, evaluate_point
from .validation import check_parameter_matrix, check_scalar

__all__ = ["EntanglementRegionClassifier", "StationaryCovarianceTransformer"]

WITNESS_COLUMNS = ("stable", "det_tilde", "min_eig_tilde", "log_negativity")


class _ParameterEstimator(BaseEstimator):
    """Shared validation: each row of ``X`` is one parameter point."""

    def _validate_config(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {sorted(MODELS)}")
        entry = MODELS[self.model]
        fixed = dict(self.fixed or {})
        for k in fixed:
            if k not in entry.numeric and k not in entry.other:
                raise ValueError(f"{k!r} is not a parameter of {self.model}")
        if self.features is None:
            features = tuple(n for n in entry.numeric if n not in fixed)
        else:
            features = tuple(self.features)
        if not features:
            raise ValueError("no free parameters left to use as features")
        bad = [f for f in features if f not in entry.numeric]
        if bad:
            raise ValueError(f"{bad} are not numeric parameters of {self.model}")
        if len(set(features)) != len(features):
            raise ValueError(f"duplicate features {features}")
        clash = set(features) & set(fixed)
        if clash:
            raise ValueError(f"{sorted(clash)} are both features and fixed")
        missing = [n for n in entry.numeric
                   if n not in features and n not in fixed and n not in entry.defaults]
        missing += [n for n in entry.other if n not in fixed]
        if missing:
            raise ValueError(f"parameters {missing} need a fixed value")
        if hasattr(self, "dead_band"):
            check_scalar(self.dead_band, "dead_band", low=0.0, low_inclusive=True)
        return features, fixed

    def fit(self, X, y=None):
        features, fixed = self._validate_config()
        check_parameter_matrix(X, n_features=len(features))
        self.feature_names_ = features
        self.fixed_ = fixed
        self.n_features_in_ = len(features)
        return self

    def _rows(self, X):
        check_is_fitted(self, "feature_names_")
        X = check_parameter_matrix(X, n_features=self.n_features_in_)
        for row in X:
            params = dict(self.fixed_)
            params.update(zip(self.feature_names_, (float(v) for v in row)))
            yield params


class EntanglementRegionClassifier(ClassifierMixin, TransformerMixin, _ParameterEstimator):
    """Classify parameter points as entangled (True) or not (False).

    Parameters
    ----------
    model : str
        One of the registered models (see :data:`gqms.sweep.MODELS`).
    features : sequence of str, optional
        Parameter names of the columns of ``X``; defaults to every numeric
        parameter not in ``fixed``, in the model's canonical order.
    fixed : dict, optional
        Values of the remaining parameters.
    dead_band : float
        Relative PSD dead band of the PPT test.

    Unstable points have no stationary state and are predicted False;
    their rows of :meth:`transform` are NaN apart from ``stable = 0``.
    """

    def __init__(self, model="single_noise", features=None, fixed=None,
                 dead_band=numkit.PSD_RTOL):
        self.model = model
        self.features = features
        self.fixed = fixed
        self.dead_band = dead_band

    def fit(self, X, y=None):
        super().fit(X, y)
        self.classes_ = np.array([False, True])
        return self

    def _verdicts(self, X):
        return [evaluate_point(self.model, q, self.dead_band) for q in self._rows(X)]

    def predict(self, X):
        return np.array([bool(v.entangled) for v in self._verdicts(X)])

    def decision_function(self, X):
        """``-min eig(S~)``: positive means entangled; NaN when unstable."""
        return np.array([-v.witnesses.min_eig_tilde if v.witnesses is not None else np.nan
                         for v in self._verdicts(X)])

    def transform(self, X):
        """Columns ``stable, det_tilde, min_eig_tilde, log_negativity``."""
        out = []
        for v in self._verdicts(X):
            w = v.witnesses
            if w is None:
                out.append((float(v.stable), np.nan, np.nan, np.nan))
            else:
                out.append((1.0, w.det_tilde, w.min_eig_tilde, w.log_negativity))
        return np.array(out, dtype=float).reshape(-1, len(WITNESS_COLUMNS))

    def get_feature_names_out(self, input_features=None):
        return np.array(WITNESS_COLUMNS, dtype=object)


class StationaryCovarianceTransformer(TransformerMixin, _ParameterEstimator):
    """Map parameter points to the upper triangle of the reduced stationary covariance.

    Rows of unstable points are NaN.
    """

    def __init__(self, model="single_noise", features=None, fixed=None):
        self.model = model
        self.features = features
        self.fixed = fixed

    def transform(self, X):
        iu = np.triu_indices(4)
        out = []
        for q in self._rows(X):
            dd, keep, _ = build_system(self.model, q)
            if not stability_check(dd.Z).stable:
                out.append(np.full(len(iu[0]), np.nan))
                continue
            R = partial_trace(stationary_covariance(dd), keep).S
            out.append(R[iu])
        return np.array(out, dtype=float)

    def get_feature_names_out(self, input_features=None):
        names = ("p1", "p2", "q1", "q2")
        iu = np.triu_indices(4)
        return np.array([f"S[{names[i]},{names[j]}]" for i, j in zip(*iu)], dtype=object)
