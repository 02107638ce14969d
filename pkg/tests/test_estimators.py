import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from gqms.estimators import EntanglementRegionClassifier, StationaryCovarianceTransformer
from gqms.models.single_noise import (
    SingleNoiseParams,
    single_noise_entangled,
    single_noise_reduced_closed_form,
)

X = np.array([[0.5, 0.1, 1.05],   # entangled
              [0.0, 1.0, 2.0],    # thermal
              [0.9, 1.0, 1.2],    # unstable
              [0.3, 0.5, 1.1]])


def test_classifier_predictions():
    clf = EntanglementRegionClassifier().fit(X)
    assert clf.feature_names_ == ("kappa", "g", "beta_tilde") and clf.n_features_in_ == 3
    np.testing.assert_array_equal(clf.predict(X), [True, False, False, True])
    np.testing.assert_array_equal(clf.classes_, [False, True])
    scores = clf.decision_function(X)
    assert scores[0] > 0 and scores[1] < 0 and np.isnan(scores[2])


def test_score_against_analytic_labels():
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(-0.8, 0.8, 60), rng.uniform(0.05, 1, 60),
                           rng.uniform(1.001, 1.6, 60)])
    y = [single_noise_entangled(*p) for p in pts]
    assert EntanglementRegionClassifier().fit(pts).score(pts, y) == 1.0


def test_transform_columns():
    clf = EntanglementRegionClassifier(features=["beta_tilde"], fixed={"kappa": 0.5, "g": 0.1})
    T = clf.fit_transform([[1.05], [1.5]])
    assert T.shape == (2, 4)
    assert list(clf.get_feature_names_out()) == ["stable", "det_tilde", "min_eig_tilde",
                                                 "log_negativity"]
    assert T[0, 1] < 0 < T[1, 1]
    unstable = EntanglementRegionClassifier().fit(X).transform(X)[2]
    assert unstable[0] == 0 and np.isnan(unstable[1:]).all()


def test_sklearn_protocol():
    clf = EntanglementRegionClassifier(model="two_noise_equal_temp", dead_band=1e-8)
    params = clf.get_params()
    assert params == {"model": "two_noise_equal_temp", "features": None, "fixed": None,
                      "dead_band": 1e-8}
    c2 = clone(clf).set_params(dead_band=1e-9)
    assert c2.dead_band == 1e-9 and clf.dead_band == 1e-8
    with pytest.raises(NotFittedError):
        clf.predict([[1.0, 1.2]])


def test_in_pipeline():
    pipe = make_pipeline(StationaryCovarianceTransformer(features=["g"],
                                                         fixed={"kappa": 0.3, "beta_tilde": 1.2}),
                         StandardScaler())
    out = pipe.fit_transform([[0.2], [0.5], [0.9]])
    assert out.shape == (3, 10)


@pytest.mark.parametrize("kwargs", [
    {"model": "nope"},
    {"features": ["omega"]},
    {"features": ["g", "g"], "fixed": {"kappa": 0.5, "beta_tilde": 1.2}},
    {"features": ["g"], "fixed": {"g": 1.0, "kappa": 0.5, "beta_tilde": 1.2}},
    {"features": ["g"]},
    {"dead_band": -1.0},
    {"fixed": {"colour": 1}},
])
def test_invalid_configuration(kwargs):
    with pytest.raises(ValueError):
        EntanglementRegionClassifier(**kwargs).fit(np.ones((1, 1)))


def test_wrong_shape():
    clf = EntanglementRegionClassifier().fit(X)
    with pytest.raises(ValueError):
        clf.predict(np.ones((2, 2)))
    with pytest.raises(ValueError):
        EntanglementRegionClassifier().fit(np.ones((2, 2)))


def test_covariance_transformer_matches_closed_form():
    tr = StationaryCovarianceTransformer().fit(X)
    out = tr.transform(X)
    R = single_noise_reduced_closed_form(SingleNoiseParams(0.5, 0.1, 1.05)).S
    np.testing.assert_allclose(out[0], R[np.triu_indices(4)], rtol=1e-9)
    assert np.isnan(out[2]).all()
    names = tr.get_feature_names_out()
    assert len(names) == 10 and names[0] == "S[p1,p1]"
