"""Synthetic generators and CSV ingestion."""

import numpy as np
import pytest
from scipy.special import expit

from pflopt.datagen import SynthConfig, gen_mixture, gen_weightshare, load_csv
from pflopt.telemetry import estimation_error
from pflopt.model import PartitionedModel
from pflopt.rng import RngStream


def mixture_config(**kw):
    defaults = dict(kind="mixture", n=20, M=3, sigma_h=0.5, seed=7, d=4)
    defaults.update(kw)
    return SynthConfig(**defaults)


def weightshare_config(**kw):
    defaults = dict(kind="weightshare", n=20, M=3, sigma_h=0.5, seed=7, d_g=4, d_l=2)
    defaults.update(kw)
    return SynthConfig(**defaults)


# -- mixture ----------------------------------------------------------------


def test_mixture_shapes_and_label_support():
    data = gen_mixture(mixture_config())
    assert data.M == 3 and data.n == 20 and data.dim == 4
    assert data.feature_tensor().shape == (3, 20, 4)
    labels = data.label_matrix()
    assert set(np.unique(labels)) <= {0.0, 1.0}
    assert data.truth is not None and data.truth.w_star.shape == (4,)


def test_mixture_supports():
    data = gen_mixture(mixture_config())
    X = data.feature_tensor()
    assert np.all((X >= 0.2) & (X < 0.5))
    assert np.all((data.truth.w_star >= 0.49) & (data.truth.w_star < 0.51))


def test_mixture_zero_heterogeneity_clusters_tightly():
    data = gen_mixture(mixture_config(sigma_h=0.0))
    for beta in data.truth.beta_stars:
        assert np.max(np.abs(beta - data.truth.w_star)) <= 0.01


def test_mixture_label_frequency_matches_analytic_mean():
    data = gen_mixture(mixture_config(n=10_000, M=2, seed=11))
    X, Y = data.feature_tensor(), data.label_matrix()
    for m in range(2):
        p = expit(-X[m] @ data.truth.beta_stars[m])
        se = np.sqrt(np.sum(p * (1 - p))) / len(p)
        assert abs(Y[m].mean() - p.mean()) <= 4 * se


def test_mixture_determinism():
    a = gen_mixture(mixture_config())
    b = gen_mixture(mixture_config())
    assert np.array_equal(a.feature_tensor(), b.feature_tensor())
    assert np.array_equal(a.label_matrix(), b.label_matrix())
    assert np.array_equal(a.truth.w_star, b.truth.w_star)


def test_mixture_documented_draw_order():
    # w*, mu_1..M, per-client delta, per-client features, per-client labels,
    # all from the single sequential stream (seed, "datagen").
    config = mixture_config()
    stream = RngStream(config.seed, "datagen")
    w_star = stream.uniform(size=4, low=0.49, high=0.51)
    mus = stream.normal(size=3, scale=0.5)
    betas = [w_star + stream.uniform(size=4, low=mus[m] - 0.01, high=mus[m] + 0.01)
             for m in range(3)]
    data = gen_mixture(config)
    assert np.array_equal(data.truth.w_star, w_star)
    for mine, theirs in zip(betas, data.truth.beta_stars):
        assert np.array_equal(mine, theirs)


def test_ground_truth_self_consistency():
    data = gen_mixture(mixture_config())
    model = PartitionedModel(data.truth.w_star, list(data.truth.beta_stars))
    assert estimation_error(model, data.truth, reparameterized=False) == 0.0


def test_heterogeneity_monotone_in_sigma_h():
    def dispersion(sigma, seed):
        data = gen_mixture(mixture_config(sigma_h=sigma, n=1, seed=seed))
        return np.mean([np.sum((b - data.truth.w_star) ** 2)
                        for b in data.truth.beta_stars])

    lo = np.mean([dispersion(0.1, s) for s in range(100)])
    hi = np.mean([dispersion(1.0, s) for s in range(100)])
    assert hi > lo


# -- weightshare ------------------------------------------------------------


def test_weightshare_shapes_and_supports():
    data = gen_weightshare(weightshare_config())
    assert data.dim == 6
    X = data.feature_tensor()
    assert np.all((X >= 0.0) & (X < 0.1))
    assert data.truth.w_star.shape == (4,)
    assert all(b.shape == (2,) for b in data.truth.beta_stars)


def test_weightshare_determinism():
    a = gen_weightshare(weightshare_config())
    b = gen_weightshare(weightshare_config())
    assert np.array_equal(a.feature_tensor(), b.feature_tensor())
    assert np.array_equal(a.label_matrix(), b.label_matrix())


def test_logistic_at_zero_truth_is_half():
    assert expit(-np.zeros(3) @ np.zeros(3)) == 0.5


# -- config validation ------------------------------------------------------


def test_synth_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(kind="nope", n=1, M=1, sigma_h=0.0, seed=0, d=1)
    with pytest.raises(ValueError):
        mixture_config(n=0)
    with pytest.raises(ValueError):
        mixture_config(sigma_h=-1.0)
    with pytest.raises(ValueError):
        mixture_config(d=None)
    with pytest.raises(ValueError):
        weightshare_config(d_l=None)
    with pytest.raises(ValueError):
        gen_mixture(weightshare_config())
    with pytest.raises(ValueError):
        gen_weightshare(mixture_config())


# -- csv loading ------------------------------------------------------------


def write_csv(path, rows, header="f1,f2,y"):
    path.write_text("\n".join([header] + rows) + "\n")


def test_load_csv_round_robin(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, ["1.0,2.0,0", "3.0,1.0,1", "0.5,0.5,0", "2.0,3.0,1"])
    data = load_csv(path, "y", M=2)
    assert data.M == 2 and data.n == 2 and data.dim == 2
    assert data.label_matrix().tolist() == [[0.0, 0.0], [1.0, 1.0]]


def test_load_csv_rows_unit_norm_and_centered_columns(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "data.csv"
    rows = [f"{a},{b},{c},{y}" for a, b, c, y in
            np.column_stack([rng.normal(size=(9, 3)), rng.integers(0, 2, size=(9, 1))])]
    write_csv(path, rows, header="f1,f2,f3,y")
    data = load_csv(path, "y", M=3)
    X = np.concatenate([c.features for c in data.clients])
    assert np.allclose(np.linalg.norm(X, axis=1), 1.0, atol=1e-12)
    # Recompute step-1 column means with a scalar loop on the raw file.
    raw = np.array([[float(v) for v in row.split(",")[:3]] for row in rows])
    centered = raw - raw.mean(axis=0)
    for col in range(3):
        assert abs(sum(centered[:, col]) / len(centered)) <= 1e-12


def test_load_csv_partition_column(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, ["1,2,0,a", "3,4,1,b", "5,6,1,a", "7,8,0,b"],
              header="f1,f2,y,site")
    data = load_csv(path, "y", M=2, partition_column="site")
    assert data.M == 2 and data.n == 2
    with pytest.raises(ValueError, match="distinct values"):
        load_csv(path, "y", M=3, partition_column="site")


def test_load_csv_trims_remainder_with_warning(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, ["1,2,0", "3,4,1", "5,6,1", "7,8,0", "9,1,1"])
    with pytest.warns(UserWarning, match="dropped 1"):
        data = load_csv(path, "y", M=2)
    assert data.n == 2


def test_load_csv_diagnostics(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, ["1,2,0", "3,oops,1"])
    with pytest.raises(ValueError, match="row 3"):
        load_csv(path, "y", M=1)
    write_csv(path, ["1,2,2"])
    with pytest.raises(ValueError, match="not binary"):
        load_csv(path, "y", M=1)
    write_csv(path, ["1,2"])
    with pytest.raises(ValueError, match="fields"):
        load_csv(path, "y", M=1)
    with pytest.raises(ValueError, match="label column"):
        load_csv(path, "label", M=1)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_csv(empty, "y", M=1)
