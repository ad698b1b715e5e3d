import numpy as np
import pytest

from cmssa import (
    CovarianceMatrix,
    DataError,
    EigenBasis,
    InsufficientDataError,
    ParameterError,
    ParseError,
    ShapeError,
    TrajectoryMatrix,
    center,
    collection_covariance,
    contrast,
    covariance,
    fit_basis,
    hankelize,
    load_basis,
    project,
    reconstruct,
    save_basis,
    stack,
    top_eigenbasis,
)
from cmssa.core import basis_from_dict, basis_to_dict, canonical_signs

from conftest import make_centered, make_series
from oracles import naive_reconstruction


# ---------------------------------------------------------------- hankelize

def test_hankelize_single_channel_example():
    tm = hankelize(make_centered([1.0, 2.0, 3.0]), window=2)
    assert np.array_equal(tm.values, [[1.0, 2.0], [2.0, 3.0]])
    assert tm.window == 2 and tm.channels == 1 and tm.source_length == 3


def test_hankelize_entries_match_definition(rng):
    x = rng.normal(size=(23, 3))
    w = 5
    tm = hankelize(make_centered(x), w)
    assert tm.values.shape == (23 - w + 1, 3 * w)
    for r in range(tm.values.shape[0]):
        for j in range(3):
            for c in range(w):
                assert tm.values[r, j * w + c] == x[r + c, j]


def test_hankelize_window_equal_to_length_gives_one_row(rng):
    x = rng.normal(size=(6, 2))
    tm = hankelize(make_centered(x), 6)
    assert tm.values.shape == (1, 12)


def test_hankelize_rejects_bad_windows(rng):
    series = make_centered(rng.normal(size=(4, 1)))
    with pytest.raises(ParameterError):
        hankelize(series, 0)
    with pytest.raises(ParameterError, match="exceeds"):
        hankelize(series, 5)


# --------------------------------------------------------------------- stack

def test_stack_concatenates_rows(rng):
    a = hankelize(make_centered(rng.normal(size=(10, 2)), "a"), 3)
    b = hankelize(make_centered(rng.normal(size=(7, 2)), "b"), 3)
    stacked = stack([a, b])
    assert stacked.values.shape == (8 + 5, 6)
    assert np.array_equal(stacked.values, np.vstack([a.values, b.values]))
    assert stacked.source_length is None


def test_stack_single_input_passes_values_through(rng):
    a = hankelize(make_centered(rng.normal(size=(9, 1))), 4)
    stacked = stack([a])
    assert np.array_equal(stacked.values, a.values)


def test_stack_rejects_mismatched_shapes(rng):
    a = hankelize(make_centered(rng.normal(size=(10, 1))), 3)
    b = hankelize(make_centered(rng.normal(size=(10, 1))), 4)
    with pytest.raises(ShapeError):
        stack([a, b])
    with pytest.raises(ParameterError):
        stack([])


# ---------------------------------------------------------------- covariance

def test_covariance_two_row_example():
    tm = TrajectoryMatrix(np.array([[0.0], [2.0]]), window=1, channels=1)
    cov = covariance(tm)
    assert cov.values.shape == (1, 1)
    assert cov.values[0, 0] == 2.0
    assert cov.row_count == 2


def test_covariance_is_exactly_symmetric_and_psd(rng):
    for _ in range(10):
        tm = hankelize(make_centered(rng.normal(size=(40, 2))), 6)
        cov = covariance(tm)
        assert np.array_equal(cov.values, cov.values.T)
        eigvals = np.linalg.eigvalsh(cov.values)
        assert eigvals.min() >= -1e-9 * max(eigvals.max(), 0.0)


def test_covariance_needs_two_rows(rng):
    tm = hankelize(make_centered(rng.normal(size=(4, 1))), 4)
    with pytest.raises(InsufficientDataError):
        covariance(tm)


def test_covariance_matrix_rejects_asymmetry():
    with pytest.raises(ShapeError):
        CovarianceMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]), row_count=3)


# ------------------------------------------------------------------ contrast

def test_contrast_alpha_zero_returns_foreground_covariance(rng):
    cx = covariance(hankelize(make_centered(rng.normal(size=(30, 1))), 4))
    cy = covariance(hankelize(make_centered(rng.normal(size=(30, 1))), 4))
    assert contrast(cx, cy, 0.0) is cx


def test_contrast_subtracts_scaled_background(rng):
    cx = covariance(hankelize(make_centered(rng.normal(size=(30, 1))), 4))
    cy = covariance(hankelize(make_centered(rng.normal(size=(30, 1))), 4))
    mixed = contrast(cx, cy, 2.5)
    assert np.array_equal(mixed.values, cx.values - 2.5 * cy.values)
    assert np.array_equal(mixed.values, mixed.values.T)


def test_contrast_validation(rng):
    cx = covariance(hankelize(make_centered(rng.normal(size=(30, 1))), 4))
    cy = covariance(hankelize(make_centered(rng.normal(size=(30, 1))), 5))
    with pytest.raises(ParameterError):
        contrast(cx, cx, -0.1)
    with pytest.raises(ShapeError):
        contrast(cx, cy, 1.0)


# ------------------------------------------------------------- top_eigenbasis

def test_top_eigenbasis_on_diagonal_matrix():
    cov = CovarianceMatrix(np.diag([3.0, 1.0, 2.0]), row_count=10)
    basis = top_eigenbasis(cov, 2, window=3, channels=1)
    assert np.allclose(basis.eigenvalues, [3.0, 2.0])
    assert np.allclose(np.abs(basis.vectors), [[1, 0], [0, 0], [0, 1]])
    # canonical sign: the peak entry of each column is positive
    assert basis.vectors[0, 0] > 0 and basis.vectors[2, 1] > 0


def test_top_eigenbasis_orders_by_algebraic_value():
    cov = CovarianceMatrix(np.diag([5.0, -7.0, 1.0]), row_count=10)
    basis = top_eigenbasis(cov, 2, window=3, channels=1)
    assert np.allclose(basis.eigenvalues, [5.0, 1.0])


def test_top_eigenbasis_contract_on_random_matrices(rng):
    for _ in range(20):
        tm = hankelize(make_centered(rng.normal(size=(50, 2))), 5)
        cov = covariance(tm)
        k = int(rng.integers(1, cov.dim + 1))
        basis = top_eigenbasis(cov, k, window=5, channels=2)
        gram = basis.vectors.T @ basis.vectors
        assert np.abs(gram - np.eye(k)).max() <= 1e-10
        residual = cov.values @ basis.vectors - basis.vectors * basis.eigenvalues
        bound = 1e-8 * (np.linalg.norm(cov.values) + 1.0)
        assert np.all(np.linalg.norm(residual, axis=0) <= bound)
        peaks = np.argmax(np.abs(basis.vectors), axis=0)
        assert np.all(basis.vectors[peaks, np.arange(k)] > 0)


def test_top_eigenbasis_k_bounds(rng):
    cov = covariance(hankelize(make_centered(rng.normal(size=(30, 1))), 4))
    with pytest.raises(ParameterError):
        top_eigenbasis(cov, 0, window=4, channels=1)
    with pytest.raises(ParameterError):
        top_eigenbasis(cov, 5, window=4, channels=1)
    full = top_eigenbasis(cov, 4, window=4, channels=1)
    assert full.vectors.shape == (4, 4)


def test_eigenbasis_type_invariants():
    good = EigenBasis(
        vectors=np.eye(4),
        eigenvalues=np.array([4.0, 3.0, 2.0, 1.0]),
        window=2,
        channels=2,
        alpha=0.0,
    )
    assert good.k == 4
    with pytest.raises(ParameterError, match="orthonormal"):
        EigenBasis(np.eye(4) * 2.0, np.array([4.0, 3.0, 2.0, 1.0]), 2, 2, 0.0)
    with pytest.raises(ParameterError, match="descending"):
        EigenBasis(np.eye(4), np.array([1.0, 2.0, 3.0, 4.0]), 2, 2, 0.0)
    with pytest.raises(ParameterError, match="canonical"):
        EigenBasis(-np.eye(4), np.array([4.0, 3.0, 2.0, 1.0]), 2, 2, 0.0)
    with pytest.raises(ParameterError):
        EigenBasis(np.eye(4), np.array([4.0, 3.0, 2.0, 1.0]), 2, 2, alpha=-1.0)


def test_canonical_signs_flips_only_negative_peaks():
    m = np.array([[0.8, -0.9], [-0.6, 0.1]])
    fixed = canonical_signs(m)
    assert np.array_equal(fixed[:, 0], m[:, 0])
    assert np.array_equal(fixed[:, 1], -m[:, 1])


# ---------------------------------------------------------- project/reconstruct

def test_project_with_identity_basis_returns_trajectory(rng):
    x = rng.normal(size=(12, 2))
    series = make_centered(x)
    basis = EigenBasis(np.eye(8), np.ones(8), window=4, channels=2, alpha=0.0)
    assert np.array_equal(project(series, basis), hankelize(series, 4).values)


def test_project_validation(rng):
    basis = EigenBasis(np.eye(4), np.ones(4), window=4, channels=1, alpha=0.0)
    with pytest.raises(ParameterError, match="exceeds"):
        project(make_centered(rng.normal(size=(3, 1))), basis)
    with pytest.raises(ShapeError):
        project(make_centered(rng.normal(size=(9, 2))), basis)


def test_reconstruct_matches_naive_formula_on_many_small_instances(rng):
    worst = 0.0
    for _ in range(120):
        t = int(rng.integers(2, 13))
        w = int(rng.integers(1, min(t, 4) + 1))
        d = int(rng.integers(1, 3))
        k = int(rng.integers(1, d * w + 1))
        series = make_centered(rng.normal(size=(t, d)))
        cov = covariance(hankelize(series, w)) if t - w + 1 >= 2 else None
        if cov is None:
            basis = EigenBasis(
                np.eye(d * w)[:, :k], np.ones(k), window=w, channels=d, alpha=0.0
            )
        else:
            basis = top_eigenbasis(cov, k, window=w, channels=d)
        dec = reconstruct(series, basis)
        expected = naive_reconstruction(dec.pcs, basis.vectors, w, d, t)
        worst = max(worst, np.abs(dec.rcs - expected).max())
    assert worst <= 1e-10


def test_reconstruct_completeness_with_full_basis(rng):
    for w, d in [(4, 1), (8, 2), (5, 2)]:
        t = int(rng.integers(2 * w, 4 * w))
        series = make_centered(rng.normal(size=(t, d)))
        basis = top_eigenbasis(
            covariance(hankelize(series, w)), d * w, window=w, channels=d
        )
        total = reconstruct(series, basis).summed_rcs()
        assert np.abs(total - series.values).max() <= 1e-8


def test_summed_rcs_can_restore_channel_means(rng):
    raw = make_series(rng, 40, 2)
    series = center(raw)
    basis = top_eigenbasis(
        covariance(hankelize(series, 4)), 8, window=4, channels=2
    )
    dec = reconstruct(series, basis)
    restored = dec.summed_rcs(series.channel_means)
    assert np.abs(restored - raw.values).max() <= 1e-8


def test_decomposition_component_blocks(rng):
    series = make_centered(rng.normal(size=(20, 2)))
    basis = top_eigenbasis(
        covariance(hankelize(series, 3)), 4, window=3, channels=2
    )
    dec = reconstruct(series, basis)
    assert dec.pcs.shape == (18, 4)
    assert dec.rcs.shape == (20, 8)
    assert np.array_equal(dec.component(2), dec.rcs[:, 4:6])


# ------------------------------------------------------------------ fit_basis

def test_fit_basis_contrastive_requires_background(rng):
    fg = [make_series(rng, 30, 1, sid="x")]
    with pytest.raises(ParameterError):
        fit_basis(fg, None, window=4, k=2, alpha=1.0)


def test_fit_basis_pools_multiple_series(rng):
    fg = [make_series(rng, 30, 1, sid="x1"), make_series(rng, 22, 1, sid="x2")]
    basis = fit_basis(fg, None, window=4, k=2)
    pooled = collection_covariance(fg, 4)
    assert pooled.row_count == 27 + 19
    direct = top_eigenbasis(pooled, 2, window=4, channels=1)
    assert np.array_equal(basis.vectors, direct.vectors)


# -------------------------------------------------------------- serialization

def test_basis_json_round_trip_is_value_exact(tmp_path, rng):
    fg = [make_series(rng, 60, 2, sid="x")]
    bg = [make_series(rng, 60, 2, sid="y")]
    basis = fit_basis(fg, bg, window=5, k=3, alpha=1.7)
    path = tmp_path / "model.json"
    save_basis(path, basis)
    loaded = load_basis(path)
    assert loaded.vectors.tobytes() == basis.vectors.tobytes()
    assert loaded.eigenvalues.tobytes() == basis.eigenvalues.tobytes()
    assert (loaded.window, loaded.channels, loaded.alpha) == (5, 2, 1.7)


def test_basis_dict_layout_is_row_major(rng):
    basis = EigenBasis(np.eye(3), np.ones(3), window=3, channels=1, alpha=0.0)
    payload = basis_to_dict(basis)
    assert payload["vectors"] == list(np.eye(3).ravel())
    rebuilt = basis_from_dict(payload)
    assert np.array_equal(rebuilt.vectors, basis.vectors)


def test_load_basis_errors(tmp_path):
    with pytest.raises(DataError):
        load_basis(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_basis(bad)
    truncated = tmp_path / "trunc.json"
    truncated.write_text('{"window": 2, "channels": 1, "alpha": 0.0, '
                         '"eigenvalues": [1.0], "vectors": [1.0]}')
    with pytest.raises(ShapeError):
        load_basis(truncated)
