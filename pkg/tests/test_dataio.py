import json

import numpy as np
import pytest

from mvclust import (
    ClusteringReport,
    generate_synthetic,
    kmeans,
    load_dataset,
    load_report,
    normalize_views,
    save_dataset,
    save_report,
    validate_dataset,
)
from mvclust.dataio import read_manifest, read_matrix
from mvclust.errors import (
    InfeasibleGeometryError,
    MissingFileError,
    MissingManifestError,
    ParseError,
    SchemaVersionMismatchError,
    ZeroColumnWarning,
)
from mvclust.metrics import accuracy


def toy_dataset(seed=0, labels=True):
    return generate_synthetic(
        n=24, k=3, n_views=2, dims=(5, 7), separation=6.0, noise_sigma=0.4, seed=seed
    )


def test_dataset_roundtrip(tmp_path):
    ds = toy_dataset()
    save_dataset(ds, tmp_path / "d", name="toy")
    back = load_dataset(tmp_path / "d")
    assert back.num_views == ds.num_views and back.n == ds.n
    for a, b in zip(ds.views, back.views):
        assert np.array_equal(a, b)
    assert np.array_equal(ds.labels, back.labels)


def test_small_toy_directory(tmp_path):
    d = tmp_path / "tiny"
    d.mkdir()
    (d / "manifest.json").write_text(
        json.dumps({"name": "tiny", "view_files": ["a.txt", "b.txt"]})
    )
    (d / "a.txt").write_text("1 2 3 4\n5 6 7 8\n")
    (d / "b.txt").write_text("1,0,0,1\n0,1,1,0\n2,2,2,2\n")
    ds = load_dataset(d)
    assert ds.n == 4 and ds.num_views == 2
    assert ds.view_dims == [2, 3]
    assert ds.labels is None


def test_missing_manifest(tmp_path):
    with pytest.raises(MissingManifestError):
        load_dataset(tmp_path)


def test_manifest_referencing_absent_file(tmp_path):
    d = tmp_path / "broken"
    d.mkdir()
    (d / "manifest.json").write_text(
        json.dumps({"name": "broken", "view_files": ["gone.txt"]})
    )
    with pytest.raises(MissingFileError) as exc:
        load_dataset(d)
    assert "gone.txt" in str(exc.value)


def test_matrix_parse_error_location(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("1 2 3\n4 oops 6\n7 8 9\n")
    with pytest.raises(ParseError) as exc:
        read_matrix(f)
    assert exc.value.line == 2 and exc.value.col == 2


def test_matrix_ragged_rows(tmp_path):
    f = tmp_path / "ragged.txt"
    f.write_text("1 2 3\n4 5\n")
    with pytest.raises(ParseError) as exc:
        read_matrix(f)
    assert exc.value.line == 2


def test_manifest_plain_filename(tmp_path):
    d = tmp_path / "alt"
    d.mkdir()
    (d / "manifest").write_text(json.dumps({"name": "alt", "view_files": ["x.txt"], "k": 2}))
    (d / "x.txt").write_text("1 2\n3 4\n")
    m = read_manifest(d)
    assert m.k == 2 and m.view_files == ["x.txt"]


def test_labels_parse_and_validation(tmp_path):
    d = tmp_path / "lab"
    d.mkdir()
    (d / "manifest.json").write_text(
        json.dumps({"name": "lab", "view_files": ["x.txt"], "labels_file": "y.txt"})
    )
    (d / "x.txt").write_text("1 2 3 4\n")
    (d / "y.txt").write_text("0\n1\n1\n0\n")
    ds = load_dataset(d)
    assert np.array_equal(ds.labels, [0, 1, 1, 0])
    (d / "y.txt").write_text("0\nzero\n1\n0\n")
    with pytest.raises(ParseError) as exc:
        load_dataset(d)
    assert exc.value.line == 2


def test_normalize_three_four_five():
    ds = validate_dataset(
        type(toy_dataset())(views=[np.array([[3.0, 0.0], [4.0, 2.0]])])
    )
    out = normalize_views(ds)
    assert np.allclose(out.views[0][:, 0], [0.6, 0.8])


def test_normalize_idempotent_and_unit_norms():
    ds = toy_dataset(seed=1)
    once = normalize_views(ds)
    for X in once.views:
        assert np.abs(np.linalg.norm(X, axis=0) - 1).max() <= 1e-12
    twice = normalize_views(once)
    for a, b in zip(once.views, twice.views):
        assert np.abs(a - b).max() <= 1e-15


def test_normalize_zero_columns_flagged():
    X = np.array([[1.0, 0.0], [1.0, 0.0]])
    ds = validate_dataset(type(toy_dataset())(views=[X]))
    with pytest.warns(ZeroColumnWarning):
        out = normalize_views(ds)
    assert np.array_equal(out.views[0][:, 1], [0.0, 0.0])


def test_normalize_minmax_mode():
    X = np.array([[0.0, 2.0, 4.0], [5.0, 5.0, 5.0]])
    ds = validate_dataset(type(toy_dataset())(views=[X]))
    out = normalize_views(ds, mode="minmax")
    assert np.allclose(out.views[0][0], [0.0, 0.5, 1.0])
    assert np.array_equal(out.views[0][1], [0.0, 0.0, 0.0])  # constant row
    again = normalize_views(out, mode="minmax")
    assert np.allclose(out.views[0], again.views[0], atol=1e-15)


def test_synthetic_zero_noise_identical_within_cluster():
    ds = generate_synthetic(
        n=12, k=3, n_views=2, dims=(4, 5), separation=5.0, noise_sigma=0.0, seed=2
    )
    for X in ds.views:
        for c in range(3):
            cols = X[:, ds.labels == c]
            assert np.abs(cols - cols[:, [0]]).max() == 0.0


def test_synthetic_single_cluster():
    ds = generate_synthetic(
        n=8, k=1, n_views=1, dims=(3,), separation=1.0, noise_sigma=0.1, seed=3
    )
    assert not ds.labels.any()


def test_synthetic_center_separation():
    sep = 7.5
    ds = generate_synthetic(
        n=20, k=4, n_views=1, dims=(6,), separation=sep, noise_sigma=0.0, seed=4
    )
    X = ds.views[0]
    centers = np.stack([X[:, ds.labels == c][:, 0] for c in range(4)])
    for i in range(4):
        for j in range(i + 1, 4):
            assert np.linalg.norm(centers[i] - centers[j]) == pytest.approx(sep, rel=1e-9)


def test_synthetic_determinism_and_validity():
    a = generate_synthetic(n=30, k=3, n_views=2, dims=(5, 6), separation=4.0, noise_sigma=0.3, seed=5)
    b = generate_synthetic(n=30, k=3, n_views=2, dims=(5, 6), separation=4.0, noise_sigma=0.3, seed=5)
    for Xa, Xb in zip(a.views, b.views):
        assert np.array_equal(Xa, Xb)
    assert np.array_equal(a.labels, b.labels)
    validate_dataset(a)


def test_synthetic_infeasible_geometry():
    with pytest.raises(InfeasibleGeometryError):
        generate_synthetic(n=20, k=5, n_views=1, dims=(3,), separation=1.0, noise_sigma=0.1, seed=6)


def test_synthetic_direct_kmeans_recovery():
    ds = generate_synthetic(
        n=300, k=3, n_views=3, dims=(20, 30, 25), separation=10.0, noise_sigma=0.5, seed=7
    )
    part = kmeans(ds.views[0].T, 3, restarts=5, seed=0)
    assert accuracy(part, ds.labels) >= 0.95


def _sample_report():
    return ClusteringReport(
        dataset="toy",
        k=3,
        labels=[0, 1, 2, 1],
        alpha=[0.25, 0.75],
        objective_history=[float(x) for x in np.linspace(10, 1, 150)],
        config={"beta": 0.125, "layers": [9, 3], "rng_seed": 1},
        timing={"fit_seconds": 1.5, "total_seconds": 2.0},
        metrics={"acc": 0.9, "nmi": 0.8, "pur": 0.91},
        restarts=[{"seed": 1, "final_objective": 1.0, "iters_run": 150, "converged": True, "wall_time": 1.5}],
    )


def test_report_roundtrip(tmp_path):
    report = _sample_report()
    p = tmp_path / "r.json"
    save_report(report, p)
    back = load_report(p)
    assert back == report
    assert len(back.objective_history) == 150
    assert back.objective_history == report.objective_history  # exact floats


def test_report_truncated_file(tmp_path):
    p = tmp_path / "r.json"
    save_report(_sample_report(), p)
    text = p.read_text()
    p.write_text(text[: len(text) // 2])
    with pytest.raises(ParseError):
        load_report(p)


def test_report_schema_version_mismatch(tmp_path):
    p = tmp_path / "r.json"
    raw = _sample_report().to_dict()
    raw["schema_version"] = 99
    p.write_text(json.dumps(raw))
    with pytest.raises(SchemaVersionMismatchError):
        load_report(p)


def test_report_missing_file(tmp_path):
    with pytest.raises(MissingFileError):
        load_report(tmp_path / "absent.json")
