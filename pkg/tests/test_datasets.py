import numpy as np
import pytest

from uncertkit import DomainError, GaussianMixture, InputError, MultivariateNormal
from uncertkit.datasets import BlobSpec, example_csv_path, generate_blobs, load_csv_grouped, write_example_csv


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestBlobs:
    def test_shape_and_names(self):
        blobs = generate_blobs(count=3, dim=5, seed=1)
        assert len(blobs) == 3
        assert all(b.dim == 5 for b in blobs)
        assert [b.name for b in blobs] == ["blob0", "blob1", "blob2"]

    def test_deterministic(self):
        assert generate_blobs(count=4, dim=3, seed=9) == generate_blobs(BlobSpec(4, 3, seed=9))
        assert generate_blobs(count=4, dim=3, seed=9) != generate_blobs(count=4, dim=3, seed=10)

    @pytest.mark.parametrize("scale", [0.5, 1.0, 3.0])
    def test_covariances_well_conditioned(self, scale):
        for b in generate_blobs(count=6, dim=4, seed=2, cov_scale=scale):
            assert np.linalg.eigvalsh(b.cov).min() >= 0.1 * scale - 1e-9
            np.testing.assert_array_equal(b.cov, b.cov.T)

    def test_means_in_box_and_distinct(self):
        blobs = generate_blobs(count=8, dim=2, seed=3, mean_box=2.0)
        means = np.array([b.mean for b in blobs])
        assert np.all(np.abs(means) <= 2.0)
        assert len({tuple(m) for m in means}) == 8

    @pytest.mark.parametrize("kw", [dict(count=0, dim=2), dict(count=2, dim=0), dict(count=1, dim=1, cov_scale=0)])
    def test_invalid_spec(self, kw):
        with pytest.raises(DomainError):
            generate_blobs(**kw)


class TestCsv:
    def test_bundled_fixture(self):
        dists = load_csv_grouped(example_csv_path(), "group")
        assert [d.name for d in dists] == ["alpha", "beta", "gamma"]
        assert all(isinstance(d, MultivariateNormal) and d.dim == 4 for d in dists)

    def test_fixture_regenerates(self, tmp_path):
        path = write_example_csv(tmp_path / "g.csv")
        assert path.read_text() == example_csv_path().read_text()

    def test_first_appearance_order(self, tmp_path):
        path = write(tmp_path, "x,g,y\n1,b,2\n2,a,3\n3,b,1\n0,a,0\n5,c,5\n1,c,2\n")
        dists = load_csv_grouped(path, "g")
        assert [d.name for d in dists] == ["b", "a", "c"]
        np.testing.assert_allclose(dists[0].mean, [2, 1.5])

    def test_non_numeric_cites_row(self, tmp_path):
        rows = ["g,x,y"] + [f"a,{i},{i * 2}" for i in range(6)] + ["a,oops,1"] + ["a,1,1"]
        path = write(tmp_path, "\n".join(rows) + "\n")
        with pytest.raises(InputError, match=r"row 7, column 'x'"):
            load_csv_grouped(path, "g")

    def test_missing_group_column(self, tmp_path):
        path = write(tmp_path, "g,x\na,1\n")
        with pytest.raises(InputError, match="'label' not found"):
            load_csv_grouped(path, "label")

    def test_single_row_group(self, tmp_path):
        path = write(tmp_path, "g,x\na,1\na,2\nb,3\n")
        with pytest.raises(InputError, match="kde"):
            load_csv_grouped(path, "g")
        dists = load_csv_grouped(path, "g", fit="kde")
        assert isinstance(dists[1], GaussianMixture) and len(dists[1].weights) == 1

    def test_ragged_and_empty(self, tmp_path):
        with pytest.raises(InputError, match="row 2"):
            load_csv_grouped(write(tmp_path, "g,x\na,1\na\n"), "g")
        with pytest.raises(InputError, match="no data rows"):
            load_csv_grouped(write(tmp_path, "g,x\n", "e.csv"), "g")
        with pytest.raises(InputError, match="cannot read"):
            load_csv_grouped(tmp_path / "missing.csv", "g")

    def test_kde_component_count(self, tmp_path):
        dists = load_csv_grouped(example_csv_path(), "group", fit="kde", bandwidth="silverman")
        assert [len(d.weights) for d in dists] == [40, 40, 40]

    def test_generate_then_refit(self, tmp_path):
        blobs = generate_blobs(count=3, dim=3, seed=4)
        rows = ["g,a,b,c"]
        for b in blobs:
            for r in b.sample(5000, 11):
                rows.append(b.name + "," + ",".join(repr(float(v)) for v in r))
        fitted = load_csv_grouped(write(tmp_path, "\n".join(rows)), "g")
        for b, f in zip(blobs, fitted):
            sd = np.sqrt(np.diag(b.cov))
            assert np.all(np.abs(f.mean - b.mean) <= 0.05 * np.maximum(np.abs(b.mean), sd))
            np.testing.assert_allclose(f.cov, b.cov, atol=0.1 * np.abs(b.cov).max())
