"""Tests for the binary snapshot format."""

import json

import numpy as np
import pytest

from bhmflow.errors import HeaderMismatch
from bhmflow.grid import Field, SpectralGrid
from bhmflow.snapshots import read_snapshot, write_snapshot


def sample_field(n=(64, 64), length=2 * np.pi, seed=0):
    g = SpectralGrid.create(n, length)
    rng = np.random.default_rng(seed)
    return Field(g, rng.standard_normal(g.shape))


class TestRoundTrip:
    def test_bit_exact(self, tmp_path):
        f = sample_field()
        path = tmp_path / "f.bhm"
        write_snapshot(f, path, t=1.5, model_name="thin_film")
        back = read_snapshot(path)
        np.testing.assert_array_equal(back.values, f.values)
        assert back.header["t"] == 1.5
        assert back.header["model_name"] == "thin_film"
        assert back.grid.n == f.grid.n
        assert back.grid.length == pytest.approx(f.grid.length)

    @pytest.mark.parametrize("shape", [(8,), (16, 8), (8, 8, 8)])
    def test_all_dimensions(self, tmp_path, shape):
        f = sample_field(shape)
        path = tmp_path / "f.bhm"
        write_snapshot(f, path)
        np.testing.assert_array_equal(read_snapshot(path).values, f.values)

    def test_constant_field(self, tmp_path):
        g = SpectralGrid.create((16, 16), 12 * np.pi)
        f = Field.constant(g, 1.0 / 3.0)
        path = tmp_path / "c.bhm"
        write_snapshot(f, path)
        np.testing.assert_array_equal(read_snapshot(path).values, f.values)

    def test_extra_header_entries_preserved(self, tmp_path):
        f = sample_field((8, 8))
        path = tmp_path / "f.bhm"
        write_snapshot(f, path, extra={"h_prep": 0.05})
        assert read_snapshot(path).header["h_prep"] == 0.05

    def test_expected_grid_accepted(self, tmp_path):
        f = sample_field()
        path = tmp_path / "f.bhm"
        write_snapshot(f, path)
        back = read_snapshot(path, expect_grid=f.grid)
        assert back.grid is f.grid


class TestHeaderMismatches:
    def test_wrong_grid_rejected(self, tmp_path):
        f = sample_field((16, 16))
        path = tmp_path / "f.bhm"
        write_snapshot(f, path)
        other = SpectralGrid.create((32, 32), 2 * np.pi)
        with pytest.raises(HeaderMismatch):
            read_snapshot(path, expect_grid=other)

    def test_wrong_length_rejected(self, tmp_path):
        f = sample_field((16, 16), length=2 * np.pi)
        path = tmp_path / "f.bhm"
        write_snapshot(f, path)
        other = SpectralGrid.create((16, 16), 4 * np.pi)
        with pytest.raises(HeaderMismatch):
            read_snapshot(path, expect_grid=other)

    def test_truncated_payload(self, tmp_path):
        f = sample_field((16, 16))
        path = tmp_path / "f.bhm"
        write_snapshot(f, path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(HeaderMismatch):
            read_snapshot(path)

    def test_missing_header_key(self, tmp_path):
        path = tmp_path / "f.bhm"
        header = {"format_version": 1, "dim": 1, "n": [8]}  # no length etc.
        path.write_bytes(json.dumps(header).encode() + b"\n" + b"\x00" * 64)
        with pytest.raises(HeaderMismatch):
            read_snapshot(path)

    def test_dim_n_disagreement(self, tmp_path):
        path = tmp_path / "f.bhm"
        header = {"format_version": 1, "dim": 2, "n": [8], "length": [1.0],
                  "byte_order": "little", "scalar": "f64"}
        path.write_bytes(json.dumps(header).encode() + b"\n" + b"\x00" * 64)
        with pytest.raises(HeaderMismatch):
            read_snapshot(path)

    def test_garbage_header(self, tmp_path):
        path = tmp_path / "f.bhm"
        path.write_bytes(b"\xff\xfe not json\n" + b"\x00" * 64)
        with pytest.raises(HeaderMismatch):
            read_snapshot(path)

    def test_unsupported_scalar(self, tmp_path):
        path = tmp_path / "f.bhm"
        header = {"format_version": 1, "dim": 1, "n": [8], "length": [1.0],
                  "byte_order": "little", "scalar": "f32"}
        path.write_bytes(json.dumps(header).encode() + b"\n" + b"\x00" * 32)
        with pytest.raises(HeaderMismatch):
            read_snapshot(path)
