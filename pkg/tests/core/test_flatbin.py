"""
Tests for the flat binary container — core/flatbin.py

Covers:
- Header and arrays come back unchanged, bytes are deterministic
- Corrupt, truncated and padded files
- mle.bin and model checkpoints share the container
"""

import numpy as np
import pytest

from edfvae.core import mle_fit
from edfvae.core.closed_form import MLE_FORMAT_VERSION, MLE_MAGIC
from edfvae.core.flatbin import read_flat, write_flat
from edfvae.errors import DataFormatError
from edfvae.nn import save_checkpoint
from edfvae.nn.checkpoint import FORMAT_VERSION, MAGIC

from ..nn.conftest import small_model

TEST_MAGIC = b"EDFTEST\x01"


class TestFlatContainer:
    def test_header_and_arrays(self, tmp_path):
        path = tmp_path / "c.bin"
        arrays = {"w": np.arange(6.0).reshape(2, 3), "b": np.array([0.5, -1.0]), "empty": np.zeros((0, 2))}
        write_flat(path, TEST_MAGIC, {"version": 7, "note": "β=1"}, arrays)
        header, loaded = read_flat(path, TEST_MAGIC, 7, "test file")
        assert header["note"] == "β=1"
        assert header["arrays"] == [["w", [2, 3]], ["b", [2]], ["empty", [0, 2]]]
        assert list(loaded) == ["w", "b", "empty"]
        for name, value in arrays.items():
            np.testing.assert_array_equal(loaded[name], value)

    def test_same_input_same_bytes(self, tmp_path):
        arrays = {"w": np.eye(3)}
        write_flat(tmp_path / "a.bin", TEST_MAGIC, {"version": 1, "z": 1, "a": 2}, arrays)
        write_flat(tmp_path / "b.bin", TEST_MAGIC, {"a": 2, "version": 1, "z": 1}, arrays)
        assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()

    def test_wrong_version(self, tmp_path):
        write_flat(tmp_path / "c.bin", TEST_MAGIC, {"version": 2}, {})
        with pytest.raises(DataFormatError, match="Unsupported test file version 2"):
            read_flat(tmp_path / "c.bin", TEST_MAGIC, 1, "test file")

    def test_corrupt_header(self, tmp_path):
        path = tmp_path / "c.bin"
        path.write_bytes(TEST_MAGIC + (4).to_bytes(4, "big") + b"{{{{")
        with pytest.raises(DataFormatError, match="corrupt header"):
            read_flat(path, TEST_MAGIC, 1, "test file")

    def test_header_length_past_end(self, tmp_path):
        path = tmp_path / "c.bin"
        path.write_bytes(TEST_MAGIC + (999).to_bytes(4, "big") + b"{}")
        with pytest.raises(DataFormatError, match="truncated"):
            read_flat(path, TEST_MAGIC, 1, "test file")

    def test_trailing_bytes(self, tmp_path):
        path = tmp_path / "c.bin"
        write_flat(path, TEST_MAGIC, {"version": 1}, {"b": np.ones(2)})
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(DataFormatError, match="2 trailing bytes"):
            read_flat(path, TEST_MAGIC, 1, "test file")

    def test_magic_must_be_eight_bytes(self, tmp_path):
        with pytest.raises(ValueError):
            write_flat(tmp_path / "c.bin", b"SHORT", {"version": 1}, {})


class TestSharedLayout:
    def test_mle_solution_file(self, tmp_path, diag_gaussian_data, gaussian):
        sol = mle_fit(diag_gaussian_data, gaussian, beta=1.0, kappa=2)
        sol.save(tmp_path / "mle.bin")
        header, arrays = read_flat(tmp_path / "mle.bin", MLE_MAGIC, MLE_FORMAT_VERSION, "MLE solution file")
        assert header["family"] == "gaussian"
        np.testing.assert_array_equal(arrays["w_hat"], sol.w_hat)

    def test_checkpoint_file(self, tmp_path):
        model = small_model("poisson", seed=2)
        save_checkpoint(model, tmp_path / "m.bin")
        header, arrays = read_flat(tmp_path / "m.bin", MAGIC, FORMAT_VERSION, "edfvae checkpoint")
        assert header["family"] == "poisson"
        assert set(arrays) == set(model.parameters())
        np.testing.assert_array_equal(arrays["decoder.0.weight"], model.decoder[0].weight)
