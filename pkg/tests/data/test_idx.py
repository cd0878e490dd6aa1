import gzip
import struct

import numpy as np
import pytest

from edfvae.data import get_loader, load_idx, load_mnist, read_idx, write_idx
from edfvae.data.idx import MNIST_FILES
from edfvae.errors import DataFormatError


def _hand_written(path):
    header = bytes([0, 0, 0x08, 3]) + struct.pack(">3i", 2, 2, 2)
    path.write_bytes(header + bytes([0, 255, 51, 102, 10, 20, 30, 40]))
    return path


class TestReadIdx:
    def test_hand_written_file(self, tmp_path):
        x = load_idx(_hand_written(tmp_path / "tiny-idx3-ubyte"))
        assert x.shape == (2, 4)
        np.testing.assert_allclose(x[0], [0.0, 1.0, 0.2, 0.4])
        np.testing.assert_allclose(x[1] * 255, [10, 20, 30, 40])

    def test_gzip_detected_by_content(self, tmp_path):
        raw = _hand_written(tmp_path / "a").read_bytes()
        path = tmp_path / "b.idx"
        path.write_bytes(gzip.compress(raw))
        assert read_idx(path).shape == (2, 2, 2)

    def test_write_then_read(self, tmp_path):
        images = np.arange(24, dtype=np.uint8).reshape(3, 2, 4)
        write_idx(tmp_path / "imgs.gz", images)
        np.testing.assert_array_equal(read_idx(tmp_path / "imgs.gz"), images)

    def test_gzip_output_is_deterministic(self, tmp_path):
        images = np.ones((2, 3), dtype=np.uint8)
        write_idx(tmp_path / "a.gz", images)
        write_idx(tmp_path / "b.gz", images)
        assert (tmp_path / "a.gz").read_bytes() == (tmp_path / "b.gz").read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad"
        path.write_bytes(bytes([0, 0, 0x0D, 1]) + struct.pack(">i", 1) + b"\x00" * 4)
        with pytest.raises(DataFormatError, match="bad IDX magic"):
            read_idx(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short"
        path.write_bytes(_hand_written(tmp_path / "full").read_bytes()[:-1])
        with pytest.raises(DataFormatError, match="truncated payload"):
            read_idx(path)

    def test_extra_bytes(self, tmp_path):
        path = tmp_path / "long"
        path.write_bytes(_hand_written(tmp_path / "full").read_bytes() + b"\x00")
        with pytest.raises(DataFormatError, match="beyond the declared"):
            read_idx(path)

    def test_write_rejects_non_bytes(self, tmp_path):
        with pytest.raises(DataFormatError):
            write_idx(tmp_path / "x", np.array([0.5, 300.0]))


class TestMnistDirectory:
    def test_fake_directory(self, tmp_path):
        rng = np.random.default_rng(0)
        write_idx(tmp_path / f"{MNIST_FILES['train'][0]}.gz", rng.integers(0, 256, (6, 28, 28), dtype=np.uint8))
        write_idx(tmp_path / MNIST_FILES["test"][1], rng.integers(0, 256, (4, 28, 28), dtype=np.uint8))
        data = get_loader(str(tmp_path)).load()
        assert data.name == "mnist"
        assert data.sizes == (6, 4)
        assert data.d == 784

    def test_missing_files(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="No MNIST train images"):
            get_loader(f"mnist://{tmp_path}").load()

    def test_real_mnist(self, mnist_dir):
        data = load_mnist(mnist_dir)
        assert data.train.shape == (60_000, 784)
        assert data.test.shape == (10_000, 784)
        assert 0.0 <= data.train.min() and data.train.max() <= 1.0
