"""
Versioned flat-binary model checkpoints.

The container is :mod:`edfvae.core.flatbin` with magic ``b"EDFVAE\\x00\\x01"``;
the header carries the architecture, dims, family and metadata, and the
arrays are the model parameters keyed ``<layer>.<weight|bias>``.
"""

from __future__ import annotations

from pathlib import Path

from ..core.edf import EdfFamily
from ..core.flatbin import read_flat, write_flat
from ..errors import DataFormatError
from .model import VaeModel, build_architecture

MAGIC = b"EDFVAE\x00\x01"
FORMAT_VERSION = 1


def save_checkpoint(model: VaeModel, path: str | Path) -> None:
    header = {
        "version": FORMAT_VERSION,
        "architecture": model.architecture.value,
        "d": model.d,
        "kappa": model.kappa,
        "hidden_scale": model.hidden_scale,
        "beta": model.beta,
        "family": model.family.name,
        "trials_n": model.family.trials_n,
        "dispersion_phi": model.family.dispersion_phi,
        "canonical_scale_rho": model.family.canonical_scale_rho,
        "metadata": model.metadata,
    }
    write_flat(path, MAGIC, header, model.parameters())


def load_checkpoint(path: str | Path) -> VaeModel:
    header, arrays = read_flat(path, MAGIC, FORMAT_VERSION, "edfvae checkpoint")
    family = EdfFamily.from_name(
        header["family"],
        trials_n=header["trials_n"],
        dispersion_phi=header["dispersion_phi"],
        canonical_scale_rho=header["canonical_scale_rho"],
    )
    model = build_architecture(
        header["architecture"],
        header["d"],
        header["kappa"],
        family,
        hidden_scale=header["hidden_scale"],
        beta=header["beta"],
    )
    model.metadata = header.get("metadata", {})
    params = model.parameters()
    if set(arrays) != set(params):
        raise DataFormatError(f"{path} parameters do not match a {model.architecture.value} model")
    for name, value in arrays.items():
        if params[name].shape != value.shape:
            raise DataFormatError(f"checkpoint parameter {name} {list(value.shape)} does not fit the model")
        params[name][...] = value
    return model
