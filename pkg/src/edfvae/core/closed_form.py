"""
Closed-form analysis of the β-VAE objective for affine decoders.

Replacing the expected log-likelihood by its second-order expansion in the
natural parameter ϑ around 0 gives a surrogate objective L̂ that can be
maximized analytically over the variational parameters and the decoder. This
module computes that surrogate, its maximizers (a pPCA-style
eigen-decomposition of the transformed data), the predicted latent activity,
and bounds on the remainder between the exact ELBO and L̂.

Notation used throughout:
    y⁽ⁱ⁾ = (x⁽ⁱ⁾ − F′(0)) / F″(0)      transformed observations
    Ŝ    = sample covariance of y (divisor N)
    cut-off = β·φ / F″(0)
    C    = (φ/F″(0))·I + WWᵀ/β
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import LinAlgError, cho_factor, cho_solve, cholesky

from ..errors import DataFormatError, DomainError, NumericalError, SolverPreconditionError
from .edf import EdfFamily, FamilyKind, base_measure, check_support, log_density
from .flatbin import read_flat, write_flat
from .numerics import FloatArray, as_matrix, as_vector, gaussian_raw_moment, make_rng, sample_covariance, sym_eig

logger = logging.getLogger(__name__)

SIGMA2_FLOOR = 1e-12
MLE_FORMAT_VERSION = 1
MLE_MAGIC = b"EDFMLE\x00\x01"
MLE_ARRAYS = ("b_hat", "w_hat", "u_kappa", "rotation_r", "eigenvalues", "k_diag", "active_mask", "x_bar")


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineDecoder:
    """ϑ(z) = W·z + b with W of shape (d, κ)."""

    w: FloatArray
    b: FloatArray

    def __post_init__(self):
        w = as_matrix(self.w, "W")
        b = as_vector(self.b, w.shape[0], "b")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)

    @property
    def d(self) -> int:
        return self.w.shape[0]

    @property
    def kappa(self) -> int:
        return self.w.shape[1]

    def theta(self, z: ArrayLike) -> FloatArray:
        """Natural parameters for one latent vector (κ,) or a batch (N, κ)."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape[-1] != self.kappa:
            raise DomainError(f"z must have {self.kappa} components, got shape {z.shape}")
        return z @ self.w.T + self.b


@dataclass
class MleSolution:
    """Maximizers of the surrogate objective for an affine decoder.

    ``w_hat = u_kappa · diag(sqrt(k_diag − cutoff)) · rotation_r`` and
    ``k_diag[j] = max(eigenvalues[j], cutoff)``.
    """

    b_hat: FloatArray
    w_hat: FloatArray
    u_kappa: FloatArray
    rotation_r: FloatArray
    eigenvalues: FloatArray
    k_diag: FloatArray
    sigma2_hat: float | None
    cutoff: float
    active_mask: np.ndarray
    beta: float
    family: EdfFamily
    x_bar: FloatArray
    warnings: list[str] = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.w_hat.shape[0]

    @property
    def kappa(self) -> int:
        return self.w_hat.shape[1]

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.active_mask))

    @property
    def decoder(self) -> AffineDecoder:
        return AffineDecoder(self.w_hat, self.b_hat)

    def save(self, path: str | Path) -> None:
        """Write the solution as one flat binary file (see :mod:`edfvae.core.flatbin`)."""
        header = {
            "version": MLE_FORMAT_VERSION,
            "family": self.family.name,
            "trials_n": self.family.trials_n,
            "dispersion_phi": self.family.dispersion_phi,
            "canonical_scale_rho": self.family.canonical_scale_rho,
            "beta": self.beta,
            "cutoff": self.cutoff,
            "sigma2_hat": self.sigma2_hat,
            "warnings": self.warnings,
        }
        write_flat(path, MLE_MAGIC, header, self._arrays())

    def _arrays(self) -> dict[str, np.ndarray]:
        return {
            "b_hat": self.b_hat,
            "w_hat": self.w_hat,
            "u_kappa": self.u_kappa,
            "rotation_r": self.rotation_r,
            "eigenvalues": self.eigenvalues,
            "k_diag": self.k_diag,
            "active_mask": self.active_mask.astype(np.float64),
            "x_bar": self.x_bar,
        }

    @classmethod
    def load(cls, path: str | Path) -> MleSolution:
        meta, arrays = read_flat(path, MLE_MAGIC, MLE_FORMAT_VERSION, "MLE solution file")
        missing = [name for name in MLE_ARRAYS if name not in arrays]
        if missing:
            raise DataFormatError(f"{path} is missing arrays: {', '.join(missing)}")
        family = EdfFamily.from_name(
            meta["family"],
            trials_n=meta["trials_n"],
            dispersion_phi=meta["dispersion_phi"],
            canonical_scale_rho=meta["canonical_scale_rho"],
        )
        return cls(
            b_hat=arrays["b_hat"],
            w_hat=arrays["w_hat"],
            u_kappa=arrays["u_kappa"],
            rotation_r=arrays["rotation_r"],
            eigenvalues=arrays["eigenvalues"],
            k_diag=arrays["k_diag"],
            sigma2_hat=meta["sigma2_hat"],
            cutoff=float(meta["cutoff"]),
            active_mask=arrays["active_mask"] > 0.5,
            beta=float(meta["beta"]),
            family=family,
            x_bar=arrays["x_bar"],
            warnings=list(meta.get("warnings", [])),
        )

    def csv_rows(self) -> list[tuple[str, str, float]]:
        """Long-format ``(quantity, index, value)`` rows for ``mle.csv``."""
        rows: list[tuple[str, str, float]] = []
        rows += [("b_hat", str(j), float(v)) for j, v in enumerate(self.b_hat)]
        rows += [("eigenvalue", str(j), float(v)) for j, v in enumerate(self.eigenvalues)]
        rows += [("predicted_activity", str(j), float(v)) for j, v in enumerate(activity_predict(self))]
        if self.sigma2_hat is not None:
            rows.append(("sigma2_hat", "", float(self.sigma2_hat)))
        rows.append(("cutoff", "", float(self.cutoff)))
        rows.append(("active_count", "", float(self.active_count)))
        return rows


@dataclass(frozen=True)
class VariationalOptima:
    """Optimal encoder for an MLE decoder: Σ̂_z and the affine map x ↦ μ̂_z(x) on raw x."""

    sigma_z: FloatArray
    mu_map_weight: FloatArray
    mu_map_bias: FloatArray

    def mu(self, x: ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=np.float64)
        return x @ self.mu_map_weight.T + self.mu_map_bias


@dataclass(frozen=True)
class RemainderBounds:
    """Bracket for the second-order remainder R₂ at one latent point."""

    lower: float
    upper: float
    m_range: tuple[float, float] | None = None


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _check_data(x: ArrayLike, family: EdfFamily) -> FloatArray:
    arr = as_matrix(x, "x")
    return check_support(family, arr, relaxed=True)


def _as_batch_mu(mu_z: ArrayLike, n: int, kappa: int) -> FloatArray:
    mu = np.asarray(mu_z, dtype=np.float64)
    if mu.ndim == 1:
        mu = np.broadcast_to(mu, (n, mu.shape[0]))
    if mu.shape != (n, kappa):
        raise DomainError(f"mu_z must have shape ({n}, {kappa}), got {mu.shape}")
    return mu


def _as_batch_sigma(sigma_z: ArrayLike, n: int, kappa: int) -> FloatArray:
    sig = np.asarray(sigma_z, dtype=np.float64)
    if sig.ndim == 2:
        sig = np.broadcast_to(sig, (n, kappa, kappa))
    if sig.shape != (n, kappa, kappa):
        raise DomainError(f"sigma_z must have shape ({n}, {kappa}, {kappa}), got {sig.shape}")
    return sig


def _cholesky_pd(sigma: FloatArray) -> FloatArray:
    if not np.all(np.isfinite(sigma)) or np.max(np.abs(sigma - sigma.T)) > 1e-10 * max(1.0, np.abs(sigma).max()):
        raise NumericalError("covariance must be finite and symmetric")
    try:
        return cholesky(sigma, lower=True)
    except LinAlgError as e:
        raise NumericalError("covariance is not positive definite") from e


def _positive_beta(beta: float) -> float:
    beta = float(beta)
    if not (math.isfinite(beta) and beta > 0):
        raise DomainError(f"beta must be positive, got {beta}")
    return beta


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def transform_data(x: ArrayLike, family: EdfFamily) -> FloatArray:
    """y = (x − F′(0)) / F″(0), elementwise."""
    arr = check_support(family, x, relaxed=True)
    c = family.constants
    return (arr - c.f1) / c.f2


def kl_diag_gaussian(mu: ArrayLike, sigma: ArrayLike) -> float:
    """KL(Normal(μ, Σ) ‖ Normal(0, I)) = ½(tr Σ − log|Σ| + ‖μ‖² − κ)."""
    sigma = as_matrix(sigma, "sigma")
    mu = as_vector(mu, sigma.shape[0], "mu")
    chol = _cholesky_pd(sigma)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return 0.5 * (float(np.trace(sigma)) - logdet + float(mu @ mu) - sigma.shape[0])


def dispersion_term(x: ArrayLike, family: EdfFamily) -> float:
    """D(φ) = 2d·F(0)/φ − mean_i[‖x⁽ⁱ⁾ − F′(0)‖²/(F″(0)φ) + 2·Σ_j K(x⁽ⁱ⁾_j, φ)]."""
    arr = _check_data(x, family)
    c = family.constants
    phi = family.dispersion_phi
    d = arr.shape[1]
    resid = np.sum((arr - c.f1) ** 2, axis=1) / (c.f2 * phi)
    k = np.sum(np.asarray(base_measure(family, arr, relaxed=True)), axis=1)
    return float(2.0 * d * c.f0 / phi - np.mean(resid + 2.0 * k))


def objective_hat(dec: AffineDecoder, x: ArrayLike, family: EdfFamily, beta: float) -> float:
    """Surrogate objective at its variational optimum for the affine decoder ``dec``.

    L̂(W, b) = −½[(1/N)·Σᵢ (y⁽ⁱ⁾ − b)ᵀ C⁻¹ (y⁽ⁱ⁾ − b)
              + β·log|C| + β·d·log(F″(0)/φ) + D(φ)]
    """
    beta = _positive_beta(beta)
    arr = _check_data(x, family)
    if arr.shape[1] != dec.d:
        raise DomainError(f"x has {arr.shape[1]} columns, decoder expects {dec.d}")
    c = family.constants
    phi = family.dispersion_phi
    d = dec.d
    cmat = (phi / c.f2) * np.eye(d) + dec.w @ dec.w.T / beta
    try:
        factor = cho_factor(cmat, lower=True)
    except LinAlgError as e:
        raise NumericalError("C is singular") from e
    r = transform_data(arr, family) - dec.b
    quad = float(np.sum(r * cho_solve(factor, r.T).T)) / arr.shape[0]
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    return -0.5 * (quad + beta * logdet + beta * d * math.log(c.f2 / phi) + dispersion_term(arr, family))


def approx_objective_general(
    dec: AffineDecoder,
    mu_z: ArrayLike,
    sigma_z: ArrayLike,
    x: ArrayLike,
    family: EdfFamily,
    beta: float,
) -> float:
    """Surrogate objective for arbitrary variational parameters.

    The expectation term replaces log P(x | ϑ) by its second-order expansion in
    ϑ about 0 and integrates it exactly over z ~ Normal(μ⁽ⁱ⁾, Σ⁽ⁱ⁾); the KL term
    is closed form. ``mu_z`` is (N, κ) or (κ,); ``sigma_z`` is (N, κ, κ) or (κ, κ).
    """
    arr = _check_data(x, family)
    n = arr.shape[0]
    if arr.shape[1] != dec.d:
        raise DomainError(f"x has {arr.shape[1]} columns, decoder expects {dec.d}")
    mu = _as_batch_mu(mu_z, n, dec.kappa)
    sig = _as_batch_sigma(sigma_z, n, dec.kappa)
    c = family.constants
    phi = family.dispersion_phi
    k_sum = np.sum(np.asarray(base_measure(family, arr, relaxed=True)), axis=1)

    total = 0.0
    for i in range(n):
        theta_bar = dec.w @ mu[i] + dec.b
        var = np.einsum("jk,kl,jl->j", dec.w, sig[i], dec.w)
        expect = np.sum((arr[i] - c.f1) * theta_bar - c.f0 - 0.5 * c.f2 * (theta_bar**2 + var)) / phi + k_sum[i]
        total += expect - beta * kl_diag_gaussian(mu[i], sig[i])
    return total / n


def mle_fit(
    x: ArrayLike,
    family: EdfFamily,
    beta: float,
    kappa: int,
    rotation: ArrayLike | None = None,
    estimate_dispersion: bool = True,
    eigen_method: str = "lapack",
) -> MleSolution:
    """Maximize the surrogate objective over an affine decoder (W, b).

    Args:
        x: Observations, shape (N, d).
        family: Observation model. For Gaussian with ``estimate_dispersion``
            φ is replaced by σ̂²; the returned ``family`` carries the φ used.
        beta: KL weight, β ≥ 0.
        kappa: Latent dimension, 1 ≤ κ ≤ d.
        rotation: Orthogonal κ×κ matrix R (identity by default).

    Raises:
        SolverPreconditionError: F″(0) > 1, or Gaussian σ̂² requested with
            β ≥ d/κ ("sigma estimator undefined").
    """
    arr = _check_data(x, family)
    n, d = arr.shape
    beta = float(beta)
    if not (math.isfinite(beta) and beta >= 0):
        raise DomainError(f"beta must be nonnegative, got {beta}")
    if not (1 <= int(kappa) <= d):
        raise DomainError(f"kappa must lie in [1, {d}], got {kappa}")
    kappa = int(kappa)
    c = family.constants
    if c.f2 > 1.0:
        raise SolverPreconditionError(
            f"closed-form decoder needs F''(0) <= 1, {family.name} with n={family.trials_n} has {c.f2}"
        )

    if rotation is None:
        r = np.eye(kappa)
    else:
        r = as_matrix(rotation, "rotation")
        if r.shape != (kappa, kappa) or np.max(np.abs(r.T @ r - np.eye(kappa))) > 1e-10:
            raise DomainError(f"rotation must be an orthogonal {kappa}x{kappa} matrix")

    warnings: list[str] = []
    y = transform_data(arr, family)
    b_hat = y.mean(axis=0)
    eig = sym_eig(sample_covariance(y, b_hat), method=eigen_method)
    lam = np.maximum(eig.eigenvalues, 0.0)

    sigma2_hat: float | None = None
    if family.is_gaussian and estimate_dispersion:
        if beta >= d / kappa or kappa >= d:
            raise SolverPreconditionError(
                f"sigma estimator undefined: need beta < d/kappa = {d / kappa:g} and kappa < d"
            )
        sigma2_hat = float(np.sum(lam[kappa:]) / (d - beta * kappa))
        if sigma2_hat <= SIGMA2_FLOOR:
            msg = f"sigma2_hat={sigma2_hat:.3e} (sample covariance has rank <= kappa); floored at {SIGMA2_FLOOR}"
            logger.warning(msg)
            warnings.append(msg)
            sigma2_hat = SIGMA2_FLOOR
        family = family.with_dispersion(sigma2_hat)

    phi = family.dispersion_phi
    cutoff = beta * phi / c.f2
    lam_k = lam[:kappa]
    active = lam_k > cutoff
    k_diag = np.maximum(lam_k, cutoff)
    u_kappa = eig.eigenvectors[:, :kappa]
    w_hat = (u_kappa * np.sqrt(k_diag - cutoff)) @ r
    logger.debug("mle_fit: N=%d d=%d kappa=%d cutoff=%.4g active=%d", n, d, kappa, cutoff, int(active.sum()))

    return MleSolution(
        b_hat=b_hat,
        w_hat=w_hat,
        u_kappa=u_kappa,
        rotation_r=r,
        eigenvalues=eig.eigenvalues,
        k_diag=k_diag,
        sigma2_hat=sigma2_hat,
        cutoff=cutoff,
        active_mask=active,
        beta=beta,
        family=family,
        x_bar=arr.mean(axis=0),
        warnings=warnings,
    )


def variational_optima(sol: MleSolution, x_bar: ArrayLike | None = None) -> VariationalOptima:
    """Σ̂_z = cut-off·Rᵀ K⁻¹ R and μ̂_z(x) = Rᵀ K⁻¹ L U_κᵀ (x − x̄)/F″(0),
    with L = (K − cut-off·I)^½.

    ``x_bar`` is the raw-data sample mean (defaults to the one stored on ``sol``).
    """
    _positive_beta(sol.beta)
    x_bar = sol.x_bar if x_bar is None else as_vector(x_bar, sol.d, "x_bar")
    r = sol.rotation_r
    k_inv = 1.0 / sol.k_diag
    sigma_z = sol.cutoff * (r.T * k_inv) @ r
    sigma_z = 0.5 * (sigma_z + sigma_z.T)
    l_diag = np.sqrt(sol.k_diag - sol.cutoff)
    weight = (r.T * (k_inv * l_diag)) @ sol.u_kappa.T / sol.family.constants.f2
    return VariationalOptima(sigma_z=sigma_z, mu_map_weight=weight, mu_map_bias=-weight @ x_bar)


def optimal_variational(
    dec: AffineDecoder, x: ArrayLike, family: EdfFamily, beta: float
) -> tuple[FloatArray, FloatArray]:
    """Optimal (μ_z⁽ⁱ⁾, Σ_z) for any affine decoder.

    Σ̂ = (I + F″(0)/(βφ)·WᵀW)⁻¹ and μ̂⁽ⁱ⁾ = F″(0)/(βφ)·Σ̂Wᵀ(y⁽ⁱ⁾ − b).
    Returns ``mu`` of shape (N, κ) and the shared ``sigma`` of shape (κ, κ).
    """
    beta = _positive_beta(beta)
    arr = _check_data(x, family)
    a = family.constants.f2 / (beta * family.dispersion_phi)
    precision = np.eye(dec.kappa) + a * dec.w.T @ dec.w
    sigma = np.linalg.inv(precision)
    sigma = 0.5 * (sigma + sigma.T)
    mu = a * (transform_data(arr, family) - dec.b) @ dec.w @ sigma
    return mu, sigma


def kernel_point(dec: AffineDecoder) -> tuple[FloatArray, float]:
    """Least-squares z₀ with W·z₀ ≈ −b and the residual norm ‖W·z₀ + b‖."""
    z0, *_ = np.linalg.lstsq(dec.w, -dec.b, rcond=None)
    gap = float(np.linalg.norm(dec.w @ z0 + dec.b))
    if gap > 1e-8 * (1.0 + float(np.linalg.norm(dec.b))):
        logger.warning("decoder bias is not in the range of W (gap %.3e); expanding about theta=0", gap)
    return z0, gap


def activity_predict(sol: MleSolution) -> FloatArray:
    """A_j = (λ_j − cut-off)/λ_j for λ_j > cut-off, else 0, for j = 1..κ."""
    lam = np.maximum(sol.eigenvalues[: sol.kappa], 0.0)
    out = np.zeros_like(lam)
    mask = lam > sol.cutoff
    out[mask] = (lam[mask] - sol.cutoff) / lam[mask]
    return out


def remainder_bounds(dec: AffineDecoder, z: ArrayLike, family: EdfFamily) -> RemainderBounds:
    """Bracket for R₂ = log P(x|ϑ(z)) − (second-order expansion about ϑ = 0)."""
    theta = dec.theta(as_vector(z, dec.kappa, "z"))
    if family.is_gaussian:
        return RemainderBounds(0.0, 0.0)
    if family.is_binomial:
        upper = family.trials_n / 192.0 * float(np.sum(theta**4))
        return RemainderBounds(0.0, upper, (0.0, 1.0))
    if family.kind is FamilyKind.POISSON:
        a = -(theta**3) * np.exp(theta) / 6.0
        b = -(theta**3) / 6.0
        return RemainderBounds(float(np.sum(np.minimum(a, b))), float(np.sum(np.maximum(a, b))))
    raise DomainError(f"no remainder bound for family {family.name}")


def expected_remainder(
    dec: AffineDecoder,
    mu_z: ArrayLike,
    sigma_z: ArrayLike,
    family: EdfFamily,
    samples: int = 100_000,
    seed: int = 0,
) -> float:
    """E over z ~ Normal(μ_z, Σ_z) of the upper remainder bound, averaged over data points.

    Binomial uses exact Gaussian fourth moments of ϑ_j(z); Poisson is a
    Monte-Carlo estimate with a fixed seed and ``samples`` draws in total,
    spread evenly over the data points.
    """
    mu_arr = np.asarray(mu_z, dtype=np.float64)
    n = 1 if mu_arr.ndim == 1 else mu_arr.shape[0]
    mu = _as_batch_mu(mu_arr, n, dec.kappa)
    sig = _as_batch_sigma(sigma_z, n, dec.kappa)
    if family.is_gaussian:
        return 0.0
    if family.is_binomial:
        m = mu @ dec.w.T + dec.b
        v = np.einsum("jk,nkl,jl->nj", dec.w, sig, dec.w)
        fourth = gaussian_raw_moment(m, np.maximum(v, 0.0), 4)
        return float(family.trials_n / 192.0 * np.mean(np.sum(fourth, axis=1)))
    if family.kind is FamilyKind.POISSON:
        rng = make_rng(seed)
        per_datum = max(1, samples // n)
        total = 0.0
        for i in range(n):
            chol = _cholesky_pd(sig[i])
            z = mu[i] + rng.standard_normal((per_datum, dec.kappa)) @ chol.T
            theta = dec.theta(z)
            a = -(theta**3) * np.exp(theta) / 6.0
            b = -(theta**3) / 6.0
            total += float(np.mean(np.sum(np.maximum(a, b), axis=1)))
        return total / n
    raise DomainError(f"no remainder bound for family {family.name}")


def monte_carlo_elbo(
    dec: AffineDecoder,
    mu_z: ArrayLike,
    sigma_z: ArrayLike,
    x: ArrayLike,
    family: EdfFamily,
    beta: float,
    rng: np.random.Generator,
    samples: int = 10_000,
) -> tuple[float, float]:
    """Reparameterized Monte-Carlo estimate of the β-ELBO and its standard error.

    Uses the exact log-density (no expansion) and the closed-form KL.
    """
    arr = _check_data(x, family)
    n = arr.shape[0]
    mu = _as_batch_mu(mu_z, n, dec.kappa)
    sig = _as_batch_sigma(sigma_z, n, dec.kappa)
    means = np.empty(n)
    variances = np.empty(n)
    for i in range(n):
        chol = _cholesky_pd(sig[i])
        z = mu[i] + rng.standard_normal((samples, dec.kappa)) @ chol.T
        ll = np.sum(np.asarray(log_density(family, arr[i], dec.theta(z), relaxed=True)), axis=1)
        means[i] = ll.mean() - beta * kl_diag_gaussian(mu[i], sig[i])
        variances[i] = ll.var(ddof=1) if samples > 1 else 0.0
    return float(means.mean()), float(math.sqrt(variances.sum() / samples) / n)
