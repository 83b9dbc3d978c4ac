"""Node certainty via the Laplacian eigenstructure and the mirror group inverse.

Each node of a coupled drift-diffusion network accumulates evidence with
variance at least sigma^2 t / n; the certainty index mu of a node is the
inverse of the asymptotic excess of its variance over that floor:

    1 / mu_k = sum_{p >= 2} sigma^2 |u_k^(p)|^2 / (2 Re lambda_p)

over the nonzero Laplacian eigenpairs. The same quantity equals
(sigma^2 / 2) times the corresponding diagonal entry of the group inverse of
the mirror graph's Laplacian, which is the second, independently computed
route implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOL, Tolerances
from .errors import DisconnectedGraphError, GraphValidationError, NotNormalError, NotStronglyConnectedError
from .graph import WeightedDigraph, build_graph, is_normal, is_strongly_connected, normality_residual

INFINITE_CERTAINTY = math.inf


@dataclass(frozen=True)
class ModelParams:
    """Drift rate and diffusion standard deviation of every unit."""

    beta: float = 1.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Unitary eigendecomposition of a normal Laplacian, zero mode first.

    eigenvalues[0] == 0 with eigenvector (1/sqrt(n)) * ones; the remaining
    eigenvalues have strictly positive real part for strongly connected graphs.
    """

    eigenvalues: np.ndarray  # complex, shape (n,)
    vectors: np.ndarray  # complex unitary, shape (n, n), columns are eigenvectors
    consensus_mode_verified: bool

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class CertaintyReport:
    """Per-node certainty, the route that produced it, and dispersion summaries.

    inv_mu[k] == 0 encodes infinite certainty (mu[k] == math.inf).
    """

    mu: tuple[float, ...]
    inv_mu: tuple[float, ...]
    route: str
    kirchhoff_index: float
    total_dispersion: float
    sigma: float

    def to_rows(self) -> list[dict]:
        """Rows for CSV/JSON serialization; infinite mu serializes as None."""
        return [
            {
                "node": k + 1,
                "mu": None if math.isinf(self.mu[k]) else self.mu[k],
                "inv_mu": self.inv_mu[k],
                "route": self.route,
            }
            for k in range(len(self.mu))
        ]


def _report_from_inv_mu(inv_mu: np.ndarray, route: str, kirchhoff: float, sigma: float) -> CertaintyReport:
    inv = tuple(float(v) for v in inv_mu)
    return CertaintyReport(
        mu=tuple(INFINITE_CERTAINTY if v == 0.0 else 1.0 / v for v in inv),
        inv_mu=inv,
        route=route,
        kirchhoff_index=float(kirchhoff),
        total_dispersion=float(sum(inv)),
        sigma=float(sigma),
    )


def _digraph_from_laplacian(lap: np.ndarray) -> WeightedDigraph:
    n = lap.shape[0]
    edges = []
    for k in range(n):
        for j in range(n):
            if k != j and lap[k, j] != 0.0:
                edges.append((k + 1, j + 1, -float(lap[k, j])))
    try:
        return build_graph(n, edges)
    except GraphValidationError as exc:
        raise GraphValidationError(f"matrix is not a valid Laplacian: {exc}") from exc


def spectral_decompose(lap: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> SpectralData:
    """Unitary eigendecomposition of a normal, strongly connected Laplacian.

    Symmetric inputs use a real symmetric eigensolver; normal non-symmetric
    ones use a complex Schur factorization, whose triangular factor is
    diagonal (to roundoff) exactly when the matrix is normal. The zero mode
    is moved to position 0 and its eigenvector pinned to (1/sqrt(n)) * ones.

    Raises NotNormalError / NotStronglyConnectedError when the premises fail.
    """
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    if lap.shape != (n, n):
        raise GraphValidationError(f"Laplacian must be square, got shape {lap.shape}")
    if not is_normal(lap, tol):
        raise NotNormalError(
            f"Laplacian is not normal: commutator residual {normality_residual(lap):.3e}"
        )
    if not is_strongly_connected(_digraph_from_laplacian(lap)):
        raise NotStronglyConnectedError("graph is not strongly connected")

    scale = max(1.0, float(np.linalg.norm(lap, "fro")))
    if np.allclose(lap, lap.T, atol=tol.normality_rtol * scale):
        eigvals_r, vecs_r = np.linalg.eigh(lap)
        eigvals = eigvals_r.astype(complex)
        vecs = vecs_r.astype(complex)
    else:
        tri, z = scipy.linalg.schur(lap, output="complex")
        eigvals = np.diag(tri).copy()
        vecs = z

    # zero mode first, remaining modes in a deterministic order
    zero_idx = int(np.argmin(np.abs(eigvals)))
    rest = [p for p in range(n) if p != zero_idx]
    rest.sort(key=lambda p: (eigvals[p].real, eigvals[p].imag))
    order = [zero_idx] + rest
    eigvals = eigvals[order]
    vecs = vecs[:, order]

    if abs(eigvals[0]) > tol.eigen_residual_rtol * scale:
        raise NotStronglyConnectedError(f"no eigenvalue near zero (closest: {eigvals[0]:.3e})")
    consensus = np.full(n, 1.0 / math.sqrt(n), dtype=complex)
    overlap = complex(np.vdot(vecs[:, 0], consensus))
    if abs(abs(overlap) - 1.0) > 1e-8:
        raise NotStronglyConnectedError("zero-eigenvalue eigenspace is not the consensus direction")
    eigvals[0] = 0.0
    vecs[:, 0] = consensus

    data = SpectralData(eigenvalues=eigvals, vectors=vecs, consensus_mode_verified=True)
    _validate_spectral(lap, data, tol)
    return data


def _validate_spectral(lap: np.ndarray, data: SpectralData, tol: Tolerances) -> None:
    n = data.n
    gram = data.vectors.conj().T @ data.vectors
    if float(np.abs(gram - np.eye(n)).max()) > tol.unitary_atol:
        raise NotNormalError("eigenvector matrix is not unitary within tolerance")
    residual = float(np.linalg.norm(lap @ data.vectors - data.vectors * data.eigenvalues, "fro"))
    scale = max(1.0, float(np.linalg.norm(lap, "fro")))
    if residual > tol.eigen_residual_rtol * scale:
        raise NotNormalError(f"eigenpair residual {residual:.3e} exceeds tolerance")
    if n > 1 and float(data.eigenvalues[1:].real.min()) <= 0.0:
        raise NotStronglyConnectedError("nonzero eigenvalue with nonpositive real part")


def certainty_spectral(data: SpectralData, params: ModelParams) -> CertaintyReport:
    """Certainty from the eigenstructure: 1/mu_k = sigma^2 sum |u_k|^2 / (2 Re lambda)."""
    n = data.n
    if n == 1:
        return _report_from_inv_mu(np.zeros(1), "spectral", 0.0, params.sigma)
    re = data.eigenvalues[1:].real
    weights = np.abs(data.vectors[:, 1:]) ** 2
    inv_mu = params.sigma**2 * (weights / (2.0 * re)).sum(axis=1)
    kirchhoff = n * float((1.0 / re).sum())
    return _report_from_inv_mu(inv_mu, "spectral", kirchhoff, params.sigma)


def mirror_group_inverse(lap_mirror: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Group inverse of a connected undirected graph's Laplacian.

    For a symmetric Laplacian the group inverse coincides with the
    Moore-Penrose pseudoinverse; it is built here from the symmetric
    eigendecomposition with the null mode excluded, and the defining axioms
    (P X P = P, X P X = X, P X = X P) are asserted afterwards.
    """
    lap_mirror = np.asarray(lap_mirror, dtype=float)
    n = lap_mirror.shape[0]
    scale = max(1.0, float(np.abs(lap_mirror).max()))
    if float(np.abs(lap_mirror - lap_mirror.T).max()) > 1e-12 * scale:
        raise GraphValidationError("mirror Laplacian must be symmetric")
    eigvals, vecs = np.linalg.eigh(lap_mirror)
    if n > 1 and eigvals[1] <= 1e-10 * max(1.0, eigvals[-1]):
        raise DisconnectedGraphError("zero eigenvalue is not simple: mirror graph is disconnected")
    inv = np.zeros(n)
    inv[1:] = 1.0 / eigvals[1:]
    x = (vecs * inv) @ vecs.T
    x = (x + x.T) / 2.0

    rtol = tol.group_inverse_rtol
    x_scale = max(1.0, float(np.abs(x).max()))
    if (
        float(np.abs(lap_mirror @ x @ lap_mirror - lap_mirror).max()) > rtol * scale
        or float(np.abs(x @ lap_mirror @ x - x).max()) > rtol * x_scale
        or float(np.abs(lap_mirror @ x - x @ lap_mirror).max()) > rtol * max(1.0, scale * x_scale)
    ):
        raise DisconnectedGraphError("group-inverse axioms failed; Laplacian is defective")
    return x


def certainty_group_inverse(group_inv: np.ndarray, params: ModelParams) -> CertaintyReport:
    """Certainty from the mirror group inverse: 1/mu_k = (sigma^2 / 2) X_kk."""
    diag = np.diag(np.asarray(group_inv, dtype=float)).copy()
    n = diag.shape[0]
    inv_mu = params.sigma**2 / 2.0 * diag
    if n == 1:
        inv_mu = np.zeros(1)
    kirchhoff = n * float(np.trace(group_inv))
    return _report_from_inv_mu(inv_mu, "group-inverse", kirchhoff, params.sigma)


def variance_envelope(params: ModelParams, n: int, t: float) -> tuple[float, float, float]:
    """(mean, lower, upper) = (beta t, sigma^2 t / n, sigma^2 t) at time t."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    return params.beta * t, params.sigma**2 * t / n, params.sigma**2 * t


def propagator(lap: np.ndarray, t: float) -> np.ndarray:
    """State transition matrix expm(-L t); row-stochastic for every Laplacian."""
    return scipy.linalg.expm(-np.asarray(lap, dtype=float) * t)


def _covariance_from_spectrum(data: SpectralData, params: ModelParams, t: float,
                              tol: Tolerances) -> np.ndarray:
    n = data.n
    gdiag = np.empty(n)
    gdiag[0] = t
    if n > 1:
        re = data.eigenvalues[1:].real
        gdiag[1:] = -np.expm1(-2.0 * re * t) / (2.0 * re)
    cov = (data.vectors * gdiag) @ data.vectors.conj().T
    imag_max = float(np.abs(cov.imag).max())
    if imag_max > tol.imaginary_atol * max(1.0, float(np.abs(cov.real).max())):
        raise NotNormalError(f"covariance has imaginary residue {imag_max:.3e}")
    cov = params.sigma**2 * cov.real
    return (cov + cov.T) / 2.0


def _covariance_integrated(lap: np.ndarray, params: ModelParams, t: float) -> np.ndarray:
    # dP/dt = sigma^2 I - L P - P L^T, P(0) = 0, classical 4th-order steps
    n = lap.shape[0]
    if t == 0.0:
        return np.zeros((n, n))
    norm_inf = float(np.abs(lap).sum(axis=1).max())
    h_max = 0.01 if norm_inf == 0.0 else min(0.01, 0.1 / norm_inf)
    steps = max(1, math.ceil(t / h_max))
    h = t / steps
    sig2_eye = params.sigma**2 * np.eye(n)

    def rhs(p: np.ndarray) -> np.ndarray:
        return sig2_eye - lap @ p - p @ lap.T

    p = np.zeros((n, n))
    for _ in range(steps):
        k1 = rhs(p)
        k2 = rhs(p + 0.5 * h * k1)
        k3 = rhs(p + 0.5 * h * k2)
        k4 = rhs(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return (p + p.T) / 2.0


def analytic_covariance(lap: np.ndarray, params: ModelParams, t: float, mode: str = "general",
                        tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """State covariance at time t from zero initial conditions.

    mode "normal" evaluates the eigenmode closed form (requires a normal,
    strongly connected Laplacian); mode "general" integrates the covariance
    ODE with fixed-step 4th-order steps and works for any digraph, including
    ones whose Laplacian is defective.
    """
    lap = np.asarray(lap, dtype=float)
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if mode == "normal":
        data = spectral_decompose(lap, tol)
        return _covariance_from_spectrum(data, params, t, tol)
    if mode == "general":
        return _covariance_integrated(lap, params, t)
    raise ValueError(f"unknown mode {mode!r}; expected 'normal' or 'general'")


def covariance_curves(lap: np.ndarray, params: ModelParams, times: np.ndarray,
                      tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Per-node variance Var(x_k(t)) sampled on a time grid, shape (len(times), n).

    Uses the eigenmode closed form when the Laplacian admits it, otherwise a
    single integration pass over the sorted grid.
    """
    lap = np.asarray(lap, dtype=float)
    times = np.asarray(times, dtype=float)
    if times.size and float(times.min()) < 0:
        raise ValueError("times must be >= 0")
    n = lap.shape[0]
    try:
        data = spectral_decompose(lap, tol)
    except (NotNormalError, NotStronglyConnectedError):
        data = None
    out = np.empty((times.size, n))
    if data is not None:
        for i, t in enumerate(times):
            out[i] = np.diag(_covariance_from_spectrum(data, params, float(t), tol))
        return out
    order = np.argsort(times, kind="stable")
    prev_t = 0.0
    norm_inf = float(np.abs(lap).sum(axis=1).max())
    h_max = 0.01 if norm_inf == 0.0 else min(0.01, 0.1 / norm_inf)
    sig2_eye = params.sigma**2 * np.eye(n)

    def rhs(p: np.ndarray) -> np.ndarray:
        return sig2_eye - lap @ p - p @ lap.T

    p = np.zeros((n, n))
    for i in order:
        t = float(times[i])
        span = t - prev_t
        if span > 0:
            steps = max(1, math.ceil(span / h_max))
            h = span / steps
            for _ in range(steps):
                k1 = rhs(p)
                k2 = rhs(p + 0.5 * h * k1)
                k3 = rhs(p + 0.5 * h * k2)
                k4 = rhs(p + h * k3)
                p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            prev_t = t
        out[i] = np.diag(p)
    return out


@dataclass(frozen=True)
class DispersionSummary:
    """Kirchhoff index of the mirror, total dispersion, and their identity residual."""

    kirchhoff_index: float
    total_dispersion: float
    identity_residual: float


def dispersion_summary(report: CertaintyReport, lap_mirror: np.ndarray) -> DispersionSummary:
    """Check sum_k 1/mu_k == sigma^2 K_f / (2n) against the mirror spectrum."""
    lap_mirror = np.asarray(lap_mirror, dtype=float)
    n = lap_mirror.shape[0]
    eigvals = np.linalg.eigvalsh(lap_mirror)
    if n > 1 and eigvals[1] <= 1e-10 * max(1.0, eigvals[-1]):
        raise DisconnectedGraphError("mirror graph is disconnected")
    kirchhoff = n * float((1.0 / eigvals[1:]).sum()) if n > 1 else 0.0
    total = report.total_dispersion
    residual = abs(total - report.sigma**2 * kirchhoff / (2.0 * n))
    return DispersionSummary(kirchhoff_index=kirchhoff, total_dispersion=total, identity_residual=residual)
