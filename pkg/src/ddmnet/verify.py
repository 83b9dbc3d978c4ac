"""Cross-validation suite: every analytic identity the toolkit relies on,
checked on one concrete graph.

Each check returns PASS, FAIL or SKIP (with the reason a route does not
apply to the given graph); the CLI `verify` subcommand turns any FAIL into
a nonzero exit status.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .centrality import (
    certainty_via_centrality,
    enumerate_combined_paths,
    information_centrality,
    information_matrix,
    naive_combined_information,
    rank_nodes,
)
from .certainty import (
    ModelParams,
    analytic_covariance,
    certainty_group_inverse,
    certainty_spectral,
    dispersion_summary,
    mirror_group_inverse,
    propagator,
    spectral_decompose,
    variance_envelope,
)
from .config import DEFAULT_TOL, Tolerances
from .errors import DdmnetError, PathCapExceededError
from .graph import WeightedDigraph, classify, laplacian, laplacian_row_residual, mirror_graph
from .simulate import SimConfig, simulate_ensemble

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: str = ""


def _rel_gap(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b):
        return 0.0
    return abs(a - b) / max(1.0, abs(a), abs(b))


def run_checks(g: WeightedDigraph, params: ModelParams | None = None,
               tol: Tolerances = DEFAULT_TOL, oracle_cap: int = 8) -> list[CheckResult]:
    """Run the full invariant suite against one graph."""
    params = params or ModelParams()
    results: list[CheckResult] = []
    lap = laplacian(g)
    profile = classify(g, tol)
    mirror = mirror_graph(g)
    lap_mirror = laplacian(mirror)

    def record(name: str, status: str, detail: str = "") -> None:
        results.append(CheckResult(name=name, status=status, detail=detail))

    # Laplacian row sums vanish bit-exactly by construction
    row_sums = float(np.abs(laplacian_row_residual(lap)).max())
    record("laplacian-row-sums", PASS if row_sums == 0.0 else FAIL, f"max |row sum| = {row_sums:.2e}")

    # mirror Laplacian equals the symmetric part of the original (balanced only)
    if profile.balanced:
        sym_gap = float(np.abs(lap_mirror - (lap + lap.T) / 2.0).max())
        record("mirror-symmetric-part",
               PASS if sym_gap <= 1e-12 * max(1.0, float(np.abs(lap).max())) else FAIL,
               f"max deviation = {sym_gap:.2e}")
    else:
        record("mirror-symmetric-part", SKIP, "identity holds for balanced digraphs only")
    twice = mirror_graph(mirror)
    record("mirror-idempotent", PASS if twice == mirror else FAIL)

    if profile.normal_laplacian and not profile.balanced:
        record("normal-implies-balanced", FAIL, "normal Laplacian but unbalanced degrees")
    else:
        record("normal-implies-balanced", PASS)

    # propagator of the dynamics is row-stochastic at every horizon
    worst = 0.0
    for t in (0.1, 1.0, 5.0):
        rows = propagator(lap, t).sum(axis=1)
        worst = max(worst, float(np.abs(rows - 1.0).max()))
    record("row-stochastic-propagator", PASS if worst <= 1e-9 else FAIL, f"max |row sum - 1| = {worst:.2e}")

    # certainty routes
    spectral_report = None
    if profile.normal_laplacian and profile.strongly_connected:
        spectral_report = certainty_spectral(spectral_decompose(lap, tol), params)
        record("spectral-route", PASS, "certainty computed from the eigenstructure")
    else:
        why = "Laplacian not normal" if not profile.normal_laplacian else "not strongly connected"
        record("spectral-route", SKIP, f"{why}; certainty index undefined for this graph")

    if profile.strongly_connected and profile.normal_laplacian:
        group_report = certainty_group_inverse(mirror_group_inverse(lap_mirror, tol), params)
        cent = information_centrality(mirror, "harmonic", tol)
        centrality_report = certainty_via_centrality(
            cent.info_harmonic, group_report.kirchhoff_index, params, g.n)

        gap_sg = max(_rel_gap(a, b) for a, b in zip(spectral_report.inv_mu, group_report.inv_mu))
        record("route-spectral-vs-group-inverse", PASS if gap_sg <= tol.route_agreement_rtol else FAIL,
               f"max per-node gap = {gap_sg:.2e}")
        gap_sc = max(_rel_gap(a, b) for a, b in zip(spectral_report.inv_mu, centrality_report.inv_mu))
        record("route-spectral-vs-centrality", PASS if gap_sc <= tol.route_agreement_rtol else FAIL,
               f"max per-node gap = {gap_sc:.2e}")
        gap_gc = max(_rel_gap(a, b) for a, b in zip(group_report.inv_mu, centrality_report.inv_mu))
        record("route-group-inverse-vs-centrality", PASS if gap_gc <= tol.route_agreement_rtol else FAIL,
               f"max per-node gap = {gap_gc:.2e}")

        # ranking by certainty == ranking by information centrality
        same = rank_nodes(spectral_report.mu, tol.rank_decimals) == cent.ranking
        record("ranking-certainty-vs-info-centrality", PASS if same else FAIL)

        disp = dispersion_summary(spectral_report, lap_mirror)
        if g.is_undirected():
            ok = disp.identity_residual <= 1e-9 * max(1.0, disp.total_dispersion)
            record("dispersion-kirchhoff-identity", PASS if ok else FAIL,
                   f"residual = {disp.identity_residual:.2e}")
        else:
            record("dispersion-kirchhoff-identity", SKIP,
                   "identity asserted for undirected graphs only; "
                   f"residual = {disp.identity_residual:.2e}")
    else:
        record("route-spectral-vs-group-inverse", SKIP, "certainty routes need normal + strongly connected")
        record("route-spectral-vs-centrality", SKIP, "certainty routes need normal + strongly connected")
        record("route-group-inverse-vs-centrality", SKIP, "certainty routes need normal + strongly connected")
        record("ranking-certainty-vs-info-centrality", SKIP, "certainty undefined")
        record("dispersion-kirchhoff-identity", SKIP, "certainty undefined")

    # covariance: small-time isolation, envelope bounds, large-time plateau
    t_small = 1e-6
    cov_small = analytic_covariance(lap, params, t_small, "general")
    gap_small = float(np.abs(cov_small - params.sigma**2 * t_small * np.eye(g.n)).max())
    record("covariance-small-time", PASS if gap_small <= 1e-9 else FAIL,
           f"max |Cov - sigma^2 t I| = {gap_small:.2e} at t = {t_small}")

    if profile.strongly_connected:
        ok = True
        detail = ""
        for t in (0.5, 2.0, 5.0):
            _, lower, upper = variance_envelope(params, g.n, t)
            var = np.diag(analytic_covariance(lap, params, t, "general"))
            if not (np.all(var >= lower - 1e-9) and np.all(var <= upper + 1e-9)):
                ok = False
                detail = f"variance outside [sigma^2 t / n, sigma^2 t] at t = {t}"
                break
        record("covariance-envelope-bounds", PASS if ok else FAIL, detail)
    else:
        record("covariance-envelope-bounds", SKIP, "lower bound needs strong connectivity")

    if spectral_report is not None and g.n > 1:
        data = spectral_decompose(lap, tol)
        rate = float(data.eigenvalues[1:].real.min())
        t_late = 12.0 / rate  # e^{-2 rate t} < 4e-11: transient is below tolerance
        var_late = np.diag(analytic_covariance(lap, params, t_late, "normal"))
        target = params.sigma**2 * t_late / g.n + np.asarray(spectral_report.inv_mu)
        gap_late = float(np.abs(var_late - target).max())
        record("covariance-large-time-plateau", PASS if gap_late <= 1e-9 * max(1.0, t_late) else FAIL,
               f"max gap = {gap_late:.2e} at t = {t_late:.2f}")

        cov_normal = analytic_covariance(lap, params, 2.0, "normal")
        cov_general = analytic_covariance(lap, params, 2.0, "general")
        gap_modes = float(np.abs(cov_normal - cov_general).max())
        record("covariance-normal-vs-integrated", PASS if gap_modes <= tol.covariance_cross_atol else FAIL,
               f"max gap = {gap_modes:.2e}")
    else:
        record("covariance-large-time-plateau", SKIP, "needs a normal, strongly connected graph")
        record("covariance-normal-vs-integrated", SKIP, "needs a normal, strongly connected graph")

    # simulator: identical moment sums on a repeated fixed-seed run
    norm_inf = float(np.abs(lap).sum(axis=1).max())
    h = 0.01 if norm_inf == 0.0 else min(0.01, 0.05 / norm_inf)
    sim_cfg = SimConfig(params=params, t_max=20 * h, step=h, trajectories=64, seed=1234,
                        sample_times=(20 * h,))
    first = simulate_ensemble(g, sim_cfg)
    second = simulate_ensemble(g, sim_cfg)
    identical = (np.array_equal(first.sums, second.sums)
                 and np.array_equal(first.outers, second.outers))
    record("simulation-determinism", PASS if identical else FAIL,
           f"{sim_cfg.trajectories} trajectories, {sim_cfg.total_steps} steps, repeated run")

    # path-enumeration oracle vs matrix information on the mirror
    if mirror.n <= oracle_cap and mirror.n > 1:
        try:
            info = information_matrix(lap_mirror)
            worst_pair = 0.0
            naive_deviations = []
            for k in range(1, mirror.n + 1):
                for j in range(k + 1, mirror.n + 1):
                    bundle, oracle = enumerate_combined_paths(mirror, k, j, max_nodes=oracle_cap)
                    worst_pair = max(worst_pair, abs(oracle - info.information[k - 1, j - 1]))
                    try:
                        naive = naive_combined_information(bundle)
                        if abs(naive - oracle) > tol.oracle_agreement_atol:
                            naive_deviations.append((k, j, naive - oracle))
                    except DdmnetError:
                        naive_deviations.append((k, j, math.nan))
            status = PASS if worst_pair <= tol.oracle_agreement_atol else FAIL
            detail = f"max |oracle - matrix| = {worst_pair:.2e}"
            if naive_deviations:
                pairs = ", ".join(f"({k},{j})" for k, j, _ in naive_deviations)
                detail += (f"; orientation-blind path combination deviates on pairs {pairs}"
                           " (reported, not a failure)")
            record("path-oracle-vs-matrix-information", status, detail)
        except PathCapExceededError as exc:
            record("path-oracle-vs-matrix-information", SKIP, str(exc))
    else:
        record("path-oracle-vs-matrix-information", SKIP,
               f"n = {mirror.n} exceeds the oracle cap {oracle_cap}" if mirror.n > 1 else "single node")

    return results


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.status != FAIL for r in results)
