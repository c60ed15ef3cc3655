"""Penalized empirical-loss selectors: modified BIC and plug-in variance penalties."""

import math
from typing import Tuple, Union

from sparsetune.core.dataset import Dataset
from sparsetune.core.linalg import orthonormal_basis, project_with_basis
from sparsetune.errors import ConfigurationError, UnavailableEstimatorError
from sparsetune.estimators.results import EstimatorPath
from sparsetune.logger import info, warning
from sparsetune.penalties.classical import PenaltyKind, classical_penalties
from sparsetune.selection.report import (
    FLAG_ZERO_RSS,
    FLAG_ZERO_VARIANCE,
    CandidateRow,
    SelectionReport,
    argmin_candidate,
)

EXCLUDED_TOO_LARGE = "support larger than n/2"
EXCLUDED_ZERO_RSS = "zero rss"


def modified_bic_select(path: EstimatorPath, data: Dataset) -> SelectionReport:
    """argmin of n log(rss/n) + log(n) |support| over the fits with |support| <= n/2.

    The constant n (1 + log 2 pi) of -2 log-likelihood is dropped. Fits with
    rss = 0 are excluded and flag the report.
    """
    return modified_bic_select_n(path, data.n)


def modified_bic_select_n(path: EstimatorPath, n: int) -> SelectionReport:
    """Modified BIC given only the sample size (identity designs need no X)."""
    rows = []
    flags: Tuple[str, ...] = ()
    for fit in path:
        excluded = None
        if fit.size > n / 2:
            excluded = EXCLUDED_TOO_LARGE
        elif fit.rss == 0.0:
            excluded = EXCLUDED_ZERO_RSS
            flags = (FLAG_ZERO_RSS,)
        if excluded is not None:
            rows.append(CandidateRow(lam=fit.lam, size=fit.size, crit=math.inf, excluded=excluded))
            continue
        loglik = n * math.log(fit.rss / n)
        pen = classical_penalties(PenaltyKind.BIC, dim=fit.size, n=n)
        rows.append(
            CandidateRow(
                lam=fit.lam,
                size=fit.size,
                crit=loglik + pen,
                components={"loglik": loglik, "penalty": pen},
            )
        )
    if flags:
        warning("Modified BIC excluded fits with zero residual")
    chosen = argmin_candidate([r.crit for r in rows], [r.size for r in rows])
    info(f"Modified BIC: chose lambda={rows[chosen].lam} with |support|={rows[chosen].size}")
    return SelectionReport(
        method="modified-bic",
        rows=tuple(rows),
        chosen_index=chosen,
        sigma2=path[chosen].rss / n,
        flags=flags,
        extras={"kind": path.kind},
    )


def full_design_variance(data: Dataset) -> float:
    """||Y - Pi_X Y||^2 / (n - rank X)."""
    Q = orthonormal_basis(data.X)
    rank = Q.shape[1]
    if rank >= data.n:
        raise UnavailableEstimatorError(
            f"rank(X) = {rank} >= n = {data.n}: no residual degrees of freedom for the variance"
        )
    r = data.Y - project_with_basis(Q, data.Y)
    return float(r @ r) / (data.n - rank)


def plugin_penalty_select(
    path: EstimatorPath, data: Dataset, kind: Union[str, PenaltyKind] = PenaltyKind.BIRGE_MASSART
) -> SelectionReport:
    """argmin of rss + pen(|support|, sigma2_hat) with the full-design variance estimate."""
    kind = PenaltyKind.parse(kind)
    if kind is PenaltyKind.LEBARBIER:
        raise ConfigurationError("The Lebarbier penalty applies to segmentations only")
    sigma2 = full_design_variance(data)
    flags: Tuple[str, ...] = ()
    if sigma2 == 0.0:
        flags = (FLAG_ZERO_VARIANCE,)
        warning("Plug-in variance is zero: selection reduces to comparing rss")
    rows = []
    for fit in path:
        pen = classical_penalties(kind, dim=fit.size, n=data.n, p=data.p, sigma2=sigma2)
        rows.append(
            CandidateRow(
                lam=fit.lam,
                size=fit.size,
                crit=fit.rss + pen,
                components={"rss": fit.rss, "penalty": pen},
            )
        )
    chosen = argmin_candidate([r.crit for r in rows], [r.size for r in rows])
    info(f"Plug-in {kind.value}: sigma2_hat={sigma2:.6g}, chose lambda={rows[chosen].lam}")
    return SelectionReport(
        method=f"plugin-{kind.value}",
        rows=tuple(rows),
        chosen_index=chosen,
        sigma2=sigma2,
        flags=flags,
        extras={"kind": path.kind},
    )
