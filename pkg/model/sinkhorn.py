#!/usr/bin/env python
# -*- coding:utf-8 -*-

# Entropic regularized optimal transport solved by Sinkhorn iterations in the log domain.

from typing import Optional, Tuple, Dict, Any
import warnings

import numpy as np
from scipy.special import logsumexp


class SinkhornConvergenceError(RuntimeError):

    def __init__(self, residual: float, n_iter: int, tol: float):
        super().__init__(f"sinkhorn did not converge in {n_iter} iterations: marginal residual {residual:.3e} > tol {tol:.1e}")
        self.residual = residual
        self.n_iter = n_iter


class SinkhornNumericalError(FloatingPointError):
    pass


def _check_marginal(weights: np.ndarray, name: str) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError(f"`{name}` must be finite and nonnegative.")
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(f"`{name}` must sum to 1: {weights.sum()}")
    return weights


def sinkhorn_log(cost: np.ndarray, mu: np.ndarray, nu: np.ndarray, reg: float,
                 max_iter: int = 1000, tol: float = 1e-9,
                 warmstart: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                 raise_on_failure: bool = True) -> Tuple[np.ndarray, Dict[str, Any]]:
    """
    log-domain sinkhorn. returns the plan and a log dictionary holding the dual potentials
    (`log_u`, `log_v`), the number of iterations and the final marginal residual.

    the plan is P = diag(u) exp(-cost/reg) diag(v) with row sums mu and column sums nu
    (max absolute deviation <= tol).

    @param cost: shape: (m, k)
    @param mu: source marginal. shape: (m,)
    @param nu: target marginal. shape: (k,)
    @param reg: entropic regularization strength (>0).
    @param warmstart: (log_u, log_v) from a previous solve on a similar problem.
    @param raise_on_failure: raise `SinkhornConvergenceError` when tol is not met within max_iter. otherwise warn.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or not np.all(np.isfinite(cost)):
        raise ValueError(f"`cost` must be a finite 2D matrix.")
    if reg <= 0:
        raise ValueError(f"`reg` must be positive: {reg}")
    mu = _check_marginal(mu, "mu")
    nu = _check_marginal(nu, "nu")
    if cost.shape != (mu.shape[0], nu.shape[0]):
        raise ValueError(f"cost shape {cost.shape} does not match marginals ({mu.shape[0]}, {nu.shape[0]})")

    with np.errstate(divide="ignore"):
        log_mu = np.log(mu)
        log_nu = np.log(nu)
    log_kernel = -cost / reg

    if warmstart is None:
        log_u = np.zeros_like(mu)
        log_v = np.zeros_like(nu)
    else:
        log_u, log_v = (np.array(v, dtype=np.float64) for v in warmstart)

    residual = np.inf
    n_iter = 0
    # log column sums of diag(u) K; shared by the residual and the next v-update.
    log_col = logsumexp(log_kernel + log_u[:, None], axis=0)
    for n_iter in range(1, max_iter + 1):
        log_v = log_nu - log_col
        log_u = log_mu - logsumexp(log_kernel + log_v[None, :], axis=1)
        # row marginals are exact after the u-update; the column residual measures convergence.
        log_col = logsumexp(log_kernel + log_u[:, None], axis=0)
        residual = float(np.max(np.abs(np.exp(log_v + log_col) - nu)))
        if residual <= tol:
            break

    plan = np.exp(log_u[:, None] + log_kernel + log_v[None, :])
    if not np.all(np.isfinite(plan)):
        raise SinkhornNumericalError(f"non-finite transport plan: reg={reg} is too small relative to the cost scale {np.ptp(cost):.3e}")
    if np.any((plan.sum(axis=1) == 0.0) & (mu > 0)):
        raise SinkhornNumericalError(f"gibbs kernel underflow: reg={reg} is too small relative to the cost scale {np.ptp(cost):.3e}")

    if residual > tol:
        if raise_on_failure:
            raise SinkhornConvergenceError(residual=residual, n_iter=n_iter, tol=tol)
        warnings.warn(f"sinkhorn did not converge: residual={residual:.3e} after {n_iter} iterations.")

    dict_log = {"log_u": log_u, "log_v": log_v, "n_iter": n_iter, "residual": residual}
    return plan, dict_log


def sinkhorn(cost: np.ndarray, mu: np.ndarray, nu: np.ndarray, reg: float,
             max_iter: int = 1000, tol: float = 1e-9) -> np.ndarray:
    """returns the entropic OT plan. see `sinkhorn_log` for details."""
    plan, _ = sinkhorn_log(cost=cost, mu=mu, nu=nu, reg=reg, max_iter=max_iter, tol=tol)
    return plan
