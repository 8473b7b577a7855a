"""Truncation rule for Neumann series sum_n M^n zeta, shared by the plane
and real-line solvers.

The partial sum stops at the first N whose observed tail bound
||M^N zeta||_inf / (1 - lam_hat) falls below the requested tolerance, where
lam_hat is a measured contraction rate.  A run of non-decreasing term norms
signals divergence (the operator is not contracting on this input).
"""

from __future__ import annotations


class SeriesDivergenceError(RuntimeError):
    pass


class NeumannTruncation:
    """Stateful stopping rule; feed it ||M^n zeta||_inf in order of n."""

    def __init__(self, lam_hat: float, tol: float, max_flat: int = 50):
        if not 0.0 <= lam_hat < 1.0:
            raise ValueError("contraction rate estimate must lie in [0, 1)")
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        self.lam_hat = float(lam_hat)
        self.tol = float(tol)
        self.max_flat = int(max_flat)
        self._prev = None
        self._flat_run = 0
        self.n_terms = 0

    def tail_bound(self, term_sup: float) -> float:
        return term_sup / (1.0 - self.lam_hat)

    def should_stop(self, term_sup: float) -> bool:
        """Record one term norm; True once the tail bound certifies the sum."""
        term_sup = float(term_sup)
        self.n_terms += 1
        if self._prev is not None and term_sup >= self._prev:
            self._flat_run += 1
            if self._flat_run >= self.max_flat:
                raise SeriesDivergenceError(
                    f"series increments non-decreasing over {self.max_flat} "
                    "consecutive terms; partial sums do not converge")
        else:
            self._flat_run = 0
        self._prev = term_sup
        return self.tail_bound(term_sup) <= self.tol
