"""Probabilistic guarantees attached to sampled solutions.

Every function here is pure arithmetic on counts and probabilities.  Sums of
binomial terms that are not plain tails are accumulated in log space so that
sample sizes up to 10^6 neither overflow nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bdtr, gammaln, logsumexp

from .model import floor_count


class CertificateError(ValueError):
    """A guarantee cannot be issued for the requested parameters."""


class NoFeasibleBudget(CertificateError):
    pass


class NoValidL(CertificateError):
    pass


def _check_prob(name: str, value: float, *, closed: bool = False) -> None:
    ok = 0.0 <= value <= 1.0 if closed else 0.0 < value < 1.0
    if not ok:
        interval = "[0, 1]" if closed else "(0, 1)"
        raise ValueError(f"{name} must lie in {interval}, got {value}")


def _ceil(value: float) -> int:
    # absorb representation error in values that are mathematically integers
    return int(math.ceil(value - 1e-12 * max(1.0, abs(value))))


def log_comb(n: int, k: int) -> float:
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def binomial_tail(N: int, k: int, eps: float) -> float:
    """``sum_{i=0}^{k} C(N, i) eps^i (1 - eps)^(N - i)``.

    Evaluated through the regularized incomplete beta function, which keeps
    the absolute error near machine precision for N up to 10^6.
    """
    if N < 0 or k < 0:
        raise ValueError("N and k must be nonnegative")
    if k > N:
        raise ValueError(f"k={k} exceeds N={N}")
    _check_prob("eps", eps, closed=True)
    if k == N or eps == 0.0:
        return 1.0
    if eps == 1.0:
        return 0.0
    return float(min(1.0, max(0.0, bdtr(k, N, eps))))


# -- a-priori scenario sample sizes ---------------------------------------------

def prior_sample_size_exact(eps: float, beta: float, h_bar: int) -> int:
    """Smallest N with ``binomial_tail(N, h_bar - 1, eps) <= beta``."""
    _check_prob("eps", eps)
    _check_prob("beta", beta)
    if h_bar < 1:
        raise ValueError("h_bar must be at least 1")

    def ok(N: int) -> bool:
        return binomial_tail(N, h_bar - 1, eps) <= beta

    lo, hi = h_bar - 1, h_bar  # the tail is 1 at N = h_bar - 1
    while not ok(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def prior_sample_size_simple(eps: float, beta: float, h_bar: int) -> int:
    """``ceil((2 / eps) (ln(1 / beta) + h_bar))``."""
    _check_prob("eps", eps)
    _check_prob("beta", beta)
    if h_bar < 1:
        raise ValueError("h_bar must be at least 1")
    return _ceil(2.0 / eps * (math.log(1.0 / beta) + h_bar))


# -- a-posteriori guarantees ----------------------------------------------------

def _wait_and_judge_log_terms(N: int, k: int, beta: float, t: float) -> tuple[float, float]:
    i = np.arange(k, N + 1)
    log_comb_ik = gammaln(i + 1) - gammaln(k + 1) - gammaln(i - k + 1)
    left = math.log(beta / (N + 1)) + float(logsumexp(log_comb_ik + (i - k) * math.log(t)))
    right = log_comb(N, k) + (N - k) * math.log(t)
    return left, right


def wait_and_judge_polynomial(N: int, k: int, beta: float, t: float) -> float:
    """``beta/(N+1) sum_{i=k}^{N} C(i,k) t^(i-k) - C(N,k) t^(N-k)``."""
    if t == 0.0:
        return beta / (N + 1) - (1.0 if k == N else 0.0)
    left, right = _wait_and_judge_log_terms(N, k, beta, t)
    return math.exp(left) - math.exp(right)


def wait_and_judge_root(N: int, k: int, beta: float, tol: float = 0.0) -> float:
    """Unique root ``t(k)`` in (0, 1) of the wait-and-judge polynomial.

    The polynomial is positive near 0 and negative at 1; bisection runs on the
    sign of the log-difference of its two parts until the bracket is narrower
    than ``tol`` relative to its upper end (default: adjacent floats), so small
    roots keep full relative accuracy.
    """
    if k < 0 or k > N:
        raise ValueError(f"need 0 <= k <= N, got k={k}, N={N}")
    _check_prob("beta", beta)
    if k == N:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        left, right = _wait_and_judge_log_terms(N, k, beta, mid)
        if left > right:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def wait_and_judge_epsilon(N: int, k: int, beta: float) -> float:
    """Violation level ``eps(k) = 1 - t(k)`` certified after observing ``k`` support scenarios.

    ``P(V(x*) >= eps(s*)) <= beta``.  ``k == N`` has no interior root and
    returns 1 by convention.
    """
    return 1.0 - wait_and_judge_root(N, k, beta)


def posterior_violation_bound(N_hat: int, V_hat: int, rho: float) -> float:
    """Largest ``gamma`` in [0, 1] with ``binomial_tail(N_hat, V_hat, gamma) >= rho``."""
    if not 0 <= V_hat <= N_hat or N_hat < 1:
        raise ValueError("need 0 <= V_hat <= N_hat and N_hat >= 1")
    _check_prob("rho", rho)
    if V_hat == N_hat:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if binomial_tail(N_hat, V_hat, mid) >= rho:
            lo = mid
        else:
            hi = mid
    return lo


def discard_condition(N: int, n: int, eps: float, k: int) -> float:
    """Left side ``C(k+n-1, k) * binomial_tail(N, k+n-1, eps)`` of the discarding test."""
    top = k + n - 1
    if top >= N:
        return math.inf
    log_val = log_comb(top, k) + math.log(max(binomial_tail(N, top, eps), 1e-320))
    return math.exp(log_val)


def discard_budget(N: int, n: int, eps: float, beta: float) -> int:
    """Largest number of scenarios that may be discarded, scanning k = 0, 1, ..."""
    _check_prob("eps", eps)
    _check_prob("beta", beta)
    if n < 1 or N < n:
        raise ValueError("need N >= n >= 1")
    if discard_condition(N, n, eps, 0) > beta:
        raise NoFeasibleBudget(f"N={N} is below the a-priori sample size; even k=0 fails")
    k = 0
    while k + 1 + n - 1 < N and discard_condition(N, n, eps, k + 1) <= beta:
        k += 1
    return k


# -- SAA sample sizes -----------------------------------------------------------

def saa_feasibility_sample_size(eps: float, eps_inner: float, gamma: float, L_lip: float,
                                D_diam: float, n: int, beta: float,
                                theta: float | None = None) -> int:
    """Samples after which every SAA-feasible point (margin gamma) is feasible w.p. 1 - beta.

    ``theta`` defaults to ``(eps - eps_inner) / 2``, for which the bound reads
    ``2/(eps-eps_inner)^2 [ln(1/beta) + n ln ceil(2LD/gamma) + ln ceil(2/(eps-eps_inner))]``.
    """
    if not 0.0 <= eps_inner < eps:
        raise ValueError("need 0 <= eps_inner < eps")
    if gamma <= 0 or L_lip <= 0 or D_diam <= 0:
        raise ValueError("gamma, L_lip and D_diam must be positive")
    _check_prob("beta", beta)
    gap = eps - eps_inner
    if theta is None:
        theta = gap / 2.0
    if not 0.0 < theta < gap:
        raise ValueError("theta must lie in (0, eps - eps_inner)")
    logs = (math.log(1.0 / beta) + math.log(_ceil(1.0 / theta))
            + n * math.log(_ceil(2.0 * L_lip * D_diam / gamma)))
    return _ceil(logs / (2.0 * (gap - theta) ** 2))


def saa_lowerbound_sample_size(eps: float, eps_level: float, delta: float) -> int:
    """``ceil(ln(1/delta) / (2 (eps_level - eps)^2))`` for an SAA lower bound at level eps_level > eps."""
    if eps_level <= eps:
        raise ValueError("the SAA level must exceed eps")
    _check_prob("delta", delta)
    return _ceil(math.log(1.0 / delta) / (2.0 * (eps_level - eps) ** 2))


# -- order-statistics lower bounds ----------------------------------------------

def order_stat_sum(M: int, N: int, eps: float, L: int) -> float:
    """``sum_{i<L} C(M,i) (1-eps)^(N i) [1 - (1-eps)^N]^(M-i)``."""
    q = (1.0 - eps) ** N
    return binomial_tail(M, L - 1, q)


def order_stat_index(M: int, N: int, eps: float, delta: float) -> int:
    """Largest L in 1..M whose order-statistic sum stays at or below delta."""
    if M < 1 or N < 1:
        raise ValueError("M and N must be positive")
    _check_prob("eps", eps)
    _check_prob("delta", delta)
    if order_stat_sum(M, N, eps, 1) > delta:
        raise NoValidL(f"(M={M}, N={N}) cannot certify any order statistic at delta={delta}")
    L = 1
    while L < M and order_stat_sum(M, N, eps, L + 1) <= delta:
        L += 1
    return L


def saa_violation_mass(N: int, eps: float, eps_level: float) -> float:
    """``b = binomial_tail(N, floor(eps_level N), eps)``."""
    return binomial_tail(N, floor_count(eps_level, N), eps)


def saa_order_stat_sum(K: int, N: int, eps: float, eps_level: float, L: int) -> float:
    return binomial_tail(K, L - 1, saa_violation_mass(N, eps, eps_level))


def saa_order_stat_index(K: int, N: int, eps: float, eps_level: float, delta: float,
                         at_most: bool = False) -> int:
    """Largest L in 1..K for the SAA order-statistic bound.

    By default L must satisfy ``sum_{i<L} C(K,i) b^i (1-b)^(K-i) >= delta``.
    With ``at_most=True`` the sum must instead stay ``<= delta``, which is
    the direction under which ``o_(L)`` is a (1 - delta) lower bound.
    """
    if K < 1 or N < 1:
        raise ValueError("K and N must be positive")
    _check_prob("eps", eps)
    _check_prob("delta", delta)
    if not 0.0 <= eps_level < 1.0:
        raise ValueError("eps_level must lie in [0, 1)")
    passing = []
    for L in range(1, K + 1):
        s = saa_order_stat_sum(K, N, eps, eps_level, L)
        if (s <= delta) if at_most else (s >= delta):
            passing.append(L)
        elif at_most:
            break
    if not passing:
        raise NoValidL(f"no L in 1..{K} satisfies the SAA order-statistic condition")
    return max(passing)


# -- certificate records ----------------------------------------------------------

@dataclass(frozen=True)
class PriorCertificate:
    epsilon: float
    beta: float
    h_bar: int
    N_required: int
    rule: str  # "exact_2008" or "closed_form_2009"

    @classmethod
    def build(cls, eps: float, beta: float, h_bar: int, rule: str = "exact_2008") -> "PriorCertificate":
        if rule == "exact_2008":
            N = prior_sample_size_exact(eps, beta, h_bar)
        elif rule == "closed_form_2009":
            N = prior_sample_size_simple(eps, beta, h_bar)
        else:
            raise ValueError(f"unknown rule {rule!r}")
        return cls(eps, beta, h_bar, N, rule)

    def covers(self, N: int) -> bool:
        return N >= self.N_required


@dataclass(frozen=True)
class PosteriorCertificate:
    N: int
    k: int
    beta: float
    epsilon_of_k: float
    root: float

    @classmethod
    def build(cls, N: int, k: int, beta: float) -> "PosteriorCertificate":
        t = wait_and_judge_root(N, k, beta)
        return cls(N, k, beta, 1.0 - t, t)


@dataclass(frozen=True)
class FeasibilityBound:
    N_hat: int
    V_hat: int
    rho: float
    eps_bar: float

    @classmethod
    def build(cls, N_hat: int, V_hat: int, rho: float) -> "FeasibilityBound":
        return cls(N_hat, V_hat, rho, posterior_violation_bound(N_hat, V_hat, rho))


@dataclass(frozen=True)
class LowerBoundPlan:
    variant: str  # "scenario" or "saa"
    M: int
    N: int
    L: int
    delta: float
    eps: float
    eps_level: float | None = None

    @classmethod
    def scenario(cls, M: int, N: int, eps: float, delta: float) -> "LowerBoundPlan":
        return cls("scenario", M, N, order_stat_index(M, N, eps, delta), delta, eps)

    @classmethod
    def saa(cls, K: int, N: int, eps: float, eps_level: float, delta: float,
            at_most: bool = True) -> "LowerBoundPlan":
        L = saa_order_stat_index(K, N, eps, eps_level, delta, at_most=at_most)
        return cls("saa", K, N, L, delta, eps, eps_level)
