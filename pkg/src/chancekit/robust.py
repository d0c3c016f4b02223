"""Robust counterparts and CVaR-bound safe approximations of individual linear rows.

A row is written ``x0 + xi^T y <= 0`` with ``x0 = a0^T x + b0`` and
``y = A x + b`` (the uncertain coefficient vector).  Counterparts are encoded
through support functions of the uncertainty set, so everything stays linear
or second-order conic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .model import CCProgram, CCRow, GeneratorSpec
from .program import DeterministicProgram, ProgramBuilder, dense_terms
from .reformulate import decision_builder
from .solvers import solve_lp

SET_KINDS = ("box", "ball", "ball_box", "budget", "U1", "U2", "U3", "U4", "U5")

THETA_GRID = np.logspace(-3, 3, 64)
DEVIATION_CAP = 1e6


def ball_radius(eps: float) -> float:
    """``sqrt(2 ln(1/eps))``, shared by the ball, ball-box and U4 sets."""
    return math.sqrt(2.0 * math.log(1.0 / eps))


def budget_gamma(d: int, eps: float) -> float:
    return math.sqrt(2.0 * d * math.log(1.0 / eps))


def u3_radius(eps: float) -> float:
    return math.sqrt((1.0 - eps) / eps)


def u5_radius(eps: float) -> float:
    return (1.0 - eps) / eps * math.sqrt(2.0 * math.log(1.0 / (1.0 - eps)))


def _sqrtm_psd(S) -> np.ndarray:
    w, V = np.linalg.eigh(np.asarray(S, dtype=float))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


# ---------------------------------------------------------------------------
# directional deviations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirectionalDeviations:
    """Forward and backward deviations per coordinate; ``inf`` marks a divergent side."""

    delta_plus: np.ndarray
    delta_minus: np.ndarray

    def __post_init__(self):
        for name in ("delta_plus", "delta_minus"):
            arr = np.array(getattr(self, name), dtype=float)
            if np.any(np.isnan(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name} entries must be positive (inf allowed)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.delta_plus.shape != self.delta_minus.shape:
            raise ValueError("forward and backward deviations need the same length")

    @property
    def d(self) -> int:
        return self.delta_plus.shape[0]

    @property
    def J_plus(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(np.isfinite(self.delta_plus)))

    @property
    def I_plus(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(~np.isfinite(self.delta_plus)))

    @property
    def J_minus(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(np.isfinite(self.delta_minus)))

    @property
    def I_minus(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(~np.isfinite(self.delta_minus)))


def _log_sinhc(x):
    """``log(sinh(x) / x)`` for ``x > 0`` without overflow."""
    x = np.abs(x)
    small = x < 1e-4
    big = np.where(small, 1.0, x)
    out = big + np.log1p(-np.exp(-2.0 * big)) - math.log(2.0) - np.log(big)
    return np.where(small, x * x / 6.0, out)


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _deviation_from_logmgf(logmgf, variance: float) -> float:
    """``sup_theta sqrt(2 logmgf(theta) / theta^2)`` over the grid plus local refinement.

    ``variance`` is the ``theta -> 0`` limit of the ratio and is always a candidate.
    """
    def ratio(theta):
        with np.errstate(over="ignore", invalid="ignore"):
            val = float(logmgf(theta))
        if not np.isfinite(val):
            return math.inf
        return 2.0 * val / theta ** 2

    vals = np.array([ratio(th) for th in THETA_GRID])
    if not np.all(np.isfinite(vals)):
        return math.inf
    best = max(float(vals.max()), variance)
    k = int(np.argmax(vals))
    lo = math.log(THETA_GRID[max(k - 1, 0)])
    hi = math.log(THETA_GRID[min(k + 1, len(THETA_GRID) - 1)])
    if hi > lo:
        res = minimize_scalar(lambda s: -ratio(math.exp(s)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        best = max(best, -float(res.fun))
    dev = math.sqrt(max(best, 0.0))
    if not np.isfinite(dev) or dev > DEVIATION_CAP:
        return math.inf
    return dev


def directional_deviations(source, minus_source=None) -> DirectionalDeviations:
    """Forward/backward deviations of a zero-mean vector, one coordinate at a time.

    Parameters
    ----------
    source : GeneratorSpec, array_like or sequence of callables
        A generator (closed-form moment generating functions), an ``(N, d)``
        sample matrix (centred, sample-average mgf), or per-coordinate callables
        ``theta -> log E[exp(theta xi_j)]`` for the centred variable.
    minus_source : sequence of callables, optional
        Log-mgfs of ``-xi_j`` when ``source`` is a list of callables; defaults
        to ``theta -> source[j](-theta)``.
    """
    if isinstance(source, GeneratorSpec):
        plus, minus, var = _generator_logmgfs(source)
    elif callable(source) or (isinstance(source, (list, tuple)) and source and callable(source[0])):
        fns = [source] if callable(source) else list(source)
        plus = fns
        minus = list(minus_source) if minus_source is not None else [(lambda th, f=f: f(-th)) for f in fns]
        var = [_numeric_variance(f) for f in fns]
    else:
        data = np.atleast_2d(np.asarray(source, dtype=float))
        centred = data - data.mean(axis=0)
        N = centred.shape[0]
        plus = [(lambda th, c=centred[:, j]: logsumexp(th * c) - math.log(N)) for j in range(centred.shape[1])]
        minus = [(lambda th, c=centred[:, j]: logsumexp(-th * c) - math.log(N)) for j in range(centred.shape[1])]
        var = list(centred.var(axis=0))
    dp = [_deviation_from_logmgf(f, v) for f, v in zip(plus, var)]
    dm = [_deviation_from_logmgf(f, v) for f, v in zip(minus, var)]
    return DirectionalDeviations(np.array(dp), np.array(dm))


def _numeric_variance(logmgf, h: float = 1e-4) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        val = (float(logmgf(h)) + float(logmgf(-h))) / h ** 2
    return val if np.isfinite(val) else 0.0


def _generator_logmgfs(gen: GeneratorSpec):
    p = gen.params
    if gen.kind == "gaussian":
        sig2 = np.diag(np.asarray(p["Sigma"], dtype=float))
        plus = [(lambda th, s=s: 0.5 * th * th * s) for s in sig2]
        return plus, plus, list(sig2)
    if gen.kind == "uniform_box":
        half = 0.5 * (np.asarray(p["hi"], dtype=float) - np.asarray(p["lo"], dtype=float))
        plus = [(lambda th, a=a: _log_sinhc(th * a)) for a in half]
        return plus, plus, list(half ** 2 / 3.0)
    if gen.kind == "scaled_bernoulli":
        scale = np.asarray(p["scale"], dtype=float)
        plus = [(lambda th, s=s: _log_cosh(th * s)) for s in scale]
        return plus, plus, list(scale ** 2)
    if gen.kind == "finite_discrete":
        pts = np.asarray(p["points"], dtype=float)
        logp = np.log(np.asarray(p["probs"], dtype=float))
        centred = pts - (np.exp(logp) @ pts)
        plus = [(lambda th, c=centred[:, j]: logsumexp(th * c + logp)) for j in range(pts.shape[1])]
        minus = [(lambda th, c=centred[:, j]: logsumexp(-th * c + logp)) for j in range(pts.shape[1])]
        var = list(np.exp(logp) @ centred ** 2)
        return plus, minus, var
    raise ValueError(f"no moment generating function for generator kind {gen.kind!r}")


# ---------------------------------------------------------------------------
# uncertainty sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UncertaintySetSpec:
    """An uncertainty set together with the parameters its support function needs.

    ``radius`` is the ball radius (ball, ball_box, U3, U4, U5) or the budget
    ``Gamma``.  ``H, h`` describe the polytope ``W = {xi : H xi <= h}``.
    """

    kind: str
    radius: float = 1.0
    H: np.ndarray | None = None
    h: np.ndarray | None = None
    Sigma: np.ndarray | None = None
    delta_plus: np.ndarray | None = None
    delta_minus: np.ndarray | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise ValueError(f"unknown uncertainty set {self.kind!r}")
        if not (self.radius > 0 and np.isfinite(self.radius)):
            raise ValueError("radius / budget must be positive and finite")
        if self.kind in ("U1", "U2"):
            if self.H is None or self.h is None:
                raise ValueError("polytope sets need H and h")
            H = np.atleast_2d(np.asarray(self.H, dtype=float))
            h = np.asarray(self.h, dtype=float)
            if H.shape[0] != h.shape[0]:
                raise ValueError("H and h disagree on the number of facets")
            object.__setattr__(self, "H", H)
            object.__setattr__(self, "h", h)
        if self.kind == "U2" and not (self.eps is not None and 0 < self.eps < 1):
            raise ValueError("U2 needs eps in (0, 1)")
        if self.kind == "U3":
            S = np.atleast_2d(np.asarray(self.Sigma, dtype=float))
            if not np.allclose(S, S.T, atol=1e-9) or np.linalg.eigvalsh(S).min() < -1e-9:
                raise ValueError("Sigma must be symmetric positive semidefinite")
            object.__setattr__(self, "Sigma", S)
        if self.kind in ("U4", "U5"):
            DirectionalDeviations(self.delta_plus, self.delta_minus)
            object.__setattr__(self, "delta_plus", np.asarray(self.delta_plus, dtype=float))
            object.__setattr__(self, "delta_minus", np.asarray(self.delta_minus, dtype=float))

    @classmethod
    def box(cls):
        return cls("box")

    @classmethod
    def ball(cls, r: float):
        return cls("ball", r)

    @classmethod
    def ball_box(cls, r: float):
        return cls("ball_box", r)

    @classmethod
    def budget(cls, gamma: float):
        return cls("budget", gamma)

    @classmethod
    def U1(cls, H, h):
        return cls("U1", 1.0, H, h)

    @classmethod
    def U2(cls, H, h, eps: float):
        return cls("U2", 1.0, H, h, eps=eps)

    @classmethod
    def U3(cls, Sigma, eps: float):
        return cls("U3", u3_radius(eps), Sigma=Sigma, eps=eps)

    @classmethod
    def U4(cls, delta_plus, delta_minus, eps: float):
        return cls("U4", math.sqrt(-2.0 * math.log(eps)), delta_plus=delta_plus, delta_minus=delta_minus, eps=eps)

    @classmethod
    def U5(cls, delta_plus, delta_minus, eps: float):
        return cls("U5", u5_radius(eps), delta_plus=delta_plus, delta_minus=delta_minus, eps=eps)

    def support(self, y) -> float:
        """``max_{xi in U} xi^T y``; ``inf`` when the set is unbounded in direction ``y``."""
        y = np.asarray(y, dtype=float)
        r = self.radius
        if self.kind == "box":
            return float(np.abs(y).sum())
        if self.kind == "ball":
            return r * float(np.linalg.norm(y))
        if self.kind == "budget":
            return r * float(np.abs(y).max(initial=0.0))
        if self.kind == "ball_box":
            return _ball_box_support(y, r)
        if self.kind == "U1":
            return polytope_support(self.H, self.h, y)
        if self.kind == "U2":
            return (1.0 / self.eps - 1.0) * polytope_support(self.H, self.h, -y)
        if self.kind == "U3":
            return r * float(np.linalg.norm(_sqrtm_psd(self.Sigma) @ y))
        if self.kind == "U4":
            u = _deviation_vector(y, self.delta_plus, self.delta_minus)
        else:
            u = _deviation_vector(-y, self.delta_plus, self.delta_minus)
        return r * float(np.linalg.norm(u)) if np.all(np.isfinite(u)) else math.inf


def _deviation_vector(y, dplus, dminus) -> np.ndarray:
    """``u_j = max(y_j dplus_j, -y_j dminus_j)`` with ``0 * inf = 0``."""
    with np.errstate(invalid="ignore"):
        fwd = np.where(y == 0, 0.0, y * dplus)
        bwd = np.where(y == 0, 0.0, -y * dminus)
    return np.maximum(fwd, bwd)


def _ball_box_support(y, r) -> float:
    """Support of ``{|xi|_inf <= 1, |xi|_2 <= r}``.

    The maximizer clips the ``k`` largest ``|y_j|`` at 1 and spends the
    remaining radius ``sqrt(r^2 - k)`` along the rest, so the value is
    ``sum_{j<=k} |y|_(j) + sqrt(r^2 - k) ||rest||``.  ``k`` is the smallest
    count for which the next coordinate is not clipped.
    """
    a = np.sort(np.abs(np.asarray(y, dtype=float)))[::-1]
    a = a[a > 0]
    if a.size == 0:
        return 0.0
    if math.sqrt(a.size) <= r:
        return float(a.sum())
    for k in range(a.size):
        if k >= r * r:
            break
        room = math.sqrt(r * r - k)
        rest = math.hypot(*a[k:])
        if a[k] * room <= rest:
            return float(a[:k].sum() + room * rest)
    return float(a[:int(math.ceil(r * r)) - 1].sum())


def polytope_support(H, h, y) -> float:
    """``max xi^T y`` over ``{H xi <= h}`` by the desk simplex (``inf`` if unbounded)."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    d = H.shape[1]
    bld = ProgramBuilder()
    for j in range(d):
        bld.add_var(f"xi{j + 1}", cost=-float(y[j]))
    for i in range(H.shape[0]):
        bld.add_row(dense_terms(H[i]), "<=", float(h[i]), f"w{i + 1}")
    res = solve_lp(bld.build(0, "support"))
    if res.status == "unbounded":
        return math.inf
    if not res.optimal:
        raise ValueError("polytope W is empty")
    return -res.objective


def box_polytope(d: int, half_width: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """H-representation of ``[-w, w]^d``."""
    H = np.vstack([np.eye(d), -np.eye(d)])
    return H, np.full(2 * d, float(half_width))


# ---------------------------------------------------------------------------
# encodings into a builder
# ---------------------------------------------------------------------------

def _row_parts(bld: ProgramBuilder, row: CCRow, tag: str):
    """Add ``y = A x + b`` as explicit variables; return (x0 terms, x0 const, y indices)."""
    y = []
    for k in range(row.d):
        yk = bld.add_var(f"y{tag}_{k + 1}")
        terms = dense_terms(row.A[k])
        terms[yk] = terms.get(yk, 0.0) - 1.0
        bld.add_row(terms, "=", -float(row.b[k]), f"ydef{tag}_{k + 1}")
        y.append(yk)
    return dense_terms(row.a0), float(row.b0), y


def _merge(*parts) -> dict[int, float]:
    out: dict[int, float] = {}
    for scale, terms in parts:
        for j, v in terms.items():
            out[j] = out.get(j, 0.0) + scale * v
    return out


def _abs_bounds(bld, y, name, tag):
    """Auxiliaries ``w_k >= |y_k|``."""
    w = bld.add_vars(f"{name}{tag}_", len(y), 0.0)
    for k, (yk, wk) in enumerate(zip(y, w)):
        bld.add_row({yk: 1.0, wk: -1.0}, "<=", 0.0, f"{name}p{tag}_{k + 1}")
        bld.add_row({yk: -1.0, wk: -1.0}, "<=", 0.0, f"{name}m{tag}_{k + 1}")
    return w


def _deviation_aux(bld, y, dplus, dminus, name, tag, sign=1.0):
    """``u_k >= max(dplus_k z_k, -dminus_k z_k)`` with ``z = sign * y``.

    An infinite side pins the sign of ``z_k`` instead.
    """
    u = bld.add_vars(f"{name}{tag}_", len(y), 0.0)
    for k, (yk, uk) in enumerate(zip(y, u)):
        if np.isfinite(dplus[k]):
            bld.add_row({yk: sign * float(dplus[k]), uk: -1.0}, "<=", 0.0, f"{name}p{tag}_{k + 1}")
        else:
            bld.add_row({yk: sign}, "<=", 0.0, f"{name}signp{tag}_{k + 1}")
        if np.isfinite(dminus[k]):
            bld.add_row({yk: -sign * float(dminus[k]), uk: -1.0}, "<=", 0.0, f"{name}m{tag}_{k + 1}")
        else:
            bld.add_row({yk: -sign}, "<=", 0.0, f"{name}signm{tag}_{k + 1}")
    return u


def _dual_multipliers(bld, H, y, sign, tag):
    """``lam >= 0`` with ``H^T lam = sign * y``: support of W in direction ``sign * y`` is ``min h^T lam``."""
    lam = bld.add_vars(f"lam{tag}_", H.shape[0], 0.0)
    for k, yk in enumerate(y):
        terms = {lam[i]: float(H[i, k]) for i in range(H.shape[0]) if H[i, k] != 0.0}
        terms[yk] = -float(sign)
        bld.add_row(terms, "=", 0.0, f"dual{tag}_{k + 1}")
    return lam


def add_robust_rows(bld: ProgramBuilder, row: CCRow, uset: UncertaintySetSpec, tag: str = "") -> None:
    """Encode ``x0 + max_{xi in U} xi^T y <= 0`` for one row."""
    if uset.kind in ("U4", "U5") and uset.delta_plus.shape[0] != row.d:
        raise ValueError("deviation vectors do not match the uncertainty dimension")
    x0, b0, y = _row_parts(bld, row, tag)
    r = uset.radius
    neg_x0 = _merge((-1.0, x0))
    kind = uset.kind
    if kind == "box":
        w = _abs_bounds(bld, y, "w", tag)
        bld.add_row(_merge((1.0, x0), (1.0, {k: 1.0 for k in w})), "<=", -b0, f"rc{tag}")
    elif kind == "budget":
        tau = bld.add_var(f"tau{tag}", 0.0)
        for k, yk in enumerate(y):
            bld.add_row({yk: 1.0, tau: -1.0}, "<=", 0.0, f"taup{tag}_{k + 1}")
            bld.add_row({yk: -1.0, tau: -1.0}, "<=", 0.0, f"taum{tag}_{k + 1}")
        bld.add_row(_merge((1.0, x0), (r, {tau: 1.0})), "<=", -b0, f"rc{tag}")
    elif kind == "ball":
        bld.add_soc([{yk: r} for yk in y], np.zeros(len(y)), neg_x0, -b0)
    elif kind == "ball_box":
        u = bld.add_vars(f"u{tag}_", len(y))
        w = _abs_bounds(bld, u, "w", tag)
        bld.add_soc([{yk: r, uk: -r} for yk, uk in zip(y, u)], np.zeros(len(y)),
                    _merge((1.0, neg_x0), (-1.0, {k: 1.0 for k in w})), -b0)
    elif kind in ("U1", "U2"):
        sign = 1.0 if kind == "U1" else -1.0
        scale = 1.0 if kind == "U1" else 1.0 / uset.eps - 1.0
        lam = _dual_multipliers(bld, uset.H, y, sign, tag)
        bld.add_row(_merge((1.0, x0), (scale, {lam[i]: float(uset.h[i]) for i in range(len(lam))})),
                    "<=", -b0, f"rc{tag}")
    elif kind == "U3":
        S = _sqrtm_psd(uset.Sigma)
        bld.add_soc([{yk: r * S[i, k] for k, yk in enumerate(y) if S[i, k] != 0.0} for i in range(len(y))],
                    np.zeros(len(y)), neg_x0, -b0)
    else:
        # U5 is the U4 construction applied to -y
        sign = 1.0 if kind == "U4" else -1.0
        u = _deviation_aux(bld, y, uset.delta_plus, uset.delta_minus, "u", tag, sign)
        bld.add_soc([{uk: r} for uk in u], np.zeros(len(u)), neg_x0, -b0)


def centre_program(prog: CCProgram, mean) -> CCProgram:
    """Rewrite the chance rows in ``zeta = xi - mean``.

    The uncertainty sets and deviation bounds describe zero-mean perturbations,
    so a model with ``E[xi] != 0`` is centred before it is robustified.
    """
    mu = np.asarray(mean, dtype=float)
    rows = [CCRow(r.a0 + r.A.T @ mu, r.b0 + float(r.b @ mu), r.A, r.b) for r in prog.cc_rows]
    return prog.with_rows(rows, prog.epsilon)


def robust_counterpart(prog: CCProgram, uset: UncertaintySetSpec) -> DeterministicProgram:
    """Every chance row enforced for all ``xi`` in ``uset``."""
    bld = decision_builder(prog)
    for i, row in enumerate(prog.cc_rows):
        add_robust_rows(bld, row, uset, tag=str(i + 1))
    return bld.build(prog.n, f"robust:{uset.kind}", {"set": uset.kind, "radius": uset.radius})


# ---------------------------------------------------------------------------
# CVaR upper bounds pi^1 .. pi^5
# ---------------------------------------------------------------------------

def _pi_context(which, W=None, Sigma=None, deviations=None):
    if which in (1, 2) and W is None:
        raise ValueError(f"pi{which} needs the support polytope W = (H, h)")
    if which == 3 and Sigma is None:
        raise ValueError("pi3 needs the covariance Sigma")
    if which in (4, 5) and deviations is None:
        raise ValueError(f"pi{which} needs directional deviations")
    if which not in (1, 2, 3, 4, 5):
        raise ValueError("which must be one of 1..5")


def _exp_bound(a: float, c: float) -> float:
    """``inf_{mu>0} (mu / e) exp(a / mu + c / mu^2)``.

    The stationary point solves ``mu^2 - a mu - 2c = 0``.  With ``c = 0`` the
    infimum is ``max(a, 0)``.
    """
    if c <= 0.0:
        return max(a, 0.0)
    mu = 0.5 * (a + math.sqrt(a * a + 8.0 * c))
    if mu <= 0.0:
        return 0.0
    expo = a / mu + c / mu ** 2 - 1.0
    return mu * math.exp(expo)


def pi_value(which: int, x0: float, y, *, W=None, Sigma=None, deviations=None) -> float:
    """Direct evaluation of the upper bound ``pi^which(x0, y)`` on ``E[(x0 + xi^T y)_+]``.

    Raises
    ------
    ValueError
        For pi4 / pi5 when the sign conditions on divergent coordinates fail
        (the bound is infinite there).
    """
    _pi_context(which, W, Sigma, deviations)
    y = np.asarray(y, dtype=float)
    if which == 1:
        return max(x0 + polytope_support(W[0], W[1], y), 0.0)
    if which == 2:
        return x0 + max(-x0 + polytope_support(W[0], W[1], -y), 0.0)
    if which == 3:
        q = float(y @ np.asarray(Sigma, dtype=float) @ y)
        return 0.5 * (x0 + math.sqrt(x0 * x0 + q))
    dp, dm = deviations.delta_plus, deviations.delta_minus
    if which == 4:
        u = _deviation_vector(y, dp, dm)
        if not np.all(np.isfinite(u)):
            raise ValueError("pi4 is infinite: need y_j <= 0 on I+ and y_j >= 0 on I-")
        return _exp_bound(x0, 0.5 * float(u @ u))
    v = _deviation_vector(-y, dp, dm)
    if not np.all(np.isfinite(v)):
        raise ValueError("pi5 is infinite: need y_j >= 0 on I+ and y_j <= 0 on I-")
    return x0 + _exp_bound(-x0, 0.5 * float(v @ v))


def pi_cvar_bound(which: int, x0: float, y, eps: float, **context) -> float:
    """``inf_t t + pi(x0 - t, y) / eps`` evaluated numerically.

    For the piecewise-linear pi1 / pi2 the infimum sits at a kink, which is
    evaluated directly; otherwise Brent's method on the convex function of t.
    """
    y = np.asarray(y, dtype=float)
    f = lambda t: t + pi_value(which, x0 - t, y, **context) / eps
    if which == 1:
        return f(x0 + polytope_support(context["W"][0], context["W"][1], y))
    if which == 2:
        return f(x0 - polytope_support(context["W"][0], context["W"][1], -y))
    scale = 1.0 + abs(x0) + float(np.abs(y).sum())
    res = minimize_scalar(f, bracket=(x0 - scale, x0 + scale), method="brent", options={"xtol": 1e-13})
    return float(res.fun)


def uncertainty_set_from_pi(which: int, eps: float, *, W=None, Sigma=None, deviations=None) -> UncertaintySetSpec:
    """Uncertainty set whose robust counterpart equals the pi-bound constraint."""
    _pi_context(which, W, Sigma, deviations)
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if which == 1:
        return UncertaintySetSpec.U1(*W)
    if which == 2:
        return UncertaintySetSpec.U2(W[0], W[1], eps)
    if which == 3:
        return UncertaintySetSpec.U3(Sigma, eps)
    if which == 4:
        return UncertaintySetSpec.U4(deviations.delta_plus, deviations.delta_minus, eps)
    return UncertaintySetSpec.U5(deviations.delta_plus, deviations.delta_minus, eps)


def add_pi_rows(bld: ProgramBuilder, row: CCRow, which: int, eps: float, tag: str = "", *,
                W=None, Sigma=None, deviations=None) -> None:
    """Encode ``t + pi(x0 - t, y) / eps <= 0`` with a fresh free variable ``t``.

    pi4 and pi5 go through their equivalent uncertainty sets, which avoids the
    nonconvex product form of the inner infimum over mu.
    """
    _pi_context(which, W, Sigma, deviations)
    if which in (4, 5):
        add_robust_rows(bld, row, uncertainty_set_from_pi(which, eps, deviations=deviations), tag)
        return
    x0, b0, y = _row_parts(bld, row, tag)
    t = bld.add_var(f"t{tag}")
    if which in (1, 2):
        H, h = np.atleast_2d(np.asarray(W[0], dtype=float)), np.asarray(W[1], dtype=float)
        sign = 1.0 if which == 1 else -1.0
        lam = _dual_multipliers(bld, H, y, sign, tag)
        p = bld.add_var(f"p{tag}", 0.0)
        hlam = {lam[i]: float(h[i]) for i in range(len(lam))}
        if which == 1:
            # p >= x0 - t + h^T lam ; t + p / eps <= 0
            bld.add_row(_merge((1.0, x0), (1.0, {t: -1.0, p: -1.0}), (1.0, hlam)), "<=", -b0, f"hinge{tag}")
            bld.add_row({t: 1.0, p: 1.0 / eps}, "<=", 0.0, f"pi{tag}")
        else:
            # p >= -(x0 - t) + h^T lam ; t + (x0 - t + p) / eps <= 0
            bld.add_row(_merge((-1.0, x0), (1.0, {t: 1.0, p: -1.0}), (1.0, hlam)), "<=", b0, f"hinge{tag}")
            bld.add_row(_merge((1.0 / eps, x0), (1.0, {t: 1.0 - 1.0 / eps, p: 1.0 / eps})), "<=", -b0 / eps,
                        f"pi{tag}")
        return
    # pi3: q >= ((x0 - t) + sqrt((x0 - t)^2 + y^T Sigma y)) / 2  <=>  ||(S y, x0 - t)|| <= 2q - (x0 - t)
    S = _sqrtm_psd(Sigma)
    q = bld.add_var(f"q{tag}")
    F_terms = [{yk: S[i, k] for k, yk in enumerate(y) if S[i, k] != 0.0} for i in range(len(y))]
    F_terms.append(_merge((1.0, x0), (1.0, {t: -1.0})))
    g = np.concatenate([np.zeros(len(y)), [b0]])
    bld.add_soc(F_terms, g, _merge((-1.0, x0), (1.0, {q: 2.0, t: 1.0})), -b0)
    bld.add_row({t: 1.0, q: 1.0 / eps}, "<=", 0.0, f"pi{tag}")


def pi_bound_program(prog: CCProgram, which: int, eps: float | None = None, *, W=None, Sigma=None,
                     deviations=None) -> DeterministicProgram:
    """Safe approximation of an individual chance row through the bound ``pi^which``.

    Joint constraints should be split first with
    :func:`chancekit.reformulate.bonferroni_split`.
    """
    if prog.m != 1:
        raise ValueError("pi bounds apply to individual rows; split joint constraints first")
    eps = prog.epsilon if eps is None else float(eps)
    bld = decision_builder(prog)
    add_pi_rows(bld, prog.cc_rows[0], which, eps, "1", W=W, Sigma=Sigma, deviations=deviations)
    return bld.build(prog.n, f"pi{which}", {"eps": eps})
