"""Chance-constrained program data, inner-function evaluation and sampling.

A joint chance constraint is stored as ``m`` bi-affine rows

    f_i(x, xi) = (a0_i + A_i^T xi)^T x + b0_i + b_i^T xi,

so every row splits into a deterministic part ``a0_i^T x + b0_i`` and an
uncertain part ``xi^T (A_i x + b_i)``.  All reformulations rely on that split.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

SENSES = ("<=", "=", ">=")


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LinearRow:
    """Deterministic row ``coef^T x (sense) rhs``."""

    coef: np.ndarray
    sense: str
    rhs: float

    def __post_init__(self):
        object.__setattr__(self, "coef", _frozen(self.coef))
        if self.coef.ndim != 1:
            raise ValueError("row coefficients must be a vector")
        if self.sense not in SENSES:
            raise ValueError(f"unknown relation {self.sense!r}; expected one of {SENSES}")
        object.__setattr__(self, "rhs", float(self.rhs))


@dataclass(frozen=True)
class CCRow:
    """One inner row ``(a0 + A^T xi)^T x + b0 + b^T xi``; ``A`` is d-by-n."""

    a0: np.ndarray
    b0: float
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a0", _frozen(self.a0))
        object.__setattr__(self, "A", _frozen(np.atleast_2d(self.A)))
        object.__setattr__(self, "b", _frozen(self.b))
        object.__setattr__(self, "b0", float(self.b0))
        n, d = self.a0.shape[0], self.b.shape[0]
        if self.a0.ndim != 1 or self.b.ndim != 1:
            raise ValueError("a0 and b must be vectors")
        if self.A.shape != (d, n):
            raise ValueError(f"A has shape {self.A.shape}, expected ({d}, {n})")

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def d(self) -> int:
        return self.b.shape[0]

    @classmethod
    def separable(cls, a0, b0, b) -> "CCRow":
        a0 = np.asarray(a0, dtype=float)
        b = np.asarray(b, dtype=float)
        return cls(a0, b0, np.zeros((b.shape[0], a0.shape[0])), b)

    def deterministic_part(self, x) -> float:
        return float(self.a0 @ x + self.b0)

    def uncertain_coef(self, x) -> np.ndarray:
        """The vector ``y = A x + b`` multiplying ``xi``."""
        return self.A @ x + self.b

    def scenario_coef(self, xi) -> tuple[np.ndarray, float]:
        """Coefficients of the row once ``xi`` is fixed: ``(coef, const)``."""
        xi = np.asarray(xi, dtype=float)
        return self.a0 + self.A.T @ xi, self.b0 + float(self.b @ xi)


@dataclass(frozen=True)
class CCProgram:
    """``min c^T x`` s.t. deterministic rows, bounds and one joint chance constraint."""

    c: np.ndarray
    cc_rows: tuple[CCRow, ...]
    epsilon: float
    det_rows: tuple[LinearRow, ...] = ()
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = _frozen(self.c)
        object.__setattr__(self, "c", c)
        n = c.shape[0]
        lower = np.full(n, -np.inf) if self.lower is None else self.lower
        upper = np.full(n, np.inf) if self.upper is None else self.upper
        object.__setattr__(self, "lower", _frozen(lower))
        object.__setattr__(self, "upper", _frozen(upper))
        object.__setattr__(self, "cc_rows", tuple(self.cc_rows))
        object.__setattr__(self, "det_rows", tuple(self.det_rows))
        if n < 1:
            raise ValueError("need at least one decision variable")
        if not self.cc_rows:
            raise ValueError("need at least one chance-constrained row")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds must have one entry per decision variable")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        d = self.cc_rows[0].d
        if d < 1:
            raise ValueError("uncertainty dimension must be positive")
        for i, row in enumerate(self.cc_rows):
            if row.n != n or row.d != d:
                raise ValueError(f"chance row {i} has dims (n={row.n}, d={row.d}), expected ({n}, {d})")
        for i, row in enumerate(self.det_rows):
            if row.coef.shape != (n,):
                raise ValueError(f"deterministic row {i} has {row.coef.shape[0]} coefficients, expected {n}")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def d(self) -> int:
        return self.cc_rows[0].d

    @property
    def m(self) -> int:
        return len(self.cc_rows)

    @property
    def separable(self) -> bool:
        return all(not np.any(row.A) for row in self.cc_rows)

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def with_rows(self, rows: Sequence[CCRow], epsilon: float) -> "CCProgram":
        return CCProgram(self.c, tuple(rows), epsilon, self.det_rows, self.lower, self.upper)

    def inner_values(self, x, xis) -> np.ndarray:
        """Row values for a batch of scenarios: array of shape (N, m)."""
        x = np.asarray(x, dtype=float)
        xis = np.atleast_2d(np.asarray(xis, dtype=float))
        cols = [row.deterministic_part(x) + xis @ row.uncertain_coef(x) for row in self.cc_rows]
        return np.column_stack(cols)


def _check_dims(prog: CCProgram, x, xi) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if x.shape != (prog.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({prog.n},)")
    if xi.shape != (prog.d,):
        raise ValueError(f"xi has shape {xi.shape}, expected ({prog.d},)")
    return x, xi


def evaluate_inner(prog: CCProgram, x, xi) -> tuple[np.ndarray, float]:
    """Return every ``f_i(x, xi)`` and their pointwise maximum."""
    x, xi = _check_dims(prog, x, xi)
    values = np.array([row.deterministic_part(x) + float(xi @ row.uncertain_coef(x))
                       for row in prog.cc_rows])
    return values, float(values.max())


def violation_indicator(prog: CCProgram, x, xi) -> bool:
    # ties count as satisfied: the inner constraint is f <= 0
    return evaluate_inner(prog, x, xi)[1] > 0.0


# -- scenario generation ------------------------------------------------------

GENERATOR_KINDS = ("gaussian", "uniform_box", "scaled_bernoulli", "finite_discrete")


@dataclass(frozen=True)
class GeneratorSpec:
    """Distribution of ``xi``. Build with the classmethods rather than directly."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        p = {k: _frozen(v) for k, v in self.params.items()}
        object.__setattr__(self, "params", p)
        if self.kind == "gaussian":
            mu, sigma = p["mu"], np.atleast_2d(p["Sigma"])
            if sigma.shape != (mu.shape[0], mu.shape[0]):
                raise ValueError("Sigma must be d-by-d")
            if not np.allclose(sigma, sigma.T, atol=1e-12):
                raise ValueError("Sigma must be symmetric")
            if np.linalg.eigvalsh(sigma).min() < -1e-9:
                raise ValueError("Sigma must be positive semidefinite")
        elif self.kind == "uniform_box":
            if p["lo"].shape != p["hi"].shape or np.any(p["hi"] <= p["lo"]):
                raise ValueError("uniform_box needs hi > lo componentwise")
        elif self.kind == "scaled_bernoulli":
            if np.any(p["scale"] <= 0):
                raise ValueError("scaled_bernoulli scales must be positive")
        else:
            pts, probs = np.atleast_2d(p["points"]), p["probs"]
            if pts.shape[0] != probs.shape[0]:
                raise ValueError("one probability per support point")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ValueError("probabilities must be nonnegative and sum to 1")

    @classmethod
    def gaussian(cls, mu, Sigma) -> "GeneratorSpec":
        return cls("gaussian", {"mu": np.atleast_1d(mu), "Sigma": np.atleast_2d(Sigma)})

    @classmethod
    def uniform_box(cls, lo, hi) -> "GeneratorSpec":
        return cls("uniform_box", {"lo": np.atleast_1d(lo), "hi": np.atleast_1d(hi)})

    @classmethod
    def scaled_bernoulli(cls, scale) -> "GeneratorSpec":
        """Independent coordinates taking ``+scale_j`` or ``-scale_j`` with probability 1/2."""
        return cls("scaled_bernoulli", {"scale": np.atleast_1d(scale)})

    @classmethod
    def finite_discrete(cls, points, probs) -> "GeneratorSpec":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls("finite_discrete", {"points": pts, "probs": np.asarray(probs, dtype=float)})

    @property
    def d(self) -> int:
        p = self.params
        if self.kind == "gaussian":
            return p["mu"].shape[0]
        if self.kind == "uniform_box":
            return p["lo"].shape[0]
        if self.kind == "scaled_bernoulli":
            return p["scale"].shape[0]
        return np.atleast_2d(p["points"]).shape[1]

    def mean(self) -> np.ndarray:
        p = self.params
        if self.kind == "gaussian":
            return np.array(p["mu"])
        if self.kind == "uniform_box":
            return (p["lo"] + p["hi"]) / 2.0
        if self.kind == "scaled_bernoulli":
            return np.zeros(self.d)
        return p["probs"] @ np.atleast_2d(p["points"])

    def sample(self, rng: np.random.Generator, N: int) -> np.ndarray:
        p = self.params
        if self.kind == "gaussian":
            return rng.multivariate_normal(p["mu"], p["Sigma"], size=N, method="eigh")
        if self.kind == "uniform_box":
            return rng.uniform(p["lo"], p["hi"], size=(N, self.d))
        if self.kind == "scaled_bernoulli":
            signs = rng.integers(0, 2, size=(N, self.d)) * 2.0 - 1.0
            return signs * p["scale"]
        idx = rng.choice(p["probs"].shape[0], size=N, p=p["probs"])
        return np.atleast_2d(p["points"])[idx]

    def to_dict(self) -> dict:
        return {"kind": self.kind, **{k: v.tolist() for k, v in self.params.items()}}

    @classmethod
    def from_dict(cls, spec: dict) -> "GeneratorSpec":
        kind = spec.get("kind")
        try:
            if kind == "gaussian":
                return cls.gaussian(spec["mu"], spec["Sigma"])
            if kind == "uniform_box":
                return cls.uniform_box(spec["lo"], spec["hi"])
            if kind == "scaled_bernoulli":
                return cls.scaled_bernoulli(spec["scale"])
            if kind == "finite_discrete":
                return cls.finite_discrete(spec["points"], spec["probs"])
        except KeyError as exc:
            raise ValueError(f"generator {kind!r} is missing field {exc.args[0]!r}") from None
        raise ValueError(f"unknown generator kind {kind!r}")


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 stream keyed by ``(seed, *stream)``; distinct keys give independent streams."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(stream))))


@dataclass(frozen=True)
class ScenarioSet:
    data: np.ndarray
    origin: dict = field(default_factory=lambda: {"source": "external file"})

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1:
            raise ValueError("a scenario set needs at least one scenario")
        if not np.all(np.isfinite(data)):
            raise ValueError("scenarios must be finite")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def subset(self, indices) -> "ScenarioSet":
        indices = [int(i) for i in indices]
        return ScenarioSet(self.data[indices], {**self.origin, "subset_of": self.N, "indices": indices})

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"xi_{j + 1}" for j in range(self.d)])
            for row in self.data:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "ScenarioSet":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path}: empty scenario file")
        header = [h.strip() for h in rows[0]]
        expected = [f"xi_{j + 1}" for j in range(len(header))]
        if header != expected:
            raise ValueError(f"{path}: header must be {','.join(expected)}")
        data = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} values, got {len(row)}")
            try:
                data.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
        return cls(np.array(data).reshape(-1, len(header)), {"source": "external file", "path": str(Path(path))})


def draw_scenarios(gen: GeneratorSpec, N: int, seed: int) -> ScenarioSet:
    if N < 1:
        raise ValueError("N must be at least 1")
    data = gen.sample(make_rng(seed), N)
    return ScenarioSet(data, {"source": "generator", "generator": gen.to_dict(), "seed": int(seed)})


@dataclass(frozen=True)
class GaussianCC:
    """Individual constraint ``P(a^T x + b^T xi + xi^T D x <= e) >= 1 - eps`` with Gaussian ``xi``."""

    a: np.ndarray
    b: np.ndarray
    D: np.ndarray
    e: float
    mu: np.ndarray
    Sigma: np.ndarray
    epsilon: float

    def __post_init__(self):
        for name in ("a", "b", "mu"):
            object.__setattr__(self, name, _frozen(np.atleast_1d(getattr(self, name))))
        object.__setattr__(self, "D", _frozen(np.atleast_2d(self.D)))
        object.__setattr__(self, "Sigma", _frozen(np.atleast_2d(self.Sigma)))
        object.__setattr__(self, "e", float(self.e))
        n, d = self.a.shape[0], self.b.shape[0]
        if self.D.shape != (d, n) or self.mu.shape != (d,) or self.Sigma.shape != (d, d):
            raise ValueError("inconsistent dimensions in Gaussian chance constraint")
        if not np.allclose(self.Sigma, self.Sigma.T, atol=1e-9):
            raise ValueError("Sigma must be symmetric")
        if np.linalg.eigvalsh(self.Sigma).min() < -1e-9:
            raise ValueError("Sigma must be positive semidefinite")
        if not 0.0 < self.epsilon <= 0.5:
            raise ValueError("the second-order cone form needs 0 < epsilon <= 1/2")

    @classmethod
    def from_program(cls, prog: CCProgram, gen: GeneratorSpec) -> "GaussianCC":
        if gen.kind != "gaussian":
            raise ValueError("the Gaussian reformulation needs a gaussian uncertainty model")
        if prog.m != 1:
            raise ValueError("the Gaussian reformulation handles a single chance-constrained row")
        row = prog.cc_rows[0]
        return cls(row.a0, row.b, row.A, -row.b0, gen.params["mu"], gen.params["Sigma"], prog.epsilon)


def coordinatewise_program(n: int, epsilon: float, upper: float = 2.0) -> CCProgram:
    """``min sum(x)`` s.t. ``P(x >= xi) >= 1 - eps`` with ``0 <= x <= upper``.

    Row j is ``xi_j - x_j <= 0``.  With independent uniform(0, 1) coordinates
    the violation probability is ``1 - prod(min(x_j, 1))`` and the optimum is
    ``n (1 - eps)^(1/n)``.
    """
    rows = []
    for j in range(n):
        a0 = np.zeros(n)
        a0[j] = -1.0
        b = np.zeros(n)
        b[j] = 1.0
        rows.append(CCRow.separable(a0, 0.0, b))
    return CCProgram(np.ones(n), tuple(rows), epsilon, (), np.zeros(n), np.full(n, float(upper)))


def floor_count(eps_level: float, N: int) -> int:
    """``floor(eps_level * N)`` with a guard against products like 0.29 * 100 = 28.999..."""
    return int(math.floor(eps_level * N + 1e-9))
