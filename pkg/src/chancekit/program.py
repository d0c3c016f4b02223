"""Solver-ready deterministic programs produced by every reformulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

# reformulations whose output may legitimately carry cone rows
SOC_PROVENANCE = ("gaussian_socp", "robust:ball", "robust:ball_box", "robust:U3", "robust:U4",
                  "robust:U5", "pi3", "pi4", "pi5")


def _ro(arr, shape=None) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    if shape is not None:
        out = out.reshape(shape)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SOCRow:
    """``||F v + g||_2 <= h^T v + s`` over the full variable vector ``v``."""

    F: np.ndarray
    g: np.ndarray
    h: np.ndarray
    s: float

    def __post_init__(self):
        object.__setattr__(self, "F", _ro(np.atleast_2d(self.F)))
        object.__setattr__(self, "g", _ro(self.g))
        object.__setattr__(self, "h", _ro(self.h))
        object.__setattr__(self, "s", float(self.s))
        if self.F.shape != (self.g.shape[0], self.h.shape[0]):
            raise ValueError("SOC row blocks have inconsistent shapes")

    def violation(self, v) -> float:
        return float(np.linalg.norm(self.F @ v + self.g) - (self.h @ v + self.s))


@dataclass(frozen=True)
class DeterministicProgram:
    """``min c^T v + c0`` over linear rows, cone rows and variable bounds.

    The first ``n_decision`` variables are the original decision vector ``x``;
    the rest are auxiliaries introduced by the reformulation.
    """

    names: tuple[str, ...]
    kinds: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    row_names: tuple[str, ...]
    soc_rows: tuple[SOCRow, ...] = ()
    n_decision: int = 0
    provenance: str = "manual"
    meta: dict = field(default_factory=dict)
    c0: float = 0.0

    def __post_init__(self):
        nv = len(self.names)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "senses", tuple(self.senses))
        object.__setattr__(self, "row_names", tuple(self.row_names))
        object.__setattr__(self, "soc_rows", tuple(self.soc_rows))
        object.__setattr__(self, "lower", _ro(self.lower, (nv,)))
        object.__setattr__(self, "upper", _ro(self.upper, (nv,)))
        object.__setattr__(self, "c", _ro(self.c, (nv,)))
        nr = len(self.senses)
        object.__setattr__(self, "A", _ro(self.A, (nr, nv)))
        object.__setattr__(self, "rhs", _ro(self.rhs, (nr,)))
        object.__setattr__(self, "c0", float(self.c0))
        if len(set(self.names)) != nv:
            raise ValueError("variable names must be unique")
        if len(self.kinds) != nv or len(self.row_names) != nr:
            raise ValueError("one kind per variable and one name per row")
        if any(k not in (CONTINUOUS, BINARY) for k in self.kinds):
            raise ValueError("variable kinds are 'continuous' or 'binary'")
        if any(s not in ("<=", "=", ">=") for s in self.senses):
            raise ValueError("row senses are '<=', '=' or '>='")
        if BINARY in self.kinds and not self.provenance.startswith("saa"):
            raise ValueError("binary variables only arise from SAA reformulations")
        if self.soc_rows and not self.provenance.startswith(SOC_PROVENANCE):
            raise ValueError(f"cone rows are not expected from provenance {self.provenance!r}")
        for row in self.soc_rows:
            if row.h.shape[0] != nv:
                raise ValueError("cone row width does not match the variable count")
        if not 0 <= self.n_decision <= nv:
            raise ValueError("n_decision out of range")

    @property
    def num_vars(self) -> int:
        return len(self.names)

    @property
    def num_rows(self) -> int:
        return len(self.senses)

    @property
    def has_binaries(self) -> bool:
        return BINARY in self.kinds

    def binary_indices(self) -> np.ndarray:
        return np.array([i for i, k in enumerate(self.kinds) if k == BINARY], dtype=int)

    def objective(self, v) -> float:
        return float(self.c @ v + self.c0)

    def max_violation(self, v) -> float:
        """Largest violation of bounds, linear rows and cone rows at ``v``."""
        v = np.asarray(v, dtype=float)
        worst = max(0.0, float(np.max(self.lower - v, initial=0.0)), float(np.max(v - self.upper, initial=0.0)))
        if self.num_rows:
            act = self.A @ v
            for a, sense, r in zip(act, self.senses, self.rhs):
                if sense == "<=":
                    worst = max(worst, a - r)
                elif sense == ">=":
                    worst = max(worst, r - a)
                else:
                    worst = max(worst, abs(a - r))
        for row in self.soc_rows:
            worst = max(worst, row.violation(v))
        return worst

    def replace(self, **changes) -> "DeterministicProgram":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return DeterministicProgram(**fields)


class ProgramBuilder:
    """Accumulates variables and rows, then freezes into a DeterministicProgram."""

    def __init__(self):
        self.names: list[str] = []
        self.kinds: list[str] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.cost: list[float] = []
        self.rows: list[tuple[dict[int, float], str, float, str]] = []
        self.socs: list[tuple[dict, np.ndarray, dict[int, float], float]] = []
        self.c0 = 0.0

    def add_var(self, name: str, lower=-np.inf, upper=np.inf, cost=0.0, kind=CONTINUOUS) -> int:
        self.names.append(name)
        self.kinds.append(kind)
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.cost.append(float(cost))
        return len(self.names) - 1

    def add_vars(self, prefix: str, count: int, lower=-np.inf, upper=np.inf, kind=CONTINUOUS) -> list[int]:
        return [self.add_var(f"{prefix}{j + 1}", lower, upper, 0.0, kind) for j in range(count)]

    def add_row(self, terms: dict[int, float], sense: str, rhs: float, name: str) -> None:
        self.rows.append((dict(terms), sense, float(rhs), name))

    def add_soc(self, F_terms: list[dict[int, float]], g, h_terms: dict[int, float], s: float) -> None:
        """Cone row ``||F v + g|| <= h^T v + s``; ``F_terms[k]`` holds the sparse k-th row of F."""
        self.socs.append((list(F_terms), np.asarray(g, dtype=float), dict(h_terms), float(s)))

    def build(self, n_decision: int, provenance: str, meta: dict | None = None) -> DeterministicProgram:
        nv = len(self.names)
        A = np.zeros((len(self.rows), nv))
        for r, (terms, _, _, _) in enumerate(self.rows):
            for j, val in terms.items():
                A[r, j] += val
        socs = []
        for F_terms, g, h_terms, s in self.socs:
            F = np.zeros((len(F_terms), nv))
            for k, terms in enumerate(F_terms):
                for j, val in terms.items():
                    F[k, j] += val
            h = np.zeros(nv)
            for j, val in h_terms.items():
                h[j] += val
            socs.append(SOCRow(F, g, h, s))
        return DeterministicProgram(
            names=tuple(self.names), kinds=tuple(self.kinds),
            lower=np.array(self.lower), upper=np.array(self.upper), c=np.array(self.cost),
            A=A, senses=tuple(r[1] for r in self.rows), rhs=np.array([r[2] for r in self.rows]),
            row_names=tuple(r[3] for r in self.rows), soc_rows=tuple(socs),
            n_decision=n_decision, provenance=provenance, meta=dict(meta or {}), c0=self.c0)


def dense_terms(coef, offset: int = 0) -> dict[int, float]:
    return {offset + j: float(v) for j, v in enumerate(coef) if v != 0.0}
