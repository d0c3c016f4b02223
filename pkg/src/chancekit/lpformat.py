"""CPLEX LP text emission and loading for :class:`DeterministicProgram`.

Numbers are written with ``repr`` so a write/read round trip is exact.  Cone
rows have no LP-format spelling; they go to a JSON sidecar ``<file>.soc.json``
that is written only when the program carries them.

Layout::

    \\ provenance: <tag>
    \\ n_decision: <int>
    \\ objective_constant: <float>
    Minimize
     obj: <terms>
    Subject To
     <name>: <terms> <sense> <rhs>
    Bounds
     <lo> <= <var> <= <hi> | <var> >= <lo> | -inf <= <var> <= <hi> | <var> free
    Binaries
     <names>
    End
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .program import BINARY, CONTINUOUS, DeterministicProgram, SOCRow

TERMS_PER_LINE = 6


def _num(v: float) -> str:
    return repr(float(v))


def _expr(coefs, names) -> list[str]:
    pieces = []
    for j in np.flatnonzero(coefs):
        v = float(coefs[j])
        if not pieces:
            pieces.append(f"{_num(v)} {names[j]}")
        elif v < 0:
            pieces.append(f"- {_num(-v)} {names[j]}")
        else:
            pieces.append(f"+ {_num(v)} {names[j]}")
    if not pieces:
        pieces.append(f"0.0 {names[0]}")
    lines = []
    for i in range(0, len(pieces), TERMS_PER_LINE):
        lines.append(" ".join(pieces[i:i + TERMS_PER_LINE]))
    return lines


def _block(head: str, lines: list[str]) -> list[str]:
    out = [f" {head} {lines[0]}"]
    out += [f"   {ln}" for ln in lines[1:]]
    return out


def to_lp_string(dp: DeterministicProgram) -> str:
    names = dp.names
    out = [f"\\ provenance: {dp.provenance}",
           f"\\ n_decision: {dp.n_decision}",
           f"\\ objective_constant: {_num(dp.c0)}"]
    if dp.soc_rows:
        out.append(f"\\ cone_rows: {len(dp.soc_rows)} (see sidecar)")
    out.append("Minimize")
    out += _block("obj:", _expr(dp.c, names))
    out.append("Subject To")
    for i in range(dp.num_rows):
        lines = _expr(dp.A[i], names)
        lines[-1] += f" {dp.senses[i]} {_num(dp.rhs[i])}"
        out += _block(f"{dp.row_names[i]}:", lines)
    out.append("Bounds")
    for j, name in enumerate(names):
        lo, hi = dp.lower[j], dp.upper[j]
        if np.isinf(lo) and np.isinf(hi):
            out.append(f" {name} free")
        elif np.isinf(hi):
            out.append(f" {name} >= {_num(lo)}")
        elif np.isinf(lo):
            out.append(f" -inf <= {name} <= {_num(hi)}")
        else:
            out.append(f" {_num(lo)} <= {name} <= {_num(hi)}")
    bins = [names[j] for j in dp.binary_indices()]
    if bins:
        out.append("Binaries")
        for i in range(0, len(bins), 10):
            out.append(" " + " ".join(bins[i:i + 10]))
    out.append("End")
    return "\n".join(out) + "\n"


def sidecar_dict(dp: DeterministicProgram) -> dict:
    return {
        "provenance": dp.provenance,
        "variables": list(dp.names),
        "soc_rows": [{"F": r.F.tolist(), "g": r.g.tolist(), "h": r.h.tolist(), "s": r.s} for r in dp.soc_rows],
        "form": "||F v + g||_2 <= h^T v + s",
    }


def write_lp(dp: DeterministicProgram, path) -> list[Path]:
    """Write ``path`` and, when cone rows exist, ``path + '.soc.json'``; return written paths."""
    path = Path(path)
    path.write_text(to_lp_string(dp))
    written = [path]
    side = Path(str(path) + ".soc.json")
    if dp.soc_rows:
        side.write_text(json.dumps(sidecar_dict(dp), indent=1, sort_keys=True) + "\n")
        written.append(side)
    elif side.exists():
        side.unlink()
    return written


def _parse_terms(tokens: list[str], index: dict[str, int], nv: int) -> np.ndarray:
    coefs = np.zeros(nv)
    sign = 1.0
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("+", "-"):
            sign = 1.0 if tok == "+" else -1.0
            i += 1
            continue
        coef = float(tok)
        name = tokens[i + 1]
        if name not in index:
            raise ValueError(f"unknown variable {name!r}")
        coefs[index[name]] += sign * coef
        sign = 1.0
        i += 2
    return coefs


def from_lp_string(text: str, sidecar: dict | None = None) -> DeterministicProgram:
    """Parse the dialect written by :func:`to_lp_string`."""
    meta = {"provenance": "manual", "n_decision": "0", "objective_constant": "0.0"}
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            key, _, val = line[1:].strip().partition(":")
            if key in meta:
                meta[key] = val.strip()
            continue
        low = line.lower()
        if low in ("minimize", "subject to", "bounds", "binaries", "end"):
            current = low
            sections[current] = []
            continue
        sections.setdefault(current, []).append(line)

    # variables come from the Bounds section, in order
    names, lower, upper = [], [], []
    for line in sections.get("bounds", []):
        tok = line.split()
        if len(tok) == 2 and tok[1] == "free":
            names.append(tok[0]); lower.append(-np.inf); upper.append(np.inf)
        elif len(tok) == 3 and tok[1] == ">=":
            names.append(tok[0]); lower.append(float(tok[2])); upper.append(np.inf)
        elif len(tok) == 5 and tok[1] == "<=" and tok[3] == "<=":
            names.append(tok[2]); lower.append(float(tok[0])); upper.append(float(tok[4]))
        else:
            raise ValueError(f"cannot parse bound line {line!r}")
    index = {n: j for j, n in enumerate(names)}
    nv = len(names)

    obj_tokens = " ".join(sections.get("minimize", [])).split()
    if not obj_tokens or obj_tokens[0] != "obj:":
        raise ValueError("objective must be labelled 'obj:'")
    c = _parse_terms(obj_tokens[1:], index, nv)

    rows, senses, rhs, row_names = [], [], [], []
    tokens = " ".join(sections.get("subject to", [])).split()
    starts = [i for i, t in enumerate(tokens) if t.endswith(":")]
    for a, b in zip(starts, starts[1:] + [len(tokens)]):
        body = tokens[a + 1:b]
        row_names.append(tokens[a][:-1])
        senses.append(body[-2])
        rhs.append(float(body[-1]))
        rows.append(_parse_terms(body[:-2], index, nv))

    kinds = [CONTINUOUS] * nv
    for line in sections.get("binaries", []):
        for name in line.split():
            kinds[index[name]] = BINARY
    soc = ()
    if sidecar is not None:
        if sidecar["variables"] != names:
            raise ValueError("sidecar variable order does not match the LP file")
        soc = tuple(SOCRow(np.array(r["F"]), np.array(r["g"]), np.array(r["h"]), r["s"])
                    for r in sidecar["soc_rows"])
    A = np.array(rows) if rows else np.zeros((0, nv))
    return DeterministicProgram(tuple(names), tuple(kinds), np.array(lower), np.array(upper), c, A,
                                tuple(senses), np.array(rhs), tuple(row_names), soc,
                                int(meta["n_decision"]), meta["provenance"], {}, float(meta["objective_constant"]))


def read_lp(path) -> DeterministicProgram:
    path = Path(path)
    side = Path(str(path) + ".soc.json")
    sidecar = json.loads(side.read_text()) if side.exists() else None
    return from_lp_string(path.read_text(), sidecar)
