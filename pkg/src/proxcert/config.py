"""Experiment configuration: JSON document -> problems, start points, steps.

A config is a single JSON object with an ``experiments`` array.  Each entry::

    {
      "id": "quad-l1",
      "problem": {
        "smooth": {"kind": "quadratic", "spectrum": [1, 10], "linear": [1, -2]},
        "nonsmooth": {"kind": "l1", "weight": 1.0},
        "known_min": "auto",
        "pl_constant": "empirical"
      },
      "x0": {"kind": "random", "seed": 3, "norm": 10},
      "t": "1/L",
      "max_iters": 200,
      "tol": 1e-10,
      "checks": "all"
    }
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .certify import CHECK_NAMES, SplitMix64, separable_quadratic_minimum
from .errors import ProxCertError
from .functions import QuadraticSpec, make_least_squares, make_logistic, make_quadratic
from .pg import CompositeProblem
from .prox import BoxIndicator, ElasticNet, L1Norm, ZeroFunction

__all__ = ["ConfigError", "Experiment", "load_config", "parse_config", "parse_step",
           "build_problem"]


class ConfigError(ProxCertError, ValueError):
    """Malformed experiment configuration.  ``line`` anchors the message."""

    def __init__(self, message, line=None, source="<config>"):
        self.line = line
        self.source = source
        self.bare = message
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class Experiment:
    id: str
    problem: CompositeProblem
    x0: np.ndarray
    t: float
    max_iters: int
    tol: float
    checks: Sequence[str]
    empirical_eta: bool = False
    witness: bool = False


_NUM = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"
_OVER_L = re.compile(rf"^({_NUM})?\s*/\s*L$")
_OVER_LMU = re.compile(rf"^({_NUM})?\s*/\s*\(\s*(?:L\s*\+\s*mu|mu\s*\+\s*L)\s*\)$")


def parse_step(expr, mu: float, L: float) -> float:
    """Resolve a step: a number, ``"c/L"``, ``"c/(L+mu)"`` or a fraction ``"2/11"``."""
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        t = float(expr)
    elif isinstance(expr, str):
        s = expr.strip()
        m = _OVER_L.match(s)
        m2 = _OVER_LMU.match(s)
        if m:
            t = float(m.group(1) or 1.0) / L
        elif m2:
            t = float(m2.group(1) or 1.0) / (L + mu)
        else:
            try:
                t = float(Fraction(s))
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"cannot parse step {expr!r}") from None
    else:
        raise ValueError(f"cannot parse step {expr!r}")
    if not t > 0:
        raise ValueError(f"step must be positive, got {expr!r}")
    return t


def _vec(d, key, default=None):
    if key not in d:
        if default is None:
            raise ValueError(f"missing field {key!r}")
        return default
    return np.asarray(d[key], dtype=float)


def _smooth(spec):
    kind = spec.get("kind")
    if kind == "quadratic":
        c = _vec(spec, "spectrum")
        return make_quadratic(QuadraticSpec(c, _vec(spec, "linear", np.zeros_like(c)),
                                            float(spec.get("offset", 0.0))))
    if kind == "least_squares":
        return make_least_squares(_vec(spec, "A"), _vec(spec, "b"))
    if kind == "logistic":
        return make_logistic(_vec(spec, "A"), _vec(spec, "labels"),
                             float(spec.get("l2_reg", 0.0)))
    raise ValueError(f"unknown smooth kind {kind!r}")


def _nonsmooth(spec):
    kind = spec.get("kind", "zero")
    if kind == "zero":
        return ZeroFunction()
    if kind == "l1":
        return L1Norm(spec.get("weight", 1.0))
    if kind == "box":
        return BoxIndicator(spec.get("lo", -1.0), spec.get("hi", 1.0))
    if kind == "elastic_net":
        return ElasticNet(float(spec.get("tau1", 1.0)), float(spec.get("tau2", 1.0)))
    raise ValueError(f"unknown nonsmooth kind {kind!r}")


def _auto_min(f, g):
    if f.kind == "quadratic":
        v = separable_quadratic_minimum(f, g)
        if v is not None:
            return v
    if f.kind == "least_squares" and isinstance(g, ZeroFunction):
        a, b = f.params["A"], f.params["b"]
        x, *_ = np.linalg.lstsq(a, b, rcond=None)
        r = a @ x - b
        return float(0.5 * np.dot(r, r))
    raise ValueError("known_min 'auto' needs a diagonal quadratic with separable g "
                     "or least squares with g = 0")


def build_problem(spec: dict, name: str = "problem"):
    """Return ``(problem, empirical_eta)`` for a ``problem`` config block."""
    f = _smooth(spec.get("smooth") or {})
    g = _nonsmooth(spec.get("nonsmooth") or {})
    if g.kind == "box" and np.ndim(g.lo) and np.size(g.lo) != f.dim:
        raise ValueError("box bounds do not match the problem dimension")
    known_min = spec.get("known_min")
    if known_min == "auto":
        known_min = _auto_min(f, g)
    elif known_min is not None:
        known_min = float(known_min)
    pl = spec.get("pl_constant")
    empirical = pl == "empirical"
    if pl == "auto":
        if f.eta_pl is None:
            raise ValueError("pl_constant 'auto' is only available for least squares")
        pl = f.eta_pl
    elif pl is None or empirical:
        pl = None
    else:
        pl = float(pl)
    return CompositeProblem(f, g, known_min=known_min, pl_constant=pl, name=name), empirical


def _x0(spec, dim, seed_override):
    if isinstance(spec, list):
        x = np.asarray(spec, dtype=float)
        if x.size != dim:
            raise ValueError(f"x0 has {x.size} entries, problem has dimension {dim}")
        return x
    if isinstance(spec, dict) and spec.get("kind") == "random":
        seed = int(spec.get("seed", 0)) if seed_override is None else seed_override
        d = SplitMix64(seed).normals(dim)
        return float(spec.get("norm", 10.0)) * d / np.linalg.norm(d)
    raise ValueError("x0 must be a list or {\"kind\": \"random\", \"seed\": ...}")


def _checks(spec):
    if spec is None or spec == "all":
        return CHECK_NAMES
    unknown = [c for c in spec if c not in CHECK_NAMES]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; expected names from {list(CHECK_NAMES)}")
    return tuple(spec)


def _line_of(text, entry_id):
    if text is None or entry_id is None:
        return None
    m = re.search(r'"id"\s*:\s*' + re.escape(json.dumps(entry_id)), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_config(doc, text: Optional[str] = None, source="<config>",
                 seed_override: Optional[int] = None):
    """Turn a parsed config document into a list of ``Experiment``."""
    if not isinstance(doc, dict) or not isinstance(doc.get("experiments"), list):
        raise ConfigError("config must be an object with an 'experiments' array",
                          line=1, source=source)
    out, seen = [], set()
    for i, entry in enumerate(doc["experiments"]):
        eid = entry.get("id") if isinstance(entry, dict) else None
        line = _line_of(text, eid)
        try:
            if not isinstance(eid, str) or not eid:
                raise ValueError(f"experiment #{i} needs a non-empty string 'id'")
            if eid in seen:
                raise ValueError(f"duplicate experiment id {eid!r}")
            seen.add(eid)
            problem, empirical = build_problem(entry.get("problem") or {}, name=eid)
            f = problem.smooth
            exp = Experiment(
                id=eid, problem=problem,
                x0=_x0(entry.get("x0", {"kind": "random", "seed": 0}), f.dim, seed_override),
                t=parse_step(entry.get("t", "1/L"), f.mu, f.lip),
                max_iters=int(entry.get("max_iters", 1000)),
                tol=float(entry.get("tol", 1e-10)),
                checks=_checks(entry.get("checks")),
                empirical_eta=empirical,
                witness=bool(entry.get("witness", False)))
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError, ProxCertError) as exc:
            label = f"experiment {eid!r}" if isinstance(eid, str) else f"experiment #{i}"
            raise ConfigError(f"{label}: {exc}", line=line, source=source) from exc
        out.append(exp)
    return out


def load_config(path, seed_override: Optional[int] = None):
    """Read and parse a config file; errors carry ``file:line`` anchors."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON (column {exc.colno}): {exc.msg}",
                          line=exc.lineno, source=str(path)) from exc
    return parse_config(doc, text=text, source=str(path), seed_override=seed_override)
