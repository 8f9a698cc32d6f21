"""Seeded verification suites over an s-grid, shared by the CLI and the tests.

Each suite returns :class:`SuiteResult` records holding the largest residual
norm over all trials and frame vectors.  On the exact backend a record passes
only when every residual is the zero spinor.
"""

from __future__ import annotations

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import operators as op
from . import special as sp
from .backend import get_backend
from .catalog import CatalogEntry
from .exact import ExactArray, as_fraction
from .forms import random_form, random_vector
from .geometry import curvature, frame_d, is_parallel_torsion
from .jets import random_jet
from .torsion import CONTRACTION_IDENTITIES, check_contraction_identities, sigma_T

__all__ = [
    "BASE_GRID",
    "SuiteResult",
    "IDENTITIES",
    "standard_s_grid",
    "parse_s_values",
    "run_suite",
    "thread_count",
]

BASE_GRID = tuple(Fraction(x) for x in ("-1/2", "-1/4", "0", "1/12", "1/4", "1/2", "3/4", "1"))

ANCHORS = {
    "half_ricci": "half-Ricci identity for the connection family with parallel torsion",
    "curvature_form": "half-Ricci identity through the spinorial curvature operator",
    "sl": "Schroedinger-Lichnerowicz formula with torsion",
    "product_rules": "product rules for the Dirac operator with torsion",
    "slashed_forms": "equivalent expressions of the torsion-twisted operator",
    "twistorial": "twistorial half-Ricci identity and its trace",
    "ricci_laws": "Ricci and scalar curvature relations across the family",
    "contraction": "Clifford contraction identities for 3-forms",
    "special": "Ricci actions and eigenvalues on parallel spinors",
}
DIFFERENTIAL = ("half_ricci", "curvature_form", "sl", "product_rules", "slashed_forms", "twistorial")
IDENTITIES = tuple(ANCHORS) + ("all",)


@dataclass(frozen=True)
class SuiteResult:
    identity: str
    anchor: str
    s: str
    trials: int
    max_residual: float
    tolerance: float
    passed: bool
    witness: object = None
    note: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def thread_count() -> int:
    try:
        cap = int(os.environ.get("SPINLAB_THREADS", "0"))
    except ValueError:
        cap = 0
    return cap if cap > 0 else min(4, os.cpu_count() or 1)


def standard_s_grid(seed: int = 0, extra: int = 8) -> list:
    """Base grid plus ``extra`` seeded random rationals p/q with q <= 12, |s| <= 2."""
    rng = np.random.default_rng([seed, 104729])
    out = list(BASE_GRID)
    while len(out) < len(BASE_GRID) + extra:
        q = int(rng.integers(2, 13))
        s = Fraction(int(rng.integers(-2 * q, 2 * q + 1)), q)
        if s not in out:
            out.append(s)
    return out


_RANGE = re.compile(r"^\s*([^:]+):([^:]+):([^:]+)\s*$")


def parse_s_values(text: str, seed: int = 0) -> list:
    """Exact rationals from "0,0.25,1/12", "a:b:step" (inclusive) or "grid"."""
    text = text.strip()
    if text == "grid":
        return standard_s_grid(seed)
    m = _RANGE.match(text)
    try:
        if m:
            a, b, step = (Fraction(x.strip()) for x in m.groups())
            if step <= 0:
                raise ValueError("step must be positive")
            out = []
            s = a
            while s <= b:
                out.append(s)
                s += step
            return out
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse s values {text!r}: {exc}") from exc


# helpers -----------------------------------------------------------------

def _frame(n):
    return [[1 if j == i else 0 for j in range(n)] for i in range(n)]


def _worst(bk, arr) -> tuple[float, int | None]:
    """Largest column norm of a (dim,) or (dim, batch) residual and its column."""
    if bk.is_exact:
        if arr.is_zero():
            return 0.0, None
        arr = arr.to_complex()
    arr = np.asarray(arr)
    if arr.ndim == 1:
        return float(np.linalg.norm(arr)), None
    norms = np.linalg.norm(arr, axis=0)
    k = int(np.argmax(norms))
    return float(norms[k]), k


class _Tracker:
    def __init__(self, bk):
        self.bk = bk
        self.max = 0.0
        self.witness = None

    def add(self, arr, **where):
        val, col = _worst(self.bk, arr)
        if val > self.max or (self.witness is None and val > 0):
            self.max = val
            self.witness = dict(where, column=col)

    def passed(self, tol: float) -> bool:
        return self.max == 0.0 if self.bk.is_exact else self.max <= tol


def _rng(seed: int, identity: str, idx: int):
    tag = sum(ord(ch) * (i + 1) for i, ch in enumerate(identity))
    return np.random.default_rng([seed, tag, idx])


def _to_backend_jet(jet, bk):
    if bk.is_exact:
        return jet
    return jet.map(lambda v: v.to_complex())


# suites ------------------------------------------------------------------

def _run_differential(identity, geom, rep, s, trials, rng, tol, conv):
    bk = rep.backend
    tr = _Tracker(bk)
    n = geom.n
    note = ""
    if identity == "twistorial":
        K = op.twistor_jets(geom, rep, s)
        dim = K.value.shape[1]
        if dim == 0:
            return tr, 0, "no twistor 2-jets at this s"
        coeffs = ExactArray(rng.integers(-3, 4, size=(dim, trials)).astype(object),
                            rng.integers(-3, 4, size=(dim, trials)).astype(object), 1)
        jet = _to_backend_jet(K.combine(coeffs), bk)
        note = f"twistor 2-jet space of dimension {dim}"
        for i, X in enumerate(_frame(n)):
            r = op.verify_twistorial(geom, rep, s, X, jet, check_precondition=bk.is_exact)
            tr.add(r["formula"], X=i + 1, part="formula")
            if i == 0:
                tr.add(r["contraction"], part="trace")
        return tr, trials, note
    jet = random_jet(geom.c, rep, rng, batch=trials)
    ops = op.spin_operators(geom, rep, s)
    if identity == "half_ricci":
        nab = ops.nablas(jet)
        D = ops.dirac_from(nab)
        for i, X in enumerate(_frame(n)):
            terms = ops.half_ricci_terms(X, jet, nab, D)
            tr.add(terms["lhs"] - terms["rhs"], X=i + 1)
            tr.add(terms["rhs"] - terms["rhs_bracket"], X=i + 1, part="bracket-form")
    elif identity == "curvature_form":
        for i, X in enumerate(_frame(n)):
            tr.add(op.verify_curvature_form(geom, rep, s, X, jet), X=i + 1)
    elif identity == "sl":
        tr.add(op.verify_sl(geom, rep, s, jet, conv))
    elif identity == "product_rules":
        X = random_vector(n, rng)
        for p in (2, 3):
            w = random_form(n, p, rng)
            for key, r in op.verify_product_rules(geom, rep, s, jet, X, w).items():
                tr.add(r, item=key, p=p)
    elif identity == "slashed_forms":
        for key, r in op.slashed_alternatives(geom, rep, s, jet).items():
            tr.add(r, form=key)
    return tr, trials, note


def _ricci_laws(geom, s) -> float:
    """Max |defect| of the curvature relations (exact arithmetic)."""
    n = geom.n
    cs = curvature(geom, s)
    cg = curvature(geom, 0)
    cc = curvature(geom, Fraction(1, 4))
    nT = geom.torsion.norm_sq
    defects = [cs.ric - (cg.ric - cs.S * (4 * s * s)),
               np.array([cs.sca - (cg.sca - 24 * s * s * nT)], dtype=object),
               np.array([cg.sca - (cc.sca + Fraction(3, 2) * nT)], dtype=object),
               cs.ric - cs.ric.T,
               cs.R + cs.R.transpose(1, 0, 2, 3),
               cs.R + cs.R.transpose(0, 1, 3, 2),
               cs.R - cs.R.transpose(2, 3, 0, 1)]
    dT = frame_d(geom, geom.torsion.form, 0)
    ds = frame_d(geom, geom.torsion.form, s)
    extra = ds - (dT - sigma_T(geom.torsion) * (8 * s))
    worst = max(max((abs(x) for x in d.flat), default=0) for d in defects)
    worst = max(worst, max((abs(c) for _, c in extra.items()), default=0))
    return float(worst)


def _special(entry: CatalogEntry, s) -> tuple[float, object]:
    """Algebraic parallel-spinor checks on every case of an entry; raises on failure."""
    for case, d in entry.data.items():
        for X in _frame(entry.n):
            sp.ricci_action_parallel(d, s, X)
            if entry.is_model:
                diff = sp.ricci_action_parallel(d, s, X) - sp.curvature_action(entry.geometry, entry.rep, s, X, d.phi0)
                if not diff.is_zero():
                    return diff.norm(), {"case": case, "X": X.index(1) + 1, "part": "curvature-level"}
        if not sp.scalar_contraction_residual(d, s).is_zero():
            return 1.0, {"case": case, "part": "scalar-trace"}
        sp.slashed_eigen_parallel(d, s)
        if d.kind == sp.EINSTEIN_KILLING:
            sp.harmony_einstein(d, s)
            sp.killing_correspondence(d, s)
            sp.slashed_on_killing(d, s)
            if d.gamma != 0:
                sp.dirac_from_slashed(d, s)
    return 0.0, None


def _one(identity, entry, backend, s, idx, trials, seed, tol, conv) -> SuiteResult:
    anchor = ANCHORS[identity]
    geom = entry.geometry
    s_txt = str(s)
    try:
        if identity in DIFFERENTIAL:
            rep = entry.rep.to_backend(backend)
            tr, used, note = _run_differential(identity, geom, rep, s, trials, _rng(seed, identity, idx), tol, conv)
            return SuiteResult(identity, anchor, s_txt, used, tr.max, tol, tr.passed(tol), tr.witness, note)
        if identity == "ricci_laws":
            r = _ricci_laws(geom, s)
            return SuiteResult(identity, anchor, s_txt, 1, r, 0.0, r == 0.0, None if r == 0 else {"s": s_txt})
        if identity == "special":
            r, w = _special(entry, s)
            return SuiteResult(identity, anchor, s_txt, len(entry.data), r, 0.0, r == 0.0, w)
    except (sp.IdentityViolation, op.PreconditionError) as exc:
        return SuiteResult(identity, anchor, s_txt, trials, float("inf"), tol, False, {"error": str(exc)})
    raise ValueError(f"unknown identity {identity!r}")


def _contraction(entry, trials, seed) -> list:
    out = []
    rep = entry.rep
    for label, T in (("structure", entry.torsion), ("random", None)):
        res = check_contraction_identities(rep, T, trials=trials, seed=seed)
        for r in res:
            out.append(SuiteResult("contraction", ANCHORS["contraction"], f"{label}:{r.identity}", r.trials,
                                   float(r.max_residual), 0.0, r.passed, r.witness))
    return out


def applicable(entry: CatalogEntry, identity: str) -> bool:
    if identity in DIFFERENTIAL or identity == "ricci_laws":
        return entry.is_model
    if identity == "special":
        return bool(entry.data)
    return identity == "contraction"


def expand(entry: CatalogEntry, identity: str) -> list:
    if identity == "all":
        return [i for i in ANCHORS if applicable(entry, i)]
    if identity not in ANCHORS:
        raise KeyError(f"unknown identity {identity!r}; choose from {', '.join(IDENTITIES)}")
    if not applicable(entry, identity):
        raise KeyError(f"identity {identity!r} needs {'a model geometry' if identity != 'special' else 'parallel-spinor data'}"
                       f" and {entry.name} has none")
    return [identity]


def run_suite(entry: CatalogEntry, identity: str, s_values, trials: int = 100, backend="exact",
              seed: int = 0, tolerance: float | None = None, convention: str = "plus",
              threads: int | None = None) -> list:
    """Run one identity (or ``"all"``) over the s-values; results come back in
    a fixed order regardless of thread scheduling."""
    bk = get_backend(backend)
    tol = bk.tolerance if tolerance is None else float(tolerance)
    if bk.is_exact:
        tol = 0.0
    ids = expand(entry, identity)
    if entry.is_model and any(i in DIFFERENTIAL for i in ids) and not is_parallel_torsion(entry.geometry):
        raise op.PreconditionError(f"{entry.name}: torsion is not parallel")
    s_values = [as_fraction(s) for s in s_values]
    jobs = []
    for ident in ids:
        if ident == "contraction":
            continue
        for idx, s in enumerate(s_values):
            jobs.append((ident, idx, s))
    workers = threads or thread_count()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(_one, ident, entry, bk, s, idx, trials, seed, tol, convention) for ident, idx, s in jobs]
        results = [f.result() for f in futures]
    if "contraction" in ids:
        results.extend(_contraction(entry, max(1, min(trials, 50)), seed))
    order = {ident: k for k, ident in enumerate(ids)}
    return sorted(results, key=lambda r: order[r.identity])
