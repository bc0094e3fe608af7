"""Formula families, exhaustive/random formula generators and a CSV timing harness."""
from __future__ import annotations

import csv
import io
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from . import formula as fm
from .checker import CheckOptions, CheckTimeout, check
from .formula import Formula
from .parser import LtlSyntaxError, parse
from .satkernel import ResourceLimit

FAMILIES = ("f-chain", "counter-like", "gf-cycle", "random-conjunction")
CSV_COLUMNS = (
    "family", "n", "seed", "formula", "verdict", "time_ms", "states", "sat_calls", "mus_calls", "timeout",
)


@dataclass(frozen=True)
class FamilySpec:
    family: str
    n: int
    k: int = 3
    seed: int = 0
    names: tuple[str, ...] = ()
    negated: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    def atoms(self, count: int, stem: str = "p") -> list[Formula]:
        names = list(self.names) or [f"{stem}{i}" for i in range(1, count + 1)]
        if len(names) < count:
            raise ValueError(f"{self.family} needs {count} atom names")
        return [fm.atom(x) for x in names[:count]]


def f_chain(ps: Sequence[Formula]) -> Formula:
    return fm.conj(fm.eventually(p) for p in ps)


def gf_cycle(ps: Sequence[Formula], negated: bool = False) -> Formula:
    body = [fm.eventually(p) for p in ps]
    if negated:
        body += [fm.eventually(fm.neg(p)) for p in ps]
    return fm.always(fm.conj(body))


def counter_like(bits: Sequence[Formula]) -> Formula:
    """An n-bit binary counter that starts at zero and must reach all ones."""
    parts = [fm.neg(b) for b in bits]
    for i, b in enumerate(bits):
        carry = fm.conj(bits[:i])
        flip = fm.iff(b, fm.nxt(fm.neg(b)))
        keep = fm.iff(b, fm.nxt(b))
        parts.append(fm.always(fm.conj(fm.implies(carry, flip), fm.implies(fm.neg(carry), keep))))
    parts.append(fm.eventually(fm.conj(bits)))
    return fm.to_nnf(fm.conj(parts))


# the classic specification-pattern shapes
def _response(p, q):
    return fm.always(fm.implies(p, fm.eventually(q)))


def _precedence(p, q):
    # q does not happen before p: !q W p
    return fm.disj(fm.until(fm.neg(q), p), fm.always(fm.neg(q)))


def _absence(p, _q):
    return fm.always(fm.neg(p))


def _existence(p, _q):
    return fm.eventually(p)


def _universality(p, _q):
    return fm.always(p)


PATTERNS = {
    "response": _response,
    "precedence": _precedence,
    "absence": _absence,
    "existence": _existence,
    "universality": _universality,
}


def random_conjunction(n: int, ps: Sequence[Formula], seed: int) -> Formula:
    rng = random.Random(seed)
    names = sorted(PATTERNS)
    parts = []
    for _ in range(n):
        pat = PATTERNS[rng.choice(names)]
        p, q = rng.sample(list(ps), 2) if len(ps) > 1 else (ps[0], ps[0])
        parts.append(pat(p, q))
    return fm.conj(parts)


def generate(spec: FamilySpec) -> list[Formula]:
    if spec.family == "f-chain":
        return [f_chain(spec.atoms(spec.n))]
    if spec.family == "gf-cycle":
        return [gf_cycle(spec.atoms(spec.n), spec.negated)]
    if spec.family == "counter-like":
        return [counter_like(spec.atoms(spec.n, "b"))]
    return [random_conjunction(spec.n, spec.atoms(spec.k), spec.seed)]


# ---------------------------------------------------------------------------
# Generic formula generators used by the cross-validation suites

_UNARY = (fm.nxt, fm.eventually, fm.always)
_BINARY = (fm.conj, fm.disj, fm.until, fm.release)


def all_formulas(max_nodes: int, atoms: Sequence[str] = ("a", "b")) -> list[Formula]:
    """Every NNF formula with at most ``max_nodes`` AST nodes, deduplicated.

    Leaves are atoms (one node) and negated atoms (two nodes); inner nodes
    are X, F, G, &, |, U and R.  Structurally equal results of different
    trees (for instance ``a & b`` and ``b & a``) are kept once.
    """
    by_size: dict[int, dict[int, Formula]] = {n: {} for n in range(1, max_nodes + 1)}
    for x in atoms:
        by_size[1][fm.atom(x).id] = fm.atom(x)
        if max_nodes >= 2:
            g = fm.neg(fm.atom(x))
            by_size[2][g.id] = g
    for n in range(2, max_nodes + 1):
        bucket = by_size[n]
        for g in list(by_size[n - 1].values()):
            for op in _UNARY:
                h = op(g)
                bucket[h.id] = h
        for k in range(1, n - 1):
            for left in list(by_size[k].values()):
                for right in list(by_size[n - 1 - k].values()):
                    for op in _BINARY:
                        h = op(left, right)
                        bucket[h.id] = h
    out: dict[int, Formula] = {}
    for n in range(1, max_nodes + 1):
        for i, h in by_size[n].items():
            out.setdefault(i, h)
    return list(out.values())


def random_formula(rng: random.Random, atoms: Sequence[str], depth: int) -> Formula:
    """A random NNF formula of operator depth at most ``depth``."""
    if depth == 0 or rng.random() < 0.2:
        a = fm.atom(rng.choice(list(atoms)))
        return fm.neg(a) if rng.random() < 0.5 else a
    if rng.random() < 0.4:
        return rng.choice(_UNARY)(random_formula(rng, atoms, depth - 1))
    op = rng.choice(_BINARY)
    return op(random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1))


# ---------------------------------------------------------------------------
# Harness


@dataclass
class BenchRow:
    family: str
    n: int | str
    seed: int | str
    formula: str
    verdict: str
    time_ms: float
    states: int = 0
    sat_calls: int = 0
    mus_calls: int = 0
    timeout: bool = False

    def values(self) -> list:
        return [
            self.family, self.n, self.seed, self.formula, self.verdict,
            f"{self.time_ms:.1f}", self.states, self.sat_calls, self.mus_calls, int(self.timeout),
        ]


@dataclass
class BenchItem:
    family: str
    n: int | str
    seed: int | str
    formula: Formula | None
    text: str = ""
    error: str = ""


def items_for(specs: Iterable[FamilySpec]) -> list[BenchItem]:
    out = []
    for spec in specs:
        for f in generate(spec):
            seed = spec.seed if spec.family == "random-conjunction" else ""
            out.append(BenchItem(spec.family, spec.n, seed, f, fm.to_str(f)))
    return out


def load_corpus(directory: str) -> list[BenchItem]:
    """One formula per line; blank lines and ``#`` comments are skipped."""
    out = []
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        if not os.path.isfile(path):
            continue
        fam = os.path.splitext(name)[0]
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                try:
                    out.append(BenchItem(fam, lineno, "", parse(text), text))
                except LtlSyntaxError as exc:
                    out.append(BenchItem(fam, lineno, "", None, text, str(exc)))
    return out


def run_item(item: BenchItem, options: CheckOptions) -> BenchRow:
    if item.formula is None:
        return BenchRow(item.family, item.n, item.seed, item.text, "error", 0.0)
    t0 = time.perf_counter()
    try:
        v = check(item.formula, options)
    except CheckTimeout:
        ms = (time.perf_counter() - t0) * 1000
        return BenchRow(item.family, item.n, item.seed, item.text, "timeout", ms, timeout=True)
    except ResourceLimit:
        ms = (time.perf_counter() - t0) * 1000
        return BenchRow(item.family, item.n, item.seed, item.text, "resource-limit", ms)
    ms = (time.perf_counter() - t0) * 1000
    s = v.stats
    return BenchRow(
        item.family, item.n, item.seed, item.text, v.label, ms, s.states, s.sat_calls, s.mus_calls
    )


def aggregate(rows: Sequence[BenchRow]) -> list[BenchRow]:
    out = []
    families: dict[str, list[BenchRow]] = {}
    for r in rows:
        families.setdefault(r.family, []).append(r)
    for fam, rs in families.items():
        counts = {v: sum(1 for r in rs if r.verdict == v) for v in ("sat", "unsat", "timeout")}
        out.append(
            BenchRow(
                fam, "*", "", f"{len(rs)} formulas",
                ";".join(f"{k}={v}" for k, v in counts.items()),
                sum(r.time_ms for r in rs),
                sum(r.states for r in rs), sum(r.sat_calls for r in rs),
                sum(r.mus_calls for r in rs), counts["timeout"] > 0,
            )
        )
    return out


def run_suite(
    items: Sequence[BenchItem] | Sequence[FamilySpec],
    options: CheckOptions | None = None,
    timeout_ms: int | None = None,
    workers: int = 1,
    out: TextIO | None = None,
) -> str:
    """Run every item and return (and optionally write) the CSV report."""
    items = list(items)
    if items and isinstance(items[0], FamilySpec):
        items = items_for(items)  # type: ignore[arg-type]
    options = options or CheckOptions()
    if timeout_ms is not None:
        options = CheckOptions(**{**options.__dict__, "timeout_ms": timeout_ms})
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda it: run_item(it, options), items))
    else:
        rows = [run_item(it, options) for it in items]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows + aggregate(rows):
        w.writerow(r.values())
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
