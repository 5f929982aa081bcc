"""LULU smoothers U_n, L_n and P_n = L_n U_n.

Two forms are provided. The oracle evaluates the min-max definition by
enumerating connected neighbourhoods and is only usable on tiny windows.
The fast form raises (lowers) local minimum (maximum) flat zones stage by
stage, k = 1..n, on a zone graph.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .field import MAX, MIN, ScalarField
from .lattice import OUTSIDE
from .zonegraph import ZoneGraph


def _oracle(f: ScalarField, n: int, polarity: str) -> ScalarField:
    if n < 1:
        raise ValueError("n must be >= 1")
    lat = f.lattice
    size = n + 1
    if not lat.zero_padded:
        # a finite domain has no connected set larger than itself
        size = min(size, lat.size)
    out = []
    for i in range(lat.size):
        x = lat.cell(i)
        best = None
        for s in lat.connected_supersets(x, size):
            vals = [f[c] if lat.contains(c) else 0 for c in s]
            inner = max(vals) if polarity == MIN else min(vals)
            if best is None or (inner < best if polarity == MIN else inner > best):
                best = inner
        out.append(best)
    return f.with_flat(out)


def u_n_oracle(f: ScalarField, n: int) -> ScalarField:
    """U_n f(x) = min over connected (n+1)-sets V containing x of max_V f."""
    return _oracle(f, n, MIN)


def l_n_oracle(f: ScalarField, n: int) -> ScalarField:
    """L_n f(x) = max over connected (n+1)-sets V containing x of min_V f."""
    return _oracle(f, n, MAX)


def _staged(f: ScalarField, n: int, polarity: str, rng=None, stages=None) -> ScalarField:
    if n < 1:
        raise ValueError("n must be >= 1")
    g = ZoneGraph(f)
    for k in stages if stages is not None else range(1, n + 1):
        g.stage(k, polarity, rng)
    return g.to_field()


def u_n_fast(f: ScalarField, n: int, rng: random.Random | None = None) -> ScalarField:
    return _staged(f, n, MIN, rng)


def l_n_fast(f: ScalarField, n: int, rng: random.Random | None = None) -> ScalarField:
    return _staged(f, n, MAX, rng)


def p_n(f: ScalarField, n: int, rng: random.Random | None = None) -> ScalarField:
    return l_n_fast(u_n_fast(f, n, rng), n, rng)


def q_n(f: ScalarField, n: int) -> ScalarField:
    """P_n o ... o P_1 f; the identity for n = 0."""
    g = ZoneGraph(f)
    for k in range(1, n + 1):
        g.stage(k, MIN)
        g.stage(k, MAX)
    return g.to_field()


# -- operator expressions ---------------------------------------------------


class OperatorExpr:
    def __call__(self, f: ScalarField) -> ScalarField:
        return apply(self, f)

    def __matmul__(self, other: OperatorExpr) -> OperatorExpr:
        return Compose(self, other)


@dataclass(frozen=True)
class Identity(OperatorExpr):
    def __str__(self):
        return "id"


@dataclass(frozen=True)
class Upper(OperatorExpr):
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("U(m) needs m >= 1")

    def __str__(self):
        return f"U{self.m}"


@dataclass(frozen=True)
class Lower(OperatorExpr):
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("L(m) needs m >= 1")

    def __str__(self):
        return f"L{self.m}"


@dataclass(frozen=True)
class Compose(OperatorExpr):
    """outer o inner"""

    outer: OperatorExpr
    inner: OperatorExpr

    def __str__(self):
        return f"{self.outer}.{self.inner}"


@dataclass(frozen=True)
class Difference(OperatorExpr):
    """Pointwise left - right; ``Difference(Identity(), A)`` is id - A."""

    left: OperatorExpr
    right: OperatorExpr

    def __str__(self):
        return f"({self.left}-{self.right})"


@dataclass(frozen=True)
class Negate(OperatorExpr):
    """f -> -f. Reverses every trend, so it is never trend preserving."""

    def __str__(self):
        return "neg"


def U(m: int) -> Upper:
    return Upper(m)


def L(m: int) -> Lower:
    return Lower(m)


def identity_minus(expr: OperatorExpr) -> Difference:
    return Difference(Identity(), expr)


def apply(expr: OperatorExpr, f: ScalarField) -> ScalarField:
    if isinstance(expr, Identity):
        return f
    if isinstance(expr, Upper):
        return u_n_fast(f, expr.m)
    if isinstance(expr, Lower):
        return l_n_fast(f, expr.m)
    if isinstance(expr, Compose):
        return apply(expr.outer, apply(expr.inner, f))
    if isinstance(expr, Difference):
        return apply(expr.left, f) - apply(expr.right, f)
    if isinstance(expr, Negate):
        return -f
    raise TypeError(f"not an operator expression: {expr!r}")


_TOKEN = re.compile(r"^(id|neg|[UL][1-9][0-9]*)$")


def parse_expr(text: str) -> OperatorExpr:
    """Parse ``"L2.U2"``-style compositions (rightmost factor applies first)."""
    parts = [p.strip() for p in text.replace("∘", ".").split(".")]
    if not parts or not all(_TOKEN.match(p) for p in parts):
        raise ValueError(f"cannot parse operator expression {text!r}")
    exprs: list[OperatorExpr] = []
    for p in parts:
        if p == "id":
            exprs.append(Identity())
        elif p == "neg":
            exprs.append(Negate())
        elif p[0] == "U":
            exprs.append(Upper(int(p[1:])))
        else:
            exprs.append(Lower(int(p[1:])))
    out = exprs[-1]
    for e in reversed(exprs[:-1]):
        out = Compose(e, out)
    return out


def default_library(max_m: int = 3) -> list[OperatorExpr]:
    """The FTP operator library exercised by the verification harness.

    identity, U(m), L(m), both two-factor products and the alternating
    three-factor products for every m <= max_m, plus a handful of mixed-scale
    compositions of depth <= 3.
    """
    names = ["id"]
    for m in range(1, max_m + 1):
        names += [f"U{m}", f"L{m}", f"L{m}.U{m}", f"U{m}.L{m}", f"U{m}.L{m}.U{m}", f"L{m}.U{m}.L{m}"]
    if max_m >= 2:
        names += ["L2.U1", "U2.L1", "U1.L2.U1"]
    if max_m >= 3:
        names += ["L3.U3.L2", "U3.L2.U1", "L1.U2.L3"]
    return [parse_expr(s) for s in names]


# -- trend preservation witnesses --------------------------------------------


def _adjacent_pairs(f: ScalarField):
    """Ordered adjacent pairs of cell keys; OUTSIDE is key -1."""
    lat = f.lattice
    table = lat.neighbor_table
    border = lat.border
    for i in range(lat.size):
        for j in table[i]:
            yield i, j
        if border[i]:
            yield i, -1
            yield -1, i


def _ntp_witness(before: ScalarField, after: ScalarField):
    b = before.flat + [0]
    a = after.flat + [0]
    for x, y in _adjacent_pairs(before):
        if b[x] >= b[y] and a[x] < a[y]:
            lat = before.lattice
            return (
                lat.cell(x) if x >= 0 else OUTSIDE,
                lat.cell(y) if y >= 0 else OUTSIDE,
            )
    return None


def is_ntp_on(expr: OperatorExpr, f: ScalarField, image: ScalarField | None = None):
    """Neighbour trend preservation of ``expr`` at ``f``.

    Returns ``(ok, pair)``; ``pair`` is an adjacent ``(x, y)`` with
    f(x) >= f(y) but (expr f)(x) < (expr f)(y), or None. ``image`` may pass a
    precomputed ``apply(expr, f)``.
    """
    if image is None:
        image = apply(expr, f)
    pair = _ntp_witness(f, image)
    return pair is None, pair


def is_ftp_on(expr: OperatorExpr, f: ScalarField, image: ScalarField | None = None):
    """Full trend preservation: both ``expr`` and ``id - expr`` are ntp at ``f``."""
    if image is None:
        image = apply(expr, f)
    ok, pair = is_ntp_on(expr, f, image)
    if not ok:
        return ok, pair
    return is_ntp_on(identity_minus(expr), f, f - image)
