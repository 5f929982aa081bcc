"""Randomized and exhaustive checks of the pulse-layer lemma.

Part (a): on a field without local extremal sets smaller than n, the layer
(id - P_n) f is a sum of down pulses on the size-n local minimum sets and up
pulses on the size-n local maximum sets of U_n f, with disjoint, mutually
non-adjacent same-sign supports.

Part (b): for a fully trend preserving A,
U_n (id - A U_n) = U_n - A U_n and L_n (id - A L_n) = L_n - A L_n.

Every check is recorded under a stable assertion id so a report can be
audited clause by clause.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import asdict, dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from . import dpt, lulu
from .field import (
    MAX,
    MIN,
    ScalarField,
    extremal_zones,
    flat_zones,
    is_local_max_set,
    max_adjacent_witness,
    min_adjacent_witness,
)
from .lattice import DOMAIN_ONLY, FACET, FULL, OUTSIDE, ZERO_PADDED, Lattice

log = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
INAPPLICABLE = "inapplicable"

# assertion id -> the clause or proof step it checks
ASSERTIONS = {
    "a.precondition": "input has no local min/max sets of size < n (brute force)",
    "a.eq1": "(id-P_n)f equals the sum of the down and up pulses",
    "a.components": "connected constant parts of (id-P_n)f are exactly the pulse supports",
    "a.pulse_scale": "every pulse support is connected with exactly n cells",
    "a.pulse_sign": "down pulses negative, up pulses positive",
    "a.min_witness": "y_ni attains min of f over adj(V_ni)",
    "a.piecewise_U": "U_n f = f(y_ni) on V_ni and f elsewhere",
    "a.constancy_U": "U_n f is constant on V_ni plus y_ni",
    "a.max_witness": "z_nj attains max of U_n f over adj(W_nj)",
    "a.piecewise_LU": "L_n U_n f = U_n f(z_nj) on W_nj and U_n f elsewhere",
    "a.max_sets_of_f": "each W_nj is a local max set of f",
    "a.eq2": "min supports pairwise disjoint and non-adjacent",
    "a.eq3": "max supports pairwise disjoint and non-adjacent",
    "a.eq4": "min and max supports disjoint",
    "a.eq4_strong": "(V_ni with y_ni) disjoint from every W_nj",
    "a.extract_layer": "reference layer extraction agrees with the proof construction",
    "b.ftp": "A is fully trend preserving on U_n f and L_n f (gate)",
    "b.split_U": "g = (id-U_n)f + ((id-A)U_n)f",
    "b.constancy_U": "((id-A)U_n)f is constant (w_i) on V_ni plus y_ni",
    "b.adj_min_U": "min of ((id-A)U_n)f over adj(V_ni) equals w_i",
    "b.min_sets_of_g": "V_ni are exactly the local min flat zones of g of size <= n",
    "b.residual_U": "(id-U_n)g = (id-U_n)f",
    "b.identity_U": "U_n(id-AU_n)f = (U_n-AU_n)f",
    "b.split_L": "h = (id-L_n)f + ((id-A)L_n)f",
    "b.constancy_L": "((id-A)L_n)f is constant on W_nj plus z_nj",
    "b.adj_max_L": "max of ((id-A)L_n)f over adj(W_nj) equals that constant",
    "b.max_sets_of_h": "W_nj are exactly the local max flat zones of h of size <= n",
    "b.residual_L": "(id-L_n)h = (id-L_n)f",
    "b.identity_L": "L_n(id-AL_n)f = (L_n-AL_n)f",
    "inv.reconstruction": "sum of all pulses plus residual reproduces the input",
    "inv.engine_equivalence": "zone-graph engine equals the reference engine",
    "inv.layer_purity": "every pulse in layer n has connected support of n cells",
    "inv.sign": "U-phase pulses negative, L-phase pulses positive",
    "inv.n_bound": "N <= card(supp f plus enclosed zero holes) in zero_padded mode",
    "inv.oracle": "fast U_n/L_n equal the min-max oracle",
    "inv.ordering": "L_n f <= f <= U_n f",
    "inv.idempotence": "U_n U_n = U_n and L_n L_n = L_n",
    "inv.monotone": "f <= g implies U_n f <= U_n g and L_n f <= L_n g",
    "inv.p_n_clean": "P_n f has no local extremal sets of size <= n (brute force)",
}


class PreconditionError(RuntimeError):
    pass


@dataclass
class TrialReport:
    seed: object
    lattice: dict
    field: list
    n: int
    operator: str | None = None
    assertions: list[dict] = dc_field(default_factory=list)
    verdict: str = PASS

    def check(self, aid: str, ok: bool, witness=None) -> bool:
        ok = bool(ok)
        self.assertions.append({"id": aid, "ok": ok, "witness": None if ok else _jsonable(witness)})
        if not ok and self.verdict == PASS:
            self.verdict = FAIL
        return ok

    @property
    def failures(self) -> list[dict]:
        return [a for a in self.assertions if not a["ok"]]

    def to_dict(self) -> dict:
        return asdict(self)


def _jsonable(x):
    if x is OUTSIDE:
        return "OUTSIDE"
    if isinstance(x, ScalarField):
        return x.values.tolist()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        if isinstance(x, (set, frozenset)):
            items.sort(key=repr)
        return items
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def _new_report(f: ScalarField, n: int, seed=None, operator=None) -> TrialReport:
    return TrialReport(
        seed=seed,
        lattice=f.lattice.describe(),
        field=f.values.tolist(),
        n=n,
        operator=None if operator is None else str(operator),
    )


# -- brute force -------------------------------------------------------------


@lru_cache(maxsize=256)
def connected_window_sets(lat: Lattice, size: int) -> tuple[frozenset, ...]:
    """All connected sets of ``size`` window cells, as frozensets of linear indices."""
    found = set()
    for i in range(lat.size):
        for s in lat.connected_supersets(lat.cell(i), size, halo=False):
            found.add(frozenset(lat.index(c) for c in s))
    return tuple(sorted(found, key=sorted))


def brute_extremal_sets(f: ScalarField, max_size: int) -> list[tuple[str, tuple]]:
    """Every connected window set of at most ``max_size`` cells that is a local min or max set.

    OUTSIDE is never a candidate. Exponential; desk scale only.
    """
    lat = f.lattice
    vals = f.flat
    table = lat.neighbor_table
    border = lat.border
    found = []
    for size in range(1, min(max_size, lat.size) + 1):
        for s in connected_window_sets(lat, size):
            inner = [vals[i] for i in s]
            adj = {j for i in s for j in table[i]} - s
            around = [vals[j] for j in adj]
            if any(border[i] for i in s):
                around.append(0)
            if not around:
                continue
            cells = tuple(lat.cell(i) for i in sorted(s))
            if max(inner) < min(around):
                found.append((MIN, cells))
            elif min(inner) > max(around):
                found.append((MAX, cells))
    return found


# -- preconditioned inputs ---------------------------------------------------


def random_field(lat: Lattice, rng: np.random.Generator, lo: int = 0, hi: int = 7) -> ScalarField:
    return ScalarField(lat, rng.integers(lo, hi + 1, size=lat.extents))


def generate_preconditioned(
    lat: Lattice,
    n: int,
    seed,
    lo: int = 0,
    hi: int = 7,
    max_retries: int = 20,
) -> ScalarField:
    """Random field passed through P_{n-1} o ... o P_1, brute-force checked.

    The result has no local min/max sets of fewer than n cells.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    for attempt in range(max_retries):
        f = lulu.q_n(random_field(lat, rng, lo, hi), n - 1)
        bad = brute_extremal_sets(f, n - 1) if n > 1 else []
        if not bad:
            return f
        log.warning(
            "framework-consistency alarm: Q_%d output has extremal set %s (attempt %d)",
            n - 1, bad[0], attempt,
        )
    raise PreconditionError(f"no preconditioned field after {max_retries} draws")


# -- shared per-field data ---------------------------------------------------


def _as_set(lat: Lattice, cells) -> frozenset:
    return frozenset(lat.index(c) for c in cells)


def _key(lat: Lattice, c) -> int:
    return -1 if c is OUTSIDE else lat.index(c)


def _adj_min_direct(f: ScalarField, cells) -> int:
    adj, outside = f.lattice.adjacency_set(cells)
    vals = [f[c] for c in adj] + ([0] if outside else [])
    return min(vals)


def _adj_max_direct(f: ScalarField, cells) -> int:
    adj, outside = f.lattice.adjacency_set(cells)
    vals = [f[c] for c in adj] + ([0] if outside else [])
    return max(vals)


def _value_at(f: ScalarField, key: int) -> int:
    return 0 if key < 0 else f.flat[key]


def _disjoint_nonadjacent(lat: Lattice, sets: list[frozenset]):
    """First offending pair of supports, or None."""
    table = lat.neighbor_table
    for a, b in itertools.combinations(sets, 2):
        if a & b:
            return sorted(a), sorted(b)
        adj_a = {j for i in a for j in table[i]} - a
        if adj_a & b:
            return sorted(a), sorted(b)
    return None


@dataclass
class _Extremals:
    """Size-n extremal zones of a field with their adjacent witnesses."""

    sets: list[frozenset]
    witnesses: list[int]  # linear index, -1 for OUTSIDE
    targets: list[int]
    values: list[int]


def _extremals(f: ScalarField, n: int, polarity: str) -> _Extremals:
    lat = f.lattice
    zs = extremal_zones(f, n, polarity)
    wit = min_adjacent_witness if polarity == MIN else max_adjacent_witness
    sets, keys, targets, values = [], [], [], []
    for z in zs:
        t, y = wit(f, z.cells)
        sets.append(_as_set(lat, z.cells))
        keys.append(_key(lat, y))
        targets.append(t)
        values.append(z.value)
    return _Extremals(sets, keys, targets, values)


def _faulty_u(f: ScalarField, n: int) -> ScalarField:
    # injected fault: the final stage is skipped
    if n == 1:
        return f
    return lulu._staged(f, n, MIN, stages=range(1, n))


def _u(f, n, faulty=False):
    return _faulty_u(f, n) if faulty else lulu.u_n_fast(f, n)


# -- part (a) ----------------------------------------------------------------


def check_lemma_a(f: ScalarField, n: int, seed=None, faulty: bool = False, brute: bool = True) -> TrialReport:
    rep = _new_report(f, n, seed)
    lat = f.lattice

    if brute and n > 1:
        bad = brute_extremal_sets(f, n - 1)
        rep.check("a.precondition", not bad, bad[:1])

    uf = _u(f, n, faulty)
    pf = lulu.l_n_fast(uf, n)
    layer_field = f - pf

    mins = _extremals(f, n, MIN)
    maxs = _extremals(uf, n, MAX)

    # the proof's construction of U_n f and L_n U_n f
    expect_u = list(f.flat)
    for s, t in zip(mins.sets, mins.targets):
        for i in s:
            expect_u[i] = t
    rep.check("a.piecewise_U", expect_u == uf.flat, {"expected": expect_u, "got": uf})
    expect_lu = list(uf.flat)
    for s, t in zip(maxs.sets, maxs.targets):
        for i in s:
            expect_lu[i] = t
    rep.check("a.piecewise_LU", expect_lu == pf.flat, {"expected": expect_lu, "got": pf})

    ok = True
    wit = None
    for s, y, t in zip(mins.sets, mins.witnesses, mins.targets):
        cells = [lat.cell(i) for i in s]
        direct = _adj_min_direct(f, cells)
        if not (t == direct == _value_at(f, y)):
            ok, wit = False, {"set": sorted(s), "witness": y, "min": direct}
            break
    rep.check("a.min_witness", ok, wit)

    ok = True
    wit = None
    for s, z, t in zip(maxs.sets, maxs.witnesses, maxs.targets):
        cells = [lat.cell(i) for i in s]
        direct = _adj_max_direct(uf, cells)
        if not (t == direct == _value_at(uf, z)):
            ok, wit = False, {"set": sorted(s), "witness": z, "max": direct}
            break
    rep.check("a.max_witness", ok, wit)

    ok = True
    wit = None
    for s, y in zip(mins.sets, mins.witnesses):
        vals = {uf.flat[i] for i in s} | {_value_at(uf, y)}
        if len(vals) != 1:
            ok, wit = False, {"set": sorted(s), "witness": y}
            break
    rep.check("a.constancy_U", ok, wit)

    # pulses from the construction
    down = [(s, v - t) for s, v, t in zip(mins.sets, mins.values, mins.targets)]
    up = [(s, v - t) for s, v, t in zip(maxs.sets, maxs.values, maxs.targets)]
    total = [0] * lat.size
    for s, v in down + up:
        for i in s:
            total[i] += v
    rep.check("a.eq1", total == layer_field.flat, {"pulse_sum": total, "layer": layer_field})

    rep.check(
        "a.pulse_scale",
        all(len(s) == n and lat.is_connected([lat.cell(i) for i in s]) for s, _ in down + up),
        [sorted(s) for s, _ in down + up if len(s) != n],
    )
    rep.check(
        "a.pulse_sign",
        all(v < 0 for _, v in down) and all(v > 0 for _, v in up),
        {"down": [v for _, v in down], "up": [v for _, v in up]},
    )

    # independent view: split the layer into connected constant components
    comps_neg, comps_pos = set(), set()
    for z in flat_zones(layer_field):
        if z.value < 0:
            comps_neg.add(_as_set(lat, z.cells))
        elif z.value > 0:
            comps_pos.add(_as_set(lat, z.cells))
    rep.check(
        "a.components",
        comps_neg == set(mins.sets) and comps_pos == set(maxs.sets),
        {"negative": comps_neg, "positive": comps_pos, "V": mins.sets, "W": maxs.sets},
    )

    rep.check(
        "a.max_sets_of_f",
        all(is_local_max_set(f, [lat.cell(i) for i in s]) for s in maxs.sets),
        maxs.sets,
    )

    rep.check("a.eq2", (w := _disjoint_nonadjacent(lat, mins.sets)) is None, w)
    rep.check("a.eq3", (w := _disjoint_nonadjacent(lat, maxs.sets)) is None, w)
    clash = [(sorted(a), sorted(b)) for a in mins.sets for b in maxs.sets if a & b]
    rep.check("a.eq4", not clash, clash[:1])
    clash = [
        (sorted(a), y, sorted(b))
        for a, y in zip(mins.sets, mins.witnesses)
        for b in maxs.sets
        if (a | ({y} if y >= 0 else set())) & b
    ]
    rep.check("a.eq4_strong", not clash, clash[:1])

    if not faulty:
        try:
            layer, state = dpt.extract_layer(f, n)
        except dpt.EngineInvariantError as exc:
            rep.check("a.extract_layer", False, str(exc))
        else:
            got_down = sorted((sorted(p.indices.tolist()), p.value) for p in layer.down_pulses)
            got_up = sorted((sorted(p.indices.tolist()), p.value) for p in layer.up_pulses)
            rep.check(
                "a.extract_layer",
                got_down == sorted((sorted(s), v) for s, v in down)
                and got_up == sorted((sorted(s), v) for s, v in up)
                and state == pf,
                {"down": got_down, "up": got_up},
            )
    return rep


# -- part (b) ----------------------------------------------------------------


class LemmaBContext:
    """Quantities of part (b) that depend only on (f, n), shared across operators."""

    def __init__(self, f: ScalarField, n: int):
        self.f = f
        self.n = n
        self.uf = lulu.u_n_fast(f, n)
        self.lf = lulu.l_n_fast(f, n)
        self.mins = _extremals(f, n, MIN)
        self.maxs = _extremals(f, n, MAX)


def _constant_on(w: ScalarField, sets, keys):
    """Per-set constant value of ``w`` on set + witness, or an offending set."""
    consts = []
    for s, y in zip(sets, keys):
        vals = {w.flat[i] for i in s} | {_value_at(w, y)}
        if len(vals) != 1:
            return None, {"set": sorted(s), "witness": y, "values": sorted(vals)}
        consts.append(vals.pop())
    return consts, None


def _small_extremal_zone_sets(g: ScalarField, n: int, polarity: str) -> set:
    lat = g.lattice
    zones = flat_zones(g)
    out = set()
    for k in range(1, n + 1):
        out.update(_as_set(lat, z.cells) for z in extremal_zones(g, k, polarity, zones))
    return out


def _half_b(rep, ctx: LemmaBContext, a_image: ScalarField, smooth: ScalarField, ext: _Extremals, side: str):
    f, n = ctx.f, ctx.n
    lat = f.lattice
    if side == "U":
        op = lulu.u_n_fast
        pol = MIN
        agg = _adj_min_direct
        tag_sets = "b.min_sets_of_g"
    else:
        op = lulu.l_n_fast
        pol = MAX
        agg = _adj_max_direct
        tag_sets = "b.max_sets_of_h"

    g = f - a_image
    w = smooth - a_image  # ((id - A) S) f
    rep.check(f"b.split_{side}", g == (f - smooth) + w, g)

    consts, wit = _constant_on(w, ext.sets, ext.witnesses)
    rep.check(f"b.constancy_{side}", consts is not None, wit)
    if consts is not None:
        bad = None
        for s, c in zip(ext.sets, consts):
            if agg(w, [lat.cell(i) for i in s]) != c:
                bad = {"set": sorted(s), "constant": c}
                break
        rep.check("b.adj_min_U" if side == "U" else "b.adj_max_L", bad is None, bad)

    found = _small_extremal_zone_sets(g, n, pol)
    rep.check(tag_sets, found == set(ext.sets), {"found": found, "expected": ext.sets})

    sg = op(g, n)
    rep.check(f"b.residual_{side}", g - sg == f - smooth, {"g": g, "S_g": sg})
    rhs = smooth - a_image
    rep.check(f"b.identity_{side}", sg == rhs, {"lhs": sg, "rhs": rhs})


def check_lemma_b(
    f: ScalarField,
    n: int,
    A: lulu.OperatorExpr,
    seed=None,
    ctx: LemmaBContext | None = None,
) -> TrialReport:
    if ctx is None or ctx.f is not f or ctx.n != n:
        ctx = LemmaBContext(f, n)
    rep = _new_report(f, n, seed, A)

    au = lulu.apply(A, ctx.uf)
    al = lulu.apply(A, ctx.lf)
    for base, image in ((ctx.uf, au), (ctx.lf, al)):
        ok, pair = lulu.is_ftp_on(A, base, image)
        if not ok:
            rep.verdict = INAPPLICABLE
            rep.assertions.append({"id": "b.ftp", "ok": False, "witness": _jsonable({"field": base, "pair": pair})})
            return rep
    rep.assertions.append({"id": "b.ftp", "ok": True, "witness": None})

    _half_b(rep, ctx, au, ctx.uf, ctx.mins, "U")
    _half_b(rep, ctx, al, ctx.lf, ctx.maxs, "L")
    return rep


# -- module invariants -------------------------------------------------------


def check_decomposition(f: ScalarField, seed=None) -> TrialReport:
    rep = _new_report(f, 0, seed)
    lat = f.lattice
    r = dpt.decompose(f)
    rep.check("inv.reconstruction", dpt.reconstruct(r) == f, {"rebuilt": dpt.reconstruct(r)})
    ref = dpt.decompose_naive(f)
    rep.check("inv.engine_equivalence", r == ref, None)
    bad = [
        (layer.n, p.support)
        for layer in r.layers
        for p in layer.pulses
        if p.scale != layer.n or not lat.is_connected(p.support)
    ]
    rep.check("inv.layer_purity", not bad, bad[:1])
    rep.check(
        "inv.sign",
        all(p.value < 0 for l in r.layers for p in l.down_pulses)
        and all(p.value > 0 for l in r.layers for p in l.up_pulses),
        None,
    )
    if lat.zero_padded:
        bound = filled_support_size(f)
        rep.check("inv.n_bound", r.N <= bound, {"N": r.N, "bound": bound})
    return rep


def filled_support_size(f: ScalarField) -> int:
    """Cells not in a zero flat zone that touches OUTSIDE.

    That is supp(f) plus its enclosed zero holes; such zero zones never
    change value, so no pulse can reach them.
    """
    return f.lattice.size - sum(
        z.size for z in flat_zones(f) if z.value == 0 and z.touches_outside
    )


def check_operator_laws(f: ScalarField, g: ScalarField, n: int, seed=None, oracle: bool = False) -> TrialReport:
    """Ordering, idempotence, monotonicity (on f and max(f, g)) and P_n cleanliness."""
    rep = _new_report(f, n, seed)
    uf, lf = lulu.u_n_fast(f, n), lulu.l_n_fast(f, n)
    rep.check("inv.ordering", lf <= f <= uf, {"L": lf, "U": uf})
    rep.check(
        "inv.idempotence",
        lulu.u_n_fast(uf, n) == uf and lulu.l_n_fast(lf, n) == lf,
        {"U": uf, "L": lf},
    )
    hi = ScalarField(f.lattice, np.maximum(f.values, g.values))
    rep.check(
        "inv.monotone",
        uf <= lulu.u_n_fast(hi, n) and lf <= lulu.l_n_fast(hi, n),
        {"upper": hi},
    )
    pf = lulu.p_n(f, n)
    bad = brute_extremal_sets(pf, n)
    rep.check("inv.p_n_clean", not bad, bad[:1])
    if oracle:
        rep.check(
            "inv.oracle",
            lulu.u_n_oracle(f, n) == uf and lulu.l_n_oracle(f, n) == lf,
            {"U": uf, "L": lf},
        )
    return rep


# -- suite -------------------------------------------------------------------


@dataclass
class SuiteConfig:
    """What ``run_suite`` executes. The zero value runs nothing."""

    seed: int = 0
    trials: int = 0  # preconditioned fields per n for parts (a) and (b)
    n_values: tuple[int, ...] = ()
    shapes: tuple[tuple[int, ...], ...] = ()
    value_range: tuple[int, int] = (0, 7)
    boundaries: tuple[str, ...] = (ZERO_PADDED, DOMAIN_ONLY)
    connectivities: tuple[str, ...] = (FACET, FULL)
    operators: tuple[str, ...] = ()
    exhaustive_length: int = 0  # 1D micro-universe up to this length, values {0,1,2}
    invariant_trials: int = 0
    inject_fault: bool = False

    @classmethod
    def default(cls) -> SuiteConfig:
        return cls(
            seed=20240,
            trials=40,
            n_values=(1, 2, 3),
            shapes=((8,), (12,), (3, 4), (5, 5), (6, 6)),
            value_range=(-2, 7),
            operators=tuple(str(e) for e in lulu.default_library()),
            exhaustive_length=5,
            invariant_trials=60,
        )

    @classmethod
    def parse(cls, text: str) -> SuiteConfig:
        """Read ``key = value`` lines; ``#`` starts a comment; missing keys stay empty."""
        kw = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value")
            key, val = (p.strip() for p in line.split("=", 1))
            kw[key] = _parse_value(key, val, lineno)
        return cls(**kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _ints(val: str) -> tuple[int, ...]:
    return tuple(int(x) for x in val.replace(",", " ").split())


def _parse_value(key: str, val: str, lineno: int):
    try:
        if key in ("seed", "trials", "exhaustive_length", "invariant_trials"):
            return int(val)
        if key == "n_values":
            return _ints(val)
        if key == "shapes":
            return tuple(tuple(int(e) for e in s.strip().split("x")) for s in val.split(",") if s.strip())
        if key == "value_range":
            lo, hi = val.split(":")
            return int(lo), int(hi)
        if key in ("boundaries", "connectivities", "operators"):
            items = tuple(s.strip() for s in val.split(",") if s.strip())
            if key == "operators" and items == ("default",):
                return tuple(str(e) for e in lulu.default_library())
            return items
        if key == "inject_fault":
            return val.lower() in ("1", "true", "yes", "on")
    except ValueError as exc:
        raise ValueError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    raise ValueError(f"line {lineno}: unknown key {key!r}")


def _lattices(cfg: SuiteConfig) -> list[Lattice]:
    out = []
    for shape in cfg.shapes:
        for b in cfg.boundaries:
            for c in cfg.connectivities:
                if c == FULL and len(shape) != 2:
                    continue
                out.append(Lattice(shape, c, b))
    return out


class _Tally:
    def __init__(self):
        self.by_id: dict[str, dict[str, int]] = {}
        self.trials = 0
        self.failed: list[dict] = []
        self.inapplicable: list[dict] = []
        self.n_inapplicable = 0
        self.n_failed = 0

    def add(self, rep: TrialReport, kind: str):
        self.trials += 1
        for a in rep.assertions:
            if a["id"] == "b.ftp" and not a["ok"]:
                continue
            slot = self.by_id.setdefault(a["id"], {"pass": 0, "fail": 0})
            slot["pass" if a["ok"] else "fail"] += 1
        if rep.verdict == FAIL:
            self.n_failed += 1
            if len(self.failed) < 20:
                self.failed.append({"kind": kind, **_trim(rep)})
        elif rep.verdict == INAPPLICABLE:
            self.n_inapplicable += 1
            if len(self.inapplicable) < 5:
                self.inapplicable.append({"kind": kind, **_trim(rep)})


def _trim(rep: TrialReport) -> dict:
    d = rep.to_dict()
    d["assertions"] = [a for a in d["assertions"] if not a["ok"]]
    return d


def run_suite(cfg: SuiteConfig) -> dict:
    """Run every configured trial; deterministic for a given config."""
    tally = _Tally()
    lo, hi = cfg.value_range
    ops = [lulu.parse_expr(s) for s in cfg.operators]
    lats = _lattices(cfg)

    if cfg.exhaustive_length:
        for b in cfg.boundaries:
            for length in range(1, cfg.exhaustive_length + 1):
                lat = Lattice((length,), FACET, b)
                for vals in itertools.product((0, 1, 2), repeat=length):
                    f = ScalarField(lat, vals)
                    tally.add(check_decomposition(f, seed=["exhaustive", b, list(vals)]), "invariants")
                    for n in cfg.n_values:
                        if n > 1 and brute_extremal_sets(f, n - 1):
                            f_n = lulu.q_n(f, n - 1)
                        else:
                            f_n = f
                        tally.add(
                            check_lemma_a(f_n, n, seed=["exhaustive", b, list(vals)], faulty=cfg.inject_fault),
                            "lemma_a",
                        )

    if lats:
        for n in cfg.n_values:
            for t in range(cfg.trials):
                seed = [cfg.seed, n, t]
                lat = lats[t % len(lats)]
                f = generate_preconditioned(lat, n, seed, lo, hi)
                tally.add(check_lemma_a(f, n, seed=seed, faulty=cfg.inject_fault), "lemma_a")
                if ops:
                    ctx = LemmaBContext(f, n)
                    for A in ops:
                        tally.add(check_lemma_b(f, n, A, seed=seed, ctx=ctx), "lemma_b")

        for t in range(cfg.invariant_trials):
            rng = np.random.default_rng([cfg.seed, 7919, t])
            lat = lats[t % len(lats)]
            f = random_field(lat, rng, lo, hi)
            g = random_field(lat, rng, lo, hi)
            seed = [cfg.seed, 7919, t]
            tally.add(check_decomposition(f, seed=seed), "invariants")
            small = lat.size <= 12
            for n in cfg.n_values:
                tally.add(check_operator_laws(f, g, n, seed=seed, oracle=small), "invariants")

    assertions = sum(s["pass"] + s["fail"] for s in tally.by_id.values())
    failures = sum(s["fail"] for s in tally.by_id.values())
    return {
        "config": cfg.to_dict(),
        "totals": {
            "trials": tally.trials,
            "assertions": assertions,
            "failures": failures,
            "failed_trials": tally.n_failed,
            "inapplicable_trials": tally.n_inapplicable,
        },
        "by_assertion": {k: tally.by_id[k] for k in sorted(tally.by_id)},
        "failed": tally.failed,
        "inapplicable": tally.inapplicable,
        "verdict": FAIL if failures else PASS,
    }
