"""Discrete Pulse Transform.

``decompose`` peels the field scale by scale: at scale n the local minimum
flat zones of size n are raised (down pulses), then the local maximum zones
of size n of that result are lowered (up pulses). Every pulse is stored
with its explicit support, so the sum of all pulses (plus the residual
constant in domain_only mode) rebuilds the input exactly.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import MAX, MIN, ScalarField, extremal_zones, flat_zones, max_adjacent_witness, min_adjacent_witness
from .lattice import Lattice
from .zonegraph import ZoneGraph


class EngineInvariantError(RuntimeError):
    """The state entering a layer extraction still had smaller extremal sets."""


@dataclass(frozen=True, eq=False)
class Pulse:
    lattice: Lattice
    indices: np.ndarray  # sorted linear indices of the support
    value: int

    @classmethod
    def from_cells(cls, lattice: Lattice, cells, value: int) -> Pulse:
        idx = np.sort(np.fromiter((lattice.index(c) for c in cells), dtype=np.int64))
        return cls(lattice, idx, int(value))

    @property
    def scale(self) -> int:
        return len(self.indices)

    @property
    def sign(self) -> int:
        return 1 if self.value > 0 else -1

    @property
    def support(self) -> tuple:
        cell = self.lattice.cell
        return tuple(cell(int(i)) for i in self.indices)

    def sort_key(self):
        return (self.scale, self.sign, int(self.indices[0]))

    def record(self) -> dict:
        return {
            "scale": self.scale,
            "sign": self.sign,
            "value": self.value,
            "cells": [list(c) for c in self.support],
        }

    def __eq__(self, other):
        if not isinstance(other, Pulse):
            return NotImplemented
        return (
            self.value == other.value
            and self.lattice == other.lattice
            and np.array_equal(self.indices, other.indices)
        )

    def __repr__(self):
        return f"Pulse({self.value:+d} on {list(self.support)})"


@dataclass
class Layer:
    n: int
    down_pulses: list[Pulse] = dc_field(default_factory=list)
    up_pulses: list[Pulse] = dc_field(default_factory=list)

    @property
    def gamma_minus(self) -> int:
        return len(self.down_pulses)

    @property
    def gamma_plus(self) -> int:
        return len(self.up_pulses)

    @property
    def pulses(self) -> list[Pulse]:
        return self.down_pulses + self.up_pulses

    @property
    def energy(self) -> int:
        return sum(abs(p.value) * p.scale for p in self.pulses)

    def __bool__(self):
        return bool(self.down_pulses or self.up_pulses)

    def _sort(self):
        self.down_pulses.sort(key=Pulse.sort_key)
        self.up_pulses.sort(key=Pulse.sort_key)
        return self


@dataclass
class DptResult:
    lattice: Lattice
    layers: list[Layer]  # layers[k] holds scale k + 1, for k + 1 = 1..N
    residual: int
    source_digest: str

    @property
    def N(self) -> int:
        return len(self.layers)

    def layer(self, n: int) -> Layer:
        if 1 <= n <= self.N:
            return self.layers[n - 1]
        return Layer(n)

    def pulses(self):
        """All pulses by (scale, down before up, smallest support index)."""
        for layer in self.layers:
            yield from layer.down_pulses
            yield from layer.up_pulses

    def summary(self) -> dict:
        return {
            "lattice": self.lattice.describe(),
            "source_digest": self.source_digest,
            "residual": self.residual,
            "N": self.N,
            "pulse_count": sum(l.gamma_minus + l.gamma_plus for l in self.layers),
            "layers": [
                {"n": n, "gamma_minus": gm, "gamma_plus": gp, "energy": e}
                for n, gm, gp, e in spectrum(self)
            ],
        }

    def canonical_bytes(self) -> bytes:
        lines = [json.dumps(self.summary(), sort_keys=True)]
        lines += [json.dumps(p.record(), sort_keys=True) for p in self.pulses()]
        return "\n".join(lines).encode()

    def __eq__(self, other):
        if not isinstance(other, DptResult):
            return NotImplemented
        return self.canonical_bytes() == other.canonical_bytes()


def source_digest(f: ScalarField) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(f.lattice.describe(), sort_keys=True).encode())
    h.update(np.ascontiguousarray(f.values, dtype="<i8").tobytes())
    return h.hexdigest()


def _terminal(f: ScalarField) -> bool:
    if f.lattice.zero_padded:
        return not f.values.any()
    return f.is_constant()


# -- reference engine --------------------------------------------------------


def check_no_small_extremal(f: ScalarField, n: int, zones=None) -> None:
    """Raise EngineInvariantError if ``f`` has an extremal flat zone smaller than n."""
    if zones is None:
        zones = flat_zones(f)
    for k in {z.size for z in zones if z.size < n}:
        for pol in (MIN, MAX):
            bad = extremal_zones(f, k, pol, zones)
            if bad:
                raise EngineInvariantError(
                    f"state entering scale {n} has a local {pol} set of size {k}: {list(bad[0].cells)}"
                )


def extract_layer(state: ScalarField, n: int) -> tuple[Layer, ScalarField]:
    """One scale of the transform, evaluated directly from the definitions.

    Returns the layer D_n and the smoothed state P_n(state).
    """
    zones = flat_zones(state)
    check_no_small_extremal(state, n, zones)
    lat = state.lattice
    layer = Layer(n)

    mins = extremal_zones(state, n, MIN, zones)
    vals = list(state.flat)
    for z in mins:
        target, _ = min_adjacent_witness(state, z.cells)
        for c in z.cells:
            vals[lat.index(c)] = target
        layer.down_pulses.append(Pulse.from_cells(lat, z.cells, z.value - target))
    mid = state.with_flat(vals) if mins else state

    maxs = extremal_zones(mid, n, MAX)
    vals = list(mid.flat)
    for z in maxs:
        target, _ = max_adjacent_witness(mid, z.cells)
        for c in z.cells:
            vals[lat.index(c)] = target
        layer.up_pulses.append(Pulse.from_cells(lat, z.cells, z.value - target))
    out = mid.with_flat(vals) if maxs else mid
    return layer._sort(), out


def decompose_naive(f: ScalarField) -> DptResult:
    """Reference engine: rescan flat zones from scratch for every n = 1, 2, ..."""
    state = f
    layers = []
    n = 0
    while not _terminal(state):
        n += 1
        if n > f.lattice.size:
            raise EngineInvariantError("decomposition did not terminate within the window size")
        layer, state = extract_layer(state, n)
        layers.append(layer)
    residual = int(state.values.flat[0]) if not f.lattice.zero_padded else 0
    return DptResult(f.lattice, layers, residual, source_digest(f))


# -- production engine -------------------------------------------------------


def _pulses(lat: Lattice, changes) -> list[Pulse]:
    return [Pulse(lat, np.sort(np.array(cells, dtype=np.int64)), old - new) for cells, old, new in changes]


def decompose(f: ScalarField, engine: str = "graph", rng: random.Random | None = None) -> DptResult:
    """Discrete pulse transform of ``f``.

    ``engine="graph"`` uses the zone graph with size buckets and skips scales
    that have no zone of that size; ``engine="naive"`` is the reference
    rescanning engine. ``rng`` shuffles the within-stage zone order (a test
    hook; the result must not depend on it).
    """
    if engine == "naive":
        return decompose_naive(f)
    if engine != "graph":
        raise ValueError(f"unknown engine {engine!r}")

    lat = f.lattice
    g = ZoneGraph(f)
    layers: list[Layer] = []

    def done():
        if g.zone_count != 1:
            return False
        return not lat.zero_padded or next(iter(g.value.values())) == 0

    n = 1
    while not done():
        k = g.next_size(n)
        if k is None or k > lat.size:
            raise EngineInvariantError("decomposition did not terminate within the window size")
        layers.extend(Layer(m) for m in range(n, k))
        n = k
        down = _pulses(lat, g.stage(n, MIN, rng))
        up = _pulses(lat, g.stage(n, MAX, rng))
        layers.append(Layer(n, down, up)._sort())
        n += 1

    while layers and not layers[-1]:
        layers.pop()
    residual = next(iter(g.value.values())) if not lat.zero_padded else 0
    return DptResult(lat, layers, int(residual), source_digest(f))


# -- synthesis ---------------------------------------------------------------


def reconstruct(r: DptResult, lo: int = 1, hi: int | None = None) -> ScalarField:
    """Sum of the pulses with lo <= scale <= hi.

    The residual constant is added only for the full band (lo == 1 and
    hi >= N).
    """
    if hi is None:
        hi = max(r.N, lo)
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid scale band {lo}:{hi}")
    out = np.zeros(r.lattice.size, dtype=np.int64)
    for layer in r.layers[lo - 1 : hi]:
        for p in layer.pulses:
            out[p.indices] += p.value
    if lo == 1 and hi >= r.N:
        out += r.residual
    return ScalarField(r.lattice, out)


def spectrum(r: DptResult) -> list[tuple[int, int, int, int]]:
    """Rows (n, gamma_minus, gamma_plus, energy) for every non-empty layer."""
    return [(l.n, l.gamma_minus, l.gamma_plus, l.energy) for l in r.layers if l]
