"""Integer fields on a lattice, flat zones and local extremal sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import DOMAIN_ONLY, FACET, OUTSIDE, ZERO_PADDED, Lattice

MIN = "min"
MAX = "max"


class ScalarField:
    """An int64 field over a lattice, zero outside the window in zero_padded mode.

    Fields are treated as values: ``values`` is a read-only array and every
    operation returns a new field.
    """

    __slots__ = ("lattice", "values", "_flat")

    def __init__(self, lattice: Lattice, values):
        arr = np.array(values, dtype=np.int64).reshape(lattice.extents)
        arr.setflags(write=False)
        self.lattice = lattice
        self.values = arr
        self._flat = None

    @classmethod
    def from_array(cls, values, connectivity: str = FACET, boundary: str = ZERO_PADDED):
        arr = np.asarray(values)
        if not np.issubdtype(arr.dtype, np.integer):
            raise TypeError(f"integer values required, got {arr.dtype}")
        return cls(Lattice(arr.shape, connectivity, boundary), arr)

    @classmethod
    def zeros(cls, lattice: Lattice):
        return cls(lattice, np.zeros(lattice.extents, dtype=np.int64))

    @property
    def flat(self) -> list[int]:
        """Values as a Python list in row-major order (cached)."""
        if self._flat is None:
            self._flat = self.values.ravel().tolist()
        return self._flat

    def __getitem__(self, c) -> int:
        if c is OUTSIDE:
            if not self.lattice.zero_padded:
                raise ValueError("OUTSIDE has no value in domain_only mode")
            return 0
        return self.flat[self.lattice.index(c)]

    def with_flat(self, flat) -> ScalarField:
        return ScalarField(self.lattice, np.asarray(flat, dtype=np.int64))

    def support(self) -> tuple:
        return tuple(self.lattice.cell(int(i)) for i in np.flatnonzero(self.values))

    def is_constant(self) -> bool:
        return bool((self.values == self.values.flat[0]).all())

    def _combine(self, other, op):
        if not isinstance(other, ScalarField):
            return NotImplemented
        if other.lattice != self.lattice:
            raise ValueError("fields live on different lattices")
        return ScalarField(self.lattice, op(self.values, other.values))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return ScalarField(self.lattice, -self.values)

    def __le__(self, other):
        return bool((self.values <= other.values).all())

    def __ge__(self, other):
        return bool((self.values >= other.values).all())

    def __eq__(self, other):
        if not isinstance(other, ScalarField):
            return NotImplemented
        return self.lattice == other.lattice and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.lattice, self.values.tobytes()))

    def __repr__(self):
        return f"ScalarField({self.values.tolist()}, {self.lattice.connectivity}, {self.lattice.boundary})"


@dataclass(frozen=True)
class Zone:
    id: int  # smallest member linear index
    cells: tuple
    value: int
    neighbor_zone_ids: frozenset
    touches_outside: bool

    @property
    def size(self) -> int:
        return len(self.cells)


def zone_labels(f: ScalarField) -> list[int]:
    """Per-cell zone id, where a zone id is the smallest linear index in the zone."""
    table = f.lattice.neighbor_table
    vals = f.flat
    labels = [-1] * len(vals)
    for start in range(len(vals)):
        if labels[start] >= 0:
            continue
        v = vals[start]
        labels[start] = start
        stack = [start]
        while stack:
            i = stack.pop()
            for j in table[i]:
                if labels[j] < 0 and vals[j] == v:
                    labels[j] = start
                    stack.append(j)
    return labels


def flat_zones(f: ScalarField) -> list[Zone]:
    lat = f.lattice
    labels = zone_labels(f)
    members: dict[int, list[int]] = {}
    nbrs: dict[int, set[int]] = {}
    outside: dict[int, bool] = {}
    table = lat.neighbor_table
    border = lat.border
    for i, z in enumerate(labels):
        members.setdefault(z, []).append(i)
        s = nbrs.setdefault(z, set())
        for j in table[i]:
            if labels[j] != z:
                s.add(labels[j])
        outside[z] = outside.get(z, False) or border[i]
    vals = f.flat
    return [
        Zone(
            id=z,
            cells=tuple(lat.cell(i) for i in members[z]),
            value=vals[z],
            neighbor_zone_ids=frozenset(nbrs[z]),
            touches_outside=outside[z],
        )
        for z in sorted(members)
    ]


def _adjacent_values(f: ScalarField, cells) -> tuple[list[int], list, bool]:
    lat = f.lattice
    idx = {lat.index(c) for c in cells}
    if not idx:
        raise ValueError("empty cell set")
    adj, outside = lat._adjacency_indices(idx)
    adj = sorted(adj)
    vals = f.flat
    return [vals[j] for j in adj], [lat.cell(j) for j in adj], outside


def _extremal(f: ScalarField, cells, polarity: str) -> bool:
    if not f.lattice.is_connected(cells):
        raise ValueError("local extremal sets must be connected and non-empty")
    inner = [f[c] for c in cells]
    adj_vals, _, outside = _adjacent_values(f, cells)
    if outside:
        adj_vals.append(0)
    if not adj_vals:
        # the whole window in domain_only mode has nothing to compare against
        return False
    if polarity == MIN:
        return max(inner) < min(adj_vals)
    return min(inner) > max(adj_vals)


def is_local_min_set(f: ScalarField, cells) -> bool:
    return _extremal(f, cells, MIN)


def is_local_max_set(f: ScalarField, cells) -> bool:
    return _extremal(f, cells, MAX)


def _zone_is_extremal(z: Zone, vals_by_id: dict[int, int], polarity: str) -> bool:
    adj = [vals_by_id[k] for k in z.neighbor_zone_ids]
    if z.touches_outside:
        adj.append(0)
    if not adj:
        return False
    if polarity == MIN:
        return z.value < min(adj)
    return z.value > max(adj)


def extremal_zones(f: ScalarField, n: int, polarity: str, zones: list[Zone] | None = None) -> list[Zone]:
    """Flat zones of exactly ``n`` cells that are local min (or max) sets, by zone id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if polarity not in (MIN, MAX):
        raise ValueError(f"polarity must be 'min' or 'max', got {polarity!r}")
    if zones is None:
        zones = flat_zones(f)
    vals_by_id = {z.id: z.value for z in zones}
    return [z for z in zones if z.size == n and _zone_is_extremal(z, vals_by_id, polarity)]


def _adjacent_witness(f: ScalarField, cells, polarity: str):
    vals, adj, outside = _adjacent_values(f, cells)
    if not vals and not outside:
        raise ValueError("set has no adjacent cells (whole window in domain_only mode)")
    best = None
    witness = None
    for v, c in zip(vals, adj):
        if best is None or (v < best if polarity == MIN else v > best):
            best, witness = v, c
    if outside and (best is None or (0 < best if polarity == MIN else 0 > best)):
        best, witness = 0, OUTSIDE
    return best, witness


def min_adjacent_witness(f: ScalarField, cells):
    """Smallest value on adj(cells) and the cell attaining it.

    Ties go to the smallest linear index; OUTSIDE (value 0) is reported only
    when no window cell attains the minimum.
    """
    return _adjacent_witness(f, cells, MIN)


def max_adjacent_witness(f: ScalarField, cells):
    return _adjacent_witness(f, cells, MAX)


__all__ = [
    "DOMAIN_ONLY",
    "MAX",
    "MIN",
    "OUTSIDE",
    "ScalarField",
    "ZERO_PADDED",
    "Zone",
    "extremal_zones",
    "flat_zones",
    "is_local_max_set",
    "is_local_min_set",
    "max_adjacent_witness",
    "min_adjacent_witness",
    "zone_labels",
]
