"""Finite windows of Z^d with graph adjacency.

Cells are d-tuples of ints. Inside the window every cell also has a
row-major linear index, which is the canonical ordering used everywhere.
In ``zero_padded`` mode the complement of the window is one virtual region
(``OUTSIDE``) of value 0 that touches every border cell.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

FACET = "facet"
FULL = "full"
ZERO_PADDED = "zero_padded"
DOMAIN_ONLY = "domain_only"

CONNECTIVITIES = (FACET, FULL)
BOUNDARIES = (ZERO_PADDED, DOMAIN_ONLY)

# connected_supersets is exponential; these bound its use to desk scale
MAX_ENUM_SIZE = 6
MAX_ENUM_CELLS = 64


class ResourceGuardError(RuntimeError):
    pass


class _Outside:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OUTSIDE"

    def __reduce__(self):
        return (_Outside, ())


OUTSIDE = _Outside()


@dataclass(frozen=True)
class Lattice:
    extents: tuple[int, ...]
    connectivity: str = FACET
    boundary: str = ZERO_PADDED

    def __post_init__(self):
        ext = tuple(int(e) for e in self.extents)
        object.__setattr__(self, "extents", ext)
        if not ext or any(e < 1 for e in ext):
            raise ValueError(f"extents must be positive, got {ext}")
        if self.connectivity not in CONNECTIVITIES:
            raise ValueError(f"unknown connectivity {self.connectivity!r}")
        if self.connectivity == FULL and len(ext) != 2:
            raise ValueError("full connectivity is only defined for d=2")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary mode {self.boundary!r}")

    @property
    def dims(self) -> int:
        return len(self.extents)

    @property
    def size(self) -> int:
        n = 1
        for e in self.extents:
            n *= e
        return n

    @property
    def zero_padded(self) -> bool:
        return self.boundary == ZERO_PADDED

    @cached_property
    def offsets(self) -> tuple[tuple[int, ...], ...]:
        if self.connectivity == FULL:
            return tuple(o for o in itertools.product((-1, 0, 1), repeat=2) if o != (0, 0))
        out = []
        for axis in range(self.dims):
            for step in (-1, 1):
                o = [0] * self.dims
                o[axis] = step
                out.append(tuple(o))
        return tuple(out)

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        strides = []
        acc = 1
        for e in reversed(self.extents):
            strides.append(acc)
            acc *= e
        return tuple(reversed(strides))

    def contains(self, c) -> bool:
        return (
            isinstance(c, tuple)
            and len(c) == self.dims
            and all(0 <= x < e for x, e in zip(c, self.extents))
        )

    def _check(self, c) -> tuple[int, ...]:
        c = tuple(int(x) for x in c)
        if not self.contains(c):
            raise ValueError(f"cell {c} is outside the window {self.extents}")
        return c

    def index(self, c) -> int:
        c = self._check(c)
        return sum(x * s for x, s in zip(c, self._strides))

    def cell(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.size:
            raise ValueError(f"linear index {i} out of range")
        out = []
        for s in self._strides:
            q, i = divmod(i, s)
            out.append(q)
        return tuple(out)

    @cached_property
    def neighbor_table(self) -> tuple[tuple[int, ...], ...]:
        """In-window neighbor linear indices of every cell."""
        table = []
        for i in range(self.size):
            c = self.cell(i)
            nbrs = []
            for o in self.offsets:
                y = tuple(a + b for a, b in zip(c, o))
                if self.contains(y):
                    nbrs.append(self.index(y))
            table.append(tuple(sorted(nbrs)))
        return tuple(table)

    @cached_property
    def border(self) -> tuple[bool, ...]:
        """True for cells adjacent to OUTSIDE (always False in domain_only mode)."""
        if not self.zero_padded:
            return (False,) * self.size
        full = len(self.offsets)
        return tuple(len(nb) < full for nb in self.neighbor_table)

    def sort_cells(self, cells: Iterable) -> tuple[tuple[int, ...], ...]:
        uniq = {self._check(c) for c in cells}
        return tuple(sorted(uniq, key=self.index))

    def neighbors(self, c) -> tuple[tuple[tuple[int, ...], ...], bool]:
        """Adjacent window cells of ``c`` and whether ``c`` borders OUTSIDE."""
        i = self.index(c)
        return tuple(self.cell(j) for j in self.neighbor_table[i]), self.border[i]

    def adjacency_set(self, cells: Iterable) -> tuple[tuple[tuple[int, ...], ...], bool]:
        idx = {self.index(c) for c in cells}
        if not idx:
            raise ValueError("adjacency_set of an empty set")
        adj, outside = self._adjacency_indices(idx)
        return tuple(self.cell(j) for j in sorted(adj)), outside

    def _adjacency_indices(self, idx: set[int]) -> tuple[set[int], bool]:
        table = self.neighbor_table
        border = self.border
        adj = set()
        outside = False
        for i in idx:
            adj.update(table[i])
            outside = outside or border[i]
        adj.difference_update(idx)
        return adj, outside

    def is_connected(self, cells: Iterable) -> bool:
        idx = {self.index(c) for c in cells}
        if not idx:
            return False
        table = self.neighbor_table
        start = next(iter(idx))
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in table[i]:
                if j in idx and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == len(idx)

    def connected_supersets(self, c, size: int, halo: bool | None = None) -> list[tuple]:
        """Every connected set of exactly ``size`` cells containing ``c``.

        With ``halo`` (default: the zero_padded mode) sets may leave the window;
        cells outside carry value 0. A halo of depth ``size - 1`` reaches every
        such set, so nothing is truncated.
        """
        c = self._check(c)
        if size < 1:
            raise ValueError("size must be >= 1")
        if size > MAX_ENUM_SIZE or self.size > MAX_ENUM_CELLS:
            raise ResourceGuardError(
                f"enumeration of {size}-sets on {self.size} cells exceeds desk-scale bounds"
            )
        if halo is None:
            halo = self.zero_padded

        if halo:
            def nbrs(x):
                return [tuple(a + b for a, b in zip(x, o)) for o in self.offsets]
        else:
            def nbrs(x):
                out = []
                for o in self.offsets:
                    y = tuple(a + b for a, b in zip(x, o))
                    if self.contains(y):
                        out.append(y)
                return out

        layer = {frozenset([c])}
        for _ in range(size - 1):
            grown = set()
            for s in layer:
                for x in s:
                    for y in nbrs(x):
                        if y not in s:
                            grown.add(s | {y})
            layer = grown
        return sorted(tuple(sorted(s)) for s in layer)

    def describe(self) -> dict:
        return {
            "extents": list(self.extents),
            "connectivity": self.connectivity,
            "boundary": self.boundary,
        }
