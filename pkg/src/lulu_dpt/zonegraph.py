"""Flat-zone graph with union-find merging.

This is the production machinery behind the fast LULU operators and the
DPT engine. Zones are kept in size buckets so a stage at scale ``k`` only
inspects zones of exactly ``k`` cells.
"""

from __future__ import annotations

import random

from .field import MAX, MIN, ScalarField, zone_labels


class ZoneGraph:
    def __init__(self, f: ScalarField):
        lat = f.lattice
        self.lattice = lat
        labels = zone_labels(f)
        vals = f.flat
        table = lat.neighbor_table
        border = lat.border

        self.parent = labels
        self.value: dict[int, int] = {}
        self.cells: dict[int, list[int]] = {}
        self.nbrs: dict[int, set[int]] = {}
        self.outside: dict[int, bool] = {}
        for i, z in enumerate(labels):
            if z == i:
                self.value[z] = vals[i]
                self.cells[z] = [i]
                self.nbrs[z] = set()
                self.outside[z] = border[i]
            else:
                self.cells[z].append(i)
                if border[i]:
                    self.outside[z] = True
            s = self.nbrs[z]
            for j in table[i]:
                lj = labels[j]
                if lj != z:
                    s.add(lj)

        self.buckets: dict[int, set[int]] = {}
        for z, cs in self.cells.items():
            self.buckets.setdefault(len(cs), set()).add(z)

    def find(self, i: int) -> int:
        parent = self.parent
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    @property
    def zone_count(self) -> int:
        return len(self.value)

    def sizes(self) -> list[int]:
        return sorted(k for k, b in self.buckets.items() if b)

    def next_size(self, k: int) -> int | None:
        """Smallest occupied bucket size >= k."""
        live = [s for s, b in self.buckets.items() if b and s >= k]
        return min(live) if live else None

    def target(self, z: int, polarity: str) -> int | None:
        """New value if zone ``z`` is a local min (max) set, else None."""
        v = self.value[z]
        value = self.value
        if polarity == MIN:
            best = 0 if self.outside[z] else None
            for nb in self.nbrs[z]:
                w = value[nb]
                if w <= v:
                    return None
                if best is None or w < best:
                    best = w
            if best is None or best <= v:
                return None
            return best
        best = 0 if self.outside[z] else None
        for nb in self.nbrs[z]:
            w = value[nb]
            if w >= v:
                return None
            if best is None or w > best:
                best = w
        if best is None or best >= v:
            return None
        return best

    def stage(self, k: int, polarity: str, rng: random.Random | None = None):
        """Move every extremal zone of size ``k`` to its adjacent extreme value.

        Targets are read from the pre-stage state and then committed. Returns
        ``(cells, old_value, new_value)`` per changed zone; ``cells`` is the
        zone's cell list at the time of the change (not sorted).
        """
        bucket = self.buckets.get(k)
        if not bucket:
            return []
        cands = sorted(bucket)
        if rng is not None:
            rng.shuffle(cands)
        plan = []
        for z in cands:
            t = self.target(z, polarity)
            if t is not None:
                plan.append((z, t))
        changes = []
        for z, t in plan:
            changes.append((list(self.cells[z]), self.value[z], t))
            self._merge(z, t)
        return changes

    def _merge(self, z: int, v: int) -> int:
        value = self.value
        group = [z] + [nb for nb in self.nbrs[z] if value[nb] == v]
        rep = max(group, key=lambda g: (len(self.cells[g]), -g))
        gset = set(group)
        for g in group:
            self.buckets[len(self.cells[g])].discard(g)
        rep_nbrs = self.nbrs[rep]
        rep_cells = self.cells[rep]
        for g in group:
            if g == rep:
                continue
            for nb in self.nbrs.pop(g):
                if nb in gset:
                    continue
                s = self.nbrs[nb]
                s.discard(g)
                s.add(rep)
                rep_nbrs.add(nb)
            rep_cells.extend(self.cells.pop(g))
            if self.outside.pop(g):
                self.outside[rep] = True
            del value[g]
            self.parent[g] = rep
        rep_nbrs.difference_update(gset)
        value[rep] = v
        self.buckets.setdefault(len(rep_cells), set()).add(rep)
        return rep

    def to_flat(self) -> list[int]:
        out = [0] * self.lattice.size
        for z, cs in self.cells.items():
            v = self.value[z]
            for i in cs:
                out[i] = v
        return out

    def to_field(self) -> ScalarField:
        return ScalarField(self.lattice, self.to_flat())
