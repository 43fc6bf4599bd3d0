"""Orthogonal product-state sets on an n x n grid.

A set is described by a tiling of the grid: each tile occupies cells in a
single row or column (or one cell), and hosts as many mutually orthogonal
product states as it has cells. The nine-state 3x3 family is parameterized;
larger sets come from a recursive ring construction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import permutations
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidSetError, UnsupportedDimensionError
from .qcore import (
    ATOL_EXACT,
    ATOL_STATE,
    Ket,
    MeasurementBasis,
    basis_ket,
    states_equivalent,
    states_orthogonal,
    tensor,
)

_SQRT_HALF = 1.0 / math.sqrt(2.0)


def _unit_pair(x: complex, y: complex, names: str) -> None:
    s = abs(x) ** 2 + abs(y) ** 2
    if abs(s - 1.0) > ATOL_EXACT:
        raise ValueError(f"|{names[0]}|^2 + |{names[1]}|^2 = {s!r}, expected 1")


@dataclass(frozen=True)
class SetParameters:
    """Complex amplitudes (a..h) of the 3x3 family; each of the four pairs
    (a,b), (c,d), (e,f), (g,h) must have unit combined modulus."""

    a: complex
    b: complex
    c: complex
    d: complex
    e: complex
    f: complex
    g: complex
    h: complex

    def __post_init__(self) -> None:
        _unit_pair(self.a, self.b, "ab")
        _unit_pair(self.c, self.d, "cd")
        _unit_pair(self.e, self.f, "ef")
        _unit_pair(self.g, self.h, "gh")

    @classmethod
    def symmetric(cls) -> "SetParameters":
        """The balanced point: every amplitude 1/sqrt(2)."""
        return cls(*([complex(_SQRT_HALF)] * 8))

    def as_tuple(self) -> tuple[complex, ...]:
        return (self.a, self.b, self.c, self.d, self.e, self.f, self.g, self.h)


@dataclass(frozen=True, eq=False)
class Tile:
    """A run of grid cells in one row or column, hosting one orthonormal
    family of product states.

    cells are (a, b) grid coordinates in host order; amplitudes[k, t] is the
    weight of hosted state k on cells[t]; state_indices[k] is that state's
    label in the full set. For orientation "row" all cells share a ==
    fixed_index; for "col" all share b == fixed_index; a singleton has one
    cell and fixed_index equal to its row.
    """

    orientation: str
    fixed_index: int
    cells: tuple[tuple[int, int], ...]
    amplitudes: np.ndarray
    state_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.orientation not in ("row", "col", "singleton"):
            raise ValueError(f"unknown tile orientation {self.orientation!r}")
        cells = tuple((int(a), int(b)) for a, b in self.cells)
        object.__setattr__(self, "cells", cells)
        if len(set(cells)) != len(cells):
            raise ValueError("tile cells must be distinct")
        if not cells:
            raise ValueError("tile needs at least one cell")
        if self.orientation == "singleton":
            if len(cells) != 1:
                raise ValueError("singleton tile must have exactly one cell")
            if self.fixed_index != cells[0][0]:
                raise ValueError("singleton fixed_index must be its row index")
        elif self.orientation == "row":
            if any(a != self.fixed_index for a, _ in cells):
                raise ValueError("row tile cells must share the fixed row index")
        else:
            if any(b != self.fixed_index for _, b in cells):
                raise ValueError("col tile cells must share the fixed column index")
        amps = np.array(self.amplitudes, dtype=np.complex128)
        length = len(cells)
        if amps.shape != (length, length):
            raise ValueError(f"amplitude matrix must be {length}x{length}")
        gram = amps.conj() @ amps.T
        if not np.allclose(gram, np.eye(length), atol=ATOL_EXACT, rtol=0.0):
            raise ValueError("tile amplitude matrix must be unitary")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        indices = tuple(int(k) for k in self.state_indices)
        object.__setattr__(self, "state_indices", indices)
        if len(indices) != length or len(set(indices)) != length:
            raise ValueError("tile must host exactly one state label per cell")

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True, eq=False)
class DominoLayout:
    """A tiling of the n x n grid by row/column runs and singletons."""

    n: int
    tiles: tuple[Tile, ...]

    def __post_init__(self) -> None:
        n = int(self.n)
        if n < 2:
            raise ValueError("layout dimension must be at least 2")
        object.__setattr__(self, "n", n)
        tiles = tuple(self.tiles)
        object.__setattr__(self, "tiles", tiles)
        covered: set[tuple[int, int]] = set()
        labels: set[int] = set()
        for tile in tiles:
            if len(tile) > 1 and len(tile) > n - 1:
                raise ValueError("a multi-cell tile may span at most n-1 cells")
            for a, b in tile.cells:
                if not (0 <= a < n and 0 <= b < n):
                    raise ValueError(f"cell ({a}, {b}) outside the {n}x{n} grid")
                if (a, b) in covered:
                    raise ValueError(f"cell ({a}, {b}) covered twice")
                covered.add((a, b))
            labels.update(tile.state_indices)
        if len(covered) != n * n:
            raise ValueError("tiles must cover the whole grid")
        if labels != set(range(n * n)):
            raise ValueError("hosted state labels must be exactly 0..n^2-1")


@dataclass(frozen=True, eq=False)
class ProductState:
    """One labeled product state: particle A carries ket_a, particle B ket_b."""

    index: int
    ket_a: Ket
    ket_b: Ket

    def joint(self) -> Ket:
        return tensor(self.ket_a, self.ket_b)


def states_from_tiles(n: int, tiles: Sequence[Tile]) -> tuple[ProductState, ...]:
    """Realize every tile's hosted states as explicit product states."""
    out: dict[int, ProductState] = {}
    for tile in tiles:
        for k, label in enumerate(tile.state_indices):
            spread = np.zeros(n, dtype=np.complex128)
            if tile.orientation == "row":
                for t, (_, b) in enumerate(tile.cells):
                    spread[b] = tile.amplitudes[k, t]
                ket_a = basis_ket(n, tile.fixed_index)
                ket_b = Ket(spread)
            elif tile.orientation == "col":
                for t, (a, _) in enumerate(tile.cells):
                    spread[a] = tile.amplitudes[k, t]
                ket_a = Ket(spread)
                ket_b = basis_ket(n, tile.fixed_index)
            else:
                a, b = tile.cells[0]
                phase = tile.amplitudes[0, 0]
                spread[b] = phase
                ket_a = basis_ket(n, a)
                ket_b = Ket(spread)
            out[label] = ProductState(label, ket_a, ket_b)
    return tuple(out[i] for i in sorted(out))


class StateSet:
    """A complete orthogonal set of n^2 product states plus its layout."""

    __slots__ = ("states", "layout", "joint_matrix")

    def __init__(self, states: Sequence[ProductState], layout: DominoLayout):
        states = tuple(states)
        n = layout.n
        if len(states) != n * n:
            raise InvalidSetError(f"expected {n * n} states, got {len(states)}")
        for pos, st in enumerate(states):
            if st.index != pos:
                raise InvalidSetError("states must be listed in label order")
            if st.ket_a.dim != n or st.ket_b.dim != n:
                raise InvalidSetError("subsystem dimension must match the layout")
        joint = np.stack([st.joint().amps for st in states])
        gram = joint.conj() @ joint.T
        if not np.allclose(gram, np.eye(n * n), atol=ATOL_EXACT, rtol=0.0):
            raise InvalidSetError("joint states must form a complete orthonormal set")
        joint.setflags(write=False)
        self._check_layout_consistency(states, layout)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "joint_matrix", joint)

    def __setattr__(self, name: str, value) -> None:
        raise AttributeError("StateSet is immutable")

    @staticmethod
    def _check_layout_consistency(states: Sequence[ProductState], layout: DominoLayout) -> None:
        # Each hosted state must live on its tile's cells (up to global phase).
        rebuilt = states_from_tiles(layout.n, layout.tiles)
        for st, ref in zip(states, rebuilt):
            if not (
                states_equivalent(st.ket_a, ref.ket_a, ATOL_STATE)
                and states_equivalent(st.ket_b, ref.ket_b, ATOL_STATE)
            ):
                raise InvalidSetError(f"state {st.index} does not match its tile")

    @property
    def n(self) -> int:
        return self.layout.n

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[ProductState]:
        return iter(self.states)

    def __getitem__(self, index: int) -> ProductState:
        return self.states[index]


def _pair_tile(
    orientation: str,
    fixed: int,
    cells: tuple[tuple[int, int], tuple[int, int]],
    x: complex,
    y: complex,
    labels: tuple[int, int],
) -> Tile:
    amps = np.array([[x, y], [np.conj(y), -np.conj(x)]])
    return Tile(orientation, fixed, cells, amps, labels)


def build_3x3(params: SetParameters | None = None) -> StateSet:
    """The parameterized nine-state set on the 3x3 grid.

    Four two-cell tiles wind around the corner cell (0, 0): a row pair at
    a=1, a column pair at b=2, a row pair at a=2 and a column pair at b=1,
    each carrying one unit pair of the parameters.
    """
    p = params if params is not None else SetParameters.symmetric()
    tiles = (
        _pair_tile("row", 1, ((1, 1), (1, 0)), p.a, p.b, (0, 1)),
        _pair_tile("col", 2, ((1, 2), (0, 2)), p.c, p.d, (2, 3)),
        _pair_tile("row", 2, ((2, 0), (2, 2)), p.e, p.f, (4, 5)),
        _pair_tile("col", 1, ((0, 1), (2, 1)), p.g, p.h, (6, 7)),
        Tile("singleton", 0, ((0, 0),), np.array([[1.0]]), (8,)),
    )
    layout = DominoLayout(3, tiles)
    return StateSet(states_from_tiles(3, tiles), layout)


def _fourier_amps(length: int) -> np.ndarray:
    k = np.arange(length)
    return np.exp(2j * np.pi * np.outer(k, k) / length) / math.sqrt(length)


def _shift_tile(tile: Tile, offset: int) -> Tile:
    cells = tuple((a + offset, b + offset) for a, b in tile.cells)
    return Tile(tile.orientation, tile.fixed_index + offset, cells, tile.amplitudes, tile.state_indices)


def _relabel_tile(tile: Tile, new_labels: Sequence[int]) -> Tile:
    return Tile(tile.orientation, tile.fixed_index, tile.cells, tile.amplitudes, tuple(new_labels))


def _symmetric_tiles(n: int) -> tuple[Tile, ...]:
    if n == 3:
        h = _SQRT_HALF
        return (
            _pair_tile("row", 0, ((0, 0), (0, 1)), h, h, (0, 1)),
            _pair_tile("col", 2, ((0, 2), (1, 2)), h, h, (2, 3)),
            _pair_tile("row", 2, ((2, 1), (2, 2)), h, h, (4, 5)),
            _pair_tile("col", 0, ((1, 0), (2, 0)), h, h, (6, 7)),
            Tile("singleton", 1, ((1, 1),), np.array([[1.0]]), (8,)),
        )
    if n == 4:
        inner_tiles = tuple(
            Tile("singleton", a, ((a, b),), np.array([[1.0]]), (2 * (a - 1) + (b - 1),))
            for a in (1, 2)
            for b in (1, 2)
        )
        base = 4
    else:
        inner_tiles = tuple(_shift_tile(t, 1) for t in _symmetric_tiles(n - 2))
        base = (n - 2) ** 2
    length = n - 1
    amps = _fourier_amps(length)
    ring = (
        Tile("row", 0, tuple((0, b) for b in range(n - 1)), amps,
             tuple(range(base, base + length))),
        Tile("col", n - 1, tuple((a, n - 1) for a in range(n - 1)), amps,
             tuple(range(base + length, base + 2 * length))),
        Tile("row", n - 1, tuple((n - 1, b) for b in range(1, n)), amps,
             tuple(range(base + 2 * length, base + 3 * length))),
        Tile("col", 0, tuple((a, 0) for a in range(1, n)), amps,
             tuple(range(base + 3 * length, base + 4 * length))),
    )
    return inner_tiles + ring


def build_symmetric(n: int) -> StateSet:
    """Complete orthogonal product set on the n x n grid (n >= 3), built by
    wrapping a ring of four length-(n-1) tiles around the (n-2) construction.

    Ring tiles carry discrete-Fourier amplitudes; the 3x3 core is the
    balanced nine-state set and the 4x4 core is a 2x2 block of basis states
    inside its ring. The layout maps to itself under a quarter turn.
    """
    if n < 3:
        raise UnsupportedDimensionError(
            f"no such construction for dimension {n}: a complete orthogonal "
            "product set needs n >= 3"
        )
    tiles = _symmetric_tiles(n)
    layout = DominoLayout(n, tiles)
    return StateSet(states_from_tiles(n, tiles), layout)


@dataclass(frozen=True)
class ConditionReport:
    """Per-state distinguishability checks: ok_a[i] means some other state's
    A-part is neither equivalent nor orthogonal to state i's A-part."""

    n: int
    ok_a: tuple[bool, ...]
    ok_b: tuple[bool, ...]

    @property
    def passed(self) -> bool:
        return all(self.ok_a) and all(self.ok_b)

    def failures(self) -> tuple[tuple[int, str], ...]:
        out = [(i, "A") for i, ok in enumerate(self.ok_a) if not ok]
        out += [(i, "B") for i, ok in enumerate(self.ok_b) if not ok]
        return tuple(sorted(out))


def _has_oblique_partner(kets: Sequence[Ket], i: int) -> bool:
    me = kets[i]
    for j, other in enumerate(kets):
        if j == i:
            continue
        if not states_equivalent(me, other) and not states_orthogonal(me, other):
            return True
    return False


def check_conditions(state_set: StateSet) -> ConditionReport:
    """Check that no single-particle measurement can pin down any state:
    every state must have, on each subsystem, a partner that is neither
    equivalent nor orthogonal to it."""
    kets_a = [st.ket_a for st in state_set]
    kets_b = [st.ket_b for st in state_set]
    ok_a = tuple(_has_oblique_partner(kets_a, i) for i in range(len(kets_a)))
    ok_b = tuple(_has_oblique_partner(kets_b, i) for i in range(len(kets_b)))
    return ConditionReport(state_set.n, ok_a, ok_b)


def _tile_cellsets(layout: DominoLayout) -> list[frozenset[tuple[int, int]]]:
    return [frozenset(t.cells) for t in layout.tiles]


def _invariant_under(cellsets: list[frozenset[tuple[int, int]]], image) -> bool:
    seen = set(cellsets)
    return all(frozenset(image(c) for c in tile) in seen for tile in cellsets)


def _cycle_lengths(perm: Sequence[int]) -> list[int]:
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        out.append(length)
    return sorted(out)


def _search_relabeled_rotation(layout: DominoLayout) -> bool:
    # Look for axis relabelings under which a quarter turn fixes the tiling.
    # Any such map acts on original cells as (i, j) -> (alpha(j), beta(i))
    # where alpha o beta must have the cycle structure of an index reversal.
    n = layout.n
    rows: list[tuple[int, frozenset[int]]] = []
    cols: list[tuple[int, frozenset[int]]] = []
    singles: set[tuple[int, int]] = set()
    for tile in layout.tiles:
        if len(tile) == 1:
            singles.add(tile.cells[0])
        elif tile.orientation == "row":
            rows.append((tile.fixed_index, frozenset(b for _, b in tile.cells)))
        else:
            cols.append((tile.fixed_index, frozenset(a for a, _ in tile.cells)))
    if len(rows) != len(cols):
        return False

    reversal_cycles = [1] * (n % 2) + [2] * (n // 2)
    single_rows: dict[int, set[int]] = {}
    for i, j in singles:
        single_rows.setdefault(i, set()).add(j)

    full = frozenset(range(n))
    for alpha in permutations(range(n)):
        candidates: list[frozenset[int]] = [full] * n
        feasible = True
        for i, free_b in rows:
            image = frozenset(alpha[b] for b in free_b)
            targets = frozenset(b for b, free_a in cols if free_a == image)
            if not targets:
                feasible = False
                break
            candidates[i] = candidates[i] & targets
        if not feasible:
            continue
        for b, free_a in cols:
            matches = [free for i2, free in rows if i2 == alpha[b] and len(free) == len(free_a)]
            if not matches:
                feasible = False
                break
            allowed = frozenset().union(*matches)
            for a in free_a:
                candidates[a] = candidates[a] & allowed
        if not feasible:
            continue
        for i, j in singles:
            targets = single_rows.get(alpha[j], set())
            candidates[i] = candidates[i] & frozenset(targets)
        if any(not c for c in candidates):
            continue
        if _complete_beta(layout, alpha, candidates, reversal_cycles):
            return True
    return False


def _complete_beta(
    layout: DominoLayout,
    alpha: Sequence[int],
    candidates: list[frozenset[int]],
    reversal_cycles: list[int],
) -> bool:
    n = layout.n
    order = sorted(range(n), key=lambda i: len(candidates[i]))
    beta: list[int] = [-1] * n
    used: set[int] = set()
    cellsets = _tile_cellsets(layout)

    def assign(pos: int) -> bool:
        if pos == n:
            image = lambda cell: (alpha[cell[1]], beta[cell[0]])
            if not _invariant_under(cellsets, image):
                return False
            combined = [alpha[beta[x]] for x in range(n)]
            return _cycle_lengths(combined) == reversal_cycles
        i = order[pos]
        for value in sorted(candidates[i] - used):
            beta[i] = value
            used.add(value)
            if assign(pos + 1):
                return True
            used.discard(value)
        beta[i] = -1
        return False

    return assign(0)


def is_four_fold_symmetric(layout: DominoLayout) -> bool:
    """True when the tiling maps to itself under a quarter turn of the grid,
    directly or after independently relabeling the two axes."""
    n = layout.n
    cellsets = _tile_cellsets(layout)
    if _invariant_under(cellsets, lambda cell: (cell[1], n - 1 - cell[0])):
        return True
    return _search_relabeled_rotation(layout)


def bob_basis(state_set: StateSet) -> MeasurementBasis:
    """The joint measurement that identifies every state in the set."""
    return MeasurementBasis([st.joint() for st in state_set])


_FORMAT_TAG = "opqkd-stateset-1"


def _complex_pairs(arr: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in arr]


def stateset_to_text(state_set: StateSet) -> str:
    """Serialize a state set (states plus layout) as structured text."""
    doc = {
        "format": _FORMAT_TAG,
        "n": state_set.n,
        "states": [
            {
                "index": st.index,
                "ket_a": _complex_pairs(st.ket_a.amps),
                "ket_b": _complex_pairs(st.ket_b.amps),
            }
            for st in state_set
        ],
        "tiles": [
            {
                "orientation": t.orientation,
                "fixed_index": t.fixed_index,
                "cells": [list(c) for c in t.cells],
                "state_indices": list(t.state_indices),
                "amplitudes": [_complex_pairs(row) for row in t.amplitudes],
            }
            for t in state_set.layout.tiles
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _from_pairs(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def stateset_from_text(text: str) -> StateSet:
    """Rebuild a state set from its serialized form, re-running validation."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSetError(f"unparseable state-set text: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT_TAG:
        raise InvalidSetError("not a recognized state-set document")
    n = int(doc["n"])
    tiles = tuple(
        Tile(
            rec["orientation"],
            int(rec["fixed_index"]),
            tuple((int(a), int(b)) for a, b in rec["cells"]),
            np.array([_from_pairs(row) for row in rec["amplitudes"]]),
            tuple(int(k) for k in rec["state_indices"]),
        )
        for rec in doc["tiles"]
    )
    layout = DominoLayout(n, tiles)
    states = tuple(
        ProductState(int(rec["index"]), Ket(_from_pairs(rec["ket_a"])), Ket(_from_pairs(rec["ket_b"])))
        for rec in sorted(doc["states"], key=lambda r: int(r["index"]))
    )
    return StateSet(states, layout)
