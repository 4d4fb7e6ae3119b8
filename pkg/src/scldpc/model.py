"""Code model: base graphs, edge-spreading schemes, and matrix assembly.

A base code is a small binary matrix (all ones by default) whose Tanner graph
gets *unwrapped* into a spatially coupled chain and then *lifted* into a
quasi-cyclic parity-check matrix:

  1. Edge spreading: every base edge (i, j) is assigned a component index
     ``P(i, j)`` drawn from the spreading pattern ``(a_0 < a_1 < ... < a_t)``
     with ``a_t = m`` (the coupling memory).  Component matrix ``H_k`` keeps
     exactly the ones with ``P(i, j) = k``, so ``H_0 + ... + H_m`` restores the
     base matrix.
  2. Coupling: one replica is the vertical stack ``[H_0; H_1; ...; H_m]``.
     ``L`` replicas are placed side by side, each shifted down by one block
     row, giving a ``gamma*(L+m) x kappa*L`` protograph.
  3. Lifting: every one of the protograph is replaced by the Z x Z circulant
     ``sigma^x`` where ``x = L(i, j)`` is the edge's lift shift and ``sigma``
     is the identity with rows cyclically shifted down by one:
     ``sigma^x[r][c] = 1  iff  r = c + x (mod Z)``.
     Zeros become Z x Z zero blocks.

Row/column index conventions used everywhere: protograph row ``(r + k)*gamma
+ i`` and column ``r*kappa + j`` hold the ``H_k`` entry of base edge (i, j)
in replica ``r``; lifted indices are block index times Z plus the intra-block
offset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

Edge = tuple[int, int]


class SparseBinaryMatrix:
    """Binary matrix stored as per-column sorted lists of row indices.

    alist export and girth BFS both want adjacency, not algebra, so this is
    all the structure we need.
    """

    __slots__ = ("nrows", "ncols", "col_rows", "_row_cols")

    def __init__(self, nrows: int, ncols: int,
                 col_rows: Sequence[Sequence[int]]):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative matrix dimension")
        if len(col_rows) != ncols:
            raise ValueError("col_rows length does not match ncols")
        cols = []
        for j, rows in enumerate(col_rows):
            rows = tuple(rows)
            if any(r < 0 or r >= nrows for r in rows):
                raise ValueError(f"row index out of range in column {j}")
            if any(rows[k] >= rows[k + 1] for k in range(len(rows) - 1)):
                raise ValueError(f"column {j} not sorted/duplicate-free")
            cols.append(rows)
        self.nrows = nrows
        self.ncols = ncols
        self.col_rows: tuple[tuple[int, ...], ...] = tuple(cols)
        self._row_cols: Optional[tuple[tuple[int, ...], ...]] = None

    @classmethod
    def from_entries(cls, nrows: int, ncols: int,
                     entries: Iterable[Edge]) -> "SparseBinaryMatrix":
        cols: list[set[int]] = [set() for _ in range(ncols)]
        for r, c in entries:
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise ValueError(f"entry ({r},{c}) out of range")
            cols[c].add(r)
        return cls(nrows, ncols, [sorted(s) for s in cols])

    @property
    def row_cols(self) -> tuple[tuple[int, ...], ...]:
        if self._row_cols is None:
            rows: list[list[int]] = [[] for _ in range(self.nrows)]
            for j, col in enumerate(self.col_rows):
                for r in col:
                    rows[r].append(j)
            self._row_cols = tuple(tuple(r) for r in rows)
        return self._row_cols

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.col_rows)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=np.uint8)
        for j, col in enumerate(self.col_rows):
            for r in col:
                out[r, j] = 1
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return (self.nrows == other.nrows and self.ncols == other.ncols
                and self.col_rows == other.col_rows)

    def __hash__(self) -> int:
        return hash((self.nrows, self.ncols, self.col_rows))

    def __repr__(self) -> str:
        return (f"SparseBinaryMatrix({self.nrows}x{self.ncols}, "
                f"nnz={self.nnz})")


@dataclass(frozen=True)
class BaseCode:
    """A gamma x kappa binary base matrix; all ones unless a mask is given."""

    gamma: int
    kappa: int
    mask: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.gamma < 1 or self.kappa < 1:
            raise ValueError("base dimensions must be at least 1x1")
        if not self.mask:
            object.__setattr__(
                self, "mask",
                tuple(tuple(1 for _ in range(self.kappa))
                      for _ in range(self.gamma)))
        mask = tuple(tuple(int(v) for v in row) for row in self.mask)
        if len(mask) != self.gamma or any(len(r) != self.kappa for r in mask):
            raise ValueError("mask shape does not match gamma x kappa")
        if any(v not in (0, 1) for row in mask for v in row):
            raise ValueError("mask entries must be 0 or 1")
        object.__setattr__(self, "mask", mask)

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Masked edges (i, j) in row-major order."""
        return tuple((i, j) for i in range(self.gamma)
                     for j in range(self.kappa) if self.mask[i][j])

    @property
    def is_all_ones(self) -> bool:
        return all(v == 1 for row in self.mask for v in row)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.mask[i][j])


def _as_fraction(x: object) -> Fraction:
    if isinstance(x, float):
        raise TypeError("probabilities must be exact (int, str or Fraction), "
                        "not float")
    return Fraction(x)  # type: ignore[arg-type]


@dataclass(frozen=True)
class CouplingScheme:
    """Spreading pattern + probabilities, chain length and lift degree.

    ``pattern`` lists the allowed component indices, strictly increasing with
    ``pattern[-1] = memory``; ``probs`` are exact positive rationals summing
    to one.  ``coupling_length`` is the replica count L, ``lifting_degree``
    the circulant size Z.
    """

    pattern: tuple[int, ...]
    probs: tuple[Fraction, ...]
    coupling_length: int
    lifting_degree: int = 1

    def __post_init__(self) -> None:
        pattern = tuple(int(a) for a in self.pattern)
        probs = tuple(_as_fraction(p) for p in self.probs)
        if not pattern:
            raise ValueError("empty spreading pattern")
        if pattern[0] < 0:
            raise ValueError("pattern values must be non-negative")
        if any(pattern[k] >= pattern[k + 1] for k in range(len(pattern) - 1)):
            raise ValueError("pattern must be strictly increasing")
        if len(probs) != len(pattern):
            raise ValueError("probs length must match pattern length")
        if any(p <= 0 for p in probs):
            raise ValueError("probabilities must be strictly positive")
        if sum(probs) != 1:
            raise ValueError("probabilities must sum to exactly 1")
        if self.lifting_degree < 1:
            raise ValueError("lifting degree must be at least 1")
        if self.coupling_length < pattern[-1] + 1:
            raise ValueError("coupling length must be at least memory + 1")
        object.__setattr__(self, "pattern", pattern)
        object.__setattr__(self, "probs", probs)

    @property
    def memory(self) -> int:
        return self.pattern[-1]

    @classmethod
    def uniform(cls, memory: int, coupling_length: Optional[int] = None,
                lifting_degree: int = 1) -> "CouplingScheme":
        """Full pattern (0, 1, ..., m) with uniform probabilities."""
        if memory < 0:
            raise ValueError("memory must be non-negative")
        n = memory + 1
        if coupling_length is None:
            coupling_length = n
        return cls(tuple(range(n)), tuple(Fraction(1, n) for _ in range(n)),
                   coupling_length, lifting_degree)


@dataclass(frozen=True)
class Assignment:
    """Per-edge integer values for one stage ("partition" or "lift").

    Stored as a gamma x kappa grid with None on non-edges; immutable.
    """

    stage: str
    values: tuple[tuple[Optional[int], ...], ...]

    def __post_init__(self) -> None:
        if self.stage not in ("partition", "lift"):
            raise ValueError(f"unknown stage {self.stage!r}")
        vals = tuple(tuple(None if v is None else int(v) for v in row)
                     for row in self.values)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_dict(cls, stage: str, mapping: dict[Edge, int],
                  gamma: int, kappa: int) -> "Assignment":
        grid = [[None] * kappa for _ in range(gamma)]
        for (i, j), v in mapping.items():
            grid[i][j] = int(v)
        return cls(stage, tuple(tuple(row) for row in grid))

    def __getitem__(self, edge: Edge) -> int:
        i, j = edge
        v = self.values[i][j]
        if v is None:
            raise KeyError(f"no value on edge ({i},{j})")
        return v

    def get(self, edge: Edge) -> Optional[int]:
        i, j = edge
        return self.values[i][j]

    def covers(self, base: BaseCode) -> bool:
        if (len(self.values) != base.gamma
                or any(len(r) != base.kappa for r in self.values)):
            return False
        return all(self.values[i][j] is not None for i, j in base.edges)

    def items(self) -> Iterator[tuple[Edge, int]]:
        for i, row in enumerate(self.values):
            for j, v in enumerate(row):
                if v is not None:
                    yield (i, j), v


@dataclass(frozen=True)
class CodeInstance:
    """A fully determined construction: base, scheme, both assignments."""

    base: BaseCode
    scheme: CouplingScheme
    partition: Assignment
    lift: Assignment
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.partition.stage != "partition" or self.lift.stage != "lift":
            raise ValueError("assignments passed in the wrong order")
        _check_partition(self.base, self.scheme, self.partition)
        if not self.lift.covers(self.base):
            raise ValueError("lift assignment does not cover the base mask")
        z = self.scheme.lifting_degree
        for (i, j), v in self.lift.items():
            if not 0 <= v < z:
                raise ValueError(
                    f"lift shift {v} on edge ({i},{j}) outside [0,{z})")


def _check_partition(base: BaseCode, scheme: CouplingScheme,
                     partition: Assignment) -> None:
    if (len(partition.values) != base.gamma
            or any(len(r) != base.kappa for r in partition.values)):
        raise ValueError("partition grid shape does not match the base")
    allowed = set(scheme.pattern)
    for (i, j) in base.edges:
        v = partition.values[i][j]
        if v is None:
            raise ValueError(f"partition misses base edge ({i},{j})")
        if v not in allowed:
            raise ValueError(
                f"partition value {v} on edge ({i},{j}) not in pattern")


def assemble_protograph(base: BaseCode, partition: Assignment,
                        scheme: CouplingScheme) -> SparseBinaryMatrix:
    """Unwrap the base into the coupled protograph (no lifting).

    Replica r contributes, for each base edge (i, j) with component
    k = P(i, j), a one at row (r + k)*gamma + i, column r*kappa + j.
    """
    _check_partition(base, scheme, partition)
    m = scheme.memory
    length = scheme.coupling_length
    nrows = base.gamma * (length + m)
    ncols = base.kappa * length
    entries = []
    for r in range(length):
        for (i, j) in base.edges:
            k = partition.values[i][j]
            entries.append(((r + k) * base.gamma + i, r * base.kappa + j))
    return SparseBinaryMatrix.from_entries(nrows, ncols, entries)


def assemble_qc(instance: CodeInstance) -> SparseBinaryMatrix:
    """Build the full lifted parity-check matrix of an instance.

    Every protograph one of base edge (i, j) becomes sigma^{L(i,j)}:
    lifted row R*Z + ((c + x) mod Z), column C*Z + c for c in [0, Z).
    """
    base, scheme = instance.base, instance.scheme
    m = scheme.memory
    length = scheme.coupling_length
    z = scheme.lifting_degree
    nrows = base.gamma * (length + m) * z
    ncols = base.kappa * length * z
    entries = []
    for r in range(length):
        for (i, j) in base.edges:
            k = instance.partition.values[i][j]
            x = instance.lift.values[i][j]
            big_r = ((r + k) * base.gamma + i) * z
            big_c = (r * base.kappa + j) * z
            for c in range(z):
                entries.append((big_r + (c + x) % z, big_c + c))
    return SparseBinaryMatrix.from_entries(nrows, ncols, entries)
