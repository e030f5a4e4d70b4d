"""Exact linear algebra and linear programming over ordered fields.

Entries may be ``int``, ``Fraction`` or ``ExactScalar``; nothing here ever
converts to float. Rows are stored sparsely as ``{column: value}`` dicts since
the constraint matrices built from polytope vertices are mostly zero.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

Row = Dict[int, object]


def independent_rows(rows: Sequence[Row]) -> Tuple[List[int], Dict[int, Row]]:
    """Select a maximal linearly independent subset of ``rows``.

    Returns the kept row indices and, for every dropped row, the multipliers
    ``y`` (keyed by original row index) with ``sum_k y[k] * rows[k] == 0``.
    """
    basis: List[Tuple[int, Row, Row]] = []  # (pivot column, reduced row, combination)
    kept: List[int] = []
    dependencies: Dict[int, Row] = {}

    for index, original in enumerate(rows):
        reduced = {c: v for c, v in original.items() if v}
        combo: Row = {index: 1}
        for pivot, brow, bcombo in basis:
            f = reduced.get(pivot)
            if not f:
                continue
            f = f / brow[pivot]
            _axpy(reduced, brow, f)
            _axpy(combo, bcombo, f)
        if reduced:
            pivot = min(reduced)
            basis.append((pivot, reduced, combo))
            kept.append(index)
        else:
            dependencies[index] = combo

    logger.debug(f"Row pruning kept {len(kept)} of {len(rows)} rows")
    return kept, dependencies


def _axpy(target: Row, source: Row, factor) -> None:
    """target -= factor * source, dropping exact zeros."""
    for col, value in source.items():
        new = target.get(col, 0) - factor * value
        if new:
            target[col] = new
        else:
            target.pop(col, None)


def matrix_rank(matrix: Sequence[Sequence[object]], by_columns: bool = False) -> int:
    """Exact rank by Gaussian elimination.

    ``by_columns=True`` eliminates the transpose, giving an independent
    elimination order for cross-checking certificates.
    """
    if by_columns:
        matrix = [list(col) for col in zip(*matrix)]
    rows = [{c: v for c, v in enumerate(r) if v} for r in matrix]
    kept, _ = independent_rows(rows)
    return len(kept)


class LPStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


@dataclass
class LPResult:
    status: LPStatus
    values: List[object] = field(default_factory=list)
    objective: Optional[object] = None
    farkas: Optional[List[object]] = None
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status != LPStatus.INFEASIBLE


class ExactSimplex:
    """Two-phase primal simplex with Bland's rule over an exact field.

    Solves ``maximize c·x subject to A x = b, x >= 0``. Phase 1 minimizes the
    sum of one artificial variable per row. When that minimum is positive the
    phase-1 duals give a Farkas vector ``y`` with ``y·A_j <= 0`` for every
    column and ``y·b > 0``.
    """

    def __init__(self, n_vars: int):
        self.n = n_vars
        self.rows: List[Row] = []
        self.rhs: List[object] = []
        self.cost: Row = {}

    def add_equality(self, coeffs: Row, rhs) -> int:
        self.rows.append({j: v for j, v in coeffs.items() if v})
        self.rhs.append(rhs)
        return len(self.rows) - 1

    def set_objective(self, coeffs: Row) -> None:
        self.cost = {j: v for j, v in coeffs.items() if v}

    # -- tableau operations ----------------------------------------------

    def _pivot(self, i: int, j: int) -> None:
        A, b = self._A, self._b
        piv = A[i][j]
        row = {l: v / piv for l, v in A[i].items()}
        A[i] = row
        b[i] = b[i] / piv
        for k in range(len(A)):
            if k == i:
                continue
            f = A[k].get(j)
            if f:
                _axpy(A[k], row, f)
                b[k] = b[k] - f * b[i]
        f = self._cbar.get(j)
        if f:
            _axpy(self._cbar, row, f)
        self._basis[i] = j
        self._pivots += 1

    def _bland(self, limit: int) -> LPStatus:
        A, b = self._A, self._b
        while True:
            entering = [j for j, v in self._cbar.items() if j < limit and v > 0]
            if not entering:
                return LPStatus.OPTIMAL
            j = min(entering)
            best = None
            for i, row in enumerate(A):
                a = row.get(j)
                if a is not None and a > 0:
                    key = (b[i] / a, self._basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return LPStatus.UNBOUNDED
            self._pivot(best[1], j)

    # -- driver ------------------------------------------------------------

    def solve(self) -> LPResult:
        n = self.n
        kept, dependencies = independent_rows(self.rows)
        for dropped, combo in sorted(dependencies.items()):
            residual = sum((y * self.rhs[k] for k, y in combo.items()), 0)
            if residual:
                logger.debug(f"Inconsistent equality row {dropped}")
                sign = 1 if residual > 0 else -1
                farkas = [0] * len(self.rows)
                for k, y in combo.items():
                    farkas[k] = sign * y
                return LPResult(LPStatus.INFEASIBLE, farkas=farkas)

        self._A = []
        self._b = []
        flips = []
        for idx, k in enumerate(kept):
            row = dict(self.rows[k])
            rhs = self.rhs[k]
            flip = rhs < 0
            if flip:
                row = {j: -v for j, v in row.items()}
                rhs = -rhs
            row[n + idx] = 1
            self._A.append(row)
            self._b.append(rhs)
            flips.append(flip)

        m = len(self._A)
        self._basis = [n + i for i in range(m)]
        self._pivots = 0
        self._cbar = {}
        for row in self._A:
            for j, v in row.items():
                if j < n:
                    new = self._cbar.get(j, 0) + v
                    if new:
                        self._cbar[j] = new
                    else:
                        self._cbar.pop(j, None)

        # Phase 1
        self._bland(limit=n)
        infeasibility = sum((self._b[i] for i in range(m) if self._basis[i] >= n), 0)
        if infeasibility > 0:
            farkas = [0] * len(self.rows)
            for idx, k in enumerate(kept):
                f = 1 + self._cbar.get(n + idx, 0)
                farkas[k] = -f if flips[idx] else f
            logger.debug(f"Phase 1 infeasible after {self._pivots} pivots")
            return LPResult(LPStatus.INFEASIBLE, farkas=farkas, pivots=self._pivots)

        # Drive zero-level artificials out of the basis
        for i in range(m):
            if self._basis[i] >= n:
                j = next((c for c in sorted(self._A[i]) if c < n), None)
                if j is not None:
                    self._pivot(i, j)

        # Phase 2
        for row in self._A:
            for j in [c for c in row if c >= n]:
                del row[j]
        status = LPStatus.OPTIMAL
        if self.cost:
            self._cbar = dict(self.cost)
            for i, bv in enumerate(self._basis):
                cb = self.cost.get(bv)
                if cb:
                    _axpy(self._cbar, self._A[i], cb)
            status = self._bland(limit=n)

        values = [0] * n
        for i, bv in enumerate(self._basis):
            if bv < n:
                values[bv] = self._b[i]
        objective = sum((c * values[j] for j, c in self.cost.items()), 0)
        logger.debug(f"Simplex finished ({status.value}) after {self._pivots} pivots")
        return LPResult(status, values=values, objective=objective, pivots=self._pivots)
