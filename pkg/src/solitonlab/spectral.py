"""Spectra of the linearized operators ``L± = -½∂x² - (2±1)η² + ½`` and the
constrained coercivity constants.

Operators are assembled as dense real symmetric matrices on a periodic grid
and eigensolved with LAPACK.  Constraints are handled by restricting the
operator to an orthonormal basis of the orthogonal complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .grid import GridSpec, WaveField

# grid used for eigen work unless the caller passes one
SPECTRAL_GRID = GridSpec(half_length=30.0, num_points=1024)

RHO0 = 9.0 / (2.0 * (12.0 + math.pi ** 2))

PLUS, MINUS = "+", "-"


def _check_sign(sign: str) -> str:
    if sign not in (PLUS, MINUS):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return sign


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    sign: str
    grid: GridSpec
    matrix: np.ndarray
    stencil: str = "spectral"

    def apply(self, values) -> np.ndarray:
        if isinstance(values, WaveField):
            values = values.samples
        return self.matrix @ np.asarray(values)

    def quadratic_form(self, v: np.ndarray) -> float:
        v = np.asarray(v, dtype=float)
        return float(self.grid.spacing * v @ (self.matrix @ v))


def second_derivative_matrix(grid: GridSpec, stencil: str = "spectral") -> np.ndarray:
    """Periodic ``∂x²`` as a dense symmetric circulant matrix."""
    n = grid.num_points
    if stencil == "spectral":
        col = np.fft.ifft(-grid.k ** 2).real
    elif stencil == "fd2":
        col = np.zeros(n)
        col[0] = -2.0
        col[1] = col[-1] = 1.0
        col /= grid.spacing ** 2
    else:
        raise ValueError(f"unknown stencil {stencil!r}")
    D2 = sla.circulant(col)
    return 0.5 * (D2 + D2.T)


def assemble(sign: str, grid: GridSpec = SPECTRAL_GRID, stencil: str = "spectral") -> OperatorMatrix:
    _check_sign(sign)
    eta2 = 1.0 / np.cosh(grid.x) ** 2
    coupling = 3.0 if sign == PLUS else 1.0
    A = -0.5 * second_derivative_matrix(grid, stencil)
    A[np.diag_indices_from(A)] += 0.5 - coupling * eta2
    return OperatorMatrix(sign, grid, A, stencil)


def smallest_eigenpairs(op: OperatorMatrix, k: int = 2):
    """The ``k`` lowest eigenvalues and L²-normalized eigenvectors (columns)."""
    if not 1 <= k <= 6:
        raise ValueError(f"k must be in 1..6, got {k}")
    try:
        vals, vecs = sla.eigh(op.matrix, subset_by_index=[0, k - 1])
    except sla.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed for L{op.sign}") from exc
    return vals, vecs / math.sqrt(op.grid.spacing)


def _constraint_matrix(constraints: Sequence, grid: GridSpec) -> np.ndarray:
    cols = []
    for c in constraints:
        vals = c.samples if isinstance(c, WaveField) else np.asarray(c)
        if vals.shape != (grid.num_points,):
            raise ValueError("constraint not sampled on the operator grid")
        if np.iscomplexobj(vals):
            if np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals.real))):
                raise ValueError("constraints must be real functions")
            vals = vals.real
        cols.append(np.asarray(vals, dtype=float))
    return np.column_stack(cols) if cols else np.zeros((grid.num_points, 0))


def complement_basis(constraints: Sequence, grid: GridSpec, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal (Euclidean) basis of the complement of the constraint span."""
    C = _constraint_matrix(constraints, grid)
    m = C.shape[1]
    if m == 0:
        return np.eye(grid.num_points)
    Q, R = np.linalg.qr(C, mode="complete")
    d = np.abs(np.diag(R))
    if d.min() <= rank_tol * d.max():
        raise ValueError("constraints are linearly dependent")
    return Q[:, m:]


@dataclass
class CoercivityReport:
    constrained_min: float
    constraint_defects: list
    rho0_reference: float = RHO0
    minimizer: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def margin(self) -> float:
        return self.constrained_min - self.rho0_reference


def constrained_coercivity(sign: str, constraints: Sequence = (),
                           grid: GridSpec = SPECTRAL_GRID,
                           op: Optional[OperatorMatrix] = None) -> CoercivityReport:
    """Minimum of ``<Lv, v> / |v|²`` over ``v`` orthogonal to every constraint."""
    if op is None:
        op = assemble(sign, grid)
    grid = op.grid
    Q = complement_basis(constraints, grid)
    B = Q.T @ op.matrix @ Q
    vals, vecs = sla.eigh(0.5 * (B + B.T), subset_by_index=[0, 0])
    v = Q @ vecs[:, 0] / math.sqrt(grid.spacing)
    C = _constraint_matrix(constraints, grid)
    defects = [abs(grid.spacing * float(c @ v)) / math.sqrt(grid.spacing * float(c @ c))
               for c in C.T]
    return CoercivityReport(float(vals[0]), defects, RHO0, v)


def proposition_constraints(sign: str, grid: GridSpec = SPECTRAL_GRID) -> list:
    """Constraint functions of the coercivity estimate for ``L+`` or ``L-``."""
    _check_sign(sign)
    x = grid.x
    sech = 1.0 / np.cosh(x)
    th = np.tanh(x)
    if sign == PLUS:
        return [WaveField(grid, sech), WaveField(grid, x * sech)]
    return [WaveField(grid, -sech * th), WaveField(grid, sech - x * sech * th)]


@dataclass(frozen=True)
class LinaCase:
    c0: float
    c1: float
    c2: float

    @property
    def c3(self) -> float:
        return lina_c3(self.c0, self.c1, self.c2)


def lina_c3(c0: float, c1: float, c2: float) -> float:
    return c1 * c2 - c0 * (1.0 - c2)


def lina_constants() -> list[LinaCase]:
    """The three cases whose worst ``c3`` is the coercivity constant."""
    pi2 = math.pi ** 2
    return [
        LinaCase(1.5, 0.5, 3 * pi2 / 32),
        LinaCase(0.0, 0.5, 9 / pi2),
        LinaCase(0.0, 0.5, 9 / (12 + pi2)),
    ]


def rho0() -> float:
    return min(case.c3 for case in lina_constants())


def lina_overlaps(grid: GridSpec = SPECTRAL_GRID) -> list[float]:
    """``<v0, v1>²`` for the three cases by grid quadrature of normalized vectors."""
    x = grid.x
    sech = 1.0 / np.cosh(x)
    th = np.tanh(x)
    dx = grid.spacing

    def sq_overlap(f, g):
        f = f / math.sqrt(dx * f @ f)
        g = g / math.sqrt(dx * g @ g)
        return float((dx * f @ g) ** 2)

    return [
        sq_overlap(sech ** 2, sech),
        sq_overlap(-sech * th, x * sech),
        sq_overlap(sech, sech - x * sech * th),
    ]


@dataclass(frozen=True)
class LinaCheck:
    c0: float
    c1: float
    c2: float
    c3: float
    constrained_min: float


def lina_check(L: np.ndarray, v0: np.ndarray, v1: np.ndarray) -> LinaCheck:
    """Evaluate the abstract lemma on a finite symmetric matrix.

    ``v0`` must be a unit eigenvector with eigenvalue ``-c0 <= 0``; ``c1`` is
    the smallest Rayleigh quotient on ``v0``'s complement, and the result also
    reports the true minimum on ``v1``'s complement for comparison with ``c3``.
    """
    L = 0.5 * (np.asarray(L, float) + np.asarray(L, float).T)
    v0 = np.asarray(v0, float) / np.linalg.norm(v0)
    v1 = np.asarray(v1, float) / np.linalg.norm(v1)
    c0 = -float(v0 @ L @ v0)
    if np.linalg.norm(L @ v0 + c0 * v0) > 1e-10 * max(1.0, np.linalg.norm(L)):
        raise ValueError("v0 is not an eigenvector of L")

    def min_on_complement(c):
        Q, _ = np.linalg.qr(c[:, None], mode="complete")
        Q = Q[:, 1:]
        return float(np.linalg.eigvalsh(Q.T @ L @ Q)[0])

    c1 = min_on_complement(v0)
    c2 = float(v0 @ v1) ** 2
    return LinaCheck(c0, c1, c2, lina_c3(c0, c1, c2), min_on_complement(v1))


def dx_coercivity_constant(r: float = RHO0) -> float:
    """Lower bound on ``<Lw, w> / |∂x w|²`` implied by ``r``."""
    return 2 * r / (5 + 2 * r)


def h1_coercivity_constant(r: float = RHO0) -> float:
    """Lower bound on ``<Lw, w> / |w|²_{H¹}`` implied by ``r``."""
    return 2 * r / (7 + 2 * r)


def full_quadratic_form(w: WaveField, plus: Optional[OperatorMatrix] = None,
                        minus: Optional[OperatorMatrix] = None) -> float:
    """``<L+ Re w, Re w> + <L- Im w, Im w>``."""
    grid = w.grid
    plus = plus if plus is not None else assemble(PLUS, grid)
    minus = minus if minus is not None else assemble(MINUS, grid)
    return plus.quadratic_form(w.real) + minus.quadratic_form(w.imag)


def constant_table(grid: GridSpec = SPECTRAL_GRID) -> list[dict]:
    """Closed-form and computed constants, one row per quantity."""
    rows = []
    overlaps = lina_overlaps(grid)
    for i, (case, ov) in enumerate(zip(lina_constants(), overlaps), start=1):
        rows.append({"quantity": f"case{i}_c3", "closed_form": case.c3,
                     "computed": lina_c3(case.c0, case.c1, ov)})
    plus = assemble(PLUS, grid)
    minus = assemble(MINUS, grid)
    ev_p, _ = smallest_eigenpairs(plus, 3)
    ev_m, _ = smallest_eigenpairs(minus, 2)
    rows.append({"quantity": "rho0", "closed_form": RHO0, "computed": rho0()})
    rows.append({"quantity": "Lplus_constrained_min", "closed_form": RHO0,
                 "computed": constrained_coercivity(PLUS, proposition_constraints(PLUS, grid),
                                                    op=plus).constrained_min})
    rows.append({"quantity": "Lminus_constrained_min", "closed_form": RHO0,
                 "computed": constrained_coercivity(MINUS, proposition_constraints(MINUS, grid),
                                                    op=minus).constrained_min})
    rows.append({"quantity": "Lplus_eig0", "closed_form": -1.5, "computed": float(ev_p[0])})
    rows.append({"quantity": "Lplus_eig1", "closed_form": 0.0, "computed": float(ev_p[1])})
    rows.append({"quantity": "Lminus_eig0", "closed_form": 0.0, "computed": float(ev_m[0])})
    rows.append({"quantity": "dx_constant", "closed_form": dx_coercivity_constant(),
                 "computed": dx_coercivity_constant(rho0())})
    rows.append({"quantity": "h1_constant", "closed_form": h1_coercivity_constant(),
                 "computed": h1_coercivity_constant(rho0())})
    return rows
