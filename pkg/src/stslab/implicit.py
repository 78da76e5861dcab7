"""Implicit reference solvers on banded LU factorizations.

The vectorized operator is banded: under row-major vectorization with the v
index innermost, x neighbors sit n+1 slots away and the cross terms extend the
bandwidth to n+2 (1 for the tridiagonal 1-D case).  Systems (alpha I + beta M)
are assembled directly in LAPACK band storage and factored once per run, so a
Crank-Nicolson run costs one factorization plus one triangular solve per step.

Two references are provided: Crank-Nicolson with a Rannacher start-up (two
half-step implicit-Euler pairs smooth the non-smooth payoff before the
trapezoidal steps), and the two-stage composite TR-BDF2 scheme, which is
L-stable and needs no start-up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs

from .operators import StencilOperator, _band_entries, apply as apply_operator

__all__ = [
    "BandedMatrix",
    "BandedLU",
    "operator_banded",
    "banded_factor",
    "crank_nicolson_run",
    "trbdf2_run",
]


@dataclass
class BandedMatrix:
    """alpha I + beta M in LAPACK general-band storage.

    ab has shape (2 kl + ku + 1, n); entry (i, j) of the dense matrix lives at
    ab[kl + ku + i - j, j].  The extra kl rows on top hold pivoting fill-in.
    """

    ab: np.ndarray
    kl: int
    ku: int
    n: int


@dataclass
class BandedLU:
    """Factored band matrix; solve() is reusable and read-only."""

    lu: np.ndarray
    ipiv: np.ndarray
    kl: int
    ku: int
    n: int

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise ValueError(f"rhs length {rhs.shape[0]} != system size {self.n}")
        gbtrs, = get_lapack_funcs(("gbtrs",), (self.lu, rhs))
        x, info = gbtrs(self.lu, self.kl, self.ku, rhs, self.ipiv)
        if info != 0:
            raise np.linalg.LinAlgError(f"gbtrs failed with info={info}")
        return x


def bandwidth_of(op: StencilOperator) -> int:
    if op.is_1d:
        return 1
    return op.shape[1] + 1  # x neighbor offset n+1, cross terms n+2 - 1 + 1


def operator_banded(op: StencilOperator, alpha: float, beta: float) -> BandedMatrix:
    """Band storage of alpha I + beta M for the vectorized operator."""
    if op.is_1d:
        kl = ku = 1
    else:
        kl = ku = op.shape[1] + 1
    n = op.size
    ab = np.zeros((2 * kl + ku + 1, n))
    for rows, cols, vals in _band_entries(op):
        np.add.at(ab, (kl + ku + rows - cols, cols), beta * vals)
    ab[kl + ku, :] += alpha
    return BandedMatrix(ab=ab, kl=kl, ku=ku, n=n)


def banded_factor(bm: BandedMatrix) -> BandedLU:
    """LU factorization with partial pivoting within the band."""
    gbtrf, = get_lapack_funcs(("gbtrf",), (bm.ab,))
    lu, ipiv, info = gbtrf(bm.ab, bm.kl, bm.ku)
    if info < 0:
        raise ValueError(f"gbtrf: illegal argument {-info}")
    if info > 0:
        raise np.linalg.LinAlgError(
            f"matrix singular to working precision (U[{info - 1},{info - 1}] = 0)")
    return BandedLU(lu=lu, ipiv=ipiv, kl=bm.kl, ku=bm.ku, n=bm.n)


def crank_nicolson_run(op: StencilOperator, initial: np.ndarray, expiry: float,
                       l: int) -> np.ndarray:
    """Integrate df/dt = M f with CN and a Rannacher start-up.

    The first two macro-steps are taken as four implicit-Euler half-steps;
    both phases solve against (I - (k/2) M), so one factorization serves the
    whole run.
    """
    if l < 3:
        raise ValueError(f"need l >= 3 (two start-up steps plus CN), got {l}")
    if not expiry > 0.0:
        raise ValueError(f"need expiry > 0, got {expiry!r}")
    k = expiry / l
    lu = banded_factor(operator_banded(op, 1.0, -0.5 * k))
    y = np.array(initial, dtype=float, copy=True)
    shape = op.shape
    if y.shape != shape:
        raise ValueError(f"initial shape {y.shape} != operator shape {shape}")
    for _ in range(4):
        y = lu.solve(y.ravel()).reshape(shape)
    for _ in range(l - 2):
        rhs = y + 0.5 * k * apply_operator(op, y)
        y = lu.solve(rhs.ravel()).reshape(shape)
    return y


TRBDF2_GAMMA = 2.0 - np.sqrt(2.0)


def trbdf2_run(op: StencilOperator, initial: np.ndarray, expiry: float,
               l: int) -> np.ndarray:
    """Integrate df/dt = M f with the composite TR-BDF2 scheme (1-D only).

    Each step runs a trapezoidal stage over gamma k followed by a BDF2 stage
    over the remainder, gamma = 2 - sqrt(2); both stage matrices are factored
    once.  L-stability makes a start-up phase unnecessary.
    """
    if not op.is_1d:
        raise ValueError("trbdf2_run supports the one-dimensional operator only")
    if l < 1:
        raise ValueError(f"need l >= 1, got {l}")
    if not expiry > 0.0:
        raise ValueError(f"need expiry > 0, got {expiry!r}")
    g = TRBDF2_GAMMA
    k = expiry / l
    lu_tr = banded_factor(operator_banded(op, 1.0, -0.5 * g * k))
    lu_bdf = banded_factor(operator_banded(op, 1.0, -k * (1.0 - g) / (2.0 - g)))
    c_mid = 1.0 / (g * (2.0 - g))
    c_old = (1.0 - g) ** 2 / (g * (2.0 - g))
    y = np.array(initial, dtype=float, copy=True)
    for _ in range(l):
        rhs = y + 0.5 * g * k * apply_operator(op, y)
        y_mid = lu_tr.solve(rhs)
        y = lu_bdf.solve(c_mid * y_mid - c_old * y)
    return y
