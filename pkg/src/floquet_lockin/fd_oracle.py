"""Finite-difference buckling oracle for the modulated Winkler beam.

Discretises ``y'''' + 16 pi^4 (1 + K cos(2 pi x / lambda)) y = -P y''`` on a
finite beam with second-order central stencils and solves the generalised
symmetric eigenproblem ``A v = P B v`` with ``B = -D2``. It shares no code with
the Hill route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericError, ParameterError
from .models import WINKLER_STIFFNESS

__all__ = ["FdProblem", "FdBucklingResult", "assemble_fd_operators", "fd_buckling"]

_BOUNDARY = ("pinned", "clamped")


@dataclass(frozen=True)
class FdProblem:
    """Finite beam of length ``length`` (in ``x_bar`` units) on ``n`` uniform nodes.

    The two end nodes carry ``y = 0``; the second condition is ``y'' = 0``
    (pinned) or ``y' = 0`` (clamped), applied through a ghost node.
    """

    K_bar: float
    lambda_bar: float
    length: float
    n: int
    boundary: str = "pinned"

    def __post_init__(self):
        if not 0 <= self.K_bar < 1:
            raise ParameterError(f"K_bar must satisfy 0 <= K_bar < 1, got {self.K_bar}")
        if not self.lambda_bar > 0:
            raise ParameterError(f"lambda_bar must be > 0, got {self.lambda_bar}")
        if self.boundary not in _BOUNDARY:
            raise ParameterError(f"boundary must be one of {_BOUNDARY}, got {self.boundary!r}")
        if self.length < 20 * self.lambda_bar * (1 - 1e-12):
            raise ParameterError(
                f"length {self.length} is shorter than 20 modulation periods ({20 * self.lambda_bar})"
            )
        if self.n < 5:
            raise ParameterError(f"n = {self.n} is too small for the five-point stencil")
        if (self.n - 1) * self.lambda_bar / self.length < 50 * (1 - 1e-12):
            raise ParameterError(
                f"n = {self.n} gives fewer than 50 nodes per modulation period"
            )

    @classmethod
    def with_resolution(cls, K_bar, lambda_bar, periods=40, nodes_per_period=200, boundary="pinned"):
        length = periods * lambda_bar
        return cls(K_bar, lambda_bar, length, int(round(nodes_per_period * periods)) + 1, boundary)

    @property
    def spacing(self) -> float:
        return self.length / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        """All node abscissae, boundaries included."""
        return np.linspace(0.0, self.length, self.n)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


@dataclass(frozen=True, eq=False)
class FdBucklingResult:
    P_bar_cr: float
    x: np.ndarray
    mode: np.ndarray
    residual: float
    problem: FdProblem

    @property
    def P_cr_ratio(self) -> float:
        return self.P_bar_cr / (8 * math.pi**2)


def assemble_fd_operators(prob: FdProblem) -> tuple[sp.csc_matrix, sp.csc_matrix]:
    """Banded operators ``A = D4 + 16 pi^4 diag(1 + K cos)`` and ``B = -D2`` on interior nodes."""
    m = prob.n - 2
    d = prob.spacing
    e = np.ones(m)
    corner = 5.0 if prob.boundary == "pinned" else 7.0
    main4 = 6.0 * e
    main4[0] = main4[-1] = corner
    D4 = sp.diags([e[:-2], -4 * e[:-1], main4, -4 * e[:-1], e[:-2]], [-2, -1, 0, 1, 2]) / d**4
    foundation = WINKLER_STIFFNESS * (1 + prob.K_bar * np.cos(2 * np.pi * prob.interior / prob.lambda_bar))
    A = (D4 + sp.diags(foundation)).tocsc()
    B = (sp.diags([-e[:-1], 2 * e, -e[:-1]], [-1, 0, 1]) / d**2).tocsc()
    return A, B


def fd_buckling(prob: FdProblem) -> FdBucklingResult:
    """Smallest positive buckling load and its mode, by shift-invert Lanczos about zero.

    The mode is zero at both ends, scaled to unit max-abs with its largest
    entry positive.
    """
    A, B = assemble_fd_operators(prob)
    k = min(3, A.shape[0] - 2)
    try:
        w, v = spla.eigsh(A, k=k, M=B, sigma=0.0, which="LM", v0=np.ones(A.shape[0]))
    except (spla.ArpackError, RuntimeError) as exc:
        raise NumericError(f"FD eigensolver failed for n={prob.n}: {exc}") from exc
    positive = np.flatnonzero(w > 0)
    if positive.size == 0:
        raise NumericError("FD problem has no positive buckling eigenvalue")
    i = positive[np.argmin(w[positive])]
    P = float(w[i])
    vec = v[:, i]
    residual = float(np.linalg.norm(A @ vec - P * (B @ vec)) / np.linalg.norm(A @ vec))
    vec = vec / vec[np.argmax(np.abs(vec))]
    mode = np.concatenate(([0.0], vec, [0.0]))
    return FdBucklingResult(P, prob.nodes, mode, residual, prob)
