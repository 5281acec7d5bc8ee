"""Heisenberg-type groups in logarithmic coordinates.

A group is fixed by ``k`` skew-symmetric ``m x m`` matrices ``J_1..J_k`` with
``J_l J_j + J_j J_l = -2 delta_lj I``. Points are pairs ``(z, sigma)`` with
``z`` in R^m and ``sigma`` in R^k; the product is

    (z, sigma) o (zeta, tau) = (z + zeta, sigma + tau + 1/2 <J_l z, zeta>_l).

The Heisenberg group H^n uses 2x2 blocks ``[[0, 1], [-1, 0]]``; the
quaternionic family uses left multiplication by the units i, j, k.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidArgument

ALGEBRA_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HTypeStructure:
    m: int
    k: int
    J: np.ndarray  # shape (k, m, m)

    def __post_init__(self):
        J = np.array(self.J, dtype=float)
        if J.ndim == 2:
            J = J[None]
        if J.shape != (self.k, self.m, self.m):
            raise InvalidArgument(
                f"J has shape {J.shape}, expected {(self.k, self.m, self.m)}")
        J.setflags(write=False)
        object.__setattr__(self, "J", J)

    @property
    def Q(self) -> int:
        return homogeneous_dimension(self)

    def __repr__(self):
        return f"HTypeStructure(m={self.m}, k={self.k})"


@dataclass(frozen=True, eq=False)
class GroupPoint:
    z: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.array(self.z, dtype=float))
        s = np.atleast_1d(np.array(self.sigma, dtype=float))
        z.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "sigma", s)

    @classmethod
    def identity(cls, s: HTypeStructure) -> "GroupPoint":
        return cls(np.zeros(s.m), np.zeros(s.k))

    @property
    def znorm(self) -> float:
        return float(np.linalg.norm(self.z))

    @property
    def signorm(self) -> float:
        return float(np.linalg.norm(self.sigma))

    def __eq__(self, other):
        if not isinstance(other, GroupPoint):
            return NotImplemented
        return (self.z.shape == other.z.shape and self.sigma.shape == other.sigma.shape
                and np.array_equal(self.z, other.z) and np.array_equal(self.sigma, other.sigma))

    def __repr__(self):
        return f"GroupPoint(z={self.z.tolist()}, sigma={self.sigma.tolist()})"


_QUAT_LEFT = {
    # left multiplication on (a, b, c, d) = a + b i + c j + d k
    "i": np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float),
    "j": np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], float),
    "k": np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], float),
}


def build_standard(family: Literal["heisenberg", "quaternionic"], n: int) -> HTypeStructure:
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if family == "heisenberg":
        block = np.array([[0.0, 1.0], [-1.0, 0.0]])
        J = np.kron(np.eye(n), block)[None]
        return HTypeStructure(2 * n, 1, J)
    if family == "quaternionic":
        J = np.stack([np.kron(np.eye(n), _QUAT_LEFT[u]) for u in "ijk"])
        return HTypeStructure(4 * n, 3, J)
    raise InvalidArgument(f"unknown family {family!r}")


def structure_for(m: int, k: int) -> HTypeStructure:
    """Standard structure with the given dimensions (k=1 Heisenberg, k=3 quaternionic)."""
    if k == 1 and m % 2 == 0 and m > 0:
        return build_standard("heisenberg", m // 2)
    if k == 3 and m % 4 == 0 and m > 0:
        return build_standard("quaternionic", m // 4)
    raise InvalidArgument(f"no standard H-type structure with m={m}, k={k}")


@dataclass(frozen=True)
class Violation:
    condition: str
    index: tuple[int, int]
    residual: float

    def __str__(self):
        return f"{self.condition} at {self.index} (max residual {self.residual:.3g})"


def validate_structure(s: HTypeStructure, tol: float = ALGEBRA_TOL) -> list[Violation]:
    """Empty list iff ``s`` defines an H-type algebra; otherwise one entry per failure."""
    J = s.J
    if J.shape != (s.k, s.m, s.m):
        raise InvalidArgument(f"J has shape {J.shape}, expected {(s.k, s.m, s.m)}")
    out = []
    if s.m % 2:
        out.append(Violation("m is not even", (-1, -1), float("nan")))
    eye = np.eye(s.m)
    for l in range(s.k):
        r = float(np.max(np.abs(J[l].T + J[l])))
        if r > tol:
            out.append(Violation("not skew-symmetric", (l, l), r))
    for l in range(s.k):
        for j in range(l, s.k):
            target = -2.0 * eye if l == j else 0.0 * eye
            r = float(np.max(np.abs(J[l] @ J[j] + J[j] @ J[l] - target)))
            if r > tol:
                out.append(Violation("anticommutation fails", (l, j), r))
    return out


def _check_lengths(s: HTypeStructure, z, sigma):
    if np.shape(z)[-1] != s.m or np.shape(sigma)[-1] != s.k:
        raise InvalidArgument(
            f"point has dims ({np.shape(z)[-1]}, {np.shape(sigma)[-1]}), structure has ({s.m}, {s.k})")


def jmap(s: HTypeStructure, sigma, z) -> np.ndarray:
    """J(sigma) z. Broadcasts over leading axes of ``sigma`` and ``z``."""
    sigma = np.asarray(sigma, float)
    z = np.asarray(z, float)
    _check_lengths(s, z, sigma)
    return np.einsum("...l,lij,...j->...i", sigma, s.J, z)


def _bracket(s: HTypeStructure, z, zeta):
    # (<J_l z, zeta>)_l
    return np.einsum("lij,...j,...i->...l", s.J, z, zeta)


def mul_arrays(s: HTypeStructure, z1, s1, z2, s2):
    """Vectorised group law on coordinate arrays of shape (..., m), (..., k)."""
    return z1 + z2, s1 + s2 + 0.5 * _bracket(s, z1, z2)


def group_mul(s: HTypeStructure, g: GroupPoint, h: GroupPoint) -> GroupPoint:
    _check_lengths(s, g.z, g.sigma)
    _check_lengths(s, h.z, h.sigma)
    z, sig = mul_arrays(s, g.z, g.sigma, h.z, h.sigma)
    return GroupPoint(z, sig)


def group_inv(g: GroupPoint) -> GroupPoint:
    return GroupPoint(-g.z, -g.sigma)


def dilate(g: GroupPoint, lam: float) -> GroupPoint:
    """Anisotropic dilation (z, sigma) -> (lam z, lam^2 sigma)."""
    return GroupPoint(lam * g.z, lam * lam * g.sigma)


def homogeneous_dimension(s: HTypeStructure) -> int:
    return s.m + 2 * s.k
