"""Core value types: dispersion, block-triangular potentials, boundary matrices.

All types are immutable after construction and safe to share across threads.
Index conventions are 0-based internally; reports use 1-based labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularH, ValidationError
from .profiles import ScalarProfile, ZERO_PROFILE, as_profile

SINGULARITY_TOL = 1e-10


@dataclass(frozen=True)
class Dispersion:
    """Ordered diagonal speeds xi_1 < ... < xi_n < 0 < xi_{n+1} < ... < xi_{2n}."""

    n: int
    xi: tuple[float, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("Dispersion.n", "n must be >= 1")
        xi = tuple(float(v) for v in self.xi)
        object.__setattr__(self, "xi", xi)
        if len(xi) != 2 * self.n:
            raise ValidationError("Dispersion.xi", f"need 2n = {2 * self.n} speeds, got {len(xi)}")
        if any(b <= a for a, b in zip(xi, xi[1:])):
            raise ValidationError("Dispersion.xi", "speeds must be strictly increasing")
        if not (xi[self.n - 1] < 0.0 < xi[self.n]):
            raise ValidationError("Dispersion.xi", "first n speeds must be negative, last n positive")

    @property
    def sigma1(self) -> np.ndarray:
        return np.array(self.xi[: self.n])

    @property
    def sigma2(self) -> np.ndarray:
        return np.array(self.xi[self.n :])

    @property
    def xi_arr(self) -> np.ndarray:
        return np.array(self.xi)


def kernel_decay_exponent(disp: Dispersion) -> float:
    """Slope constant of the kernel decay in the slanted direction.

    Minimum over four families of speed ratios; empty families (n = 1 has no
    strictly-lower or strictly-upper pairs) are skipped.  Invariant under
    uniform positive scaling of all speeds.
    """
    n = disp.n
    xi = disp.xi_arr
    ratios: list[float] = []
    for k in range(1, n + 1):
        for j in range(1, n + 1):
            if k > j:  # strictly lower family
                ratios.append(xi[j - 1] / (xi[j - 1] - xi[k - 1]))
            if k < j:  # strictly upper family
                ratios.append(xi[n + j - 1] / (xi[n + j - 1] - xi[n + k - 1]))
            if k + j > n:  # lower anti family
                ratios.append(xi[n + j - 1] / (xi[n + j - 1] - xi[k - 1]))
            if k + j < n + 2:  # upper anti family
                ratios.append(xi[j - 1] / (xi[j - 1] - xi[n + k - 1]))
    return min(ratios)


def _strictly_lower(i: int, j: int, n: int) -> bool:
    return i > j


def _lower_anti(i: int, j: int, n: int) -> bool:
    # 1-based: zero for i + j <= n
    return (i + 1) + (j + 1) > n


def _upper_anti(i: int, j: int, n: int) -> bool:
    # 1-based: zero for i + j >= n + 2
    return (i + 1) + (j + 1) < n + 2


def _strictly_upper(i: int, j: int, n: int) -> bool:
    return j > i


BLOCK_ALLOWED = {
    "q11": _strictly_lower,
    "q12": _lower_anti,
    "q21": _upper_anti,
    "q22": _strictly_upper,
}

# Kernel blocks admit the corresponding non-strict patterns (diagonals allowed).
KERNEL_ALLOWED = {
    "A11": lambda i, j, n: i >= j,
    "A12": _lower_anti,
    "A21": _upper_anti,
    "A22": lambda i, j, n: j >= i,
}


def block_mask(name: str, n: int, kernel: bool = False) -> np.ndarray:
    rule = (KERNEL_ALLOWED if kernel else BLOCK_ALLOWED)[name]
    return np.array([[rule(i, j, n) for j in range(n)] for i in range(n)], dtype=bool)


def _coerce_block(block, n: int):
    grid = [[ZERO_PROFILE] * n for _ in range(n)]
    if block is None:
        return tuple(tuple(row) for row in grid)
    for i in range(n):
        for j in range(n):
            grid[i][j] = as_profile(block[i][j])
    return tuple(tuple(row) for row in grid)


@dataclass(frozen=True)
class TriangularPotential:
    """Potential with the four-block triangular structure.

    q11 strictly lower triangular, q12 lower anti-triangular, q21 upper
    anti-triangular, q22 strictly upper triangular; every nonzero entry is a
    ScalarProfile bounded by the declared envelope C e^{-eps x}.
    """

    n: int
    q11: tuple = None
    q12: tuple = None
    q21: tuple = None
    q22: tuple = None
    envelope: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("TriangularPotential.n", "n must be >= 1")
        c, eps = self.envelope
        if not (c > 0 and eps > 0):
            raise ValidationError("TriangularPotential.envelope", "C and eps must be positive")
        for name in ("q11", "q12", "q21", "q22"):
            object.__setattr__(self, name, _coerce_block(getattr(self, name), self.n))

    def block(self, name: str):
        return getattr(self, name)

    def evaluate_block(self, name: str, x: np.ndarray) -> np.ndarray:
        """Block values as an (n, n, len(x)) array."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((self.n, self.n) + x.shape, dtype=complex)
        for i in range(self.n):
            for j in range(self.n):
                p = self.block(name)[i][j]
                if not p.is_zero:
                    out[i, j] = p(x)
        return out

    @property
    def is_zero(self) -> bool:
        return all(
            p.is_zero for name in BLOCK_ALLOWED for row in self.block(name) for p in row
        )

    def nonzero_entries(self):
        for name in BLOCK_ALLOWED:
            for i in range(self.n):
                for j in range(self.n):
                    p = self.block(name)[i][j]
                    if not p.is_zero:
                        yield name, i, j, p


def validate_potential(pot: TriangularPotential, x_probe=None, envelope_slack: float = 1e-9):
    """Structural and envelope check; returns a list of violation strings.

    Empty list means the potential is valid.  Reports never raise: the point
    is to name every offending entry at once.
    """
    report: list[str] = []
    n = pot.n
    c_env, eps = pot.envelope
    if x_probe is None:
        x_probe = np.linspace(0.0, max(1.0, 10.0 / eps), 201)
    bound = c_env * np.exp(-eps * x_probe) * (1.0 + envelope_slack) + 1e-300
    for name, rule in BLOCK_ALLOWED.items():
        for i in range(n):
            for j in range(n):
                p = pot.block(name)[i][j]
                if not rule(i, j, n):
                    if not p.is_zero:
                        report.append(
                            f"{name}({i + 1},{j + 1}) must be zero: violates "
                            f"{'strict lower' if name == 'q11' else 'lower anti' if name == 'q12' else 'upper anti' if name == 'q21' else 'strict upper'}"
                            " triangularity"
                        )
                    continue
                if p.is_zero:
                    continue
                vals = np.abs(p(x_probe))
                bad = vals > bound
                if np.any(bad):
                    k = int(np.argmax(bad))
                    report.append(
                        f"{name}({i + 1},{j + 1}) exceeds envelope at x = {x_probe[k]:.4g}: "
                        f"|value| = {vals[k]:.4g} > {bound[k]:.4g}"
                    )
    return report


@dataclass(frozen=True)
class BoundaryMatrix:
    """Invertible boundary coupling y2(0) = H y1(0)."""

    H: np.ndarray = field(repr=False)
    tol: float = SINGULARITY_TOL

    def __post_init__(self):
        h = np.asarray(self.H, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValidationError("BoundaryMatrix.H", "H must be square")
        object.__setattr__(self, "H", h)
        if abs(np.linalg.det(h)) <= self.tol:
            raise SingularH(f"|det H| = {abs(np.linalg.det(h)):.3e} <= tol {self.tol:.1e}")

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def inv(self) -> np.ndarray:
        return np.linalg.inv(self.H)


def max_possible_entries(n: int) -> int:
    """Count of structurally admissible scalar entries: 2 n^2."""
    return sum(int(block_mask(name, n).sum()) for name in BLOCK_ALLOWED)
