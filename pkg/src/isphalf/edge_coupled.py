"""The explicitly solvable class: middle rows driven by the two edge components.

The first and last components are free exponentials, every middle row k
couples only to them through c_{k,first} and c_{k,last}, so the scattering
entries are single quadratures, the inverse problem reduces to scalar
additive splits plus per-point linear systems, and non-uniqueness of the
one-boundary problem is visible as plain rank deficiency.

Sign convention: this module implements the closed-form solution with the
coupling integrals entering as -i (and the matching scattering quadratures);
the generic solver's convention differs by negating the coupling profiles,
which the consistency tests account for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import Dispersion, SINGULARITY_TOL, TriangularPotential
from .errors import RankDeficient, ValidationError
from .linefunc import Analyticity, LineMatrixFunction
from .profiles import ScalarProfile, ZERO_PROFILE, as_profile
from .rh import plemelj_split

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class EdgeCoupledSystem:
    """Middle-row coupling profiles c_{k,first}, c_{k,last}, k = 2..2n-1."""

    disp: Dispersion
    c_first: tuple = ()
    c_last: tuple = ()
    envelope: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        n = self.disp.n
        if n < 2:
            raise ValidationError("EdgeCoupledSystem", "needs n >= 2 (no middle rows otherwise)")
        for name in ("c_first", "c_last"):
            raw = list(getattr(self, name) or ())
            if len(raw) > 2 * n - 2:
                raise ValidationError(name, f"at most {2 * n - 2} middle rows for n = {n}")
            raw += [None] * (2 * n - 2 - len(raw))
            object.__setattr__(self, name, tuple(as_profile(p) for p in raw))
        c, eps = self.envelope
        if not (c > 0 and eps > 0):
            raise ValidationError("EdgeCoupledSystem.envelope", "C and eps must be positive")

    @property
    def n(self) -> int:
        return self.disp.n

    def profile_first(self, k: int) -> ScalarProfile:
        """Coupling of row k (1-based, 2 <= k <= 2n-1) to the first component."""
        return self.c_first[k - 2]

    def profile_last(self, k: int) -> ScalarProfile:
        return self.c_last[k - 2]

    def as_potential(self) -> TriangularPotential:
        """Embedding: first-column entries below the diagonal blocks, last column above."""
        n = self.n
        q11 = [[None] * n for _ in range(n)]
        q12 = [[None] * n for _ in range(n)]
        q21 = [[None] * n for _ in range(n)]
        q22 = [[None] * n for _ in range(n)]
        for k in range(2, 2 * n):
            first, last = self.profile_first(k), self.profile_last(k)
            if k <= n:
                q11[k - 1][0] = first
                q12[k - 1][n - 1] = last
            else:
                q21[k - n - 1][0] = first
                q22[k - n - 1][n - 1] = last
        return TriangularPotential(n, q11=q11, q12=q12, q21=q21, q22=q22, envelope=self.envelope)

    def negated(self) -> "EdgeCoupledSystem":
        return EdgeCoupledSystem(
            self.disp,
            tuple(p.scaled(-1.0) for p in self.c_first),
            tuple(p.scaled(-1.0) for p in self.c_last),
            self.envelope,
        )


@dataclass(frozen=True)
class EdgeBoundary:
    """Boundary matrix of the class: row n is (1, 0, ..., 0), rows k < n are
    (0, h_{k2}, ..., h_{kn}) with the block [h_{kj}] invertible."""

    n: int
    h_block: np.ndarray = field(repr=False)
    tol: float = SINGULARITY_TOL

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h_block, dtype=complex))
        if h.shape != (self.n - 1, self.n - 1):
            raise ValidationError("EdgeBoundary.h_block", f"need shape {(self.n - 1, self.n - 1)}")
        object.__setattr__(self, "h_block", h)
        if abs(np.linalg.det(h)) <= self.tol:
            raise ValidationError("EdgeBoundary.h_block", "block determinant below tolerance")

    def entry(self, k: int, j: int) -> complex:
        """h_{kj}, 1-based with k = 1..n-1, j = 2..n."""
        return complex(self.h_block[k - 1, j - 2])

    def as_matrix(self) -> np.ndarray:
        h = np.zeros((self.n, self.n), dtype=complex)
        h[: self.n - 1, 1:] = self.h_block
        h[self.n - 1, 0] = 1.0
        return h


@dataclass(frozen=True)
class EdgeProfiles:
    """The split data c_{k-}(s), c_{k+}(s) on a uniform s-grid, k = 1..n-1."""

    s_grid: np.ndarray = field(repr=False)
    c_minus: np.ndarray = field(repr=False)
    c_plus: np.ndarray = field(repr=False)
    decay_rate: float
    amplitude: float  # fitted M with |c| <= M e^{-rate s}

    def __post_init__(self):
        if self.c_minus.shape != self.c_plus.shape or self.c_minus.shape[1] != len(self.s_grid):
            raise ValidationError("EdgeProfiles", "shape mismatch between parts and s grid")


def fit_profile_amplitude(s_grid: np.ndarray, rows: np.ndarray, rate: float) -> float:
    mags = np.abs(rows) * np.exp(rate * s_grid)[None, :]
    return float(mags.max()) if rows.size else 0.0


def _column_entries(sys: EdgeCoupledSystem, bnd: EdgeBoundary, lam: np.ndarray) -> np.ndarray:
    """S_{k,n}(lambda) for k = 1..n-1, shape (n-1, len(lam))."""
    n = sys.n
    xi = sys.disp.xi_arr
    out = np.zeros((n - 1, len(lam)), dtype=complex)
    for k in range(1, n):
        acc = np.zeros(len(lam), dtype=complex)
        pf = sys.profile_first(n + k)
        if not pf.is_zero:
            acc += pf.halfline_transform(-lam * (xi[n + k - 1] - xi[0]))
        pl = sys.profile_last(n + k)
        if not pl.is_zero:
            acc += pl.halfline_transform(lam * (xi[2 * n - 1] - xi[n + k - 1]))
        for j in range(2, n + 1):
            h = bnd.entry(k, j)
            if h == 0:
                continue
            pf = sys.profile_first(j)
            if not pf.is_zero:
                acc -= h * pf.halfline_transform(-lam * (xi[j - 1] - xi[0]))
            pl = sys.profile_last(j)
            if not pl.is_zero:
                acc -= h * pl.halfline_transform(lam * (xi[2 * n - 1] - xi[j - 1]))
        out[k - 1] = 1j * acc
    return out


def edge_scattering(sys: EdgeCoupledSystem, bnd: EdgeBoundary, grid: np.ndarray) -> LineMatrixFunction:
    """Scattering matrix of the class: identity plus a single nonzero column.

    Column n holds one closed-form quadrature per row; the minus-type piece
    collects the first-component couplings, the plus-type piece the
    last-component ones.
    """
    n = sys.n
    xi = sys.disp.xi_arr
    vals = np.tile(np.eye(n, dtype=complex), (len(grid), 1, 1))
    col = _column_entries(sys, bnd, np.asarray(grid, dtype=float))
    for k in range(1, n):
        vals[:, k - 1, n - 1] += col[k - 1]
    _, eps = sys.envelope
    delta = eps / (xi[2 * n - 1] - xi[0])
    return LineMatrixFunction(grid, vals, Analyticity("strip", delta))


def edge_explicit_solution(
    sys: EdgeCoupledSystem, lam: float, a, b, x_grid: np.ndarray
) -> np.ndarray:
    """Closed-form solution samples, shape (2n, len(x_grid)).

    a carries the first-block amplitudes, b the second block; the two edge
    components are free exponentials and each middle row picks up incomplete
    transforms of its two coupling profiles.
    """
    n = sys.n
    xi = sys.disp.xi_arr
    a = np.asarray(a, dtype=complex).reshape(n)
    b = np.asarray(b, dtype=complex).reshape(n)
    x = np.asarray(x_grid, dtype=float)
    amps = np.concatenate([a, b])
    z = amps[:, None] * np.exp(1j * lam * xi[:, None] * x[None, :])
    for k in range(2, 2 * n):
        pf = sys.profile_first(k)
        phase = np.exp(1j * lam * xi[k - 1] * x)
        if not pf.is_zero:
            tr = pf.halfline_transform_from(x, lam * (xi[0] - xi[k - 1]))
            z[k - 1] -= 1j * a[0] * tr * phase
        pl = sys.profile_last(k)
        if not pl.is_zero:
            tr = pl.halfline_transform_from(x, lam * (xi[2 * n - 1] - xi[k - 1]))
            z[k - 1] -= 1j * b[n - 1] * tr * phase
    return z


def edge_split(s_matrix: LineMatrixFunction, *, edge_tol: float = 1e-2, edge_correction: bool = True):
    """Entrywise additive split of the nonzero column, rows 1..n-1.

    Returns a list of (plus, minus) scalar LineMatrixFunctions; by the
    entire-function argument the parts coincide with the forward transforms
    of the underlying half-line data.
    """
    n = s_matrix.m
    out = []
    for k in range(1, n):
        entry = s_matrix.entry(k - 1, n - 1)
        out.append(plemelj_split(entry, edge_tol=edge_tol, edge_correction=edge_correction))
    return out


def _one_sided_inverse(
    grid: np.ndarray, values: np.ndarray, s_points: np.ndarray, kind: str, w: float = 2.0
):
    """Invert a one-sided transform back to its half-line density.

    kind 'minus': C(l) = int c(s) e^{-i l s} ds, density (1/2pi) int C e^{+i l s} dl.
    kind 'plus':  C(l) = int c(s) e^{+i l s} ds, density (1/2pi) int C e^{-i l s} dl.
    A one-sided rational tail model makes the window truncation analytic.
    """
    n = len(grid)
    step = float(grid[1] - grid[0])
    k = max(6, int(0.05 * n))
    idx = np.concatenate([np.arange(k), np.arange(n - k, n)])
    sgn = 1.0 if kind == "minus" else -1.0
    pole = sgn * 1j * w  # minus-type poles sit in the upper half-plane
    basis = np.stack([1.0 / (grid - pole), 1.0 / (grid - pole) ** 2, 1.0 / (grid - pole) ** 3], axis=1)
    scale = np.abs(basis[idx]).max(axis=0)
    coef, *_ = np.linalg.lstsq(basis[idx] / scale, values[idx], rcond=None)
    coef = coef / scale
    rem = values - basis @ coef

    phases = np.exp(sgn * 1j * np.outer(s_points, grid))
    dens = (step / (2.0 * np.pi)) * (phases @ rem)
    es = np.exp(-w * s_points)
    if kind == "minus":
        dens += coef[0] * 1j * es + coef[1] * (-s_points * es) + coef[2] * (-0.5j * s_points ** 2 * es)
    else:
        dens += coef[0] * (-1j) * es + coef[1] * (-s_points * es) + coef[2] * (0.5j * s_points ** 2 * es)
    return dens


def edge_invert_transforms(
    splits,
    disp: Dispersion,
    *,
    s_max: float,
    s_step: float | None = None,
    envelope_eps: float = 1.0,
) -> EdgeProfiles:
    """Half-line densities c_{k+-}(s) from the split scattering entries."""
    n = disp.n
    xi = disp.xi_arr
    if s_step is None:
        grid0 = splits[0][0].grid
        s_step = math.pi / float(max(abs(grid0[0]), abs(grid0[-1])))
    s = np.arange(0.0, s_max + 0.5 * s_step, s_step)
    c_minus = np.zeros((n - 1, len(s)), dtype=complex)
    c_plus = np.zeros((n - 1, len(s)), dtype=complex)
    for k, (part_plus, part_minus) in enumerate(splits):
        grid = part_plus.grid
        c_minus[k] = _one_sided_inverse(grid, part_minus.values[:, 0, 0], s, "minus")
        c_plus[k] = _one_sided_inverse(grid, part_plus.values[:, 0, 0], s, "plus")
    rate = envelope_eps / (xi[2 * n - 1] - xi[0])
    amp = max(
        fit_profile_amplitude(s, c_minus, rate),
        fit_profile_amplitude(s, c_plus, rate),
    )
    return EdgeProfiles(s, c_minus, c_plus, rate, amp)


def exact_edge_profiles(
    sys: EdgeCoupledSystem, bnd: EdgeBoundary, s_grid: np.ndarray
) -> EdgeProfiles:
    """Closed-form c_{k+-}(s) for oracle comparisons."""
    n = sys.n
    xi = sys.disp.xi_arr
    s = np.asarray(s_grid, dtype=float)
    c_minus = np.zeros((n - 1, len(s)), dtype=complex)
    c_plus = np.zeros((n - 1, len(s)), dtype=complex)
    for k in range(1, n):
        beta = xi[n + k - 1] - xi[0]
        acc_m = sys.profile_first(n + k)(s / beta) / beta
        beta_p = xi[2 * n - 1] - xi[n + k - 1]
        acc_p = sys.profile_last(n + k)(s / beta_p) / beta_p
        for j in range(2, n + 1):
            h = bnd.entry(k, j)
            bj = xi[j - 1] - xi[0]
            acc_m = acc_m - h * sys.profile_first(j)(s / bj) / bj
            bjp = xi[2 * n - 1] - xi[j - 1]
            acc_p = acc_p - h * sys.profile_last(j)(s / bjp) / bjp
        c_minus[k - 1] = 1j * acc_m
        c_plus[k - 1] = 1j * acc_p
    _, eps = sys.envelope
    rate = eps / (xi[2 * n - 1] - xi[0])
    amp = max(fit_profile_amplitude(s, c_minus, rate), fit_profile_amplitude(s, c_plus, rate))
    return EdgeProfiles(s, c_minus, c_plus, rate, amp)


def _family_matrix(disp: Dispersion, boundaries, which: str) -> np.ndarray:
    """Stacked per-point system matrix; identical at every s by construction."""
    n = disp.n
    xi = disp.xi_arr
    rows = []
    for bnd in boundaries:
        for k in range(1, n):
            row = np.zeros(2 * (n - 1), dtype=complex)
            if which == "minus":
                row[k - 1] = 1.0 / (xi[n + k - 1] - xi[0])
                for j in range(2, n + 1):
                    row[(n - 1) + (j - 2)] = -bnd.entry(k, j) / (xi[j - 1] - xi[0])
            else:
                row[k - 1] = 1.0 / (xi[2 * n - 1] - xi[n + k - 1])
                for j in range(2, n + 1):
                    row[(n - 1) + (j - 2)] = -bnd.entry(k, j) / (xi[2 * n - 1] - xi[j - 1])
            rows.append(row)
    return np.array(rows)


@dataclass(frozen=True)
class RecoveredCoefficients:
    """Recovered coupling data, native argument x = s / scale per family."""

    s_grid: np.ndarray = field(repr=False)
    first_upper: np.ndarray = field(repr=False)  # rows k=1..n-1: c_{n+k,first}(s/(xi_{n+k}-xi_1))
    first_lower: np.ndarray = field(repr=False)  # rows j=2..n:   c_{j,first}(s/(xi_j-xi_1))
    last_upper: np.ndarray = field(repr=False)   # rows k=1..n-1: c_{n+k,last}(s/(xi_2n-xi_{n+k}))
    last_lower: np.ndarray = field(repr=False)   # rows j=2..n:   c_{j,last}(s/(xi_2n-xi_j))
    diagnostics: dict = field(default_factory=dict)

    def native_first(self, disp: Dispersion, row: int, x: np.ndarray) -> np.ndarray:
        """c_{row,first}(x) by cubic resampling from the scaled samples."""
        return _resample(self.s_grid, *_pick_first(self, disp, row), x)

    def native_last(self, disp: Dispersion, row: int, x: np.ndarray) -> np.ndarray:
        return _resample(self.s_grid, *_pick_last(self, disp, row), x)


def _pick_first(rec: RecoveredCoefficients, disp: Dispersion, row: int):
    n = disp.n
    xi = disp.xi_arr
    if row <= n:
        return rec.first_lower[row - 2], xi[row - 1] - xi[0]
    return rec.first_upper[row - n - 1], xi[row - 1] - xi[0]


def _pick_last(rec: RecoveredCoefficients, disp: Dispersion, row: int):
    n = disp.n
    xi = disp.xi_arr
    if row <= n:
        return rec.last_lower[row - 2], xi[2 * n - 1] - xi[row - 1]
    return rec.last_upper[row - n - 1], xi[2 * n - 1] - xi[row - 1]


def _resample(s_grid: np.ndarray, samples: np.ndarray, scale: float, x: np.ndarray) -> np.ndarray:
    from scipy.interpolate import CubicSpline

    s_target = scale * np.asarray(x, dtype=float)
    spline_re = CubicSpline(s_grid, samples.real)
    spline_im = CubicSpline(s_grid, samples.imag)
    inside = np.clip(s_target, s_grid[0], s_grid[-1])
    return spline_re(inside) + 1j * spline_im(inside)


def edge_solve_coefficients(
    datasets,
    disp: Dispersion,
    *,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> RecoveredCoefficients:
    """Solve the stacked per-point systems for the coupling coefficients.

    datasets: sequence of (EdgeProfiles, EdgeBoundary) sharing one s-grid.
    Rank deficiency is a first-class outcome: one dataset, or boundary blocks
    with a singular difference, leave the 2(n-1) unknowns underdetermined at
    every s, and that is reported rather than silently least-squared away.
    """
    if not datasets:
        raise ValidationError("edge_solve_coefficients", "need at least one dataset")
    n = disp.n
    profiles = [d[0] for d in datasets]
    boundaries = [d[1] for d in datasets]
    s = profiles[0].s_grid
    for p in profiles[1:]:
        if len(p.s_grid) != len(s) or not np.allclose(p.s_grid, s):
            raise ValidationError("edge_solve_coefficients", "datasets live on different s grids")

    result = {}
    diagnostics = {"s_points": len(s)}
    for which in ("minus", "plus"):
        mat = _family_matrix(disp, boundaries, which)
        rhs = np.concatenate(
            [(-1j) * (p.c_minus if which == "minus" else p.c_plus) for p in profiles], axis=0
        )
        svals = np.linalg.svd(mat, compute_uv=False)
        smax = svals[0] if len(svals) else 0.0
        rank = int(np.sum(svals > rank_tol * max(smax, 1.0)))
        unknowns = 2 * (n - 1)
        diagnostics[f"{which}_singular_values"] = svals.tolist()
        diagnostics[f"{which}_rank"] = rank
        diagnostics[f"{which}_min_singular_value"] = float(svals.min()) if len(svals) else 0.0
        if rank < unknowns:
            deficiency = unknowns - rank
            diagnostics[f"{which}_deficiency"] = deficiency
            diagnostics["per_s_deficient_fraction"] = 1.0
            raise RankDeficient(deficiency, 1.0, diagnostics)
        sol = np.linalg.pinv(mat) @ rhs
        result[which] = sol
    sol_m, sol_p = result["minus"], result["plus"]
    return RecoveredCoefficients(
        s_grid=s,
        first_upper=sol_m[: n - 1],
        first_lower=sol_m[n - 1 :],
        last_upper=sol_p[: n - 1],
        last_lower=sol_p[n - 1 :],
        diagnostics=diagnostics,
    )


def edge_roundtrip(
    sys: EdgeCoupledSystem,
    bnd: EdgeBoundary,
    bnd_tilde: EdgeBoundary,
    grid: np.ndarray,
    *,
    compare_to: float = 10.0,
    split_edge_tol: float = 1e-2,
    s_step: float | None = None,
) -> dict:
    """Forward both boundaries, split, invert, solve, and score the recovery.

    Returns per-row relative errors of the recovered coupling profiles on
    the native argument in [0, compare_to], plus the solver diagnostics.
    """
    n = sys.n
    xi = sys.disp.xi_arr
    s_max = (xi[2 * n - 1] - xi[0]) * compare_to
    datasets = []
    for boundary in (bnd, bnd_tilde):
        s_mat = edge_scattering(sys, boundary, grid)
        splits = edge_split(s_mat, edge_tol=split_edge_tol)
        prof = edge_invert_transforms(
            splits, sys.disp, s_max=s_max, s_step=s_step, envelope_eps=sys.envelope[1]
        )
        datasets.append((prof, boundary))
    rec = edge_solve_coefficients(datasets, sys.disp)

    x_cmp = np.linspace(0.0, compare_to, 201)
    errors = {}
    worst = 0.0
    for row in range(2, 2 * n):
        for which, native, truth in (
            ("first", rec.native_first(sys.disp, row, x_cmp), sys.profile_first(row)(x_cmp)),
            ("last", rec.native_last(sys.disp, row, x_cmp), sys.profile_last(row)(x_cmp)),
        ):
            scale = float(np.abs(truth).max())
            err = float(np.abs(native - truth).max())
            rel = err / scale if scale > 0 else err
            errors[f"c_{row}_{which}"] = rel
            worst = max(worst, rel)
    return {
        "max_rel_error": worst,
        "per_family": errors,
        "diagnostics": rec.diagnostics,
        "compare_to": compare_to,
    }
