"""Uniform grids, complex fields, finite-difference Laplacians and analytic eigenbases.

Everything here works on node-sampled values of a uniform grid on an interval
or a rectangle.  Integrals use the composite trapezoidal rule, and gradient
energies use differences across grid cells (midpoint-centred), which makes

    -Re <lap(u), u> == gradient_sq(u)

hold exactly for both boundary conditions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import AliasingError, GridMismatchError

__all__ = [
    "BC",
    "Grid",
    "Field",
    "EigenBasis",
    "laplacian",
    "laplacian_values",
    "laplacian_matrix",
    "gradient_sq",
    "integrate",
    "inner",
    "norm_lp",
    "norm_l2",
    "norm_h1",
    "eigenbasis",
    "project",
    "synthesize",
    "random_field",
    "UNIT_BALL_VOLUME",
]

# volume of the unit ball in R^N
UNIT_BALL_VOLUME = {1: 2.0, 2: np.pi, 3: 4.0 * np.pi / 3.0}


class BC(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class Grid:
    """Uniform node grid on ``[x0, x1]`` or ``[x0, x1] x [y0, y1]``.

    ``n`` (and ``ny``) count nodes including both boundary nodes.
    """

    x0: float
    x1: float
    n: int
    y0: float | None = None
    y1: float | None = None
    ny: int | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need at least 3 nodes per axis, got n={self.n}")
        if not self.x1 > self.x0:
            raise ValueError("x1 must exceed x0")
        rect = (self.y0, self.y1, self.ny)
        if any(v is not None for v in rect):
            if any(v is None for v in rect):
                raise ValueError("rectangle needs y0, y1 and ny")
            if self.ny < 3:
                raise ValueError(f"need at least 3 nodes per axis, got ny={self.ny}")
            if not self.y1 > self.y0:
                raise ValueError("y1 must exceed y0")

    @classmethod
    def interval(cls, x0: float, x1: float, n: int) -> "Grid":
        return cls(float(x0), float(x1), int(n))

    @classmethod
    def rectangle(cls, x0: float, x1: float, y0: float, y1: float, nx: int, ny: int) -> "Grid":
        return cls(float(x0), float(x1), int(nx), float(y0), float(y1), int(ny))

    @property
    def dim(self) -> int:
        return 1 if self.ny is None else 2

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) if self.dim == 1 else (self.n, self.ny)

    @property
    def lengths(self) -> tuple[float, ...]:
        if self.dim == 1:
            return (self.x1 - self.x0,)
        return (self.x1 - self.x0, self.y1 - self.y0)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(length / (m - 1) for length, m in zip(self.lengths, self.shape))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        ax = (np.linspace(self.x0, self.x1, self.n),)
        if self.dim == 2:
            ax += (np.linspace(self.y0, self.y1, self.ny),)
        return ax

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays with ``indexing='ij'``."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights, shaped like the grid."""
        ws = []
        for h, m in zip(self.spacing, self.shape):
            w = np.full(m, h)
            w[0] = w[-1] = 0.5 * h
            ws.append(w)
        if self.dim == 1:
            return ws[0]
        return np.outer(ws[0], ws[1])

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        if self.dim == 1:
            mask[[0, -1]] = True
        else:
            mask[[0, -1], :] = True
            mask[:, [0, -1]] = True
        return mask

    def to_dict(self) -> dict:
        if self.dim == 1:
            return {"kind": "interval", "x0": self.x0, "x1": self.x1, "n": self.n}
        return {
            "kind": "rectangle",
            "x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1,
            "nx": self.n, "ny": self.ny,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        if d.get("kind", "interval") == "interval":
            return cls.interval(d["x0"], d["x1"], d["n"])
        return cls.rectangle(d["x0"], d["x1"], d["y0"], d["y1"], d["nx"], d["ny"])


@dataclass(frozen=True, eq=False)
class Field:
    """Complex node values on a grid, tagged with a boundary condition.

    Dirichlet fields must vanish on the boundary; values within 1e-10 of zero
    (relative to the field's size) are snapped to exactly zero.
    """

    grid: Grid
    values: np.ndarray
    bc: BC = BC.DIRICHLET

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(f"values have shape {vals.shape}, grid expects {self.grid.shape}")
        bc = BC(self.bc)
        if bc is BC.DIRICHLET:
            edge = np.abs(vals[self.grid.boundary_mask])
            scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 1.0)
            if edge.size and np.max(edge) > 1e-10 * scale:
                raise ValueError("Dirichlet field does not vanish on the boundary")
            vals[self.grid.boundary_mask] = 0.0
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "bc", bc)

    @classmethod
    def from_function(cls, grid: Grid, func, bc: BC | str = BC.DIRICHLET) -> "Field":
        vals = np.asarray(func(*grid.mesh()), dtype=complex)
        vals = np.broadcast_to(vals, grid.shape).copy()
        if BC(bc) is BC.DIRICHLET:
            vals[grid.boundary_mask] = 0.0
        return cls(grid, vals, BC(bc))

    @classmethod
    def zeros(cls, grid: Grid, bc: BC | str = BC.DIRICHLET) -> "Field":
        return cls(grid, np.zeros(grid.shape, dtype=complex), BC(bc))

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values, self.bc)

    def __mul__(self, scalar) -> "Field":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __add__(self, other: "Field") -> "Field":
        _check_same(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same(self, other)
        return self.with_values(self.values - other.values)

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def header(self) -> dict:
        return {"grid": self.grid.to_dict(), "bc": self.bc.value}

    def to_csv(self, path) -> None:
        """Node coordinates then real and imaginary parts, one node per row."""
        coords = [c.ravel() for c in self.grid.mesh()]
        names = ["x", "y"][: len(coords)]
        cols = np.column_stack([*coords, self.values.real.ravel(), self.values.imag.ravel()])
        np.savetxt(path, cols, delimiter=",", header=",".join(names + ["re_u", "im_u"]),
                   comments="", fmt="%.17g")

    @classmethod
    def read_csv(cls, path, header: dict) -> "Field":
        grid = Grid.from_dict(header["grid"])
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        vals = (data[:, -2] + 1j * data[:, -1]).reshape(grid.shape)
        return cls(grid, vals, BC(header["bc"]))


def _check_same(f: Field, g: Field) -> None:
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")
    if f.bc is not g.bc:
        raise GridMismatchError("fields carry different boundary conditions")


# ---------------------------------------------------------------------------
# Laplacian
# ---------------------------------------------------------------------------

def laplacian_values(values: np.ndarray, grid: Grid, bc: BC | str) -> np.ndarray:
    """Second-order centred Laplacian of raw node values."""
    bc = BC(bc)
    values = np.asarray(values)
    out = np.zeros_like(values, dtype=complex if np.iscomplexobj(values) else float)
    for axis, h in enumerate(grid.spacing):
        pad = [(0, 0)] * values.ndim
        pad[axis] = (1, 1)
        # reflect mode puts u[1] in the ghost slot: the Neumann ghost node
        p = np.pad(values, pad, mode="reflect")
        sl = lambda a, b: tuple(slice(a, b) if i == axis else slice(None) for i in range(values.ndim))
        out += (p[sl(2, None)] - 2.0 * p[sl(1, -1)] + p[sl(None, -2)]) / (h * h)
    if bc is BC.DIRICHLET:
        out[grid.boundary_mask] = 0.0
    return out


def laplacian(f: Field) -> Field:
    return Field(f.grid, laplacian_values(f.values, f.grid, f.bc), f.bc)


def _lap1d(m: int, h: float, bc: BC) -> sp.csr_matrix:
    main = np.full(m, -2.0)
    off = np.ones(m - 1)
    lo, up = off.copy(), off.copy()
    if bc is BC.NEUMANN:
        up[0] = 2.0
        lo[-1] = 2.0
    return sp.diags([lo, main, up], [-1, 0, 1], format="csr") / (h * h)


def laplacian_matrix(grid: Grid, bc: BC | str, interior: bool = False) -> sp.csr_matrix:
    """Sparse matrix of the stencil acting on C-ordered flattened values.

    With ``interior=True`` (Dirichlet only) the matrix acts on interior
    unknowns; otherwise boundary rows of a Dirichlet operator are zero.
    """
    bc = BC(bc)
    if interior and bc is not BC.DIRICHLET:
        raise ValueError("interior restriction only applies to Dirichlet")
    if bc is BC.DIRICHLET:
        sizes = [m - 2 for m in grid.shape]
        blocks = [_lap1d(s, h, bc) for s, h in zip(sizes, grid.spacing)]
    else:
        sizes = list(grid.shape)
        blocks = [_lap1d(s, h, bc) for s, h in zip(sizes, grid.spacing)]
    if grid.dim == 1:
        mat = blocks[0]
    else:
        mat = sp.kron(blocks[0], sp.identity(sizes[1]), format="csr") + sp.kron(
            sp.identity(sizes[0]), blocks[1], format="csr")
    if interior or bc is BC.NEUMANN:
        return mat.tocsr()
    # embed the interior operator into the full node set
    idx = np.flatnonzero(~grid.boundary_mask.ravel())
    total = int(np.prod(grid.shape))
    emb = sp.csr_matrix((np.ones(idx.size), (idx, np.arange(idx.size))), shape=(total, idx.size))
    return (emb @ mat @ emb.T).tocsr()


# ---------------------------------------------------------------------------
# Quadrature and norms
# ---------------------------------------------------------------------------

def _values(f) -> np.ndarray:
    return f.values if isinstance(f, Field) else np.asarray(f)


def integrate(f, grid: Grid | None = None):
    """Trapezoidal integral of a Field, or of raw node values on ``grid``."""
    if isinstance(f, Field):
        grid = f.grid
    elif grid is None:
        raise TypeError("raw arrays need an explicit grid")
    vals = _values(f)
    if vals.shape != grid.shape:
        raise GridMismatchError(f"values have shape {vals.shape}, grid expects {grid.shape}")
    total = np.sum(grid.weights * vals)
    return complex(total) if np.iscomplexobj(total) else float(total)


def inner(f: Field, g: Field) -> complex:
    """L2 inner product, linear in the first slot: integral of f * conj(g)."""
    _check_same(f, g)
    return complex(np.sum(f.grid.weights * f.values * np.conj(g.values)))


def norm_lp(f: Field, p: float) -> float:
    return float(np.sum(f.grid.weights * np.abs(f.values) ** p)) ** (1.0 / p)


def norm_l2(f: Field) -> float:
    return norm_lp(f, 2.0)


def gradient_sq(f) -> float:
    """Squared L2 norm of the gradient, from differences across grid cells."""
    return gradient_sq_values(f.values, f.grid)


def gradient_sq_values(values: np.ndarray, grid: Grid) -> float:
    if grid.dim == 1:
        (h,) = grid.spacing
        return float(np.sum(np.abs(np.diff(values)) ** 2) / h)
    hx, hy = grid.spacing
    wx = np.full(grid.n, hx)
    wx[[0, -1]] *= 0.5
    wy = np.full(grid.ny, hy)
    wy[[0, -1]] *= 0.5
    dx = np.abs(np.diff(values, axis=0)) ** 2
    dy = np.abs(np.diff(values, axis=1)) ** 2
    return float(np.sum(dx * wy[None, :]) / hx + np.sum(dy * wx[:, None]) / hy)


def norm_h1(f: Field) -> float:
    return float(np.sqrt(norm_l2(f) ** 2 + gradient_sq(f)))


# ---------------------------------------------------------------------------
# Analytic eigenbases of -Laplacian
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenBasis:
    grid: Grid
    bc: BC
    indices: tuple[tuple[int, ...], ...]
    eigenvalues: np.ndarray
    functions: np.ndarray  # (count, *grid.shape), real, L2-normalised
    norms: np.ndarray  # normalisation constant applied to each raw mode
    _flat: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_flat", self.functions.reshape(len(self.indices), -1))

    def __len__(self) -> int:
        return len(self.indices)

    def mode(self, i: int) -> Field:
        return Field(self.grid, self.functions[i], self.bc)

    def find(self, index: tuple[int, ...]) -> int:
        return self.indices.index(tuple(index))

    def subset(self, positions: Sequence[int]) -> "EigenBasis":
        pos = list(positions)
        return EigenBasis(
            self.grid, self.bc, tuple(self.indices[i] for i in pos),
            self.eigenvalues[pos], self.functions[pos], self.norms[pos],
        )

    def project_values(self, values: np.ndarray) -> np.ndarray:
        wv = (self.grid.weights * values).ravel()
        if np.iscomplexobj(wv):
            # keeps the mode matrix real instead of promoting it on every call
            return self._flat @ wv.real + 1j * (self._flat @ wv.imag)
        return self._flat @ wv

    def synthesize_values(self, coeffs: np.ndarray) -> np.ndarray:
        c = np.asarray(coeffs)
        if np.iscomplexobj(c):
            out = c.real @ self._flat + 1j * (c.imag @ self._flat)
        else:
            out = c @ self._flat
        return out.reshape(self.grid.shape)


def _mode_1d(x: np.ndarray, a: float, b: float, m: int, bc: BC) -> tuple[np.ndarray, float]:
    length = b - a
    if bc is BC.DIRICHLET:
        xc = x - 0.5 * (a + b)
        # written about the centre so that odd modes are cosines, even modes sines
        raw = np.cos(m * np.pi * xc / length) if m % 2 else np.sin(m * np.pi * xc / length)
        raw[[0, -1]] = 0.0
        norm = np.sqrt(2.0 / length)
    else:
        raw = np.cos(m * np.pi * (x - a) / length)
        norm = np.sqrt((1.0 if m == 0 else 2.0) / length)
    return norm * raw, norm


def eigenbasis(grid: Grid, bc: BC | str, count: int) -> EigenBasis:
    """First ``count`` analytic eigenmodes of -Laplacian, sorted by eigenvalue.

    Ties are broken by the index tuple, so on (-1, 1)^2 the Dirichlet pair at
    5 pi^2 / 4 appears as cos(pi x/2) sin(pi y) followed by sin(pi x) cos(pi y/2).
    Modes whose wavelength is not longer than two grid spacings are refused.
    """
    bc = BC(bc)
    if count < 1:
        raise ValueError("count must be at least 1")
    first = 1 if bc is BC.DIRICHLET else 0
    limits = [m - 2 for m in grid.shape]  # keep wavelength 2L/m above 2h
    ranges = [range(first, lim + 1) for lim in limits]
    lengths = grid.lengths
    if grid.dim == 1:
        cand = [((m,), (m * np.pi / lengths[0]) ** 2) for m in ranges[0]]
    else:
        cand = [
            ((mx, my), (mx * np.pi / lengths[0]) ** 2 + (my * np.pi / lengths[1]) ** 2)
            for mx in ranges[0] for my in ranges[1]
        ]
    if count > len(cand):
        raise AliasingError(
            f"{count} modes requested but the grid resolves only {len(cand)} "
            "(mode wavelength would drop below 2h)")
    cand.sort(key=lambda item: (item[1], item[0]))
    chosen = cand[:count]
    funcs, norms = [], []
    for idx, _ in chosen:
        parts = [_mode_1d(ax, a, b, m, bc) for ax, (a, b), m in
                 zip(grid.axes, _bounds(grid), idx)]
        if grid.dim == 1:
            funcs.append(parts[0][0])
        else:
            funcs.append(np.outer(parts[0][0], parts[1][0]))
        norms.append(float(np.prod([p[1] for p in parts])))
    return EigenBasis(
        grid, bc, tuple(idx for idx, _ in chosen),
        np.array([mu for _, mu in chosen]), np.array(funcs), np.array(norms),
    )


def _bounds(grid: Grid) -> list[tuple[float, float]]:
    if grid.dim == 1:
        return [(grid.x0, grid.x1)]
    return [(grid.x0, grid.x1), (grid.y0, grid.y1)]


def project(f: Field, basis: EigenBasis) -> np.ndarray:
    """Coefficients c_i = inner(f, e_i)."""
    if f.grid != basis.grid:
        raise GridMismatchError("field and basis live on different grids")
    return basis.project_values(f.values)


def synthesize(coeffs: np.ndarray, basis: EigenBasis) -> Field:
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (len(basis),):
        raise GridMismatchError(f"expected {len(basis)} coefficients, got {coeffs.shape}")
    return Field(basis.grid, basis.synthesize_values(coeffs), basis.bc)


def random_field(grid: Grid, n_modes: int = 32, seed: int = 0, decay: float = 2.0,
                 bc: BC | str = BC.DIRICHLET) -> Field:
    """Complex Gaussian coefficients on the first modes, damped by (position+1)^-decay."""
    basis = eigenbasis(grid, bc, n_modes)
    rng = np.random.default_rng(seed)
    damp = np.arange(1, n_modes + 1, dtype=float) ** decay
    coeffs = (rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes)) / damp
    return Field(grid, basis.synthesize_values(coeffs), basis.bc)
