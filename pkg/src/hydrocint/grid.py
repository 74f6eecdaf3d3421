"""Periodic grids, band-limited fields and spectral calculus on T^d.

Everything lives on the unit torus [0,1)^d with uniform tensor-product
grids whose per-axis sizes are powers of two.  Fields are stored as real
physical samples with a lazily cached full FFT; all differential and
integral operators act by mode multiplication, so they are exact for
band-limited data.  Products are pointwise collocation products by
default (alias-consistent, which is what makes the oscillation-identity
residuals cancel to machine precision); a 3/2-rule de-aliased product is
available where true spectral content matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import DimensionMismatch, NonZeroMean, NonZeroZMean

_WORKERS = 1


def set_fft_workers(n: int) -> None:
    """Cap internal FFT parallelism (driven by HYDROCINT_THREADS)."""
    global _WORKERS
    _WORKERS = max(1, int(n))


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


VALID_ROLES = ("x1", "x2", "z")

# rank -> number of stored components (vector length is grid-dependent)
SYM2_COMPONENTS = ("11", "12", "22")
TENSOR2_COMPONENTS = ("11", "12", "21", "22")


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on [0,1)^d with labelled axes.

    axis_roles labels which axes are horizontal (``x1``, ``x2``) and which
    one is vertical (``z``).  Grids used for purely horizontal building
    blocks carry no vertical axis at all.
    """

    dims: tuple
    axis_roles: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        roles = tuple(self.axis_roles)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "axis_roles", roles)
        if len(dims) != len(roles):
            raise DimensionMismatch("dims and axis_roles must have equal length")
        if not 1 <= len(dims) <= 3:
            raise DimensionMismatch("only d = 1, 2, 3 grids are supported")
        for n in dims:
            if n < 8 or not _is_pow2(n):
                raise DimensionMismatch(f"axis size {n} must be a power of two >= 8")
        for r in roles:
            if r not in VALID_ROLES:
                raise DimensionMismatch(f"unknown axis role {r!r}")
        if roles.count("z") > 1:
            raise DimensionMismatch("at most one vertical axis")
        horiz = [r for r in roles if r != "z"]
        if len(set(horiz)) != len(horiz):
            raise DimensionMismatch("duplicate horizontal axis roles")

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def horizontal_axes(self) -> tuple:
        return tuple(i for i, r in enumerate(self.axis_roles) if r != "z")

    @property
    def vertical_axis(self):
        for i, r in enumerate(self.axis_roles):
            if r == "z":
                return i
        return None

    @property
    def npoints(self) -> int:
        return int(np.prod(self.dims))

    def nyquist(self, axis: int) -> int:
        return self.dims[axis] // 2

    def coordinates(self):
        """Meshgrid (ij indexing) of the sample coordinates along each axis."""
        axes = [np.arange(n, dtype=float) / n for n in self.dims]
        return np.meshgrid(*axes, indexing="ij")

    def freqs(self, axis: int) -> np.ndarray:
        """Integer mode numbers along one axis in FFT layout."""
        n = self.dims[axis]
        return np.fft.fftfreq(n, d=1.0 / n)

    def mode_mesh(self):
        return np.meshgrid(*[self.freqs(a) for a in range(self.d)], indexing="ij")


def grid2d_scheme(n1: int, nz: int) -> TorusGrid:
    return TorusGrid((n1, nz), ("x1", "z"))


def grid2d_mikado(n1: int, n2: int) -> TorusGrid:
    return TorusGrid((n1, n2), ("x1", "x2"))


def grid3d(n1: int, n2: int, nz: int) -> TorusGrid:
    return TorusGrid((n1, n2, nz), ("x1", "x2", "z"))


def grid1d(n: int) -> TorusGrid:
    return TorusGrid((n,), ("x1",))


class TorusField:
    """Real band-limited field on a TorusGrid.

    rank is one of ``scalar``, ``vector`` (components along the horizontal
    directions unless stated otherwise), ``sym2`` (symmetric 2x2 tensor
    stored as the 3 independent components 11, 12, 22) and ``tensor2``
    (full 2x2 tensor, components 11, 12, 21, 22).  Data is stored with a
    leading component axis; scalars use a length-1 component axis
    internally but expose plain arrays.
    """

    __slots__ = ("grid", "rank", "data", "_spec")

    def __init__(self, grid: TorusGrid, rank: str, data: np.ndarray, _spec=None):
        data = np.asarray(data, dtype=float)
        if rank == "scalar":
            if data.shape == grid.dims:
                data = data[None]
            ncomp = 1
        elif rank == "vector":
            ncomp = data.shape[0]
        elif rank == "sym2":
            ncomp = 3
        elif rank == "tensor2":
            ncomp = 4
        else:
            raise DimensionMismatch(f"unknown rank {rank!r}")
        if data.shape != (ncomp,) + grid.dims:
            raise DimensionMismatch(
                f"data shape {data.shape} incompatible with rank {rank} on {grid.dims}"
            )
        self.grid = grid
        self.rank = rank
        self.data = data
        self.data.flags.writeable = False
        self._spec = _spec

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, grid: TorusGrid, rank: str = "scalar", ncomp: int = None):
        if rank == "scalar":
            ncomp = 1
        elif rank == "sym2":
            ncomp = 3
        elif rank == "tensor2":
            ncomp = 4
        elif ncomp is None:
            ncomp = len(grid.horizontal_axes)
        return cls(grid, rank, np.zeros((ncomp,) + grid.dims))

    @classmethod
    def constant(cls, grid: TorusGrid, value):
        return cls(grid, "scalar", np.full((1,) + grid.dims, float(value)))

    @classmethod
    def from_function(cls, grid: TorusGrid, fn, rank: str = "scalar"):
        """Sample an analytic callable fn(*coords) on the grid."""
        mesh = grid.coordinates()
        out = fn(*mesh)
        if rank == "scalar":
            return cls(grid, rank, np.asarray(out, dtype=float)[None])
        return cls(grid, rank, np.stack([np.asarray(c, dtype=float) for c in out]))

    @classmethod
    def from_spectral(cls, grid: TorusGrid, rank: str, spec: np.ndarray):
        spec = hermitianize(np.asarray(spec, dtype=complex), grid)
        axes = tuple(range(1, grid.d + 1))
        data = sfft.ifftn(spec, axes=axes, workers=_WORKERS).real
        return cls(grid, rank, data, _spec=spec)

    # -- representations ----------------------------------------------
    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @property
    def values(self) -> np.ndarray:
        """Physical samples; component axis dropped for scalars."""
        return self.data[0] if self.rank == "scalar" else self.data

    @property
    def spec(self) -> np.ndarray:
        """Unnormalised full-FFT coefficients, shape (ncomp, *dims)."""
        if self._spec is None:
            axes = tuple(range(1, self.grid.d + 1))
            self._spec = sfft.fftn(self.data, axes=axes, workers=_WORKERS)
        return self._spec

    def band_limit(self, rel_tol: float = 1e-13) -> int:
        """Largest |k|_inf carrying a coefficient above rel_tol of the peak."""
        mags = np.abs(self.spec).max(axis=0)
        peak = mags.max()
        if peak == 0.0:
            return 0
        kinf = np.zeros(self.grid.dims)
        for mesh in self.grid.mode_mesh():
            kinf = np.maximum(kinf, np.abs(mesh))
        sig = mags > rel_tol * peak
        return int(kinf[sig].max()) if sig.any() else 0

    def component(self, i: int) -> "TorusField":
        return TorusField(self.grid, "scalar", self.data[i][None])

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean/Frobenius magnitude."""
        if self.rank == "scalar":
            return np.abs(self.data[0])
        if self.rank == "sym2":
            d = self.data
            return np.sqrt(d[0] ** 2 + 2.0 * d[1] ** 2 + d[2] ** 2)
        return np.sqrt(np.sum(self.data**2, axis=0))

    # -- arithmetic (pointwise, alias-consistent) ----------------------
    def _check_same_grid(self, other: "TorusField"):
        if self.grid != other.grid:
            raise DimensionMismatch("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, TorusField):
            self._check_same_grid(other)
            if self.rank != other.rank:
                raise DimensionMismatch(f"rank mismatch {self.rank} vs {other.rank}")
            return TorusField(self.grid, self.rank, self.data + other.data)
        return TorusField(self.grid, self.rank, self.data + float(other))

    def __sub__(self, other):
        if isinstance(other, TorusField):
            self._check_same_grid(other)
            if self.rank != other.rank:
                raise DimensionMismatch(f"rank mismatch {self.rank} vs {other.rank}")
            return TorusField(self.grid, self.rank, self.data - other.data)
        return TorusField(self.grid, self.rank, self.data - float(other))

    def __rsub__(self, other):
        return TorusField(self.grid, self.rank, float(other) - self.data)

    def __neg__(self):
        return TorusField(self.grid, self.rank, -self.data)

    def __mul__(self, other):
        if isinstance(other, TorusField):
            return multiply(self, other)
        return TorusField(self.grid, self.rank, self.data * float(other))

    __rmul__ = __mul__
    __radd__ = __add__

    def allclose(self, other: "TorusField", atol=1e-12, rtol=1e-12) -> bool:
        return np.allclose(self.data, other.data, atol=atol, rtol=rtol)


# ----------------------------------------------------------------------
# spectral helpers


def hermitianize(spec: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Project FFT coefficients onto the Hermitian (real-field) subspace."""
    conj = np.conj(spec)
    for a in range(1, grid.d + 1):
        conj = np.roll(np.flip(conj, axis=a), 1, axis=a)
    return 0.5 * (spec + conj)


@lru_cache(maxsize=64)
def _deriv_multiplier(dims: tuple, axis: int, order: int) -> np.ndarray:
    """(2 pi i k)^order along one axis, Nyquist zeroed for odd orders."""
    n = dims[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = (2j * np.pi * k) ** order
    if order % 2 == 1:
        mult[n // 2] = 0.0
    shape = [1] * len(dims)
    shape[axis] = n
    return mult.reshape(shape)


def transform(field: TorusField, direction: str) -> TorusField:
    """Materialise the other representation; round trips are ~1e-15 exact."""
    if direction == "to-spectral":
        field.spec  # force the cache
        return field
    if direction == "to-physical":
        return TorusField.from_spectral(field.grid, field.rank, field.spec)
    raise ValueError(f"unknown direction {direction!r}")


def diff(field: TorusField, axis: int, order: int = 1) -> TorusField:
    """Spectral derivative d^order/dx_axis^order."""
    g = field.grid
    if not 0 <= axis < g.d:
        raise DimensionMismatch(f"axis {axis} out of range for d={g.d}")
    mult = _deriv_multiplier(g.dims, axis, order)
    return TorusField.from_spectral(g, field.rank, field.spec * mult[None])


def _role_axis(grid: TorusGrid, role: str) -> int:
    for i, r in enumerate(grid.axis_roles):
        if r == role:
            return i
    raise DimensionMismatch(f"grid has no {role} axis")


def diff_z(field: TorusField, order: int = 1) -> TorusField:
    return diff(field, _role_axis(field.grid, "z"), order)


def grad_h(field: TorusField) -> TorusField:
    """Horizontal gradient of a scalar -> vector over horizontal axes."""
    g = field.grid
    comps = [diff(field, a).data[0] for a in g.horizontal_axes]
    return TorusField(g, "vector", np.stack(comps))


def div_h(field: TorusField) -> TorusField:
    """Horizontal divergence of a vector -> scalar."""
    g = field.grid
    ax = g.horizontal_axes
    if field.ncomp != len(ax):
        raise DimensionMismatch("vector length does not match horizontal axes")
    out = sum(diff(field.component(i), a).data[0] for i, a in enumerate(ax))
    return TorusField(g, "scalar", out[None])


def _tensor_comp(field: TorusField, i: int, j: int) -> np.ndarray:
    if field.rank == "sym2":
        idx = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}[(i, j)]
    elif field.rank == "tensor2":
        idx = {(0, 0): 0, (0, 1): 1, (1, 0): 2, (1, 1): 3}[(i, j)]
    else:
        raise DimensionMismatch("tensor component access needs sym2/tensor2")
    return field.data[idx]


def div_h_tensor(field: TorusField) -> TorusField:
    """Row divergence (div T)_j = d_i T_ij of a 2x2 (symmetric) tensor."""
    g = field.grid
    ax = g.horizontal_axes
    if len(ax) != 2:
        raise DimensionMismatch("tensor divergence needs two horizontal axes")
    comps = []
    for j in range(2):
        s = np.zeros(g.dims)
        for i in range(2):
            comp = TorusField(g, "scalar", _tensor_comp(field, i, j)[None])
            s = s + diff(comp, ax[i]).data[0]
        comps.append(s)
    return TorusField(g, "vector", np.stack(comps))


def laplace_h(field: TorusField) -> TorusField:
    g = field.grid
    out = field
    acc = None
    for a in g.horizontal_axes:
        term = diff(field, a, 2)
        acc = term if acc is None else acc + term
    return acc if acc is not None else out


@lru_cache(maxsize=64)
def _inv_laplace_multiplier(dims: tuple, horiz: tuple) -> np.ndarray:
    mesh = np.meshgrid(
        *[np.fft.fftfreq(n, d=1.0 / n) for n in dims], indexing="ij"
    )
    kh2 = np.zeros(dims)
    for a in horiz:
        kh2 = kh2 + mesh[a] ** 2
    mult = np.zeros(dims)
    nz = kh2 > 0
    mult[nz] = -1.0 / (4.0 * np.pi**2 * kh2[nz])
    return mult


def inv_laplace_h(field: TorusField, tol: float = 1e-12) -> TorusField:
    """Inverse horizontal Laplacian, zero horizontal mean convention.

    Precondition: the horizontal mean vanishes at every z.
    """
    g = field.grid
    spec = field.spec
    horiz = g.horizontal_axes
    scale = max(1.0, float(np.abs(field.data).max()))
    sl = [slice(None)] * (g.d + 1)
    for a in horiz:
        sl[a + 1] = slice(0, 1)
    mean_modes = spec[tuple(sl)]
    if np.abs(mean_modes).max() / g.npoints > tol * scale:
        raise NonZeroMean("inv_laplace_h needs zero horizontal mean at every z")
    mult = _inv_laplace_multiplier(g.dims, horiz)
    return TorusField.from_spectral(g, field.rank, spec * mult[None])


def z_mean(field: TorusField) -> TorusField:
    """Vertical average, broadcast back to the full grid (barotropic part)."""
    g = field.grid
    vz = g.vertical_axis
    if vz is None:
        raise DimensionMismatch("grid has no vertical axis")
    m = field.data.mean(axis=vz + 1, keepdims=True)
    return TorusField(g, field.rank, np.broadcast_to(m, field.data.shape).copy())


def split_modes(field: TorusField):
    """Barotropic/baroclinic split: (z-average, mean-free remainder)."""
    bar = z_mean(field)
    return bar, field - bar


@dataclass(frozen=True)
class FieldMeanData:
    """Spatial mean per component plus the z-averaged field."""

    spatial_mean: tuple
    z_mean_field: TorusField


def field_means(field: TorusField) -> FieldMeanData:
    means = tuple(float(c.mean()) for c in field.data)
    return FieldMeanData(means, z_mean(field))


def spatial_mean(field: TorusField) -> np.ndarray:
    return field.data.mean(axis=tuple(range(1, field.grid.d + 1)))


def lp_norm(field: TorusField, p) -> float:
    """L^p norm by rectangle-rule quadrature (exact Parseval match at p=2)."""
    mag = field.magnitude()
    if p == math.inf or p == "inf":
        return float(mag.max())
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.mean(mag**p) ** (1.0 / p))


def l2_norm_spectral(field: TorusField) -> float:
    """Parseval route to the L^2 norm."""
    n = field.grid.npoints
    return float(np.sqrt(np.sum(np.abs(field.spec) ** 2)) / n)


def hs_norm(field: TorusField, s: float) -> float:
    """Fourier-weighted Sobolev norm with Japanese bracket (1+|2 pi k|^2)^{s/2}."""
    g = field.grid
    mesh = g.mode_mesh()
    k2 = np.zeros(g.dims)
    for m in mesh:
        k2 = k2 + m**2
    w = (1.0 + 4.0 * np.pi**2 * k2) ** s
    n = g.npoints
    return float(np.sqrt(np.sum(w[None] * np.abs(field.spec) ** 2)) / n)


def multiply(a: TorusField, b: TorusField, dealias: bool = False) -> TorusField:
    """Pointwise product with rank dispatch.

    scalar*X -> X; vector.vector -> scalar (dot).  With dealias=True both
    factors are evaluated on a 3/2 zero-padded grid and the product is
    truncated back (classical de-aliasing).
    """
    if a.grid != b.grid:
        raise DimensionMismatch("product of fields on different grids")
    if dealias:
        return _dealiased_multiply(a, b)
    if a.rank == "scalar":
        return TorusField(a.grid, b.rank, a.data[0][None] * b.data)
    if b.rank == "scalar":
        return TorusField(a.grid, a.rank, b.data[0][None] * a.data)
    if a.rank == "vector" and b.rank == "vector":
        if a.ncomp != b.ncomp:
            raise DimensionMismatch("dot product needs equal lengths")
        return TorusField(a.grid, "scalar", np.sum(a.data * b.data, axis=0)[None])
    raise DimensionMismatch(f"unsupported product ranks {a.rank} x {b.rank}")


def outer(a: TorusField, b: TorusField) -> TorusField:
    """Outer product of two 2-vectors -> full 2x2 tensor."""
    if a.rank != "vector" or b.rank != "vector" or a.ncomp != 2 or b.ncomp != 2:
        raise DimensionMismatch("outer needs two 2-vectors")
    d = np.stack(
        [a.data[0] * b.data[0], a.data[0] * b.data[1], a.data[1] * b.data[0], a.data[1] * b.data[1]]
    )
    return TorusField(a.grid, "tensor2", d)


def sym2_from_tensor(t: TorusField) -> TorusField:
    """Symmetric part of a full tensor as a sym2 field."""
    d = t.data
    return TorusField(
        t.grid, "sym2", np.stack([d[0], 0.5 * (d[1] + d[2]), d[3]])
    )


def _pad_spec(spec: np.ndarray, dims, pdims) -> np.ndarray:
    out = np.zeros((spec.shape[0],) + tuple(pdims), dtype=complex)
    sl_src = [np.arange(spec.shape[0])]
    sl_dst = [np.arange(spec.shape[0])]
    for n, pn in zip(dims, pdims):
        h = n // 2
        src = np.r_[np.arange(0, h + 1), np.arange(n - h + 1, n)]
        dst = np.r_[np.arange(0, h + 1), np.arange(pn - h + 1, pn)]
        sl_src.append(src)
        sl_dst.append(dst)
    out[np.ix_(*sl_dst)] = spec[np.ix_(*sl_src)]
    return out


def _dealiased_multiply(a: TorusField, b: TorusField) -> TorusField:
    g = a.grid
    pdims = tuple((3 * n) // 2 for n in g.dims)
    axes = tuple(range(1, g.d + 1))
    ratio = np.prod(pdims) / g.npoints

    def up(f):
        return sfft.ifftn(_pad_spec(f.spec, g.dims, pdims), axes=axes, workers=_WORKERS).real * ratio

    pa, pb = up(a), up(b)
    if a.rank == "scalar":
        prod, rank = pa[0][None] * pb, b.rank
    elif b.rank == "scalar":
        prod, rank = pb[0][None] * pa, a.rank
    elif a.rank == "vector" and b.rank == "vector":
        prod, rank = np.sum(pa * pb, axis=0)[None], "scalar"
    else:
        raise DimensionMismatch("unsupported dealiased product ranks")
    pspec = sfft.fftn(prod, axes=axes, workers=_WORKERS)
    spec = np.zeros((prod.shape[0],) + g.dims, dtype=complex)
    sl_dst = [np.arange(prod.shape[0])]
    sl_src = [np.arange(prod.shape[0])]
    for n, pn in zip(g.dims, pdims):
        h = n // 2
        dst = np.r_[np.arange(0, h + 1), np.arange(n - h + 1, n)]
        src = np.r_[np.arange(0, h + 1), np.arange(pn - h + 1, pn)]
        sl_dst.append(dst)
        sl_src.append(src)
    spec[np.ix_(*sl_dst)] = pspec[np.ix_(*sl_src)] / ratio
    return TorusField.from_spectral(g, rank, spec)


def shift(field: TorusField, h) -> TorusField:
    """Exact spectral translation f(x + h)."""
    g = field.grid
    h = np.atleast_1d(np.asarray(h, dtype=float))
    spec = field.spec.astype(complex)
    for a in range(g.d):
        k = g.freqs(a)
        phase = np.exp(2j * np.pi * k * h[a])
        shape = [1] * (g.d + 1)
        shape[a + 1] = g.dims[a]
        spec = spec * phase.reshape(shape)
    return TorusField.from_spectral(g, field.rank, spec)


def project_band(field: TorusField, bw: int) -> TorusField:
    """Zero all modes with |k|_inf > bw."""
    g = field.grid
    mask = np.ones(g.dims, dtype=bool)
    for m in g.mode_mesh():
        mask &= np.abs(m) <= bw
    return TorusField.from_spectral(g, field.rank, field.spec * mask[None])


def random_band_limited(
    grid: TorusGrid,
    rng: np.random.Generator,
    rank: str = "scalar",
    bw: int = None,
    decay: float = 2.0,
    zero_mean: bool = False,
    ncomp: int = None,
) -> TorusField:
    """Random smooth field: Gaussian modes damped by (1+|k|)^-decay up to bw."""
    if bw is None:
        bw = min(grid.nyquist(a) for a in range(grid.d)) // 2
    if rank == "scalar":
        ncomp = 1
    elif rank == "sym2":
        ncomp = 3
    elif rank == "tensor2":
        ncomp = 4
    elif ncomp is None:
        ncomp = len(grid.horizontal_axes)
    mesh = grid.mode_mesh()
    kinf = np.zeros(grid.dims)
    k2 = np.zeros(grid.dims)
    for m in mesh:
        kinf = np.maximum(kinf, np.abs(m))
        k2 = k2 + m**2
    mask = kinf <= bw
    amp = mask / (1.0 + np.sqrt(k2)) ** decay
    spec = (
        rng.standard_normal((ncomp,) + grid.dims)
        + 1j * rng.standard_normal((ncomp,) + grid.dims)
    ) * amp[None]
    if zero_mean:
        spec[(slice(None),) + (0,) * grid.d] = 0.0
    spec *= grid.npoints / max(1, bw)
    return TorusField.from_spectral(grid, rank, spec)


def check_z_mean_free(field: TorusField, tol: float = 1e-12, what: str = "field"):
    zm = z_mean(field)
    scale = max(1.0, float(np.abs(field.data).max()))
    if np.abs(zm.data).max() > tol * scale:
        raise NonZeroZMean(f"{what} must have zero z-mean pointwise")
