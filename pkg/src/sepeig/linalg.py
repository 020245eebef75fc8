"""Bipartite operators, local vectors and the partial maps acting on them.

Composite basis ordering is row-major in the B factor: the product basis
vector ``|e_p, f_q>`` sits at index ``p * d_b + q``. With this convention the
coefficient matrix of a pure state is ``vector.reshape(d_a, d_b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
UNIT_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when operator, vector or state dimensions do not fit together."""

    def __init__(self, message: str = "dims"):
        super().__init__(message)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dims:
    d_a: int
    d_b: int

    def __post_init__(self):
        for d in (self.d_a, self.d_b):
            if int(d) != d or d < 1:
                raise DimensionError(f"dims: factor dimensions must be positive integers, got {self.d_a}x{self.d_b}")
        object.__setattr__(self, "d_a", int(self.d_a))
        object.__setattr__(self, "d_b", int(self.d_b))

    @property
    def total(self) -> int:
        return self.d_a * self.d_b

    def index(self, p: int, q: int) -> int:
        return p * self.d_b + q


def _as_dims(dims) -> Dims:
    if isinstance(dims, Dims):
        return dims
    d_a, d_b = dims
    return Dims(d_a, d_b)


@dataclass(frozen=True, eq=False)
class BipartiteOperator:
    """Dense Hermitian operator on ``H_A (x) H_B``.

    Construction symmetrizes the input as ``(M + M^dagger)/2`` when the
    asymmetry is below ``HERMITIAN_TOL`` and rejects it otherwise.
    """

    dims: Dims
    matrix: np.ndarray

    def __post_init__(self):
        dims = _as_dims(self.dims)
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (dims.total, dims.total):
            raise DimensionError(f"dims: matrix shape {m.shape} does not match {dims.d_a}x{dims.d_b}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator has non-finite entries")
        asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if asym >= HERMITIAN_TOL:
            raise ValueError(f"non-hermitian input (max |M - M^dagger| = {asym:.3g})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _frozen((m + m.conj().T) / 2))

    @classmethod
    def from_matrix(cls, matrix, d_a: int, d_b: int) -> "BipartiteOperator":
        return cls(Dims(d_a, d_b), matrix)

    @classmethod
    def identity(cls, d_a: int, d_b: int) -> "BipartiteOperator":
        return cls(Dims(d_a, d_b), np.eye(d_a * d_b))

    @classmethod
    def projector(cls, vector, d_a: int, d_b: int) -> "BipartiteOperator":
        """Rank-one projector onto ``vector`` (normalized here)."""
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        n = np.linalg.norm(v)
        if n < 1e-300:
            raise ValueError("null state")
        v = v / n
        return cls(Dims(d_a, d_b), np.outer(v, v.conj()))

    @property
    def tensor(self) -> np.ndarray:
        """View with axes ``(p, q, r, s)`` for ``<e_p, f_q| A |e_r, f_s>``."""
        d = self.dims
        return self.matrix.reshape(d.d_a, d.d_b, d.d_a, d.d_b)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def spectral_norm(self) -> float:
        w = self.eigvalsh()
        return float(np.max(np.abs(w))) if w.size else 0.0

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def _check_same_dims(self, other: "BipartiteOperator"):
        if other.dims != self.dims:
            raise DimensionError(f"dims: {self.dims} vs {other.dims}")

    def __add__(self, other):
        if isinstance(other, BipartiteOperator):
            self._check_same_dims(other)
            return BipartiteOperator(self.dims, self.matrix + other.matrix)
        if np.isscalar(other) and np.isreal(other):
            return BipartiteOperator(self.dims, self.matrix + float(np.real(other)) * np.eye(self.dims.total))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return BipartiteOperator(self.dims, -self.matrix)

    def __mul__(self, scalar):
        if np.isscalar(scalar) and np.isreal(scalar):
            return BipartiteOperator(self.dims, float(np.real(scalar)) * self.matrix)
        return NotImplemented

    __rmul__ = __mul__

    def allclose(self, other: "BipartiteOperator", atol: float = 1e-12) -> bool:
        return self.dims == other.dims and bool(np.allclose(self.matrix, other.matrix, rtol=0, atol=atol))


Side = Literal["A", "B"]


def _phase_fix(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > UNIT_TOL)
    if nz.size:
        c = v[nz[0]]
        v = v * (abs(c) / c)
        v[nz[0]] = abs(c)
    return v


@dataclass(frozen=True, eq=False)
class LocalVector:
    """Unit vector on one factor with a fixed global phase.

    The first coefficient with modulus above ``1e-12`` is made real and
    non-negative. Inputs are normalized; a zero vector is rejected.
    """

    side: Side
    coeffs: np.ndarray

    def __post_init__(self):
        if self.side not in ("A", "B"):
            raise ValueError(f"side must be 'A' or 'B', got {self.side!r}")
        v = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0 or not np.isfinite(n):
            raise ValueError("null state")
        object.__setattr__(self, "coeffs", _frozen(_phase_fix(v / n)))

    def __len__(self):
        return self.coeffs.shape[0]

    def overlap(self, other: "LocalVector") -> complex:
        return complex(np.vdot(self.coeffs, other.coeffs))

    def same_ray(self, other: "LocalVector", tol: float = 1e-6) -> bool:
        return len(self) == len(other) and abs(self.overlap(other)) >= 1 - tol

    def conj(self) -> "LocalVector":
        return LocalVector(self.side, self.coeffs.conj())


def _local(v, side: Side, dim: int) -> np.ndarray:
    if isinstance(v, LocalVector):
        if v.side != side:
            raise DimensionError(f"dims: expected a vector on side {side}, got side {v.side}")
        arr = v.coeffs
    else:
        arr = np.asarray(v, dtype=np.complex128).reshape(-1)
    if arr.shape[0] != dim:
        raise DimensionError(f"dims: vector of length {arr.shape[0]} on side {side}, expected {dim}")
    return arr


@dataclass(frozen=True, eq=False)
class PureBipartiteState:
    """Normalized vector on ``H_A (x) H_B``."""

    dims: Dims
    vector: np.ndarray

    def __post_init__(self):
        dims = _as_dims(self.dims)
        v = np.array(self.vector, dtype=np.complex128).reshape(-1)
        if v.shape[0] != dims.total:
            raise DimensionError(f"dims: vector length {v.shape[0]} does not match {dims.d_a}x{dims.d_b}")
        n = np.linalg.norm(v)
        if n == 0 or not np.isfinite(n):
            raise ValueError("null state")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "vector", _frozen(v / n))

    @classmethod
    def from_vector(cls, vector, d_a: int, d_b: int) -> "PureBipartiteState":
        return cls(Dims(d_a, d_b), vector)

    @classmethod
    def product(cls, a, b) -> "PureBipartiteState":
        a = _local(a, "A", len(a)) if isinstance(a, LocalVector) else np.asarray(a, dtype=np.complex128)
        b = _local(b, "B", len(b)) if isinstance(b, LocalVector) else np.asarray(b, dtype=np.complex128)
        return cls(Dims(a.shape[0], b.shape[0]), np.kron(a, b))

    @property
    def coefficient_matrix(self) -> np.ndarray:
        return self.vector.reshape(self.dims.d_a, self.dims.d_b)

    def projector(self) -> BipartiteOperator:
        return BipartiteOperator(self.dims, np.outer(self.vector, self.vector.conj()))

    def density(self) -> "DensityOperator":
        return DensityOperator(self.projector())


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Trace-one positive semidefinite bipartite operator."""

    op: BipartiteOperator

    def __post_init__(self):
        if not isinstance(self.op, BipartiteOperator):
            raise TypeError("DensityOperator wraps a BipartiteOperator")
        tr = self.op.trace()
        if abs(tr - 1) > TRACE_TOL:
            raise ValueError(f"density operator trace is {tr!r}, expected 1")
        lam = float(self.op.eigvalsh()[0])
        if lam < -PSD_TOL:
            raise ValueError(f"density operator has negative eigenvalue {lam:.3g}")

    @classmethod
    def from_matrix(cls, matrix, d_a: int, d_b: int) -> "DensityOperator":
        return cls(BipartiteOperator.from_matrix(matrix, d_a, d_b))

    @classmethod
    def maximally_mixed(cls, d_a: int, d_b: int) -> "DensityOperator":
        return cls(BipartiteOperator.identity(d_a, d_b) * (1.0 / (d_a * d_b)))

    @property
    def dims(self) -> Dims:
        return self.op.dims

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix


StateLike = Union[DensityOperator, PureBipartiteState]


def as_density(state: StateLike) -> DensityOperator:
    if isinstance(state, PureBipartiteState):
        return state.density()
    if isinstance(state, DensityOperator):
        return state
    raise TypeError(f"expected a state, got {type(state).__name__}")


def project_a(op: BipartiteOperator, a) -> np.ndarray:
    """Return ``<a| A |a>`` as a Hermitian ``d_b x d_b`` matrix on ``H_B``."""
    a = _local(a, "A", op.dims.d_a)
    out = np.einsum("p,pqrs,r->qs", a.conj(), op.tensor, a)
    return (out + out.conj().T) / 2


def project_b(op: BipartiteOperator, b) -> np.ndarray:
    """Return ``<b| A |b>`` as a Hermitian ``d_a x d_a`` matrix on ``H_A``."""
    b = _local(b, "B", op.dims.d_b)
    out = np.einsum("q,pqrs,s->pr", b.conj(), op.tensor, b)
    return (out + out.conj().T) / 2


def partial_transpose(op: BipartiteOperator) -> BipartiteOperator:
    """Transpose on the B factor: ``<p,q|A^PT|r,s> = <p,s|A|r,q>``."""
    d = op.dims
    pt = op.tensor.transpose(0, 3, 2, 1).reshape(d.total, d.total)
    return BipartiteOperator(d, pt)


def _real_scalar(z: complex, what: str) -> float:
    if abs(z.imag) >= 1e-8:
        raise ValueError(f"non-hermitian input ({what} has imaginary part {z.imag:.3g})")
    return float(z.real)


def expectation(op: BipartiteOperator, rho: StateLike) -> float:
    """``tr(rho A)`` for a density operator or pure state ``rho``."""
    rho = as_density(rho)
    if rho.dims != op.dims:
        raise DimensionError(f"dims: operator {op.dims} vs state {rho.dims}")
    # tr(XY) = sum_ij X_ij Y_ji
    z = complex(np.sum(rho.matrix * op.matrix.T))
    return _real_scalar(z, "tr(rho A)")


def product_value(op: BipartiteOperator, a, b) -> float:
    """``<a,b| A |a,b>`` for unit vectors ``a`` on A and ``b`` on B."""
    a = _local(a, "A", op.dims.d_a)
    b = _local(b, "B", op.dims.d_b)
    ab = np.kron(a, b)
    return _real_scalar(complex(np.vdot(ab, op.matrix @ ab)), "<a,b|A|a,b>")
