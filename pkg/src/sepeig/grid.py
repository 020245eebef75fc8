"""Max-norm lattice of Hermitian test operators and entanglement scans over it.

Each independent matrix element (upper triangle, diagonal included) takes
values on a polar lattice: moduli ``0, dr, 2 dr, ..., 1`` and phases
``0, dphi, 2 dphi, ... < 2 pi``. Diagonal elements are real, so their phases
are restricted to ``{0, pi}`` (only ``{0}`` when ``dphi > pi``). The lower
triangle follows by Hermiticity, the all-zero operator is skipped and every
operator is rescaled to unit max-norm. For any unit max-norm ``A`` some grid
element lies within ``sqrt(dr^2 + dphi^2)`` in max-norm.

Operators are enumerated lazily in lexicographic order of their component
value indices (last component fastest); the enumeration index is stable, so
scans can resume from any index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from sepeig._parallel import ordered_map
from sepeig.linalg import BipartiteOperator, DensityOperator, Dims, _as_dims, as_density, expectation
from sepeig.solver import ConvergenceError, SolverConfig, f_ab
from sepeig.witness import DECISION_THRESHOLD

DEFAULT_CAP = 10**6


class GridTooLarge(ValueError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"grid has {count} operators, above the cap of {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class GridSpec:
    dims: Dims
    delta_r: float
    delta_phi: float
    cap: int = DEFAULT_CAP
    # (row, col) composite indices with row <= col; None means the full upper triangle
    support: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_dims(self.dims))
        if not 0 < self.delta_r <= 1:
            raise ValueError("delta_r must lie in (0, 1]")
        if not 0 < self.delta_phi <= 2 * math.pi + 1e-12:
            raise ValueError("delta_phi must lie in (0, 2 pi]")
        n = self.dims.total
        if self.support is not None:
            sup = tuple(sorted({(int(r), int(c)) for r, c in self.support}))
            for r, c in sup:
                if not (0 <= r <= c < n):
                    raise ValueError(f"support entry {(r, c)} is not an upper-triangle index pair")
            if not sup:
                raise ValueError("support must not be empty")
            object.__setattr__(self, "support", sup)

    @property
    def epsilon(self) -> float:
        return math.hypot(self.delta_r, self.delta_phi)

    @property
    def components(self) -> tuple[tuple[int, int], ...]:
        if self.support is not None:
            return self.support
        n = self.dims.total
        return tuple((r, c) for r in range(n) for c in range(r, n))

    @property
    def moduli(self) -> np.ndarray:
        k = int(math.floor(1 / self.delta_r + 1e-9))
        m = [j * self.delta_r for j in range(k + 1)]
        if m[-1] < 1 - 1e-12:
            m.append(1.0)
        return np.array(m)

    @property
    def phases(self) -> np.ndarray:
        k = int(math.ceil(2 * math.pi / self.delta_phi - 1e-9))
        return np.arange(max(k, 1)) * self.delta_phi

    @property
    def diagonal_signs(self) -> tuple[float, ...]:
        return (1.0, -1.0) if self.delta_phi <= math.pi + 1e-12 else (1.0,)

    def values(self, diagonal: bool) -> np.ndarray:
        nz = self.moduli[1:]
        if diagonal:
            vals = [s * r for r in nz for s in self.diagonal_signs]
        else:
            vals = [r * np.exp(1j * p) for r in nz for p in self.phases]
        return np.array([0.0] + vals, dtype=np.complex128)

    @property
    def radices(self) -> tuple[int, ...]:
        nd = len(self.values(True))
        no = len(self.values(False))
        return tuple(nd if r == c else no for r, c in self.components)

    @property
    def count(self) -> int:
        """Number of nonzero grid operators."""
        return math.prod(self.radices) - 1


def _digits(index: int, radices: tuple[int, ...]) -> list[int]:
    out = []
    for r in reversed(radices):
        index, d = divmod(index, r)
        out.append(d)
    return out[::-1]


def grid_operator(spec: GridSpec, index: int) -> BipartiteOperator:
    """Operator number ``index`` (``1 <= index <= spec.count``), rescaled to unit max-norm."""
    if not 1 <= index <= spec.count:
        raise IndexError(f"grid index {index} outside 1..{spec.count}")
    n = spec.dims.total
    dv, ov = spec.values(True), spec.values(False)
    m = np.zeros((n, n), dtype=np.complex128)
    for (r, c), d in zip(spec.components, _digits(index, spec.radices)):
        if r == c:
            m[r, r] = dv[d]
        else:
            m[r, c] = ov[d]
            m[c, r] = np.conj(ov[d])
    return BipartiteOperator(spec.dims, m / np.max(np.abs(m)))


def nearest_grid_index(spec: GridSpec, A: BipartiteOperator) -> int:
    """Index of the lattice point obtained by rounding every component of ``A``.

    Entries outside ``spec.support`` are ignored. Returns 0 if all rounded
    components vanish.
    """
    mod, ph = spec.moduli, spec.phases
    signs = spec.diagonal_signs
    digits = []
    for r, c in spec.components:
        z = A.matrix[r, c]
        j = int(np.argmin(np.abs(mod - abs(z))))
        if j == 0 or (r == c and z.real < 0 and len(signs) == 1):
            digits.append(0)
        elif r == c:
            s = 1 if (z.real < 0 and len(signs) == 2) else 0
            digits.append(1 + (j - 1) * len(signs) + s)
        else:
            # wrapped angular distance to each lattice phase
            k = int(np.argmin(np.abs(np.angle(np.exp(1j * (ph - np.angle(z)))))))
            digits.append(1 + (j - 1) * len(ph) + k)
    index = 0
    for d, r in zip(digits, spec.radices):
        index = index * r + d
    return index


def generate_grid(spec: GridSpec, start: int = 1) -> Iterator[tuple[int, BipartiteOperator]]:
    """Yield ``(index, operator)`` for ``index = start .. spec.count``.

    Raises
    ------
    GridTooLarge
        Before yielding anything, when ``spec.count`` exceeds ``spec.cap``.
    """
    count = spec.count
    if count > spec.cap:
        raise GridTooLarge(count, spec.cap)
    for i in range(max(1, start), count + 1):
        yield i, grid_operator(spec, i)


@dataclass
class ScanRecord:
    index: int
    margin: float
    f_value: float

    def to_dict(self) -> dict:
        return {"index": self.index, "margin": self.margin, "f_value": self.f_value}


@dataclass
class ScanReport:
    detections: list[ScanRecord] = field(default_factory=list)
    best: ScanRecord | None = None
    scanned: int = 0
    last_index: int = 0
    failures: list[int] = field(default_factory=list)
    interrupted: bool = False

    @property
    def best_margin(self) -> float:
        return self.best.margin if self.best is not None else float("nan")


def scan(
    rho,
    spec: GridSpec,
    cfg: SolverConfig | None = None,
    *,
    resume_from: int = 1,
    chunk: int = 64,
    on_record: Callable[[ScanRecord], None] | None = None,
) -> ScanReport:
    """Compute ``margin_i = tr(rho A_i) - f_AB(A_i)`` over the grid.

    Detections are operators with ``margin_i > 1e-9``. Operators whose
    solve fails are listed in ``failures``. On ``KeyboardInterrupt`` the
    partial report is returned with ``interrupted`` set and ``last_index``
    pointing at the last completed operator.
    """
    rho: DensityOperator = as_density(rho)
    if rho.dims != spec.dims:
        raise ValueError(f"dims: state {rho.dims} vs grid {spec.dims}")
    cfg = cfg or SolverConfig()
    report = ScanReport(last_index=max(1, resume_from) - 1)

    def evaluate(item):
        i, op = item
        try:
            f = f_ab(op, cfg)
        except ConvergenceError:
            return i, None
        return i, ScanRecord(i, expectation(op, rho) - f, f)

    stream = generate_grid(spec, resume_from)
    try:
        while True:
            batch = [x for _, x in zip(range(chunk), stream)]
            if not batch:
                break
            for i, rec in ordered_map(evaluate, batch):
                report.scanned += 1
                report.last_index = i
                if rec is None:
                    report.failures.append(i)
                    continue
                if report.best is None or rec.margin > report.best.margin:
                    report.best = rec
                if rec.margin > DECISION_THRESHOLD:
                    report.detections.append(rec)
                    if on_record is not None:
                        on_record(rec)
    except KeyboardInterrupt:
        report.interrupted = True
    return report
