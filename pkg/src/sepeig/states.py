"""Example states and test fixtures.

Includes Bell states, the truncated-Fock coherent-superposition mixture,
Werner states, the 3x3 tiles UPB state, and seeded random product and
separable states.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from sepeig._parallel import counter_rng
from sepeig.linalg import BipartiteOperator, DensityOperator, Dims, PureBipartiteState, _as_dims

log = logging.getLogger(__name__)

SQRT1_2 = 1 / np.sqrt(2)


@dataclass(frozen=True)
class FockTruncation:
    """Fock levels ``0..n_max`` per mode."""

    n_max: int = 12
    tail_mass_tol: float = 1e-10

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def dim(self) -> int:
        return self.n_max + 1


def bell_phi() -> PureBipartiteState:
    """``(|0,1> + |1,0>)/sqrt(2)`` on ``2 (x) 2``."""
    return PureBipartiteState(Dims(2, 2), [0, SQRT1_2, SQRT1_2, 0])


def bell_phi_plus() -> PureBipartiteState:
    """``(|0,0> + |1,1>)/sqrt(2)`` on ``2 (x) 2``."""
    return PureBipartiteState(Dims(2, 2), [SQRT1_2, 0, 0, SQRT1_2])


def embed_operator(op: BipartiteOperator, d_a: int, d_b: int) -> BipartiteOperator:
    """Zero-pad ``op`` onto the leading levels of a larger ``d_a (x) d_b`` space."""
    sa, sb = op.dims.d_a, op.dims.d_b
    if sa > d_a or sb > d_b:
        raise ValueError(f"cannot embed {sa}x{sb} operator into {d_a}x{d_b}")
    t = np.zeros((d_a, d_b, d_a, d_b), dtype=np.complex128)
    t[:sa, :sb, :sa, :sb] = op.tensor
    return BipartiteOperator(Dims(d_a, d_b), t.reshape(d_a * d_b, d_a * d_b))


def coherent_amplitudes(alpha: complex, trunc: FockTruncation) -> np.ndarray:
    """Fock amplitudes ``e^{-|a|^2/2} a^n / sqrt(n!)`` for ``n = 0..n_max``.

    Raises ``ValueError`` when the discarded probability mass exceeds
    ``trunc.tail_mass_tol``.
    """
    mean = abs(alpha) ** 2
    tail = float(stats.poisson.sf(trunc.n_max, mean)) if mean > 0 else 0.0
    if tail >= trunc.tail_mass_tol:
        raise ValueError(
            f"Fock truncation n_max={trunc.n_max} drops probability {tail:.3g} of |alpha={alpha}> "
            f"(tolerance {trunc.tail_mass_tol:g})"
        )
    n = np.arange(trunc.dim)
    log_norm = -0.5 * mean - 0.5 * special.gammaln(n + 1)
    return np.exp(log_norm) * np.power(complex(alpha), n)


def chi_minus_normalization(alpha: complex, beta: complex) -> float:
    """Analytic normalization ``[2(1 - exp(-2(|alpha|^2 + |beta|^2)))]^{-1/2}``."""
    s = abs(alpha) ** 2 + abs(beta) ** 2
    return float(1 / np.sqrt(2 * -np.expm1(-2 * s)))


def chi_minus(alpha: complex, beta: complex, trunc: FockTruncation | None = None) -> PureBipartiteState:
    """``N(|alpha, beta> - |-alpha, -beta>)`` in the truncated two-mode Fock space.

    The truncated vector is renormalized; the deviation of its norm from the
    analytic ``N`` is logged and must stay below ``1e-8``.
    """
    trunc = trunc or FockTruncation()
    if alpha == 0 and beta == 0:
        raise ValueError("null state: alpha = beta = 0")
    ca, cb = coherent_amplitudes(alpha, trunc), coherent_amplitudes(beta, trunc)
    # |-alpha> amplitudes are (-1)^n times those of |alpha>
    sign = (-1.0) ** np.arange(trunc.dim)
    v = np.kron(ca, cb) - np.kron(sign * ca, sign * cb)
    vec = chi_minus_normalization(alpha, beta) * v
    drift = abs(np.linalg.norm(vec) - 1)
    log.debug("chi_minus(alpha=%s, beta=%s, n_max=%d): normalization drift %.3g", alpha, beta, trunc.n_max, drift)
    if drift >= 1e-8:
        raise ValueError(f"truncated chi_minus norm deviates from analytic N by {drift:.3g}")
    return PureBipartiteState(Dims(trunc.dim, trunc.dim), vec)


def vacuum(trunc: FockTruncation) -> PureBipartiteState:
    v = np.zeros(trunc.dim**2)
    v[0] = 1
    return PureBipartiteState(Dims(trunc.dim, trunc.dim), v)


def rho_mix(alpha: complex, beta: complex, eta: float, trunc: FockTruncation | None = None) -> DensityOperator:
    """``eta |chi_-><chi_-| + (1 - eta)|0,0><0,0|`` for ``0 < eta < 1``."""
    if not 0 < eta < 1:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    trunc = trunc or FockTruncation()
    chi = chi_minus(alpha, beta, trunc)
    m = eta * chi.projector().matrix + (1 - eta) * vacuum(trunc).projector().matrix
    return DensityOperator(BipartiteOperator(chi.dims, m))


def rho_mix_threshold(alpha: complex, beta: complex) -> float:
    """Mixing weight above which ``|Phi><Phi|`` detects ``rho_mix``: ``sinh(|a|^2+|b|^2)/|a+b|^2``."""
    s = abs(alpha) ** 2 + abs(beta) ** 2
    denom = abs(alpha + beta) ** 2
    return float(np.sinh(s) / denom) if denom > 0 else float("inf")


def werner(p: float) -> DensityOperator:
    """``p |Phi+><Phi+| + (1 - p) 1/4`` on ``2 (x) 2``."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    m = p * bell_phi_plus().projector().matrix + (1 - p) * np.eye(4) / 4
    return DensityOperator(BipartiteOperator(Dims(2, 2), m))


def _haar_vec(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def random_product(dims, seed: int) -> PureBipartiteState:
    """Haar-random product vector ``|a> (x) |b>``."""
    dims = _as_dims(dims)
    rng = counter_rng(seed, 0)
    return PureBipartiteState(dims, np.kron(_haar_vec(rng, dims.d_a), _haar_vec(rng, dims.d_b)))


def random_separable(dims, terms: int, seed: int) -> DensityOperator:
    """Dirichlet-weighted mixture of ``terms`` Haar-random product projectors."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    dims = _as_dims(dims)
    rng = counter_rng(seed, 1)
    weights = rng.dirichlet(np.ones(terms)) if terms > 1 else np.ones(1)
    m = np.zeros((dims.total, dims.total), dtype=np.complex128)
    for w in weights:
        v = np.kron(_haar_vec(rng, dims.d_a), _haar_vec(rng, dims.d_b))
        m += w * np.outer(v, v.conj())
    m /= np.trace(m).real
    return DensityOperator(BipartiteOperator(dims, m))


def random_pure(dims, seed: int) -> PureBipartiteState:
    """Haar-random (generally entangled) pure state."""
    dims = _as_dims(dims)
    return PureBipartiteState(dims, _haar_vec(counter_rng(seed, 2), dims.total))


def random_hermitian(dims, seed: int) -> BipartiteOperator:
    """GUE-distributed Hermitian operator (entries of unit scale)."""
    dims = _as_dims(dims)
    rng = counter_rng(seed, 3)
    n = dims.total
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return BipartiteOperator(dims, (z + z.conj().T) / 2)


def _tiles_vectors() -> list[np.ndarray]:
    e = np.eye(3)
    minus01 = (e[0] - e[1]) / np.sqrt(2)
    minus12 = (e[1] - e[2]) / np.sqrt(2)
    uniform = np.ones(3) / np.sqrt(3)
    return [
        np.kron(e[0], minus01),
        np.kron(minus01, e[2]),
        np.kron(e[2], minus12),
        np.kron(minus12, e[0]),
        np.kron(uniform, uniform),
    ]


def tiles_upb_projector() -> BipartiteOperator:
    """Projector onto the span of the five tiles product vectors on ``3 (x) 3``."""
    m = sum(np.outer(v, v.conj()) for v in _tiles_vectors())
    return BipartiteOperator(Dims(3, 3), m)


def tiles_upb_state() -> DensityOperator:
    """``(1 - P_UPB)/4``: PPT yet entangled, since no product vector is orthogonal to the UPB."""
    p = tiles_upb_projector().matrix
    return DensityOperator(BipartiteOperator(Dims(3, 3), (np.eye(9) - p) / 4))
