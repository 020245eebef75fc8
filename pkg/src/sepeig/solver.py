"""Separability eigenvalue problem: ``A_b|a> = g|a>``, ``A_a|b> = g|b>``.

The sup and inf branches are solved by alternating exact eigendecompositions
of the two projected operators, started from seeded Haar-random product
states. Each half-step is the global optimum of its subproblem, so ``g`` is
monotone along a sup (inf) run. Interior solutions are searched best-effort
by overlap-tracking runs seeded from the eigenvectors of the projected
operators at every converged extremal pair; completeness of the returned
spectrum is not guaranteed.

Near degenerate critical points (for instance product basis states of
sparse operators) the alternation converges only sublinearly. Runs that
have not converged after ``_POLISH_EVERY // 2`` iterations therefore get a
Newton polish on the tangent space of the two unit spheres, repeated every
``_POLISH_EVERY`` iterations.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from sepeig._parallel import counter_rng, ordered_map
from sepeig.linalg import BipartiteOperator, DimensionError, LocalVector, PureBipartiteState, product_value
from sepeig.schmidt import full_local_bases

log = logging.getLogger(__name__)

_DEGENERATE_REL = 1e-10
_BRANCH_ID = {"sup": 0, "inf": 1}
_POLISH_EVERY = 40
_POLISH_STEPS = 40
_FD_STEP = 1e-7


class ConvergenceError(RuntimeError):
    """No start of the alternating iteration met the convergence criteria."""

    def __init__(self, best_residual: float, message: str = "no convergence"):
        super().__init__(f"{message} (best residual {best_residual:.3g})")
        self.best_residual = best_residual


@dataclass(frozen=True)
class SolverConfig:
    starts: int = 64
    max_iter: int = 500
    tol: float = 1e-10
    seed: int = 0
    dedup_tol: float = 1e-7
    # overlap-tracking search for non-extremal solutions
    interior: bool = True

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.dedup_tol > self.tol:
            raise ValueError("dedup_tol must exceed tol")


@dataclass(frozen=True, eq=False)
class SepEigenpair:
    g: float
    a: LocalVector
    b: LocalVector
    residual: float

    def same_solution(self, other: "SepEigenpair", g_tol: float, vec_tol: float = 1e-6) -> bool:
        return abs(self.g - other.g) < g_tol and self.a.same_ray(other.a, vec_tol) and self.b.same_ray(other.b, vec_tol)

    def product_vector(self) -> np.ndarray:
        return np.kron(self.a.coeffs, self.b.coeffs)


@dataclass(frozen=True, eq=False)
class SepSpectrum:
    pairs: tuple[SepEigenpair, ...]
    sup_g: float
    inf_g: float
    starts_used: int
    converged_fraction: float

    @property
    def values(self) -> np.ndarray:
        return np.array([p.g for p in self.pairs])

    def distinct_values(self, tol: float = 1e-7) -> list[float]:
        out: list[float] = []
        for g in self.values:
            if not out or abs(out[-1] - g) >= tol:
                out.append(float(g))
        return out


class _Problem:
    """Precomputed reshapes so each projection is a single matrix-vector product."""

    def __init__(self, op: BipartiteOperator):
        self.op = op
        da, db = op.dims.d_a, op.dims.d_b
        t = op.tensor
        self.da, self.db = da, db
        # A_a[q, s] = sum_{p, r} conj(a_p) a_r T[p, q, r, s]
        self._pa = np.ascontiguousarray(t.transpose(1, 3, 0, 2).reshape(db * db, da * da))
        # A_b[p, r] = sum_{q, s} conj(b_q) b_s T[p, q, r, s]
        self._pb = np.ascontiguousarray(t.transpose(0, 2, 1, 3).reshape(da * da, db * db))
        w = np.linalg.eigvalsh(op.matrix)
        self.scale = max(1.0, float(np.max(np.abs(w))))

    def proj_a(self, a: np.ndarray) -> np.ndarray:
        m = (self._pa @ np.outer(a.conj(), a).reshape(-1)).reshape(self.db, self.db)
        return (m + m.conj().T) / 2

    def proj_b(self, b: np.ndarray) -> np.ndarray:
        m = (self._pb @ np.outer(b.conj(), b).reshape(-1)).reshape(self.da, self.da)
        return (m + m.conj().T) / 2


def _pick(mat: np.ndarray, mode: str, prev: np.ndarray | None, scale: float) -> np.ndarray:
    """Eigenvector of ``mat`` for the requested branch.

    Within a degenerate eigenspace the vector closest to ``prev`` (its
    normalized projection) is returned, which stops the iteration from
    hopping between equivalent eigenvectors.
    """
    w, v = np.linalg.eigh(mat)
    if mode == "sup":
        target = w[-1]
    elif mode == "inf":
        target = w[0]
    else:
        k = int(np.argmax(np.abs(v.conj().T @ prev)))
        target = w[k]
    sub = v[:, np.abs(w - target) <= _DEGENERATE_REL * scale]
    if prev is not None and sub.shape[1] > 1:
        c = sub.conj().T @ prev
        n = np.linalg.norm(c)
        if n > 1e-8:
            return sub @ (c / n)
    return sub[:, 0]


@dataclass
class _Run:
    g: float
    a: np.ndarray
    b: np.ndarray
    residual: float
    converged: bool
    iterations: int = field(default=0)


def _complement(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of unit ``v``."""
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(v.size)]))
    return q[:, 1 : v.size]


def _equations(prob: _Problem, a: np.ndarray, b: np.ndarray):
    ab, aa = prob.proj_b(b), prob.proj_a(a)
    g = float(np.real(np.vdot(a, ab @ a)))
    return ab @ a - g * a, aa @ b - g * b, g


def _polish(prob: _Problem, a: np.ndarray, b: np.ndarray, tol: float):
    """Damped Newton on the tangent components of the equations.

    The residual is orthogonal to ``a`` and ``b`` by construction, so the
    system restricted to the tangent space is square; the Jacobian is taken
    by forward differences. Returns the improved ``(a, b)`` (possibly
    unchanged).
    """
    ra, rb, _ = _equations(prob, a, b)
    nr = np.hypot(np.linalg.norm(ra), np.linalg.norm(rb))
    for _ in range(_POLISH_STEPS):
        if nr < tol:
            break
        ua, ub = _complement(a), _complement(b)
        na, nb = ua.shape[1], ub.shape[1]

        def move(z, a=a, b=b, ua=ua, ub=ub, na=na, nb=nb):
            a2 = a + ua @ (z[:na] + 1j * z[na : 2 * na])
            b2 = b + ub @ (z[2 * na : 2 * na + nb] + 1j * z[2 * na + nb :])
            return a2 / np.linalg.norm(a2), b2 / np.linalg.norm(b2)

        def tangent(z, ua=ua, ub=ub):
            ra, rb, _ = _equations(prob, *move(z))
            p = np.concatenate([ua.conj().T @ ra, ub.conj().T @ rb])
            return np.concatenate([p.real, p.imag])

        n = 2 * (na + nb)
        f0 = tangent(np.zeros(n))
        jac = np.column_stack([(tangent(_FD_STEP * e) - f0) / _FD_STEP for e in np.eye(n)])
        dz = np.linalg.lstsq(jac, -f0, rcond=1e-10)[0]
        t = 1.0
        while t > 1e-3:
            a2, b2 = move(t * dz)
            ra, rb, _ = _equations(prob, a2, b2)
            n2 = np.hypot(np.linalg.norm(ra), np.linalg.norm(rb))
            if n2 < nr:
                break
            t /= 2
        else:
            break
        a, b, nr = a2, b2, n2
    return a, b


def _alternate(prob: _Problem, a: np.ndarray | None, b: np.ndarray, mode: str, tol: float, max_iter: int) -> _Run:
    g = g_prev = np.nan
    res_b = np.inf
    for it in range(max_iter):
        ab = prob.proj_b(b)
        if a is not None and not np.isnan(g):
            res_a = float(np.linalg.norm(ab @ a - g * a))
            res = max(res_a, res_b)
            if abs(g - g_prev) < tol and res < tol:
                return _Run(float(g), a, b, res, True, it)
        if it % _POLISH_EVERY == _POLISH_EVERY // 2:
            a, b = _polish(prob, a, b, tol)
            ab = prob.proj_b(b)
        a = _pick(ab, mode, a, prob.scale)
        aa = prob.proj_a(a)
        b = _pick(aa, mode, b, prob.scale)
        g_prev, g = g, float(np.real(np.vdot(b, aa @ b)))
        res_b = float(np.linalg.norm(aa @ b - g * b))
    res_a = float(np.linalg.norm(prob.proj_b(b) @ a - g * a))
    res = max(res_a, res_b)
    ok = abs(g - g_prev) < tol and res < tol
    return _Run(float(g), a, b, res, ok, max_iter)


def _haar(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def _to_pair(run: _Run) -> SepEigenpair:
    return SepEigenpair(run.g, LocalVector("A", run.a), LocalVector("B", run.b), run.residual)


def _dedup(pairs: list[SepEigenpair], g_tol: float) -> list[SepEigenpair]:
    kept: list[SepEigenpair] = []
    for p in pairs:
        if not any(p.same_solution(q, g_tol) for q in kept):
            kept.append(p)
    return kept


def solve_sepeig(op: BipartiteOperator, cfg: SolverConfig | None = None, *, branches=("sup", "inf")) -> SepSpectrum:
    """Solve the separability eigenvalue equations of ``op``.

    Parameters
    ----------
    op : BipartiteOperator
        Hermitian operator.
    cfg : SolverConfig, optional
        Start count, iteration cap, tolerances and seed.
    branches : sequence of {"sup", "inf"}
        Extremal branches to run, each from ``cfg.starts`` random product
        states.

    Returns
    -------
    SepSpectrum
        Deduplicated converged pairs sorted by ``g`` descending.

    Raises
    ------
    ConvergenceError
        If no random start converged.
    """
    cfg = cfg or SolverConfig()
    prob = _Problem(op)
    for mode in branches:
        if mode not in _BRANCH_ID:
            raise ValueError(f"unknown branch {mode!r}")
    jobs = [(mode, i) for mode in branches for i in range(cfg.starts)]

    def run_start(job):
        mode, i = job
        # same start vectors for a branch whichever other branches run
        rng = counter_rng(cfg.seed, 2 * i + _BRANCH_ID[mode])
        b0 = _haar(rng, prob.db)
        return _alternate(prob, None, b0, mode, cfg.tol, cfg.max_iter)

    runs = ordered_map(run_start, jobs)
    good = [r for r in runs if r.converged]
    if not good:
        raise ConvergenceError(min(r.residual for r in runs))
    pairs = _dedup([_to_pair(r) for r in good], cfg.dedup_tol)

    if cfg.interior:
        seeds = []
        for p in pairs:
            a0, b0 = p.a.coeffs, p.b.coeffs
            _, va = np.linalg.eigh(prob.proj_b(b0))
            _, vb = np.linalg.eigh(prob.proj_a(a0))
            seeds += [(va[:, k], b0) for k in range(prob.da)]
            seeds += [(a0, vb[:, l]) for l in range(prob.db)]
        extra = ordered_map(lambda s: _alternate(prob, s[0], s[1], "track", cfg.tol, cfg.max_iter), seeds)
        pairs = _dedup(pairs + [_to_pair(r) for r in extra if r.converged], cfg.dedup_tol)

    pairs.sort(key=lambda p: -p.g)
    gs = [p.g for p in pairs]
    return SepSpectrum(
        pairs=tuple(pairs),
        sup_g=max(gs),
        inf_g=min(gs),
        starts_used=len(jobs),
        converged_fraction=len(good) / len(jobs),
    )


def solve_rank_one(psi: PureBipartiteState) -> SepSpectrum:
    """Exact spectrum of ``|psi><psi|`` from its Schmidt decomposition.

    With complete local bases ``{a_p}``, ``{b_q}`` built from the singular
    vectors, every product ``|a_p, b_q>`` solves the equations: the diagonal
    pairs carry ``g = m_q^2`` and all others carry ``g = 0``.
    """
    s, left, right = full_local_bases(psi)
    op = psi.projector()
    prob = _Problem(op)
    pairs = []
    for p in range(left.shape[0]):
        for q in range(right.shape[0]):
            g = float(s[p] ** 2) if p == q and p < s.shape[0] else 0.0
            a, b = left[p], right[q]
            res = max(np.linalg.norm(prob.proj_b(b) @ a - g * a), np.linalg.norm(prob.proj_a(a) @ b - g * b))
            pairs.append(SepEigenpair(g, LocalVector("A", a), LocalVector("B", b), float(res)))
    pairs.sort(key=lambda p: -p.g)
    gs = [p.g for p in pairs]
    return SepSpectrum(tuple(pairs), max(gs), min(gs), 0, 1.0)


def _rank_one_form(op: BipartiteOperator):
    """Detect ``op = kappa*1 + gamma*|psi><psi|``; return ``(kappa, gamma, psi)`` or None."""
    w, v = np.linalg.eigh(op.matrix)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(w))))
    if w.shape[0] < 2 or w[-1] - w[0] <= tol:
        return None
    if w[-2] - w[0] <= tol:
        kappa = float(np.mean(w[:-1]))
        return kappa, float(w[-1]) - kappa, PureBipartiteState(op.dims, v[:, -1])
    if w[-1] - w[1] <= tol:
        kappa = float(np.mean(w[1:]))
        return kappa, float(w[0]) - kappa, PureBipartiteState(op.dims, v[:, 0])
    return None


def f_ab(op: BipartiteOperator, cfg: SolverConfig | None = None) -> float:
    """Largest expectation value of ``op`` over product (equivalently separable) states.

    Operators of the form ``kappa*1 + gamma*|psi><psi|`` go through the
    Schmidt route; everything else through the sup branch of
    :func:`solve_sepeig`.
    """
    cfg = cfg or SolverConfig()
    w = np.linalg.eigvalsh(op.matrix)
    if w[-1] - w[0] <= 1e-12 * max(1.0, float(np.max(np.abs(w)))):
        return float(np.mean(w))
    form = _rank_one_form(op)
    if form is not None:
        kappa, gamma, psi = form
        if gamma > 0:
            return kappa + gamma * solve_rank_one(psi).sup_g
        # some product state is orthogonal to psi unless both factors are 1-dimensional
        return kappa + gamma * solve_rank_one(psi).inf_g
    return solve_sepeig(op, dataclasses.replace(cfg, interior=False), branches=("sup",)).sup_g


def inf_g(op: BipartiteOperator, cfg: SolverConfig | None = None) -> float:
    """Smallest expectation value of ``op`` over product states."""
    return -f_ab(-op, cfg)


def _angles_to_product(x: np.ndarray) -> np.ndarray:
    ta, pa, tb, pb = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    a = np.stack([np.cos(ta), np.exp(1j * pa) * np.sin(ta)], axis=-1)
    b = np.stack([np.cos(tb), np.exp(1j * pb) * np.sin(tb)], axis=-1)
    return (a[..., :, None] * b[..., None, :]).reshape(*x.shape[:-1], 4)


def _g_of_angles(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    v = _angles_to_product(x)
    return np.real(np.einsum("...i,ij,...j->...", v.conj(), m, v))


def brute_force_extrema(op: BipartiteOperator, grid_points: int = 16, refine: int = 8) -> tuple[float, float]:
    """Grid-plus-refinement oracle for ``(sup g, inf g)`` on ``2 (x) 2``.

    Product states are parametrized as ``a = (cos t, e^{i phi} sin t)`` with
    ``t`` in ``[0, pi/2]`` and ``phi`` in ``[0, 2 pi)``, likewise for ``b``.
    The best ``refine`` grid points for each extremum are polished with
    BFGS in angle coordinates. Independent of the alternating solver.
    """
    if (op.dims.d_a, op.dims.d_b) != (2, 2):
        raise DimensionError("dims: brute-force oracle supports 2x2 only")
    if grid_points < 8:
        raise ValueError("grid_points must be >= 8")
    m = op.matrix
    theta = np.linspace(0, np.pi / 2, grid_points)
    phi = np.linspace(0, 2 * np.pi, grid_points, endpoint=False)
    grid = np.stack(np.meshgrid(theta, phi, theta, phi, indexing="ij"), axis=-1).reshape(-1, 4)
    vals = _g_of_angles(m, grid)

    def polish(sign: float) -> float:
        order = np.argsort(-sign * vals)[:refine]
        best = sign * vals[order[0]]
        for k in order:
            r = optimize.minimize(lambda x: -sign * _g_of_angles(m, x), grid[k], method="BFGS", options={"gtol": 1e-12})
            best = max(best, -float(r.fun))
        return sign * best

    return polish(1.0), polish(-1.0)


@dataclass
class Proposition1Report:
    cross_coefficient: float = 0.0
    orthogonality: float = 0.0
    min_gram_determinant: float = 1.0
    checked_pairs: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_proposition1(
    op: BipartiteOperator,
    pair: SepEigenpair,
    spectrum: SepSpectrum,
    tol: float = 1e-8,
    g_tol: float = 1e-7,
    share_tol: float = 1e-6,
) -> Proposition1Report:
    """Structural checks for a converged pair ``(g0, a0, b0)`` against the rest of the spectrum.

    1. ``A|a0,b0>`` has no components on ``|a_k, b0>`` or ``|a0, b_l>`` for
       ``k, l != 0`` (in bases extending ``a0``, ``b0``), and the
       ``|a0,b0>`` component equals ``g0``.
    2. A pair with a different ``g`` sharing ``b0`` (or ``a0``) has the other
       local vector orthogonal.
    3. Pairs with different ``g`` are linearly independent.
    """
    rep = Proposition1Report()
    da, db = op.dims.d_a, op.dims.d_b
    a0, b0 = pair.a.coeffs, pair.b.coeffs
    v = (op.matrix @ np.kron(a0, b0)).reshape(da, db)
    along_a = v @ b0.conj()  # (1 (x) <b0|) A|a0,b0>
    along_b = v.T @ a0.conj()  # (<a0| (x) 1) A|a0,b0>
    cross = max(
        float(np.linalg.norm(along_a - np.vdot(a0, along_a) * a0)),
        float(np.linalg.norm(along_b - np.vdot(b0, along_b) * b0)),
        abs(complex(np.vdot(a0, along_a)) - pair.g),
    )
    rep.cross_coefficient = cross
    if cross >= tol:
        rep.violations.append(f"cross coefficients {cross:.3g} >= {tol:g} at g={pair.g:.10g}")

    for other in spectrum.pairs:
        if abs(other.g - pair.g) <= g_tol:
            continue
        rep.checked_pairs += 1
        oa = abs(pair.a.overlap(other.a))
        ob = abs(pair.b.overlap(other.b))
        if ob >= 1 - share_tol:
            rep.orthogonality = max(rep.orthogonality, oa)
            if oa >= tol:
                rep.violations.append(f"<a0|a1> = {oa:.3g} for pairs sharing b (g={pair.g:.6g}, {other.g:.6g})")
        if oa >= 1 - share_tol:
            rep.orthogonality = max(rep.orthogonality, ob)
            if ob >= tol:
                rep.violations.append(f"<b0|b1> = {ob:.3g} for pairs sharing a (g={pair.g:.6g}, {other.g:.6g})")
        gram = 1.0 - (oa * ob) ** 2
        rep.min_gram_determinant = min(rep.min_gram_determinant, gram)
        if gram <= 1e-10:
            rep.violations.append(f"linearly dependent pairs at g={pair.g:.6g} and g={other.g:.6g}")
    return rep


def check_pair(op: BipartiteOperator, pair: SepEigenpair) -> float:
    """Max residual of the two equations plus ``|g - <a,b|A|a,b>|``."""
    prob = _Problem(op)
    a, b, g = pair.a.coeffs, pair.b.coeffs, pair.g
    r = max(np.linalg.norm(prob.proj_b(b) @ a - g * a), np.linalg.norm(prob.proj_a(a) @ b - g * b))
    return max(float(r), abs(product_value(op, pair.a, pair.b) - g))
