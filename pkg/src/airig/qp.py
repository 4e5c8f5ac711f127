"""Polyhedral projection and convex QP via dual coordinate ascent.

The primitive solved here is

    min_x 0.5 x.S x + c.x   s.t.   C x <= d,  E x = e,

with S symmetric positive definite. Stationarity gives
``x = x_free - S^{-1} A' lam`` for ``A = [C; E]`` and ``x_free = -S^{-1} c``,
so the dual is a bound-constrained concave quadratic in lam whose gradient is
the primal constraint residual ``A x - [d; e]``. We maximize it by cyclic
exact coordinate ascent (Hildreth's method): row i moves its multiplier by
``resid_i / H_ii`` with ``H = A S^{-1} A'``, clamped at zero for inequality
rows. Maintaining the residual vector makes one row update O(rows), so a full
sweep costs O(rows^2) regardless of the primal dimension.

Stationarity holds exactly by construction at every sweep; the reported KKT
residual tracks primal feasibility and complementarity only. Euclidean
projection is the special case S = I, c = -z.

``solve_qp`` also accepts merely positive semidefinite Q by wrapping the
ascent in a proximal-point outer loop on S = Q + rho*I, with certificate
checks for infeasible and unbounded instances.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

__all__ = [
    "PolyhedralSet",
    "QpSolution",
    "QpError",
    "QpInfeasibleError",
    "QpUnboundedError",
    "QpNonconvergedError",
    "PolyhedralProjector",
    "project_polyhedron",
    "solve_qp",
    "projection_calls",
    "reset_projection_calls",
]


class QpError(RuntimeError):
    pass


class QpInfeasibleError(QpError):
    """Constraint system admits no point; carries a Farkas-style certificate
    ray in ``self.certificate`` (multipliers y >= 0 on inequality rows with
    A'y ~ 0 and y.[d; e] < 0)."""

    def __init__(self, msg: str, certificate: np.ndarray | None = None):
        super().__init__(msg)
        self.certificate = certificate


class QpUnboundedError(QpError):
    """Objective decreases without bound; carries the recession direction."""

    def __init__(self, msg: str, direction: np.ndarray | None = None):
        super().__init__(msg)
        self.direction = direction


class QpNonconvergedError(QpError):
    pass


# module-wide projection counter; the solver contract is that the incremental
# method never projects, and this is how tests observe it
_COUNTER_LOCK = threading.Lock()
_PROJECTION_CALLS = 0


def _count_projection() -> None:
    global _PROJECTION_CALLS
    with _COUNTER_LOCK:
        _PROJECTION_CALLS += 1


def projection_calls() -> int:
    return _PROJECTION_CALLS


def reset_projection_calls() -> None:
    global _PROJECTION_CALLS
    with _COUNTER_LOCK:
        _PROJECTION_CALLS = 0


@dataclass(frozen=True)
class PolyhedralSet:
    """{x : C x <= d, E x = e}; either part may be empty (None)."""

    C: np.ndarray | None = None
    d: np.ndarray | None = None
    E: np.ndarray | None = None
    e: np.ndarray | None = None
    dim: int = 0

    def __post_init__(self) -> None:
        C, d = _normalize_rows(self.C, self.d, "C", "d")
        E, e = _normalize_rows(self.E, self.e, "E", "e")
        n = self.dim or max(C.shape[1] if C.size else 0, E.shape[1] if E.size else 0)
        if n <= 0:
            raise ValueError("cannot infer dimension; pass dim for row-free sets")
        if C.shape[0] and C.shape[1] != n:
            raise ValueError(f"C has {C.shape[1]} cols, expected {n}")
        if E.shape[0] and E.shape[1] != n:
            raise ValueError(f"E has {E.shape[1]} cols, expected {n}")
        object.__setattr__(self, "C", C.reshape(C.shape[0], n) if C.size or C.shape[0] == 0 else C)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "E", E.reshape(E.shape[0], n) if E.size or E.shape[0] == 0 else E)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "dim", n)

    @property
    def n_ineq(self) -> int:
        return self.d.shape[0]

    @property
    def n_eq(self) -> int:
        return self.e.shape[0]

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint violation at x (0 when feasible)."""
        v = 0.0
        if self.n_ineq:
            v = max(v, float(np.max(self.C @ x - self.d)))
        if self.n_eq:
            v = max(v, float(np.max(np.abs(self.E @ x - self.e))))
        return max(v, 0.0)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return self.violation(x) <= tol


def _normalize_rows(M, v, mname, vname):
    if (M is None) != (v is None):
        raise ValueError(f"{mname} and {vname} must be given together")
    if M is None:
        return np.zeros((0, 0)), np.zeros(0)
    M = np.atleast_2d(np.asarray(M, dtype=float))
    v = np.asarray(v, dtype=float).ravel()
    if M.shape[0] != v.shape[0]:
        raise ValueError(f"{mname} has {M.shape[0]} rows, {vname} has {v.shape[0]}")
    return M, v


@dataclass(frozen=True)
class QpSolution:
    x: np.ndarray
    lam_ineq: np.ndarray
    lam_eq: np.ndarray
    sweeps: int
    kkt_residual: float
    status: str = "optimal"


def _stack_system(poly: PolyhedralSet, tol: float):
    """Drop all-zero rows (after checking they are trivially satisfiable) and
    return the stacked (A, rhs, q) with inequality rows first."""
    scale = 1.0 + max(
        float(np.max(np.abs(poly.d))) if poly.n_ineq else 0.0,
        float(np.max(np.abs(poly.e))) if poly.n_eq else 0.0,
    )
    keep_i = np.ones(poly.n_ineq, dtype=bool)
    for i in range(poly.n_ineq):
        if not np.any(poly.C[i]):
            if poly.d[i] < -tol * scale:
                raise QpInfeasibleError(f"zero inequality row {i} with d={poly.d[i]} < 0")
            keep_i[i] = False
    keep_e = np.ones(poly.n_eq, dtype=bool)
    for i in range(poly.n_eq):
        if not np.any(poly.E[i]):
            if abs(poly.e[i]) > tol * scale:
                raise QpInfeasibleError(f"zero equality row {i} with e={poly.e[i]} != 0")
            keep_e[i] = False
    C, d = poly.C[keep_i], poly.d[keep_i]
    E, e = poly.E[keep_e], poly.e[keep_e]
    A = np.vstack([C, E]) if C.shape[0] + E.shape[0] else np.zeros((0, poly.dim))
    rhs = np.concatenate([d, e])
    return A, rhs, C.shape[0], scale, keep_i, keep_e


def _dual_ascent(
    A: np.ndarray,
    rhs: np.ndarray,
    q: int,
    H: np.ndarray,
    x_free: np.ndarray,
    lam0: np.ndarray | None,
    tol: float,
    max_sweeps: int,
    scale: float,
):
    """Cyclic coordinate ascent on the dual. Returns (lam, resid, sweeps).

    ``resid`` is the constraint residual A x - rhs at the implied primal
    point. Raises on multiplier blowup with a verified Farkas certificate or
    on hitting the sweep cap.
    """
    rows = rhs.shape[0]
    r0 = A @ x_free - rhs
    # residuals are computed by cancellation against r0, so demanding absolute
    # accuracy below ~1e-12 of its magnitude is asking for sub-roundoff digits;
    # for far query points the threshold degrades to relative gracefully
    thresh = max(tol * scale, 1e-12 * float(np.max(np.abs(r0), initial=0.0)))
    lam = np.zeros(rows) if lam0 is None else np.array(lam0, dtype=float)
    resid = r0 - H @ lam if np.any(lam) else r0.copy()
    hdiag = np.diag(H).copy()
    # rows already pruned of zeros, but guard against numerically tiny norms
    hdiag[hdiag < 1e-300] = np.inf
    lam_probe = lam.copy()
    vel_prev: np.ndarray | None = None
    jump_blocked_until = 0

    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for i in range(rows):
            delta = resid[i] / hdiag[i]
            if i < q:
                new = lam[i] + delta
                if new < 0.0:
                    new = 0.0
                delta = new - lam[i]
            if delta != 0.0:
                lam[i] += delta
                resid -= delta * H[:, i]
        if sweeps % 16 == 0:
            # refresh against incremental drift
            resid = r0 - H @ lam
        viol = 0.0
        if q:
            viol = max(viol, float(np.max(resid[:q])))
        if rows > q:
            viol = max(viol, float(np.max(np.abs(resid[q:]))))
        comp = float(np.max(np.abs(lam[:q] * resid[:q]) / (1.0 + lam[:q]))) if q else 0.0
        if max(viol, comp) <= thresh:
            return lam, resid, sweeps
        # on an infeasible system the multipliers grow along a Farkas ray;
        # the per-probe increment converges to that ray fast, so test it
        if sweeps % 16 == 0:
            cert = _farkas_certificate(A, rhs, q, lam - lam_probe)
            if cert is not None:
                raise QpInfeasibleError("multipliers diverge; system infeasible", cert)
            # degenerate row sets can trap the ascent in a linear drain that
            # moves weight between multipliers at a constant rate per sweep.
            # Inside that regime the trajectory is exactly affine, so once two
            # consecutive probe windows agree on the velocity, jump straight
            # to the first multiplier hitting its nonnegativity wall. A slowly
            # decaying tail can also show matching (tiny) velocities, so the
            # landing is validated and reverted if it made things worse.
            vel = (lam - lam_probe) / 16.0
            vel_norm = float(np.linalg.norm(vel))
            if (
                sweeps >= jump_blocked_until
                and vel_prev is not None
                and float(np.linalg.norm(vel - vel_prev)) <= 1e-3 * (1.0 + vel_norm)
            ):
                lam_mag = float(np.max(lam, initial=0.0))
                drains = (
                    (np.arange(rows) < q)
                    & (lam > 0.0)
                    & (vel < -1e-9 * (1.0 + lam_mag))
                )
                if np.any(drains):
                    jump = float(np.min(lam[drains] / -vel[drains]))
                    if jump > 32.0:
                        lam_save, resid_save = lam.copy(), resid.copy()
                        lam += jump * vel
                        lam[:q] = np.maximum(lam[:q], 0.0)
                        resid = r0 - H @ lam
                        err_after = float(np.max(resid[:q], initial=0.0))
                        if rows > q:
                            err_after = max(err_after, float(np.max(np.abs(resid[q:]))))
                        if q:
                            err_after = max(err_after, float(
                                np.max(np.abs(lam[:q] * resid[:q]) / (1.0 + lam[:q]))
                            ))
                        if err_after <= 4.0 * max(viol, comp):
                            vel = None  # new regime; require fresh agreement
                            # a drained multiplier sits exactly at zero right
                            # now, before any sweep lets it creep back in, so
                            # the active-set guess is at its cleanest
                            lam_p = _polish(r0, H, lam, resid, q, thresh)
                            if lam_p is not None:
                                return lam_p, r0 - H @ lam_p, sweeps
                        else:
                            lam, resid = lam_save, resid_save
                            jump_blocked_until = sweeps + 128
            vel_prev = vel
            lam_probe = lam.copy()
        # near-degenerate active rows make the sweep tail arbitrarily slow;
        # periodically guess the active set and try to finish it exactly
        if sweeps % 64 == 0:
            lam_p = _polish(r0, H, lam, resid, q, thresh)
            if lam_p is not None:
                return lam_p, r0 - H @ lam_p, sweeps
    for candidate in (lam - lam_probe, lam):
        cert = _farkas_certificate(A, rhs, q, candidate)
        if cert is not None:
            raise QpInfeasibleError("no convergence; Farkas certificate found", cert)
    lam_p = _polish(r0, H, lam, resid, q, thresh)
    if lam_p is not None:
        return lam_p, r0 - H @ lam_p, sweeps
    raise QpNonconvergedError(
        f"dual ascent did not reach tol={tol} within {max_sweeps} sweeps"
    )


def _polish(r0, H, lam, resid, q, thresh) -> np.ndarray | None:
    """Exact finish for a guessed active set.

    Guessed-active rows are treated as equalities and their multipliers
    solved in one least-squares shot; inequality rows whose solved multiplier
    comes out negative are dropped once and the system re-solved. Two guesses
    are tried: rows tight or violated at the implied primal point, then that
    set widened by rows with positive multipliers (a stalled ascent can carry
    large multipliers on rows that are actually slack, which poisons the
    wider guess, so the residual-only one goes first). A candidate is
    accepted only if the full KKT conditions verify, so wrong guesses just
    return None and the sweeps continue.
    """
    rows = r0.shape[0]
    eq_or_tight = (np.arange(rows) >= q) | (resid > -10.0 * thresh)
    # rows sharing a normal cannot all be tight: identical H rows mean
    # identical constraint normals, and only the most binding one (largest
    # r0, i.e. smallest offset) can be active; the rest make the guessed
    # subsystem inconsistent, so drop them up front
    keep_of: dict[bytes, int] = {}
    for i in range(q):
        key = H[i].tobytes()
        j = keep_of.get(key)
        if j is None or r0[i] > r0[j]:
            keep_of[key] = i
    dup = np.zeros(rows, dtype=bool)
    for i in range(q):
        if keep_of[H[i].tobytes()] != i:
            dup[i] = True
    eq_or_tight &= ~dup
    widened = eq_or_tight | ((lam > 0.0) & ~dup)

    def verified(act) -> np.ndarray | None:
        lam_p = _polish_attempt(r0, H, q, act.copy())
        if lam_p is None:
            return None
        resid_p = r0 - H @ lam_p
        viol = float(np.max(resid_p[:q], initial=0.0))
        if rows > q:
            viol = max(viol, float(np.max(np.abs(resid_p[q:]))))
        comp = (
            float(np.max(np.abs(lam_p[:q] * resid_p[:q]) / (1.0 + lam_p[:q])))
            if q else 0.0
        )
        return lam_p if max(viol, comp) <= thresh else None

    for act in (eq_or_tight, widened):
        lam_p = verified(act)
        if lam_p is not None:
            return lam_p
    # a stalled ascent typically carries exactly one stale row (slack at the
    # optimum but still holding weight), which makes the widened subsystem
    # inconsistent without driving any solved multiplier negative; with few
    # enough rows just try every single-row removal
    cand = np.flatnonzero(widened[:q])
    if 0 < cand.size <= 24:
        for i in cand:
            act = widened.copy()
            act[i] = False
            lam_p = verified(act)
            if lam_p is not None:
                return lam_p
    return None


def _polish_attempt(r0, H, q, act) -> np.ndarray | None:
    rows = r0.shape[0]
    for _ in range(2):
        idx = np.flatnonzero(act)
        lam_p = np.zeros(rows)
        if idx.size:
            nu, *_ = np.linalg.lstsq(H[np.ix_(idx, idx)], r0[idx], rcond=None)
            lam_p[idx] = nu
        neg = (lam_p < 0.0) & (np.arange(rows) < q)
        if not np.any(neg):
            break
        act &= ~neg
    else:
        return None
    if np.any(lam_p[:q] < 0.0):
        return None
    return lam_p


def _farkas_certificate(A, rhs, q, ray) -> np.ndarray | None:
    """Check whether a candidate multiplier ray certifies infeasibility:
    y >= 0 on inequality rows, A'y ~ 0, y.rhs < 0. Converged rows contribute
    noise to the candidate, so tiny negative inequality entries are clipped
    before the (deliberately tight) checks."""
    norm = float(np.sum(np.abs(ray)))
    if norm <= 0.0:
        return None
    y = ray / norm
    if q:
        if np.any(y[:q] < -1e-6):
            return None
        y = y.copy()
        y[:q] = np.maximum(y[:q], 0.0)
    row_scale = 1.0 + float(np.max(np.abs(A))) if A.size else 1.0
    if float(np.max(np.abs(A.T @ y))) > 1e-8 * row_scale:
        return None
    if float(y @ rhs) >= -1e-6 * (1.0 + float(np.max(np.abs(rhs)))):
        return None
    return y


def _kkt_residual(resid: np.ndarray, lam: np.ndarray, q: int, scale: float) -> float:
    viol = 0.0
    if q:
        viol = max(viol, float(np.max(resid[:q])))
    if resid.shape[0] > q:
        viol = max(viol, float(np.max(np.abs(resid[q:]))))
    comp = float(np.max(np.abs(lam[:q] * resid[:q]) / (1.0 + lam[:q]))) if q else 0.0
    return max(viol, comp, 0.0) / scale


class PolyhedralProjector:
    """Euclidean projector onto one polyhedron with cached precomputation and
    warm-started multipliers.

    The Gram matrix H = A A' and the pruned row system are built once; each
    ``project`` call reuses the previous call's multipliers as the dual
    starting point, which is what makes tight projection loops (baseline
    solvers) affordable. Warm state is per instance: build a fresh projector
    for a fresh run.
    """

    def __init__(self, poly: PolyhedralSet, tol: float = 1e-8):
        self.poly = poly
        self.tol = tol
        self._A, self._rhs, self._q, self._scale, _, _ = _stack_system(poly, tol)
        self._H = self._A @ self._A.T
        self._lam: np.ndarray | None = None
        n = poly.dim
        self.max_sweeps = 50 * (self._rhs.shape[0] + n)
        self.calls = 0
        self.total_sweeps = 0

    def reset(self) -> None:
        self._lam = None

    def project(self, z: np.ndarray) -> np.ndarray:
        """argmin_x ||x - z|| over the polyhedron."""
        _count_projection()
        self.calls += 1
        z = np.asarray(z, dtype=float)
        if self._rhs.shape[0] == 0:
            return z.copy()
        lam, resid, sweeps = _dual_ascent(
            self._A, self._rhs, self._q, self._H, z,
            self._lam, self.tol, self.max_sweeps, self._scale,
        )
        self._lam = lam
        self.total_sweeps += sweeps
        return z - self._A.T @ lam


def project_polyhedron(
    poly: PolyhedralSet, z: np.ndarray, tol: float = 1e-8
) -> QpSolution:
    """One-shot Euclidean projection; returns the full multiplier record.

    For repeated projections onto the same set use ``PolyhedralProjector``.
    """
    _count_projection()
    z = np.asarray(z, dtype=float)
    A, rhs, q, scale, keep_i, keep_e = _stack_system(poly, tol)
    if rhs.shape[0] == 0:
        return QpSolution(z.copy(), np.zeros(poly.n_ineq), np.zeros(poly.n_eq), 0, 0.0)
    H = A @ A.T
    max_sweeps = 50 * (rhs.shape[0] + poly.dim)
    lam, resid, sweeps = _dual_ascent(A, rhs, q, H, z, None, tol, max_sweeps, scale)
    x = z - A.T @ lam
    lam_i = np.zeros(poly.n_ineq)
    lam_i[keep_i] = lam[:q]
    lam_e = np.zeros(poly.n_eq)
    lam_e[keep_e] = lam[q:]
    return QpSolution(x, lam_i, lam_e, sweeps, _kkt_residual(resid, lam, q, scale))


def solve_qp(
    Q: np.ndarray,
    c: np.ndarray,
    poly: PolyhedralSet,
    tol: float = 1e-8,
    x0: np.ndarray | None = None,
    rho: float = 1.0,
    max_outer: int = 20000,
) -> QpSolution:
    """min 0.5 x.Q x + c.x over the polyhedron, Q symmetric PSD.

    Positive definite Q is solved by one dual ascent. Singular Q goes through
    proximal-point outer iterations on Q + rho*I with warm-started
    multipliers; the reported KKT residual then includes the proximal
    stationarity term rho * ||x_{t+1} - x_t||_inf. Raises
    ``QpInfeasibleError`` or ``QpUnboundedError`` with certificates, or
    ``QpNonconvergedError`` past the iteration caps.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    c = np.asarray(c, dtype=float).ravel()
    n = poly.dim
    if Q.shape != (n, n) or c.shape[0] != n:
        raise ValueError("Q/c dimensions do not match the polyhedron")
    Q = 0.5 * (Q + Q.T)

    A, rhs, q, scale, keep_i, keep_e = _stack_system(poly, tol)
    rows = rhs.shape[0]
    max_sweeps = 50 * (rows + n)

    def _finish(x, lam, resid, sweeps, extra_resid=0.0):
        lam_i = np.zeros(poly.n_ineq)
        lam_e = np.zeros(poly.n_eq)
        if rows:
            lam_i[keep_i] = lam[:q]
            lam_e[keep_e] = lam[q:]
            kkt = _kkt_residual(resid, lam, q, scale)
        else:
            kkt = 0.0
        return QpSolution(x, lam_i, lam_e, sweeps, max(kkt, extra_resid))

    # strictly convex case: factor Q directly; a near-singular Q can slip
    # through potrf with a tiny last pivot, so gate on the squared pivot
    # (an eigenvalue-scale quantity) rather than factorization success
    try:
        chol = cho_factor(Q, lower=True)
        definite = bool(np.min(np.diag(chol[0])) ** 2 > 1e-8 * (1.0 + np.max(np.abs(Q))))
    except np.linalg.LinAlgError:
        definite = False
    if definite:
        x_free = cho_solve(chol, -c)
        if rows == 0:
            return _finish(x_free, np.zeros(0), np.zeros(0), 0)
        G = cho_solve(chol, A.T)
        H = A @ G
        lam, resid, sweeps = _dual_ascent(A, rhs, q, H, x_free, None, tol, max_sweeps, scale)
        return _finish(x_free - G @ lam, lam, resid, sweeps)

    # semidefinite case: proximal point on S = Q + rho I
    S = Q + rho * np.eye(n)
    chol = cho_factor(S, lower=True)
    G = cho_solve(chol, A.T) if rows else np.zeros((n, 0))
    H = A @ G if rows else np.zeros((0, 0))
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    lam = None
    total_sweeps = 0
    prev_step: np.ndarray | None = None
    x_scale = 1.0 + float(np.max(np.abs(x)))
    qnorm = 1.0 + float(np.max(np.abs(Q)))
    for outer in range(1, max_outer + 1):
        x_free = cho_solve(chol, rho * x - c)
        if rows:
            lam, resid, sweeps = _dual_ascent(
                A, rhs, q, H, x_free, lam, tol, max_sweeps, scale
            )
            x_next = x_free - G @ lam
            total_sweeps += sweeps
        else:
            x_next, resid = x_free, np.zeros(0)
        step = x_next - x
        step_inf = float(np.max(np.abs(step), initial=0.0))
        x_scale = 1.0 + float(np.max(np.abs(x_next)))
        if rho * step_inf <= tol * x_scale:
            return _finish(
                x_next, lam if lam is not None else np.zeros(rows), resid,
                total_sweeps, extra_resid=rho * step_inf / x_scale,
            )
        # a steady nonvanishing displacement suggests a recession ray; verify
        if prev_step is not None and step_inf > 10.0 * tol:
            prev_inf = float(np.max(np.abs(prev_step), initial=0.0))
            if prev_inf > 0.0 and 0.5 <= step_inf / prev_inf <= 2.0:
                v = step / np.linalg.norm(step)
                ok = float(c @ v) < -1e-10
                ok = ok and float(np.max(np.abs(Q @ v))) <= 1e-8 * qnorm
                if ok and q:
                    ok = float(np.max(A[:q] @ v)) <= 1e-8
                if ok and rows > q:
                    ok = float(np.max(np.abs(A[q:] @ v))) <= 1e-8
                if ok:
                    raise QpUnboundedError("objective unbounded below", v)
        prev_step = step
        x = x_next
    raise QpNonconvergedError(
        f"proximal loop did not reach tol={tol} within {max_outer} outer steps"
    )
