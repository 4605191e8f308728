"""Max-entropy solver for the redundancy/uniqueness/synergy decomposition.

Finds ``q* = argmax_{q in Delta_p} H_q(Y | X1, X2)`` where ``Delta_p`` is the
set of joints sharing p(x1, y) and p(x2, y). For each label value the
constraint set is a transportation polytope, so the KL projection onto
``Delta_p`` is iterative proportional fitting run slice by slice.

The ascent step is a mirror (exponentiated-gradient) step with the analytic
gradient ``log2 q(x1, x2) - log2 q(x1, x2, y)``. At ``step_size=1`` this is
exactly the alternating I-projection scheme between ``Delta_p`` and the
family ``r(x1, x2) * 1(y)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dist import (
    CONSISTENCY_TOL,
    JointDist,
    PairwiseMarginals,
    PIDResult,
    co_information,
    conditional_mutual_info,
    mutual_info,
    pairwise_marginals,
)
from .errors import ArgumentError, InfeasibleError, StaleSolutionError

log = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the first-order solvers.

    ``init_jitter`` scales a seeded multiplicative log-normal perturbation of
    the starting point; zero (the default) starts from the conditionally
    independent coupling.
    """

    step_size: float = 1.0
    max_iters: int = 50_000
    tol_obj: float = 1e-10
    tol_marginal: float = 1e-9
    floor_eps: float = 1e-15
    seed: int = 0
    init_jitter: float = 0.0
    method: str = "barrier"

    def __post_init__(self):
        if not 0 < self.step_size <= 1:
            raise ArgumentError(f"step_size must lie in (0, 1], got {self.step_size}")
        for name in ("tol_obj", "tol_marginal", "floor_eps"):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ArgumentError("max_iters must be at least 1")
        if self.init_jitter < 0:
            raise ArgumentError("init_jitter must be non-negative")
        if self.method not in ("barrier", "mirror"):
            raise ArgumentError(f"method must be 'barrier' or 'mirror', got {self.method!r}")


@dataclass
class SolveTrace:
    objective_per_sweep: list[float] = field(default_factory=list)
    max_marginal_violation: float = float("nan")
    sweeps: int = 0
    converged: bool = False


# --------------------------------------------------------------------------
# objective and gradient
# --------------------------------------------------------------------------


def conditional_entropy_objective(q: np.ndarray) -> float:
    """H_q(Y | X1, X2) in bits for a non-negative tensor ``q[x1, x2, y]``.

    Evaluated on the homogeneous extension ``H(X1,X2,Y) - H(X1,X2)``, so it
    is defined (and differentiable) off the simplex as well.
    """
    q = np.asarray(q, dtype=float)
    qab = q.sum(axis=2)
    nz = q > 0
    nzab = qab > 0
    return float(-(q[nz] * np.log2(q[nz])).sum() + (qab[nzab] * np.log2(qab[nzab])).sum())


def objective_gradient(q: np.ndarray, floor_eps: float = 1e-15) -> np.ndarray:
    """Gradient of :func:`conditional_entropy_objective`: ``log2 q(x1,x2) - log2 q(x1,x2,y)``."""
    q = np.maximum(np.asarray(q, dtype=float), floor_eps)
    return np.log2(q.sum(axis=2, keepdims=True)) - np.log2(q)


# --------------------------------------------------------------------------
# projection
# --------------------------------------------------------------------------


def support_mask(marginals: PairwiseMarginals) -> np.ndarray:
    """Cells not forced to zero by p(x1, y) = 0 or p(x2, y) = 0."""
    return (marginals.m1y[:, None, :] > 0) & (marginals.m2y[None, :, :] > 0)


def _slice_violation(q, m1y, m2y) -> float:
    return max(np.abs(q.sum(axis=1) - m1y).max(), np.abs(q.sum(axis=0) - m2y).max())


def scale_matrix(k: np.ndarray, a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    """Diagonal scaling ``diag(e^u) k diag(e^v)`` with row sums ``a`` and column sums ``b``.

    Newton's method on the convex dual
    ``sum k_ij e^(u_i + v_j) - a.u - b.v``. Unlike plain proportional fitting
    it does not stall when ``k`` is close to block diagonal. Rows and columns
    with zero target are dropped; ``k`` must have a positive entry wherever a
    positive row meets a positive column that the solution needs.
    """
    out = np.zeros_like(k)
    ri, ci = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    if ri.size == 0 or ci.size == 0:
        return out
    kk = k[np.ix_(ri, ci)]
    aa, bb = a[ri], b[ci]
    n, m = kk.shape
    u = np.log(aa) - np.log(np.maximum(kk.sum(1), 1e-300))
    v = np.zeros(m)
    with np.errstate(over="ignore"):
        for _ in range(200):
            x = kk * np.exp(u[:, None] + v[None, :])
            gr, gc = x.sum(1) - aa, x.sum(0) - bb
            if max(np.abs(gr).max(), np.abs(gc).max()) < tol:
                break
            # drop the last column potential: the dual is invariant to u+c, v-c
            hess = np.zeros((n + m - 1, n + m - 1))
            hess[:n, :n] = np.diag(x.sum(1))
            hess[n:, n:] = np.diag(x.sum(0)[:-1])
            hess[:n, n:] = x[:, :-1]
            hess[n:, :n] = x[:, :-1].T
            g = np.concatenate([gr, gc[:-1]])
            hess[np.diag_indices_from(hess)] += 1e-15
            try:
                step = np.linalg.solve(hess, -g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(hess, -g, rcond=None)[0]
            du, dv = step[:n], np.append(step[n:], 0.0)
            f0 = x.sum() - aa @ u - bb @ v
            slope = g @ step
            t = 1.0
            while t > 1e-12:
                un, vn = u + t * du, v + t * dv
                fn = (kk * np.exp(un[:, None] + vn[None, :])).sum() - aa @ un - bb @ vn
                if np.isfinite(fn) and fn <= f0 + 1e-4 * t * slope:
                    break
                t *= 0.5
            u, v = un, vn
    out[np.ix_(ri, ci)] = kk * np.exp(u[:, None] + v[None, :])
    return out


def ipf_project(
    q: np.ndarray, m1y: np.ndarray, m2y: np.ndarray, tol: float, max_sweeps: int = 50
) -> tuple[np.ndarray, float]:
    """KL projection of ``q`` onto the joints with the given label marginals.

    Every y-slice is scaled independently; rows to ``m1y[:, y]`` then columns
    to ``m2y[:, y]``. Slices still violating ``tol`` after ``max_sweeps``
    rounds are finished by :func:`scale_matrix`, which reaches the same fixed
    point.
    """
    q = q.copy()
    viol = np.inf
    for _ in range(max_sweeps):
        rows = q.sum(axis=1)
        q *= np.divide(m1y, rows, out=np.zeros_like(m1y), where=rows > 0)[:, None, :]
        cols = q.sum(axis=0)
        q *= np.divide(m2y, cols, out=np.zeros_like(m2y), where=cols > 0)[None, :, :]
        viol = _slice_violation(q, m1y, m2y)
        if viol < tol:
            return q, float(viol)
    for y in range(q.shape[2]):
        if _slice_violation(q[:, :, y], m1y[:, y], m2y[:, y]) >= tol:
            q[:, :, y] = scale_matrix(q[:, :, y], m1y[:, y], m2y[:, y], tol)
    return q, float(_slice_violation(q, m1y, m2y))


def feasible_init(marginals: PairwiseMarginals) -> JointDist:
    """The conditionally independent coupling ``p(x1,y) p(x2,y) / p(y)``.

    Lies in ``Delta_p`` exactly; slices with p(y) = 0 are left empty.
    """
    m1y, m2y = marginals.m1y, marginals.m2y
    py1, py2 = m1y.sum(0), m2y.sum(0)
    if np.max(np.abs(py1 - py2)) > CONSISTENCY_TOL:
        raise InfeasibleError("p(y) implied by m1y and m2y disagree; Delta_p is empty")
    py = 0.5 * (py1 + py2)
    inv = np.divide(1.0, py, out=np.zeros_like(py), where=py > 0)
    q = m1y[:, None, :] * m2y[None, :, :] * inv[None, None, :]
    return JointDist.from_array(q / q.sum())


def _as_marginals(source) -> PairwiseMarginals:
    if isinstance(source, JointDist):
        return pairwise_marginals(source, include_m12=True)
    if isinstance(source, PairwiseMarginals):
        return source
    raise ArgumentError(f"expected JointDist or PairwiseMarginals, got {type(source).__name__}")


def solve_q_star(source, config: SolverConfig | None = None) -> tuple[JointDist, SolveTrace]:
    """Maximize H_q(Y | X1, X2) over joints sharing both label marginals.

    Parameters
    ----------
    source : PairwiseMarginals or JointDist
        Only ``m1y`` and ``m2y`` are used.
    config : SolverConfig, optional
        ``method="barrier"`` (default) runs the dual interior-point solver,
        ``method="mirror"`` the exponentiated-gradient ascent.

    Returns
    -------
    q_star : JointDist
    trace : SolveTrace
        ``converged`` is False when ``max_iters`` ran out first; the best
        iterate is still returned.
    """
    config = config or SolverConfig()
    marginals = _as_marginals(source)
    m1y, m2y = marginals.m1y, marginals.m2y
    q0 = feasible_init(marginals).probs
    if marginals.card.ny == 1:
        trace = SolveTrace([0.0], _slice_violation(q0, m1y, m2y), 0, True)
        return JointDist.from_array(q0), trace

    if config.method == "mirror":
        q, trace = _mirror_ascent(q0, marginals, config)
    else:
        q, trace = _dual_barrier(marginals, config)
    if _slice_violation(q, m1y, m2y) >= config.tol_marginal:
        q = ipf_project(q, m1y, m2y, min(config.tol_marginal, 1e-12))[0]
    trace.max_marginal_violation = _slice_violation(q, m1y, m2y)
    if not trace.converged:
        log.warning("max-entropy solve stopped after %d iterations without converging", trace.sweeps)
    return JointDist.from_array(q / q.sum()), trace


def _mirror_ascent(q0: np.ndarray, marginals: PairwiseMarginals, config: SolverConfig):
    m1y, m2y = marginals.m1y, marginals.m2y
    mask = support_mask(marginals)
    tol = config.tol_marginal
    trace = SolveTrace()
    q = q0.copy()
    if config.init_jitter > 0:
        rng = np.random.default_rng(config.seed)
        q = q * np.exp(config.init_jitter * rng.standard_normal(q.shape))
        q, _ = ipf_project(q, m1y, m2y, tol)
    obj = conditional_entropy_objective(q)
    trace.objective_per_sweep.append(obj)

    eta0 = config.step_size
    for sweep in range(1, config.max_iters + 1):
        grad = objective_gradient(q, config.floor_eps)
        eta = eta0
        while True:
            logq = np.log(np.maximum(q, config.floor_eps)) + eta * np.log(2.0) * grad
            cand = np.where(mask, np.exp(logq - logq[mask].max()), 0.0)
            cand, _ = ipf_project(cand, m1y, m2y, tol)
            new_obj = conditional_entropy_objective(cand)
            if new_obj >= obj - MONOTONE_SLACK or eta < 1e-8:
                break
            eta *= 0.5
        delta = new_obj - obj
        if delta >= -MONOTONE_SLACK:
            q, obj = cand, new_obj
        trace.objective_per_sweep.append(obj)
        trace.sweeps = sweep
        # decreases inside the slack are projection noise at a stationary point
        if delta < config.tol_obj:
            trace.converged = True
            break
    return q, trace


def _dual_barrier(marginals: PairwiseMarginals, config: SolverConfig):
    """Log-barrier Newton method on the dual of the max-entropy program.

    In nats the primal is ``min sum q log(q / q(x1,x2))`` over Delta_p. Its
    dual is ``max <A, lam> + <B, mu>`` subject to
    ``logsumexp_y(lam[x1,y] + mu[x2,y]) <= 0`` for every (x1, x2), where A
    and B are the label marginals. On the central path the primal iterate is
    ``q = softmax_y(lam + mu) / (t * -logsumexp)``; it is projected onto
    Delta_p after every centering step and the best feasible point is kept.
    """
    a_m, b_m = marginals.m1y, marginals.m2y
    n1, n2, ny = marginals.card.shape
    mask = support_mask(marginals)
    active = mask.any(axis=2)
    n_con = int(active.sum())
    nv = (n1 + n2) * ny
    tol = config.tol_marginal
    trace = SolveTrace()

    def split(theta):
        return theta[: n1 * ny].reshape(n1, ny), theta[n1 * ny :].reshape(n2, ny)

    def evaluate(theta, t):
        lam, mu = split(theta)
        z = np.where(mask, lam[:, None, :] + mu[None, :, :], -np.inf)
        zmax = np.where(active, z.max(axis=2), 0.0)
        e = np.exp(z - zmax[:, :, None])
        se = e.sum(axis=2)
        lse = np.where(active, zmax + np.log(np.where(active, se, 1.0)), -1.0)
        if np.any(lse[active] >= 0):
            return None
        pi = e / np.where(active, se, 1.0)[:, :, None]
        value = t * ((a_m * lam).sum() + (b_m * mu).sum()) + np.log(-lse[active]).sum()
        return value, lse, pi

    def newton_parts(theta, t, lse, pi):
        inv = 1.0 / lse  # negative
        w = pi * inv[:, :, None]
        g_lam = t * a_m + w.sum(axis=1)
        g_mu = t * b_m + w.sum(axis=0)
        grad = np.concatenate([g_lam.ravel(), g_mu.ravel()])
        # per-pair curvature: diag(pi)/L - pi pi^T (1/L + 1/L^2)
        coef = np.where(active, inv + inv**2, 0.0)
        outer = pi[:, :, :, None] * pi[:, :, None, :] * coef[:, :, None, None]
        m = -outer
        idx = np.arange(ny)
        m[:, :, idx, idx] += w
        hess = np.zeros((nv, nv))
        ll = m.sum(axis=1)  # (n1, ny, ny)
        uu = m.sum(axis=0)  # (n2, ny, ny)
        for a in range(n1):
            hess[a * ny : (a + 1) * ny, a * ny : (a + 1) * ny] = ll[a]
        off = n1 * ny
        for b in range(n2):
            hess[off + b * ny : off + (b + 1) * ny, off + b * ny : off + (b + 1) * ny] = uu[b]
        cross = m.transpose(0, 2, 1, 3).reshape(n1 * ny, n2 * ny)
        hess[:off, off:] = cross
        hess[off:, :off] = cross.T
        return grad, hess

    theta = np.full(nv, -0.5 * (np.log(ny) + 1.0))
    t = 1.0
    best_q, best_obj = None, -np.inf
    newton_steps = 0
    converged = False
    while newton_steps < config.max_iters:
        state = evaluate(theta, t)
        centered = False
        while newton_steps < config.max_iters:
            value, lse, pi = state
            grad, hess = newton_parts(theta, t, lse, pi)
            neg = -hess
            neg[np.diag_indices_from(neg)] += 1e-12 * max(1.0, np.abs(np.diag(neg)).max())
            try:
                step = np.linalg.solve(neg, grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(neg, grad, rcond=None)[0]
            decrement = float(grad @ step)
            newton_steps += 1
            if decrement < 1e-12 * max(1.0, abs(value)) or decrement < 1e-18:
                centered = True
                break
            s = 1.0
            while s > 1e-14:
                cand = evaluate(theta + s * step, t)
                if cand is not None and cand[0] >= value + 1e-4 * s * decrement:
                    break
                s *= 0.5
            else:
                centered = True
                break
            theta, state = theta + s * step, cand
        value, lse, pi = state
        q = np.where(active[:, :, None], pi / (t * -lse)[:, :, None], 0.0)
        q, _ = ipf_project(q / q.sum(), a_m, b_m, tol)
        obj = conditional_entropy_objective(q)
        if obj >= best_obj:
            best_q, best_obj = q, obj
        trace.objective_per_sweep.append(best_obj)
        trace.sweeps = newton_steps
        if centered and n_con / t < config.tol_obj * np.log(2.0):
            converged = True
            break
        t *= 20.0
    trace.converged = converged
    return best_q, trace


def marginal_violation(q: JointDist, marginals: PairwiseMarginals) -> float:
    return _slice_violation(q.probs, marginals.m1y, marginals.m2y)


def compute_pid(source, q_star: JointDist, config: SolverConfig | None = None, trace: SolveTrace | None = None) -> PIDResult:
    """Read R, U1, U2 (and S when the full joint is known) off ``q_star``.

    With a :class:`JointDist` source, S = I_p({X1,X2}; Y) - I_q*({X1,X2}; Y).
    With only :class:`PairwiseMarginals`, S and the total are ``None``.
    """
    config = config or SolverConfig()
    marginals = _as_marginals(source)
    if q_star.shape != marginals.card.shape:
        raise StaleSolutionError(f"q_star shape {q_star.shape} does not match marginals {marginals.card.shape}")
    viol = marginal_violation(q_star, marginals)
    if viol > 10 * config.tol_marginal:
        raise StaleSolutionError(f"q_star violates the label marginals by {viol:.3g}")
    s = total = None
    if marginals.card.ny == 1:
        # a constant label carries no information; skip float noise
        r = u1 = u2 = 0.0
        if isinstance(source, JointDist):
            s = total = 0.0
    else:
        r = co_information(q_star)
        u1 = conditional_mutual_info(q_star, "x1", "y", "x2")
        u2 = conditional_mutual_info(q_star, "x2", "y", "x1")
        if isinstance(source, JointDist):
            total = mutual_info(source, ("x1", "x2"), "y")
            s = total - mutual_info(q_star, ("x1", "x2"), "y")
    return PIDResult(
        r=r,
        u1=u1,
        u2=u2,
        s=s,
        total_mi=total,
        converged=True if trace is None else trace.converged,
        iterations=0 if trace is None else trace.sweeps,
    )


def pid(source, config: SolverConfig | None = None) -> PIDResult:
    """Solve and decompose in one call."""
    q_star, trace = solve_q_star(source, config)
    return compute_pid(source, q_star, config, trace)


def pid_from_samples(table, dconfig=None, sconfig: SolverConfig | None = None) -> PIDResult:
    """Discretize a :class:`~pidq.discretize.SampleTable` and decompose its empirical joint."""
    from .discretize import discretize_table

    joint, _ = discretize_table(table, dconfig)
    return pid(joint, sconfig)
