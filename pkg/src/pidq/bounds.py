"""Synergy bounds and performance estimates from pairwise marginals only.

Given p(x1, y), p(x2, y) and p(x1, x2) (but never the full joint) this
module brackets synergy from below twice, via redundancy and via modality
disagreement, and once from above via a minimum-entropy coupling. The
bracketed total information then yields accuracy bounds for the Bayes
optimal multimodal classifier.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .coupling import Coupling, greedy_coupling
from .dist import JointDist, PairwiseMarginals, _xlogx_sum, entropy
from .errors import ArgumentError, InfeasibleError, MissingMarginalError
from .solver import SolverConfig, compute_pid, solve_q_star

log = logging.getLogger(__name__)

LN2 = np.log(2.0)


@dataclass(frozen=True)
class DisagreementConfig:
    distance: str = "zero_one"
    c: float = 1.0
    tie_break: str = "lowest_index"

    def __post_init__(self):
        if self.distance != "zero_one":
            raise ArgumentError(f"unsupported label distance {self.distance!r}")
        if self.tie_break != "lowest_index":
            raise ArgumentError(f"unsupported tie_break {self.tie_break!r}")
        if not self.c > 0:
            raise ArgumentError("c must be positive")


@dataclass(frozen=True)
class PerfBounds:
    p_lower: float
    p_upper: float
    p_hat: float


@dataclass
class MinCMITrace:
    """IPF diagnostics.

    ``lower_bound_per_sweep`` holds a certified lower bound on the minimum
    conditional MI after each sweep; it is non-decreasing and meets the
    returned value at convergence.
    """

    lower_bound_per_sweep: list[float] = field(default_factory=list)
    max_marginal_violation: float = float("nan")
    sweeps: int = 0
    converged: bool = False


@dataclass(frozen=True)
class SynergyBounds:
    """Everything computable without the full joint.

    Fields that need p(x1, x2) are ``None`` when it is missing, with the
    reason in ``notes``.
    """

    r: float
    u1: float
    u2: float
    s_r_lower: float | None
    s_u_lower: float | None
    s_upper: float | None
    min_cmi: float | None
    i12: float | None
    alpha: float | None
    coupling_entropy: float | None
    approximation_slack: bool = False
    converged: bool = True
    notes: tuple[str, ...] = ()

    @property
    def s_lower(self) -> float:
        """Best available lower bound, floored at zero."""
        vals = [v for v in (self.s_r_lower, self.s_u_lower) if v is not None]
        return max([0.0, *vals])


# --------------------------------------------------------------------------
# lower bound via redundancy
# --------------------------------------------------------------------------


def _require_m12(marginals: PairwiseMarginals) -> np.ndarray:
    if marginals.m12 is None:
        raise MissingMarginalError("this bound requires unlabeled multimodal data p(x1, x2)")
    return marginals.m12


def joint_entropy_objective(r: np.ndarray) -> float:
    """H(X1, X2, Y) in bits of a non-negative tensor (not renormalized)."""
    r = np.asarray(r, dtype=float)
    return _xlogx_sum(r)


def joint_entropy_gradient(r: np.ndarray, floor_eps: float = 1e-15) -> np.ndarray:
    """Gradient of :func:`joint_entropy_objective`: ``-log2 r - 1/ln 2``."""
    return -np.log2(np.maximum(np.asarray(r, dtype=float), floor_eps)) - 1.0 / LN2


IPF_SWEEPS_BEFORE_NEWTON = 500
NEWTON_MAX_CELLS = 4000


def _maxent_newton(support, targets, pots, tol, max_steps):
    """Damped Newton on ``f(phi) = logsumexp(A phi) - <b, phi>``.

    ``A`` maps the potentials of the positive marginal entries onto the
    support cells, ``b`` stacks the target marginals, and ``min f`` equals the
    maximum entropy (nats) over the joints that match them. Works in place on
    ``pots``. Returns the normalized tensor, the final marginal violation and
    the value of ``f`` after every step.
    """
    cells = np.argwhere(support)
    cols, offset = [], 0
    index_maps, b = [], []
    for (target, axis), pot in zip(targets, pots):
        pos = target > 0
        idx = np.full(target.shape, -1)
        idx[pos] = offset + np.arange(pos.sum())
        offset += int(pos.sum())
        index_maps.append(idx)
        b.append(target[pos])
    b = np.concatenate(b)
    keep = [[0, 1], [0, 2], [1, 2]]
    for idx, k in zip(index_maps, keep):
        cols.append(idx[cells[:, k[0]], cells[:, k[1]]])
    a = np.zeros((len(cells), offset))
    rows = np.arange(len(cells))
    for c in cols:
        a[rows, c] = 1.0
    phi = np.concatenate([pot[t > 0] for (t, _), pot in zip(targets, pots)])

    def f(phi):
        z = a @ phi
        zmax = z.max()
        lse = zmax + np.log(np.exp(z - zmax).sum())
        return lse - b @ phi, np.exp(z - lse)

    value, pi = f(phi)
    values = []
    viol = np.abs(a.T @ pi - b).max()
    for _ in range(max_steps):
        if viol < tol:
            break
        grad = a.T @ pi - b
        hess = (a.T * pi) @ a - np.outer(a.T @ pi, a.T @ pi)
        hess[np.diag_indices_from(hess)] += 1e-14 * max(1.0, np.abs(np.diag(hess)).max())
        step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
        slope = float(grad @ step)
        if slope > -1e-300:
            break
        s = 1.0
        while s > 1e-12:
            new_value, new_pi = f(phi + s * step)
            if new_value <= value + 1e-4 * s * slope:
                break
            s *= 0.5
        else:
            break
        phi, value, pi = phi + s * step, new_value, new_pi
        values.append(value)
        viol = np.abs(a.T @ pi - b).max()
    r = np.zeros(support.shape)
    r[tuple(cells.T)] = pi
    return r, float(viol), values


def min_conditional_mi(
    marginals: PairwiseMarginals, config: SolverConfig | None = None, max_sweeps: int = 100_000
) -> tuple[JointDist, float, MinCMITrace]:
    """Minimize I_r(X1; X2 | Y) over joints matching all three pairwise marginals.

    On that set H(X1,Y), H(X2,Y) and H(Y) are fixed, so the minimizer is the
    maximum-entropy joint, reached by cyclic proportional fitting from the
    uniform tensor on the cells no marginal forces to zero.

    Returns
    -------
    r_star : JointDist
    value : float
        I_{r*}(X1; X2 | Y) in bits.
    trace : MinCMITrace
    """
    config = config or SolverConfig()
    m12 = _require_m12(marginals)
    m1y, m2y = marginals.m1y, marginals.m2y
    support = (m12[:, :, None] > 0) & (m1y[:, None, :] > 0) & (m2y[None, :, :] > 0)
    for name, marg, covered in (
        ("p(x1,x2)", m12, support.any(axis=2)),
        ("p(x1,y)", m1y, support.any(axis=1)),
        ("p(x2,y)", m2y, support.any(axis=0)),
    ):
        bad = (marg > 0) & ~covered
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise InfeasibleError(f"{name} puts mass on {idx} but no joint cell can carry it")

    # log r = pot12[x1,x2] + pot1y[x1,y] + pot2y[x2,y] on the support
    pot12 = np.full(m12.shape, -np.log(support.sum()))
    pot1y = np.zeros(m1y.shape)
    pot2y = np.zeros(m2y.shape)
    targets = [(m12, 2), (m1y, 1), (m2y, 0)]
    pots = [pot12, pot1y, pot2y]
    fixed = entropy(m1y) + entropy(m2y) - entropy(marginals.py)
    trace = MinCMITrace()

    def tensor():
        z = pot12[:, :, None] + pot1y[:, None, :] + pot2y[None, :, :]
        return np.where(support, np.exp(np.where(support, z, 0.0)), 0.0)

    def certificate():
        # cross-entropy of any feasible joint against r, an upper bound on max H
        d = sum((t[t > 0] * p[t > 0]).sum() for (t, _), p in zip(targets, pots))
        return fixed + d / LN2

    r = tensor()
    best = -np.inf
    viol = np.inf
    tol = min(config.tol_marginal, 1e-10)
    ipf_sweeps = max_sweeps if support.sum() > NEWTON_MAX_CELLS else min(max_sweeps, IPF_SWEEPS_BEFORE_NEWTON)
    for sweep in range(1, ipf_sweeps + 1):
        for (target, axis), pot in zip(targets, pots):
            cur = r.sum(axis=axis)
            pos = target > 0
            pot[pos] += np.log(target[pos] / cur[pos])
            r = tensor()
        viol = max(np.abs(r.sum(axis=ax) - t).max() for t, ax in targets)
        best = max(best, certificate())
        trace.lower_bound_per_sweep.append(best)
        trace.sweeps = sweep
        if viol < tol:
            trace.converged = True
            break
    if not trace.converged and ipf_sweeps < max_sweeps:
        # implied zeros make IPF sublinear; finish on the dual with Newton
        # residual mass m on an implied zero still costs ~ m log(1/m) bits of
        # entropy, so Newton is driven well past the marginal tolerance
        r, viol, values = _maxent_newton(support, targets, pots, 1e-3 * tol, max_sweeps - ipf_sweeps)
        for v in values:
            best = max(best, fixed - v / LN2)
            trace.lower_bound_per_sweep.append(best)
        trace.sweeps += len(values)
        trace.converged = viol < tol
    trace.max_marginal_violation = float(viol)
    if not trace.converged:
        if viol > 1e-6:
            raise InfeasibleError(f"pairwise marginals are not jointly realizable (violation {viol:.3g})")
        log.warning("min conditional MI: stopped at marginal violation %.3g", viol)
    r_star = JointDist.from_array(r / r.sum())
    value = fixed - entropy(r_star)
    return r_star, max(value, 0.0) if value > -1e-12 else value, trace


def synergy_lower_redundancy(
    marginals: PairwiseMarginals, r: float, config: SolverConfig | None = None, min_cmi: float | None = None
) -> float:
    """S_R = R - I(X1; X2) + min_r I_r(X1; X2 | Y). May be negative."""
    m12 = _require_m12(marginals)
    if min_cmi is None:
        min_cmi = min_conditional_mi(marginals, config)[1]
    i12 = entropy(m12.sum(1)) + entropy(m12.sum(0)) - entropy(m12)
    return r - i12 + min_cmi


# --------------------------------------------------------------------------
# lower bound via disagreement
# --------------------------------------------------------------------------


def bayes_classifier(m_iy, tie_break: str = "lowest_index") -> np.ndarray:
    """Label maximizing p(y | x_i) for every x_i, ties to the lowest label.

    Rows with p(x_i) = 0 map to label 0.
    """
    if tie_break != "lowest_index":
        raise ArgumentError(f"unsupported tie_break {tie_break!r}")
    m = np.asarray(m_iy, dtype=float)
    rowmax = m.max(axis=1, keepdims=True)
    # entries within rounding of the row maximum count as tied
    tied = m >= rowmax - 1e-12 * np.maximum(rowmax, 1e-300)
    return np.argmax(tied, axis=1)


def disagreement(m12, f1, f2, config: DisagreementConfig | None = None) -> float:
    """Expected zero-one distance between f1(x1) and f2(x2) under p(x1, x2)."""
    config = config or DisagreementConfig()
    m12 = np.asarray(m12, dtype=float)
    f1 = np.asarray(f1)
    f2 = np.asarray(f2)
    if f1.shape != (m12.shape[0],) or f2.shape != (m12.shape[1],):
        raise ArgumentError("classifier lengths must match the m12 supports")
    differ = f1[:, None] != f2[None, :]
    return float(min(max((m12 * differ).sum(), 0.0), 1.0))


def synergy_lower_uniqueness(alpha: float, u1: float, u2: float, config: DisagreementConfig | None = None) -> float:
    """S_U = alpha * c - max(U1, U2). May be negative."""
    config = config or DisagreementConfig()
    return alpha * config.c - max(u1, u2)


# --------------------------------------------------------------------------
# upper bound
# --------------------------------------------------------------------------


def synergy_upper(
    marginals: PairwiseMarginals, r: float, u1: float, u2: float, p_y=None
) -> tuple[float, Coupling]:
    """S_upper = H(X1,X2) + H(Y) - H(coupling) - R - U1 - U2.

    The coupling of p(x1, x2) (flattened) with p(y) is greedy, so its entropy
    can exceed the true minimum and the bound is approximate in that
    direction.
    """
    m12 = _require_m12(marginals)
    p_y = marginals.py if p_y is None else np.asarray(p_y, dtype=float)
    z = m12.ravel()
    coupling = greedy_coupling(z / z.sum(), p_y / p_y.sum())
    return entropy(z / z.sum()) + entropy(p_y / p_y.sum()) - coupling.entropy - r - u1 - u2, coupling


# --------------------------------------------------------------------------
# performance
# --------------------------------------------------------------------------


def performance_bounds(total_mi: float, h_y: float, ny: int) -> PerfBounds:
    """Accuracy bounds for the Bayes optimal classifier from total information.

    Lower: ``2**(I - H(Y))``. Upper: Fano,
    ``1 - (H(Y) - I - 1) / log2 ny``, which equals ``(I + 1) / log2 ny`` for a
    uniform label. Both are clamped to [0, 1].
    """
    if total_mi < -1e-9 or h_y < -1e-9:
        raise ArgumentError("total_mi and h_y must be non-negative")
    if ny < 1:
        raise ArgumentError("ny must be positive")
    if ny == 1:
        return PerfBounds(1.0, 1.0, 1.0)
    log_ny = np.log2(ny)
    lo = float(np.clip(2.0 ** (total_mi - h_y), 0.0, 1.0))
    hi = float(np.clip(1.0 - (h_y - total_mi - 1.0) / log_ny, 0.0, 1.0))
    return PerfBounds(lo, hi, 0.5 * (lo + hi))


def performance_range(r: float, u1: float, u2: float, s_lower: float, s_upper: float, h_y: float, ny: int) -> PerfBounds:
    """Plug the bracket on total information into :func:`performance_bounds`."""
    s_lower = max(s_lower, 0.0)
    lo = performance_bounds(max(r + u1 + u2 + s_lower, 0.0), h_y, ny).p_lower
    hi = performance_bounds(max(r + u1 + u2 + s_upper, 0.0), h_y, ny).p_upper
    lo = min(lo, hi)
    return PerfBounds(lo, hi, 0.5 * (lo + hi))


def cl_suboptimality_bound(co_info: float, h_y: float) -> float:
    """Bayes-error bound ``1 - 2**(I(X1;X2;Y) - H(Y))`` for shared-information representations."""
    if h_y < -1e-12:
        raise ArgumentError("h_y must be non-negative")
    return float(np.clip(1.0 - 2.0 ** (co_info - h_y), 0.0, 1.0))


# --------------------------------------------------------------------------
# everything at once
# --------------------------------------------------------------------------


def synergy_bounds(
    marginals: PairwiseMarginals,
    config: SolverConfig | None = None,
    dconfig: DisagreementConfig | None = None,
) -> SynergyBounds:
    """R, U1, U2 plus every synergy bound the available marginals allow."""
    config = config or SolverConfig()
    dconfig = dconfig or DisagreementConfig()
    q_star, trace = solve_q_star(marginals, config)
    part = compute_pid(marginals, q_star, config, trace)
    converged = part.converged
    if marginals.m12 is None:
        reason = "requires unlabeled multimodal data p(x1, x2)"
        return SynergyBounds(
            part.r, part.u1, part.u2, None, None, None, None, None, None, None,
            converged=converged, notes=(f"S_R, S_U, S_upper: {reason}",),
        )
    m12 = marginals.m12
    _, cmi, ctrace = min_conditional_mi(marginals, config)
    converged = converged and ctrace.converged
    i12 = entropy(m12.sum(1)) + entropy(m12.sum(0)) - entropy(m12)
    s_r = part.r - i12 + cmi
    f1 = bayes_classifier(marginals.m1y, dconfig.tie_break)
    f2 = bayes_classifier(marginals.m2y, dconfig.tie_break)
    alpha = disagreement(m12, f1, f2, dconfig)
    s_u = synergy_lower_uniqueness(alpha, part.u1, part.u2, dconfig)
    s_up, coupling = synergy_upper(marginals, part.r, part.u1, part.u2)
    slack = s_up < max(s_r, s_u) - 1e-6
    notes = ()
    if slack:
        notes = ("greedy coupling slack: upper bound fell below a lower bound",)
    return SynergyBounds(
        r=part.r,
        u1=part.u1,
        u2=part.u2,
        s_r_lower=s_r,
        s_u_lower=s_u,
        s_upper=s_up,
        min_cmi=cmi,
        i12=i12,
        alpha=alpha,
        coupling_entropy=coupling.entropy,
        approximation_slack=slack,
        converged=converged,
        notes=notes,
    )
