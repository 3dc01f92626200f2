"""
Worst-case sequences for AR2: knots, steps and prescribed function and
derivative values on which AR2 needs exactly k_eps iterations.
"""
import logging
import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from ..core.config import settings
from ..schemas import ExampleSequences, PerturbationSchedule

logger = logging.getLogger(__name__)

ScheduleKind = Literal["book", "unperturbed"]

# Regularization weight that makes s_k a stationary point of the model
EXAMPLE_SIGMA = 2.0


def _check_order_and_eps(q: int, eps: float) -> None:
    if q not in (1, 2):
        raise ValueError(f"criticality order q must be 1 or 2, got {q}")
    if not (math.isfinite(eps) and 0.0 < eps <= 0.25):
        raise ValueError(f"eps must lie in (0, 1/4], got {eps}")


def k_epsilon(q: int, eps: float) -> int:
    """
    ceil(eps^(-3/(3-q))), shrunk by a relative guard first so exact powers
    such as 0.25^(-3/2) = 8 do not round up to the next integer.
    """
    _check_order_and_eps(q, eps)
    raw = eps ** (-3.0 / (3 - q))
    return int(math.ceil(raw * (1.0 - settings.KEPS_GUARD)))


def _schedule_from_alpha(q, eps, eta1, alpha, beta_q, beta0, kind, seed=None, truncated=False):
    return PerturbationSchedule(
        q=q, eps=eps, k_eps=k_epsilon(q, eps),
        alpha=list(alpha), beta_q=list(beta_q), beta0=list(beta0),
        eta1=eta1, kind=kind, seed=seed, truncated=truncated,
    )


def default_schedule(q: int, eps: float, eta1: float = settings.ETA1, kind: ScheduleKind = "unperturbed") -> PerturbationSchedule:
    """
    unperturbed: alpha_k = 1 and no perturbation.
    book:        alpha_k = 1 + (k_eps - k) / k_eps and no perturbation.
    """
    k_eps = k_epsilon(q, eps)
    if kind == "unperturbed":
        alpha = [1.0] * k_eps
    elif kind == "book":
        alpha = [1.0 + (k_eps - k) / k_eps for k in range(k_eps)]
    else:
        raise ValueError(f"unknown schedule kind {kind!r}")
    zeros = [0.0] * (k_eps + 1)
    return _schedule_from_alpha(q, eps, eta1, alpha + [0.0], zeros, zeros, kind)


def random_schedule(
    q: int,
    eps: float,
    eta1: float = settings.ETA1,
    seed: int = 0,
    beta_q_max: float = 0.5,
    beta0_enabled: bool = False,
) -> PerturbationSchedule:
    """
    Draws alpha_k in [1, 2], beta_{q,k} in [0, beta_q_max] and, when
    enabled, beta_{0,k} in [-(1 - eta1)/4, (1 - eta1)/4], uniformly and
    independently. Terminal entries are zeroed.
    """
    if not 0.0 <= beta_q_max <= 0.5:
        raise ValueError(f"beta_q_max must lie in [0, 1/2], got {beta_q_max}")
    k_eps = k_epsilon(q, eps)
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(1.0, 2.0, size=k_eps)
    beta_q = rng.uniform(0.0, beta_q_max, size=k_eps)
    radius = (1.0 - eta1) / 4.0
    beta0 = rng.uniform(-radius, radius, size=k_eps + 1) if beta0_enabled else np.zeros(k_eps + 1)
    beta0[0] = 0.0
    return _schedule_from_alpha(
        q, eps, eta1,
        alpha=[*alpha.tolist(), 0.0],
        beta_q=[*beta_q.tolist(), 0.0],
        beta0=beta0.tolist(),
        kind="random", seed=seed,
    )


def prefix_schedule(
    q: int,
    eps: float,
    n_steps: int,
    alpha: float = 1.0,
    beta_q: float = 0.0,
    eta1: float = settings.ETA1,
) -> PerturbationSchedule:
    """
    The first n_steps + 1 knots of a constant schedule, without the
    terminal conditions. For plotting when k_eps is too large to build.
    """
    k_eps = k_epsilon(q, eps)
    if not 1 <= n_steps < k_eps:
        raise ValueError(f"n_steps must lie in [1, k_eps) = [1, {k_eps}), got {n_steps}")
    n = n_steps + 1
    return _schedule_from_alpha(
        q, eps, eta1, [alpha] * n, [beta_q] * n, [0.0] * n,
        kind=f"prefix(alpha={alpha:g}, beta_q={beta_q:g})", truncated=True,
    )


def kappa_f(q: int) -> Tuple[float, float]:
    """
    The bound constant as the max-expression and as the closed form 9 * 2^(3/p - 1).
    The two differ; both are reported.
    """
    p = 3 - q
    return max(4.5, 2.5, 3.0 * 2.0 ** (3.0 / p), 1.0), 9.0 * 2.0 ** (3.0 / p - 1.0)


def relation_beta(q: int, beta_q: float) -> float:
    """1/q + beta_q/q + beta_p/p with beta_p = -beta_q."""
    p = 3 - q
    return 1.0 / q + beta_q / q - beta_q / p


def derivative_data(q: int, eps: float, alpha_k: float, beta_qk: float) -> Tuple[float, float]:
    """
    (f^{(1)}, f^{(2)}) at a knot: the q-th derivative is -(1 + beta_q) alpha eps,
    the p-th is beta_q (alpha eps)^(q/p).
    """
    p = 3 - q
    a = alpha_k * eps
    order_q = -(1.0 + beta_qk) * a
    order_p = beta_qk * a ** (q / p)
    return (order_q, order_p) if q == 1 else (order_p, order_q)


def build_sequences(schedule: PerturbationSchedule) -> ExampleSequences:
    q, eps = schedule.q, schedule.eps
    p = schedule.p
    n_knots = len(schedule.alpha)

    f1: List[float] = []
    f2: List[float] = []
    for alpha_k, beta_k in zip(schedule.alpha, schedule.beta_q):
        d1, d2 = derivative_data(q, eps, alpha_k, beta_k)
        f1.append(d1)
        f2.append(d2)

    x = [0.0]
    s: List[float] = []
    f0 = [3.0 * 2.0 ** (3.0 / p)]
    taylor: List[float] = []
    taylor_d1: List[float] = []
    taylor_d2: List[float] = []
    for k in range(n_knots - 1):
        a = schedule.alpha[k] * eps
        s_k = a ** (1.0 / p)
        t_k = f0[k] - a ** (3.0 / p) * relation_beta(q, schedule.beta_q[k])
        s.append(s_k)
        taylor.append(t_k)
        taylor_d1.append(f1[k] + f2[k] * s_k)
        taylor_d2.append(f2[k])
        x.append(x[k] + s_k)
        f0.append(t_k + schedule.beta0[k + 1] * s_k ** 3)

    kappa, kappa_closed_form = kappa_f(q)
    seq = ExampleSequences(
        q=q, eps=eps, k_eps=schedule.k_eps, eta1=schedule.eta1, truncated=schedule.truncated,
        x=x, s=s, f0=f0, f1=f1, f2=f2,
        taylor=taylor, taylor_d1=taylor_d1, taylor_d2=taylor_d2,
        sigma=EXAMPLE_SIGMA, kappa_f=kappa, kappa_f_closed_form=kappa_closed_form,
    )

    # Unreachable for admissible schedules
    f0_max = 3.0 * 2.0 ** (3.0 / p)
    if any(b >= a for a, b in zip(f0, f0[1:])):
        raise RuntimeError("constructed function values are not strictly decreasing")
    if min(f0) < 0.0 or max(f0) > f0_max:
        raise RuntimeError(f"constructed function values leave [0, {f0_max}]")
    if any(abs(step) > 1.0 for step in s):
        raise RuntimeError("constructed step longer than 1")

    logger.debug(f"Built {n_knots} knots for q={q}, eps={eps} (k_eps={schedule.k_eps}, truncated={schedule.truncated})")
    return seq


def model_stationarity_check(seq: ExampleSequences, k: int) -> float:
    """
    Residual g + h s_k + (sigma/2) s_k^2 of the model derivative at s_k; zero by construction.
    """
    if not 0 <= k < seq.n_steps:
        raise ValueError(f"k must lie in [0, {seq.n_steps}), got {k}")
    s_k = seq.s[k]
    return seq.f1[k] + seq.f2[k] * s_k + 0.5 * seq.sigma * s_k * s_k


def taylor_at_step(seq: ExampleSequences, k: int) -> Tuple[float, float, float]:
    """(T_{f,2}(x_k, s_k), its first and second derivative in s)."""
    return seq.taylor[k], seq.taylor_d1[k], seq.taylor_d2[k]


# --- Theta map: perturbation parameters -> interpolation data ---

class ThetaContext(BaseModel):
    """
    Previous-step data the map needs: T_{f,2}(x_{k-1}, s_{k-1}) and alpha_{k-1}.
    Leave both unset for k = 0, where the value is the fixed starting value.
    """
    q: Literal[1, 2]
    eps: float
    taylor_prev: Optional[float] = None
    alpha_prev: Optional[float] = None

    @classmethod
    def from_sequences(cls, seq: ExampleSequences, schedule: PerturbationSchedule, k: int) -> "ThetaContext":
        if k == 0:
            return cls(q=seq.q, eps=seq.eps)
        return cls(q=seq.q, eps=seq.eps, taylor_prev=seq.taylor[k - 1], alpha_prev=schedule.alpha[k - 1])


def theta_map(k: int, beta0_k: float, alpha_k: float, beta_qk: float, context: ThetaContext) -> Tuple[float, float, float]:
    """
    (f_k^{(0)}, f_k^{(q)}, f_k^{(p)}) as functions of (beta_{0,k}, alpha_k, beta_{q,k}).
    """
    q, eps = context.q, context.eps
    p = 3 - q
    if k == 0 or context.taylor_prev is None:
        value = 3.0 * 2.0 ** (3.0 / p)
    else:
        value = context.taylor_prev + beta0_k * (context.alpha_prev * eps) ** (3.0 / p)
    a = alpha_k * eps
    return value, -a * (1.0 + beta_qk), a ** (q / p) * beta_qk


def theta_jacobian_det(k: int, alpha_prev: float, alpha_k: float, beta_qk: float, q: int, eps: float) -> float:
    """
    Determinant of the Jacobian of the theta map with respect to
    (beta_{0,k}, alpha_k, beta_{q,k}), for k >= 1.
    """
    if k < 1:
        raise ValueError("the Jacobian is defined for k >= 1 (f_0 does not depend on beta_0)")
    p = 3 - q
    return (
        -((alpha_prev * eps) ** (3.0 / p))
        * eps ** (3.0 / p)
        * alpha_k ** (q / p)
        * (1.0 + (1.0 - q / p) * beta_qk)
    )
