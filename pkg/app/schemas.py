import math
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, computed_field, field_validator, model_validator

from .core.config import settings


def _require_finite(value: float, name: str) -> float:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


# --- Evaluation accounting ---

class EvalCounter(BaseModel):
    """
    Number of calls made to each evaluator of a C2Function.
    """
    n_value: int = 0
    n_deriv1: int = 0
    n_deriv2: int = 0

    def snapshot(self) -> "EvalCounter":
        return self.model_copy()

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_value, self.n_deriv1, self.n_deriv2)

    def __sub__(self, other: "EvalCounter") -> "EvalCounter":
        return EvalCounter(
            n_value=self.n_value - other.n_value,
            n_deriv1=self.n_deriv1 - other.n_deriv1,
            n_deriv2=self.n_deriv2 - other.n_deriv2,
        )


# --- AR2 configuration and traces ---

class AR2Config(BaseModel):
    """
    Step 0 constants of the AR2 algorithm. Defaults come from `settings`.
    """
    q: Literal[1, 2] = 1
    eps1: float = Field(..., description="First-order accuracy, in (0, 1].")
    eps2: float = Field(..., description="Second-order accuracy, in (0, 1].")
    sigma0: float = Field(default_factory=lambda: settings.SIGMA0)
    # Accepted for completeness; the subproblem is solved exactly.
    theta: float = Field(default_factory=lambda: settings.THETA)
    eta1: float = Field(default_factory=lambda: settings.ETA1)
    eta2: float = Field(default_factory=lambda: settings.ETA2)
    gamma1: float = Field(default_factory=lambda: settings.GAMMA1)
    gamma2: float = Field(default_factory=lambda: settings.GAMMA2)
    gamma3: float = Field(default_factory=lambda: settings.GAMMA3)
    sigma_min: float = Field(default_factory=lambda: settings.SIGMA_MIN)
    sigma_policy: Literal["keep", "shrink"] = "keep"
    step_domain: Literal["full_line", "nonnegative"] = "full_line"
    max_iters: Optional[int] = Field(None, ge=0, description="Defaults to settings.MAX_ITERS_FALLBACK.")
    record_phi2: bool = Field(False, description="Record phi2 in the trace even when q = 1.")

    @model_validator(mode="after")
    def _check_ranges(self) -> "AR2Config":
        for name in ("eps1", "eps2"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")
        if not self.sigma0 > 0.0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not 0.0 < self.eta1 <= self.eta2 < 1.0:
            raise ValueError(f"need 0 < eta1 <= eta2 < 1, got eta1={self.eta1}, eta2={self.eta2}")
        if not 0.0 < self.gamma1 < 1.0 < self.gamma2 < self.gamma3:
            raise ValueError(
                f"need 0 < gamma1 < 1 < gamma2 < gamma3, got "
                f"({self.gamma1}, {self.gamma2}, {self.gamma3})"
            )
        if not 0.0 < self.sigma_min <= self.sigma0:
            raise ValueError(f"sigma_min must lie in (0, sigma0], got {self.sigma_min}")
        return self

    @property
    def resolved_max_iters(self) -> int:
        return self.max_iters if self.max_iters is not None else settings.MAX_ITERS_FALLBACK


class IterRecord(BaseModel):
    """
    One AR2 iteration: the point, its Taylor data, the step and the ratio test.
    """
    k: int
    x: float
    f: float
    g: float
    h: float
    sigma: float
    step: float
    rho: float
    phi1: float
    phi2: Optional[float] = None
    accepted: bool


class RunTrace(BaseModel):
    records: List[IterRecord] = Field(default_factory=list)
    termination_index: int
    terminated_by: Literal["criticality", "max_iters", "aborted"]
    counters: EvalCounter
    final_x: float
    final_f: float
    final_phi1: float
    final_phi2: Optional[float] = None

    @model_validator(mode="after")
    def _check_termination(self) -> "RunTrace":
        if self.terminated_by == "criticality" and self.termination_index != len(self.records):
            raise ValueError("termination_index must equal the number of records on criticality termination")
        return self


# --- Criticality and subproblem ---

class TaylorData(BaseModel):
    """
    Value and derivatives at the expansion point x.
    """
    f0: float = 0.0
    g: float
    h: float = 0.0
    x: float = 0.0

    @field_validator("f0", "g", "h", "x")
    @classmethod
    def _finite(cls, value: float, info) -> float:
        return _require_finite(value, info.field_name)


class ModelData(BaseModel):
    """
    Cubic-regularized quadratic model m(s) = f0 + g s + h s^2 / 2 + sigma |s|^3 / 6.
    """
    f0: float
    g: float
    h: float
    sigma: float

    @field_validator("f0", "g", "h", "sigma")
    @classmethod
    def _finite(cls, value: float, info) -> float:
        return _require_finite(value, info.field_name)

    @field_validator("sigma")
    @classmethod
    def _positive_sigma(cls, value: float) -> float:
        if value <= 0.0:
            raise ValueError(f"sigma must be positive, got {value}")
        return value

    def decrease_at(self, s: float) -> float:
        """m(s) - f0, computed without forming f0 + ... to keep small values exact."""
        return self.g * s + 0.5 * self.h * s * s + self.sigma / 6.0 * abs(s) ** 3

    def value_at(self, s: float) -> float:
        return self.f0 + self.decrease_at(s)


class SubproblemSolution(BaseModel):
    step: float
    model_value: float
    model_decrease: float
    stationary_points: List[float] = Field(default_factory=list)


# --- Perturbation schedules and example sequences ---

class PerturbationSchedule(BaseModel):
    """
    Free parameters of the slow example: alpha_k, beta_{q,k} and beta_{0,k}.

    beta_{p,k} is never stored; it is always -beta_{q,k}. A truncated
    schedule holds only a prefix of the knots and skips the terminal
    conditions at k_eps.
    """
    q: Literal[1, 2]
    eps: float
    k_eps: int
    alpha: List[float]
    beta_q: List[float]
    beta0: List[float]
    eta1: float = Field(default_factory=lambda: settings.ETA1)
    kind: str = "custom"
    seed: Optional[int] = None
    truncated: bool = False

    @model_validator(mode="after")
    def _check_admissible(self) -> "PerturbationSchedule":
        from .construction.slow_example import k_epsilon

        if not 0.0 < self.eta1 < 1.0:
            raise ValueError(f"eta1 must lie in (0, 1), got {self.eta1}")
        expected = k_epsilon(self.q, self.eps)
        if self.k_eps != expected:
            raise ValueError(f"k_eps={self.k_eps} does not match ceil(eps^(-3/(3-q)))={expected}")

        n = len(self.alpha)
        if len(self.beta_q) != n or len(self.beta0) != n:
            raise ValueError("alpha, beta_q and beta0 must have the same length")
        if self.truncated:
            if not 2 <= n <= self.k_eps:
                raise ValueError(f"a truncated schedule needs 2 <= length <= k_eps, got {n}")
            last = n
        else:
            if n != self.k_eps + 1:
                raise ValueError(f"schedule length must be k_eps + 1 = {self.k_eps + 1}, got {n}")
            last = n - 1
            if self.alpha[-1] != 0.0:
                raise ValueError("alpha at k_eps must be 0")
            if self.beta_q[-1] != 0.0:
                raise ValueError("beta_q at k_eps must be 0")

        for k in range(last):
            if not 1.0 <= self.alpha[k] <= 2.0:
                raise ValueError(f"alpha[{k}]={self.alpha[k]} outside [1, 2]")
            if not 0.0 <= self.beta_q[k] <= 0.5:
                raise ValueError(f"beta_q[{k}]={self.beta_q[k]} outside [0, 1/2]")

        if self.beta0[0] != 0.0:
            raise ValueError("beta0 at k = 0 must be 0")
        radius = (1.0 - self.eta1) / 4.0
        for k, value in enumerate(self.beta0):
            if abs(value) > radius:
                raise ValueError(f"|beta0[{k}]|={abs(value)} exceeds (1 - eta1)/4 = {radius}")
        return self

    @property
    def p(self) -> int:
        return 3 - self.q

    @property
    def beta_p(self) -> List[float]:
        return [-b for b in self.beta_q]


class ExampleSequences(BaseModel):
    """
    Knots, steps, prescribed values/derivatives and the Taylor predictions at each step.

    T_k, T1_k, T2_k are T_{f,2}(x_k, s_k) and its first two derivatives in s.
    """
    q: Literal[1, 2]
    eps: float
    k_eps: int
    eta1: float
    truncated: bool = False
    x: List[float]
    s: List[float]
    f0: List[float]
    f1: List[float]
    f2: List[float]
    taylor: List[float]
    taylor_d1: List[float]
    taylor_d2: List[float]
    sigma: float = 2.0
    kappa_f: float
    kappa_f_closed_form: float

    @model_validator(mode="after")
    def _check_lengths(self) -> "ExampleSequences":
        n_knots = len(self.x)
        if n_knots < 2:
            raise ValueError("at least two knots are required")
        for name in ("f0", "f1", "f2"):
            if len(getattr(self, name)) != n_knots:
                raise ValueError(f"{name} must have one entry per knot")
        for name in ("s", "taylor", "taylor_d1", "taylor_d2"):
            if len(getattr(self, name)) != n_knots - 1:
                raise ValueError(f"{name} must have one entry per step")
        return self

    @property
    def p(self) -> int:
        return 3 - self.q

    @property
    def n_steps(self) -> int:
        return len(self.s)


# --- Piecewise quintic interpolant ---

class QuinticSegment(BaseModel):
    """
    Degree-5 polynomial in t = (x - x_lo) / (x_hi - x_lo), coefficients in increasing degree.
    """
    x_lo: float
    x_hi: float
    coeffs: List[float]

    @model_validator(mode="after")
    def _check_segment(self) -> "QuinticSegment":
        if not self.x_hi > self.x_lo:
            raise ValueError(f"zero-length or reversed interval [{self.x_lo}, {self.x_hi}]")
        if len(self.coeffs) != 6:
            raise ValueError(f"a quintic needs 6 coefficients, got {len(self.coeffs)}")
        return self

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo


class ExtensionSpec(BaseModel):
    """
    How the interpolant continues outside the knot range.

    constant:  f = value beyond the anchor (derivatives must vanish there).
    plateau:   auxiliary quintic `segment` up to the anchor, then constant `value`.
    quadratic: second-order Taylor continuation from the anchor.
    """
    kind: Literal["constant", "plateau", "quadratic"]
    anchor: float
    value: float
    deriv1: float = 0.0
    deriv2: float = 0.0
    segment: Optional[QuinticSegment] = None

    @model_validator(mode="after")
    def _check_extension(self) -> "ExtensionSpec":
        if self.kind == "plateau" and self.segment is None:
            raise ValueError("a plateau extension needs its auxiliary segment")
        return self


class InterpolantModel(BaseModel):
    knots: List[float]
    values: List[float]
    deriv1: List[float]
    deriv2: List[float]
    segments: List[QuinticSegment]
    left_ext: ExtensionSpec
    right_ext: ExtensionSpec


# --- Verification ---

class CheckResult(BaseModel):
    """
    One named condition: the worst measured quantity against its bound.
    """
    name: str
    passed: bool
    measured: Optional[float] = None
    bound: Optional[float] = None
    tolerance: float = 0.0
    index: Optional[int] = Field(None, description="Iteration where the worst case occurs.")
    enforced: bool = True
    detail: Optional[str] = None


class Discrepancy(BaseModel):
    kind: Literal["paper_discrepancy"] = "paper_discrepancy"
    check: str
    iteration: Optional[int] = None
    message: str
    values: Dict[str, float] = Field(default_factory=dict)


class VerificationReport(BaseModel):
    checks: List[CheckResult] = Field(default_factory=list)
    discrepancies: List[Discrepancy] = Field(default_factory=list)
    k_eps_expected: int
    k_eps_observed: Optional[int] = None
    mode: Literal["paper", "strict"] = "paper"
    trajectory_max_deviation: Optional[float] = None
    counters: Optional[EvalCounter] = None

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.enforced)

    @property
    def failed_checks(self) -> List[str]:
        return [c.name for c in self.checks if c.enforced and not c.passed]

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def merged_with(self, other: "VerificationReport") -> "VerificationReport":
        return self.model_copy(update={
            "checks": self.checks + other.checks,
            "discrepancies": self.discrepancies + other.discrepancies,
            "k_eps_observed": other.k_eps_observed if other.k_eps_observed is not None else self.k_eps_observed,
            "mode": other.mode,
            "trajectory_max_deviation": other.trajectory_max_deviation,
            "counters": other.counters,
        })


# --- Sampling experiment ---

class SampleConstraints(BaseModel):
    beta_q_max: Optional[float] = Field(None, description="Defaults to 1/2 when q = 1 and 0 when q = 2.")
    beta0_enabled: bool = False
    eta1: float = Field(default_factory=lambda: settings.ETA1)
    mode: Literal["paper", "strict"] = "paper"

    @field_validator("beta_q_max")
    @classmethod
    def _beta_range(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0.0 <= value <= 0.5:
            raise ValueError(f"beta_q_max must lie in [0, 1/2], got {value}")
        return value

    def resolved_beta_q_max(self, q: int) -> float:
        if self.beta_q_max is not None:
            return self.beta_q_max
        return 0.5 if q == 1 else 0.0


class SampleResult(BaseModel):
    index: int
    seed: int
    passed: bool
    k_obs: Optional[int] = None
    max_dev: Optional[float] = None
    failed_checks: List[str] = Field(default_factory=list)
    error: Optional[str] = None


class SampleSummary(BaseModel):
    q: int
    eps: float
    seed: int
    n_samples: int
    n_passed: int
    failure_histogram: Dict[str, int] = Field(default_factory=dict)
    deviation_stats: Dict[str, float] = Field(default_factory=dict)
    samples: List[SampleResult] = Field(default_factory=list)


# --- Example documents (generate / run / verify) ---

class ExampleMetadata(BaseModel):
    q: Literal[1, 2]
    eps: float
    k_eps: int
    kind: str
    seed: Optional[int] = None


class ExampleDocument(BaseModel):
    metadata: ExampleMetadata
    schedule: PerturbationSchedule
    sequences: ExampleSequences
    interpolant: InterpolantModel
