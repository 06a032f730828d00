from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from app.exactalg import Indeterminate, to_rational


class OutputFormat(str, Enum):
    """Report rendering on stdout"""

    JSON = "json"
    TABLE = "table"


class SeriesKind(str, Enum):
    """Exponential or ordinary generating function"""

    EGF = "egf"
    OGF = "ogf"


class RunConfig(BaseModel):
    """Validated parameters of one CLI run"""

    order: int = Field(8, ge=1)
    trials: int = Field(20, ge=1)
    seed: int = Field(42, ge=0, lt=2**64)
    coeff_substitutions: Dict[str, str] = Field(default_factory=dict)
    output: OutputFormat = OutputFormat.TABLE
    suites: List[str] = Field(default_factory=lambda: ["all"])

    @field_validator("coeff_substitutions", mode="before")
    @classmethod
    def validate_substitutions(cls, v):
        """Only alphabet names, only rational values"""
        if not isinstance(v, dict):
            raise ValueError("coeff_substitutions must be an object")
        checked = {}
        for name, value in v.items():
            Indeterminate.parse(name)
            checked[name] = str(to_rational(str(value)))
        return checked


class CheckResult(BaseModel):
    """One identity instance checked symbolically"""

    identity: str
    params: Dict[str, Any] = Field(default_factory=dict)
    passed: bool
    lhs: Optional[str] = None
    rhs: Optional[str] = None
    detail: Optional[str] = None


class Report(BaseModel):
    """Pass/fail report of a verification suite"""

    suite: str
    passed: bool
    parameters: Dict[str, Any] = Field(default_factory=dict)
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def render(self) -> str:
        """Deterministic table rendering"""
        lines = [f"# suite {self.suite} {_format_params(self.parameters)}".rstrip()]
        for check in self.checks:
            status = "PASS" if check.passed else "FAIL"
            lines.append(f"{status} {check.identity} {_format_params(check.params)}".rstrip())
            if not check.passed:
                lines.append(f"  lhs: {check.lhs}")
                lines.append(f"  rhs: {check.rhs}")
                if check.detail:
                    lines.append(f"  detail: {check.detail}")
        total = len(self.checks)
        failed = len(self.failures)
        lines.append(
            f"# {self.suite}: {total - failed}/{total} passed, "
            f"{'OK' if self.passed else 'FAILED'}"
        )
        return "\n".join(lines)


def _format_params(params: Dict[str, Any]) -> str:
    return " ".join(f"{k}={params[k]}" for k in params)


def build_report(suite: str, checks: List[CheckResult], **parameters: Any) -> Report:
    return Report(
        suite=suite,
        passed=all(c.passed for c in checks),
        parameters=parameters,
        checks=checks,
    )


class BnResult(BaseModel):
    """Value of b_n by one route"""

    n: int
    method: str
    poly: str
    trials: Optional[int] = None
    point_independent: Optional[bool] = None


class SeriesCoefficient(BaseModel):
    n: int = Field(..., ge=0)
    poly: str


class SeriesDocument(BaseModel):
    """JSON series format"""

    kind: SeriesKind
    variable: str = "t"
    truncation: int = Field(..., ge=0)
    coefficients: List[SeriesCoefficient]

    @field_validator("variable")
    @classmethod
    def validate_variable(cls, v):
        if v != "t":
            raise ValueError("Only the formal variable 't' is supported")
        return v


class BellResult(BaseModel):
    n: int
    k: int
    poly: str


class LegendreResult(BaseModel):
    """Tree-series coefficients L_n together with the b-relation report"""

    order: int
    transform: SeriesDocument
    tree_series: SeriesDocument
    report: Report


class SmatrixEntry(BaseModel):
    s: int
    n: int
    poly: str


class SmatrixResult(BaseModel):
    order: int
    entries: List[SmatrixEntry]
    report: Report


class ErrorResponse(BaseModel):
    """Structured error response"""

    error: str
    message: str
    details: Optional[Dict[str, Any]] = None
    run_id: Optional[str] = None


class HealthResponse(BaseModel):
    """Health check response"""

    status: str
    timestamp: str
    uptime_seconds: float
    version: str
    suites: List[str]
    memory_rss_mb: float
    worker_threads: int


class VerificationRun(BaseModel):
    """Reports of one verify invocation"""

    passed: bool
    parameters: Dict[str, Any] = Field(default_factory=dict)
    reports: List[Report]

    def render(self) -> str:
        blocks = [report.render() for report in self.reports]
        blocks.append(f"# overall: {'OK' if self.passed else 'FAILED'}")
        return "\n\n".join(blocks)
