"""
Check reports emitted by the verification harness.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Tuple

SEVERITIES = ('error', 'info')


@dataclass
class CheckReport:
    """
    Outcome of one verification check.

    passed is always worst_case <= tolerance. Reports with severity 'info'
    document known discrepancies and never fail a suite.
    """

    check_name: str
    passed: bool
    worst_case: float
    tolerance: float
    witness: Tuple = ()
    samples_used: int = 0
    wall_time: float = 0.0
    severity: str = 'error'
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.severity not in SEVERITIES:
            raise ValueError(f"severity must be one of {SEVERITIES}")
        self.passed = bool(self.worst_case <= self.tolerance)

    @classmethod
    def build(cls, check_name: str, worst_case: float, tolerance: float, witness=(), samples_used: int = 0,
              started: float = None, severity: str = 'error', details: Dict[str, Any] = None) -> 'CheckReport':
        """Create a report; started is a time.perf_counter() stamp taken when the check began."""
        elapsed = time.perf_counter() - started if started is not None else 0.0
        return cls(
            check_name=check_name,
            passed=False,
            worst_case=float(worst_case),
            tolerance=float(tolerance),
            witness=tuple(_plain(w) for w in witness),
            samples_used=int(samples_used),
            wall_time=float(elapsed),
            severity=severity,
            details=details or {}
        )

    @property
    def blocking(self) -> bool:
        """True when this report makes a suite fail."""
        return self.severity == 'error' and not self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            'check_name': self.check_name,
            'passed': self.passed,
            'worst_case': self.worst_case,
            'tolerance': self.tolerance,
            'witness': list(self.witness),
            'samples_used': self.samples_used,
            'wall_time': self.wall_time,
            'severity': self.severity,
            'details': {key: _plain(value) for key, value in self.details.items()}
        }


def _plain(value):
    """numpy scalars and tuples to JSON-friendly values."""
    if hasattr(value, 'item') and getattr(value, 'ndim', 1) == 0:
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, 'tolist'):
        return value.tolist()
    return value


def suite_passed(reports: Iterable[CheckReport]) -> bool:
    return not any(report.blocking for report in reports)


def summary_table(reports: List[CheckReport]) -> str:
    """Human-readable table of report outcomes."""
    name_width = max([len('check')] + [len(r.check_name) for r in reports])
    header = f"{'check':<{name_width}}  {'status':<6}  {'worst_case':>12}  {'tolerance':>10}  {'samples':>8}  {'seconds':>8}"
    lines = [header, '-' * len(header)]
    for report in reports:
        status = 'PASS' if report.passed else ('INFO' if report.severity == 'info' else 'FAIL')
        lines.append(
            f"{report.check_name:<{name_width}}  {status:<6}  {report.worst_case:>12.4g}  "
            f"{report.tolerance:>10.3g}  {report.samples_used:>8d}  {report.wall_time:>8.2f}"
        )
    failed = sum(1 for r in reports if r.blocking)
    lines.append('-' * len(header))
    lines.append(f"{len(reports)} checks, {failed} failed")
    return '\n'.join(lines)
