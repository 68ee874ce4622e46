"""This module provides entity classes to represent verdicts of checks."""
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple


@dataclass
class Check:
    """Check class represents one named pass/fail verdict.

    Args:
        name: Name of the check.
        passed: True if the check passed.
        value: Numeric value the verdict was derived from, if any.
        description: Human readable detail.

    Examples:
        >>> check = Check('rank E_f', True, 1.0, 'full column rank')
        >>> check
        Check('rank E_f', passed=True)
        >>> bool(check)
        True
        >>> check.to_tuple()
        ('rank E_f', True, 1.0, 'full column rank')
        >>> Check('detectability', False)
        Check('detectability', passed=False)
    """

    name: str = ""
    passed: bool = True
    value: float = math.nan
    description: str = ""

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.name!r}, passed={self.passed})"

    def __bool__(self) -> bool:
        return bool(self.passed)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "FAIL"

    def to_tuple(self) -> Tuple[str, bool, float, str]:
        return self.name, self.passed, self.value, self.description

    def copy(self) -> "Check":
        return Check(*self.to_tuple())


@dataclass
class ConditionReport:
    """ConditionReport class is an ordered collection of Check instances.

    Args:
        name: Name of the report.
        checks: List of Check instances.

    Examples:
        >>> report = ConditionReport('assumptions')
        >>> report.add('A1', True, description='detectable')
        Check('A1', passed=True)
        >>> report.add('A2', False)
        Check('A2', passed=False)
        >>> report
        ConditionReport('assumptions', num_checks=2)
        >>> bool(report)
        False
        >>> report.failures
        ['A2']
        >>> report['A1'].description
        'detectable'
        >>> 'A3' in report
        False
        >>> [check.name for check in report]
        ['A1', 'A2']
    """

    name: str = ""
    checks: List[Check] = field(default_factory=list)

    def __repr__(self):
        class_name = self.__class__.__name__
        return f"{class_name}({self.name!r}, num_checks={len(self.checks)})"

    def __bool__(self) -> bool:
        """Returns True if all checks passed."""
        return all(self.checks)

    def __len__(self) -> int:
        return len(self.checks)

    def __iter__(self) -> Iterator[Check]:
        yield from self.checks

    def __contains__(self, name) -> bool:
        return any(check.name == name for check in self.checks)

    def __getitem__(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(f"No check named '{name}'")

    def add(
        self,
        name: str,
        passed: bool,
        value: float = math.nan,
        description: str = "",
    ) -> Check:
        """Appends a new check and returns it."""
        check = Check(name, bool(passed), float(value), description)
        self.set_check(check)
        return check

    def set_check(self, check: Check, force: bool = False):
        """Sets a check.

        Args:
            check: Check instance.
            force: If True, an existing check with the same name is overwritten.
                Otherwise, a duplicated name raises ValueError.
        """
        for k, current in enumerate(self.checks):
            if current.name == check.name:
                if not force:
                    raise ValueError(f"Duplicated check: '{check.name}'")
                self.checks[k] = check
                return
        self.checks.append(check)

    def merge(self, other: "ConditionReport", prefix: str = "") -> "ConditionReport":
        """Returns a new report holding checks of self followed by other's.

        Args:
            other: Report to merge.
            prefix: Prepended to names of other's checks.

        Examples:
            >>> a = ConditionReport('a', [Check('x')])
            >>> b = ConditionReport('b', [Check('x', False)])
            >>> c = a.merge(b, prefix='b.')
            >>> [check.name for check in c]
            ['x', 'b.x']
            >>> bool(c)
            False
        """
        report = ConditionReport(self.name, [check.copy() for check in self.checks])
        for check in other.checks:
            check = check.copy()
            check.name = prefix + check.name
            report.set_check(check)
        return report

    @property
    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def get(self, name: str) -> Optional[Check]:
        for check in self.checks:
            if check.name == name:
                return check
        return None

    def to_dict(self) -> dict:
        checks = []
        for check in self.checks:
            value = float(check.value)
            value = None if math.isnan(value) else value
            checks.append(
                {
                    "name": check.name,
                    "passed": bool(check.passed),
                    "value": value,
                    "description": check.description,
                }
            )
        return {"name": self.name, "passed": bool(self), "checks": checks}

    @classmethod
    def from_dict(cls, data: dict) -> "ConditionReport":
        report = cls(data.get("name", ""))
        for item in data.get("checks", []):
            value = item.get("value")
            value = math.nan if value is None else value
            report.add(item["name"], item["passed"], value, item.get("description", ""))
        return report
