"""
This module provides Renderer class that renders reports and tables
to Markdown.
"""
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from jinja2 import Environment, FileSystemLoader, Template

import fauio
from fauio.core.base import ConditionReport


def format_value(value: Any, digits: int = 4) -> str:
    """Returns a compact text of a table value.

    Examples:
        >>> format_value(0.000253991)
        '0.000254'
        >>> format_value(float('inf'))
        'not settled'
        >>> format_value(None)
        '-'
    """
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if math.isnan(value):
            return "-"
        if math.isinf(value):
            return "not settled"
        return f"{value:.{digits}g}" if value else "0"
    return str(value)


@dataclass
class Renderer:
    """Renderer instance renders report pieces to Markdown.

    Attributes:
        templates: Jinja template dictionary.
    """

    templates: Dict[str, Template] = field(default_factory=dict, init=False)

    def __post_init__(self):
        path = os.path.join(os.path.dirname(fauio.__file__), "templates")
        loader = FileSystemLoader(path)
        env = Environment(loader=loader, autoescape=False, keep_trailing_newline=True)
        env.filters["value"] = format_value
        for name in sorted(os.listdir(path)):
            template = env.get_template(name)
            name = os.path.splitext(name)[0]
            self.templates[name] = template

    def render_checks(self, report: ConditionReport, level: int = 3) -> str:
        """Returns a Markdown table of the checks of a report.

        Args:
            report: Report to render.
            level: Heading level of the report name.
        """
        template = self.templates["checks"]
        return template.render(report=report, heading="#" * level)

    def render_synthesis(
        self, summary: Dict[str, Any], certificate: Optional[ConditionReport] = None
    ) -> str:
        """Returns the synthesis section.

        Args:
            summary: Status, scalars, sqrt(mu) and gain shapes.
            certificate: Certificate of the solution.
        """
        checks = self.render_checks(certificate) if certificate else ""
        template = self.templates["synthesis"]
        return template.render(summary=summary, checks=checks)

    def render_metrics(
        self, rows: List[Dict[str, Any]], references: Optional[Dict[str, Any]] = None
    ) -> str:
        """Returns the metrics table, one row per scenario.

        Args:
            rows: Metrics of each scenario.
            references: Reference comparison rows keyed by metric name.
        """
        references = references or {}
        template = self.templates["metrics"]
        cases = references.get("cases", [])
        items = []
        for metric in ["rmse_fa", "rmse_fs", "settling_fa"]:
            for label, values in references.get(metric, {}).items():
                items.append({"metric": metric, "label": label, "values": values})
        return template.render(rows=rows, cases=cases, references=items)

    def render_report(
        self,
        title: str,
        manifest: Dict[str, Any],
        validation: str,
        synthesis: str,
        metrics: str,
        plots: List[str],
    ) -> str:
        """Returns the consolidated report using prerendered sections."""
        template = self.templates["report"]
        return template.render(
            title=title,
            manifest=manifest,
            validation=validation,
            synthesis=synthesis,
            metrics=metrics,
            plots=plots,
        )


#: Renderer instance that can be used globally.
renderer: Renderer = Renderer()
