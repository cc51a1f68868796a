"""Study report generator for training-set-size sweeps."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import markdown
from jinja2 import DictLoader, Environment

from .errors import InvalidArgumentError
from .hflc_hierarchy import LEG_NODES, RuleCountReport
from .models import Leg
from .study_harness import SweepResult, best_sizes

logger = logging.getLogger(__name__)

# published magnitudes; the source data is unavailable so these are context only
REFERENCE_VALUES = [
    {"controller": "HFLC1", "size": 40, "value": "≈25"},
    {"controller": "HFLC5", "size": 60, "value": "≈3.5"},
    {"controller": "HFLC1", "size": 30, "value": "≈0.001"},
    {"controller": "HFLC3", "size": 30, "value": "≈0.00001"},
    {"controller": "HFLC5", "size": 30, "value": "≈0.0001"},
]

STUDY_TEMPLATE = """\
# Training-set-size study

Generated: {{ timestamp }}

## Configuration

| Setting | Value |
|---|---|
| Training sizes | {{ sizes | join(', ') }} |
| Test samples | {{ test_size }} (seed {{ test_seed }}) |
| Training seeds | {% for size, seed in train_seeds.items() %}{{ size }}→{{ seed }}{% if not loop.last %}, {% endif %}{% endfor %} |
| Epochs | {{ train.epochs }} |
| Learning rate | {{ train.learn_rate }} |
| Ridge λ | {{ train.ridge_lambda }} |
{% for leg in legs %}

## {{ leg.title }} leg
{% for model in leg.models %}

### {{ model.controller }} → {{ model.output_name }}

| Size | Test cumulative SE | Test RMSE | Train SE |
|---:|---:|---:|---:|
{% for row in model.rows %}
| {{ row.size }} | {{ row.cumulative_se | sci }} | {{ row.rmse | sci }} | {{ row.train_se | sci }} |
{% endfor %}

Best training size: **{{ model.best }}**
{% endfor %}
{% endfor %}
{% if rules %}

## Rule economy

| Node | Rules |
|---|---:|
{% for node, count in rules.per_node.items() %}
| {{ node }} | {{ count }} |
{% endfor %}

| MFs per input | Hierarchical (left leg) | Flat ({{ rules.flat_signals['left'] }} signals) |
|---:|---:|---:|
{% for m, flat in rules.flat_baseline.items() %}
| {{ m }} | {{ rules.uniform_hierarchical[m] }} | {{ flat }} |
{% endfor %}
{% endif %}

## Reference magnitudes

Published cumulative errors, for orientation only; they are not reproduction targets.

| Controller | Size | Cumulative SE |
|---|---:|---:|
{% for ref in references %}
| {{ ref.controller }} | {{ ref.size }} | {{ ref.value }} |
{% endfor %}
"""


def _sci(value: float) -> str:
    return f"{value:.6g}"


@dataclass
class ModelSection:
    """Error rows of one model across training sizes."""
    controller: str
    output_name: str
    rows: List[Dict[str, float]]
    best: int


class StudyReportGenerator:
    """Renders sweep results as markdown or HTML."""

    def __init__(self):
        self.env = Environment(
            loader=DictLoader({"study.md.j2": STUDY_TEMPLATE}),
            autoescape=False,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters["sci"] = _sci

    def _legs(self, result: SweepResult) -> List[Dict[str, Any]]:
        best = best_sizes(result)
        legs = []
        for leg, node_ids in LEG_NODES.items():
            models = []
            for node_id in node_ids:
                outputs = sorted({o for c, o, _ in result.entries if c == node_id})
                for index in outputs:
                    series = result.series(node_id, index)
                    models.append(ModelSection(
                        controller=node_id,
                        output_name=self._output_name(result, node_id, index),
                        rows=[{"size": size, **entry._asdict()} for size, entry in series.items()],
                        best=best[(node_id, index)],
                    ))
            legs.append({"title": leg.value.capitalize(), "models": models})
        return legs

    @staticmethod
    def _output_name(result: SweepResult, node_id: str, index: int) -> str:
        for h in result.hierarchies.values():
            return h.node(node_id).spec.output_signals[index]
        return f"output {index}"

    def render_markdown(self, result: SweepResult, rules: Optional[RuleCountReport] = None) -> str:
        config = result.metadata.get("config", {})
        context = {
            "timestamp": result.metadata.get("timestamp", ""),
            "sizes": result.sizes,
            "test_size": config.get("test_size", ""),
            "test_seed": result.metadata.get("test_seed", ""),
            "train_seeds": result.metadata.get("train_seeds", {}),
            "train": config.get("train_config", {}),
            "legs": self._legs(result),
            "rules": rules.model_dump(mode="json") if rules else None,
            "references": REFERENCE_VALUES,
        }
        return self.env.get_template("study.md.j2").render(**context)

    def render_html(self, result: SweepResult, rules: Optional[RuleCountReport] = None) -> str:
        body = markdown.markdown(self.render_markdown(result, rules), extensions=["tables"])
        return (
            "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
            "<title>Training-set-size study</title>\n</head>\n<body>\n"
            f"{body}\n</body>\n</html>\n"
        )


def render_study_report(
    result: SweepResult,
    rules: Optional[RuleCountReport] = None,
    output_format: str = "markdown",
) -> str:
    """Render the sweep study report in ``output_format`` (markdown or html)."""
    if not result.entries:
        raise InvalidArgumentError("cannot report an empty sweep")
    generator = StudyReportGenerator()
    logger.info(f"Rendering {output_format} study report for sizes {result.sizes}")
    if output_format.lower() == "markdown":
        return generator.render_markdown(result, rules)
    elif output_format.lower() == "html":
        return generator.render_html(result, rules)
    else:
        raise InvalidArgumentError(f"Unsupported output format: {output_format}")
