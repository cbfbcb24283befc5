"""Finalized report assembly and the developer-facing HTML rendering.

A rendered report has exactly three sections, in order: the preliminary
block (title, device, description), the step table (action, component
type, relative location, declaring source unit, component screenshot),
and the full-screenshot trail.
"""

from __future__ import annotations

import html

from .errors import ValidationError
from .model import (
    ActionKind,
    BugReport,
    ManualComponent,
    ReportSession,
    StepTarget,
    StepView,
    relative_location,
)
from .queries import ModelBundle


def assemble_report(session: ReportSession, bundle: ModelBundle, report_id: int) -> BugReport:
    """Freeze an open session into a BugReport with the derived per-step
    view and the ordered full-screenshot trail."""
    if not session.steps:
        raise ValidationError("a report needs at least one step")
    derived: list[StepView] = []
    trail: list[str] = []
    for step in session.steps:
        if isinstance(step.target, ManualComponent):
            derived.append(
                StepView(
                    step_index=step.step_index,
                    action=step.action,
                    component_type=step.target.component_type,
                    component_text=step.target.text,
                    location=step.target.relative_location,
                    source_unit="",
                    component_screenshot="",
                )
            )
            if step.confirmed_full_screenshot:
                trail.append(step.confirmed_full_screenshot)
            continue
        assert isinstance(step.target, StepTarget)
        state = bundle.state(step.target.state_id)
        inst = state.instance(step.target.descriptor_id, step.target.object_index)
        if inst is None:
            raise ValidationError(
                f"step {step.step_index}: {step.target.descriptor_id}#{step.target.object_index} "
                f"is not on state {step.target.state_id}"
            )
        desc = bundle.descriptor(inst.descriptor_id)
        derived.append(
            StepView(
                step_index=step.step_index,
                action=step.action,
                component_type=desc.component_type,
                component_text=inst.runtime_text,
                location=relative_location(inst.bounds, state.screen_dims),
                source_unit=bundle.universe.activity_sources.get(state.activity_name, ""),
                component_screenshot=inst.component_screenshot,
            )
        )
        trail.append(step.confirmed_full_screenshot or state.full_screenshot)
    return BugReport(
        report_id=report_id,
        app_id=session.app_id,
        app_version=session.app_version,
        reporter_name=session.reporter_name,
        device_name=session.device_name,
        orientation=session.orientation,
        title=session.title,
        description=session.description,
        steps=tuple(session.steps),
        derived=tuple(derived),
        full_screenshots=tuple(trail),
    )


def action_label(view: StepView, step_text: str) -> str:
    a = view.action
    if a.kind is ActionKind.TYPE:
        return f'TYPE "{step_text}"' if step_text else "TYPE"
    if a.kind is ActionKind.SWIPE and a.direction is not None:
        return f"SWIPE {a.direction.value}"
    return a.kind.value


def render_html(report: BugReport) -> str:
    """Server-rendered developer view; static markup, hashes resolved via
    the /shots/ routes."""
    e = html.escape
    rows = []
    for step, view in zip(report.steps, report.derived):
        if view.component_screenshot:
            shot_cell = (
                f'<img class="crop" src="/shots/{view.component_screenshot}.png" '
                f'alt="step {view.step_index} component"/>'
            )
        else:
            shot_cell = "(manual entry)"
        rows.append(
            "<tr>"
            f"<td>{view.step_index}</td>"
            f"<td>{e(action_label(view, step.entered_text))}</td>"
            f"<td>{e(view.component_type.value)}</td>"
            f"<td>{e(view.component_text)}</td>"
            f"<td>{e(view.location.value)}</td>"
            f"<td>{e(view.source_unit)}</td>"
            f"<td>{shot_cell}</td>"
            f"<td>{e(step.note)}</td>"
            "</tr>"
        )
    trail = "".join(
        f'<li><img class="full" src="/shots/{digest}.png" alt="screen {i + 1}"/></li>'
        for i, digest in enumerate(report.full_screenshots)
    )
    return f"""<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8"/>
<title>Bug report #{report.report_id}: {e(report.title)}</title>
<style>
body {{ font-family: sans-serif; margin: 2rem; }}
section {{ margin-bottom: 2rem; }}
table {{ border-collapse: collapse; }}
td, th {{ border: 1px solid #999; padding: 0.4rem 0.6rem; vertical-align: top; }}
img.crop {{ max-height: 60px; }}
img.full {{ max-height: 320px; }}
dt {{ font-weight: bold; }}
</style>
</head>
<body>
<h1>Bug report #{report.report_id}</h1>
<section id="preliminary">
<h2>Summary</h2>
<dl>
<dt>Title</dt><dd>{e(report.title)}</dd>
<dt>App</dt><dd>{e(report.app_id)} {e(report.app_version)}</dd>
<dt>Reporter</dt><dd>{e(report.reporter_name)}</dd>
<dt>Device</dt><dd>{e(report.device_name)}</dd>
<dt>Orientation</dt><dd>{e(report.orientation.value)}</dd>
<dt>Description</dt><dd>{e(report.description)}</dd>
</dl>
</section>
<section id="steps">
<h2>Steps to reproduce</h2>
<table>
<thead><tr><th>#</th><th>Action</th><th>Component type</th><th>Text</th><th>Relative location</th><th>Source unit</th><th>Component screenshot</th><th>Note</th></tr></thead>
<tbody>
{"".join(rows)}
</tbody>
</table>
</section>
<section id="screenshots">
<h2>Screen trail</h2>
<ol>
{trail}
</ol>
</section>
</body>
</html>
"""
