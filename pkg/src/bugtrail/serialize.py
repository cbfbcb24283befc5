"""Encoding/decoding between domain values and their canonical JSON
documents (universe.json, graph.json, reports, sessions).

Encoders emit plain dicts/lists with all collections in deterministic
order; ``canonical_json_bytes`` turns them into the stored byte form.
Decoding an encoded value yields an equal domain value, and re-encoding
a decoded document is byte-identical.
"""

from __future__ import annotations

from .errors import ValidationError
from .model import (
    Action,
    ActionKind,
    BugReport,
    ComponentDescriptor,
    ComponentInstance,
    ComponentType,
    EventFlowGraph,
    LayoutOrigin,
    ManualComponent,
    Orientation,
    Rect,
    RelativeLocation,
    ReportSession,
    ReproStep,
    ScreenState,
    StateHypothesis,
    StepTarget,
    StepView,
    SwipeDirection,
    TargetRef,
    Transition,
)
from .static_analysis import ComponentUniverse


# -- components and universes -------------------------------------------------

def encode_descriptor(d: ComponentDescriptor) -> dict:
    return {
        "descriptor_id": d.descriptor_id,
        "component_type": d.component_type.value,
        "resource_id": d.resource_id,
        "default_text": d.default_text,
        "allowed_actions": sorted(a.value for a in d.allowed_actions),
        "containing_activities": list(d.containing_activities),
        "declaring_sources": list(d.declaring_sources),
        "layout_origin": (
            {"file": d.layout_origin.file, "node_path": d.layout_origin.node_path}
            if d.layout_origin
            else None
        ),
        "dynamic_only": d.dynamic_only,
    }


def decode_descriptor(doc: dict) -> ComponentDescriptor:
    origin = doc.get("layout_origin")
    return ComponentDescriptor(
        descriptor_id=doc["descriptor_id"],
        component_type=ComponentType(doc["component_type"]),
        resource_id=doc["resource_id"],
        default_text=doc["default_text"],
        allowed_actions=frozenset(ActionKind(a) for a in doc["allowed_actions"]),
        containing_activities=tuple(doc["containing_activities"]),
        declaring_sources=tuple(doc["declaring_sources"]),
        layout_origin=LayoutOrigin(origin["file"], origin["node_path"]) if origin else None,
        dynamic_only=doc.get("dynamic_only", False),
    )


def encode_universe(u: ComponentUniverse) -> dict:
    return {
        "app_id": u.app_id,
        "app_version": u.app_version,
        "descriptors": [encode_descriptor(d) for d in sorted(u.descriptors, key=lambda d: d.descriptor_id)],
        "activity_index": {act: list(ids) for act, ids in sorted(u.activity_index.items())},
        "activity_sources": dict(sorted(u.activity_sources.items())),
    }


def decode_universe(doc: dict) -> ComponentUniverse:
    return ComponentUniverse(
        app_id=doc["app_id"],
        app_version=doc["app_version"],
        descriptors=tuple(decode_descriptor(d) for d in doc["descriptors"]),
        activity_index={act: tuple(ids) for act, ids in doc["activity_index"].items()},
        activity_sources=dict(doc["activity_sources"]),
    )


# -- graphs --------------------------------------------------------------------

def encode_action(a: Action) -> dict:
    doc: dict = {"kind": a.kind.value}
    if a.text is not None:
        doc["text"] = a.text
    if a.direction is not None:
        doc["direction"] = a.direction.value
    return doc


def decode_action(doc: dict) -> Action:
    return Action(
        kind=ActionKind(doc["kind"]),
        text=doc.get("text"),
        direction=SwipeDirection(doc["direction"]) if doc.get("direction") else None,
    )


def encode_instance(i: ComponentInstance) -> dict:
    return {
        "descriptor_id": i.descriptor_id,
        "object_index": i.object_index,
        "bounds": i.bounds.as_list(),
        "runtime_text": i.runtime_text,
        "component_screenshot": i.component_screenshot,
    }


def decode_instance(doc: dict) -> ComponentInstance:
    return ComponentInstance(
        descriptor_id=doc["descriptor_id"],
        object_index=doc["object_index"],
        bounds=Rect(*doc["bounds"]),
        runtime_text=doc["runtime_text"],
        component_screenshot=doc["component_screenshot"],
    )


def encode_state(s: ScreenState) -> dict:
    return {
        "state_id": s.state_id,
        "activity_name": s.activity_name,
        "window_name": s.window_name,
        "instances": [encode_instance(i) for i in s.instances],
        "full_screenshot": s.full_screenshot,
        "screen_dims": list(s.screen_dims),
    }


def decode_state(doc: dict) -> ScreenState:
    return ScreenState(
        state_id=doc["state_id"],
        activity_name=doc["activity_name"],
        window_name=doc["window_name"],
        instances=tuple(decode_instance(i) for i in doc["instances"]),
        full_screenshot=doc["full_screenshot"],
        screen_dims=tuple(doc["screen_dims"]),
    )


def encode_transition(t: Transition) -> dict:
    return {
        "from_state": t.from_state,
        "action": encode_action(t.action),
        "target": {"descriptor_id": t.target.descriptor_id, "object_index": t.target.object_index},
        "to_state": t.to_state,
        "before_screenshot": t.before_screenshot,
        "after_screenshot": t.after_screenshot,
    }


def decode_transition(doc: dict) -> Transition:
    return Transition(
        from_state=doc["from_state"],
        action=decode_action(doc["action"]),
        target=TargetRef(doc["target"]["descriptor_id"], doc["target"]["object_index"]),
        to_state=doc["to_state"],
        before_screenshot=doc["before_screenshot"],
        after_screenshot=doc["after_screenshot"],
    )


def encode_graph(g: EventFlowGraph) -> dict:
    return {
        "root_state": g.root_state,
        "states": [encode_state(s) for s in sorted(g.states, key=lambda s: s.state_id)],
        "transitions": [
            encode_transition(t)
            for t in sorted(
                g.transitions,
                key=lambda t: (t.from_state, t.target.descriptor_id, t.target.object_index,
                               t.action.kind.value, t.to_state),
            )
        ],
        "dynamic_descriptors": [
            encode_descriptor(d) for d in sorted(g.dynamic_descriptors, key=lambda d: d.descriptor_id)
        ],
        "truncated": g.truncated,
    }


def decode_graph(doc: dict) -> EventFlowGraph:
    return EventFlowGraph(
        root_state=doc["root_state"],
        states=tuple(decode_state(s) for s in doc["states"]),
        transitions=tuple(decode_transition(t) for t in doc["transitions"]),
        dynamic_descriptors=tuple(decode_descriptor(d) for d in doc["dynamic_descriptors"]),
        truncated=doc.get("truncated", False),
    )


# -- steps, sessions, reports ---------------------------------------------------

def encode_step(s: ReproStep) -> dict:
    if isinstance(s.target, StepTarget):
        target: dict = {
            "descriptor_id": s.target.descriptor_id,
            "object_index": s.target.object_index,
            "state_id": s.target.state_id,
        }
    else:
        target = {
            "manual": {
                "component_type": s.target.component_type.value,
                "text": s.target.text,
                "relative_location": s.target.relative_location.value,
            }
        }
    return {
        "step_index": s.step_index,
        "action": encode_action(s.action),
        "target": target,
        "entered_text": s.entered_text,
        "note": s.note,
        "confirmed_full_screenshot": s.confirmed_full_screenshot,
    }


def decode_step(doc: dict) -> ReproStep:
    raw_target = doc["target"]
    if "manual" in raw_target:
        m = raw_target["manual"]
        target: StepTarget | ManualComponent = ManualComponent(
            component_type=ComponentType(m["component_type"]),
            text=m["text"],
            relative_location=RelativeLocation(m["relative_location"]),
        )
    else:
        target = StepTarget(
            descriptor_id=raw_target["descriptor_id"],
            object_index=raw_target["object_index"],
            state_id=raw_target["state_id"],
        )
    return ReproStep(
        step_index=doc["step_index"],
        action=decode_action(doc["action"]),
        target=target,
        entered_text=doc.get("entered_text", ""),
        note=doc.get("note", ""),
        confirmed_full_screenshot=doc.get("confirmed_full_screenshot"),
    )


def encode_hypothesis(h: StateHypothesis) -> dict:
    return {"known": sorted(h.states) if h.is_known else None}


def decode_hypothesis(doc: dict) -> StateHypothesis:
    known = doc.get("known")
    return StateHypothesis.known(known) if known is not None else StateHypothesis.unknown()


def encode_session(s: ReportSession) -> dict:
    return {
        "session_id": s.session_id,
        "app_id": s.app_id,
        "app_version": s.app_version,
        "reporter_name": s.reporter_name,
        "device_name": s.device_name,
        "orientation": s.orientation.value,
        "title": s.title,
        "description": s.description,
        "steps": [encode_step(st) for st in s.steps],
        "hypothesis": encode_hypothesis(s.hypothesis),
        "finalized_report_id": s.finalized_report_id,
        "created_at": s.created_at,
        "updated_at": s.updated_at,
    }


def decode_session(doc: dict) -> ReportSession:
    return ReportSession(
        session_id=doc["session_id"],
        app_id=doc["app_id"],
        app_version=doc["app_version"],
        reporter_name=doc["reporter_name"],
        device_name=doc["device_name"],
        orientation=Orientation(doc["orientation"]),
        title=doc["title"],
        description=doc["description"],
        steps=[decode_step(st) for st in doc["steps"]],
        hypothesis=decode_hypothesis(doc["hypothesis"]),
        finalized_report_id=doc.get("finalized_report_id"),
        created_at=doc.get("created_at", ""),
        updated_at=doc.get("updated_at", ""),
    )


def encode_step_view(v: StepView) -> dict:
    return {
        "step_index": v.step_index,
        "action": encode_action(v.action),
        "component_type": v.component_type.value,
        "component_text": v.component_text,
        "location": v.location.value,
        "source_unit": v.source_unit,
        "component_screenshot": v.component_screenshot,
    }


def decode_step_view(doc: dict) -> StepView:
    return StepView(
        step_index=doc["step_index"],
        action=decode_action(doc["action"]),
        component_type=ComponentType(doc["component_type"]),
        component_text=doc["component_text"],
        location=RelativeLocation(doc["location"]),
        source_unit=doc["source_unit"],
        component_screenshot=doc["component_screenshot"],
    )


def encode_report(r: BugReport) -> dict:
    return {
        "report_id": r.report_id,
        "app_id": r.app_id,
        "app_version": r.app_version,
        "reporter_name": r.reporter_name,
        "device_name": r.device_name,
        "orientation": r.orientation.value,
        "title": r.title,
        "description": r.description,
        "steps": [encode_step(s) for s in r.steps],
        "derived": [encode_step_view(v) for v in r.derived],
        "full_screenshots": list(r.full_screenshots),
    }


def decode_report(doc: dict) -> BugReport:
    return BugReport(
        report_id=doc["report_id"],
        app_id=doc["app_id"],
        app_version=doc["app_version"],
        reporter_name=doc["reporter_name"],
        device_name=doc["device_name"],
        orientation=Orientation(doc["orientation"]),
        title=doc["title"],
        description=doc["description"],
        steps=tuple(decode_step(s) for s in doc["steps"]),
        derived=tuple(decode_step_view(v) for v in doc["derived"]),
        full_screenshots=tuple(doc["full_screenshots"]),
    )


def require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)
