"""Domain types for the GUI component universe, runtime screens, the
event-flow graph, and bug reports.

Everything here is an immutable in-memory value; persistence lives in
``bugtrail.store`` and image handling in ``bugtrail.screenshots``. The one
mutable type is ReportSession, which only the suggestion engine and the
report service touch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .errors import ValidationError


class ActionKind(Enum):
    """The four user actions a step or transition can carry."""

    CLICK = "CLICK"
    LONG_CLICK = "LONG_CLICK"
    TYPE = "TYPE"
    SWIPE = "SWIPE"


class SwipeDirection(Enum):
    UP = "UP"
    DOWN = "DOWN"
    LEFT = "LEFT"
    RIGHT = "RIGHT"


@dataclass(frozen=True)
class Action:
    """An action with its optional payload: text for TYPE, direction for SWIPE."""

    kind: ActionKind
    text: str | None = None
    direction: SwipeDirection | None = None

    def __post_init__(self):
        if self.text is not None and self.kind is not ActionKind.TYPE:
            raise ValidationError("entered text is only valid on TYPE actions", field="text")
        if self.direction is not None and self.kind is not ActionKind.SWIPE:
            raise ValidationError("direction is only valid on SWIPE actions", field="direction")


class ComponentType(Enum):
    BUTTON = "BUTTON"
    SPINNER = "SPINNER"
    CHECKBOX = "CHECKBOX"
    TEXT_FIELD = "TEXT_FIELD"
    LIST_ITEM = "LIST_ITEM"
    MENU_ITEM = "MENU_ITEM"
    IMAGE = "IMAGE"
    GENERIC = "GENERIC"


class Orientation(Enum):
    PORTRAIT = "PORTRAIT"
    LANDSCAPE = "LANDSCAPE"


class RelativeLocation(Enum):
    """3x3 partition of the screen, used in reports instead of pixels."""

    TOP_LEFT = "TOP_LEFT"
    TOP_CENTER = "TOP_CENTER"
    TOP_RIGHT = "TOP_RIGHT"
    MIDDLE_LEFT = "MIDDLE_LEFT"
    CENTER = "CENTER"
    MIDDLE_RIGHT = "MIDDLE_RIGHT"
    BOTTOM_LEFT = "BOTTOM_LEFT"
    BOTTOM_CENTER = "BOTTOM_CENTER"
    BOTTOM_RIGHT = "BOTTOM_RIGHT"


_REGION_GRID = (
    (RelativeLocation.TOP_LEFT, RelativeLocation.TOP_CENTER, RelativeLocation.TOP_RIGHT),
    (RelativeLocation.MIDDLE_LEFT, RelativeLocation.CENTER, RelativeLocation.MIDDLE_RIGHT),
    (RelativeLocation.BOTTOM_LEFT, RelativeLocation.BOTTOM_CENTER, RelativeLocation.BOTTOM_RIGHT),
)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in screen pixels."""

    x: int
    y: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 0 or self.height < 0:
            raise ValidationError(f"rectangle has negative extent: {self}")

    def within(self, dims: tuple[int, int]) -> bool:
        w, h = dims
        return 0 <= self.x and 0 <= self.y and self.x + self.width <= w and self.y + self.height <= h

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.width, self.height]


def relative_location(bounds: Rect, screen_dims: tuple[int, int]) -> RelativeLocation:
    """Classify *bounds* into one of nine equal-thirds screen regions.

    The region is decided by the center point of the bounds; a center that
    falls exactly on a grid line belongs to the lower-index region (left and
    top win). Comparisons are exact: 2*center is an integer, so the test
    ``center <= k*W/3`` becomes ``3*(2*center) <= 2*k*W``.
    """
    w, h = screen_dims
    if w <= 0 or h <= 0:
        raise ValidationError(f"screen dimensions must be positive, got {screen_dims}")
    if not bounds.within((w, h)):
        raise ValidationError(f"bounds {bounds} outside screen {screen_dims}")
    cx2 = 2 * bounds.x + bounds.width   # 2 * center x
    cy2 = 2 * bounds.y + bounds.height  # 2 * center y
    col = 0 if 3 * cx2 <= 2 * w else (1 if 3 * cx2 <= 4 * w else 2)
    row = 0 if 3 * cy2 <= 2 * h else (1 if 3 * cy2 <= 4 * h else 2)
    return _REGION_GRID[row][col]


@dataclass(frozen=True)
class LayoutOrigin:
    """Where a descriptor was declared: file name plus node path inside it."""

    file: str
    node_path: str


@dataclass(frozen=True)
class ComponentDescriptor:
    """One statically-known GUI component with its traceability links."""

    descriptor_id: str
    component_type: ComponentType
    resource_id: str
    default_text: str
    allowed_actions: frozenset[ActionKind]
    containing_activities: tuple[str, ...]
    declaring_sources: tuple[str, ...] = ()
    layout_origin: LayoutOrigin | None = None
    dynamic_only: bool = False

    def __post_init__(self):
        if not self.allowed_actions:
            raise ValidationError(f"descriptor {self.descriptor_id!r} allows no actions")
        if ActionKind.TYPE in self.allowed_actions and self.component_type is not ComponentType.TEXT_FIELD:
            raise ValidationError(
                f"descriptor {self.descriptor_id!r}: TYPE is only allowed on text fields"
            )
        if not self.containing_activities:
            raise ValidationError(f"descriptor {self.descriptor_id!r} has no containing activity")


@dataclass(frozen=True)
class ComponentInstance:
    """A component observed on one screen at rip time."""

    descriptor_id: str
    object_index: int
    bounds: Rect
    runtime_text: str
    component_screenshot: str  # content hash of the crop

    def __post_init__(self):
        if self.object_index < 1:
            raise ValidationError(f"object_index must be >= 1, got {self.object_index}")


def order_instances(instances: list[ComponentInstance] | tuple[ComponentInstance, ...]) -> list[ComponentInstance]:
    """Deterministic total order: top-to-bottom, left-to-right, then
    descriptor_id and object_index as tie breakers."""
    return sorted(
        instances,
        key=lambda i: (i.bounds.y, i.bounds.x, i.descriptor_id, i.object_index),
    )


@dataclass(frozen=True)
class ScreenState:
    """One observed runtime screen."""

    state_id: str
    activity_name: str
    window_name: str
    instances: tuple[ComponentInstance, ...]
    full_screenshot: str
    screen_dims: tuple[int, int]

    def __post_init__(self):
        ordered = tuple(order_instances(self.instances))
        if ordered != self.instances:
            raise ValidationError(f"state {self.state_id!r}: instances are not in deterministic order")
        counts: dict[str, list[int]] = {}
        for inst in self.instances:
            counts.setdefault(inst.descriptor_id, []).append(inst.object_index)
            if not inst.bounds.within(self.screen_dims):
                raise ValidationError(
                    f"state {self.state_id!r}: bounds {inst.bounds} outside screen {self.screen_dims}"
                )
        for did, idxs in counts.items():
            if sorted(idxs) != list(range(1, len(idxs) + 1)):
                raise ValidationError(
                    f"state {self.state_id!r}: object indices for {did!r} are not dense 1..k: {sorted(idxs)}"
                )

    def instance(self, descriptor_id: str, object_index: int) -> ComponentInstance | None:
        for inst in self.instances:
            if inst.descriptor_id == descriptor_id and inst.object_index == object_index:
                return inst
        return None


@dataclass(frozen=True)
class TargetRef:
    """A component instance addressed as (descriptor, per-screen index)."""

    descriptor_id: str
    object_index: int


@dataclass(frozen=True)
class Transition:
    from_state: str
    action: Action
    target: TargetRef
    to_state: str
    before_screenshot: str
    after_screenshot: str


@dataclass(frozen=True)
class EventFlowGraph:
    """Screens plus (action, component-instance)-labelled transitions,
    rooted at the cold-start screen.

    ``dynamic_descriptors`` holds components first seen at rip time (absent
    from the static universe); ``truncated`` marks a rip stopped by limits
    or an aborted re-localization.
    """

    root_state: str
    states: tuple[ScreenState, ...]
    transitions: tuple[Transition, ...]
    dynamic_descriptors: tuple[ComponentDescriptor, ...] = ()
    truncated: bool = False

    def __post_init__(self):
        by_id = {s.state_id: s for s in self.states}
        if len(by_id) != len(self.states):
            raise ValidationError("duplicate state_id in graph")
        if self.root_state not in by_id:
            raise ValidationError(f"root state {self.root_state!r} not among graph states")
        seen_triples = set()
        adjacency: dict[str, set[str]] = {sid: set() for sid in by_id}
        for t in self.transitions:
            if t.from_state not in by_id or t.to_state not in by_id:
                raise ValidationError(f"transition references unknown state: {t.from_state}->{t.to_state}")
            src = by_id[t.from_state]
            if src.instance(t.target.descriptor_id, t.target.object_index) is None:
                raise ValidationError(
                    f"transition target {t.target} is not an instance on state {t.from_state!r}"
                )
            triple = (t.from_state, t.action, t.target)
            if triple in seen_triples:
                raise ValidationError(f"duplicate transition for {triple}")
            seen_triples.add(triple)
            adjacency[t.from_state].add(t.to_state)
        # every state reachable from the root
        frontier = [self.root_state]
        reached = {self.root_state}
        while frontier:
            nxt = frontier.pop()
            for to in adjacency[nxt]:
                if to not in reached:
                    reached.add(to)
                    frontier.append(to)
        unreachable = set(by_id) - reached
        if unreachable:
            raise ValidationError(f"states unreachable from root: {sorted(unreachable)}")

    def state(self, state_id: str) -> ScreenState:
        for s in self.states:
            if s.state_id == state_id:
                return s
        raise KeyError(state_id)


def validate_graph_actions(graph: EventFlowGraph, descriptors: dict[str, ComponentDescriptor]) -> None:
    """Check every transition's action against its target descriptor and
    every instance reference against *descriptors* (static plus dynamic)."""
    merged = dict(descriptors)
    for d in graph.dynamic_descriptors:
        merged[d.descriptor_id] = d
    for s in graph.states:
        for inst in s.instances:
            if inst.descriptor_id not in merged:
                raise ValidationError(
                    f"state {s.state_id!r} instance references unknown descriptor {inst.descriptor_id!r}"
                )
    for t in graph.transitions:
        desc = merged.get(t.target.descriptor_id)
        if desc is None:
            raise ValidationError(f"transition references unknown descriptor {t.target.descriptor_id!r}")
        if t.action.kind not in desc.allowed_actions:
            raise ValidationError(
                f"transition action {t.action.kind.value} not allowed on descriptor {desc.descriptor_id!r}"
            )


@dataclass(frozen=True)
class ManualComponent:
    """Reporter-supplied component description used when the model lacks
    the needed entry."""

    component_type: ComponentType
    text: str
    relative_location: RelativeLocation


@dataclass(frozen=True)
class StepTarget:
    """A confirmed on-model target: instance plus the screen it sits on."""

    descriptor_id: str
    object_index: int
    state_id: str


@dataclass(frozen=True)
class ReproStep:
    step_index: int
    action: Action
    target: Union[StepTarget, ManualComponent]
    entered_text: str = ""
    note: str = ""
    confirmed_full_screenshot: str | None = None

    def __post_init__(self):
        if self.step_index < 1:
            raise ValidationError(f"step_index must be >= 1, got {self.step_index}")
        if self.entered_text and self.action.kind is not ActionKind.TYPE:
            raise ValidationError("entered_text is only valid on TYPE steps", field="entered_text")

    @property
    def is_manual(self) -> bool:
        return isinstance(self.target, ManualComponent)


@dataclass(frozen=True)
class StateHypothesis:
    """The engine's belief about which screen(s) the step history reached.

    ``states`` is None for UNKNOWN; a KNOWN hypothesis always carries a
    non-empty frozenset of state ids.
    """

    states: frozenset[str] | None

    def __post_init__(self):
        if self.states is not None and not self.states:
            raise ValidationError("a KNOWN hypothesis needs at least one state")

    @classmethod
    def known(cls, state_ids) -> "StateHypothesis":
        return cls(frozenset(state_ids))

    @classmethod
    def unknown(cls) -> "StateHypothesis":
        return cls(None)

    @property
    def is_known(self) -> bool:
        return self.states is not None


@dataclass
class ReportSession:
    """An in-progress report; mutated only through the suggestion engine
    and the report service."""

    session_id: str
    app_id: str
    app_version: str
    reporter_name: str
    device_name: str
    orientation: Orientation
    title: str
    description: str
    steps: list[ReproStep] = field(default_factory=list)
    hypothesis: StateHypothesis = field(default_factory=StateHypothesis.unknown)
    finalized_report_id: int | None = None
    created_at: str = ""
    updated_at: str = ""

    @property
    def is_open(self) -> bool:
        return self.finalized_report_id is None


@dataclass(frozen=True)
class StepView:
    """Per-step derived row of a finalized report."""

    step_index: int
    action: Action
    component_type: ComponentType
    component_text: str
    location: RelativeLocation
    source_unit: str
    component_screenshot: str  # crop hash, empty for manual entries


@dataclass(frozen=True)
class BugReport:
    """Finalized, uniquely-identified report: frozen session data plus the
    derived per-step view and the ordered full-screenshot trail."""

    report_id: int
    app_id: str
    app_version: str
    reporter_name: str
    device_name: str
    orientation: Orientation
    title: str
    description: str
    steps: tuple[ReproStep, ...]
    derived: tuple[StepView, ...]
    full_screenshots: tuple[str, ...]

    def __post_init__(self):
        if self.report_id < 1:
            raise ValidationError(f"report_id must be >= 1, got {self.report_id}")
        if len(self.derived) != len(self.steps):
            raise ValidationError("derived view length must equal steps length")
