"""bugtrail: model-driven bug reporting.

A static analyzer turns a portable app package into a GUI component
universe; a DFS ripper explores the running app (through a device-driver
contract, with a scripted simulator as the reference driver) into an
event-flow graph with screenshots; a suggestion engine auto-completes
reporter-entered reproduction steps against that model; an HTTP service
plus CLI expose ingestion, ripping, reporting and report export.
"""

__version__ = "0.1.0"

from .model import (
    Action,
    ActionKind,
    BugReport,
    ComponentDescriptor,
    ComponentInstance,
    ComponentType,
    EventFlowGraph,
    ManualComponent,
    Orientation,
    Rect,
    RelativeLocation,
    ReportSession,
    ReproStep,
    ScreenState,
    StateHypothesis,
    StepTarget,
    SwipeDirection,
    TargetRef,
    Transition,
    order_instances,
    relative_location,
)

__all__ = [
    "Action",
    "ActionKind",
    "BugReport",
    "ComponentDescriptor",
    "ComponentInstance",
    "ComponentType",
    "EventFlowGraph",
    "ManualComponent",
    "Orientation",
    "Rect",
    "RelativeLocation",
    "ReportSession",
    "ReproStep",
    "ScreenState",
    "StateHypothesis",
    "StepTarget",
    "SwipeDirection",
    "TargetRef",
    "Transition",
    "order_instances",
    "relative_location",
    "__version__",
]
