"""Scripted app simulator: the reference device driver.

A behavior model declares named screens, their components, and
(screen, component, CLICK) -> screen edges. The driver plays that model
deterministically and renders each screen as a flat raster (solid
background, one labelled rectangle per component), so screenshot hashes
are stable across runs.

behavior.json::

    {"initial": "Main",
     "screens": {"Main": [{"id": "ok", "type": "button", "text": "OK",
                           "bounds": [100, 100, 300, 100], "clickable": true}]},
     "edges": [{"from": "Main", "component": "ok", "to": "Done"}]}

Components resolve by id, falling back to text; an edge whose key matches
several duplicate instances applies to each of them. Clickable defaults
mirror the layout schema (true for button/menu_item, false otherwise).
The virtual screen is always 900x1600.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field

from PIL import Image, ImageDraw, ImageFont

from .errors import PackageError, ValidationError
from .model import ActionKind, ComponentType, Rect
from .ripper import Observation, RawComponent
from .static_analysis import AppPackage, ComponentUniverse

SCREEN_DIMS = (900, 1600)

_CLICKABLE_TYPES = {ComponentType.BUTTON, ComponentType.MENU_ITEM}

_TYPE_NAMES = {t.value.lower(): t for t in ComponentType}

_FILL_BY_TYPE = {
    ComponentType.BUTTON: (176, 196, 222),
    ComponentType.SPINNER: (222, 196, 176),
    ComponentType.CHECKBOX: (196, 222, 176),
    ComponentType.TEXT_FIELD: (245, 245, 245),
    ComponentType.LIST_ITEM: (222, 222, 196),
    ComponentType.MENU_ITEM: (196, 176, 222),
    ComponentType.IMAGE: (176, 222, 222),
    ComponentType.GENERIC: (210, 210, 210),
}


@dataclass(frozen=True)
class BehaviorComponent:
    resource_id: str
    component_type: ComponentType
    text: str
    bounds: Rect
    clickable: bool
    editable: bool

    @property
    def key(self) -> str:
        return self.resource_id or self.text


@dataclass(frozen=True)
class BehaviorScreen:
    name: str
    components: tuple[BehaviorComponent, ...]


@dataclass(frozen=True)
class BehaviorModel:
    """Declarative ground truth the simulator plays back."""

    initial: str
    screens: dict[str, BehaviorScreen]
    edges: dict[tuple[str, str], str]  # (screen, component key) -> screen


def parse_behavior_model(doc: dict) -> BehaviorModel:
    """Validate and load behavior.json; raises PackageError on any
    structural problem (missing endpoints, bad bounds, unclickable edge
    sources, ambiguous component references)."""
    for key in ("initial", "screens", "edges"):
        if key not in doc:
            raise PackageError(f"behavior.json: missing key {key!r}")
    if not isinstance(doc["screens"], dict) or not doc["screens"]:
        raise PackageError("behavior.json: screens must be a non-empty object")

    screens: dict[str, BehaviorScreen] = {}
    for name, comps in doc["screens"].items():
        if not isinstance(comps, list):
            raise PackageError(f"behavior.json: screen {name!r} must list its components")
        parsed = []
        for i, comp in enumerate(comps):
            parsed.append(_parse_component(comp, name, i))
        screens[name] = BehaviorScreen(name=name, components=tuple(parsed))

    if doc["initial"] not in screens:
        raise PackageError(f"behavior.json: initial screen {doc['initial']!r} is not declared")

    edges: dict[tuple[str, str], str] = {}
    for entry in doc["edges"]:
        if not isinstance(entry, dict) or not {"from", "component", "to"} <= set(entry):
            raise PackageError(f"behavior.json: bad edge entry {entry!r}")
        src, key, dst = entry["from"], entry["component"], entry["to"]
        if src not in screens:
            raise PackageError(f"behavior.json: edge from unknown screen {src!r}")
        if dst not in screens:
            raise PackageError(f"behavior.json: edge to unknown screen {dst!r}")
        matches = [c for c in screens[src].components if c.key == key]
        if not matches:
            raise PackageError(f"behavior.json: edge component {key!r} not on screen {src!r}")
        if not all(c.clickable for c in matches):
            raise PackageError(f"behavior.json: edge component {key!r} on {src!r} is not clickable")
        if (src, key) in edges:
            raise PackageError(f"behavior.json: duplicate edge for ({src!r}, {key!r})")
        edges[(src, key)] = dst

    return BehaviorModel(initial=doc["initial"], screens=screens, edges=edges)


def _parse_component(comp, screen: str, index: int) -> BehaviorComponent:
    where = f"behavior.json: screen {screen!r} component #{index}"
    if not isinstance(comp, dict) or "type" not in comp or "bounds" not in comp:
        raise PackageError(f"{where}: needs at least 'type' and 'bounds'")
    tname = str(comp["type"]).lower()
    if tname not in _TYPE_NAMES:
        raise PackageError(f"{where}: unknown component type {comp['type']!r}")
    ctype = _TYPE_NAMES[tname]
    raw_bounds = comp["bounds"]
    if not (isinstance(raw_bounds, list) and len(raw_bounds) == 4 and all(isinstance(v, int) for v in raw_bounds)):
        raise PackageError(f"{where}: bounds must be [x, y, w, h] integers")
    bounds = Rect(*raw_bounds)
    if not bounds.within(SCREEN_DIMS):
        raise PackageError(f"{where}: bounds {raw_bounds} exceed the {SCREEN_DIMS} screen")
    clickable = comp.get("clickable", ctype in _CLICKABLE_TYPES)
    editable = comp.get("editable", False)
    if not isinstance(clickable, bool) or not isinstance(editable, bool):
        raise PackageError(f"{where}: clickable/editable must be booleans")
    parsed = BehaviorComponent(
        resource_id=str(comp.get("id", "")),
        component_type=ctype,
        text=str(comp.get("text", "")),
        bounds=bounds,
        clickable=clickable,
        editable=editable,
    )
    if not parsed.key:
        raise PackageError(f"{where}: needs an id or a text to be addressable")
    return parsed


def cross_check_behavior(model: BehaviorModel, universe: ComponentUniverse) -> None:
    """Refuse behavior components whose action flags contradict the layout
    declaration they reference by id; keeps rip-time clickability and the
    static universe consistent."""
    by_resource: dict[str, list] = {}
    for desc in universe.descriptors:
        if desc.resource_id:
            by_resource.setdefault(desc.resource_id, []).append(desc)
    for screen in model.screens.values():
        for comp in screen.components:
            matches = [
                d for d in by_resource.get(comp.resource_id, [])
                if screen.name in d.containing_activities
            ] or by_resource.get(comp.resource_id, [])
            if not matches:
                continue
            if comp.clickable and not any(ActionKind.CLICK in d.allowed_actions for d in matches):
                raise PackageError(
                    f"behavior.json: {screen.name!r}/{comp.key!r} is clickable but its layout "
                    "declaration is not"
                )
            if comp.editable and not any(ActionKind.TYPE in d.allowed_actions for d in matches):
                raise PackageError(
                    f"behavior.json: {screen.name!r}/{comp.key!r} is editable but its layout "
                    "declaration is not"
                )


def _background_for(name: str) -> tuple[int, int, int]:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return tuple(225 + b % 28 for b in digest[:3])  # pale, deterministic per screen


def render_screen(screen: BehaviorScreen) -> bytes:
    """Deterministic raster of a behavior screen as PNG bytes."""
    img = Image.new("RGB", SCREEN_DIMS, _background_for(screen.name))
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default()
    for comp in screen.components:
        b = comp.bounds
        box = (b.x, b.y, b.x + b.width - 1, b.y + b.height - 1)
        draw.rectangle(box, fill=_FILL_BY_TYPE[comp.component_type], outline=(40, 40, 40), width=2)
        label = comp.text or comp.resource_id
        draw.text((b.x + 6, b.y + 6), label, fill=(0, 0, 0), font=font)
    draw.text((8, SCREEN_DIMS[1] - 20), screen.name, fill=(60, 60, 60), font=font)
    out = io.BytesIO()
    img.save(out, format="PNG")
    return out.getvalue()


@dataclass
class ScriptedDriver:
    """Deterministic device driver over a BehaviorModel.

    Clicking a component with an edge moves to the edge target; any other
    action (or a click without an edge) leaves the screen unchanged. A back
    stack mirrors screen-changing clicks so go_back() retraces them.
    """

    model: BehaviorModel
    _current: str = ""
    _back_stack: list[str] = field(default_factory=list)
    _shot_cache: dict[str, bytes] = field(default_factory=dict)

    def launch_cold(self) -> Observation:
        self._current = self.model.initial
        self._back_stack.clear()
        return self.observe()

    def observe(self) -> Observation:
        if not self._current:
            raise ValidationError("driver not launched")
        screen = self.model.screens[self._current]
        raws = tuple(
            RawComponent(
                resource_id=c.resource_id,
                component_type=c.component_type,
                text=c.text,
                bounds=c.bounds,
                clickable=c.clickable,
                editable=c.editable,
            )
            for c in screen.components
        )
        return Observation(
            activity_name=screen.name,
            window_name=screen.name,
            components=raws,
            screen_dims=SCREEN_DIMS,
        )

    def perform(self, action: ActionKind, raw: RawComponent) -> None:
        if not self._current:
            raise ValidationError("driver not launched")
        if action is not ActionKind.CLICK:
            return  # only click edges exist in the model; everything else self-loops
        key = raw.resource_id or raw.text
        to = self.model.edges.get((self._current, key))
        if to is not None and to != self._current:
            self._back_stack.append(self._current)
            self._current = to

    def capture_screenshot(self) -> bytes:
        if not self._current:
            raise ValidationError("driver not launched")
        if self._current not in self._shot_cache:
            self._shot_cache[self._current] = render_screen(self.model.screens[self._current])
        return self._shot_cache[self._current]

    def can_go_back(self) -> bool:
        return bool(self._back_stack)

    def go_back(self) -> None:
        if self._back_stack:
            self._current = self._back_stack.pop()


def simulate(pkg: AppPackage) -> ScriptedDriver:
    """Build the reference driver from a package's behavior model."""
    if pkg.behavior is None:
        raise PackageError(f"package {pkg.origin} has no behavior.json")
    model = parse_behavior_model(pkg.behavior)
    return ScriptedDriver(model=model)
