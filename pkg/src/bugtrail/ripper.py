"""Systematic DFS exploration of a running app through the device-driver
contract, producing the event-flow graph with screenshots.

The ripper clicks every clickable instance of every newly discovered
screen exactly once, in deterministic instance order. Backtracking uses
go_back() when the driver supports it and falls back to a cold restart
plus replay of the state's access path. Screen identity is structural:
two observations are the same state iff their signatures match.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

from .errors import DriverTimeoutError, RipAbortedError, ValidationError
from .model import (
    Action,
    ActionKind,
    ComponentDescriptor,
    ComponentInstance,
    ComponentType,
    EventFlowGraph,
    Rect,
    ScreenState,
    TargetRef,
    Transition,
)
from .screenshots import ScreenshotStore, png_crop
from .static_analysis import ComponentUniverse

logger = logging.getLogger(__name__)

_REPLAY_RETRIES = 3


@dataclass(frozen=True)
class RawComponent:
    """One component as reported by a driver's observe()."""

    resource_id: str
    component_type: ComponentType
    text: str
    bounds: Rect
    clickable: bool
    editable: bool


@dataclass(frozen=True)
class Observation:
    activity_name: str
    window_name: str
    components: tuple[RawComponent, ...]
    screen_dims: tuple[int, int]


@runtime_checkable
class DeviceDriver(Protocol):
    """Behavioral contract every driver must satisfy.

    launch_cold() must always land on the same first screen for a fixed
    app; raw component references stay valid across re-visits of the same
    screen state. Drivers may raise DriverTimeoutError from perform() or
    observe().
    """

    def launch_cold(self) -> Observation: ...

    def observe(self) -> Observation: ...

    def perform(self, action: ActionKind, raw: RawComponent) -> None: ...

    def capture_screenshot(self) -> bytes: ...

    def can_go_back(self) -> bool: ...

    def go_back(self) -> None: ...


@dataclass(frozen=True)
class RipLimits:
    max_states: int = 100
    max_actions: int = 1000
    per_action_timeout: float = 5.0

    def __post_init__(self):
        if self.max_states < 1 or self.max_actions < 0:
            raise ValidationError(f"nonsensical rip limits: {self}")


class UniverseMatcher:
    """Binds raw observations to descriptors, synthesizing dynamic-only
    descriptors for components the static universe does not know."""

    def __init__(self, universe: ComponentUniverse):
        self._static = universe.descriptor_map()
        self._dynamic: dict[str, ComponentDescriptor] = {}
        self._by_resource: dict[str, list[ComponentDescriptor]] = {}
        for desc in universe.descriptors:
            if desc.resource_id:
                self._by_resource.setdefault(desc.resource_id, []).append(desc)
        for lst in self._by_resource.values():
            lst.sort(key=lambda d: d.descriptor_id)

    @property
    def dynamic_descriptors(self) -> tuple[ComponentDescriptor, ...]:
        return tuple(sorted(self._dynamic.values(), key=lambda d: d.descriptor_id))

    def descriptor(self, descriptor_id: str) -> ComponentDescriptor | None:
        return self._static.get(descriptor_id) or self._dynamic.get(descriptor_id)

    def match(self, raw: RawComponent, activity: str) -> ComponentDescriptor:
        if raw.resource_id:
            candidates = self._by_resource.get(raw.resource_id, [])
            if candidates:
                in_activity = [d for d in candidates if activity in d.containing_activities]
                pool = in_activity or candidates
                typed = [d for d in pool if d.component_type is raw.component_type]
                return (typed or pool)[0]
        else:
            text_free = self._text_excluded(raw)
            candidates = [
                d for d in self._static.values()
                if d.component_type is raw.component_type
                and activity in d.containing_activities
                and (text_free or d.default_text == raw.text)
            ]
            if len(candidates) == 1:
                return candidates[0]
        return self._synthesize(raw, activity)

    @staticmethod
    def _text_excluded(raw: RawComponent) -> bool:
        # editable text drifts at runtime and must not affect identity
        return raw.editable or raw.component_type is ComponentType.TEXT_FIELD

    def _synthesize(self, raw: RawComponent, activity: str) -> ComponentDescriptor:
        ident = raw.resource_id or ("" if self._text_excluded(raw) else raw.text)
        descriptor_id = f"dyn:{activity}:{raw.component_type.value}:{ident}"
        existing = self._dynamic.get(descriptor_id)
        if existing is not None:
            return existing
        actions = set()
        if raw.clickable:
            actions.add(ActionKind.CLICK)
        if raw.editable and raw.component_type is ComponentType.TEXT_FIELD:
            actions.add(ActionKind.TYPE)
        if not actions:
            actions.add(ActionKind.CLICK)  # descriptors need at least one action; taps are universal
        desc = ComponentDescriptor(
            descriptor_id=descriptor_id,
            component_type=raw.component_type,
            resource_id=raw.resource_id,
            default_text="" if self._text_excluded(raw) else raw.text,
            allowed_actions=frozenset(actions),
            containing_activities=(activity,),
            dynamic_only=True,
        )
        self._dynamic[descriptor_id] = desc
        return desc


Signature = tuple


def match_instance(raw: RawComponent, matcher: UniverseMatcher | ComponentUniverse, activity: str) -> ComponentDescriptor:
    """Bind one raw component to a descriptor (total: unmatched components
    get a synthesized dynamic-only descriptor)."""
    if isinstance(matcher, ComponentUniverse):
        matcher = UniverseMatcher(matcher)
    return matcher.match(raw, activity)


def state_signature(obs: Observation, matcher: UniverseMatcher | ComponentUniverse) -> Signature:
    """Structural identity of an observation: activity, window, and the
    multiset of matched descriptor keys with their instance counts. Two
    observations belong to the same screen state iff signatures are equal."""
    if isinstance(matcher, ComponentUniverse):
        matcher = UniverseMatcher(matcher)
    keys = Counter(matcher.match(raw, obs.activity_name).descriptor_id for raw in obs.components)
    return (obs.activity_name, obs.window_name, tuple(sorted(keys.items())))


def state_id_for(signature: Signature) -> str:
    blob = json.dumps(signature, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return "st-" + hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class _PathHop:
    target: TargetRef
    to_state: str


@dataclass
class _Visit:
    state: ScreenState
    signature: Signature
    raws: dict[tuple[str, int], RawComponent]
    pending: list[TargetRef] = field(default_factory=list)
    access_path: tuple[_PathHop, ...] = ()


class _Rip:
    def __init__(self, driver: DeviceDriver, universe: ComponentUniverse, limits: RipLimits, shots: ScreenshotStore):
        self.driver = driver
        self.limits = limits
        self.shots = shots
        self.matcher = UniverseMatcher(universe)
        self.visits: dict[Signature, _Visit] = {}
        self.transitions: list[Transition] = []
        self.truncated = False
        self.actions_used = 0
        self.root: _Visit | None = None

    # -- state construction ------------------------------------------------

    def discover(self, obs: Observation, access_path: tuple[_PathHop, ...]) -> _Visit:
        signature = state_signature(obs, self.matcher)
        full_png = self.driver.capture_screenshot()
        full_hash = self.shots.put(full_png)

        matched = [(raw, self.matcher.match(raw, obs.activity_name)) for raw in obs.components]
        order = sorted(
            range(len(matched)),
            key=lambda i: (matched[i][0].bounds.y, matched[i][0].bounds.x, matched[i][1].descriptor_id, i),
        )
        counts: Counter[str] = Counter()
        instances: list[ComponentInstance] = []
        raws: dict[tuple[str, int], RawComponent] = {}
        pending: list[TargetRef] = []
        for i in order:
            raw, desc = matched[i]
            counts[desc.descriptor_id] += 1
            index = counts[desc.descriptor_id]
            crop_hash = self.shots.put(png_crop(full_png, raw.bounds))
            instances.append(
                ComponentInstance(
                    descriptor_id=desc.descriptor_id,
                    object_index=index,
                    bounds=raw.bounds,
                    runtime_text=raw.text,
                    component_screenshot=crop_hash,
                )
            )
            raws[(desc.descriptor_id, index)] = raw
            if raw.clickable and ActionKind.CLICK in desc.allowed_actions:
                pending.append(TargetRef(desc.descriptor_id, index))

        state = ScreenState(
            state_id=state_id_for(signature),
            activity_name=obs.activity_name,
            window_name=obs.window_name,
            instances=tuple(instances),
            full_screenshot=full_hash,
            screen_dims=obs.screen_dims,
        )
        visit = _Visit(state=state, signature=signature, raws=raws, pending=pending, access_path=access_path)
        self.visits[signature] = visit
        return visit

    # -- navigation ----------------------------------------------------------

    def observe_visit(self) -> _Visit | None:
        obs = self.driver.observe()
        return self.visits.get(state_signature(obs, self.matcher))

    def replay_to(self, target: _Visit) -> bool:
        obs = self.driver.launch_cold()
        if state_signature(obs, self.matcher) != self.root.signature:
            return False
        cur = self.root
        for hop in target.access_path:
            raw = cur.raws.get((hop.target.descriptor_id, hop.target.object_index))
            if raw is None:
                return False
            self.driver.perform(ActionKind.CLICK, raw)
            nxt = self.observe_visit()
            if nxt is None or nxt.state.state_id != hop.to_state:
                return False
            cur = nxt
        return cur is target

    def navigate(self, current: _Visit | None, target: _Visit) -> _Visit:
        if current is target:
            return target
        budget = len(self.visits) + 2
        while current is not target and budget > 0 and self.driver.can_go_back():
            self.driver.go_back()
            budget -= 1
            current = self.observe_visit()
            if current is None:
                break
        if current is target:
            return target
        for attempt in range(_REPLAY_RETRIES):
            if self.replay_to(target):
                return target
            logger.warning("replay to %s failed (attempt %d)", target.state.state_id, attempt + 1)
        raise RipAbortedError(f"cannot re-localize to state {target.state.state_id}")

    # -- main loop -----------------------------------------------------------

    def run(self) -> EventFlowGraph:
        obs = self.driver.launch_cold()
        self.root = self.discover(obs, access_path=())
        stack = [self.root]
        current: _Visit | None = self.root

        while stack:
            top = stack[-1]
            if not top.pending:
                stack.pop()
                continue
            if self.actions_used >= self.limits.max_actions:
                self.truncated = True
                logger.warning("action limit %d reached; stopping", self.limits.max_actions)
                break
            try:
                current = self.navigate(current, top)
            except RipAbortedError as exc:
                logger.warning("aborting exploration: %s", exc)
                self.truncated = True
                break

            tref = top.pending.pop(0)
            raw = top.raws[(tref.descriptor_id, tref.object_index)]
            before_hash = self.shots.put(self.driver.capture_screenshot())
            self.actions_used += 1
            started = time.monotonic()
            try:
                self.driver.perform(ActionKind.CLICK, raw)
                after_obs = self.driver.observe()
                if time.monotonic() - started > self.limits.per_action_timeout:
                    raise DriverTimeoutError(
                        f"action on {tref.descriptor_id}#{tref.object_index} exceeded "
                        f"{self.limits.per_action_timeout}s"
                    )
            except DriverTimeoutError as exc:
                logger.warning("%s; skipping transition", exc)
                current = self.recover(top)
                if current is None:
                    self.truncated = True
                    break
                continue

            after_sig = state_signature(after_obs, self.matcher)
            if after_sig == top.signature:
                to_visit = top
            elif after_sig in self.visits:
                to_visit = self.visits[after_sig]
            else:
                if len(self.visits) >= self.limits.max_states:
                    self.truncated = True
                    logger.warning("state limit %d reached; stopping", self.limits.max_states)
                    break
                hop = _PathHop(target=tref, to_state=state_id_for(after_sig))
                to_visit = self.discover(after_obs, access_path=top.access_path + (hop,))
                stack.append(to_visit)
            current = to_visit
            after_hash = self.shots.put(self.driver.capture_screenshot())
            self.transitions.append(
                Transition(
                    from_state=top.state.state_id,
                    action=Action(ActionKind.CLICK),
                    target=tref,
                    to_state=to_visit.state.state_id,
                    before_screenshot=before_hash,
                    after_screenshot=after_hash,
                )
            )

        return self.build_graph()

    def recover(self, expected: _Visit) -> _Visit | None:
        """After a timed-out action, figure out where we are; cold-replay to
        *expected* when the screen is unknown."""
        try:
            found = self.observe_visit()
            if found is not None:
                return found
            return self.navigate(None, expected)
        except (DriverTimeoutError, RipAbortedError) as exc:
            logger.warning("recovery failed: %s", exc)
            return None

    def build_graph(self) -> EventFlowGraph:
        states = tuple(sorted((v.state for v in self.visits.values()), key=lambda s: s.state_id))
        transitions = tuple(
            sorted(
                self.transitions,
                key=lambda t: (
                    t.from_state,
                    t.target.descriptor_id,
                    t.target.object_index,
                    t.action.kind.value,
                    t.to_state,
                ),
            )
        )
        return EventFlowGraph(
            root_state=self.root.state.state_id,
            states=states,
            transitions=transitions,
            dynamic_descriptors=self.matcher.dynamic_descriptors,
            truncated=self.truncated,
        )


def rip(
    driver: DeviceDriver,
    universe: ComponentUniverse,
    limits: RipLimits | None = None,
    shots: ScreenshotStore | None = None,
) -> EventFlowGraph:
    """Explore *driver* depth-first from a cold launch and return the
    event-flow graph. Screenshots land in *shots*; the graph references
    them by content hash only."""
    if shots is None:
        raise ValidationError("rip needs a screenshot store")
    return _Rip(driver, universe, limits or RipLimits(), shots).run()
