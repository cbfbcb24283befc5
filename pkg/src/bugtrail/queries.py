"""In-memory query view over one app model (universe + event-flow graph).

The suggestion engine works against this surface; the persistent store
exposes the same operations by loading a bundle per (app, version).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotFoundError
from .model import ActionKind, ComponentDescriptor, ComponentInstance, EventFlowGraph, ScreenState, TargetRef
from .static_analysis import ComponentUniverse


@dataclass
class ModelBundle:
    universe: ComponentUniverse
    graph: EventFlowGraph
    _states: dict[str, ScreenState] = field(init=False)
    _descriptors: dict[str, ComponentDescriptor] = field(init=False)
    _by_target: dict[tuple[str, ActionKind, TargetRef], set[str]] = field(init=False)

    def __post_init__(self):
        self._states = {s.state_id: s for s in self.graph.states}
        self._descriptors = self.universe.descriptor_map()
        for d in self.graph.dynamic_descriptors:
            self._descriptors[d.descriptor_id] = d
        self._by_target = {}
        for t in self.graph.transitions:
            key = (t.from_state, t.action.kind, t.target)
            self._by_target.setdefault(key, set()).add(t.to_state)

    # -- lookup ---------------------------------------------------------------

    def root_state_id(self) -> str:
        return self.graph.root_state

    def state_ids(self) -> list[str]:
        return sorted(self._states)

    def state(self, state_id: str) -> ScreenState:
        try:
            return self._states[state_id]
        except KeyError:
            raise NotFoundError(f"unknown state {state_id!r}") from None

    def descriptor(self, descriptor_id: str) -> ComponentDescriptor:
        try:
            return self._descriptors[descriptor_id]
        except KeyError:
            raise NotFoundError(f"unknown descriptor {descriptor_id!r}") from None

    def has_descriptor(self, descriptor_id: str) -> bool:
        return descriptor_id in self._descriptors

    # -- query operations -------------------------------------------------------

    def components_for_state(self, state_id: str, action: ActionKind) -> list[ComponentInstance]:
        """Instances on one state whose descriptor allows *action*, in the
        state's deterministic instance order."""
        state = self.state(state_id)
        return [
            inst for inst in state.instances
            if action in self.descriptor(inst.descriptor_id).allowed_actions
        ]

    def all_components(self, action: ActionKind) -> list[tuple[str, ComponentInstance]]:
        """Union over all states, ordered by (state_id, instance order);
        duplicates across states retained."""
        out = []
        for sid in self.state_ids():
            out.extend((sid, inst) for inst in self.components_for_state(sid, action))
        return out

    def transitions_from(self, state_id: str, action: ActionKind, target: TargetRef) -> set[str]:
        """All to_states recorded for (state, action, target); empty when the
        pair was never exercised dynamically."""
        self.state(state_id)  # unknown state -> lookup error
        return set(self._by_target.get((state_id, action, target), set()))

    def states_with_screenshot(self, digest: str) -> list[str]:
        return sorted(s.state_id for s in self.graph.states if s.full_screenshot == digest)

    def states_with_instance(self, descriptor_id: str, object_index: int) -> list[str]:
        return sorted(
            s.state_id
            for s in self.graph.states
            if s.instance(descriptor_id, object_index) is not None
        )
