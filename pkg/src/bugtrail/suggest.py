"""Auto-completion engine: tracks the reporter's likely screen through
the event-flow graph and builds suggestion sets for the component
dropdown, falling back to all known screens when tracking breaks.

The hypothesis is a set of candidate states. Replaying on-model click
steps keeps it KNOWN; a manual entry or an action the ripper never
exercised (TYPE, LONG_CLICK, SWIPE) drops it to UNKNOWN unless a
confirmation screenshot re-anchors it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .errors import StateError, ValidationError
from .model import (
    Action,
    ActionKind,
    ComponentInstance,
    ComponentType,
    ManualComponent,
    RelativeLocation,
    ReportSession,
    ReproStep,
    StateHypothesis,
    StepTarget,
    TargetRef,
    relative_location,
)
from .queries import ModelBundle

MANUAL_OPTION_TEXT = "Component not listed (describe it manually)"


class Provenance(Enum):
    STATE_SCOPED = "STATE_SCOPED"
    ALL_SCREENS_FALLBACK = "ALL_SCREENS_FALLBACK"


@dataclass(frozen=True)
class SuggestionEntry:
    """One row of the component dropdown; the trailing row of every set is
    the manual-entry option (no instance fields)."""

    descriptor_id: str | None
    object_index: int | None
    state_id: str | None
    display_type: ComponentType | None
    display_text: str
    display_location: RelativeLocation | None
    thumbnail: str | None
    disambiguator: str | None = None
    is_manual_option: bool = False

    def to_doc(self) -> dict:
        return {
            "descriptor_id": self.descriptor_id,
            "object_index": self.object_index,
            "state_id": self.state_id,
            "display_type": self.display_type.value if self.display_type else None,
            "display_text": self.display_text,
            "display_location": self.display_location.value if self.display_location else None,
            "thumbnail": self.thumbnail,
            "disambiguator": self.disambiguator,
            "is_manual_option": self.is_manual_option,
        }


@dataclass(frozen=True)
class SuggestionSet:
    entries: tuple[SuggestionEntry, ...]
    provenance: Provenance

    def to_doc(self) -> dict:
        return {
            "provenance": self.provenance.value,
            "entries": [e.to_doc() for e in self.entries],
        }


def initial_hypothesis(bundle: ModelBundle) -> StateHypothesis:
    """Cold start: the reporter begins on the graph's root screen."""
    return StateHypothesis.known({bundle.root_state_id()})


def advance_hypothesis(h: StateHypothesis, step: ReproStep, bundle: ModelBundle) -> StateHypothesis:
    """Fold one step into the hypothesis.

    KNOWN: union of recorded transitions for (state, action, target) over
    the candidate set, intersected with the state a confirmation screenshot
    uniquely identifies; empty result or a manual step means UNKNOWN.
    UNKNOWN: only a uniquely-identifying confirmation re-anchors it.
    """
    confirmed = _confirmed_state(step, bundle)
    if not h.is_known:
        return StateHypothesis.known({confirmed}) if confirmed else StateHypothesis.unknown()
    if step.is_manual:
        return StateHypothesis.unknown()
    assert isinstance(step.target, StepTarget)
    target = TargetRef(step.target.descriptor_id, step.target.object_index)
    reached: set[str] = set()
    for sid in h.states:
        reached |= bundle.transitions_from(sid, step.action.kind, target)
    if confirmed is not None:
        reached &= {confirmed}
    return StateHypothesis.known(reached) if reached else StateHypothesis.unknown()


def _confirmed_state(step: ReproStep, bundle: ModelBundle) -> str | None:
    if not step.confirmed_full_screenshot:
        return None
    matches = bundle.states_with_screenshot(step.confirmed_full_screenshot)
    return matches[0] if len(matches) == 1 else None


def recompute_hypothesis(bundle: ModelBundle, steps: Iterable[ReproStep]) -> StateHypothesis:
    """Hypothesis is a pure function of (graph, ordered steps); this is the
    from-scratch fold the incremental path must agree with."""
    h = initial_hypothesis(bundle)
    for step in steps:
        h = advance_hypothesis(h, step, bundle)
    return h


def suggest_components(h: StateHypothesis, action: ActionKind, bundle: ModelBundle) -> SuggestionSet:
    """Components offered for *action* under hypothesis *h*, each enriched
    with type, text, relative location and thumbnail; duplicates numbered
    'Option #k'; the manual-entry option is always appended last."""
    entries: list[SuggestionEntry] = []
    if h.is_known:
        provenance = Provenance.STATE_SCOPED
        scoped = ((sid, inst) for sid in sorted(h.states) for inst in bundle.components_for_state(sid, action))
    else:
        provenance = Provenance.ALL_SCREENS_FALLBACK
        scoped = iter(bundle.all_components(action))
    for sid, inst in scoped:
        entries.append(_entry_for(bundle, sid, inst))
    entries = _disambiguate(entries)
    entries.append(
        SuggestionEntry(
            descriptor_id=None,
            object_index=None,
            state_id=None,
            display_type=None,
            display_text=MANUAL_OPTION_TEXT,
            display_location=None,
            thumbnail=None,
            is_manual_option=True,
        )
    )
    return SuggestionSet(entries=tuple(entries), provenance=provenance)


def _entry_for(bundle: ModelBundle, state_id: str, inst: ComponentInstance) -> SuggestionEntry:
    state = bundle.state(state_id)
    desc = bundle.descriptor(inst.descriptor_id)
    return SuggestionEntry(
        descriptor_id=inst.descriptor_id,
        object_index=inst.object_index,
        state_id=state_id,
        display_type=desc.component_type,
        display_text=inst.runtime_text,
        display_location=relative_location(inst.bounds, state.screen_dims),
        thumbnail=inst.component_screenshot,
    )


def _disambiguate(entries: list[SuggestionEntry]) -> list[SuggestionEntry]:
    from dataclasses import replace

    counts: dict[tuple, int] = {}
    for e in entries:
        key = (e.display_type, e.display_text)
        counts[key] = counts.get(key, 0) + 1
    seen: dict[tuple, int] = {}
    out = []
    for e in entries:
        key = (e.display_type, e.display_text)
        if counts[key] >= 2:
            seen[key] = seen.get(key, 0) + 1
            out.append(replace(e, disambiguator=f"Option #{seen[key]}"))
        else:
            out.append(e)
    return out


def confirmation_screens(
    h: StateHypothesis, entry: SuggestionEntry, bundle: ModelBundle
) -> list[str]:
    """Full screenshots of every in-scope state carrying the chosen
    instance, deduplicated by hash; empty for the manual option."""
    if entry.is_manual_option or entry.descriptor_id is None:
        return []
    scope = sorted(h.states) if h.is_known else bundle.state_ids()
    seen: set[str] = set()
    out: list[str] = []
    for sid in scope:
        state = bundle.state(sid)
        if state.instance(entry.descriptor_id, entry.object_index) is None:
            continue
        if state.full_screenshot not in seen:
            seen.add(state.full_screenshot)
            out.append(state.full_screenshot)
    return out


def record_step(
    session: ReportSession,
    bundle: ModelBundle,
    action: Action,
    target: StepTarget | ManualComponent,
    entered_text: str = "",
    note: str = "",
    confirmed_full_screenshot: str | None = None,
    shot_exists: Callable[[str], bool] | None = None,
    persist: Callable[[ReportSession], None] | None = None,
) -> ReproStep:
    """Append one reporter step to the session and advance its hypothesis.

    entered_text is only accepted for TYPE actions (empty text is fine);
    the session must still be open.
    """
    if not session.is_open:
        raise StateError(f"session {session.session_id} is already finalized")
    if entered_text and action.kind is not ActionKind.TYPE:
        raise ValidationError("entered_text is only valid with TYPE", field="entered_text")
    if isinstance(target, StepTarget):
        state = bundle.state(target.state_id)
        if state.instance(target.descriptor_id, target.object_index) is None:
            raise ValidationError(
                f"{target.descriptor_id}#{target.object_index} is not on state {target.state_id}",
                field="target",
            )
    if confirmed_full_screenshot and shot_exists and not shot_exists(confirmed_full_screenshot):
        raise ValidationError("confirmed screenshot is not in the store", field="confirmed_full_screenshot")

    step = ReproStep(
        step_index=len(session.steps) + 1,
        action=action,
        target=target,
        entered_text=entered_text if action.kind is ActionKind.TYPE else "",
        note=note,
        confirmed_full_screenshot=confirmed_full_screenshot,
    )
    session.steps.append(step)
    session.hypothesis = advance_hypothesis(session.hypothesis, step, bundle)
    if persist is not None:
        persist(session)
    return step
