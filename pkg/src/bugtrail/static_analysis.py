"""Static side of the pipeline: parse a portable app package (layout and
menu definitions plus a source index) into the component universe with
traceability links.

Package layout, on disk or zipped::

    manifest.json        app_id, app_version, main_activity, activities
    layouts/*.xml        <screen> with component elements
    menus/*.xml          <menu> with <item> elements
    source-index.json    resource_id or activity name -> [source units]
    behavior.json        optional, consumed by the simulator

Layout schema: elements screen/button/spinner/checkbox/text_field/
list_item/image/generic; attributes id, text, clickable, long_clickable,
editable, swipeable. Booleans default false, except clickable defaults
true for button and menu item nodes. Unknown tags degrade to GENERIC with
a recorded warning.
"""

from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
import zipfile
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import LayoutParseError, PackageError
from .model import ActionKind, ComponentDescriptor, ComponentType, LayoutOrigin

logger = logging.getLogger(__name__)

_TAG_TYPES = {
    "button": ComponentType.BUTTON,
    "spinner": ComponentType.SPINNER,
    "checkbox": ComponentType.CHECKBOX,
    "text_field": ComponentType.TEXT_FIELD,
    "list_item": ComponentType.LIST_ITEM,
    "image": ComponentType.IMAGE,
    "generic": ComponentType.GENERIC,
}

_CLICKABLE_BY_DEFAULT = {"button", "item"}

_ACTION_ATTRS = (
    ("clickable", ActionKind.CLICK),
    ("long_clickable", ActionKind.LONG_CLICK),
    ("editable", ActionKind.TYPE),
    ("swipeable", ActionKind.SWIPE),
)


@dataclass(frozen=True)
class ActivityDecl:
    name: str
    layout: str
    source_unit: str


@dataclass(frozen=True)
class Manifest:
    app_id: str
    app_version: str
    main_activity: str
    activities: tuple[ActivityDecl, ...]


@dataclass(frozen=True)
class AppPackage:
    """A loaded package: manifest, raw definition files, source index and
    the optional behavior model (opaque here, parsed by the simulator)."""

    manifest: Manifest
    layouts: dict[str, str]
    menus: dict[str, str]
    source_index: dict[str, tuple[str, ...]]
    behavior: dict | None
    origin: str


@dataclass(frozen=True)
class ParsedComponent:
    """A component node before activities and source links are attached."""

    component_type: ComponentType
    resource_id: str
    default_text: str
    allowed_actions: frozenset[ActionKind]
    node_path: str


@dataclass(frozen=True)
class LayoutParse:
    components: tuple[ParsedComponent, ...]
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class ComponentUniverse:
    """Every statically-known component of one app version.

    activity_index maps activity name -> descriptor ids placed there;
    activity_sources maps activity name -> its manifest source unit (used
    for per-step traceability in reports).
    """

    app_id: str
    app_version: str
    descriptors: tuple[ComponentDescriptor, ...]
    activity_index: dict[str, tuple[str, ...]]
    activity_sources: dict[str, str]

    def descriptor_map(self) -> dict[str, ComponentDescriptor]:
        return {d.descriptor_id: d for d in self.descriptors}


def _read_json(raw: bytes, name: str):
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise PackageError(f"{name} is not valid JSON: {exc}") from exc


def load_app_package(path: str | Path) -> AppPackage:
    """Read a package directory or zip archive and validate its manifest.

    Layout/menu markup is validated later, file by file, by
    build_component_universe so diagnostics stay file-scoped.
    """
    path = Path(path)
    files: dict[str, bytes] = {}
    if path.is_dir():
        for sub in path.rglob("*"):
            if sub.is_file():
                files[sub.relative_to(path).as_posix()] = sub.read_bytes()
    elif path.is_file() and zipfile.is_zipfile(path):
        with zipfile.ZipFile(path) as zf:
            for name in zf.namelist():
                if not name.endswith("/"):
                    files[name] = zf.read(name)
    else:
        raise PackageError(f"{path} is neither a package directory nor a zip archive")

    if "manifest.json" not in files:
        raise PackageError(f"{path}: manifest.json missing")
    manifest = _parse_manifest(_read_json(files["manifest.json"], "manifest.json"))

    if "source-index.json" not in files:
        raise PackageError(f"{path}: source-index.json missing")
    source_index = _parse_source_index(_read_json(files["source-index.json"], "source-index.json"))

    layouts = {
        Path(name).name: files[name].decode("utf-8")
        for name in sorted(files)
        if name.startswith("layouts/") and name.endswith(".xml")
    }
    menus = {
        Path(name).name: files[name].decode("utf-8")
        for name in sorted(files)
        if name.startswith("menus/") and name.endswith(".xml")
    }

    for act in manifest.activities:
        if act.layout not in layouts:
            raise PackageError(f"activity {act.name!r} references missing layout {act.layout!r}")

    behavior = None
    if "behavior.json" in files:
        behavior = _read_json(files["behavior.json"], "behavior.json")
        if not isinstance(behavior, dict):
            raise PackageError("behavior.json must be a JSON object")

    return AppPackage(
        manifest=manifest,
        layouts=layouts,
        menus=menus,
        source_index=source_index,
        behavior=behavior,
        origin=str(path),
    )


def _parse_manifest(doc) -> Manifest:
    if not isinstance(doc, dict):
        raise PackageError("manifest.json must be a JSON object")
    for key in ("app_id", "app_version", "main_activity", "activities"):
        if key not in doc:
            raise PackageError(f"manifest.json: missing key {key!r}")
    if not isinstance(doc["activities"], list) or not doc["activities"]:
        raise PackageError("manifest.json: activities must be a non-empty list")
    activities = []
    seen = set()
    for entry in doc["activities"]:
        if not isinstance(entry, dict) or not {"name", "layout", "source_unit"} <= set(entry):
            raise PackageError(f"manifest.json: bad activity entry {entry!r}")
        if entry["name"] in seen:
            raise PackageError(f"manifest.json: duplicate activity {entry['name']!r}")
        seen.add(entry["name"])
        activities.append(ActivityDecl(entry["name"], entry["layout"], entry["source_unit"]))
    if doc["main_activity"] not in seen:
        raise PackageError(f"manifest.json: main_activity {doc['main_activity']!r} is not declared")
    return Manifest(
        app_id=str(doc["app_id"]),
        app_version=str(doc["app_version"]),
        main_activity=doc["main_activity"],
        activities=tuple(activities),
    )


def _parse_source_index(doc) -> dict[str, tuple[str, ...]]:
    if not isinstance(doc, dict):
        raise PackageError("source-index.json must be a JSON object")
    index = {}
    for key, units in doc.items():
        if not isinstance(units, list) or not all(isinstance(u, str) for u in units):
            raise PackageError(f"source-index.json: entry {key!r} must map to a list of source units")
        index[str(key)] = tuple(units)
    return index


def _parse_bool(value: str, attr: str, file_name: str) -> bool:
    if value == "true":
        return True
    if value == "false":
        return False
    raise LayoutParseError(f"attribute {attr!r} must be 'true' or 'false', got {value!r}", file_name)


def _component_from_element(el: ET.Element, node_path: str, file_name: str, warnings: list[str]) -> ParsedComponent:
    tag = el.tag
    if tag in _TAG_TYPES:
        ctype = _TAG_TYPES[tag]
    elif tag == "item":
        ctype = ComponentType.MENU_ITEM
    else:
        ctype = ComponentType.GENERIC
        warnings.append(f"{file_name}{node_path}: unknown component tag {tag!r}, treated as generic")

    actions = set()
    for attr, kind in _ACTION_ATTRS:
        default = attr == "clickable" and tag in _CLICKABLE_BY_DEFAULT
        raw = el.get(attr)
        value = default if raw is None else _parse_bool(raw, attr, file_name)
        if value:
            actions.add(kind)
    if ActionKind.TYPE in actions and ctype is not ComponentType.TEXT_FIELD:
        actions.discard(ActionKind.TYPE)
        warnings.append(f"{file_name}{node_path}: 'editable' ignored on non-text_field node")
    if not actions:
        raise LayoutParseError(f"component node {node_path} declares no actions", file_name)

    return ParsedComponent(
        component_type=ctype,
        resource_id=el.get("id", ""),
        default_text=el.get("text", ""),
        allowed_actions=frozenset(actions),
        node_path=node_path,
    )


def _walk(el: ET.Element, prefix: str, file_name: str, out: list[ParsedComponent], warnings: list[str]) -> None:
    for idx, child in enumerate(el):
        path = f"{prefix}/{idx}"
        out.append(_component_from_element(child, path, file_name, warnings))
        _walk(child, path, file_name, out, warnings)


def _parse_definition_file(contents: str, file_name: str, expected_root: str) -> LayoutParse:
    try:
        root = ET.fromstring(contents)
    except ET.ParseError as exc:
        line, col = exc.position
        raise LayoutParseError(str(exc.msg if hasattr(exc, "msg") else exc), file_name, line, col) from exc
    if root.tag != expected_root:
        raise LayoutParseError(f"root element must be <{expected_root}>, got <{root.tag}>", file_name)
    components: list[ParsedComponent] = []
    warnings: list[str] = []
    _walk(root, "", file_name, components, warnings)
    return LayoutParse(components=tuple(components), warnings=tuple(warnings))


def parse_layout_file(contents: str, file_name: str) -> LayoutParse:
    """Parse one layout definition into partial descriptors, node order
    preserved. Malformed markup raises LayoutParseError with line/column."""
    return _parse_definition_file(contents, file_name, "screen")


def parse_menu_file(contents: str, file_name: str) -> LayoutParse:
    """Parse one menu definition; items become MENU_ITEM components."""
    return _parse_definition_file(contents, file_name, "menu")


def build_component_universe(pkg: AppPackage) -> ComponentUniverse:
    """Union of descriptors from every layout and menu file.

    descriptor_id is derived from (file, node path) only, so re-parsing the
    same package yields an identical universe. Menu components attach to
    every declared activity (the manifest ties activities to layouts only).
    """
    layout_activities: dict[str, list[str]] = {}
    for act in pkg.manifest.activities:
        layout_activities.setdefault(act.layout, []).append(act.name)
    all_activities = tuple(sorted(a.name for a in pkg.manifest.activities))

    descriptors: list[ComponentDescriptor] = []
    for name in sorted(pkg.layouts):
        if name not in layout_activities:
            raise PackageError(f"layout {name!r} is not referenced by any manifest activity")
        parsed = parse_layout_file(pkg.layouts[name], name)
        for w in parsed.warnings:
            logger.warning("%s", w)
        activities = tuple(sorted(layout_activities[name]))
        for comp in parsed.components:
            file_ref = f"layouts/{name}"
            descriptors.append(
                ComponentDescriptor(
                    descriptor_id=f"{file_ref}#{comp.node_path}",
                    component_type=comp.component_type,
                    resource_id=comp.resource_id,
                    default_text=comp.default_text,
                    allowed_actions=comp.allowed_actions,
                    containing_activities=activities,
                    layout_origin=LayoutOrigin(file=file_ref, node_path=comp.node_path),
                )
            )
    for name in sorted(pkg.menus):
        parsed = parse_menu_file(pkg.menus[name], name)
        for w in parsed.warnings:
            logger.warning("%s", w)
        for comp in parsed.components:
            file_ref = f"menus/{name}"
            descriptors.append(
                ComponentDescriptor(
                    descriptor_id=f"{file_ref}#{comp.node_path}",
                    component_type=comp.component_type,
                    resource_id=comp.resource_id,
                    default_text=comp.default_text,
                    allowed_actions=comp.allowed_actions,
                    containing_activities=all_activities,
                    layout_origin=LayoutOrigin(file=file_ref, node_path=comp.node_path),
                )
            )

    descriptors.sort(key=lambda d: d.descriptor_id)
    activity_index: dict[str, tuple[str, ...]] = {}
    for act in all_activities:
        ids = [d.descriptor_id for d in descriptors if act in d.containing_activities]
        activity_index[act] = tuple(sorted(ids))
    activity_sources = {a.name: a.source_unit for a in pkg.manifest.activities}

    return ComponentUniverse(
        app_id=pkg.manifest.app_id,
        app_version=pkg.manifest.app_version,
        descriptors=tuple(descriptors),
        activity_index=activity_index,
        activity_sources=activity_sources,
    )


def link_sources(universe: ComponentUniverse, source_index: dict[str, tuple[str, ...]]) -> ComponentUniverse:
    """Fill declaring_sources from the source index: entries for the
    descriptor's resource_id plus those of its containing activities.
    Descriptors with no index entry keep an empty list."""
    linked = []
    for desc in universe.descriptors:
        units: set[str] = set()
        if desc.resource_id:
            units.update(source_index.get(desc.resource_id, ()))
        for act in desc.containing_activities:
            units.update(source_index.get(act, ()))
        linked.append(replace(desc, declaring_sources=tuple(sorted(units))))
    return replace_universe(universe, descriptors=tuple(linked))


def replace_universe(universe: ComponentUniverse, **changes) -> ComponentUniverse:
    return replace(universe, **changes)


def analyze_package(pkg: AppPackage) -> ComponentUniverse:
    """Full static pass: build the universe, then attach traceability links."""
    return link_sources(build_component_universe(pkg), pkg.source_index)
