"""Analysis and simulation configuration files.

Two carriers for the same key schema: an XML document (human-editable, the
tool's native save format) and a JSON object (the HTTP body shape). Both
require every key to be present and reject unknown keys, so a saved config
always reloads to an identical analysis.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace

from .errors import ConfigFileError
from .pipeline import MODES
from .sim import SimConfig, sim_config_from_mapping


@dataclass(frozen=True)
class AnalysisConfig:
    stopwords_base_path: str = ""  # empty -> shipped list
    stopwords_extra: tuple[str, ...] = ()
    stopwords_ratio_threshold: float = 5.0
    stopwords_min_count: int = 10
    markers_similarity_threshold: float = 0.8
    markers_min_tokens: int = 50
    slices_buckets_per_sequence: int = 1
    terms_mode: str = "bow"
    terms_depth: int = 20
    terms_label_depth: int = 3
    groups_include: tuple[str, ...] = ()  # empty -> all groups
    counts_include_dm: bool = False


# dotted key -> (section, name, kind)
_ANALYSIS_KEYS = {
    "stopwords.base_path": ("stopwords", "base_path", "str"),
    "stopwords.extra": ("stopwords", "extra", "strlist"),
    "stopwords.ratio_threshold": ("stopwords", "ratio_threshold", "float"),
    "stopwords.min_count": ("stopwords", "min_count", "int"),
    "markers.similarity_threshold": ("markers", "similarity_threshold", "float"),
    "markers.min_tokens": ("markers", "min_tokens", "int"),
    "slices.buckets_per_sequence": ("slices", "buckets_per_sequence", "int"),
    "terms.mode": ("terms", "mode", "str"),
    "terms.depth": ("terms", "depth", "int"),
    "terms.label_depth": ("terms", "label_depth", "int"),
    "groups.include": ("groups", "include", "strlist"),
    "counts.include_dm": ("counts", "include_dm", "bool"),
}

_FIELD_BY_KEY = {
    "stopwords.base_path": "stopwords_base_path",
    "stopwords.extra": "stopwords_extra",
    "stopwords.ratio_threshold": "stopwords_ratio_threshold",
    "stopwords.min_count": "stopwords_min_count",
    "markers.similarity_threshold": "markers_similarity_threshold",
    "markers.min_tokens": "markers_min_tokens",
    "slices.buckets_per_sequence": "slices_buckets_per_sequence",
    "terms.mode": "terms_mode",
    "terms.depth": "terms_depth",
    "terms.label_depth": "terms_label_depth",
    "groups.include": "groups_include",
    "counts.include_dm": "counts_include_dm",
}


@dataclass(frozen=True)
class FieldError:
    field: str
    message: str


def validate_analysis_config(cfg: AnalysisConfig) -> list[FieldError]:
    """Domain checks shared by the CLI (exit 2) and the server (422)."""
    errors = []

    def bad(key, msg):
        errors.append(FieldError(field=key, message=msg))

    if cfg.stopwords_ratio_threshold < 1.0:
        bad("stopwords.ratio_threshold", "must be >= 1")
    if cfg.stopwords_min_count < 0:
        bad("stopwords.min_count", "must be >= 0")
    if not (0.0 <= cfg.markers_similarity_threshold <= 1.0):
        bad("markers.similarity_threshold", "must be in [0, 1]")
    if cfg.markers_min_tokens < 1:
        bad("markers.min_tokens", "must be >= 1")
    if cfg.slices_buckets_per_sequence < 1:
        bad("slices.buckets_per_sequence", "must be >= 1")
    if cfg.terms_mode not in MODES:
        bad("terms.mode", f"must be one of {', '.join(MODES)}")
    if cfg.terms_depth < 1:
        bad("terms.depth", "must be >= 1")
    if not (1 <= cfg.terms_label_depth <= cfg.terms_depth):
        bad("terms.label_depth", "must be in [1, terms.depth]")
    return errors


def _coerce(key: str, kind: str, value) -> object:
    try:
        if kind == "str":
            if not isinstance(value, str):
                raise ValueError("expected a string")
            return value
        if kind == "int":
            if isinstance(value, bool):
                raise ValueError("expected an integer")
            return int(value)
        if kind == "float":
            if isinstance(value, bool):
                raise ValueError("expected a number")
            return float(value)
        if kind == "bool":
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            raise ValueError("expected true or false")
        if kind == "strlist":
            if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
                return tuple(value)
            raise ValueError("expected a list of strings")
    except (TypeError, ValueError) as exc:
        raise ConfigFileError(f"config key {key}: {exc}") from exc
    raise ConfigFileError(f"config key {key}: unsupported kind {kind}")


def analysis_config_from_mapping(data: dict) -> AnalysisConfig:
    """Build an AnalysisConfig from nested {section: {name: value}} data.
    Every key must be present; unknown sections or names are rejected."""
    if not isinstance(data, dict):
        raise ConfigFileError("analysis config must be an object of sections")
    known_sections: dict[str, set[str]] = {}
    for key, (section, name, _) in _ANALYSIS_KEYS.items():
        known_sections.setdefault(section, set()).add(name)
    for section in data:
        if section not in known_sections:
            raise ConfigFileError(f"unknown config section {section!r}")
        if not isinstance(data[section], dict):
            raise ConfigFileError(f"config section {section!r} must be an object")
        for name in data[section]:
            if name not in known_sections[section]:
                raise ConfigFileError(f"unknown config key {section}.{name}")
    kwargs = {}
    for key, (section, name, kind) in _ANALYSIS_KEYS.items():
        if section not in data or name not in data[section]:
            # List keys may be omitted (an empty list is not writable as an
            # XML attribute); every scalar key must be present.
            if kind == "strlist" and section in data:
                kwargs[_FIELD_BY_KEY[key]] = ()
                continue
            raise ConfigFileError(f"missing config key {key}")
        kwargs[_FIELD_BY_KEY[key]] = _coerce(key, kind, data[section][name])
    return AnalysisConfig(**kwargs)


def analysis_config_to_mapping(cfg: AnalysisConfig) -> dict:
    out: dict[str, dict] = {}
    for key, (section, name, _) in _ANALYSIS_KEYS.items():
        value = getattr(cfg, _FIELD_BY_KEY[key])
        if isinstance(value, tuple):
            value = list(value)
        out.setdefault(section, {})[name] = value
    return out


def _analysis_from_xml(elem: ET.Element) -> AnalysisConfig:
    data: dict[str, dict] = {}
    for child in elem:
        section = data.setdefault(child.tag, {})
        for name, value in child.attrib.items():
            section[name] = value
        for sub in child:
            section.setdefault(sub.tag, [])
            if not isinstance(section[sub.tag], list):
                raise ConfigFileError(
                    f"config key {child.tag}.{sub.tag} mixes attribute and elements")
            section[sub.tag].append(sub.text or "")
    # Attribute values arrive as strings; _coerce handles them like JSON values.
    return analysis_config_from_mapping(data)


def _analysis_to_xml(cfg: AnalysisConfig) -> ET.Element:
    elem = ET.Element("analysis")
    data = analysis_config_to_mapping(cfg)
    for section in sorted(data):
        child = ET.SubElement(elem, section)
        for name in sorted(data[section]):
            value = data[section][name]
            if isinstance(value, list):
                for item in value:
                    sub = ET.SubElement(child, name)
                    sub.text = item
            else:
                child.set(name, str(value).lower() if isinstance(value, bool)
                          else str(value))
    return elem


@dataclass(frozen=True)
class ConfigFile:
    analysis: AnalysisConfig | None = None
    sim: SimConfig | None = None


def loads_config(text: str) -> ConfigFile:
    """Parse a config document, sniffing XML (leading '<') versus JSON."""
    stripped = text.lstrip()
    if not stripped:
        raise ConfigFileError("empty config file")
    if stripped.startswith("<"):
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            raise ConfigFileError(f"malformed XML config: {exc}") from exc
        if root.tag != "config":
            raise ConfigFileError(f"config root must be <config>, got <{root.tag}>")
        analysis = sim = None
        for child in root:
            if child.tag == "analysis":
                analysis = _analysis_from_xml(child)
            elif child.tag == "sim":
                try:
                    sim = sim_config_from_mapping(dict(child.attrib))
                except Exception as exc:
                    raise ConfigFileError(str(exc)) from exc
            else:
                raise ConfigFileError(f"unknown config section {child.tag!r}")
        return ConfigFile(analysis=analysis, sim=sim)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"malformed JSON config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigFileError("config document must be an object")
    unknown = sorted(set(data) - {"analysis", "sim"})
    if unknown:
        raise ConfigFileError(f"unknown config section(s): {', '.join(unknown)}")
    analysis = analysis_config_from_mapping(data["analysis"]) if "analysis" in data else None
    sim = None
    if "sim" in data:
        try:
            sim = sim_config_from_mapping(data["sim"])
        except Exception as exc:
            raise ConfigFileError(str(exc)) from exc
    return ConfigFile(analysis=analysis, sim=sim)


def load_config(path) -> ConfigFile:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_config(fh.read())


def dumps_config(cfgfile: ConfigFile, fmt: str = "xml") -> str:
    if fmt == "json":
        data = {}
        if cfgfile.analysis is not None:
            data["analysis"] = analysis_config_to_mapping(cfgfile.analysis)
        if cfgfile.sim is not None:
            data["sim"] = cfgfile.sim.to_mapping()
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    root = ET.Element("config")
    if cfgfile.analysis is not None:
        root.append(_analysis_to_xml(cfgfile.analysis))
    if cfgfile.sim is not None:
        sim = ET.SubElement(root, "sim")
        for name, value in cfgfile.sim.to_mapping().items():
            sim.set(name, str(value))
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def save_config(cfgfile: ConfigFile, path, fmt: str | None = None) -> None:
    if fmt is None:
        fmt = "json" if str(path).lower().endswith(".json") else "xml"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_config(cfgfile, fmt))
