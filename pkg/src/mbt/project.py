"""Project loading: a flat ``mbt.project`` manifest plus the units it references."""

from __future__ import annotations

import glob
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .diagnostics import NO_SPAN, Diagnostic, DslError, error
from .diagrams import SequenceDiagram, TestSource
from .dsl import parse_model, parse_od, parse_refactor, parse_sd, parse_test
from .model import ClassModel, check_model
from .testkit import TestCase, check_test, lint_acceptance

MANIFEST = "mbt.project"
UNIT_EXTENSIONS = (".od", ".sd", ".test", ".rf")


class ProjectError(Exception):
    """Engine-level failure: missing manifest or model, unreadable files."""


@dataclass
class Project:
    root: Path
    manifest: dict[str, str]
    model_path: Path
    model: Optional[ClassModel] = None
    units: dict[str, Path] = field(default_factory=dict)
    tests: list[TestCase] = field(default_factory=list)
    test_parts: dict[str, dict[str, Path]] = field(default_factory=dict)
    diagnostics: list[tuple[Path, Diagnostic]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.is_error for _, d in self.diagnostics)

    def test(self, name: str) -> Optional[TestCase]:
        return next((t for t in self.tests if t.name == name), None)

    def external(self) -> list[TestCase]:
        return [t for t in self.tests if t.kind == "external"]

    def internal(self) -> list[TestCase]:
        return [t for t in self.tests if t.kind == "internal"]

    def resolve(self, name: str) -> Path:
        """A file given relative to the project root, or a unit by basename."""
        p = self.root / name
        if p.exists():
            return p
        if name in self.units:
            return self.units[name]
        raise ProjectError(f"no such file: {name}")

    def formatted_diagnostics(self) -> list[str]:
        return [d.format(_display(p)) for p, d in self.diagnostics]


def _display(p: Path) -> str:
    try:
        return os.path.relpath(p)
    except ValueError:
        return str(p)


def read_manifest(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ProjectError(f"{path}: malformed manifest line {raw!r}")
        out[key.strip()] = value.strip()
    return out


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.replace(",", " ").split() if v.strip()]


def load_project(root: str | os.PathLike) -> Project:
    root = Path(root)
    manifest_path = root / MANIFEST if root.is_dir() else root
    if not manifest_path.is_file():
        raise ProjectError(f"no {MANIFEST} in {root}")
    root = manifest_path.parent
    manifest = read_manifest(manifest_path)
    if "model" not in manifest:
        raise ProjectError(f"{manifest_path}: manifest names no model")
    model_path = root / manifest["model"]
    if not model_path.is_file():
        raise ProjectError(f"model file not found: {model_path}")
    proj = Project(root, manifest, model_path)

    try:
        proj.model = parse_model(model_path.read_text(encoding="utf-8"))
    except DslError as err:
        proj.diagnostics.extend((model_path, d) for d in err.diagnostics)
        return proj
    proj.diagnostics.extend((model_path, d) for d in check_model(proj.model))

    for d in _split(manifest.get("units", ".")):
        for ext in UNIT_EXTENSIONS:
            for p in sorted((root / d).glob(f"**/*{ext}")):
                if p.name in proj.units and proj.units[p.name] != p:
                    proj.diagnostics.append((p, error(NO_SPAN, "U001",
                                                      f"unit name {p.name} also used by {proj.units[p.name]}")))
                    continue
                proj.units[p.name] = p

    test_files: list[Path] = []
    for pattern in _split(manifest.get("tests", "**/*.test")):
        for hit in sorted(glob.glob(str(root / pattern), recursive=True)):
            p = Path(hit)
            if p not in test_files:
                test_files.append(p)
    sources: list[tuple[Path, TestSource]] = []
    for p in test_files:
        try:
            sources.append((p, parse_test(p.read_text(encoding="utf-8"), proj.units)))
        except DslError as err:
            proj.diagnostics.extend((p, d) for d in err.diagnostics)

    if "suite" in manifest:
        by_name = {src.name: (p, src) for p, src in sources}
        ordered = []
        for name in _split(manifest["suite"]):
            if name not in by_name:
                proj.diagnostics.append((manifest_path, error(NO_SPAN, "U002", f"suite names unknown test {name}")))
                continue
            ordered.append(by_name[name])
        sources = ordered

    cache: dict[str, object] = {}
    for p, src in sources:
        case = _resolve(proj, p, src, cache)
        if case is not None:
            proj.tests.append(case)
    seen: set[str] = set()
    for t in proj.tests:
        if t.name in seen:
            proj.diagnostics.append((proj.test_parts[t.name]["test"], error(NO_SPAN, "U003", f"duplicate test name {t.name}")))
        seen.add(t.name)
    return proj


def _load_unit(proj: Project, name: str, cache: dict):
    if name in cache:
        return cache[name]
    path = proj.units[name]
    text = path.read_text(encoding="utf-8")
    stem = path.stem
    try:
        if name.endswith(".od"):
            unit = parse_od(text, stem)
        elif name.endswith(".sd"):
            unit = parse_sd(text, stem)
        else:
            raise DslError([error(NO_SPAN, "U004", f"{name} is not a diagram")])
    except DslError as err:
        proj.diagnostics.extend((path, d) for d in err.diagnostics)
        unit = None
    cache[name] = unit
    return unit


def _resolve(proj: Project, path: Path, src: TestSource, cache: dict) -> Optional[TestCase]:
    parts: dict[str, Path] = {"test": path}
    fixture = [_load_unit(proj, n, cache) for n in src.fixture]
    factories = [_load_unit(proj, n, cache) for n in src.factories]
    if isinstance(src.driver, SequenceDiagram):
        driver = src.driver
        parts["driver"] = path
    else:
        driver = _load_unit(proj, src.driver, cache)
        parts["driver"] = proj.units[src.driver]
    oracle = _load_unit(proj, src.oracle, cache) if src.oracle else None
    if src.fixture:
        parts["fixture"] = proj.units[src.fixture[-1]]
    if src.oracle:
        parts["oracle"] = proj.units[src.oracle]
    if any(u is None for u in fixture + factories) or driver is None or (src.oracle and oracle is None):
        return None
    if not isinstance(driver, SequenceDiagram) or any(isinstance(u, SequenceDiagram) for u in fixture + factories):
        proj.diagnostics.append((path, error(src.span, "U004", "fixture and factory units must be .od, the driver .sd")))
        return None
    proj.test_parts[src.name] = parts
    return TestCase(src.name, tuple(fixture), driver, tuple(factories), oracle, src.constraints,
                    src.invariants, src.kind, src.mode)


def check_project(proj: Project) -> list[tuple[Path, Diagnostic]]:
    """All diagnostics: parsing, model checks, test typechecks, lint warnings and refactor scripts."""
    out = list(proj.diagnostics)
    if proj.model is None or any(d.is_error for p, d in out if p == proj.model_path):
        return out
    for t in proj.tests:
        parts = proj.test_parts[t.name]
        for part, d in check_test(proj.model, t):
            out.append((parts.get(part, parts["test"]), d))
        for d in lint_acceptance(t, proj.model):
            out.append((parts["driver"] if d.code in ("L002", "L004") else parts["test"], d))
    for name, p in sorted(proj.units.items()):
        if name.endswith(".rf"):
            try:
                parse_refactor(p.read_text(encoding="utf-8"))
            except DslError as err:
                out.extend((p, d) for d in err.diagnostics)
    return out

