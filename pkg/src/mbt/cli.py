"""Command line: ``mbt check|run|refactor|trace <project>``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .diagnostics import DslError
from .dsl import parse_refactor, print_model
from .project import Project, ProjectError, check_project, load_project
from .refactor import run_script
from .runtime import FixtureError
from .testkit import run_suite, run_test

EXIT_OK, EXIT_ENGINE, EXIT_FAIL, EXIT_REJECTED, EXIT_BROKEN = 0, 1, 2, 3, 4


def _load_checked(root: str, show_warnings: bool = False) -> tuple[Optional[Project], int]:
    """Load and check a project; print diagnostics; return (project, 0) when usable."""
    try:
        proj = load_project(root)
    except (ProjectError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return None, EXIT_ENGINE
    diags = check_project(proj)
    failed = any(d.is_error for _, d in diags)
    shown = [(p, d) for p, d in diags if show_warnings or d.is_error]
    if shown:
        view = Project(proj.root, proj.manifest, proj.model_path, diagnostics=shown)
        for line in view.formatted_diagnostics():
            print(line, file=sys.stdout if show_warnings else sys.stderr)
    return (None, EXIT_ENGINE) if failed else (proj, EXIT_OK)


def cmd_check(args) -> int:
    _, code = _load_checked(args.project, show_warnings=True)
    return code


def cmd_run(args) -> int:
    proj, code = _load_checked(args.project)
    if proj is None:
        return code
    selection = "external" if args.external_only else (args.suite or "all")
    try:
        report = run_suite(proj.model, proj.tests, selection)
    except FixtureError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ENGINE
    text = report.text()
    sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    return EXIT_OK if report.failed == 0 else EXIT_FAIL


def cmd_refactor(args) -> int:
    proj, code = _load_checked(args.project)
    if proj is None:
        return code
    try:
        script = proj.resolve(args.script)
        steps = parse_refactor(script.read_text(encoding="utf-8"))
    except ProjectError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ENGINE
    except DslError as err:
        for d in err.diagnostics:
            print(d.format(str(script)), file=sys.stderr)
        return EXIT_ENGINE
    report = run_script(proj.model, steps, proj.external(), proj.internal(),
                        verify=args.verify, strict=args.strict)
    sys.stdout.write(report.text())
    if report.model is not None:
        out = Path(args.out) if args.out else proj.model_path.with_suffix(".out.mtk")
        out.write_text(print_model(report.model), encoding="utf-8")
    return report.exit_code


def cmd_trace(args) -> int:
    proj, code = _load_checked(args.project)
    if proj is None:
        return code
    t = proj.test(args.test)
    if t is None:
        print(f"error: unknown test {args.test}", file=sys.stderr)
        return EXIT_ENGINE
    result = run_test(proj.model, t)
    for line in result.trace:
        print(line)
    for line in result.format():
        print(line)
    return EXIT_OK if result.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mbt", description="Model-based testing engine.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and typecheck a project")
    p.add_argument("project")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="run the test suite")
    p.add_argument("project")
    p.add_argument("--suite", help="all, external, internal or a test-name glob")
    p.add_argument("--external-only", action="store_true")
    p.add_argument("--report", help="also write the report to this file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("refactor", help="apply a refactoring script")
    p.add_argument("project")
    p.add_argument("script", help="script path relative to the project, or a unit name")
    p.add_argument("--verify", action="store_true", help="compare external verdicts before and after")
    p.add_argument("--strict", action="store_true", help="also compare published-method trace projections")
    p.add_argument("--out", help="where to write the transformed model (default <model>.out.mtk)")
    p.set_defaults(func=cmd_refactor)

    p = sub.add_parser("trace", help="run one test and print its interaction trace")
    p.add_argument("project")
    p.add_argument("--test", required=True)
    p.set_defaults(func=cmd_trace)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
