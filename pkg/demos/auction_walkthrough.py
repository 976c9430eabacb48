"""Walk through the bundled auction project: a passing test, its mutant, and a verified refactoring."""

from pathlib import Path

import mbt
from mbt.dsl import parse_refactor
from mbt.project import load_project
from mbt.refactor import run_script
from mbt.testkit import run_test

ASSETS = Path(mbt.__file__).parent / "assets"


def main():
    proj = load_project(ASSETS / "auction")
    result = run_test(proj.model, proj.test("bid_extension"))
    print("-- bid_extension on the original model")
    print("\n".join(result.trace))
    print("\n".join(result.format()))

    mutant = load_project(ASSETS / "auction_mutant")
    print("\n-- the same test on the mutant (closing time never extended)")
    print("\n".join(run_test(mutant.model, mutant.test("bid_extension")).format()))

    for script in ("pull_up_long.rf", "conflict.rf", "broken.rf"):
        steps = parse_refactor((ASSETS / "auction" / "refactor" / script).read_text())
        report = run_script(proj.model, steps, proj.external(), proj.internal())
        print(f"\n-- refactor {script} (exit {report.exit_code})")
        print(report.text(), end="")


if __name__ == "__main__":
    main()
