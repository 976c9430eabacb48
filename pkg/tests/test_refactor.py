import pytest

from mbt.dsl import parse_model, parse_refactor, print_model
from mbt.model import MemberNotFound, check_model
from mbt.refactor import Transformation, RefactorError, apply, check_conditions, run_script, verify_invariance

from conftest import AUCTION

SMALL = parse_model("""
class Person { attr name: String }
class Bidder extends Person {
  attr long: Int
  method getLong(): Int { return self.long }
}
class Guest extends Person { attr email: String }
class Seller extends Person { method getLong(): Int { return self.long } }
""")


def script(name):
    return parse_refactor((AUCTION / "refactor" / name).read_text())


def test_pull_up_attribute_moves_declaration():
    m2 = apply(SMALL, Transformation("pull-up-attribute", "Bidder", "long"))
    assert m2.cls("Person").attribute("long") is not None
    assert m2.cls("Bidder").attribute("long") is None
    # the original model is untouched
    assert SMALL.cls("Bidder").attribute("long") is not None


def test_pull_up_method_removes_identical_siblings():
    m = apply(SMALL, Transformation("pull-up-attribute", "Bidder", "long"))
    m2 = apply(m, Transformation("pull-up-method-override", "Bidder", "getLong"))
    assert m2.cls("Person").method("getLong") is not None
    assert m2.cls("Bidder").method("getLong") is None
    assert m2.cls("Seller").method("getLong") is None
    assert [d for d in check_model(m2) if d.is_error] == []


def test_method_pull_up_needs_valid_body_in_superclass():
    failures = check_conditions(SMALL, Transformation("pull-up-method-override", "Bidder", "getLong"))
    assert failures and "not valid in Person" in failures[0]


def test_pull_up_signature_adds_abstract_copy():
    m2 = apply(SMALL, Transformation("pull-up-signature", "Bidder", "getLong"))
    assert m2.cls("Person").method("getLong").body is None
    assert m2.cls("Bidder").method("getLong").body is not None


def test_sibling_attribute_conflict():
    m = parse_model("class P { }\nclass A extends P { attr e: String }\nclass B extends P { attr e: String }")
    assert check_conditions(m, Transformation("pull-up-attribute", "A", "e")) == ["B already declares attribute e"]
    with pytest.raises(RefactorError):
        apply(m, Transformation("pull-up-attribute", "A", "e"))


def test_unknown_member():
    with pytest.raises(MemberNotFound):
        check_conditions(SMALL, Transformation("pull-up-attribute", "Bidder", "nope"))


def test_no_superclass():
    assert check_conditions(SMALL, Transformation("pull-up-attribute", "Person", "name")) == ["Person has no superclass"]


def test_rejection_leaves_model_unchanged_and_is_idempotent(auction_model, project):
    before = print_model(auction_model)
    r1 = run_script(auction_model, script("conflict.rf"), project.external())
    r2 = run_script(auction_model, script("conflict.rf"), project.external())
    assert print_model(auction_model) == before
    assert r1.exit_code == r2.exit_code == 3
    assert r1.text() == r2.text()
    assert "Guest already declares attribute email" in r1.text()


def test_pull_up_script_is_invariant(auction_model, project):
    rep = run_script(auction_model, script("pull_up_long.rf"), project.external(), project.internal(), strict=True)
    assert rep.exit_code == 0, rep.text()
    assert rep.invariance.before.verdicts() == rep.invariance.after.verdicts()
    # everything other than the moved members is preserved
    m2 = rep.model
    for c in auction_model.classes:
        if c.name not in ("Person", "Bidder"):
            assert m2.cls(c.name) == c


def test_broken_script_reports_changed_verdicts(auction_model, project):
    rep = run_script(auction_model, script("broken.rf"), project.external())
    assert rep.exit_code == 4
    assert rep.invariance.changed
    assert all(b == "pass" and a == "fail" for _, b, a in rep.invariance.changed)


def test_output_model_reparses_and_is_well_formed(auction_model, project):
    rep = run_script(auction_model, script("pull_up_long.rf"), project.external())
    again = parse_model(print_model(rep.model))
    assert again == rep.model
    assert [d for d in check_model(again) if d.is_error] == []


def test_empty_suite_warns():
    inv = verify_invariance(SMALL, SMALL, [])
    assert inv.invariant and inv.warnings == ("no observations: the external suite is empty",)
