import pytest

from mbt.dsl import parse_model
from mbt.model import MemberNotFound, UnknownClass, check_model, lookup_member, subtype_of
from mbt.refactor import Transformation, apply


def codes(m):
    return [d.code for d in check_model(m)]


def test_bundled_model_is_well_formed(auction_model):
    assert check_model(auction_model) == []


def test_inheritance_cycle_reported_once():
    m = parse_model("class A extends B { }\nclass B extends A { }")
    diags = check_model(m)
    assert [d.code for d in diags] == ["M001"]
    assert "inheritance cycle" in diags[0].message


def test_attribute_shadowing():
    m = parse_model("class P { attr name: String }\nclass Q extends P { attr name: String }")
    diags = check_model(m)
    assert [d.code for d in diags] == ["M002"]
    assert "shadowing" in diags[0].message


def test_override_signature_must_match():
    m = parse_model("class P { method f(x: Int): Int { return x } }\n"
                    "class Q extends P { method f(x: Bool): Int { return 1 } }")
    assert codes(m) == ["M003"]


def test_unknown_type():
    assert codes(parse_model("class P { attr x: Nope }")) == ["M004"]


def test_missing_return_path():
    m = parse_model("class P { method f(b: Bool): Int { if b { return 1 } } }")
    assert codes(m) == ["M008"]


def test_body_type_error():
    m = parse_model('class P { attr n: Int\n method f() { self.n := "x" } }')
    assert codes(m) == ["M009"]


def test_check_is_deterministic_and_ordered():
    src = "class Z { attr x: Nope }\nclass A { attr y: Nada\n attr y: Int }"
    first = [d.format() for d in check_model(parse_model(src))]
    assert first == [d.format() for d in check_model(parse_model(src))]
    assert [line.rsplit(" ", 1)[1] for line in first] == ["A.y", "A.y", "Z.x"]


def test_lookup_walks_up(auction_model):
    r = lookup_member(auction_model, "Bidder", "getName")
    assert r.defining_class == "Person" and r.kind == "method"


def test_lookup_local_member(auction_model):
    assert lookup_member(auction_model, "Person", "name").defining_class == "Person"


def test_lookup_unknown_member(auction_model):
    with pytest.raises(MemberNotFound):
        lookup_member(auction_model, "Bidder", "nothing")


def test_lookup_after_pull_up(auction_model):
    before = lookup_member(auction_model, "Bidder", "long")
    m2 = apply(auction_model, Transformation("pull-up-attribute", "Bidder", "long"))
    after = lookup_member(m2, "Bidder", "long")
    assert after.defining_class == "Person"
    assert after.member == before.member


def test_subtype_basics(auction_model):
    assert subtype_of(auction_model, "Bidder", "Bidder")
    assert subtype_of(auction_model, "Bidder", "Person")
    assert not subtype_of(auction_model, "Bidder", "Guest")
    assert not subtype_of(auction_model, "Person", "Bidder")
    with pytest.raises(UnknownClass):
        subtype_of(auction_model, "Bidder", "Martian")
