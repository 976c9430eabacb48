import pytest

from mbt import ast as A
from mbt.diagnostics import DslError
from mbt.diagrams import Checkpoint, TimeStamp
from mbt.dsl import (
    parse_constraint, parse_expr, parse_model, parse_od, parse_refactor, parse_sd, parse_test,
    print_model, print_od, print_sd, print_test,
)

from conftest import AUCTION


def codes(err: DslError):
    return [d.code for d in err.diagnostics]


def test_single_class_with_attribute():
    m = parse_model("class Person { attr long: Int }")
    assert [c.name for c in m.classes] == ["Person"]
    assert m.classes[0].attributes[0].name == "long"
    assert m.classes[0].attributes[0].type == A.INT


def test_unterminated_block_points_at_opening_brace():
    with pytest.raises(DslError) as e:
        parse_model("model M\n\nclass Person {\n  attr name: String\n")
    d = e.value.diagnostics[0]
    assert d.code == "P002"
    assert d.span.line == 3


def test_bundled_model_parses_and_round_trips(auction_model):
    again = parse_model(print_model(auction_model))
    assert again == auction_model


def test_od_location_tag():
    od = parse_od("object a: Auction @server { extensionTime = 30 }")
    assert len(od.objects) == 1
    assert od.objects[0].location == "server"
    assert od.objects[0].slot("extensionTime") == A.Lit(30, A.INT)


def test_od_link():
    od = parse_od("object a: Auction\nobject p1: Person\nlink participants(a, p1)")
    assert len(od.objects) == 2 and len(od.links) == 1


def test_factory_script_keeps_source_order():
    od = parse_od((AUCTION / "fixtures" / "persons.od").read_text())
    assert [o.name for o in od.factory_objects] == ["p1", "p2", "p3"]
    assert all(o.factory_for == "Person" for o in od.factory_objects)


def test_duplicate_object_names_rejected():
    with pytest.raises(DslError) as e:
        parse_od("object a: A\nobject a: A")
    assert codes(e.value) == ["P005"]


def test_sd_message_and_checkpoint():
    sd = parse_sd("lifelines a, bid\ntest -> a.handleBid(bid)\ncheck: a.closingTime = bid.time + a.extensionTime")
    assert len(sd.messages) == 1
    assert sum(isinstance(s, Checkpoint) for s in sd.steps) == 1


def test_sd_time_stamp():
    sd = parse_sd("lifelines a\ndriver -> a.poll() @time(500)")
    assert sd.messages[0].time == 500
    sd = parse_sd("lifelines a\n@time(500)\ndriver -> a.poll()")
    assert sd.steps[0] == TimeStamp(500)


def test_empty_sd_has_no_trigger():
    with pytest.raises(DslError) as e:
        parse_sd("")
    assert "driver has no trigger" in e.value.diagnostics[0].message


def test_sd_undeclared_lifeline():
    with pytest.raises(DslError) as e:
        parse_sd("lifelines a\ndriver -> b.f()")
    assert "P006" in codes(e.value)


def test_checkpoint_variable_collision():
    with pytest.raises(DslError) as e:
        parse_sd("lifelines a\ndriver -> a.f()\ncheck: context Auction a: a.bestBid = 1")
    assert "P008" in codes(e.value)


def test_stamp_on_expectation_rejected():
    with pytest.raises(DslError) as e:
        parse_sd("lifelines a, b\ndriver -> a.f()\na -> b.g() @time(3)")
    assert "P013" in codes(e.value)


def test_composed_fixture_reference():
    t = parse_test("test t\nfixture auction_base.od + one_bid.od\ndriver bid_extension.sd")
    assert t.fixture == ("auction_base.od", "one_bid.od")


def test_oracle_od_without_ocl_is_valid():
    t = parse_test("test t\nfixture f.od\ndriver d.sd\noracle o.od")
    assert t.oracle == "o.od" and t.constraints == ()


def test_unknown_sd_reference():
    with pytest.raises(DslError) as e:
        parse_test("test t\nfixture f.od\ndriver missing.sd", available={"f.od"})
    assert codes(e.value) == ["P011"]


def test_inline_driver_call():
    t = parse_test("test t\nfixture f.od\ndriver call @time(900) a.handleBid(bid) = true")
    msg = t.driver.messages[0]
    assert (msg.target, msg.method, msg.time) == ("a", "handleBid", 900)
    assert msg.returns == A.Lit(True, A.BOOL)


def test_refactor_script():
    steps = parse_refactor("pull-up-attr Bidder.long\npull-up-method Bidder.getLong\n")
    assert [(s.kind, s.cls, s.member) for s in steps] == [
        ("pull-up-attribute", "Bidder", "long"), ("pull-up-method-override", "Bidder", "getLong")]


def test_refactor_unsupported_and_unknown_rules():
    with pytest.raises(DslError) as e:
        parse_refactor("pull-up-method-variant3 Bidder.getLong")
    assert e.value.diagnostics[0].message.startswith("unsupported rule")
    with pytest.raises(DslError) as e:
        parse_refactor("rename Bidder.getLong")
    assert codes(e.value) == ["P009"]


def test_precedence():
    e = parse_expr("a or b and not c implies d")
    assert isinstance(e, A.Binary) and e.op == "implies"
    assert e.left.op == "or" and e.left.right.op == "and"
    assert parse_expr("1 + 2 * 3") == A.Binary("+", A.Lit(1, A.INT), A.Binary("*", A.Lit(2, A.INT), A.Lit(3, A.INT)))


def test_greater_than_is_not_in_the_language():
    with pytest.raises(DslError):
        parse_expr("a > b")


def test_localized_constraint():
    c = parse_constraint("@server context Counter c: c.n = 1")
    assert (c.location, c.cls, c.var) == ("server", "Counter", "c")


def test_diagnostics_sorted_and_formatted():
    with pytest.raises(DslError) as e:
        parse_sd("lifelines a\ndriver -> x.f()\ndriver -> y.g()")
    lines = [(d.span.line, d.span.column) for d in e.value.diagnostics]
    assert lines == sorted(lines)
    assert e.value.diagnostics[0].format("d.sd") == "d.sd:2:1: error[P006]: undeclared lifeline x"


def test_invalid_character():
    with pytest.raises(DslError) as e:
        parse_model("class A { attr x: Int } $")
    assert codes(e.value) == ["P004"]


@pytest.mark.parametrize("unit", sorted((AUCTION / "fixtures").glob("*.od")) + sorted((AUCTION / "oracles").glob("*.od")),
                         ids=lambda p: p.name)
def test_shipped_od_round_trip(unit):
    od = parse_od(unit.read_text(), unit.stem)
    assert parse_od(print_od(od), unit.stem) == od


@pytest.mark.parametrize("unit", sorted((AUCTION / "drivers").glob("*.sd")), ids=lambda p: p.name)
def test_shipped_sd_round_trip(unit):
    sd = parse_sd(unit.read_text(), unit.stem)
    assert parse_sd(print_sd(sd), unit.stem) == sd


@pytest.mark.parametrize("unit", sorted((AUCTION / "tests").glob("*.test")), ids=lambda p: p.name)
def test_shipped_test_round_trip(unit):
    t = parse_test(unit.read_text())
    assert parse_test(print_test(t)) == t
