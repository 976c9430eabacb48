from mbt.dsl import parse_constraint, parse_model
from mbt.ocl import evaluate, typecheck_constraint
from mbt.runtime import instantiate

from conftest import od

COUNTERS = parse_model("class Counter { attr n: Int\n method get(): Int { return self.n }\n"
                       " method bump(): Int { self.n := self.n + 1 return self.n } }\n"
                       "class Clock { method t(): Time { return now() } }")


def test_closing_time_relation_typechecks(auction_model):
    c = parse_constraint("a.closingTime = bid.time + a.extensionTime")
    from mbt.ast import ref
    assert typecheck_constraint(c, auction_model, {"a": ref("Auction"), "bid": ref("Bid")}) == []


def test_bool_vs_int_is_a_type_error(auction_model):
    diags = typecheck_constraint(parse_constraint("context Auction a: a.bidCount = true"), auction_model)
    assert [d.code for d in diags] == ["O001"]


def test_unknown_attribute_names_the_class(auction_model):
    diags = typecheck_constraint(parse_constraint("context Auction a: a.price = 1"), auction_model)
    assert "Auction" in diags[0].message


def test_true_over_empty_store():
    s = instantiate(COUNTERS, od(""))
    assert evaluate(parse_constraint("context Counter c: c.n = 99"), s).holds
    assert evaluate(parse_constraint("true"), s).holds


def test_closing_time_holds(auction_model):
    s = instantiate(auction_model, od("object a: Auction { closingTime = 930, extensionTime = 30 }\n"
                                      "object bid: Bid { time = 900 }"))
    c = parse_constraint("context Auction x: x.closingTime = bid.time + x.extensionTime")
    assert evaluate(c, s).holds


def test_localized_scope():
    s = instantiate(COUNTERS, od("object s: Counter @server { n = 1 }\nobject c: Counter @client { n = 7 }"))
    assert evaluate(parse_constraint("@server context Counter c: c.n = 1"), s).holds
    out = evaluate(parse_constraint("context Counter c: c.n = 1"), s)
    assert out.status == "violated"
    assert out.witness[0] == ("c", "c")
    assert ("c.n", "7") in out.witness


def test_witness_is_first_failure_in_creation_order():
    s = instantiate(COUNTERS, od("object a: Counter { n = 1 }\nobject b: Counter { n = 5 }\nobject d: Counter { n = 6 }"))
    out = evaluate(parse_constraint("context Counter k: k.n < 3"), s)
    assert out.witness[0] == ("k", "b")


def test_unset_slot_is_an_eval_error_not_false():
    s = instantiate(COUNTERS, od("object a: Counter"))
    out = evaluate(parse_constraint("a.n = 1"), s)
    assert out.status == "error" and "unset" in out.reason


def test_query_call_allowed_but_side_effects_are_not():
    s = instantiate(COUNTERS, od("object a: Counter { n = 2 }\nobject k: Clock"))
    before = s.content_hash()
    assert evaluate(parse_constraint("a.get() = 2"), s).holds
    assert evaluate(parse_constraint("a.bump() = 3"), s).status == "error"
    assert evaluate(parse_constraint("k.t() = 0"), s).status == "error"
    assert s.content_hash() == before
    assert s.events() == []


def test_select_keeps_creation_order():
    m = parse_model("class P { attr n: Int }\nclass Bag { }\nassoc items: Bag -> P")
    s = instantiate(m, od("object b: Bag\nobject p: P { n = 2 }\nobject q: P { n = 1 }\nobject r: P { n = 3 }\n"
                          "link items(b, r)\nlink items(b, p)\nlink items(b, q)"))
    assert evaluate(parse_constraint("b.items->select(x | 2 <= x.n) = [r, p]"), s).holds
    assert evaluate(parse_constraint("b.items->exists(x | x.n = 1) and b.items->size() = 3"), s).holds


def test_implies_and_forall_witness():
    m = parse_model("class P { attr n: Int }\nclass Bag { }\nassoc items: Bag -> P")
    s = instantiate(m, od("object b: Bag\nobject p: P { n = 2 }\nobject q: P { n = 9 }\nlink items(b, p)\nlink items(b, q)"))
    out = evaluate(parse_constraint("true implies b.items->forAll(x | x.n <= 5)"), s)
    assert out.status == "violated"
    assert ("x", "q") in out.witness and ("x.n", "9") in out.witness
