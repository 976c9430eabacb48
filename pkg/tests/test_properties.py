"""Property suites (200 examples each) over generated stores and constraints."""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mbt import ast as A
from mbt.diagrams import Message, ObjectDiagram, ObjectSpec
from mbt.dsl import parse_expr, parse_model, parse_od, print_expr
from mbt.model import subtype_of
from mbt.ocl import evaluate
from mbt.runtime import DRIVER, instantiate
from mbt.testkit import compose_fixture, match_oracle, verify_interactions

from brute import brute_eval, brute_match
from gen import MODEL, LOCATIONS, depth, draw_constraint, draw_fixture, draw_store, oracle_from_store, perturb

PROPS = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@PROPS
@given(st.data())
def test_ocl_purity(data):
    s = draw_store(data)
    c = draw_constraint(data, list(s.names))
    before = s.content_hash()
    first = evaluate(c, s)
    assert s.content_hash() == before
    assert evaluate(c, s) == first


@PROPS
@given(st.data())
def test_ocl_matches_brute_force(data):
    s = draw_store(data)
    c = draw_constraint(data, list(s.names))
    assert depth(c.body) <= 4
    assert evaluate(c, s).status == brute_eval(c, s)


@PROPS
@given(st.data())
def test_localization_refines_global(data):
    s = draw_store(data, allow_unset=False)
    c = draw_constraint(data, list(s.names), localized=None)
    if c.cls is None:
        return
    glob = A.Constraint(c.body, c.cls, c.var, None)
    if evaluate(glob, s).holds:
        for loc in LOCATIONS[1:]:
            assert evaluate(A.Constraint(c.body, c.cls, c.var, loc), s).holds


@PROPS
@given(st.data())
def test_matcher_matches_brute_force(data):
    fixture = draw_fixture(data)
    s = instantiate(MODEL, fixture)
    oracle = oracle_from_store(data, s, fixture)
    if data.draw(st.booleans()):
        oracle = perturb(data, oracle)
    res = match_oracle(s, oracle)
    assert res.ok == brute_match(s, oracle)
    if res.ok:
        assert len(set(res.mapping.values())) == len(res.mapping)
        for o in oracle.objects:
            if not o.anonymous and o.name in s.names:
                assert res.mapping[o.name] == s.names[o.name]


@PROPS
@given(st.data())
def test_oracle_monotone_under_deletion(data):
    fixture = draw_fixture(data)
    s = instantiate(MODEL, fixture)
    oracle = oracle_from_store(data, s, fixture)
    assert match_oracle(s, oracle).ok
    objs = list(oracle.objects)
    if not objs:
        return
    i = data.draw(st.integers(0, len(objs) - 1))
    o = objs[i]
    if o.slots and data.draw(st.booleans()):
        j = data.draw(st.integers(0, len(o.slots) - 1))
        objs[i] = ObjectSpec(o.name, o.cls, o.location, o.slots[:j] + o.slots[j + 1:], o.factory_for, o.anonymous)
        links = oracle.links
    elif o.anonymous:
        del objs[i]
        links = tuple(l for l in oracle.links if o.name not in (l.source, l.target))
    else:
        return
    assert match_oracle(s, ObjectDiagram("smaller", tuple(objs), links)).ok


def _trace_store(data):
    """Run a random driver schedule over a small linked-list model; return store and its events."""
    s = draw_store(data, allow_unset=False)
    names = list(s.names)
    for _ in range(data.draw(st.integers(0, 5))):
        if not names:
            break
        s.dispatch(DRIVER, s.ref(data.draw(st.sampled_from(names))), "twice")
    return s, s.events()


@PROPS
@given(st.data())
def test_exact_implies_subsequence(data):
    s, events = _trace_store(data)
    expected = [Message(DRIVER, ev.callee, ev.method, (), A.Lit(ev.ret, A.INT) if data.draw(st.booleans()) else None)
                for ev in events]
    if verify_interactions(expected, s, "exact") == []:
        assert verify_interactions(expected, s, "subsequence") == []
    keep = [m for m in expected if data.draw(st.booleans())]
    assert verify_interactions(keep, s, "subsequence") == []


@PROPS
@given(st.data())
def test_compose_laws(data):
    base = draw_fixture(data)
    assert compose_fixture(base, []) == base
    assert compose_fixture(base, [ObjectDiagram("empty")]) == base
    if not base.objects:
        return
    o = data.draw(st.sampled_from(base.objects))
    v = data.draw(st.integers(-9, 9))
    delta = ObjectDiagram("d", (ObjectSpec(o.name, o.cls, None, (("n", A.Lit(v, A.INT)),)),))
    out = compose_fixture(base, [delta])
    assert [x.name for x in out.objects] == [x.name for x in base.objects]
    for before, after in zip(base.objects, out.objects):
        if before.name != o.name:
            assert after == before
        else:
            assert after.slot("n") == A.Lit(v, A.INT)
            assert {k for k, _ in after.slots} == {k for k, _ in before.slots} | {"n"}
            assert all(after.slot(k) == e for k, e in before.slots if k != "n")
    # later deltas win
    w = v + 1
    again = compose_fixture(base, [delta, ObjectDiagram("d2", (ObjectSpec(o.name, o.cls, None, (("n", A.Lit(w, A.INT)),)),))])
    assert next(x for x in again.objects if x.name == o.name).slot("n") == A.Lit(w, A.INT)


@PROPS
@given(st.data())
def test_expression_round_trip(data):
    s = draw_store(data)
    c = draw_constraint(data, list(s.names) or ["o0"])
    assert parse_expr(print_expr(c.body)) == c.body


@PROPS
@given(st.data())
def test_runtime_determinism(data):
    fixture = draw_fixture(data, allow_unset=False)
    picks = [data.draw(st.integers(0, 5)) for _ in range(4)]

    def run():
        s = instantiate(MODEL, fixture)
        names = list(s.names)
        for k in picks:
            if names:
                s.dispatch(DRIVER, s.ref(names[k % len(names)]), "twice")
        return s.content_hash(), s.format_trace()

    assert run() == run()


@PROPS
@given(st.data())
def test_subtype_is_a_partial_order(data):
    names = ["Item", "Special"]
    a, b, c = (data.draw(st.sampled_from(names)) for _ in range(3))
    def sub(x, y):
        return subtype_of(MODEL, x, y)
    assert sub(a, a)
    if sub(a, b) and sub(b, a):
        assert a == b
    if sub(a, b) and sub(b, c):
        assert sub(a, c)


@PROPS
@given(st.data())
def test_location_statics_are_isolated(data):
    m = parse_model("class Log { static lines: seq(String)\n"
                    " method write(s: String): Int { Log::lines := Log::lines->including(s) return Log::lines->size() } }")
    locs = ["a", "b", "c"]
    writes = data.draw(st.lists(st.sampled_from(locs), max_size=12))
    text = "\n".join(f"object {l}: Log @{l}" for l in locs)
    s = instantiate(m, parse_od(text, "f"))
    for i, l in enumerate(writes):
        s.dispatch(DRIVER, s.ref(l), "write", (f"w{i}",))
    for l in locs:
        expect = tuple(f"w{i}" for i, w in enumerate(writes) if w == l)
        assert s.static_read("Log", "lines", l) == expect
