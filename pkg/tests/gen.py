"""Hypothesis-driven generators for small stores, constraints and oracle diagrams."""

from hypothesis import strategies as st

from mbt import ast as A
from mbt.diagrams import LinkSpec, ObjectDiagram, ObjectSpec
from mbt.dsl import parse_model
from mbt.runtime import instantiate

MODEL = parse_model("""
class Item {
  attr n: Int
  attr flag: Bool
  attr next: Item
  method twice(): Int { return self.n + self.n }
}
class Special extends Item { attr tag: String }
assoc kids: Item -> Item
""")

LOCATIONS = (None, "a", "b")


def lit(v):
    t = A.BOOL if isinstance(v, bool) else A.STRING if isinstance(v, str) else A.INT
    return A.Lit(v, t)


def draw_fixture(data, max_objects=6, allow_unset=True) -> ObjectDiagram:
    k = data.draw(st.integers(0, max_objects), label="objects")
    names = [f"o{i}" for i in range(k)]
    objects = []
    for name in names:
        cls = data.draw(st.sampled_from(["Item", "Special"]))
        loc = data.draw(st.sampled_from(LOCATIONS))
        slots = []
        if not allow_unset or data.draw(st.integers(0, 5)) > 0:
            slots.append(("n", lit(data.draw(st.integers(-3, 3)))))
        slots.append(("flag", lit(data.draw(st.booleans()))))
        if not allow_unset or data.draw(st.integers(0, 5)) > 0:
            target = data.draw(st.sampled_from(names + [None]))
            slots.append(("next", A.Var(target) if target else A.Lit(None, A.NULL)))
        if cls == "Special":
            slots.append(("tag", lit(data.draw(st.sampled_from(["x", "y"])))))
        objects.append(ObjectSpec(name, cls, loc, tuple(slots)))
    links = []
    if names:
        for _ in range(data.draw(st.integers(0, 2 * k))):
            a = data.draw(st.sampled_from(names))
            b = data.draw(st.sampled_from(names))
            links.append(LinkSpec("kids", a, b))
    return ObjectDiagram("gen", tuple(objects), tuple(links))


def draw_store(data, **kw):
    return instantiate(MODEL, draw_fixture(data, **kw))


class ExprGen:
    """Typed random expressions over Item objects; an expression drawn at level d has depth <= d + 1."""

    def __init__(self, data, names):
        self.data = data
        self.names = list(names)
        self.fresh = 0

    def pick(self, options):
        return self.data.draw(st.sampled_from(options))

    def item(self, d, scope):
        if d > 0 and self.pick([True, False]):
            return A.Nav(self.item(d - 1, scope), "next")
        return A.Var(self.pick(scope))

    def int_(self, d, scope):
        opts = ["lit"]
        if scope and d >= 1:
            opts += ["nav", "call"]
        if scope and d >= 2:
            opts += ["size"]
        if d >= 1:
            opts += ["arith"]
        k = self.pick(opts)
        if k == "lit":
            return lit(self.data.draw(st.integers(-3, 3)))
        if k == "nav":
            return A.Nav(self.item(d - 1, scope), "n")
        if k == "size":
            return A.CollOp(A.Nav(self.item(d - 2, scope), "kids"), "size", ())
        if k == "call":
            return A.Call(self.item(d - 1, scope), "twice", ())
        return A.Binary(self.pick(["+", "-", "*"]), self.int_(d - 1, scope), self.int_(d - 1, scope))

    def bool_(self, d, scope):
        opts = ["lit"]
        if d >= 1:
            opts += ["cmp", "logic", "not"]
            if scope:
                opts += ["flag"]
        if scope and d >= 2:
            opts += ["includes", "iter"]
        if scope and d >= 3:
            opts += ["select"]
        k = self.pick(opts)
        if k == "lit":
            return lit(self.data.draw(st.booleans()))
        if k == "flag":
            return A.Nav(self.item(d - 1, scope), "flag")
        if k == "cmp":
            return A.Binary(self.pick(["=", "<>", "<", "<="]), self.int_(d - 1, scope), self.int_(d - 1, scope))
        if k == "logic":
            return A.Binary(self.pick(["and", "or", "implies"]), self.bool_(d - 1, scope), self.bool_(d - 1, scope))
        if k == "not":
            return A.Unary("not", self.bool_(d - 1, scope))
        kids = A.Nav(self.item(0, scope), "kids")
        if k == "includes":
            return A.CollOp(kids, "includes", (self.item(0, scope),))
        var = f"v{self.fresh}"
        self.fresh += 1
        if k == "select":
            body = self.bool_(d - 2, scope + [var])
            return A.CollOp(A.Iterate(kids, "select", var, body), self.pick(["isEmpty", "notEmpty"]), ())
        return A.Iterate(kids, self.pick(["forAll", "exists"]), var, self.bool_(d - 1, scope + [var]))


def depth(e) -> int:
    kids = []
    if isinstance(e, A.Nav):
        kids = [e.target]
    elif isinstance(e, A.Call):
        kids = [e.target, *e.args]
    elif isinstance(e, A.Binary):
        kids = [e.left, e.right]
    elif isinstance(e, A.Unary):
        kids = [e.operand]
    elif isinstance(e, A.CollOp):
        kids = [e.target, *e.args]
    elif isinstance(e, A.Iterate):
        kids = [e.target, e.body]
    return 1 + max((depth(k) for k in kids), default=0)


def draw_constraint(data, names, max_depth=4, localized=None):
    """A global constraint over fixture names, or a class context over Item."""
    g = ExprGen(data, names)
    form = data.draw(st.sampled_from(["global", "context", "self"] if names else ["context", "self"]))
    loc = localized if localized is not None else data.draw(st.sampled_from(LOCATIONS))
    if form == "global":
        return A.Constraint(g.bool_(max_depth - 1, list(names)))
    if form == "context":
        return A.Constraint(g.bool_(max_depth - 1, list(names) + ["x"]), "Item", "x", loc)
    # self-context: rewrite uses of "me" into self
    body = g.bool_(max_depth - 1, list(names) + ["me"])
    return A.Constraint(_to_self(body), data.draw(st.sampled_from(["Item", "Special"])), None, loc)


def _to_self(e):
    if isinstance(e, A.Var):
        return A.SelfRef() if e.name == "me" else e
    if isinstance(e, A.Nav):
        return A.Nav(_to_self(e.target), e.name)
    if isinstance(e, A.Call):
        return A.Call(_to_self(e.target), e.method, tuple(_to_self(a) for a in e.args))
    if isinstance(e, A.Binary):
        return A.Binary(e.op, _to_self(e.left), _to_self(e.right))
    if isinstance(e, A.Unary):
        return A.Unary(e.op, _to_self(e.operand))
    if isinstance(e, A.CollOp):
        return A.CollOp(_to_self(e.target), e.op, tuple(_to_self(a) for a in e.args))
    if isinstance(e, A.Iterate):
        return A.Iterate(_to_self(e.target), e.op, e.var, _to_self(e.body))
    return e


def oracle_from_store(data, store, fixture: ObjectDiagram) -> ObjectDiagram:
    """An oracle OD copied from (part of) the final store: always matchable."""
    objects = []
    for spec in fixture.objects:
        if not data.draw(st.booleans()):
            continue
        anonymous = data.draw(st.booleans())
        slots = tuple(s for s in spec.slots if data.draw(st.booleans()))
        name = f"_{spec.name}" if anonymous else spec.name
        objects.append(ObjectSpec(name, spec.cls, None, slots, None, anonymous))
    kept = {o.name for o in objects}
    links = tuple(l for l in fixture.links
                  if l.source in kept and l.target in kept and data.draw(st.booleans()))
    # slots naming other objects stay meaningful through store names
    return ObjectDiagram("oracle", tuple(objects), links)


def perturb(data, oracle: ObjectDiagram) -> ObjectDiagram:
    """Randomly change one listed value so the oracle may stop matching."""
    candidates = [(i, j) for i, o in enumerate(oracle.objects) for j, (slot, _) in enumerate(o.slots)
                  if slot in ("n", "flag")]
    if not candidates:
        return oracle
    i, j = data.draw(st.sampled_from(candidates))
    o = oracle.objects[i]
    slot, _ = o.slots[j]
    new = lit(data.draw(st.integers(-3, 3))) if slot == "n" else lit(data.draw(st.booleans()))
    slots = o.slots[:j] + ((slot, new),) + o.slots[j + 1:]
    objs = oracle.objects[:i] + (ObjectSpec(o.name, o.cls, o.location, slots, o.factory_for, o.anonymous),) \
        + oracle.objects[i + 1:]
    return ObjectDiagram(oracle.name, objs, oracle.links, oracle.statics)
