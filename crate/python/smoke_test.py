"""Smoke test for the tg_py bindings.

Build and install first:

    pip install --no-build-isolation ./crates/py
    python3 python/smoke_test.py
"""

import pathlib
import sys

import tg_py

EXAMPLES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "cli" / "examples"


def load(name):
    return tg_py.Program((EXAMPLES / name).read_text())


def main():
    s1 = load("sigma1.tgd")
    assert s1.facts == ["t(c1,c2)", "u(c1,c2)"], s1.facts
    assert len(s1.rules) == 2 and len(s1.queries) == 1

    v = tg_py.check(s1)
    assert v["kind"] == "verdict" and v["outcome"] == "member", v
    for cls in ("wa", "guarded", "sticky"):
        assert tg_py.check(s1, cls)["outcome"] == "non_member", cls

    w = tg_py.check(load("sigma2.tgd"))["witness"]
    assert w["guarded"] is False and w["c"] == w["a_prime"], w
    assert tg_py.check(load("sigma3.tgd"))["outcome"] == "non_member"
    assert tg_py.check(s1, max_rounds=1)["outcome"] == "unknown"

    s2q = load("sigma2_q.tgd")
    c = tg_py.chase(s2q, 3)
    assert c["depth"] == 3 and any(a["atom"].startswith("t(c2,_:n") for a in c["atoms"])
    for depth in range(7):
        assert tg_py.ask(s2q, depth)["answer"] == "no", depth

    e = tg_py.explain(load("sigma3.tgd"))
    assert e["pairs"] and e["null_sets"] and e["verdict"]["outcome"] == "non_member"

    # Round trip through the serializer.
    assert str(tg_py.Program(str(s1))) == str(s1)

    try:
        tg_py.Program("t(X,Y) ->")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")
    try:
        tg_py.ask(load("sigma2.tgd"), 1)
    except IndexError:
        pass
    else:
        raise AssertionError("missing query not reported")

    print("python smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
