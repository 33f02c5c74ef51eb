"""Smoke test for the arboreal_py extension.

Exercises every exported function once: tree plumbing, front assembly and
queries, mesh export, tangency rendering, edge signs, and the two
verification entry points.  Exits nonzero on the first broken promise.
"""

import json

import arboreal_py as ap

CHAIN = json.dumps(
    {"root": "0", "edges": [["0", "1"], ["1", "2"]], "signs": {"1-2": 1}}
)


def main():
    relabeled = json.dumps(
        {"root": "a", "edges": [["a", "b"], ["b", "c"]], "signs": {"b-c": 1}}
    )
    assert ap.canonical_form(CHAIN) == ap.canonical_form(relabeled), (
        "canonical form must not depend on vertex labels"
    )

    star = json.dumps({"root": "0", "edges": [["0", "1"], ["0", "2"]], "signs": {}})
    assert ap.automorphism_order(star) == 2, "two bare children swap"

    pruned = json.loads(ap.prune_leaf(CHAIN, "2"))
    assert pruned["edges"] == [["0", "1"]] and pruned["signs"] == {}

    front = ap.build_front(CHAIN)
    pieces = [p["vertex"] for p in json.loads(front)["pieces"]]
    assert pieces == ["1", "2"], f"one piece per non-root vertex, got {pieces}"
    assert ap.membership(front, ["1", "-1"]) == ["2"]
    assert ap.membership(front, ["0", "0"]) == ["1", "2"], "the origin lies on every piece"

    obj = ap.sample_obj(CHAIN, box_bound=1.0, resolution=8)
    lines = obj.splitlines()
    assert sum(l.startswith("o ") for l in lines) == 2, "one named object per piece"
    assert any(l.startswith("v ") for l in lines)

    assert ap.tangency_locus(2, 2, 1, primary=True).strip(), "locus rendering is nonempty"

    flipped = json.dumps(
        {"root": "0", "edges": [["0", "1"], ["1", "2"]], "signs": {"1-2": -1}}
    )
    assert ap.edge_sign(CHAIN, "1", "2") == 1
    assert ap.edge_sign(flipped, "1", "2") == -1, "the metric sign follows the label"

    reports = json.loads(ap.verify_all(3))
    assert len(reports) == 6 and all(r["pass"] for r in reports), reports

    flow = json.loads(ap.flow_report("1/10", steps=200, box_bound=0.2))
    assert flow["pass"], flow

    print("smoke test: all bindings behave and every suite passes")


if __name__ == "__main__":
    main()
