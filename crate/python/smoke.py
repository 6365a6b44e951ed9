"""Smoke test for the relwork_py extension module.

Build and install first:  maturin develop -m crates/py/Cargo.toml
"""

import json

import relwork_py as rw

E = [{"name": "E", "arity": 2}]


def graph(n, edges):
    arcs = [[str(x), str(y)] for x, y in edges] + [[str(y), str(x)] for x, y in edges]
    return rw.Structure.from_json(
        json.dumps({"signature": E, "elements": [str(i) for i in range(n)], "relations": {"E": arcs}})
    )


def main():
    k2 = graph(2, [(0, 1)])
    k3 = graph(3, [(0, 1), (1, 2), (0, 2)])
    c4 = graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])

    h = rw.find_homomorphism(c4, k2)
    assert h is not None and len(h) == 4
    assert rw.find_homomorphism(k3, k2) is None
    assert rw.find_embedding(k2, c4) is not None
    assert len(rw.core(c4)) == 2
    assert rw.automorphism_count(c4) == 8

    graphs = json.dumps({
        "variant": "KLF",
        "signature": E,
        "links": [{"signature": E, "elements": ["0"]}, json.loads(k2.to_json())],
        "forbidden": [],
    })
    assert rw.is_member(graphs, k3)
    report = rw.check_class_property(graphs, "AP", 2)
    assert report["holds_up_to_bound"] is True

    u, complete = rw.build_generic(graphs, 2, 100)
    assert complete and rw.homogeneity_stuck_count(u, 2, 2) == 0

    colored, complete = rw.build_universal_colored(graphs, k2, 2, 100)
    assert complete and rw.is_retraction(colored)
    again = rw.ColoredStructure.from_json(colored.to_json())
    assert again.color() == colored.color()

    assert rw.count_pe_types(k3, 2) == 2 and rw.count_orbits(k3, 2) == 2
    assert rw.check_worn(c4, k2, 3)["agree"] is True

    try:
        rw.Structure.from_json("{bad")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed JSON accepted")
    try:
        rw.find_homomorphism(k3, c4, node_budget=1)
    except TimeoutError:
        pass
    else:
        raise AssertionError("budget not enforced")
    print("smoke test passed")


if __name__ == "__main__":
    main()
