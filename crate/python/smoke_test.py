"""Smoke test for the Python bindings.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

import adicfactor as af


def main():
    d = af.Diagram.catalog("binary")
    assert d.identify_group() == "Z[1/2]"
    assert d.trace(3)[3] == ["1/8"]
    # the maximal path wraps to the minimal one
    assert d.vershik("prefix=[] tail=allmax") == "prefix=[] tail=periodic:[0]"
    assert d.vershik_inverse("prefix=[] tail=periodic:[0]") == "prefix=[] tail=periodic:[1]"
    assert af.Diagram.from_json(d.to_json()).to_json() == d.to_json()

    p = af.EmbeddingPair.catalog("binary")
    assert all(p.conditions())
    assert p.k_groups() == ("Z[1/2]", "Z")
    mu, bound, ok = p.measure_vanishing(5)
    assert ok and mu == "1/32"

    s = af.FunctionSystem.catalog("middle-thirds")
    assert s.separation() == "separated"
    assert set(s.cell_diameters_sq(2)) == {"1/81"}

    a = af.Assignment.catalog("interval")
    assert a.is_valid()
    x, c = a.step("prefix=[2,0] tail=identity", ["9/16"])
    assert c == ["3/16"]
    assert a.step(x, c, inverse=True) == ("prefix=[2,0] tail=identity", ["9/16"])
    k, verified = a.regularity("prefix=[0] tail=identity", "1/10")
    assert verified

    assert len(af.circles(4)) == 14
    assert af.render_svg("ternary", 3).find("<svg") >= 0
    assert af.hadamard_verify(4)[:3] == (True, True, True)

    try:
        af.Diagram.from_json("{not json")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed input accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
