"""Smoke test for the holoform_py extension. Run after `maturin develop`."""

import cmath
import math

import holoform_py as hf


def max_abs_diff(a, b):
    return max(abs(x - y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def main():
    assert "sl2c_iwasawa" in hf.CATALOG and "square" in hf.BUILTINS

    be = hf.Backend("sl2c_iwasawa")
    assert be.dim == 6 and not be.is_abelian()
    assert be.are_transverse("r", "b")["pass"]

    sq = hf.ModuliSpace(be, hf.Surface.builtin("square"))
    pt = sq.random_point(seed=3)
    assert sq.constraint_residual(pt) < 1e-10
    w = sq.omega(pt)
    assert len(w) == sq.dimension
    assert max_abs_diff(w, sq.closed_form(pt)) < 1e-9
    assert max_abs_diff(w, sq.omega_from(pt, 2)) < 1e-10
    assert sq.check_nondegenerate(pt)["pass"]
    assert sq.check_groupoid(seed=1)["pass"]
    assert hf.lagrangian_graph(sq, pt, sq, [1], [3], seed=4)["pass"]

    bad = hf.Surface.from_tokens(["r1", "r2", "b1^-1", "b2^-1"])
    report = bad.validate(be)
    assert not report["pass"] and any("transverse" in p for p in report["problems"])

    theta = hf.Theta([[0, "1/2"], ["-1/2", 0]])
    assert hf.graph_lattice_intersection(theta) == [[2, 0], [0, 2]]
    tmr = hf.torus_morita(theta, planck="1")
    assert tmr["poisson"]["epsilon"] == 1 and tmr["morita"]["pass"]
    assert tmr["poisson"]["pi_b"] == [["0", "-2"], ["2", "0"]]
    z = hf.qt_commutator_phase(theta, 0, 1)
    assert abs(z - cmath.exp(2j * math.pi * 0.5)) < 1e-12
    assert hf.qt_center(theta)["generators"] == [["2", "0"], ["0", "2"]]
    prod = hf.qt_multiply(theta, {(1, 0): (1.0, 0.0)}, {(0, 1): (1.0, 0.0)})
    assert list(prod) == [(1, 1)]

    try:
        hf.Backend("no_such_algebra")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown catalog entry accepted")

    print("smoke test ok:", sq)


if __name__ == "__main__":
    main()
