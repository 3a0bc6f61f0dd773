"""Smoke test for the gradcat extension module."""

import math

import gradcat


def main():
    info = gradcat.classify((1.0, 2.0, 3.0, 4.0))
    assert info["class"] and len(info["eigenvalues"]) == 2

    q = gradcat.model_matrix(1, 0)
    v = gradcat.blows_up(q, (1.0, -2.0), want_time=True)
    assert v["blows_up"]
    assert abs(v["t_star"] - (1 + math.sqrt(5)) / 2) < 1e-9

    f = gradcat.DecisiveFunction(q, (1.0, -2.0))
    assert f(0.0) == 1.0
    assert abs(f.first_positive_root() - v["t_star"]) < 1e-9

    o = gradcat.oracle(q, (1.0, -2.0))
    assert o["outcome"] == "blew-up"

    assert not gradcat.smooth_region_predicate(-1, 1, (0.0, 0.6))
    assert gradcat.smooth_region_predicate(-1, 1, (0.0, 0.4))
    assert gradcat.bounded_integral_curves(gradcat.model_matrix(-1, 1))

    grid = gradcat.sample_region(gradcat.model_matrix(-1, 1), (-2.0, 2.0), (-2.0, 2.0), 11, 11)
    assert len(grid["blows_up"]) == 121

    try:
        gradcat.classify((1.0, math.nan, 0.0, 0.0))
    except ValueError:
        pass
    else:
        raise AssertionError("NaN input accepted")
    print("ok")


if __name__ == "__main__":
    main()
