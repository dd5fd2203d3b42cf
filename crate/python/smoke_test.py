"""Smoke test for the Python bindings. Run after `pip install ./crates/py`."""

import math

import phomog


def main():
    c = phomog.Coefficient.benchmark_1d(3.0)
    assert c.dim == 1 and c.has_defect
    assert abs(c([0.0]) - 13.0) < 1e-12

    per = phomog.Coefficient({"kind": "cosine", "base": 2.0, "amplitude": 1.0}, p=2.0, lam=4.0)
    assert abs(per.a_star() - math.sqrt(3.0)) < 1e-12

    prob = phomog.Problem1D.benchmark(0.1)
    rep = prob.remainder_report()
    print("eps=0.1 R_per Linf", rep["periodic"]["linf"], "R Linf", rep["full"]["linf"])
    assert abs(rep["periodic"]["linf"] - 0.156) < 0.005

    rows = prob.table_sweep([0.1, 0.05])
    assert len(rows) == 2

    cell = phomog.cell_solve(per, [1.0], n=64)
    print("cell a_star", cell["a_star"])
    assert abs(cell["a_star"][0] - math.sqrt(3.0)) < 1e-2

    sf = phomog.discretize(lambda x: [x[0] ** 2], [(-0.5, 0.5)], 0.25)
    print("cells", sf["cells"], "values", sf["values"])
    # cells centred at k * delta that fit inside omega
    assert sf["cells"] == [[-1], [0], [1]]
    assert abs(sf["values"][1][0] - 0.125 ** 2 / 3) < 1e-15

    d = phomog.defect_solve(c, [1.0], cells_per_unit=16)
    print("defect Lp'", d["tail"]["lp_prime_norm"], "residual", d["residual"])
    assert d["norms"]["lp"] > 0 and d["residual"] < 1e-6

    conv = prob.convergence_study([0.1, 0.05])
    assert conv["records"][1]["l2_u_err"] < conv["records"][0]["l2_u_err"]

    bat = phomog.inequality_battery(2000, 1)
    assert bat["passed"]

    try:
        phomog.Coefficient({"kind": "cosine", "base": 1.0, "amplitude": 0.5}, p=3.0, lam=1.5).validate()
    except phomog.AssumptionViolated as e:
        print("expected:", e)
    else:
        raise AssertionError("validation should fail")

    print("ok")


if __name__ == "__main__":
    main()
