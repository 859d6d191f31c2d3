"""Smoke test for the fracwave_py extension module.

Build and install first:
    pip install --no-build-isolation ./crates/py
then run:
    python python/smoke_test.py
"""

import math

import fracwave_py as fw

SMALL = """
sigma = 2.0
p = 2.0
epsilon = {eps}
t_max = {t_max}
dt_init = 0.01
dt_max = 0.05
boundary_tol = 1e-2
confirm_resolution = false

[grid]
dim = 1
points = 128
half_length = 30.0

[damping]
beta = 0.0

[a0]
shape = "gaussian"
"""


def close(a, b, tol):
    assert abs(a - b) <= tol * max(1.0, abs(b)), (a, b)


def main():
    close(fw.critical_exponent(1, 1.5), 2.5, 1e-15)
    close(fw.lifespan_exponent(1, 2.0, 2.0, 0.0), -2.0, 1e-12)

    # sigma = 2 kernel is the Gaussian exp(-x^2/4) / sqrt(2)
    close(fw.heat_kernel([1.0], 2.0), math.exp(-0.25) / math.sqrt(2.0), 1e-10)
    k = fw.kernel_integrals(2.0, 1)
    close(k["mass"], math.sqrt(2.0 * math.pi), 1e-10)

    d = fw.damping(0.0, [0.0, 1.0, 2.0])
    assert d["b"] == [1.0, 1.0, 1.0]
    close(d["B"][2], 2.0, 1e-12)

    try:
        fw.solve(SMALL.format(eps=1.0, t_max=1.0).replace("sigma = 2.0\n", ""))
    except ValueError as e:
        assert "sigma" in str(e)
    else:
        raise AssertionError("missing sigma accepted")

    rec = fw.solve(SMALL.format(eps=4.0, t_max=40.0))
    assert rec["verdict"] == "blowup", rec["verdict"]
    assert rec["lifespan_estimate"] > 0.0
    assert len(rec["series"]["t"]) == len(rec["series"]["sup_norm"]) > 1

    plan = 'axis = "epsilon"\nvalues = [4.0, 3.0, 2.0, 1.5]\nfit = "power_law"\n\n[base]\n'
    base = SMALL.format(eps=1.0, t_max=40.0)
    base = base.replace("[grid]", "[base.grid]").replace("[damping]", "[base.damping]").replace("[a0]", "[base.a0]")
    out = fw.sweep(plan + base)
    assert [p["verdict"] for p in out["points"]] == ["blowup"] * 4
    assert out["fit"]["slope"] < 0.0

    print("smoke test passed: lifespan %.4f, fitted slope %.3f" % (rec["lifespan_estimate"], out["fit"]["slope"]))


if __name__ == "__main__":
    main()
