"""Smoke test for the pyheterogen extension module.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pyheterogen-*.whl

then run `python python/smoke_test.py`.
"""

import math

import pyheterogen as hg


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    # Two nodes joined by an edge, features +1 and -1.
    k2 = hg.GraphSample.from_edges(2, [(0, 1)])
    x = hg.FeatureMatrix([[1.0], [-1.0]])
    assert close(hg.empirical_heterophily(k2, x), 1.0, 1e-15)
    assert close(hg.empirical_heterophily_edge_sum(k2, x), 1.0, 1e-15)

    er = hg.Graphon.constant(0.5)
    ident = hg.PolyFilter([1.0])
    assert close(er.limit_heterophily(ident), 0.5, 1e-15)

    sbm = hg.Graphon.sbm([0.5, 0.5], [[0.8, 0.2], [0.2, 0.8]])
    assert close(sbm.limit_heterophily(hg.PolyFilter([0.0, 1.0])), 0.125, 1e-15)
    assert hg.Graphon.from_json(sbm.to_json()).to_json() == sbm.to_json()

    k4 = hg.Graphon.constant(1.0).sample(4, seed=1)
    assert k4.edges() == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert k4.degrees() == [3, 3, 3, 3]

    g = hg.Graphon.logistic(2.0, -1.0).sample(200, seed=3)
    f = hg.PolyFilter([1.0, -0.5, 0.25])
    spectrum = g.laplacian_spectrum()
    assert -1e-9 <= spectrum[0] and spectrum[-1] <= 2 + 1e-9
    mu_trace = hg.expected_heterophily(g, f)
    mu_eigen = hg.expected_heterophily(g, f, route="eigen")
    assert close(mu_trace, mu_eigen, 1e-8)
    for m in (1, 2, 3):
        gap = abs(hg.spectral_moment(g, m) - hg.degree_moment(g, m))
        assert gap <= (2**m - 1) / g.n

    x0 = hg.FeatureMatrix.white(200, 50, seed=4)
    xf = hg.apply_filter(f, g, x0)
    report = hg.measure(g, xf)
    assert report["n"] == 200 and report["d"] == 50
    assert abs(report["formula_gap"]) < 1e-10

    sample, features = hg.generate(er, ident, 300, seed=5)
    assert features.n == 300 and features.d == 300

    result = hg.calibrate_gain(er, ident, 0.2)
    assert close(result["gain"], math.sqrt(0.4), 1e-12)
    _, _, checked = hg.generate_with_target(er, ident, 0.2, 400, seed=6)
    assert close(checked["h_empirical_check"], 0.2, 0.15)

    rows = hg.run_experiment("convergence", er, ident, [32, 64], trials=2, seed=7)
    assert [r["n"] for r in rows] == [32, 64]

    try:
        hg.Graphon.constant(1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("p outside [0, 1] accepted")

    print(f"pyheterogen {hg.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
