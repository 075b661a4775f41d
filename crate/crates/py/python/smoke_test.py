"""Smoke test for the magdirac_py extension module."""
import math

import magdirac_py as md


def main():
    landau = md.FieldSpec.power_law(0.0, 1.0, 0.0, 0.0)
    ev = md.sector_eigenvalues(landau, 0, 20.0, 4000, 1.0, 2.5)
    for got, want in zip(ev, [math.sqrt(2), 2.0, math.sqrt(6)]):
        assert abs(got - want) < 1e-3, (got, want)

    r = md.predict_regime(1.0, 1.0, 1.0, 3.0)
    assert r["label"] == "DiscreteSpectrum" and r["clause"] == "(c):t<s/2", r
    d = md.classify(md.FieldSpec.power_law(math.sqrt(2), 1.0, 1.0, 2.0))
    assert d["label"] == "EssentialAtZero" and d["k"] == 1, d

    gap = md.probe_gap(md.FieldSpec.power_law(0.0, 2.0, 0.0, 0.0), [20.0])
    assert abs(gap["half_gap"] - 2.0) < 0.01, gap

    z = md.zero_mode(landau, 3)
    assert z["dstar_rel_err"] < 1e-8 and z["residual_d"] < 1e-3, z

    nb = md.norm_bounds(1.0, math.sqrt(2), 1, 4.0)
    assert nb["pass"], nb

    qs = md.quasimodes(md.FieldSpec.power_law(math.sqrt(2), 1.0, 1.0, 2.0), [(10.0, 0.0), (20.0, 0.0)])
    assert qs[1]["ratio_fd"] < qs[0]["ratio_fd"], qs

    spec = md.FieldSpec.from_json('{"kind": "regularized", "V0": 1, "B0": 1, "t": 1, "s": 3}')
    assert md.FieldSpec.from_json(spec.to_json()).to_json() == spec.to_json()
    assert md.coercivity(spec, 0, 10.0, 1000) > 0.05

    try:
        md.FieldSpec.power_law(-1.0, 1.0, 1.0, 3.0)
    except md.MagdiracError as e:
        assert str(e).startswith("E_SPEC_V0_NONPOSITIVE"), e
    else:
        raise AssertionError("negative V0 accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
