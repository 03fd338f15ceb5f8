"""Smoke test for the dnaperiod Python module.

Build and install the extension first, e.g.

    pip install --no-build-isolation -e crates/python

then run `python3 python/smoke_test.py`.
"""

import json
import math

import dnaperiod


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def check_models():
    model = dnaperiod.Model.random(m_max=4, seed=11)
    assert model.alphabet == "ACGT" and model.m_max == 4
    for row in model.embedded:
        assert close(sum(row), 1.0, 1e-9)

    kernel = model.interval_kernel(8)
    assert len(kernel) == 9
    for n in range(9):
        closed = model.interval_closed(n)
        assert all(close(a, b, 1e-12) for ra, rb in zip(kernel[n], closed) for a, b in zip(ra, rb))
        for row in kernel[n]:
            assert close(sum(row), 1.0, 1e-9)

    exact = model.return_probability(3, variant="exact-entry")
    assert all(close(p, kernel[3][i][i]) for i, p in enumerate(exact))
    mc = model.mc_return_probability(3, trials=20000, seed=5)
    for p, (mean, se) in zip(exact, mc):
        assert abs(mean - p) <= 5 * max(se, 1e-3), (mean, p, se)

    again = dnaperiod.Model.from_json(model.to_json())
    assert again.embedded == model.embedded

    nh = dnaperiod.NHModel.random(period=3, m_max=3, seed=2)
    assert nh.period == 3
    q = nh.interval_kernel(1, 6)
    assert all(close(a, b) for ra, rb in zip(q[6], nh.interval_closed(1, 6)) for a, b in zip(ra, rb))
    try:
        nh.return_probability(3, 3)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range coding position accepted")


def check_fixture():
    # Deterministic cycle A->C->G->T->A with unit sojourns.
    p = [[1.0 if j == (i + 1) % 4 else 0.0 for j in range(4)] for i in range(4)]
    h1 = [[0.0 if i == j else 1.0 for j in range(4)] for i in range(4)]
    model = dnaperiod.Model(p, [h1])
    assert model.return_probability(4, variant="exact-entry") == [1.0] * 4
    assert model.return_probability(3, variant="exact-entry") == [0.0] * 4
    assert model.simulate(8, seed=0) in {"ACGTACGT", "CGTACGTA", "GTACGTAC", "TACGTACG"}


def check_analysis():
    fasta = dnaperiod.generate("periodic", 1500, seed=3)
    header, *body = fasta.splitlines()
    assert header.startswith(">periodic_seed3 kind=periodic length=1500 seed=3 rng=chacha8")
    seq = "".join(body)
    assert len(seq) == 1500 and set(seq[::3]) == {"A"}

    est = dnaperiod.estimate(fasta, s=3, m_max=10)
    assert isinstance(est, dnaperiod.NHModel) and est.period == 3
    hom = dnaperiod.estimate(fasta)
    assert isinstance(hom, dnaperiod.Model)

    report = dnaperiod.analyze(fasta)
    assert report["schema_version"] == 1
    meta = report["metadata"]
    assert meta["length"] == 1500 and meta["d"] == 3 and meta["s"] == 3
    assert meta["generator"]["seed"] == 3
    assert len(report["rows"]) == 4 * 3 * 500
    assert report["baseline"]["homogeneous"][0] > 0.7
    json.dumps(report)

    csv = dnaperiod.analyze_csv(fasta, s=1, variant="exact-entry")
    lines = csv.splitlines()
    assert lines[0] == "state,k,cycle,p,logp,R,color"
    assert len(lines) == 1 + 4 * 500
    logp = [float(line.split(",")[4]) for line in lines[1:] if line.startswith("A,")]
    assert all(b <= a + 1e-12 for a, b in zip(logp, logp[1:]))
    assert not any(math.isnan(v) for v in logp)

    try:
        dnaperiod.analyze("ACGT" * 5)
    except ValueError as e:
        assert "too short" in str(e)
    else:
        raise AssertionError("short sequence accepted")


if __name__ == "__main__":
    check_models()
    check_fixture()
    check_analysis()
    print(f"dnaperiod {dnaperiod.__version__}: smoke test passed")
