"""Smoke test for the pyfeigh extension module.

Build and install first:

    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/pyfeigh-*.whl
"""

import math

import numpy as np

import pyfeigh


def dense(alpha, q, b, x, y):
    m = len(q) if q else len(x)
    a = alpha * np.eye(m)
    if q and q[0]:
        qa = np.array(q)
        a += qa @ np.array(b) @ qa.T
    if x and x[0]:
        a += np.array(x) @ np.array(x).T
    if y and y[0]:
        a -= np.array(y) @ np.array(y).T
    return a


def main():
    rng = np.random.default_rng(0)
    m = 12

    u, s, v = pyfeigh.thin_svd(rng.standard_normal((m, 3)).tolist())
    assert len(s) == 3 and s[0] >= s[1] >= s[2]

    q = np.linalg.qr(rng.standard_normal((m, 2)))[0]
    b = np.diag([3.0, -0.5])
    x = rng.standard_normal((m, 2))
    y = rng.standard_normal((m, 1))

    factor = pyfeigh.LowRankFactor(1.5, q.tolist(), b.tolist())
    data = pyfeigh.WeightedData(m, x.tolist(), y.tolist())
    ef = pyfeigh.fast_eigh(factor, data)
    expected = np.sort(np.linalg.eigvalsh(dense(1.5, q.tolist(), b.tolist(), x.tolist(), y.tolist())))[::-1]
    assert np.allclose(ef.full_spectrum(), expected, atol=1e-9), (ef.full_spectrum(), expected)

    truncated, tau, new_alpha = pyfeigh.truncate(pyfeigh.svd_route(1.0, x.tolist()), 1)
    assert truncated.rank == 1 and 0 <= tau <= 1 and new_alpha > 0

    model = pyfeigh.MetricModel.scaled_identity(m, 4.0)
    e = [0.0] * m
    e[0] = 2.0
    assert math.isclose(model.distance(e), 1.0)
    model, floored = model.update([e], [1.0], 0.9, 0.5, 3)
    assert floored == 0 and model.distance(e) < 1.0
    assert model.classify([0.0] * m, 0.5) == "regular"

    assert pyfeigh.select_tau([100.0, 10.0, 1.0, 1.0, 1.0], 2) == 2

    try:
        pyfeigh.LowRankFactor(1.0, [[1.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-orthonormal basis accepted")

    print("pyfeigh smoke test passed")


if __name__ == "__main__":
    main()
