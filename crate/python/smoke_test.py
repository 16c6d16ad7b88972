"""Smoke test for the pychristoffel extension.

Build and install first:
    cd crates/py && maturin build --release -o dist && pip install dist/*.whl
"""
import math

import pychristoffel as pc


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    interval = pc.Domain.from_json('{"type":"interval","a":-1,"b":1}')
    ev = pc.Evaluator(interval, 5)
    # (n+1)^2 / 2 at an endpoint of [-1, 1]
    assert close(ev.christoffel_at([1.0]), 18.0), ev.christoffel_at([1.0])
    assert close(ev.kernel_at([0.3], [0.3]), ev.christoffel_at([0.3]))
    assert not ev.degraded

    disk = pc.Domain.from_json('{"type":"ball_p","dim":2,"p":2}')
    assert disk.dim == 2
    assert disk.contains([0.5, 0.5]) and not disk.contains([1.0, 1.0])
    assert disk.sigma_reference() == 3.0
    again = pc.Domain.from_json(disk.to_json())
    assert again.to_json() == disk.to_json()

    d0 = pc.Evaluator(disk, 0)
    assert close(d0.christoffel_at([0.1, 0.2]), 1.0 / math.pi)

    square = pc.Domain.from_json('{"type":"cube","dim":2}')
    rep = pc.Evaluator(square, 4).max()
    assert all(close(abs(v), 1.0) for v in rep["argmax"]), rep["argmax"]

    fit = pc.fit_sigma(disk, list(range(4, 25, 2)))
    assert abs(fit["slope"] - 3.0) < fit["half_width"] + 0.3, fit

    rows = pc.table()
    assert any(r["family"] == "half_ball" and r["sigma"] == 5.0 for r in rows)

    try:
        pc.Domain.from_json('{"type":"torus"}')
    except ValueError:
        pass
    else:
        raise AssertionError("bad domain accepted")
    try:
        ev.christoffel_at([0.0, 1.0])
    except ValueError:
        pass
    else:
        raise AssertionError("dimension mismatch accepted")

    print("smoke test ok: sigma(disk) ~ %.3f +- %.3f" % (fit["slope"], fit["half_width"]))


if __name__ == "__main__":
    main()
