"""Smoke test for the jordan_angles_py extension.

Build the module first, for example with `maturin develop` from
crates/python, then run `python python/smoke_test.py`.
"""

import math

import jordan_angles_py as ja


def close(a, b, tol=1e-12):
    return all(abs(x - y) <= tol for x, y in zip(a, b)) and len(a) == len(b)


def main():
    l = ja.Subspace([[1, 0], [0, 1], [0, 0], [0, 0]])
    c, s = math.cos(0.3), math.sin(0.3)
    m = ja.Subspace([[c, 0], [0, 0.5], [s, 0], [0, math.sqrt(3) / 2]])
    n = ja.Subspace([[1, 1], [0, 1], [0, 2], [1, 0]])

    angles = ja.jordan_angles(l, m)
    assert close(angles, [0.3, math.pi / 3]), angles
    assert close(ja.jordan_angles(m, l, route="projector"), angles, 1e-10)
    assert close(ja.angles_from_bases(l.frame(), m.frame()), angles, 1e-10)
    assert abs(ja.distance(l, m) - math.hypot(0.3, math.pi / 3)) < 1e-12
    assert abs(ja.distance(l, m, "linf") - math.pi / 3) < 1e-12

    curve = ja.HCurve(l, m)
    mid = curve.at(0.5)
    assert close(ja.jordan_angles(l, mid), [0.15, math.pi / 6])
    path = [curve.at(k / 50) for k in range(51)]
    assert abs(ja.finsler_length(path) - ja.distance(l, m)) < 1e-3

    report = ja.triangle_check(l, m, n, certificate=True)
    assert report["inside"]
    assert abs(sum(t["weight"] for t in report["certificate"]) - 1) < 1e-9

    inside, slack, cert = ja.orbit_membership([0.5, 0.5], [1.0, 0.0], signed=False)
    assert inside and slack >= 0 and abs(sum(w for w, _, _ in cert) - 1) < 1e-9

    terms = ja.decompose([[0.5, 0.5], [0.5, 0.5]])
    assert abs(sum(w for w, _, _ in terms) - 1) < 1e-12

    assert close(ja.posdef_angles([[math.e, 0], [0, 1]], [[1, 0], [0, 1]]), [1.0, 0.0])
    ball = ja.ball_angles([[0.5j]], [[0]])
    assert close(ball, [math.atanh(0.5)], 1e-12), ball

    a = ja.fuzz("grassmann-real", trials=5, seed=3)
    b = ja.fuzz("grassmann-real", trials=5, seed=3)
    assert a == b and all(c["ok"] for c in a["checks"])

    try:
        ja.Subspace([[1, 0], [0]])
    except ValueError:
        pass
    else:
        raise AssertionError("ragged input accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
