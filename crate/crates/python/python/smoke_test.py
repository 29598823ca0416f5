"""Smoke test for the hfvp extension module.

Install the module first: `pip install --no-build-isolation crates/python`
(needs maturin).
"""

import math

import hfvp


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    # geometry
    p = hfvp.lift_point(640, 480, 320, 240)
    assert close(p[2], 1.0)
    a, b = hfvp.lift_point(640, 480, 0, 100), hfvp.lift_point(640, 480, 640, 100)
    line = hfvp.join(a, b)
    assert close(sum(x * y for x, y in zip(line, a)), 0.0)
    assert close(hfvp.angle(a, [-x for x in a]), 0.0)
    assert close(hfvp.consistency(a, line), math.radians(2))

    # squash
    k = 0.2 * 480
    assert close(hfvp.unsquash(hfvp.squash(123.0, k), k), 123.0)

    # metric
    assert close(hfvp.horizon_error([0, 1, -240], [0, 1, -240], 640, 480), 0.0)
    assert close(hfvp.auc([0.0], 0.25), 1.0)

    # MWIS on a 4-cycle
    nodes, weight = hfvp.mwis([1.0, 2.0, 1.0, 2.0], [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert nodes == [1, 3] and weight == 4.0

    # end to end
    scene = hfvp.make_scene(seed=3)
    for mode in ["none-full", "cnn-full", "cnn-empty"]:
        r = hfvp.detect(scene["segments"], scene["width"], scene["height"], mode=mode,
                        prior=scene["prior"], seed=0)
        hl = r["horizon_image"]
        e = hfvp.horizon_error([hl["a"], hl["b"], hl["c"]], scene["horizon"],
                               scene["width"], scene["height"])
        print(f"{mode}: horizon error {e:.4f}, {len(r['vps'])} vps")
        assert e < 0.05, (mode, e)
    again = hfvp.detect(scene["segments"], 640, 480, seed=0)
    assert again == hfvp.detect(scene["segments"], 640, 480, seed=0)

    try:
        hfvp.detect(scene["segments"], 640, 480, mode="cnn-full")
    except ValueError as err:
        print("missing prior rejected:", err)
    else:
        raise AssertionError("cnn-full without a prior must fail")
    print("smoke test OK")


if __name__ == "__main__":
    main()
