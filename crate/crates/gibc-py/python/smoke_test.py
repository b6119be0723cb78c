"""Smoke test for the gibc_py extension module.

Run after `pip install --no-build-isolation ./crates/gibc-py` (or with the
built library on PYTHONPATH).
"""

import csv
import io
import json
import math

import gibc_py

CONFIG = json.dumps(
    {
        "k2max": 1,
        "shape": {"kind": "circle", "radius": 1.2},
        "data_model": {"kind": "impedance", "params": {"model": "constant", "c": [1.0, -0.5]}},
        "model": {"kind": "constant", "initial": {"model": "constant", "c": [1.0, -0.5]}},
        "optimizer": {"max_iter": 3},
        "seed": 1,
    }
)


def main():
    h = gibc_py.hankel1(0, 1.0 + 0j)
    assert abs(h - (0.7651976865579666 + 0.08825696421567696j)) < 1e-12, h

    neumann = gibc_py.forward(CONFIG, 2.0, json.dumps({"kind": "neumann"}), 200)
    zero = gibc_py.forward(
        CONFIG, 2.0, json.dumps({"kind": "impedance", "params": {"model": "constant", "c": [0.0, 0.0]}}), 200
    )
    assert neumann == zero
    assert len(neumann) == 20 and len(neumann[0]) == 20

    data = gibc_py.generate(CONFIG)
    assert gibc_py.generate(CONFIG) == data
    traj = gibc_py.invert(CONFIG, data)
    truth = gibc_py.shape_curve(CONFIG)
    rows = list(csv.DictReader(io.StringIO(gibc_py.report(traj, truth))))
    assert [float(r["omega"]) for r in rows] == [1.0, 1.5, 2.0]
    for r in rows:
        assert math.isfinite(float(r["residual"]))
    print("gibc_py smoke test passed:", rows[-1]["residual"], rows[-1]["area_error"])


if __name__ == "__main__":
    main()
