"""Smoke test for the aclab extension module.

Build and run from the repository root:

    cargo build --release -p aclab-py
    cp target/release/libaclab.so crates/python/python/aclab.so
    python3 crates/python/python/smoke_test.py
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import aclab  # noqa: E402


def main():
    c = aclab.constants()
    assert abs(c["sigma0"] - math.sqrt(2) / 3) < 1e-12
    v, d = aclab.heteroclinic(0.0)
    assert v == 0.0 and abs(d - 0.5 * math.sqrt(2)) < 1e-15

    pair = aclab.Hypersurface.point_pair(0.0, math.pi)
    b = aclab.balanced_energy(pair, 0.02)["balanced"]
    assert abs(b - 4 * c["sigma0"]) < 0.01 * 4 * c["sigma0"], b

    s0 = aclab.Hypersurface.circle(0.0, 8)
    eig, index, nullity = aclab.jacobi_spectrum(s0)
    assert (index, nullity) == (1, 0), (index, nullity)
    assert abs(eig[0] + 0.3 / 2.3) < 1e-6

    tilted = aclab.Hypersurface.circle(0.4, 16)
    ys = tilted.y_grid()
    bent = tilted.with_graph([0.08 * math.cos(y) for y in ys])
    f = [1.0 + 0.5 * math.sin(2 * y) for y in ys]
    analytic, fd, rel = aclab.first_variation(bent, f, 0.05)
    assert rel <= 1e-3, (analytic, fd, rel)

    energy, norm, direction = aclab.pseudogradient(s0, 0.05)
    assert norm <= 0.05 and len(direction) == 8

    with tempfile.TemporaryDirectory() as out:
        passed, where = aclab.run("profiles", "z_max = 30\n", out)
        assert passed and os.path.exists(os.path.join(where, "manifest.txt"))
    print("aclab smoke test passed")


if __name__ == "__main__":
    main()
