#!/usr/bin/env python3
"""Smoke test for the fwm_py extension module.

Builds the cdylib with cargo, stages it as an importable module and
exercises the main types against known closed forms.
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_module(stage: Path) -> None:
    subprocess.run(
        ["cargo", "build", "-p", "fwm-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "debug" / "libfwm_py.so"
    if not lib.exists():  # macOS naming
        lib = ROOT / "target" / "debug" / "libfwm_py.dylib"
    shutil.copy(lib, stage / "fwm_py.so")


def approx(a: float, b: float, tol: float = 1e-10) -> None:
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main() -> int:
    stage = Path(tempfile.mkdtemp(prefix="fwm_py_"))
    build_module(stage)
    sys.path.insert(0, str(stage))
    import fwm_py

    p = fwm_py.Params(omega=[1.0, 1.0, 1.0, 1.0], g=1.0, hbar=1.0)
    assert p.is_resonant()
    approx(p.detuning(), 0.0)

    # Worked sector: c = (2, 3, 0) has N = 2, gamma = 0, delta = 1.
    s = fwm_py.Sector(2, 3, 0)
    assert (s.n, s.gamma, s.delta) == (2, 0, 1)
    assert s.dim == 3
    basis = s.basis()
    assert len(basis) == 3
    for t in basis:
        assert t[0] + t[1] + t[2] + t[3] == 5  # total quanta c1 + c2
    approx(s.lambdas()[2], 2 * (2 + 0 + 1 + 1))

    # Unitarity of the evolved occupation probabilities.
    rows = s.evolve(p, 0, [0.0, 0.7, 1.9])
    approx(sum(rows[0]), 1.0)
    approx(rows[0][0], 1.0)
    approx(sum(rows[2]), 1.0)

    # Two-level sector (3, 1, 1): gamma = delta = 1, so kappa = 1 and the
    # flip probability is sin^2((gamma + delta + 2) g hbar t / 2).
    two = fwm_py.Sector(3, 1, 1)
    assert two.dim == 2
    for t in (0.3, 1.1, 2.5):
        approx(two.transition(p, 0, 1, t), math.sin(2.0 * t) ** 2, 1e-12)

    # Invalid labels raise.
    try:
        fwm_py.Sector(-1, 0, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid sector label accepted")

    # Reduced coherent state and reproducing measure density.
    coeffs = two.reduced_coherent(0.3, 0.4)
    assert len(coeffs) == 2
    assert two.measure_density(0.25) > 0.0

    # Classical worked trajectory: I0(t) = 1 + (sqrt(2)/2) sin(2 sqrt(2) t).
    traj = fwm_py.ClassicalTrajectory([2.0, 2.0, 0.0], 1.0, math.pi / 2.0, p)
    for t in (0.0, 0.5, 1.3, 4.0):
        target = 1.0 + math.sqrt(0.5) * math.sin(2.0 * math.sqrt(2.0) * t)
        approx(traj.i0(t), target, 1e-9)
        re, im = traj.phase(t)
        approx(math.hypot(re, im), 1.0, 1e-9)
    max_casimir, max_energy = traj.kummer_confinement([i * 0.1 for i in range(100)])
    assert max_casimir < 1e-9 and max_energy < 1e-8

    # Sector partition of the truncated Fock space and spin-operator audits.
    labels = fwm_py.sectors_within(4)
    assert (2, 3, 0) not in labels and (2, 2, 0) in labels
    assert fwm_py.commutator_audit_max(4, p) < 1e-12
    assert fwm_py.dicke_identity_defect(4, p) < 1e-10

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
