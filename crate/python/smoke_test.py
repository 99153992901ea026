"""Smoke test for the tfim_wannier extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/tfim_wannier-*.whl
"""

import math
import sys

import tfim_wannier as tw


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    return cond


def main():
    ok = True
    model = tw.ModelSpec(7, 0.5, 1.0)
    ok &= check(model.dim() == 128 and model.momentum_period() == 7, "model dimensions")

    spectrum = tw.exact_spectrum(model)
    ok &= check(len(spectrum) == model.dim(), "spectrum has one entry per basis state")
    band = spectrum.band("magnon")
    ok &= check(len(band) == 7 and min(band) > spectrum.ground_energy, "magnon band above ground state")
    z_k, z_x_max = spectrum.exact_weights()
    ok &= check(0.0 < z_x_max <= 1.0 and all(0.0 < z <= 1.0 for z in z_k), "exact weights in (0, 1]")

    ground = tw.optimize(model, init="all-plus", depth=5, restarts=2)
    ok &= check(abs(ground.energy - spectrum.ground_energy) < 1e-8, "ground state reached")

    run = tw.optimize(model, init="spin-flip", depth=6, restarts=2, seed=1)
    eps = tw.dispersion(run)
    ok &= check(abs(sum(eps) / len(eps) - run.energy) < 1e-10, "dispersion mean equals energy")
    ok &= check(abs(sum(tw.momentum_weights(run)) - 1.0) < 1e-10, "momentum weights sum to one")
    z_x, phases = tw.weight_and_phases(run, spectrum)
    ok &= check(z_x <= z_x_max + 1e-9 and len(phases) == 7, "Wannier weight below its bound")
    ok &= check(len(run.magnetization_profile()) == 7, "magnetization profile length")

    integrals = tw.thermodynamic_band_integrals(0.0, 1.0)
    ok &= check(abs(integrals["avg_gap"] - 2.0) < 1e-12 and abs(integrals["bandwidth"]) < 1e-12, "J = 0 band integrals")
    integrals = tw.thermodynamic_band_integrals(0.5, 1.0)
    ok &= check(integrals["bandwidth"] > 0 and math.isfinite(integrals["avg_gap"]), "band integrals finite")

    try:
        tw.ModelSpec(7, -1.0, 1.0)
        ok &= check(False, "negative coupling rejected")
    except ValueError:
        ok &= check(True, "negative coupling rejected")
    try:
        tw.exact_spectrum(tw.ModelSpec(15, 0.5, 1.0))
        ok &= check(False, "oversized exact diagonalization rejected")
    except tw.CapabilityError:
        ok &= check(True, "oversized exact diagonalization rejected")

    print("smoke test " + ("passed" if ok else "FAILED"))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
