"""End-to-end smoke test of the python bindings."""

import json
import math
import tempfile
from pathlib import Path

import specsim as ss


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    spec = ss.KernelSpec()
    spec.half_width = 2
    spec.capacity_kind = "gaussian"
    spec.sigma_k = 2.0
    spec.cooperation_kind = "step"
    spec.b = 0.5
    spec.m = 2
    spec.competition_kind = "constant"
    kernels = ss.build_kernels(spec)
    assert kernels.assumption1
    approx(kernels.K(0), 1.0)
    approx(kernels.B(0), 0.5)  # step cooperation: b inside the window
    approx(kernels.B(3), 1.0)  # ... and full cooperation beyond it

    space = kernels.space
    pi = ss.Simplex.uniform(space)
    m = ss.fitness(pi, kernels)
    assert len(m) == space.size()
    mbar = ss.mean_fitness(pi, m)
    assert 0.0 < mbar < 1.0

    params = ss.ModelParams()
    params.mu = 0.01
    params.population = 1000
    approx(params.mu_tilde(), 0.008)

    # particle run is deterministic in the seed
    mp = ss.MoranParams(kernels, params)
    rec_a = ss.run_moran(mp, 5.0, [1.0, 5.0], 11)
    rec_b = ss.run_moran(mp, 5.0, [1.0, 5.0], 11)
    assert rec_a.event_count == rec_b.event_count
    assert rec_a.snapshots[-1].frequency == rec_b.snapshots[-1].frequency
    approx(sum(rec_a.snapshots[-1].frequency), 1.0, 1e-12)

    # the potential flow settles and never loses potential
    res = ss.integrate_ode(ss.OdeVariant.eq9, pi, kernels, params, horizon=200.0,
                           stop_velocity=1e-10)
    assert res.ok
    assert res.max_potential_drop <= 1e-8

    # landscape machinery round trip
    points = ss.find_stationary_points(mp, 4, 1e-9)
    assert points
    best = [p for p in points if p.classification == ss.StationaryClass.local_max_V]
    assert best
    diag = ss.verify_stationarity(best[0].pi_hat, kernels, params.mu_tilde())
    assert diag.constancy_residual < 1e-8

    # tiny mcmc run produces simplex samples
    density = ss.StationaryDensity(kernels, params)
    opts = ss.McmcOptions()
    opts.n_samples = 400
    opts.burn_in = 100
    mcmc = ss.mcmc_sample_stationary(density, opts)
    assert len(mcmc.samples) == 400
    approx(sum(mcmc.samples[0]), 1.0, 1e-9)

    # harness: recipes exist and a tiny config runs end to end
    names = [name for name, _ in ss.recipe_list()]
    assert "fig4" in names and "thm25" in names
    with tempfile.TemporaryDirectory() as tmp:
        config = {
            "model": "moran",
            "seed": 3,
            "replicas": 1,
            "horizon": 2.0,
            "snapshot_interval": 1.0,
            "output_dir": tmp,
            "kernel": {"half_width": 1, "capacity_kind": "constant",
                       "cooperation_kind": "constant", "competition_kind": "constant"},
            "moran": {"mu": 0.05, "population": 30},
        }
        outcome = ss.run_experiment_json(json.dumps(config), with_timestamp=False)
        assert outcome.exit_code == 0
        produced = {Path(a).name for a in outcome.artifacts}
        assert "moran_r0.csv" in produced
        assert (Path(tmp) / "moran_r0.csv").exists()
        assert len(ss.config_hash(json.dumps(config))) == 16

    print("python smoke test passed")


if __name__ == "__main__":
    main()
