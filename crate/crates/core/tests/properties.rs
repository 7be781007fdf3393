use proptest::prelude::*;

use lptransport::besov::{besov_log_norm, besov_log_norm_equiv, homogeneous_sobolev_norm, log_sobolev_sum};
use lptransport::experiments::RateFit;
use lptransport::fields::{random_band_limited, shifted};
use lptransport::solver::{solve, Diagnostic, ObserverSet, SolverConfig, VelocityModel};
use lptransport::spectral::{forward_transform, inverse_transform, snapshot};
use lptransport::transport::{kr_distance, log_cost, torus_distance, KrOptions};
use lptransport::{LPFamily, SpectralField, TorusGrid};

fn grid2(n: usize) -> TorusGrid {
    TorusGrid::new(2, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lp_blocks_reconstruct_band_limited_fields(seed in any::<u64>(), kmax in 1usize..15, decay in 0.0f64..2.0) {
        let grid = grid2(64);
        let theta = forward_transform(&random_band_limited(grid, kmax, decay, seed).unwrap());
        let fam = LPFamily::standard(grid);
        let rec = fam.decompose(&theta).unwrap().reconstruct();
        let err = rec.sub(&theta).unwrap().l2_norm();
        prop_assert!(err <= 1e-12 * theta.l2_norm());
    }

    #[test]
    fn besov_norms_are_homogeneous_and_translation_invariant(seed in any::<u64>(), c in -5.0f64..5.0, s1 in 0usize..32, s2 in 0usize..32, a in 0.0f64..2.0) {
        let grid = grid2(32);
        let f = random_band_limited(grid, 8, 1.0, seed).unwrap();
        let fam = LPFamily::standard(grid);
        let base = besov_log_norm(&fam, &forward_transform(&f), a).unwrap().value;
        let scaled = besov_log_norm(&fam, &forward_transform(&f.scaled(c)), a).unwrap().value;
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * base.max(1.0));
        let moved = besov_log_norm(&fam, &forward_transform(&shifted(&f, [s1, s2])), a).unwrap().value;
        prop_assert!((moved - base).abs() <= 1e-11 * base);
    }

    #[test]
    fn besov_norms_satisfy_the_triangle_inequality(s1 in any::<u64>(), s2 in any::<u64>(), a in 0.0f64..2.0) {
        let grid = grid2(32);
        let fam = LPFamily::standard(grid);
        let f = forward_transform(&random_band_limited(grid, 10, 0.5, s1).unwrap());
        let g = forward_transform(&random_band_limited(grid, 10, 0.5, s2).unwrap());
        let sum = f.add(&g).unwrap();
        let norms: [fn(&LPFamily, &SpectralField, f64) -> f64; 3] = [
            |fam, x, a| besov_log_norm(fam, x, a).unwrap().value,
            |fam, x, a| besov_log_norm_equiv(fam, x, a).unwrap().value,
            |_, x, a| log_sobolev_sum(x, a).unwrap().value,
        ];
        for norm in norms {
            prop_assert!(norm(&fam, &sum, a) <= (norm(&fam, &f, a) + norm(&fam, &g, a)) * (1.0 + 1e-13));
        }
    }

    #[test]
    fn block_norm_increases_with_a(seed in any::<u64>(), a in 0.0f64..2.0, da in 0.0f64..1.0) {
        let grid = grid2(32);
        let fam = LPFamily::standard(grid);
        let f = forward_transform(&random_band_limited(grid, 12, 0.0, seed).unwrap());
        let lo = besov_log_norm(&fam, &f, a).unwrap().value;
        let hi = besov_log_norm(&fam, &f, a + da).unwrap().value;
        prop_assert!(lo <= hi * (1.0 + 1e-14));
    }

    #[test]
    fn poincare_for_negative_sobolev(seed in any::<u64>()) {
        let grid = grid2(32);
        let f = forward_transform(&random_band_limited(grid, 10, 0.5, seed).unwrap());
        prop_assert!(homogeneous_sobolev_norm(&f, -1.0).unwrap() <= f.l2_norm() * (1.0 + 1e-14));
        prop_assert!(f.l2_norm() <= homogeneous_sobolev_norm(&f, 1.0).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn log_cost_is_a_metric_on_the_torus(
        x in prop::array::uniform2(0.0f64..6.3),
        y in prop::array::uniform2(0.0f64..6.3),
        z in prop::array::uniform2(0.0f64..6.3),
        delta in 1e-4f64..2.0,
    ) {
        let d = |p: [f64; 2], q: [f64; 2]| log_cost(torus_distance(p, q), delta).unwrap();
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-12);
        prop_assert!((d(x, y) - d(y, x)).abs() <= 1e-15);
        prop_assert!(d(x, x) == 0.0);
    }

    #[test]
    fn kr_distance_is_symmetric_and_shift_bounded(seed in any::<u64>(), s in 1usize..4, delta in 0.01f64..1.0) {
        let grid = TorusGrid::new(1, 32).unwrap();
        let f = random_band_limited(grid, 5, 1.0, seed).unwrap();
        let g = shifted(&f, [s, 0]);
        let opts = KrOptions::default();
        let dfg = kr_distance(&f, &g, delta, opts).unwrap();
        let dgf = kr_distance(&g, &f, delta, opts).unwrap();
        prop_assert!((dfg.distance - dgf.distance).abs() <= 1e-10 * dfg.distance.max(1e-12));
        // Moving every atom of the positive parts by s cells is admissible.
        let mass: f64 = f.values().iter().filter(|v| **v > 0.0).sum::<f64>() * grid.cell_volume();
        let shift = log_cost(s as f64 * grid.spacing(), delta).unwrap();
        prop_assert!(dfg.distance <= 2.0 * mass * shift * (1.0 + 1e-9));
    }

    #[test]
    fn uniform_transport_preserves_norms(seed in any::<u64>(), c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let grid = grid2(32);
        let f = random_band_limited(grid, 6, 1.0, seed).unwrap();
        let config = SolverConfig::new(grid, 0.0, 0.02).unwrap();
        let obs = ObserverSet::uniform(1.0, 4, vec![Diagnostic::L2, Diagnostic::Besov { a: 0.9, flavor: lptransport::besov::Flavor::Block }]).unwrap();
        let series = solve(&config, &VelocityModel::Uniform { c: [c1, c2] }, &f, 1.0, &obs).unwrap();
        let first = series.rows[0].clone();
        for row in &series.rows {
            for (x, y) in row.iter().zip(&first) {
                prop_assert!((x - y).abs() <= 1e-10 * y);
            }
        }
    }

    #[test]
    fn snapshots_round_trip(seed in any::<u64>(), log_n in 3u32..7, dim in 1usize..3) {
        let grid = TorusGrid::new(dim, 1 << log_n).unwrap();
        let f = random_band_limited(grid, 2, 0.0, seed).unwrap();
        let back = snapshot::decode(&snapshot::encode(&f)).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn transforms_invert(seed in any::<u64>()) {
        let grid = grid2(32);
        let f = random_band_limited(grid, 10, 0.5, seed).unwrap();
        let back = inverse_transform(&forward_transform(&f)).unwrap();
        let err = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13);
    }

    #[test]
    fn ols_residuals_are_orthogonal_to_the_design(ys in prop::collection::vec(-10.0f64..10.0, 3..20)) {
        let x: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.5).collect();
        let fit = RateFit::ols("p", x.clone(), ys).unwrap();
        let r = fit.residuals();
        let scale = fit.y.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!(r.iter().sum::<f64>().abs() <= 1e-11 * scale);
        prop_assert!(r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().abs() <= 1e-10 * scale * x.len() as f64);
    }
}
