//! Statistical properties of the Gaussian measures and of the estimators built on them.

use qnls_core::energy::{EnergyParams, SumMethod};
use qnls_core::measures::{cutoff_indicator, lp_norm_mc, map_samples, partition_estimate, wgm_weight};
use qnls_core::spectral::{conserved_c_truncated, GridSpec};
use qnls_core::stats::{mean_stderr, z_score};
use qnls_core::{Complex64, MeasureParams, WeightFamily};

const N: usize = 50_000;

/// Two-sample z for the means of `a` and `b`.
fn two_sample_z(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_stderr(a);
    let (mb, sb) = mean_stderr(b);
    z_score(ma - mb, sa.hypot(sb))
}

#[test]
fn free_evolution_preserves_the_law_of_each_mode() {
    let p = MeasureParams::japanese(2.0, 8).unwrap();
    let t = 0.37;
    let rotated = map_samples(1, N, &p, |u| Ok(u.linear_evolve(t).coeffs().to_vec())).unwrap();
    let plain = map_samples(2, N, &p, |u| Ok(u.coeffs().to_vec())).unwrap();
    let stats: [fn(Complex64) -> f64; 4] = [|z| z.re, |z| z.im, |z| z.re * z.re, |z| z.re * z.im];
    for k in [0usize, 3, 8, 13, 16] {
        for f in stats {
            let a: Vec<f64> = rotated.iter().map(|v| f(v[k])).collect();
            let b: Vec<f64> = plain.iter().map(|v| f(v[k])).collect();
            let z = two_sample_z(&a, &b);
            assert!(z.abs() <= 4.0, "mode index {k}: z = {z}");
        }
    }
}

#[test]
fn modes_are_uncorrelated_and_circular() {
    let p = MeasureParams::japanese(1.8, 6).unwrap();
    let samples = map_samples(3, N, &p, |u| Ok(u.coeffs().to_vec())).unwrap();
    let len = samples[0].len();
    for j in 0..len {
        for k in j..len {
            // E[u_j conj(u_k)] vanishes off the diagonal and E[u_j u_k] vanishes always.
            let cov: Vec<Complex64> = samples.iter().map(|v| v[j] * v[k].conj()).collect();
            let pseudo: Vec<Complex64> = samples.iter().map(|v| v[j] * v[k]).collect();
            let mut parts = vec![pseudo.iter().map(|z| z.re).collect::<Vec<_>>(), pseudo.iter().map(|z| z.im).collect()];
            if j != k {
                parts.push(cov.iter().map(|z| z.re).collect());
                parts.push(cov.iter().map(|z| z.im).collect());
            }
            for xs in parts {
                let (m, se) = mean_stderr(&xs);
                assert!(z_score(m, se).abs() <= 4.5, "({j}, {k}): mean {m}, stderr {se}");
            }
        }
    }
}

#[test]
fn both_weight_families_give_the_declared_variances() {
    for fam in [WeightFamily::japanese(2.5), WeightFamily::equivalent(2.5)] {
        let p = MeasureParams::new(fam, 4, None).unwrap();
        let moduli = map_samples(4, N, &p, |u| Ok(u.iter().map(|(_, c)| c.norm_sqr()).collect::<Vec<_>>())).unwrap();
        for k in -4i64..=4 {
            let xs: Vec<f64> = moduli.iter().map(|v| v[(k + 4) as usize]).collect();
            let (m, se) = mean_stderr(&xs);
            assert!(z_score(m - p.mode_variance(k), se).abs() <= 4.0);
        }
    }
}

#[test]
fn indicator_norm_is_a_power_of_the_acceptance_rate() {
    let p = MeasureParams::japanese(2.0, 8).unwrap().with_cutoff(6.0).unwrap();
    let grid = GridSpec::for_quintic(8);
    let ind = |u: &qnls_core::FourierState| Ok(f64::from(cutoff_indicator(u, &p, 8, &grid)?));
    let rate = lp_norm_mc(ind, 1.0, &p, 20_000, 5).unwrap().estimate;
    let l3 = lp_norm_mc(ind, 3.0, &p, 20_000, 5).unwrap().estimate;
    assert!(rate > 0.0 && rate < 1.0);
    assert!((l3 - rate.powf(1.0 / 3.0)).abs() <= 1e-12);
}

#[test]
fn partition_constant_is_positive_and_reproducible() {
    let p = MeasureParams::japanese(2.0, 8).unwrap().with_cutoff(8.0).unwrap();
    let e = EnergyParams::new(4, WeightFamily::japanese(2.0)).with_method(SumMethod::SpaceTime);
    let grid = GridSpec::for_quintic(8);
    let a = partition_estimate(&p, &e, &grid, 2000, 6).unwrap();
    let b = partition_estimate(&p, &e, &grid, 2000, 6).unwrap();
    assert_eq!(a, b);
    assert!(a.estimate > 0.0 && a.estimate.is_finite());
    // weights vanish exactly outside the cutoff, which uses C_N at the energy truncation
    let w = map_samples(7, 200, &p, |u| {
        Ok((wgm_weight(u, &p, &e, &grid)?, conserved_c_truncated(u, 4, &grid)?))
    })
    .unwrap();
    assert!(w.iter().all(|&(wt, c)| (wt == 0.0) == (c > 8.0)));
}
