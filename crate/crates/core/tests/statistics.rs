use rand::seq::SliceRandom;
use rand::SeedableRng;
use ssmt_core::lrt::{gaussian_density, lr_tail_quadrature, QuadratureOptions};
use ssmt_core::pvalues::gaussian_upper_tail;
use ssmt_core::rng::ReplicateRng;
use ssmt_core::{
    conservative_empirical_pvalues, generate, lrt_oracle_tail, monte_carlo, ss_bh, DensityPair,
    Family, NullTrainingSample, Procedure, ScenarioSpec, TestStatistics,
};

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn gaussian_iid_moments() {
    let spec = ScenarioSpec::gaussian(6, 4, 3, 2.5, 0.2, 21);
    let (mut null, mut alt, mut nts) = (Vec::new(), Vec::new(), Vec::new());
    for r in 0..20_000 {
        let d = generate(&spec, r).unwrap();
        for (x, h0) in d.x.values().iter().zip(&d.h0_mask) {
            if *h0 { null.push(*x) } else { alt.push(*x) }
        }
        nts.extend_from_slice(&d.y);
    }
    for (sample, mu) in [(&null, 0.0), (&alt, 2.5), (&nts, 0.0)] {
        let (m, v) = mean_var(sample);
        let se = (1.0 / sample.len() as f64).sqrt();
        assert!((m - mu).abs() < 4.0 * se, "mean {m} vs {mu}");
        assert!((v - 1.0).abs() < 0.03, "variance {v}");
    }
}

#[test]
fn equicorrelated_family_has_target_correlation() {
    let spec = ScenarioSpec::gaussian(3, 5, 0, 0.0, 0.2, 8).with_family(Family::GaussianNegEquicorr);
    let rho = spec.equicorrelation();
    assert!((rho + 1.0 / 7.0).abs() < 1e-15);
    let reps = 50_000;
    let d = 8;
    let mut prod = vec![0.0; d * d];
    for r in 0..reps {
        let ds = generate(&spec, r).unwrap();
        let z: Vec<f64> = ds.y.iter().chain(ds.x.values()).copied().collect();
        for i in 0..d {
            for j in 0..d {
                prod[i * d + j] += z[i] * z[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            let c = prod[i * d + j] / reps as f64;
            let target = if i == j { 1.0 } else { rho };
            assert!((c - target).abs() < 0.03, "cov[{i},{j}] = {c}");
        }
    }
    // rho = -1/(d-1) makes the coordinate sum degenerate, so all entries sum to zero.
    let total: f64 = prod.iter().sum::<f64>() / reps as f64;
    assert!(total.abs() < 1e-6, "{total}");
}

#[test]
fn student_with_large_df_is_close_to_gaussian() {
    let mut spec = ScenarioSpec::gaussian(50, 0, 0, 0.0, 0.2, 3).with_family(Family::StudentIid);
    spec.df = 400.0;
    let mut v: Vec<f64> = (0..400).flat_map(|r| generate(&spec, r).unwrap().x.values().to_vec()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let ks = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - gaussian_upper_tail(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // DKW at 1e-3 plus the t(400) vs N(0,1) distance (< 1e-3).
    let bound = ((2.0f64 / 1e-3).ln() / (2.0 * n)).sqrt() + 1e-3;
    assert!(ks < bound, "KS {ks} >= {bound}");
}

#[test]
fn null_conservative_pvalue_is_nearly_uniform_for_large_n() {
    let spec = ScenarioSpec::gaussian(1, 999, 0, 0.0, 0.2, 17);
    let reps = 5_000;
    let mut p: Vec<f64> = (0..reps)
        .map(|r| {
            let d = generate(&spec, r).unwrap();
            conservative_empirical_pvalues::<f64, f64>(&d.x, &d.nts().unwrap()).values[0]
        })
        .collect();
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    let ks = p
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - i as f64 / n).abs().max(((i + 1) as f64 / n - u).abs()))
        .fold(0.0, f64::max);
    let bound = ((2.0f64 / 1e-3).ln() / (2.0 * n)).sqrt() + 1.0 / 1000.0;
    assert!(ks < bound, "KS {ks} >= {bound}");
}

#[test]
fn ss_bh_commutes_with_relabelling() {
    let mut rng = ReplicateRng::seed_from_u64(5);
    let spec = ScenarioSpec::gaussian(40, 30, 15, 3.0, 0.3, 12);
    for r in 0..50 {
        let d = generate(&spec, r).unwrap();
        let y = d.nts().unwrap();
        let base = ss_bh(&d.x, &y, 0.3).unwrap().0;
        let mut perm: Vec<usize> = (0..40).collect();
        perm.shuffle(&mut rng);
        let xp = TestStatistics::new(perm.iter().map(|&i| d.x.values()[i]).collect()).unwrap();
        let mut yp = d.y.clone();
        yp.shuffle(&mut rng);
        let got = ss_bh(&xp, &NullTrainingSample::new(yp).unwrap(), 0.3).unwrap().0;
        let mut mapped: Vec<usize> = got.indices.iter().map(|&i| perm[i]).collect();
        mapped.sort_unstable();
        assert_eq!(mapped, base.indices);
    }
}

#[test]
fn lr_tail_quadrature_matches_gaussian_closed_form() {
    for mu in [0.5, 1.0, 2.0, 3.0] {
        for t in [0.0, 0.1, 0.5, 1.0, 2.0, 10.0] {
            let closed = lrt_oracle_tail(t, &DensityPair::GaussianShift { mu }).unwrap();
            let quad = lr_tail_quadrature(
                t,
                &|u| gaussian_density(u, 0.0),
                &|u| gaussian_density(u, mu),
                (-12.0, 12.0 + mu),
                QuadratureOptions { abs_tol: 1e-12, ..QuadratureOptions::default() },
            )
            .unwrap();
            assert!((closed - quad).abs() < 1e-10, "mu {mu} t {t}: {closed} vs {quad}");
        }
    }
}

#[test]
fn oracle_bh_has_level_alpha_under_full_independent_null() {
    let spec = ScenarioSpec::gaussian(5, 10, 0, 0.0, 0.2, 44);
    let s = monte_carlo(&spec, &[Procedure::OracleBh, Procedure::SsBh], 40_000, 0.0).unwrap();
    let or = s.summary(Procedure::OracleBh).unwrap();
    assert!((or.fdr_hat - 0.2).abs() < 4.0 * or.se_fdr, "{}", or.fdr_hat);
    let ss = s.summary(Procedure::SsBh).unwrap();
    assert!(ss.fdr_hat <= 0.2 + 4.0 * ss.se_fdr, "{}", ss.fdr_hat);
}
