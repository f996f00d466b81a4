mod common;

use approx::assert_relative_eq;
use nalgebra::DVector;
use num_complex::Complex64;

use common::*;
use swipt_noma::baselines::{self, BaselineDetail};
use swipt_noma::miso::{self, MisoOptions};
use swipt_noma::system::{self, MisoInstance, SisoInstance};

fn detail_beams(d: &BaselineDetail) -> (&DVector<Complex64>, &DVector<Complex64>) {
    match d {
        BaselineDetail::Beamformers { w1, w2, .. } => (w1, w2),
        other => panic!("expected beamformers, got {other:?}"),
    }
}

#[test]
fn noncoop_miso_tends_to_matched_filter() {
    let opts = MisoOptions::default();
    for inst in synthetic_instances(11, 6, 3) {
        let r = baselines::noncoop_noma_miso(&inst, 1e-6, 1.0, &opts).unwrap();
        assert!(r.feasible);
        let (_, w2) = detail_beams(&r.detail);
        let s2 = inst.h2.norm_squared();
        // All power on user 2, along h2.
        assert_relative_eq!(system::gain(&inst.h2, w2), s2, max_relative = 1e-4);
        assert_relative_eq!(r.r2, (1.0 + s2).log2(), max_relative = 1e-4);
    }
}

#[test]
fn parallel_channels_reduce_to_scalar_noma() {
    let opts = MisoOptions::default();
    let mut r = rng(12);
    for _ in 0..6 {
        let h2 = complex_gaussian(&mut r, 2, 4.0);
        let c = log_uniform(&mut r, 0.2, 0.9);
        let h1 = &h2 * Complex64::new(0.0, c);
        let inst = MisoInstance::new(h1.clone(), h2.clone(), 1.0).unwrap();
        let scalar = SisoInstance::new(h1.norm_squared(), h2.norm_squared(), 1.0).unwrap();
        for gamma in [0.5, 1.0, 2.0] {
            let m = baselines::noncoop_noma_miso(&inst, gamma, 1.0, &opts).unwrap();
            let s = baselines::noncoop_noma_siso(&scalar, gamma, 1.0).unwrap();
            assert_eq!(m.feasible, s.feasible, "gamma {gamma}");
            if s.feasible {
                assert_relative_eq!(m.r2, s.r2, max_relative = 1e-6);
            }
        }
    }
}

#[test]
fn noncoop_infeasible_beyond_single_user_snr() {
    let opts = MisoOptions::default();
    for inst in synthetic_instances(13, 6, 2) {
        let s1 = inst.h1.norm_squared();
        let r = baselines::noncoop_noma_miso(&inst, s1 * 1.01, 1.0, &opts).unwrap();
        assert!(!r.feasible);
        assert_eq!((r.r1, r.r2, r.rsum), (0.0, 0.0, 0.0));
    }
}

#[test]
fn noncoop_siso_alpha_meets_both_receivers() {
    let inst = SisoInstance::new(4.0, 20.0, 1.0).unwrap();
    let gamma = 1.0;
    let alpha = baselines::noncoop_alpha(&inst, gamma).unwrap();
    let sinr = |h: f64| alpha * h / ((1.0 - alpha) * h + 1.0);
    assert!(sinr(inst.h1) >= gamma * (1.0 - 1e-12));
    assert!(sinr(inst.h2) >= gamma * (1.0 - 1e-12));
    assert_relative_eq!(sinr(inst.h1), gamma, max_relative = 1e-12);
    assert!(baselines::noncoop_alpha(&SisoInstance::new(0.9, 20.0, 1.0).unwrap(), 1.0).is_none());
}

#[test]
fn oma_uses_matched_filter_gains() {
    let h1 = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    let h2 = DVector::from_vec(vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0)]);
    let inst = MisoInstance::new(h1, h2, 1.0).unwrap();
    let d = baselines::oma_dynamic_miso(&inst, 0.5, 2.0).unwrap();
    // log2(1 + 2) = 1.585 for user 1, log2(1 + 9) for user 2.
    let tau1 = 0.5 / 3f64.log2();
    assert_eq!(d.detail, BaselineDetail::TimeSplit { tau1 });
    assert_relative_eq!(d.r2, 2.0 * (1.0 - tau1) * 10f64.log2(), max_relative = 1e-14);
    assert_relative_eq!(d.r1, 1.0);
    let f = baselines::oma_fixed_miso(&inst, 0.5, 2.0).unwrap();
    assert_relative_eq!(f.r2, 10f64.log2(), max_relative = 1e-14);
    assert!(d.rsum >= f.rsum);
    assert!(!baselines::oma_fixed_miso(&inst, 0.8, 2.0).unwrap().feasible);
    assert!(baselines::oma_dynamic_miso(&inst, 0.8, 2.0).unwrap().feasible);
}

#[test]
fn cooperation_never_loses_to_noncooperative_noma() {
    let opts = MisoOptions::default();
    let mut all = model_instances(14, 6, 2, -30.0, 30.0);
    all.extend(synthetic_instances(15, 6, 2));
    for inst in all {
        let nc = baselines::noncoop_noma_miso(&inst, 1.0, 1.0, &opts).unwrap();
        let coop = miso::sca_solve(&inst, 1.0, miso::DEFAULT_SCA_EPS, miso::DEFAULT_SCA_MAX_ITER).unwrap();
        if nc.feasible {
            assert!(coop.status.has_solution());
            assert!((1.0 + coop.objective).log2() >= nc.r2 * (1.0 - 1e-9));
        }
    }
}

#[test]
fn rejects_negative_targets() {
    let inst = SisoInstance::new(4.0, 20.0, 1.0).unwrap();
    assert!(baselines::noncoop_noma_siso(&inst, -1.0, 1.0).is_err());
    assert!(baselines::oma_dynamic(1.0, 1.0, f64::NAN, 1.0).is_err());
    assert!(baselines::oma_fixed(1.0, 1.0, -0.1, 1.0).is_err());
}
