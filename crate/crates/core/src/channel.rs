//! Random channel realizations: users dropped uniformly in a rectangular room,
//! distance-based path loss, Rayleigh / Rician small-scale fading.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{MisoInstance, SystemParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub room_width_m: f64,
    pub room_depth_m: f64,
    pub bs_position: (f64, f64),
    /// Drops closer than this to the BS or to each other are redrawn.
    pub min_distance_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            room_width_m: 5.0,
            room_depth_m: 6.0,
            bs_position: (0.0, 2.5),
            min_distance_m: 0.1,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.room_width_m > 0.0 && self.room_depth_m > 0.0) {
            return Err(Error::InvalidParameter("room dimensions must be positive".into()));
        }
        if !(self.min_distance_m > 0.0) {
            return Err(Error::InvalidParameter("min_distance_m must be positive".into()));
        }
        Ok(())
    }

    fn contains(&self, p: (f64, f64)) -> bool {
        (0.0..=self.room_width_m).contains(&p.0) && (0.0..=self.room_depth_m).contains(&p.1)
    }
}

/// Physical channels of one drop, before the `√P_s/σ` normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub raw_h1_vec: DVector<Complex64>,
    pub raw_h2_vec: DVector<Complex64>,
    pub raw_g1: Complex64,
    pub user1_position: (f64, f64),
    pub user2_position: (f64, f64),
}

impl ChannelDraw {
    /// Normalized instance for the given transmit and noise powers.
    pub fn normalize(&self, params: &SystemParams) -> Result<MisoInstance> {
        let a1 = params.snr_scale(1).sqrt();
        let a2 = params.snr_scale(2).sqrt();
        let noise_ratio = params.snr_scale(1) / params.snr_scale(2);
        MisoInstance::new(
            self.raw_h1_vec.map(|z| z * a1),
            self.raw_h2_vec.map(|z| z * a2),
            self.raw_g1.norm_sqr() * noise_ratio,
        )
    }
}

/// `10⁻³ · d^(−exponent)`.
pub fn path_loss(distance_m: f64, exponent: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "distance must be positive, got {distance_m}"
        )));
    }
    Ok(1e-3 * distance_m.powf(-exponent))
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn sample_cn(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Line-of-sight component: the all-ones vector.
pub fn los_vector(n: usize) -> DVector<Complex64> {
    DVector::from_element(n, Complex64::new(1.0, 0.0))
}

/// `√(K/(1+K))·los + √(1/(1+K))·nlos`; unit per-entry power.
pub fn sample_rician_vector(rng: &mut impl Rng, k_factor: f64, n: usize) -> DVector<Complex64> {
    let los = (k_factor / (1.0 + k_factor)).sqrt();
    let nlos = (1.0 / (1.0 + k_factor)).sqrt();
    let base = los_vector(n);
    DVector::from_fn(n, |i, _| base[i] * los + sample_cn(rng) * nlos)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Draws user positions and fading for one realization.
pub fn draw_channel(rng: &mut impl Rng, params: &SystemParams, geometry: &GeometryConfig) -> Result<ChannelDraw> {
    params.validate()?;
    geometry.validate()?;
    let place = |rng: &mut dyn rand::RngCore| {
        (
            rng.random::<f64>() * geometry.room_width_m,
            rng.random::<f64>() * geometry.room_depth_m,
        )
    };
    let bs = geometry.bs_position;
    let (p1, p2) = loop {
        let p1 = place(rng);
        let p2 = place(rng);
        let d = geometry.min_distance_m;
        if dist(p1, bs) >= d && dist(p2, bs) >= d && dist(p1, p2) >= d {
            break (p1, p2);
        }
    };
    debug_assert!(geometry.contains(p1) && geometry.contains(p2));
    let n = params.antenna_count_nt;
    let pl1 = path_loss(dist(p1, bs), params.pathloss_exp_user1)?.sqrt();
    let pl2 = path_loss(dist(p2, bs), params.pathloss_exp_user2)?.sqrt();
    let pl12 = path_loss(dist(p1, p2), params.pathloss_exp_relay)?.sqrt();
    let h1 = DVector::from_fn(n, |_, _| sample_cn(rng)) * Complex64::from(pl1);
    let h2 = sample_rician_vector(rng, params.rician_k, n) * Complex64::from(pl2);
    let g1 = sample_rician_vector(rng, params.rician_k, 1)[0] * pl12;
    Ok(ChannelDraw {
        raw_h1_vec: h1,
        raw_h2_vec: h2,
        raw_g1: g1,
        user1_position: p1,
        user2_position: p2,
    })
}

/// Draws and normalizes one instance.
pub fn sample_instance(rng: &mut impl Rng, params: &SystemParams, geometry: &GeometryConfig) -> Result<MisoInstance> {
    draw_channel(rng, params, geometry)?.normalize(params)
}

/// Seed of trial `trial` under `master`, via a SplitMix64 finalizer so that
/// neighbouring trials get unrelated streams.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, trial))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_loss_examples() {
        assert_eq!(path_loss(1.0, 2.0).unwrap(), 1e-3);
        assert!((path_loss(2.0, 2.0).unwrap() - 2.5e-4).abs() < 1e-18);
        assert_eq!(path_loss(1.0, 4.0).unwrap(), 1e-3);
        assert!(path_loss(0.0, 2.0).is_err());
        assert!(path_loss(-1.0, 2.0).is_err());
    }

    #[test]
    fn rician_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = sample_rician_vector(&mut rng, 1e12, 3);
        for z in v.iter() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-5);
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let p = SystemParams::default();
        let g = GeometryConfig::default();
        let a = sample_instance(&mut trial_rng(7, 3), &p, &g).unwrap();
        let b = sample_instance(&mut trial_rng(7, 3), &p, &g).unwrap();
        assert_eq!(a, b);
        let c = sample_instance(&mut trial_rng(7, 4), &p, &g).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn normalization_chain_hand_value() {
        let draw = ChannelDraw {
            raw_h1_vec: DVector::from_element(1, Complex64::new(path_loss(3.0, 2.0).unwrap().sqrt(), 0.0)),
            raw_h2_vec: DVector::from_element(1, Complex64::new(1.0, 0.0)),
            raw_g1: Complex64::new(1.0, 0.0),
            user1_position: (3.0, 2.5),
            user2_position: (1.0, 1.0),
        };
        let inst = draw.normalize(&SystemParams::default()).unwrap();
        let expect = 1e12 * 1e-3 / 9.0;
        assert!((inst.h1[0].norm_sqr() / expect - 1.0).abs() < 1e-12);
    }
}
