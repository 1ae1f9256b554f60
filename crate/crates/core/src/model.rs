//! Geometry and channel synthesis for the pinching-antenna uplink.
//!
//! A dielectric waveguide runs along the x-axis at height `d`, carrying `N`
//! pinching antennas (PAs) whose x-coordinates `v_n` can be placed anywhere in
//! `[0, L_x]`. Users sit on the ground plane inside the `[0, L_x] x [0, L_y]`
//! rectangle. The free-space channel between a user at `u` and the PA at
//! `(v_n, 0, d)` is
//!
//! ```text
//! h_{u,n} = lambda / (4 pi r) * exp(-j 2 pi r / lambda),   r = ||u - v_n||
//! ```
//!
//! and the equivalent uplink channel seen at the waveguide feed point
//! `(0, 0, d)` adds the in-waveguide propagation phase per PA:
//!
//! ```text
//! g_u = sum_n h_{u,n} * exp(-j 2 pi n_ref / lambda * v_n)
//! ```
//!
//! All functions here are pure; channel evaluation and its analytic
//! derivative with respect to a PA position are deterministic in their
//! inputs.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;
use thiserror::Error;

/// 3D point in meters.
pub type Point3 = [f64; 3];

/// Euclidean distance between two points.
pub fn distance(a: Point3, b: Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("user and antenna positions coincide; pathloss is undefined at zero distance")]
    ZeroDistance,
    #[error("scenario invariant violated: {0}")]
    InvalidScenario(String),
}

/// Physical and system constants for one experiment.
///
/// Powers are stored in watts; dBm inputs are converted once at config parse
/// time. All internal math is linear-scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Carrier wavelength, meters.
    pub lambda: f64,
    /// System bandwidth, Hz.
    pub bandwidth: f64,
    /// Per-antenna noise power sigma^2, watts.
    pub noise_power: f64,
    /// Refractive index of the waveguide (dimensionless).
    pub n_ref: f64,
    /// Waveguide length L_x, meters.
    pub waveguide_length: f64,
    /// Depth L_y of the user region, meters.
    pub region_depth: f64,
    /// Waveguide height d above the ground plane, meters.
    pub height: f64,
    /// Number of pinching antennas N.
    pub n_antennas: usize,
    /// Number of AirComp users K_A.
    pub k_aircomp: usize,
    /// Number of NOMA users K_N.
    pub k_noma: usize,
    /// Hybrid-rate weight alpha in [0, 1].
    pub alpha: f64,
    /// Per-user transmit power budget, watts (identical for all users).
    pub p_max: f64,
    /// Per-NOMA-user minimum rate, bits/s.
    pub r_min: f64,
    /// AirComp MSE threshold epsilon_0 (dimensionless).
    pub mse_threshold: f64,
    /// Monte-Carlo realization count.
    pub realizations: usize,
    /// Base RNG seed.
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            lambda: 0.1,
            bandwidth: 1.0e6,
            noise_power: 1.0e-12, // -90 dBm
            n_ref: 1.4,
            waveguide_length: 10.0,
            region_depth: 10.0,
            height: 5.0,
            n_antennas: 6,
            k_aircomp: 4,
            k_noma: 3,
            alpha: 0.5,
            p_max: 0.1, // 20 dBm
            r_min: 0.5e6,
            mse_threshold: 1.0e-2,
            realizations: 200,
            seed: 1,
        }
    }
}

impl Scenario {
    /// Check the range invariants of every field.
    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ModelError::InvalidScenario(msg.to_string()))
            }
        };
        check(self.lambda > 0.0, "lambda must be > 0")?;
        check(self.bandwidth > 0.0, "bandwidth must be > 0")?;
        check(self.noise_power > 0.0, "noise_power must be > 0")?;
        check(self.n_ref > 0.0, "n_ref must be > 0")?;
        check(self.waveguide_length > 0.0, "waveguide_length must be > 0")?;
        check(self.region_depth >= 0.0, "region_depth must be >= 0")?;
        check(self.height > 0.0, "height must be > 0")?;
        check(self.n_antennas >= 1, "n_antennas must be >= 1")?;
        check(self.k_aircomp >= 1, "k_aircomp must be >= 1")?;
        check(self.k_noma >= 1, "k_noma must be >= 1")?;
        check(
            (0.0..=1.0).contains(&self.alpha),
            "alpha must be in [0, 1]",
        )?;
        check(self.p_max > 0.0, "p_max must be > 0")?;
        check(self.r_min >= 0.0, "r_min must be >= 0")?;
        check(self.mse_threshold > 0.0, "mse_threshold must be > 0")?;
        check(self.realizations >= 1, "realizations must be >= 1")?;
        Ok(())
    }

    /// Noise power of the aggregated feed-point signal: N * sigma^2.
    pub fn feed_noise(&self) -> f64 {
        self.n_antennas as f64 * self.noise_power
    }

    /// In-waveguide phase accumulation rate 2 pi n_ref / lambda, rad/m.
    pub fn guide_phase_rate(&self) -> f64 {
        2.0 * PI * self.n_ref / self.lambda
    }

    /// QoS SINR target gamma_j = 2^(r_min / B) - 1 (identical for all NOMA
    /// users).
    pub fn qos_sinr_target(&self) -> f64 {
        (self.r_min / self.bandwidth).exp2() - 1.0
    }
}

/// User drop: AirComp and NOMA user positions on the ground plane.
///
/// The two index spaces are disjoint; `aircomp[k]` and `noma[j]` refer to
/// different physical users even when `k == j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSet {
    pub aircomp: Vec<Point3>,
    pub noma: Vec<Point3>,
}

/// Draw a uniform user drop over `[0, L_x] x [0, L_y]`.
///
/// Coordinates are drawn in a fixed order (AirComp users first, then NOMA
/// users; x before y), so the result is a pure function of the RNG state.
pub fn sample_users<R: Rng>(rng: &mut R, scenario: &Scenario) -> UserSet {
    let mut draw = |count: usize| -> Vec<Point3> {
        (0..count)
            .map(|_| {
                let x = scenario.waveguide_length * rng.gen::<f64>();
                let y = scenario.region_depth * rng.gen::<f64>();
                [x, y, 0.0]
            })
            .collect()
    };
    let aircomp = draw(scenario.k_aircomp);
    let noma = draw(scenario.k_noma);
    UserSet { aircomp, noma }
}

/// Continuous pinching-antenna positions along the waveguide.
///
/// Only the x-coordinates are free; PA `n` sits at `(v[n], 0, d)` and the
/// feed point at `(0, 0, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub positions: Vec<f64>,
}

impl Placement {
    pub fn new(positions: Vec<f64>) -> Self {
        Placement { positions }
    }

    /// Uniform layout v_n = n L_x / (N + 1); also the fixed-PA benchmark.
    pub fn uniform(scenario: &Scenario) -> Self {
        let n = scenario.n_antennas;
        let lx = scenario.waveguide_length;
        Placement {
            positions: (1..=n).map(|i| i as f64 * lx / (n as f64 + 1.0)).collect(),
        }
    }

    /// True when every position lies in `[0, L_x]`.
    pub fn is_within(&self, scenario: &Scenario) -> bool {
        self.positions
            .iter()
            .all(|&v| (0.0..=scenario.waveguide_length).contains(&v))
    }

    /// Clamp every coordinate onto `[0, L_x]` (the PGA projection).
    pub fn clamp(&mut self, scenario: &Scenario) {
        for v in &mut self.positions {
            *v = v.clamp(0.0, scenario.waveguide_length);
        }
    }

    /// Antenna position in 3D.
    pub fn antenna(&self, n: usize, scenario: &Scenario) -> Point3 {
        [self.positions[n], 0.0, scenario.height]
    }
}

/// Free-space channel of Eq.-style pathloss-plus-phase form:
/// `lambda/(4 pi r) * exp(-j 2 pi r / lambda)`.
///
/// Errors on coincident positions; for any in-spec geometry the distance is
/// at least the waveguide height, so this only triggers on malformed input.
pub fn pathloss_channel(user: Point3, antenna: Point3, lambda: f64) -> Result<Complex64, ModelError> {
    let r = distance(user, antenna);
    if r == 0.0 {
        return Err(ModelError::ZeroDistance);
    }
    let magnitude = lambda / (4.0 * PI * r);
    let phase = -2.0 * PI * r / lambda;
    Ok(Complex64::from_polar(magnitude, phase))
}

/// Equivalent uplink channel `g_u` through the waveguide feed.
///
/// The feed sits at x = 0 on the same axis as the PAs, so the in-waveguide
/// path length for PA `n` is just `v_n`.
pub fn equivalent_channel(user: Point3, placement: &Placement, scenario: &Scenario) -> Complex64 {
    let rate = scenario.guide_phase_rate();
    placement
        .positions
        .iter()
        .enumerate()
        .map(|(n, &v)| {
            let h = pathloss_channel(user, placement.antenna(n, scenario), scenario.lambda)
                .expect("user-antenna distance is at least the waveguide height");
            h * Complex64::from_polar(1.0, -rate * v)
        })
        .sum()
}

/// Analytic derivative of `g_u` with respect to the n-th PA position.
///
/// Only the n-th summand of `g_u` depends on `v_n`:
///
/// ```text
/// dg_u/dv_n = (dh/dv_n - j 2 pi n_ref / lambda * h) * exp(-j 2 pi n_ref / lambda * v_n)
/// dh/dv_n   = h * ( -(v_n - x_u)/r^2 - j 2 pi / lambda * (v_n - x_u)/r )
/// ```
pub fn channel_gradient(
    user: Point3,
    placement: &Placement,
    n: usize,
    scenario: &Scenario,
) -> Complex64 {
    let v = placement.positions[n];
    let antenna = placement.antenna(n, scenario);
    let r = distance(user, antenna);
    let h = pathloss_channel(user, antenna, scenario.lambda)
        .expect("user-antenna distance is at least the waveguide height");
    let dx = v - user[0];
    let dh = h * Complex64::new(-dx / (r * r), -2.0 * PI / scenario.lambda * dx / r);
    let rate = scenario.guide_phase_rate();
    (dh - Complex64::new(0.0, rate) * h) * Complex64::from_polar(1.0, -rate * v)
}

/// Per-user equivalent channels for one (drop, placement) pair, along with
/// the SIC decoding order of the NOMA users.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub g_aircomp: Vec<Complex64>,
    pub g_noma: Vec<Complex64>,
    /// NOMA indices sorted by |g|^2 ascending (weakest decoded first).
    pub sic_order: Vec<usize>,
}

impl ChannelState {
    pub fn compute(users: &UserSet, placement: &Placement, scenario: &Scenario) -> Self {
        let g_aircomp = users
            .aircomp
            .iter()
            .map(|&u| equivalent_channel(u, placement, scenario))
            .collect();
        let g_noma: Vec<Complex64> = users
            .noma
            .iter()
            .map(|&u| equivalent_channel(u, placement, scenario))
            .collect();
        let sic_order = crate::metrics::sic_order_of(&g_noma);
        ChannelState {
            g_aircomp,
            g_noma,
            sic_order,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(a.abs()).max(1e-300)
    }

    #[test]
    fn pathloss_directly_below_antenna() {
        // r = 5 and 2 pi r / lambda = 100 pi, an integer multiple of 2 pi.
        let h = pathloss_channel([2.0, 0.0, 0.0], [2.0, 0.0, 5.0], 0.1).unwrap();
        let expected = 0.1 / (20.0 * PI);
        assert!(close(h.re, expected, 1e-12), "re = {}", h.re);
        assert!(h.im.abs() < 1e-15, "im = {}", h.im);
    }

    #[test]
    fn pathloss_magnitude_halves_when_distance_doubles() {
        let h1 = pathloss_channel([0.0, 0.0, 0.0], [0.0, 0.0, 4.0], 0.1).unwrap();
        let h2 = pathloss_channel([0.0, 0.0, 0.0], [0.0, 0.0, 8.0], 0.1).unwrap();
        assert!(close(h1.norm(), 2.0 * h2.norm(), 1e-12));
    }

    #[test]
    fn pathloss_matches_high_precision_reference() {
        // Frozen from a 50-digit evaluation of the pathloss formula at
        // user (1,1,0), PA (4,0,5), lambda = 0.1 (r = sqrt(35)).
        let h = pathloss_channel([1.0, 1.0, 0.0], [4.0, 0.0, 5.0], 0.1).unwrap();
        assert!(
            close(h.re, 7.150409264902729e-4, 1e-10),
            "re = {:e}",
            h.re
        );
        assert!(
            close(h.im, -1.139308265659459e-3, 1e-10),
            "im = {:e}",
            h.im
        );
    }

    #[test]
    fn pathloss_rejects_zero_distance() {
        let err = pathloss_channel([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 0.1);
        assert!(matches!(err, Err(ModelError::ZeroDistance)));
    }

    #[test]
    fn equivalent_channel_single_antenna_at_feed() {
        let scenario = Scenario {
            n_antennas: 1,
            ..Scenario::default()
        };
        let placement = Placement::new(vec![0.0]);
        let user = [3.0, 2.0, 0.0];
        let g = equivalent_channel(user, &placement, &scenario);
        let h = pathloss_channel(user, [0.0, 0.0, 5.0], 0.1).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn equivalent_channel_coherent_combining() {
        // Two PAs equidistant from a symmetric user; spacing chosen so the
        // in-waveguide phases differ by exactly 2 pi (n_ref * dv = lambda).
        let scenario = Scenario {
            n_antennas: 2,
            n_ref: 1.4,
            ..Scenario::default()
        };
        let dv = scenario.lambda / scenario.n_ref;
        let center = 5.0;
        let placement = Placement::new(vec![center - dv / 2.0, center + dv / 2.0]);
        let user = [center, 1.0, 0.0];
        let g = equivalent_channel(user, &placement, &scenario);
        let h = pathloss_channel(user, placement.antenna(0, &scenario), 0.1).unwrap();
        assert!(close(g.norm(), 2.0 * h.norm(), 1e-12));
    }

    #[test]
    fn equivalent_channel_matches_reference_sum() {
        // Frozen from a 50-digit term-by-term evaluation: N = 6 uniform
        // placement v_n = n*10/7, user (5,5,0), n_ref = 1.4.
        let scenario = Scenario::default();
        let placement = Placement::uniform(&scenario);
        let g = equivalent_channel([5.0, 5.0, 0.0], &placement, &scenario);
        assert!(close(g.re, 4.050104951186583e-3, 1e-9), "re = {:e}", g.re);
        assert!(close(g.im, -1.517772503105241e-3, 1e-9), "im = {:e}", g.im);
    }

    #[test]
    fn uniform_placement_matches_closed_form() {
        let scenario = Scenario::default();
        let placement = Placement::uniform(&scenario);
        for (i, &v) in placement.positions.iter().enumerate() {
            assert!(close(v, (i + 1) as f64 * 10.0 / 7.0, 1e-15));
        }
    }

    #[test]
    fn magnitude_bound_holds_for_random_geometry() {
        let scenario = Scenario::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bound = scenario.n_antennas as f64 * scenario.lambda
            / (4.0 * PI * scenario.height);
        for _ in 0..200 {
            let users = sample_users(&mut rng, &scenario);
            let positions = (0..scenario.n_antennas)
                .map(|_| scenario.waveguide_length * rng.gen::<f64>())
                .collect();
            let placement = Placement::new(positions);
            for &u in users.aircomp.iter().chain(users.noma.iter()) {
                let g = equivalent_channel(u, &placement, &scenario);
                assert!(g.norm() <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn sample_users_within_region_and_deterministic() {
        let scenario = Scenario::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = sample_users(&mut rng, &scenario);
        assert_eq!(a.aircomp.len(), 4);
        assert_eq!(a.noma.len(), 3);
        for &p in a.aircomp.iter().chain(a.noma.iter()) {
            assert!((0.0..=10.0).contains(&p[0]));
            assert!((0.0..=10.0).contains(&p[1]));
            assert_eq!(p[2], 0.0);
        }
        let mut rng2 = ChaCha8Rng::seed_from_u64(42);
        let b = sample_users(&mut rng2, &scenario);
        assert_eq!(a, b, "same seed must reproduce the same drop");
    }

    #[test]
    fn degenerate_region_puts_users_on_axis() {
        let scenario = Scenario {
            region_depth: 0.0,
            ..Scenario::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let users = sample_users(&mut rng, &scenario);
        for &p in users.aircomp.iter().chain(users.noma.iter()) {
            assert_eq!(p[1], 0.0);
        }
    }

    #[test]
    fn gradient_below_antenna_has_pure_guide_term() {
        // v_n = x_u with y_u = 0 puts the user directly below the PA; the
        // pathloss derivative vanishes and only the guide phase term remains.
        let scenario = Scenario {
            n_antennas: 1,
            ..Scenario::default()
        };
        let placement = Placement::new(vec![4.0]);
        let user = [4.0, 0.0, 0.0];
        let grad = channel_gradient(user, &placement, 0, &scenario);
        let rate = scenario.guide_phase_rate();
        let h = pathloss_channel(user, placement.antenna(0, &scenario), 0.1).unwrap();
        let expected = Complex64::new(0.0, -rate) * h * Complex64::from_polar(1.0, -rate * 4.0);
        assert!((grad - expected).norm() <= 1e-12 * expected.norm());
    }

    #[test]
    fn gradient_matches_central_finite_difference() {
        let scenario = Scenario::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let step = 1e-6;
        for _ in 0..100 {
            let users = sample_users(&mut rng, &scenario);
            let user = users.noma[0];
            let positions: Vec<f64> = (0..scenario.n_antennas)
                .map(|_| 0.5 + 9.0 * rng.gen::<f64>())
                .collect();
            let placement = Placement::new(positions);
            let n = rng.gen_range(0..scenario.n_antennas);

            let analytic = channel_gradient(user, &placement, n, &scenario);

            let mut plus = placement.clone();
            plus.positions[n] += step;
            let mut minus = placement.clone();
            minus.positions[n] -= step;
            let fd = (equivalent_channel(user, &plus, &scenario)
                - equivalent_channel(user, &minus, &scenario))
                / (2.0 * step);

            let rel = (analytic - fd).norm() / fd.norm();
            assert!(rel <= 1e-5, "gradient mismatch: rel = {rel:e}");

            // |g|^2 gradient through 2 Re(conj(g) dg).
            let g = equivalent_channel(user, &placement, &scenario);
            let analytic_sq = 2.0 * (g.conj() * analytic).re;
            let fd_sq = (equivalent_channel(user, &plus, &scenario).norm_sqr()
                - equivalent_channel(user, &minus, &scenario).norm_sqr())
                / (2.0 * step);
            let rel_sq = (analytic_sq - fd_sq).abs() / fd_sq.abs().max(1e-12);
            assert!(rel_sq <= 1e-5, "|g|^2 gradient mismatch: rel = {rel_sq:e}");
        }
    }

    #[test]
    fn translation_leaves_pathloss_magnitude_invariant() {
        let scenario = Scenario::default();
        let user = [2.0, 3.0, 0.0];
        let placement = Placement::new(vec![1.0, 4.0]);
        let shift = 1.5;
        let scenario2 = Scenario {
            n_antennas: 2,
            ..scenario.clone()
        };
        let shifted_user = [user[0] + shift, user[1], 0.0];
        let shifted = Placement::new(vec![1.0 + shift, 4.0 + shift]);
        for n in 0..2 {
            let h = pathloss_channel(user, placement.antenna(n, &scenario2), 0.1).unwrap();
            let hs = pathloss_channel(shifted_user, shifted.antenna(n, &scenario2), 0.1).unwrap();
            assert!(close(h.norm(), hs.norm(), 1e-12));
        }
    }

    #[test]
    fn scenario_validation_rejects_bad_ranges() {
        let mut s = Scenario::default();
        s.alpha = 1.5;
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        s.mse_threshold = 0.0;
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        s.n_antennas = 0;
        assert!(s.validate().is_err());
        assert!(Scenario::default().validate().is_ok());
    }
}
