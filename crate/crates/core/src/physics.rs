//! Double-well potential, mobilities, the optimal profile and the
//! surface-tension / mobility decompositions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `1 / c_N^2` with `|c_N| = 1/6`: rescales the MCH mobility so both models
/// share the same sharp-interface velocity.
pub const MCH_NORMALIZATION: f64 = 36.0;

/// Mobility arguments are clamped to this range before evaluation.
pub const MOBILITY_CLAMP: (f64, f64) = (-0.5, 1.5);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Mch,
    Nmnch,
}

/// `W(s) = s^2 (1-s)^2 / 2`.
#[inline]
pub fn w(s: f64) -> f64 {
    let t = s * (1.0 - s);
    0.5 * t * t
}

/// `W'(s) = s (1-s) (1-2s)`.
#[inline]
pub fn wp(s: f64) -> f64 {
    s * (1.0 - s) * (1.0 - 2.0 * s)
}

/// `W''(s) = 1 - 6s + 6s^2`.
#[inline]
pub fn wpp(s: f64) -> f64 {
    1.0 - 6.0 * s + 6.0 * s * s
}

/// Optimal 1D transition `q(z) = (1 - tanh(z/2)) / 2`, going from 1 at
/// `z -> -inf` to 0 at `z -> +inf`.
#[inline]
pub fn optimal_profile(z: f64) -> f64 {
    0.5 * (1.0 - (0.5 * z).tanh())
}

/// `q'(z) = -q(z) (1 - q(z)) = -sqrt(2 W(q(z)))`.
#[inline]
pub fn optimal_profile_derivative(z: f64) -> f64 {
    let q = optimal_profile(z);
    -q * (1.0 - q)
}

/// Integrals of the optimal profile that enter the sharp-interface laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticConstants {
    /// `c_W = int (q')^2 dz`
    pub c_w: f64,
    /// `c_M = int M(q) dz` with `M = 2W`
    pub c_m: f64,
    /// `c_N = int q' / N(q) dz` with `N = 1/sqrt(2W)`; negative.
    pub c_n: f64,
}

impl AsymptoticConstants {
    /// Velocity prefactor `c_W c_M / c_N^2` of the doubly degenerate model.
    pub fn nmn_prefactor(&self) -> f64 {
        self.c_w * self.c_m / (self.c_n * self.c_n)
    }
}

/// Composite Simpson on `[-40, 40]` with `2^16` intervals, using the
/// unsmoothed mobility `M = 2W`.
pub fn asymptotic_constants() -> AsymptoticConstants {
    const HALF_WIDTH: f64 = 40.0;
    const INTERVALS: usize = 1 << 16;
    let h = 2.0 * HALF_WIDTH / INTERVALS as f64;
    let mut sums = [0.0f64; 3];
    for i in 0..=INTERVALS {
        let z = -HALF_WIDTH + i as f64 * h;
        let weight = if i == 0 || i == INTERVALS {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let q = optimal_profile(z);
        let dq = optimal_profile_derivative(z);
        let m = 2.0 * w(q);
        sums[0] += weight * dq * dq;
        sums[1] += weight * m;
        sums[2] += weight * dq * m.sqrt();
    }
    let scale = h / 3.0;
    AsymptoticConstants {
        c_w: sums[0] * scale,
        c_m: sums[1] * scale,
        c_n: sums[2] * scale,
    }
}

/// Concentration-dependent mobility of either model.
///
/// MCH: `M(s) = 2W(s) / c_N^2`. NMNCH: `M(s) = 2W(s) + gamma eps^2` and
/// `N(s) = 1/sqrt(M(s))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobilitySpec {
    pub model: Model,
    pub gamma: f64,
    pub eps: f64,
}

impl MobilitySpec {
    pub fn new(model: Model, gamma: f64, eps: f64) -> Self {
        Self { model, gamma, eps }
    }

    /// Clamps `s` into the evaluation range; the flag reports whether it moved.
    #[inline]
    pub fn clamp(s: f64) -> (f64, bool) {
        let c = s.clamp(MOBILITY_CLAMP.0, MOBILITY_CLAMP.1);
        (c, c != s)
    }

    #[inline]
    pub fn mobility(&self, s: f64) -> f64 {
        let (s, _) = Self::clamp(s);
        match self.model {
            Model::Mch => MCH_NORMALIZATION * 2.0 * w(s),
            Model::Nmnch => 2.0 * w(s) + self.gamma * self.eps * self.eps,
        }
    }

    #[inline]
    pub fn sqrt_mobility(&self, s: f64) -> f64 {
        self.mobility(s).sqrt()
    }

    /// Metric mobility `N = 1/sqrt(M)`; only meaningful for NMNCH, where `M > 0`.
    #[inline]
    pub fn metric(&self, s: f64) -> f64 {
        1.0 / self.sqrt_mobility(s)
    }

    /// `max_{s in [0,1]} M(s)`, attained at `s = 1/2`.
    pub fn max_on_unit_interval(&self) -> f64 {
        self.mobility(0.5)
    }
}

/// Splits the three pairwise tensions of a solid/liquid/vapor system into
/// additive per-phase coefficients `(sigma_L, sigma_S, sigma_V)`.
pub fn decompose_tensions(sigma_lv: f64, sigma_sv: f64, sigma_ls: f64) -> Result<(f64, f64, f64)> {
    for (name, s) in [("LV", sigma_lv), ("SV", sigma_sv), ("LS", sigma_ls)] {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::TriangleInequalityViolated(format!(
                "sigma_{name} = {s} must be positive"
            )));
        }
    }
    let sigma_l = 0.5 * (sigma_ls + sigma_lv - sigma_sv);
    let sigma_s = 0.5 * (sigma_ls + sigma_sv - sigma_lv);
    let sigma_v = 0.5 * (sigma_lv + sigma_sv - sigma_ls);
    for (name, s) in [("L", sigma_l), ("S", sigma_s), ("V", sigma_v)] {
        if s < 0.0 {
            return Err(Error::TriangleInequalityViolated(format!(
                "per-phase sigma_{name} = {s} is negative"
            )));
        }
    }
    Ok((sigma_l, sigma_s, sigma_v))
}

/// Per-phase coefficients of a three-phase system from `(sigma_12, sigma_13, sigma_23)`.
pub fn per_phase_tensions3(pairwise: [f64; 3]) -> Result<[f64; 3]> {
    let [s12, s13, s23] = pairwise;
    // phase 1 plays "S", phase 2 "L", phase 3 "V": LV = s23, SV = s13, LS = s12
    let (l, s, v) = decompose_tensions(s23, s13, s12)?;
    Ok([s, l, v])
}

/// Per-phase tensions `sigma_i` with `sigma_ij = sigma_i + sigma_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensionSet {
    per_phase: Vec<f64>,
}

impl TensionSet {
    pub fn from_per_phase(per_phase: Vec<f64>) -> Result<Self> {
        if per_phase.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Validation(format!(
                "per-phase tensions must be finite and non-negative: {per_phase:?}"
            )));
        }
        let set = Self { per_phase };
        let l = set.len();
        for i in 0..l {
            for j in i + 1..l {
                if set.pairwise(i, j) <= 0.0 {
                    return Err(Error::TriangleInequalityViolated(format!(
                        "sigma_{}{} = 0",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(set)
    }

    /// Three-phase set from `(sigma_12, sigma_13, sigma_23)`.
    pub fn from_pairwise3(pairwise: [f64; 3]) -> Result<Self> {
        Self::from_per_phase(per_phase_tensions3(pairwise)?.to_vec())
    }

    pub fn len(&self) -> usize {
        self.per_phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_phase.is_empty()
    }

    pub fn per_phase(&self) -> &[f64] {
        &self.per_phase
    }

    pub fn pairwise(&self, i: usize, j: usize) -> f64 {
        self.per_phase[i] + self.per_phase[j]
    }
}

/// Pairwise mobility from two phase mobilities: `1/nu_ij = 1/nu_i + 1/nu_j`,
/// zero as soon as one side is frozen.
pub fn pair_mobility(nu_i: f64, nu_j: f64) -> f64 {
    if nu_i == 0.0 || nu_j == 0.0 {
        0.0
    } else {
        1.0 / (1.0 / nu_i + 1.0 / nu_j)
    }
}

/// All pairwise mobilities `nu_ij` for `i < j`, in lexicographic order.
pub fn decompose_mobilities(per_phase: &[f64]) -> Vec<f64> {
    let l = per_phase.len();
    let mut out = Vec::with_capacity(l * (l.saturating_sub(1)) / 2);
    for i in 0..l {
        for j in i + 1..l {
            out.push(pair_mobility(per_phase[i], per_phase[j]));
        }
    }
    out
}

/// Young's equilibrium angle `theta = arccos((sigma_SV - sigma_LS) / sigma_LV)`.
pub fn young_angle(sigma_sv: f64, sigma_ls: f64, sigma_lv: f64) -> Result<f64> {
    let cos = (sigma_sv - sigma_ls) / sigma_lv;
    if !(cos.abs() <= 1.0) {
        return Err(Error::NoWettingEquilibrium { cos });
    }
    Ok(cos.acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn potential_values() {
        assert_eq!(w(0.5), 1.0 / 32.0);
        assert_eq!(wp(0.0), 0.0);
        assert_eq!(wp(0.5), 0.0);
        assert_eq!(wp(1.0), 0.0);
        assert_eq!(wpp(0.0), 1.0);
        assert_eq!(w(0.0), 0.0);
        assert_eq!(w(1.0), 0.0);
    }

    #[test]
    fn potential_derivatives_match_finite_differences() {
        let h = 1e-5;
        for i in 0..=20 {
            let s = -0.5 + 0.1 * i as f64;
            let fd1 = (w(s + h) - w(s - h)) / (2.0 * h);
            let fd2 = (wp(s + h) - wp(s - h)) / (2.0 * h);
            assert!((fd1 - wp(s)).abs() < 1e-9);
            assert!((fd2 - wpp(s)).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_solves_its_ode() {
        assert_eq!(optimal_profile(0.0), 0.5);
        let h = 1e-4;
        for i in 0..=80 {
            let z = -10.0 + 0.25 * i as f64;
            // fourth-order central difference
            let fd = (-optimal_profile(z + 2.0 * h) + 8.0 * optimal_profile(z + h)
                - 8.0 * optimal_profile(z - h)
                + optimal_profile(z - 2.0 * h))
                / (12.0 * h);
            let ode = fd + (2.0 * w(optimal_profile(z))).sqrt();
            assert!(ode.abs() < 1e-12, "z = {z}: {ode:e}");
        }
    }

    #[test]
    fn constants() {
        let c = asymptotic_constants();
        assert!((c.c_n.abs() - 1.0 / 6.0).abs() < 1e-8, "{c:?}");
        assert!(c.c_n < 0.0);
        assert!((c.c_w - c.c_m).abs() < 1e-8);
        assert!((c.nmn_prefactor() - 1.0).abs() < 1e-8);
        assert!((c.c_w - 1.0 / 6.0).abs() < 1e-8);
        assert!((1.0 / (c.c_n * c.c_n) - MCH_NORMALIZATION).abs() < 1e-6);
    }

    #[test]
    fn g_of_q_is_minus_q_prime() {
        let mob = MobilitySpec::new(Model::Nmnch, 0.0, 0.0);
        for i in 0..=40 {
            let z = -10.0 + 0.5 * i as f64;
            let g = mob.sqrt_mobility(optimal_profile(z));
            assert!((g + optimal_profile_derivative(z)).abs() < 1e-12);
        }
    }

    #[test]
    fn mobilities() {
        let mch = MobilitySpec::new(Model::Mch, 1.0, 0.1);
        assert!((mch.max_on_unit_interval() - 2.25).abs() < 1e-12);
        assert_eq!(mch.mobility(0.0), 0.0);
        assert_eq!(mch.mobility(1.0), 0.0);
        let nmn = MobilitySpec::new(Model::Nmnch, 1.0, 0.1);
        assert!((nmn.mobility(0.0) - 0.01).abs() < 1e-15);
        assert!((nmn.metric(1.0) - 10.0).abs() < 1e-12);
        // clamping
        assert_eq!(nmn.mobility(7.0), nmn.mobility(1.5));
        assert_eq!(MobilitySpec::clamp(-0.7), (-0.5, true));
        assert_eq!(MobilitySpec::clamp(0.3), (0.3, false));
    }

    #[test]
    fn nmn_mobility_lower_bound() {
        let nmn = MobilitySpec::new(Model::Nmnch, 1.0, 0.05);
        let min = (0..=2000)
            .map(|i| nmn.mobility(-0.5 + 2.0 * i as f64 / 2000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((min - 0.05 * 0.05).abs() < 1e-15);
    }

    #[test]
    fn tension_decomposition() {
        assert_eq!(decompose_tensions(1.0, 1.0, 1.0).unwrap(), (0.5, 0.5, 0.5));
        let (l, s, v) = decompose_tensions(1.0, 1.0, 1.7).unwrap();
        assert!((l - 0.85).abs() < 1e-15 && (s - 0.85).abs() < 1e-15 && (v - 0.15).abs() < 1e-15);
        assert!(matches!(
            decompose_tensions(1.0, 1.0, 2.5),
            Err(Error::TriangleInequalityViolated(_))
        ));
        let t = TensionSet::from_pairwise3([1.9, 1.0, 1.0]).unwrap();
        assert!((t.pairwise(0, 1) - 1.9).abs() < 1e-15);
        assert!((t.pairwise(0, 2) - 1.0).abs() < 1e-15);
        assert!((t.pairwise(1, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mobility_decomposition() {
        // (S, L, V) = (0, 2, 2) -> (SL, SV, LV)
        assert_eq!(decompose_mobilities(&[0.0, 2.0, 2.0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(decompose_mobilities(&[1.0, 1.0, 1.0]), vec![0.5; 3]);
        assert_eq!(pair_mobility(4.0, 4.0), 2.0);
    }

    #[test]
    fn young() {
        assert!((young_angle(1.0, 1.0, 1.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((young_angle(1.0, 1.7, 1.0).unwrap() - 2.346_193_823_405_649).abs() < 1e-12);
        assert!(matches!(
            young_angle(2.1, 1.0, 1.0),
            Err(Error::NoWettingEquilibrium { .. })
        ));
    }

    proptest! {
        #[test]
        fn potential_symmetry(s in -1.0f64..2.0) {
            prop_assert!((w(s) - w(1.0 - s)).abs() < 1e-14);
            prop_assert!((wp(1.0 - s) + wp(s)).abs() < 1e-13);
        }

        #[test]
        fn profile_symmetry(z in -30.0f64..30.0) {
            prop_assert!((optimal_profile(z) + optimal_profile(-z) - 1.0).abs() < 1e-15);
        }

        #[test]
        fn g_symmetric(s in -0.5f64..1.5, gamma in 0.0f64..2.0) {
            let m = MobilitySpec::new(Model::Nmnch, gamma, 0.03);
            prop_assert!((m.sqrt_mobility(s) - m.sqrt_mobility(1.0 - s)).abs() < 1e-15);
        }

        #[test]
        fn tensions_recombine(a in 0.1f64..3.0, b in 0.1f64..3.0, c in 0.1f64..3.0) {
            if let Ok((l, s, v)) = decompose_tensions(a, b, c) {
                prop_assert!((l + v - a).abs() <= 4.0 * f64::EPSILON * a.max(b).max(c));
                prop_assert!((s + v - b).abs() <= 4.0 * f64::EPSILON * a.max(b).max(c));
                prop_assert!((l + s - c).abs() <= 4.0 * f64::EPSILON * a.max(b).max(c));
                // triangle inequality holds whenever the split succeeds
                prop_assert!(a + b >= c && a + c >= b && b + c >= a);
            }
        }

        #[test]
        fn pair_mobility_bounded(a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let p = pair_mobility(a, b);
            prop_assert!(p <= a.min(b) + 1e-15);
        }
    }
}
