//! Maximum pseudo-likelihood estimation of `(theta_J, theta_h)` on the prior box
//! `[0, 1] x [-1, 1]`.
//!
//! The objective `sum_i log p(y_i | y_nbr(i))` depends on the data only through
//! counts of `(y_i, neighbor sum)` pairs, so it is evaluated over at most 18
//! buckets.

use super::gibbs::logistic;
use super::lattice::{IsingLattice, Torus};
use super::IsingParams;

pub const J_BOUNDS: (f64, f64) = (0.0, 1.0);
pub const H_BOUNDS: (f64, f64) = (-1.0, 1.0);

const GRAD_TOL: f64 = 1e-8;

/// Sufficient statistics of the pseudo-likelihood.
#[derive(Clone, Debug)]
pub struct PseudoLikelihood {
    /// `(y_i * s_i, y_i, count)` for each distinct pair.
    buckets: Vec<(f64, f64, f64)>,
}

impl PseudoLikelihood {
    pub fn new(torus: &Torus, data: &IsingLattice) -> Self {
        let mut counts = [[0u64; 9]; 2];
        for site in 0..data.len() {
            let s = torus.neighbor_sum(data.spins(), site);
            let y = usize::from(data.spins()[site] > 0);
            counts[y][(s + 4) as usize] += 1;
        }
        let mut buckets = Vec::new();
        for (yi, row) in counts.iter().enumerate() {
            let y = if yi == 1 { 1.0 } else { -1.0 };
            for (k, &c) in row.iter().enumerate() {
                if c > 0 {
                    buckets.push((y * (k as f64 - 4.0), y, c as f64));
                }
            }
        }
        PseudoLikelihood { buckets }
    }

    /// Log pseudo-likelihood.
    pub fn value(&self, j: f64, h: f64) -> f64 {
        // log sigma(z) = -softplus(-z)
        self.buckets
            .iter()
            .map(|&(ys, y, c)| {
                let z = 2.0 * (j * ys + h * y);
                -c * softplus(-z)
            })
            .sum()
    }

    pub fn gradient(&self, j: f64, h: f64) -> [f64; 2] {
        let mut g = [0.0; 2];
        for &(ys, y, c) in &self.buckets {
            let w = 2.0 * c * logistic(-2.0 * (j * ys + h * y));
            g[0] += w * ys;
            g[1] += w * y;
        }
        g
    }

    /// Hessian, negative semidefinite.
    pub fn hessian(&self, j: f64, h: f64) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for &(ys, y, c) in &self.buckets {
            let p = logistic(2.0 * (j * ys + h * y));
            let w = -4.0 * c * p * (1.0 - p);
            m[0][0] += w * ys * ys;
            m[0][1] += w * ys * y;
            m[1][1] += w * y * y;
        }
        m[1][0] = m[0][1];
        m
    }

    /// Box-constrained maximizer.
    pub fn maximize(&self) -> IsingParams {
        if let Some((j, h)) = self.interior_newton() {
            if in_box(j, h) {
                return IsingParams::new(j, h);
            }
        }
        // No interior stationary point: by concavity the maximum lies on the boundary.
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        let mut consider = |j: f64, h: f64| {
            let v = self.value(j, h);
            if v > best.0 {
                best = (v, j, h);
            }
        };
        for &j in &[J_BOUNDS.0, J_BOUNDS.1] {
            let h = maximize_1d(|h| self.gradient(j, h)[1], H_BOUNDS);
            consider(j, h);
        }
        for &h in &[H_BOUNDS.0, H_BOUNDS.1] {
            let j = maximize_1d(|j| self.gradient(j, h)[0], J_BOUNDS);
            consider(j, h);
        }
        IsingParams::new(best.1, best.2)
    }

    /// Damped Newton ascent from the origin; `None` if it fails to reach a
    /// stationary point (for example when the maximum is at infinity).
    fn interior_newton(&self) -> Option<(f64, f64)> {
        let (mut j, mut h) = (0.0, 0.0);
        let mut value = self.value(j, h);
        for _ in 0..200 {
            let g = self.gradient(j, h);
            if g[0].hypot(g[1]) < GRAD_TOL {
                return Some((j, h));
            }
            let m = self.hessian(j, h);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            // Newton direction -H^{-1} g, falling back to the gradient when H
            // is numerically singular.
            let mut dir = if det.abs() > 1e-12 * (1.0 + m[0][0].abs() * m[1][1].abs()) {
                [
                    -(m[1][1] * g[0] - m[0][1] * g[1]) / det,
                    -(-m[1][0] * g[0] + m[0][0] * g[1]) / det,
                ]
            } else {
                g
            };
            if dir[0] * g[0] + dir[1] * g[1] <= 0.0 {
                dir = g;
            }
            let mut step = 1.0;
            let mut improved = false;
            for _ in 0..60 {
                let (nj, nh) = (j + step * dir[0], h + step * dir[1]);
                let nv = self.value(nj, nh);
                if nv >= value {
                    j = nj;
                    h = nh;
                    value = nv;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved || !j.is_finite() || !h.is_finite() || j.abs() > 1e3 || h.abs() > 1e3 {
                return None;
            }
        }
        None
    }
}

fn in_box(j: f64, h: f64) -> bool {
    (J_BOUNDS.0..=J_BOUNDS.1).contains(&j) && (H_BOUNDS.0..=H_BOUNDS.1).contains(&h)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Maximizes a concave function on `[lo, hi]` given its derivative.
fn maximize_1d(derivative: impl Fn(f64) -> f64, (lo, hi): (f64, f64)) -> f64 {
    if derivative(lo) <= 0.0 {
        return lo;
    }
    if derivative(hi) >= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if derivative(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Maximum pseudo-likelihood estimate, clipped to the prior box.
pub fn pseudolikelihood_estimate(data: &IsingLattice) -> IsingParams {
    let torus = Torus::new(data.width(), data.height());
    PseudoLikelihood::new(&torus, data).maximize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::cftp::cftp_exact_sample;
    use crate::ising::gibbs::prob_up;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct evaluation from per-site conditionals.
    fn direct_value(torus: &Torus, data: &IsingLattice, p: IsingParams) -> f64 {
        (0..data.len())
            .map(|i| {
                let up = prob_up(torus, data, i, p);
                if data.spins()[i] > 0 {
                    up.ln()
                } else {
                    (1.0 - up).ln()
                }
            })
            .sum()
    }

    fn grid_argmax(torus: &Torus, data: &IsingLattice, steps: usize) -> (f64, f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for a in 0..=steps {
            for b in 0..=steps {
                let j = a as f64 / steps as f64;
                let h = -1.0 + 2.0 * b as f64 / steps as f64;
                let v = direct_value(torus, data, IsingParams::new(j, h));
                if v > best.0 {
                    best = (v, j, h);
                }
            }
        }
        best
    }

    #[test]
    fn objective_matches_direct_evaluation() {
        let torus = Torus::new(5, 4);
        let data = IsingLattice::from_bits(5, 4, 0b1011_0110_1110_0101_0011);
        let pl = PseudoLikelihood::new(&torus, &data);
        for &(j, h) in &[(0.0, 0.0), (0.3, -0.2), (0.9, 0.7)] {
            let direct = direct_value(&torus, &data, IsingParams::new(j, h));
            assert!((pl.value(j, h) - direct).abs() < 1e-10);
            // Central differences for the gradient.
            let e = 1e-6;
            let g = pl.gradient(j, h);
            let gj = (pl.value(j + e, h) - pl.value(j - e, h)) / (2.0 * e);
            let gh = (pl.value(j, h + e) - pl.value(j, h - e)) / (2.0 * e);
            assert!((g[0] - gj).abs() < 1e-5 && (g[1] - gh).abs() < 1e-5);
        }
    }

    #[test]
    fn constant_data_hits_field_boundary() {
        let est = pseudolikelihood_estimate(&IsingLattice::filled(6, 6, 1));
        assert_eq!(est.theta_h, 1.0);
        assert_eq!(est.theta_j, 1.0);
    }

    #[test]
    fn checkerboard_clips_coupling_to_zero() {
        let spins = (0..36)
            .map(|i| if (i % 6 + i / 6) % 2 == 0 { 1 } else { -1 })
            .collect();
        let data = IsingLattice::new(6, 6, spins).unwrap();
        let est = pseudolikelihood_estimate(&data);
        assert_eq!(est.theta_j, 0.0);
        assert!(est.theta_h.abs() < 1e-6);
        let torus = Torus::new(6, 6);
        let (_, gj, gh) = grid_argmax(&torus, &data, 40);
        assert_eq!(gj, 0.0);
        assert!(gh.abs() < 0.05 + 1e-12);
    }

    #[test]
    fn recovers_generating_parameters() {
        let torus = Torus::new(30, 30);
        let truth = IsingParams::new(0.3, 0.0);
        let data = cftp_exact_sample(&torus, truth, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let est = pseudolikelihood_estimate(&data);
        assert!((est.theta_j - 0.3).abs() < 0.1, "{est:?}");
        assert!(est.theta_h.abs() < 0.1, "{est:?}");
        // Independent check: a coarse grid search lands next to the estimate.
        let (_, gj, gh) = grid_argmax(&torus, &data, 50);
        assert!(
            (gj - est.theta_j).abs() <= 0.02 + 1e-12,
            "grid {gj} vs {}",
            est.theta_j
        );
        assert!(
            (gh - est.theta_h).abs() <= 0.04 + 1e-12,
            "grid {gh} vs {}",
            est.theta_h
        );
        let g = PseudoLikelihood::new(&torus, &data).gradient(est.theta_j, est.theta_h);
        assert!(g[0].hypot(g[1]) < 1e-8);
    }
}
