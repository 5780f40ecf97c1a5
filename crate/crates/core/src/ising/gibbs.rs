use rand::Rng;

use super::lattice::{IsingLattice, Torus};
use super::IsingParams;

/// Heat-bath probabilities `p(y_i = +1 | neighbors) = sigma(2 (theta_J s + theta_h))`
/// tabulated over the neighbor sum `s` in `-4..=4`.
#[derive(Clone, Copy, Debug)]
pub struct HeatBath {
    p_up: [f64; 9],
}

impl HeatBath {
    pub fn new(params: IsingParams) -> Self {
        let mut p_up = [0.0; 9];
        for (k, p) in p_up.iter_mut().enumerate() {
            let s = k as f64 - 4.0;
            *p = logistic(2.0 * (params.theta_j * s + params.theta_h));
        }
        HeatBath { p_up }
    }

    #[inline]
    pub fn p_up(&self, neighbor_sum: i32) -> f64 {
        self.p_up[(neighbor_sum + 4) as usize]
    }

    /// Resamples one site given a uniform draw `u` in `[0, 1)`.
    #[inline]
    pub(crate) fn update(&self, torus: &Torus, spins: &mut [i8], site: usize, u: f64) {
        let s = torus.neighbor_sum(spins, site);
        spins[site] = if u < self.p_up(s) { 1 } else { -1 };
    }

    /// One raster-order pass over every site.
    pub fn sweep<R: Rng + ?Sized>(&self, torus: &Torus, lattice: &mut IsingLattice, rng: &mut R) {
        torus.check(lattice);
        let spins = lattice.spins_mut();
        for site in 0..spins.len() {
            let u: f64 = rng.random();
            self.update(torus, spins, site, u);
        }
    }
}

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Probability that `site` is set to +1 by a heat-bath update at `params`.
pub fn prob_up(torus: &Torus, lattice: &IsingLattice, site: usize, params: IsingParams) -> f64 {
    HeatBath::new(params).p_up(torus.neighbor_sum(lattice.spins(), site))
}

/// One systematic Gibbs sweep at `params`.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    torus: &Torus,
    lattice: &IsingLattice,
    params: IsingParams,
    rng: &mut R,
) -> IsingLattice {
    let mut next = lattice.clone();
    HeatBath::new(params).sweep(torus, &mut next, rng);
    next
}

/// Parameters of the bridging density `f(.; a)^beta f(.; b)^(1 - beta)`, which
/// stays in the Ising family because `log f` is linear in the parameters.
pub fn bridge_params(a: IsingParams, b: IsingParams, beta: f64) -> IsingParams {
    if beta == 1.0 {
        a
    } else if beta == 0.0 {
        b
    } else {
        IsingParams {
            theta_j: beta * a.theta_j + (1.0 - beta) * b.theta_j,
            theta_h: beta * a.theta_h + (1.0 - beta) * b.theta_h,
        }
    }
}

/// One Gibbs sweep targeting the bridging distribution at `beta`.
pub fn bridged_gibbs_sweep<R: Rng + ?Sized>(
    torus: &Torus,
    lattice: &IsingLattice,
    a: IsingParams,
    b: IsingParams,
    beta: f64,
    rng: &mut R,
) -> IsingLattice {
    gibbs_sweep(torus, lattice, bridge_params(a, b, beta), rng)
}
