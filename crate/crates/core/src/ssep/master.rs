use super::config::{check_profile, total_rate};
use crate::error::{Error, Result};
use crate::torus::{GridField, Lattice};

/// Largest lattice (in sites) handled by the master-equation oracle.
pub const MASTER_SITE_LIMIT: usize = 16;

/// Exact law of `η_t` over all `2^{(2n+1)^d}` configurations.
///
/// Entry `s` is the probability of the configuration whose site `x` is bit
/// `x` of `s`.
#[derive(Debug, Clone)]
pub struct MasterDistribution {
    lattice: Lattice,
    probs: Vec<f64>,
}

impl MasterDistribution {
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `E g(η)` for a function of the bit mask.
    pub fn expectation(&self, g: impl Fn(u64) -> f64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(s, p)| p * g(s as u64))
            .sum()
    }

    /// `P(η(x) = 1)` for every site.
    pub fn site_means(&self) -> GridField {
        let values = (0..self.lattice.sites())
            .map(|x| self.expectation(|s| ((s >> x) & 1) as f64))
            .collect();
        GridField::new(self.lattice, values).expect("sizes agree")
    }

    /// `E η(x) η(y)`.
    pub fn pair_moment(&self, x: usize, y: usize) -> f64 {
        self.expectation(|s| (((s >> x) & 1) * ((s >> y) & 1)) as f64)
    }
}

/// Product Bernoulli law with `P(η(x) = 1) = ρ(x)`.
fn product_law(rho: &GridField) -> Vec<f64> {
    let sites = rho.lattice().sites();
    let mut p = vec![1.0];
    for &r in rho.values() {
        let mut next = vec![0.0; p.len() * 2];
        // bit x is the new high bit at step x
        let half = p.len();
        for (s, &q) in p.iter().enumerate() {
            next[s] = q * (1.0 - r);
            next[s + half] = q * r;
        }
        p = next;
    }
    debug_assert_eq!(p.len(), 1 << sites);
    p
}

/// One step of the uniformized chain: average of `p` over all edge swaps.
fn swap_average(p: &[f64], edges: &[(usize, usize)], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for &(x, y) in edges {
        for (s, &q) in p.iter().enumerate() {
            let bx = (s >> x) & 1;
            let by = (s >> y) & 1;
            let t = if bx != by {
                s ^ ((1 << x) | (1 << y))
            } else {
                s
            };
            out[t] += q;
        }
    }
    let inv = 1.0 / edges.len() as f64;
    out.iter_mut().for_each(|v| *v *= inv);
}

/// Solves the Kolmogorov forward equation of the exclusion process started
/// from the product law of `rho0`.
///
/// The generator is `Λ(P − I)` with `Λ` the total edge rate and `P` the
/// uniform-edge swap kernel, so `e^{tQ} = Σ_m Poisson(Λt; m) P^m` exactly.
/// The time is split into chunks with `Λ·chunk ≤ 50` to keep the Poisson
/// weights well scaled; each chunk sum is truncated once the omitted
/// Poisson mass is below `1e-16`.
pub fn exact_master_distribution(rho0: &GridField, t: f64) -> Result<MasterDistribution> {
    check_profile(rho0)?;
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let lattice = rho0.lattice();
    let sites = lattice.sites();
    if sites > MASTER_SITE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            sites,
            limit: MASTER_SITE_LIMIT,
        });
    }
    let edges: Vec<(usize, usize)> = (0..sites)
        .flat_map(|x| (0..lattice.d()).map(move |j| (x, j)))
        .map(|(x, j)| (x, lattice.neighbor(x, j, true)))
        .collect();
    let lambda = total_rate(lattice);
    let mut p = product_law(rho0);
    let chunks = ((lambda * t) / 50.0).ceil().max(1.0) as usize;
    let tau = t / chunks as f64;
    let mut term = vec![0.0; p.len()];
    let mut next = vec![0.0; p.len()];
    for _ in 0..chunks {
        let mu = lambda * tau;
        let mut weight = (-mu).exp();
        let mut acc: Vec<f64> = p.iter().map(|v| v * weight).collect();
        let mut mass = weight;
        term.copy_from_slice(&p);
        let mut m = 0usize;
        while 1.0 - mass > 1e-16 && m < 10_000 {
            m += 1;
            swap_average(&term, &edges, &mut next);
            std::mem::swap(&mut term, &mut next);
            weight *= mu / m as f64;
            mass += weight;
            for (a, v) in acc.iter_mut().zip(&term) {
                *a += weight * v;
            }
            if weight < 1e-300 && m as f64 > mu {
                break;
            }
        }
        p = acc;
    }
    Ok(MasterDistribution { lattice, probs: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn zero_time_is_product_law() {
        let lat = Lattice::new(1, 1).unwrap();
        let rho = GridField::new(lat, vec![0.2, 0.5, 0.9]).unwrap();
        let m = exact_master_distribution(&rho, 0.0).unwrap();
        let p = m.probabilities();
        assert!((p[0b101] - 0.2 * 0.5 * 0.9).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_dense_matrix_exponential() {
        let lat = Lattice::new(1, 1).unwrap();
        let rho = GridField::new(lat, vec![0.1, 0.7, 0.4]).unwrap();
        let t = 0.13;
        let m = exact_master_distribution(&rho, t).unwrap();
        // dense generator Q[t][s] = rate s -> t
        let states = 8;
        let mut q = DMatrix::<f64>::zeros(states, states);
        let rate = 9.0 / 2.0;
        for s in 0..states {
            for x in 0..3 {
                let y = lat.neighbor(x, 0, true);
                let (bx, by) = ((s >> x) & 1, (s >> y) & 1);
                if bx != by {
                    let t2 = s ^ ((1 << x) | (1 << y));
                    q[(t2, s)] += rate;
                    q[(s, s)] -= rate;
                }
            }
        }
        let p0 = nalgebra::DVector::from_vec(product_law(&rho));
        let want = (q * t).exp() * p0;
        for s in 0..states {
            assert!((m.probabilities()[s] - want[s]).abs() < 1e-12, "state {s}");
        }
    }

    #[test]
    fn too_large_rejected() {
        let lat = Lattice::new(3, 2).unwrap();
        let rho = GridField::constant(lat, 0.5);
        assert!(matches!(
            exact_master_distribution(&rho, 0.1),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }
}
