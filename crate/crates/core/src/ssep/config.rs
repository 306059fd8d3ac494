use crate::error::{Error, Result};
use crate::torus::{GridField, Lattice};
use rand::Rng;
use rand_distr::{Distribution, Exp};
use std::io::Write;

/// Occupancies `η ∈ {0,1}^{T_n^d}`, one bit per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    lattice: Lattice,
    bits: Vec<u64>,
}

impl Configuration {
    pub fn empty(lattice: Lattice) -> Self {
        Self {
            lattice,
            bits: vec![0; lattice.sites().div_ceil(64)],
        }
    }

    pub fn full(lattice: Lattice) -> Self {
        let mut c = Self::empty(lattice);
        for x in 0..lattice.sites() {
            c.set(x, true);
        }
        c
    }

    pub fn from_occupancies(lattice: Lattice, occ: &[bool]) -> Result<Self> {
        if occ.len() != lattice.sites() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} occupancies, got {}",
                lattice.sites(),
                occ.len()
            )));
        }
        let mut c = Self::empty(lattice);
        for (x, &o) in occ.iter().enumerate() {
            c.set(x, o);
        }
        Ok(c)
    }

    /// Configuration whose site `x` is bit `x` of `mask` (at most 64 sites).
    pub fn from_mask(lattice: Lattice, mask: u64) -> Result<Self> {
        if lattice.sites() > 64 {
            return Err(Error::InvalidArgument(
                "mask encoding holds at most 64 sites".into(),
            ));
        }
        let keep = if lattice.sites() == 64 {
            u64::MAX
        } else {
            (1u64 << lattice.sites()) - 1
        };
        Ok(Self {
            lattice,
            bits: vec![mask & keep],
        })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        (self.bits[x >> 6] >> (x & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, occupied: bool) {
        let (w, b) = (x >> 6, x & 63);
        if occupied {
            self.bits[w] |= 1 << b;
        } else {
            self.bits[w] &= !(1 << b);
        }
    }

    /// Exchanges the occupancies of two sites.
    #[inline]
    pub fn swap(&mut self, x: usize, y: usize) {
        if self.get(x) != self.get(y) {
            self.bits[x >> 6] ^= 1 << (x & 63);
            self.bits[y >> 6] ^= 1 << (y & 63);
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn as_field(&self) -> GridField {
        let values = (0..self.lattice.sites())
            .map(|x| if self.get(x) { 1.0 } else { 0.0 })
            .collect();
        GridField::new(self.lattice, values).expect("sizes agree")
    }

    /// First word of the bit storage; equals the mask for lattices of ≤ 64 sites.
    pub fn mask(&self) -> u64 {
        self.bits[0]
    }

    /// Site-major CSV: one `site,occupancy` line per site after a header.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "site,occupancy")?;
        for x in 0..self.lattice.sites() {
            writeln!(w, "{x},{}", u8::from(self.get(x)))?;
        }
        Ok(())
    }

    /// Flat binary dump: one byte (0 or 1) per site, site-major.
    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        let bytes: Vec<u8> = (0..self.lattice.sites())
            .map(|x| u8::from(self.get(x)))
            .collect();
        w.write_all(&bytes)
    }
}

pub(crate) fn check_profile(rho: &GridField) -> Result<()> {
    for (x, &v) in rho.values().iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ProfileOutOfRange {
                value: v,
                location: format!("site {x}"),
            });
        }
    }
    Ok(())
}

/// Draws `η` from the product Bernoulli law with `P(η(x) = 1) = ρ(x)`.
pub fn sample_initial<R: Rng + ?Sized>(rho0: &GridField, rng: &mut R) -> Result<Configuration> {
    check_profile(rho0)?;
    let lattice = rho0.lattice();
    let mut c = Configuration::empty(lattice);
    for (x, &p) in rho0.values().iter().enumerate() {
        c.set(x, rng.random::<f64>() < p);
    }
    Ok(c)
}

/// Simulation time, event count and the random stream driving one replica.
#[derive(Debug, Clone)]
pub struct SimClock<R> {
    t: f64,
    events: u64,
    rng: R,
}

impl<R: Rng> SimClock<R> {
    pub fn new(rng: R) -> Self {
        Self {
            t: 0.0,
            events: 0,
            rng,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn rng(&mut self) -> &mut R {
        &mut self.rng
    }

    /// Runs the exclusion dynamics from the current time up to `t_end`.
    ///
    /// Every nearest-neighbour edge rings at rate `(2n+1)²/2`; the waiting
    /// time to the next ring anywhere is exponential with the total rate and
    /// the ringing edge is uniform. Rings on edges with equal occupancies are
    /// counted as events but change nothing.
    pub fn advance(&mut self, cfg: &mut Configuration, t_end: f64) -> Result<()> {
        if !(t_end >= self.t) {
            return Err(Error::InvalidArgument(format!(
                "cannot advance clock from t={} back to t={t_end}",
                self.t
            )));
        }
        let lat = cfg.lattice();
        let edges = lat.edges();
        let total_rate = total_rate(lat);
        let wait = Exp::new(total_rate).expect("positive rate");
        // edge e joins site e / d to its forward neighbour along axis e % d
        let ends: Vec<(usize, usize)> = (0..edges)
            .map(|e| (e / lat.d(), lat.neighbor(e / lat.d(), e % lat.d(), true)))
            .collect();
        loop {
            let dt = wait.sample(&mut self.rng);
            if self.t + dt > t_end {
                break;
            }
            self.t += dt;
            self.events += 1;
            let (x, y) = ends[self.rng.random_range(0..edges)];
            cfg.swap(x, y);
        }
        // memorylessness lets the next call restart the clock at t_end
        self.t = t_end;
        Ok(())
    }
}

/// Total jump rate `d (2n+1)^d (2n+1)²/2` summed over all edges.
pub fn total_rate(lat: Lattice) -> f64 {
    let side = lat.side() as f64;
    lat.edges() as f64 * side * side / 2.0
}

/// Runs the dynamics for time `t_end` from `cfg` and returns the final state.
pub fn simulate<R: Rng>(cfg: &Configuration, t_end: f64, rng: &mut R) -> Result<Configuration> {
    if !(t_end >= 0.0) {
        return Err(Error::NegativeTime(t_end));
    }
    let mut out = cfg.clone();
    let mut clock = SimClock::new(rng);
    clock.advance(&mut out, t_end)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bit_ops() {
        let lat = Lattice::new(40, 1).unwrap();
        let mut c = Configuration::empty(lat);
        c.set(3, true);
        c.set(70, true);
        assert_eq!(c.count(), 2);
        c.swap(3, 4);
        assert!(!c.get(3) && c.get(4));
        c.swap(4, 70);
        assert!(c.get(4) && c.get(70));
    }

    #[test]
    fn extreme_profiles() {
        let lat = Lattice::new(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let full = sample_initial(&GridField::constant(lat, 1.0), &mut rng).unwrap();
        assert_eq!(full, Configuration::full(lat));
        let empty = sample_initial(&GridField::constant(lat, 0.0), &mut rng).unwrap();
        assert_eq!(empty.count(), 0);
        assert!(sample_initial(&GridField::constant(lat, 1.2), &mut rng).is_err());
    }

    #[test]
    fn particle_number_conserved() {
        let lat = Lattice::new(6, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c0 = sample_initial(&GridField::constant(lat, 0.4), &mut rng).unwrap();
        let mut c = c0.clone();
        let mut clock = SimClock::new(ChaCha8Rng::seed_from_u64(8));
        for step in 1..=5 {
            clock.advance(&mut c, 0.01 * step as f64).unwrap();
            assert_eq!(c.count(), c0.count());
        }
        assert!(clock.events() > 0);
        assert!(clock.advance(&mut c, 0.0).is_err());
    }

    #[test]
    fn csv_snapshot() {
        let lat = Lattice::new(1, 1).unwrap();
        let c = Configuration::from_occupancies(lat, &[true, false, true]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "site,occupancy\n0,1\n1,0\n2,1\n"
        );
        let mut bin = Vec::new();
        c.write_binary(&mut bin).unwrap();
        assert_eq!(bin, [1, 0, 1]);
    }
}
