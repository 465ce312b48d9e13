//! Simple random walk on `D_N ∪ {ϱ}` in three clocks: discrete steps,
//! continuous time with unit-rate holds, and boundary local time at `ϱ`.

mod checks;
mod fluct;

pub use checks::*;
pub use fluct::*;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, Vertex};
use crate::rng::{stream, ExpClock, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    DiscreteSteps,
    ContinuousTime,
    BoundaryTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    Boundary,
    Vertex(usize),
}

/// Stopping rule; the variant fixes the clock.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    /// `n` jumps; `ℓ_n` counts `X_0, …, X_n`.
    Steps(u64),
    /// Continuous time `s`.
    Time(f64),
    /// Boundary local time `t`, i.e. continuous time `τ̂_ϱ(t)`.
    Boundary(f64),
}

impl Horizon {
    /// Paper time `t` as `⌊t · deg(D_N)⌋` discrete steps.
    pub fn paper_time(t: f64, domain: &LatticeDomain) -> Self {
        Horizon::Steps((t * domain.deg_total() as f64).floor() as u64)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Horizon::Steps(_) => Mode::DiscreteSteps,
            Horizon::Time(_) => Mode::ContinuousTime,
            Horizon::Boundary(_) => Mode::BoundaryTime,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Horizon::Steps(n) => n as f64,
            Horizon::Time(s) | Horizon::Boundary(s) => s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub start: Start,
    pub horizon: Horizon,
    pub seed: u64,
    pub replicate: u64,
}

impl WalkConfig {
    pub fn new(start: Start, horizon: Horizon, seed: u64) -> Self {
        Self { start, horizon, seed, replicate: 0 }
    }

    pub fn replicate(mut self, k: u64) -> Self {
        self.replicate = k;
        self
    }

    pub fn validate(&self, domain: &LatticeDomain) -> Result<()> {
        let h = self.horizon.value();
        if !(h >= 0.0) || !h.is_finite() {
            return Err(Error::Parameter("horizon must be finite and nonnegative".into()));
        }
        if let Start::Vertex(v) = self.start {
            if v >= domain.len() {
                return Err(Error::Parameter(format!("start vertex {v} out of range")));
            }
        }
        Ok(())
    }
}

/// Local times over `D_N ∪ {ϱ}` (`ϱ` last), `1/deg`-weighted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalTimeField {
    pub values: Vec<f64>,
    pub mode: Mode,
    pub horizon: Horizon,
    pub final_position: Vertex,
    pub steps: u64,
    /// Total continuous time; zero in discrete mode.
    pub elapsed: f64,
}

impl LocalTimeField {
    /// Interior part, without `ϱ`.
    pub fn interior(&self) -> &[f64] {
        &self.values[..self.values.len() - 1]
    }

    pub fn rho_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `values ≤ other` entrywise.
    pub fn dominated_by(&self, other: &LocalTimeField) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}

/// One walk path, advanced monotonically along any of the three clocks.
pub struct Walker<'a> {
    domain: &'a LatticeDomain,
    rho: Vertex,
    pos: Vertex,
    jumps: ChaCha8Rng,
    bits: u64,
    nbits: u32,
    clock: ExpClock,
    visits: Vec<u64>,
    time: Vec<f64>,
    hold_left: f64,
    elapsed: f64,
    steps: u64,
}

impl<'a> Walker<'a> {
    pub fn new(domain: &'a LatticeDomain, start: Start, seed: u64, replicate: u64) -> Result<Self> {
        if domain.deg_rho() == 0 {
            return Err(Error::Parameter("boundary vertex has degree zero".into()));
        }
        let rho = domain.rho();
        let pos = match start {
            Start::Boundary => rho,
            Start::Vertex(v) => v as Vertex,
        };
        let n = domain.len() + 1;
        let clock = ExpClock::new(seed, replicate);
        let mut w = Self {
            domain,
            rho,
            pos,
            jumps: stream(seed, replicate, Purpose::Jumps),
            bits: 0,
            nbits: 0,
            clock,
            visits: vec![0; n],
            time: vec![0.0; n],
            hold_left: 0.0,
            elapsed: 0.0,
            steps: 0,
        };
        w.arrive(pos);
        Ok(w)
    }

    #[inline]
    fn arrive(&mut self, v: Vertex) {
        let j = self.visits[v as usize];
        self.visits[v as usize] = j + 1;
        self.hold_left = self.clock.hold(v, j);
    }

    #[inline]
    fn next_vertex(&mut self) -> Vertex {
        if self.pos == self.rho {
            let edges = self.domain.rho_edges();
            edges[self.jumps.random_range(0..edges.len())]
        } else {
            if self.nbits == 0 {
                self.bits = self.jumps.next_u64();
                self.nbits = 32;
            }
            let slot = (self.bits & 3) as usize;
            self.bits >>= 2;
            self.nbits -= 1;
            self.domain.neighbors(self.pos as usize)[slot]
        }
    }

    #[inline]
    fn jump(&mut self) {
        let v = self.next_vertex();
        self.pos = v;
        self.steps += 1;
        self.arrive(v);
    }

    /// Discrete skeleton: jump until `n` steps have been taken.
    pub fn advance_steps(&mut self, n: u64) {
        while self.steps < n {
            let v = self.next_vertex();
            self.pos = v;
            self.steps += 1;
            self.visits[v as usize] += 1;
        }
    }

    /// Continuous clock: run until elapsed time `s`, truncating the
    /// current hold.
    pub fn advance_time(&mut self, s: f64) {
        while self.elapsed < s {
            let rem = s - self.elapsed;
            if self.hold_left >= rem {
                self.time[self.pos as usize] += rem;
                self.hold_left -= rem;
                self.elapsed = s;
                return;
            }
            self.time[self.pos as usize] += self.hold_left;
            self.elapsed += self.hold_left;
            self.hold_left = 0.0;
            self.jump();
        }
    }

    /// Boundary clock: run until the time at `ϱ` divided by `deg(ϱ)`
    /// reaches `t`, truncating the final hold at `ϱ`.
    pub fn advance_boundary(&mut self, t: f64) {
        let target = t * self.domain.deg_rho() as f64;
        let r = self.rho as usize;
        while self.time[r] < target {
            if self.pos == self.rho {
                let rem = target - self.time[r];
                if self.hold_left >= rem {
                    self.time[r] = target;
                    self.hold_left -= rem;
                    self.elapsed += rem;
                    return;
                }
            }
            self.time[self.pos as usize] += self.hold_left;
            self.elapsed += self.hold_left;
            self.hold_left = 0.0;
            self.jump();
        }
    }

    /// Continuous time of the first arrival at `ϱ` (zero if already there).
    pub fn run_to_rho(&mut self) -> f64 {
        while self.pos != self.rho {
            self.time[self.pos as usize] += self.hold_left;
            self.elapsed += self.hold_left;
            self.hold_left = 0.0;
            self.jump();
        }
        self.elapsed
    }

    pub fn position(&self) -> Vertex {
        self.pos
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// Arrivals per vertex, counting the start.
    pub fn visits(&self) -> &[u64] {
        &self.visits
    }

    /// Time spent per vertex.
    pub fn times(&self) -> &[f64] {
        &self.time
    }

    fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.visits.len()).map(|v| 1.0 / self.domain.degree(v as Vertex) as f64)
    }

    /// `ℓ_n(v) = #{k ≤ n : X_k = v} / deg v`.
    pub fn discrete_field(&self, horizon: Horizon) -> LocalTimeField {
        let values = self.visits.iter().zip(self.weights()).map(|(&c, w)| c as f64 * w).collect();
        self.field(values, Mode::DiscreteSteps, horizon)
    }

    /// `L̃(v) = (time at v) / deg v`.
    pub fn continuous_field(&self, horizon: Horizon) -> LocalTimeField {
        let values = self.time.iter().zip(self.weights()).map(|(&s, w)| s * w).collect();
        let mode = horizon.mode();
        let mut f = self.field(values, mode, horizon);
        if let Horizon::Boundary(t) = horizon {
            *f.values.last_mut().unwrap() = t;
        }
        f
    }

    fn field(&self, values: Vec<f64>, mode: Mode, horizon: Horizon) -> LocalTimeField {
        LocalTimeField {
            values,
            mode,
            horizon,
            final_position: self.pos,
            steps: self.steps,
            elapsed: self.elapsed,
        }
    }
}

pub fn run_walk(domain: &LatticeDomain, config: &WalkConfig) -> Result<LocalTimeField> {
    config.validate(domain)?;
    let mut w = Walker::new(domain, config.start, config.seed, config.replicate)?;
    Ok(match config.horizon {
        Horizon::Steps(n) => {
            w.advance_steps(n);
            w.discrete_field(config.horizon)
        }
        Horizon::Time(s) => {
            w.advance_time(s);
            w.continuous_field(config.horizon)
        }
        Horizon::Boundary(t) => {
            w.advance_boundary(t);
            w.continuous_field(config.horizon)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(k: u32) -> LatticeDomain {
        LatticeDomain::square_block(k, k + 1).unwrap()
    }

    #[test]
    fn zero_steps_marks_only_the_start() {
        let d = block(4);
        let f = run_walk(&d, &WalkConfig::new(Start::Vertex(5), Horizon::Steps(0), 1)).unwrap();
        for (v, &x) in f.values.iter().enumerate() {
            assert_eq!(x, if v == 5 { 0.25 } else { 0.0 });
        }
    }

    #[test]
    fn discrete_conservation() {
        let d = block(6);
        let n = 10_000;
        let f = run_walk(&d, &WalkConfig::new(Start::Boundary, Horizon::Steps(n), 2)).unwrap();
        let s: f64 = f.values.iter().enumerate().map(|(v, x)| d.degree(v as u32) as f64 * x).sum();
        assert_eq!(s, (n + 1) as f64);
        assert!(f.interior().iter().all(|x| (4.0 * x).fract() == 0.0));
    }

    #[test]
    fn boundary_mode_pins_rho() {
        let d = block(5);
        for k in 0..20 {
            let c = WalkConfig::new(Start::Boundary, Horizon::Boundary(1.7), 3).replicate(k);
            let f = run_walk(&d, &c).unwrap();
            assert_eq!(f.rho_value(), 1.7);
            assert!(f.values.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn continuous_run_shares_the_jump_chain() {
        let d = block(5);
        let mut c = Walker::new(&d, Start::Vertex(0), 9, 4).unwrap();
        c.advance_time(300.0);
        let mut s = Walker::new(&d, Start::Vertex(0), 9, 4).unwrap();
        s.advance_steps(c.steps());
        assert_eq!(c.visits(), s.visits());
        assert_eq!(c.position(), s.position());
    }
}
