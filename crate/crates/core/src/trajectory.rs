//! Time-gridded paths of a particle system.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Positions of `n` particles recorded on a nondecreasing time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    times: Vec<S>,
    states: Vec<Vec<S>>,
}

impl<S: Scalar> Trajectory<S> {
    /// `states[k]` is the configuration at `times[k]`; all states must share
    /// one dimension and the grid must be nondecreasing.
    pub fn new(times: Vec<S>, states: Vec<Vec<S>>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::invalid(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        let n = states[0].len();
        if n == 0 {
            return Err(Error::invalid("states must be nonempty"));
        }
        if states.iter().any(|s| s.len() != n) {
            return Err(Error::invalid("states differ in dimension"));
        }
        if times.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::invalid("time grid must be nondecreasing"));
        }
        Ok(Trajectory { times, states })
    }

    pub fn n(&self) -> usize {
        self.states[0].len()
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[S] {
        &self.states[k]
    }

    pub fn last_state(&self) -> &[S] {
        self.states.last().unwrap()
    }

    /// Positions of one particle across the grid.
    pub fn particle(&self, i: usize) -> Vec<S> {
        self.states.iter().map(|s| s[i].clone()).collect()
    }

    /// The same path with every state sorted ascending.
    pub fn sorted(&self) -> Trajectory<S> {
        let states = self
            .states
            .iter()
            .map(|s| {
                let mut v = s.clone();
                v.sort_by(|a, b| a.partial_cmp(b).expect("comparable scalars"));
                v
            })
            .collect();
        Trajectory {
            times: self.times.clone(),
            states,
        }
    }

    /// Largest per-particle position gap over the whole grid. Grids must
    /// have equal length and dimension; times are assumed to match.
    pub fn sup_distance(&self, other: &Trajectory<S>) -> Result<S> {
        if self.len() != other.len() || self.n() != other.n() {
            return Err(Error::invalid("trajectories have different shapes"));
        }
        let mut worst = S::zero();
        for (a, b) in self.states.iter().zip(&other.states) {
            for (x, y) in a.iter().zip(b) {
                let gap = (x.clone() - y.clone()).abs();
                if gap > worst {
                    worst = gap;
                }
            }
        }
        Ok(worst)
    }

    /// CSV rendering with header `t,x1,…,xn` and `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.n() {
            let _ = write!(out, ",x{i}");
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t}");
            for x in s {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }
}

/// `count + 1` equally spaced times `0, dt, …, count·dt`.
pub fn uniform_grid<S: Scalar>(dt: &S, count: usize) -> Vec<S> {
    (0..=count)
        .map(|k| dt.clone() * S::from_count(k))
        .collect()
}
