//! Pareto step curves over (e-complexity, i-complexity) points and the
//! permutation test for an empty upper-right corner.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// The tightest non-increasing step function above a point set:
/// `f(x) = max { y_i : x_i >= x }` on `(0, max x_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoCurve {
    /// Non-dominated points, `x` strictly increasing and `y` strictly
    /// decreasing. `f` equals `y_k` on `(x_{k-1}, x_k]`, with `x_{-1} = 0`.
    frontier: Vec<(f64, f64)>,
}

impl ParetoCurve {
    pub fn frontier(&self) -> &[(f64, f64)] {
        &self.frontier
    }

    /// `f(x)`; `None` beyond the largest `x` or at `x <= 0`.
    pub fn eval(&self, x: f64) -> Option<f64> {
        if x <= 0.0 {
            return None;
        }
        self.frontier.iter().find(|&&(fx, _)| fx >= x).map(|&(_, y)| y)
    }

    pub fn max_x(&self) -> f64 {
        self.frontier.last().map(|p| p.0).unwrap_or(0.0)
    }
}

pub fn pareto_curve(points: &[(f64, f64)]) -> Result<ParetoCurve> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no points for a Pareto curve".into()));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(x.is_finite() && *x > 0.0 && y.is_finite() && *y >= 0.0)) {
        return Err(Error::Invalid(format!("point {p:?} needs x > 0 and y >= 0")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // sweep from the right keeping points above everything to their right
    let mut frontier: Vec<(f64, f64)> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for &(x, y) in sorted.iter().rev() {
        if y > best {
            if frontier.last().is_some_and(|l| l.0 == x) {
                frontier.pop();
            }
            frontier.push((x, y));
            best = y;
        }
    }
    frontier.reverse();
    Ok(ParetoCurve { frontier })
}

/// Exact integral of the step function over `(0, max x]`.
pub fn pareto_area(curve: &ParetoCurve) -> f64 {
    let mut prev = 0.0;
    let mut area = 0.0;
    for &(x, y) in &curve.frontier {
        area += (x - prev) * y;
        prev = x;
    }
    area
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermTestResult {
    pub observed_area: f64,
    pub n_perm: usize,
    /// Permutations whose area is `<=` the observed one.
    pub count_leq: usize,
    /// `(count_leq + 1) / (n_perm + 1)`.
    pub p_value: f64,
    pub seed: u64,
}

/// Permutation test of the Pareto area.
///
/// Each replica pairs the fixed `x` values with a uniformly shuffled copy of
/// the `y` values; the p-value is the add-one smoothed fraction of replicas
/// whose area does not exceed the observed one. Replica `k` draws from
/// stream `k` of a ChaCha8 generator seeded with `seed`, so the result does
/// not depend on thread count.
pub fn perm_test(points: &[(f64, f64)], n_perm: usize, seed: u64) -> Result<PermTestResult> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "permutation test needs >= 3 points, got {}",
            points.len()
        )));
    }
    if n_perm == 0 {
        return Err(Error::Invalid("n_perm must be >= 1".into()));
    }
    let observed = pareto_area(&pareto_curve(points)?);
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();

    let hits = par::map_range(n_perm, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut perm = ys.clone();
        perm.shuffle(&mut rng);
        let pts: Vec<(f64, f64)> = xs.iter().copied().zip(perm).collect();
        let area = pareto_area(&pareto_curve(&pts).expect("validated points"));
        area <= observed
    });
    let count_leq = hits.into_iter().filter(|&h| h).count();
    Ok(PermTestResult {
        observed_area: observed,
        n_perm,
        count_leq,
        p_value: (count_leq + 1) as f64 / (n_perm + 1) as f64,
        seed,
    })
}
