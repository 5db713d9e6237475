use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generate::rng_for;
use crate::error::{LcaError, Result};
use crate::rank::Seed;

/// How each ball samples its `d` bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum ChoiceScheme {
    /// A uniform random subset of `d` distinct bins.
    Uniform,
    /// Bins split into `d` contiguous groups of almost equal size; the i-th
    /// choice is uniform within group i.
    Groups,
    /// `d` independent draws with probability proportional to capacity.
    CapacityProportional { capacities: Vec<u64> },
    /// Bins sit at sorted uniform points on the unit circle; each of `d`
    /// uniform points picks its nearest bin.
    Circle,
}

/// Ball-to-bin choice graph with bin-side incidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteChoices {
    n_balls: usize,
    m_bins: usize,
    d: usize,
    choices: Vec<usize>,
    bin_offsets: Vec<usize>,
    bin_balls: Vec<usize>,
    capacities: Option<Vec<u64>>,
    groups: Option<Vec<usize>>,
    positions: Option<Vec<f64>>,
}

impl BipartiteChoices {
    /// Every inner list must hold exactly `d` bins below `m_bins`.
    pub fn new(m_bins: usize, d: usize, choices: Vec<Vec<usize>>) -> Result<Self> {
        if d == 0 {
            return Err(LcaError::invalid("each ball needs d >= 1 choices"));
        }
        let n_balls = choices.len();
        let mut flat = Vec::with_capacity(n_balls * d);
        for (ball, list) in choices.into_iter().enumerate() {
            if list.len() != d {
                return Err(LcaError::invalid(format!(
                    "ball {ball} has {} choices, expected {d}",
                    list.len()
                )));
            }
            if let Some(&b) = list.iter().find(|&&b| b >= m_bins) {
                return Err(LcaError::invalid(format!(
                    "ball {ball} chooses bin {b} outside range {m_bins}"
                )));
            }
            flat.extend(list);
        }
        let mut per_bin: Vec<Vec<usize>> = vec![Vec::new(); m_bins];
        for ball in 0..n_balls {
            let mut bins = flat[ball * d..(ball + 1) * d].to_vec();
            bins.sort_unstable();
            bins.dedup();
            for b in bins {
                per_bin[b].push(ball);
            }
        }
        let mut bin_offsets = Vec::with_capacity(m_bins + 1);
        bin_offsets.push(0);
        let mut bin_balls = Vec::with_capacity(n_balls * d);
        for list in per_bin {
            bin_balls.extend(list);
            bin_offsets.push(bin_balls.len());
        }
        Ok(BipartiteChoices {
            n_balls,
            m_bins,
            d,
            choices: flat,
            bin_offsets,
            bin_balls,
            capacities: None,
            groups: None,
            positions: None,
        })
    }

    /// Attaches per-bin capacities; they must sum to the ball count.
    pub fn with_capacities(mut self, capacities: Vec<u64>) -> Result<Self> {
        validate_capacities(&capacities, self.m_bins, self.n_balls)?;
        self.capacities = Some(capacities);
        Ok(self)
    }

    /// Attaches the contiguous `d`-group partition used by always-go-left.
    pub fn with_groups(mut self) -> Result<Self> {
        if self.m_bins < self.d {
            return Err(LcaError::invalid(format!(
                "{} groups requested but only {} bins",
                self.d, self.m_bins
            )));
        }
        self.groups = Some((0..self.m_bins).map(|b| group_of(b, self.m_bins, self.d)).collect());
        Ok(self)
    }

    pub fn n_balls(&self) -> usize {
        self.n_balls
    }

    pub fn m_bins(&self) -> usize {
        self.m_bins
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn choices(&self, ball: usize) -> &[usize] {
        &self.choices[ball * self.d..(ball + 1) * self.d]
    }

    /// Balls that chose `bin`, ascending.
    pub fn balls_of(&self, bin: usize) -> &[usize] {
        &self.bin_balls[self.bin_offsets[bin]..self.bin_offsets[bin + 1]]
    }

    pub fn capacities(&self) -> Option<&[u64]> {
        self.capacities.as_deref()
    }

    pub fn groups(&self) -> Option<&[usize]> {
        self.groups.as_deref()
    }

    pub fn positions(&self) -> Option<&[f64]> {
        self.positions.as_deref()
    }
}

fn validate_capacities(capacities: &[u64], m_bins: usize, n_balls: usize) -> Result<()> {
    if capacities.len() != m_bins {
        return Err(LcaError::invalid(format!(
            "{} capacities for {m_bins} bins",
            capacities.len()
        )));
    }
    let total: u64 = capacities.iter().sum();
    if total != n_balls as u64 {
        return Err(LcaError::invalid(format!(
            "capacities sum to {total}, expected {n_balls}"
        )));
    }
    Ok(())
}

/// Group of bin `b` when `m` bins are split into `d` contiguous groups.
pub(crate) fn group_of(b: usize, m: usize, d: usize) -> usize {
    // Group i covers [i*m/d, (i+1)*m/d).
    ((b + 1) * d - 1) / m
}

fn group_range(i: usize, m: usize, d: usize) -> std::ops::Range<usize> {
    i * m / d..(i + 1) * m / d
}

fn nearest_on_circle(positions: &[f64], x: f64) -> usize {
    let m = positions.len();
    let i = positions.partition_point(|&p| p < x);
    let after = i % m;
    let before = (i + m - 1) % m;
    let dist = |p: f64| {
        let d = (p - x).abs();
        d.min(1.0 - d)
    };
    let (db, da) = (dist(positions[before]), dist(positions[after]));
    match db.partial_cmp(&da) {
        Some(std::cmp::Ordering::Less) => before,
        Some(std::cmp::Ordering::Greater) => after,
        // Equidistant: lower bin id.
        _ => before.min(after),
    }
}

/// Samples `d` choices per ball under `scheme`.
pub fn gen_bipartite_choices(
    seed: &Seed,
    n_balls: usize,
    m_bins: usize,
    d: usize,
    scheme: &ChoiceScheme,
) -> Result<BipartiteChoices> {
    if d == 0 {
        return Err(LcaError::invalid("d must be >= 1"));
    }
    if m_bins == 0 {
        return Err(LcaError::invalid("need at least one bin"));
    }
    let mut rng = rng_for(seed, b"gen/bipartite");
    let mut choices = Vec::with_capacity(n_balls);
    match scheme {
        ChoiceScheme::Uniform => {
            if m_bins < d {
                return Err(LcaError::invalid(format!(
                    "{d} distinct choices need at least {d} bins, got {m_bins}"
                )));
            }
            for _ in 0..n_balls {
                let mut list: Vec<usize> = Vec::with_capacity(d);
                while list.len() < d {
                    let b = rng.random_range(0..m_bins);
                    if !list.contains(&b) {
                        list.push(b);
                    }
                }
                choices.push(list);
            }
            BipartiteChoices::new(m_bins, d, choices)
        }
        ChoiceScheme::Groups => {
            if m_bins < d {
                return Err(LcaError::invalid(format!(
                    "{d} groups requested but only {m_bins} bins"
                )));
            }
            for _ in 0..n_balls {
                choices.push(
                    (0..d)
                        .map(|i| rng.random_range(group_range(i, m_bins, d)))
                        .collect(),
                );
            }
            BipartiteChoices::new(m_bins, d, choices)?.with_groups()
        }
        ChoiceScheme::CapacityProportional { capacities } => {
            validate_capacities(capacities, m_bins, n_balls)?;
            if n_balls > 0 {
                let dist = WeightedIndex::new(capacities)
                    .map_err(|e| LcaError::invalid(format!("capacities: {e}")))?;
                for _ in 0..n_balls {
                    choices.push((0..d).map(|_| dist.sample(&mut rng)).collect());
                }
            }
            BipartiteChoices::new(m_bins, d, choices)?.with_capacities(capacities.clone())
        }
        ChoiceScheme::Circle => {
            let mut positions: Vec<f64> = (0..m_bins).map(|_| rng.random::<f64>()).collect();
            positions.sort_by(f64::total_cmp);
            for _ in 0..n_balls {
                choices.push(
                    (0..d)
                        .map(|_| nearest_on_circle(&positions, rng.random::<f64>()))
                        .collect(),
                );
            }
            let mut bc = BipartiteChoices::new(m_bins, d, choices)?;
            bc.positions = Some(positions);
            Ok(bc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_choice() {
        let bc = gen_bipartite_choices(&Seed::from_u64(1), 100, 50, 1, &ChoiceScheme::Uniform).unwrap();
        assert!((0..100).all(|b| bc.choices(b).len() == 1));
    }

    #[test]
    fn uniform_in_degree_mean() {
        let (n, m, d) = (10_000, 10_000, 2);
        let bc = gen_bipartite_choices(&Seed::from_u64(2), n, m, d, &ChoiceScheme::Uniform).unwrap();
        let mean = (0..m).map(|b| bc.balls_of(b).len()).sum::<usize>() as f64 / m as f64;
        let expected = (n * d) as f64 / m as f64;
        assert!((mean - expected).abs() <= 0.05 * expected);
        for ball in 0..n {
            let c = bc.choices(ball);
            assert_ne!(c[0], c[1]);
        }
    }

    #[test]
    fn group_choices_respect_groups() {
        let (m, d) = (10, 3);
        let bc = gen_bipartite_choices(&Seed::from_u64(3), 200, m, d, &ChoiceScheme::Groups).unwrap();
        let groups = bc.groups().unwrap();
        for ball in 0..200 {
            for (i, &b) in bc.choices(ball).iter().enumerate() {
                assert_eq!(groups[b], i);
            }
        }
        for b in 0..m {
            assert!(group_range(group_of(b, m, d), m, d).contains(&b));
        }
        assert!(gen_bipartite_choices(&Seed::from_u64(3), 5, 2, 3, &ChoiceScheme::Groups).is_err());
    }

    #[test]
    fn capacities_must_sum_to_balls() {
        let bad = ChoiceScheme::CapacityProportional { capacities: vec![1, 1] };
        assert!(gen_bipartite_choices(&Seed::from_u64(4), 3, 2, 2, &bad).is_err());
        let good = ChoiceScheme::CapacityProportional { capacities: vec![0, 3] };
        let bc = gen_bipartite_choices(&Seed::from_u64(4), 3, 2, 2, &good).unwrap();
        assert!((0..3).all(|b| bc.choices(b) == [1, 1]));
        assert_eq!(bc.balls_of(1), &[0, 1, 2]);
    }

    #[test]
    fn circle_picks_nearest() {
        let pos = [0.1, 0.4, 0.8];
        assert_eq!(nearest_on_circle(&pos, 0.05), 0);
        assert_eq!(nearest_on_circle(&pos, 0.3), 1);
        assert_eq!(nearest_on_circle(&pos, 0.97), 0);
        assert_eq!(nearest_on_circle(&pos, 0.7), 2);
        let bc = gen_bipartite_choices(&Seed::from_u64(5), 50, 20, 2, &ChoiceScheme::Circle).unwrap();
        assert!(bc.positions().unwrap().windows(2).all(|w| w[0] <= w[1]));
    }
}
