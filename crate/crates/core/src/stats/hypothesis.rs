//! Kruskal-Wallis and Levene / Brown-Forsythe k-sample tests.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::special::{chi2_sf, f_sf};
use crate::error::{domain, Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dof {
    ChiSquare(usize),
    F(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct RankTestResult<S> {
    pub statistic: S,
    pub p_value: S,
    pub dof: Dof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeveneCenter {
    /// Classic Levene.
    #[default]
    Mean,
    /// Brown-Forsythe.
    Median,
}

fn check_groups<S: Scalar>(groups: &[Vec<S>], min_size: usize) -> Result<usize> {
    if groups.len() < 2 {
        return Err(domain(format!("need at least 2 groups, got {}", groups.len())));
    }
    let mut n = 0;
    for (j, g) in groups.iter().enumerate() {
        if g.len() < min_size {
            return Err(domain(format!(
                "group {j} has {} observations, need at least {min_size}",
                g.len()
            )));
        }
        if let Some(v) = g.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("group {j} contains non-finite value {v}")));
        }
        n += g.len();
    }
    Ok(n)
}

/// Mid-ranks (1-based) of `values` and the tie term `Σ (t³ − t)`.
pub fn mid_ranks<S: Scalar>(values: &[S]) -> (Vec<S>, S) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![S::zero(); values.len()];
    let mut ties = S::zero();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share ranks i+1..=j
        let rank = S::from_usize_lossy(i + 1 + j) * S::lit(0.5);
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = S::from_usize_lossy(j - i);
        ties = ties + t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

pub fn kruskal_wallis<S: Scalar>(groups: &[Vec<S>]) -> Result<RankTestResult<S>> {
    let n = check_groups(groups, 1)?;
    if n < 3 {
        return Err(domain(format!("need at least 3 observations in total, got {n}")));
    }
    let k = groups.len();
    let dof = Dof::ChiSquare(k - 1);
    let pooled: Vec<S> = groups.iter().flatten().copied().collect();
    let (ranks, ties) = mid_ranks(&pooled);
    let nf = S::from_usize_lossy(n);
    let correction = S::one() - ties / (nf * nf * nf - nf);
    if correction <= S::zero() {
        // every observation identical
        return Ok(RankTestResult {
            statistic: S::zero(),
            p_value: S::one(),
            dof,
        });
    }
    let grand = (nf + S::one()) * S::lit(0.5);
    let mut spread = S::zero();
    let mut offset = 0;
    for g in groups {
        let nj = S::from_usize_lossy(g.len());
        let sum = ranks[offset..offset + g.len()].iter().fold(S::zero(), |a, &r| a + r);
        let d = sum / nj - grand;
        spread = spread + nj * d * d;
        offset += g.len();
    }
    let statistic = S::lit(12.0) * spread / (nf * (nf + S::one())) / correction;
    Ok(RankTestResult {
        statistic,
        p_value: chi2_sf(statistic, S::from_usize_lossy(k - 1))?,
        dof,
    })
}

fn mean<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |a, &x| a + x) / S::from_usize_lossy(v.len())
}

fn median<S: Scalar>(v: &[S]) -> S {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) * S::lit(0.5)
    }
}

/// Levene's statistic `W` on absolute deviations from each group's center.
///
/// When every group's deviations are constant `W` is `+inf` (p = 0) unless
/// all group means of the deviations coincide too, in which case the
/// statistic is undefined and [`Error::Degenerate`] is returned.
pub fn levene<S: Scalar>(groups: &[Vec<S>], center: LeveneCenter) -> Result<RankTestResult<S>> {
    let n = check_groups(groups, 2)?;
    let k = groups.len();
    let dof = Dof::F(k - 1, n - k);
    let z: Vec<Vec<S>> = groups
        .iter()
        .map(|g| {
            let c = match center {
                LeveneCenter::Mean => mean(g),
                LeveneCenter::Median => median(g),
            };
            g.iter().map(|&x| (x - c).abs()).collect()
        })
        .collect();
    let z_means: Vec<S> = z.iter().map(|g| mean(g)).collect();
    let nf = S::from_usize_lossy(n);
    let z_grand = z.iter().flatten().fold(S::zero(), |a, &x| a + x) / nf;

    let mut between = S::zero();
    let mut within = S::zero();
    for (g, &m) in z.iter().zip(&z_means) {
        let d = m - z_grand;
        between = between + S::from_usize_lossy(g.len()) * d * d;
        within = within + g.iter().fold(S::zero(), |a, &x| a + (x - m) * (x - m));
    }
    let (d1, d2) = (S::from_usize_lossy(k - 1), S::from_usize_lossy(n - k));
    if within == S::zero() {
        if between == S::zero() {
            return Err(Error::Degenerate(
                "absolute deviations are identical in every group".into(),
            ));
        }
        return Ok(RankTestResult {
            statistic: S::infinity(),
            p_value: S::zero(),
            dof,
        });
    }
    let statistic = d2 / d1 * between / within;
    Ok(RankTestResult {
        statistic,
        p_value: f_sf(statistic, d1, d2)?,
        dof,
    })
}
