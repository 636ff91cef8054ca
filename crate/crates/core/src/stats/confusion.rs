//! Cue-recognition confusion matrix.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sensing::Direction;

/// Row and column order used when presenting the matrix as a table.
pub const TABLE_ORDER: [Direction; 6] = [
    Direction::Back,
    Direction::Front,
    Direction::Left,
    Direction::Right,
    Direction::Up,
    Direction::Down,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueTrial {
    pub actual: Direction,
    pub reported: Direction,
}

/// Counts indexed `[actual][reported]` by [`Direction::index`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 6]; 6],
}

impl ConfusionMatrix {
    pub fn from_trials(trials: &[CueTrial]) -> Result<Self> {
        if trials.is_empty() {
            return Err(domain("confusion matrix needs at least one trial"));
        }
        let mut counts = [[0; 6]; 6];
        for t in trials {
            counts[t.actual.index()][t.reported.index()] += 1;
        }
        Ok(Self { counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Directions that never occurred as the actual cue.
    pub fn empty_rows(&self) -> Vec<Direction> {
        Direction::ALL
            .into_iter()
            .filter(|d| self.counts[d.index()].iter().sum::<usize>() == 0)
            .collect()
    }

    /// Row percentages for one actual direction, columns in [`Direction`]
    /// order. All zero for a row without trials.
    pub fn row_percentages(&self, actual: Direction) -> [f64; 6] {
        let row = &self.counts[actual.index()];
        let n: usize = row.iter().sum();
        if n == 0 {
            return [0.0; 6];
        }
        row.map(|c| 100.0 * c as f64 / n as f64)
    }

    pub fn percentages(&self) -> [[f64; 6]; 6] {
        Direction::ALL.map(|d| self.row_percentages(d))
    }

    /// Row percentages with columns in [`TABLE_ORDER`].
    pub fn table_row(&self, actual: Direction) -> [f64; 6] {
        let row = self.row_percentages(actual);
        TABLE_ORDER.map(|d| row[d.index()])
    }

    /// Correct decodings over all trials, in percent.
    pub fn accuracy(&self) -> f64 {
        let correct: usize = (0..6).map(|i| self.counts[i][i]).sum();
        100.0 * correct as f64 / self.total() as f64
    }
}
