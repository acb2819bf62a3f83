//! Confusion matrices and accuracies.
//!
//! Orientation: `counts[predicted][true]`, so each column holds every item of
//! one true class and per-class accuracy is the diagonal over the column sum.

use std::fmt::Write as _;
use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::label::{Label, NUM_CLASSES};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a matrix from rows of predicted-class counts.
    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    pub fn get(&self, predicted: usize, truth: usize) -> u64 {
        self.counts[predicted][truth]
    }

    pub fn update(&mut self, predicted: usize, truth: usize) -> Result<()> {
        for i in [predicted, truth] {
            if i >= NUM_CLASSES {
                return Err(Error::IndexOutOfRange(i));
            }
        }
        self.counts[predicted][truth] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    pub fn column_sum(&self, truth: usize) -> u64 {
        self.counts.iter().map(|row| row[truth]).sum()
    }

    /// Percentage of items on the diagonal.
    pub fn overall_accuracy(&self) -> Result<f64> {
        match self.total() {
            0 => Err(Error::EmptyMatrix),
            total => Ok(100.0 * self.trace() as f64 / total as f64),
        }
    }

    /// Percentage correct within each true class.
    pub fn per_class_accuracy(&self) -> Result<[f64; NUM_CLASSES]> {
        let mut out = [0.0; NUM_CLASSES];
        for (j, acc) in out.iter_mut().enumerate() {
            let col = self.column_sum(j);
            if col == 0 {
                return Err(Error::EmptyColumn(Label::ALL[j].name()));
            }
            *acc = 100.0 * self.counts[j][j] as f64 / col as f64;
        }
        Ok(out)
    }

    /// Aligned table with class headers plus accuracies to two decimals.
    /// Classes with no items report `n/a`.
    pub fn report(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{title} (rows = predicted, columns = true)");
        let _ = write!(s, "{:>6}", "");
        for l in Label::ALL {
            let _ = write!(s, "{:>8}", l.name());
        }
        s.push('\n');
        for (p, row) in self.counts.iter().enumerate() {
            let _ = write!(s, "{:>6}", Label::ALL[p].name());
            for c in row {
                let _ = write!(s, "{c:>8}");
            }
            s.push('\n');
        }
        for (j, l) in Label::ALL.iter().enumerate() {
            let col = self.column_sum(j);
            if col == 0 {
                let _ = writeln!(s, "accuracy {}: n/a", l.name());
            } else {
                let acc = 100.0 * self.counts[j][j] as f64 / col as f64;
                let _ = writeln!(s, "accuracy {}: {acc:.2}%", l.name());
            }
        }
        match self.overall_accuracy() {
            Ok(acc) => {
                let _ = writeln!(s, "overall accuracy: {acc:.2}% ({} items)", self.total());
            }
            Err(_) => s.push_str("overall accuracy: n/a (0 items)\n"),
        }
        s
    }

    /// `predicted,true,count` rows for every cell, with header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("predicted,true,count\n");
        for (p, row) in self.counts.iter().enumerate() {
            for (t, c) in row.iter().enumerate() {
                let _ = writeln!(s, "{},{},{c}", Label::ALL[p].name(), Label::ALL[t].name());
            }
        }
        s
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.counts.iter_mut().flatten().zip(rhs.counts.iter().flatten()) {
            *a += b;
        }
    }
}
