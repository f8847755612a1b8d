//! Precision/recall reports and margin histograms.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub support: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl ClassMetrics {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_score = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassMetrics {
            precision,
            recall,
            f_score,
            support: tp + fn_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub human: ClassMetrics,
    pub machine: ClassMetrics,
    /// Unweighted mean of the two per-class F-scores.
    pub average_f: f64,
    pub warnings: Vec<String>,
}

/// Confusion counts with machine as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut c = Confusion::default();
        for (truth, pred) in pairs {
            match (truth, pred) {
                (Label::Machine, Label::Machine) => c.tp += 1,
                (Label::Machine, Label::Human) => c.fn_ += 1,
                (Label::Human, Label::Machine) => c.fp += 1,
                (Label::Human, Label::Human) => c.tn += 1,
            }
        }
        c
    }

    pub fn report(&self) -> ClassificationReport {
        let machine = ClassMetrics::from_counts(self.tp, self.fp, self.fn_);
        let human = ClassMetrics::from_counts(self.tn, self.fn_, self.fp);
        ClassificationReport {
            human,
            machine,
            average_f: 0.5 * (human.f_score + machine.f_score),
            warnings: Vec::new(),
        }
    }
}

impl ClassificationReport {
    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Self {
        Confusion::from_pairs(truth.iter().copied().zip(predicted.iter().copied())).report()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,precision,recall,f_score,support\n");
        for (name, m) in [("human", &self.human), ("machine", &self.machine)] {
            writeln!(s, "{name},{:.6},{:.6},{:.6},{}", m.precision, m.recall, m.f_score, m.support).unwrap();
        }
        writeln!(
            s,
            "average,,,{:.6},{}",
            self.average_f,
            self.human.support + self.machine.support
        )
        .unwrap();
        s
    }
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>10} {:>10} {:>10} {:>10} {:>10}", "", "precision", "recall", "f-score", "support")?;
        for (name, m) in [("human", &self.human), ("machine", &self.machine)] {
            writeln!(
                f,
                "{:>10} {:>9.1}% {:>9.1}% {:>9.1}% {:>10}",
                name,
                100.0 * m.precision,
                100.0 * m.recall,
                100.0 * m.f_score,
                m.support
            )?;
        }
        writeln!(
            f,
            "{:>10} {:>10} {:>10} {:>9.1}% {:>10}",
            "avg",
            "",
            "",
            100.0 * self.average_f,
            self.human.support + self.machine.support
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Counts of `(margin + 1) / 2` scores per class in equal-width bins over
/// [0, 1]. The machine threshold 0.5 always falls on a bin edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    pub bins: usize,
    pub human: Vec<usize>,
    pub machine: Vec<usize>,
}

impl ScoreHistogram {
    pub const DEFAULT_BINS: usize = 20;

    pub fn new(bins: usize) -> Self {
        assert!(bins >= 2 && bins % 2 == 0, "bin count must be even");
        ScoreHistogram {
            bins,
            human: vec![0; bins],
            machine: vec![0; bins],
        }
    }

    pub fn from_margins(margins: &[(Label, f64)], bins: usize) -> Self {
        let mut h = Self::new(bins);
        for &(label, m) in margins {
            h.add(label, m);
        }
        h
    }

    pub fn add(&mut self, label: Label, margin: f64) {
        let score = ((margin + 1.0) / 2.0).clamp(0.0, 1.0);
        let bin = ((score * self.bins as f64) as usize).min(self.bins - 1);
        match label {
            Label::Human => self.human[bin] += 1,
            Label::Machine => self.machine[bin] += 1,
        }
    }

    /// Index of the first bin at or above the 0.5 threshold.
    pub fn threshold_bin(&self) -> usize {
        self.bins / 2
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = 1.0 / self.bins as f64;
        (bin as f64 * w, (bin + 1) as f64 * w)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_left,bin_right,count_human,count_machine\n");
        for i in 0..self.bins {
            let (l, r) = self.edges(i);
            writeln!(s, "{l:.2},{r:.2},{},{}", self.human[i], self.machine[i]).unwrap();
        }
        s
    }

    /// Text bars, with a marker line at the threshold edge.
    pub fn render(&self, width: usize) -> String {
        let max = self
            .human
            .iter()
            .chain(&self.machine)
            .copied()
            .max()
            .unwrap_or(0)
            .max(1);
        let bar = |n: usize, c: char| c.to_string().repeat((n * width).div_ceil(max));
        let mut s = String::new();
        for i in 0..self.bins {
            if i == self.threshold_bin() {
                writeln!(s, "{:-<1$} 0.50 threshold", "", 12 + width).unwrap();
            }
            let (l, r) = self.edges(i);
            writeln!(s, "[{l:.2},{r:.2}) h {}", bar(self.human[i], '#')).unwrap();
            writeln!(s, "            m {}", bar(self.machine[i], '*')).unwrap();
        }
        s
    }
}
