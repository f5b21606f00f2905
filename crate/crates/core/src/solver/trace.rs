use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Per-iteration SCF accuracy and total energy of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfTrace {
    pub accuracies: Vec<f64>,
    pub energies: Vec<f64>,
    pub converged: bool,
    pub iterations_to_converge: Option<usize>,
    pub final_energy: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("trace csv line {line}: {reason}")]
pub struct TraceParseError {
    pub line: usize,
    pub reason: String,
}

impl ScfTrace {
    pub fn from_series(accuracies: Vec<f64>, energies: Vec<f64>, conv_thr: f64) -> Self {
        assert_eq!(accuracies.len(), energies.len());
        let converged = accuracies.last().is_some_and(|&a| a < conv_thr);
        ScfTrace {
            final_energy: energies.last().copied().unwrap_or(f64::NAN),
            iterations_to_converge: converged.then_some(accuracies.len()),
            converged,
            accuracies,
            energies,
        }
    }

    pub fn len(&self) -> usize {
        self.accuracies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accuracies.is_empty()
    }

    /// `iter,accuracy_ha,energy_ha` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,accuracy_ha,energy_ha\n");
        for (i, (a, e)) in self.accuracies.iter().zip(&self.energies).enumerate() {
            writeln!(out, "{},{:.16e},{:.16e}", i + 1, a, e).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str, conv_thr: f64) -> Result<Self, TraceParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "iter,accuracy_ha,energy_ha")) => {}
            _ => {
                return Err(TraceParseError {
                    line: 1,
                    reason: "missing header".into(),
                })
            }
        }
        let (mut acc, mut en) = (Vec::new(), Vec::new());
        for (i, line) in lines {
            let bad = |reason: &str| TraceParseError {
                line: i + 1,
                reason: reason.into(),
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(bad("expected 3 fields"));
            }
            let it: usize = fields[0].parse().map_err(|_| bad("bad iteration"))?;
            if it != acc.len() + 1 {
                return Err(bad("iterations out of order"));
            }
            acc.push(fields[1].parse().map_err(|_| bad("bad accuracy"))?);
            en.push(fields[2].parse().map_err(|_| bad("bad energy"))?);
        }
        Ok(Self::from_series(acc, en, conv_thr))
    }
}
