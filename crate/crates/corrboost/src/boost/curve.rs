//! Learning-curve record: per-iteration training error, test error at the
//! evaluation cadence, and cumulative wall time.

use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub iteration: usize,
    pub train_error: f64,
    pub test_error: Option<f64>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    /// Delimited text: `iteration,train_error,test_error,elapsed_seconds`,
    /// with an empty test field when the iteration was not evaluated.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "iteration,train_error,test_error,elapsed_seconds")?;
        for p in &self.points {
            let test = p.test_error.map(|e| e.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{:.3}",
                p.iteration, p.train_error, test, p.elapsed_seconds
            )?;
        }
        Ok(())
    }

    /// Mean of the recorded test errors over the last half of the run
    /// (iterations strictly above T/2, with T the last recorded iteration).
    pub fn mean_test_error_last_half(&self) -> Option<f64> {
        let t = self.points.last()?.iteration;
        let half = t / 2;
        let tail: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.iteration > half)
            .filter_map(|p| p.test_error)
            .collect();
        if tail.is_empty() {
            None
        } else {
            Some(tail.iter().sum::<f64>() / tail.len() as f64)
        }
    }
}
