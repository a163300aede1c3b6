//! Annotation cost accounting.

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub hours_per_disc: f64,
    /// Extra effort of framewise labeling over discwise, as a fraction.
    pub framewise_overhead_range: (f64, f64),
    /// Hours to label one full frame. `None` derives it from the disc cost
    /// and the overhead midpoint.
    pub hours_per_frame: Option<f64>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { hours_per_disc: 3.5, framewise_overhead_range: (0.10, 0.80), hours_per_frame: None }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), SimError> {
        let (lo, hi) = self.framewise_overhead_range;
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.hours_per_disc) || !positive(lo) || !(lo <= hi) || !hi.is_finite() {
            return Err(SimError::BadParams("cost model values must be positive and ordered"));
        }
        if self.hours_per_frame.is_some_and(|h| !positive(h)) {
            return Err(SimError::BadParams("hours per frame must be positive"));
        }
        Ok(())
    }

    pub fn overhead_midpoint(&self) -> f64 {
        0.5 * (self.framewise_overhead_range.0 + self.framewise_overhead_range.1)
    }

    /// A disc costs one frame plus the overhead, so a frame costs
    /// `hours_per_disc / (1 + midpoint)` unless configured.
    pub fn frame_hours(&self) -> f64 {
        self.hours_per_frame.unwrap_or(self.hours_per_disc / (1.0 + self.overhead_midpoint()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetReport {
    pub discs: usize,
    pub disc_hours: f64,
    /// Frames worth of labeled points: the sum of labeled point fractions.
    pub frame_equivalents: f64,
    /// What labeling the same points frame by frame would cost.
    pub framewise_hours: f64,
    pub labeled_point_percentage: f64,
}

pub fn budget_report(
    discs: usize,
    frame_fractions: &[f64],
    labeled_points: usize,
    total_points: usize,
    cost: &CostModel,
) -> BudgetReport {
    let frame_equivalents: f64 = frame_fractions.iter().sum();
    let labeled_point_percentage =
        if total_points == 0 { 0.0 } else { 100.0 * labeled_points as f64 / total_points as f64 };
    BudgetReport {
        discs,
        disc_hours: discs as f64 * cost.hours_per_disc,
        frame_equivalents,
        framewise_hours: frame_equivalents * cost.frame_hours(),
        labeled_point_percentage,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_hours() {
        let c = CostModel::default();
        assert_eq!(budget_report(51, &[], 0, 0, &c).disc_hours, 178.5);
        let zero = budget_report(0, &[], 0, 10, &c);
        assert_eq!((zero.disc_hours, zero.framewise_hours, zero.labeled_point_percentage), (0.0, 0.0, 0.0));
    }

    #[test]
    fn framewise_equivalent_uses_midpoint() {
        let c = CostModel::default();
        assert!((c.overhead_midpoint() - 0.45).abs() < 1e-15);
        assert!((c.frame_hours() - 3.5 / 1.45).abs() < 1e-15);
        let r = budget_report(2, &[1.0, 0.5, 0.0], 30, 120, &c);
        assert!((r.frame_equivalents - 1.5).abs() < 1e-15);
        assert!((r.framewise_hours - 1.5 * 3.5 / 1.45).abs() < 1e-12);
        assert_eq!(r.labeled_point_percentage, 25.0);

        let fixed = CostModel { hours_per_frame: Some(2.0), ..c };
        assert!((budget_report(0, &[2.0], 0, 1, &fixed).framewise_hours - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unordered_overhead() {
        assert!(CostModel { framewise_overhead_range: (0.8, 0.1), ..CostModel::default() }.validate().is_err());
    }
}
