use std::io::Write;

pub const SUMMARY_HEADER: &str =
    "seed,baseline_abs_J_error,adaptive_abs_J_error,baseline_points,adaptive_points";

/// Final errors of one seed in a comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    pub baseline: f64,
    pub adaptive: f64,
    pub baseline_points: usize,
    pub adaptive_points: usize,
}

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub rows: Vec<SeedResult>,
}

impl Summary {
    pub fn median_baseline(&self) -> f64 {
        median(&self.rows.iter().map(|r| r.baseline).collect::<Vec<_>>())
    }

    pub fn median_adaptive(&self) -> f64 {
        median(&self.rows.iter().map(|r| r.adaptive).collect::<Vec<_>>())
    }

    /// One row per seed, then a `median` row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SUMMARY_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:e},{:e},{},{}",
                r.seed, r.baseline, r.adaptive, r.baseline_points, r.adaptive_points
            )?;
        }
        if !self.rows.is_empty() {
            let bp = median(&self.rows.iter().map(|r| r.baseline_points as f64).collect::<Vec<_>>());
            let ap = median(&self.rows.iter().map(|r| r.adaptive_points as f64).collect::<Vec<_>>());
            writeln!(out, "median,{:e},{:e},{bp},{ap}", self.median_baseline(), self.median_adaptive())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn csv_layout() {
        let s = Summary {
            rows: (0..3)
                .map(|k| SeedResult {
                    seed: k,
                    baseline: 1.0 + k as f64,
                    adaptive: 0.5,
                    baseline_points: 10,
                    adaptive_points: 10,
                })
                .collect(),
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], SUMMARY_HEADER);
        assert_eq!(lines[4], "median,2e0,5e-1,10,10");
    }
}
