//! Model-agnostic machinery of the principle of evidence over discretized
//! parameter grids: relative belief ratios, verdicts, plausible and
//! implausible regions, the relative belief estimate, and strength.
//!
//! The cutoff between evidence for and against is exactly 1 and comparisons
//! are sharp: no epsilon band is applied anywhere in this module. Bins with
//! zero prior mass carry no defined relative belief ratio and are excluded
//! from ratios, regions, the argmax and strength sums.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Masses are accepted when they sum to 1 within this slack, then normalized.
const MASS_SUM_SLACK: f64 = 1e-6;

/// Discretized prior and posterior over bins of a scalar quantity of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceGrid {
    bin_edges: Vec<f64>,
    prior_mass: Vec<f64>,
    posterior_mass: Vec<f64>,
}

impl EvidenceGrid {
    /// Builds a grid from strictly increasing `bin_edges` (one more edge than
    /// bins) and per-bin prior/posterior masses.
    ///
    /// Mass vectors must be nonnegative and sum to 1 within 1e-6; they are
    /// normalized to sum exactly. A larger deviation is an error, not a
    /// silent rescale.
    pub fn new(
        bin_edges: Vec<f64>,
        prior_mass: Vec<f64>,
        posterior_mass: Vec<f64>,
    ) -> Result<Self> {
        if bin_edges.len() < 2 {
            return Err(Error::InvalidGrid("need at least one bin".into()));
        }
        if prior_mass.len() + 1 != bin_edges.len() || posterior_mass.len() + 1 != bin_edges.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} masses per vector for {} edges",
                bin_edges.len() - 1,
                bin_edges.len()
            )));
        }
        if bin_edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bin edge".into()));
        }
        if bin_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("bin edges must be strictly increasing".into()));
        }

        let mut grid = EvidenceGrid { bin_edges, prior_mass, posterior_mass };
        normalize(&mut grid.prior_mass, "prior")?;
        normalize(&mut grid.posterior_mass, "posterior")?;
        Ok(grid)
    }

    pub fn n_bins(&self) -> usize {
        self.prior_mass.len()
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn prior_mass(&self) -> &[f64] {
        &self.prior_mass
    }

    pub fn posterior_mass(&self) -> &[f64] {
        &self.posterior_mass
    }

    pub fn bin_width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    /// Midpoint of bin `i`.
    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    /// Index of the bin containing `x` under the convention (lo, hi].
    pub fn bin_index_of(&self, x: f64) -> Option<usize> {
        let first = *self.bin_edges.first().unwrap();
        let last = *self.bin_edges.last().unwrap();
        if x <= first || x > last {
            return None;
        }
        // partition_point returns the first edge >= x; the bin is the one to its left.
        let idx = self.bin_edges.partition_point(|e| *e < x);
        Some(idx - 1)
    }

    /// Relative belief ratio of bin `i`; error on a prior-null bin.
    pub fn rb(&self, i: usize) -> Result<f64> {
        rb_from_masses(self.prior_mass[i], self.posterior_mass[i])
    }

    /// RB per bin, `None` where the prior mass is zero.
    pub fn rb_values(&self) -> Vec<Option<f64>> {
        self.prior_mass
            .iter()
            .zip(&self.posterior_mass)
            .map(|(&p, &q)| if p > 0.0 { Some(q / p) } else { None })
            .collect()
    }

    /// Sum of prior_mass * RB over bins with positive prior mass.
    ///
    /// Equals the posterior mass carried by those bins, hence 1 whenever the
    /// posterior puts no mass on prior-null bins.
    pub fn total_rb_mass(&self) -> f64 {
        self.prior_mass
            .iter()
            .zip(&self.posterior_mass)
            .filter(|(&p, _)| p > 0.0)
            .map(|(&p, &q)| p * (q / p))
            .sum()
    }

    /// Posterior mass sitting on bins whose prior mass is zero.
    pub fn orphan_posterior_mass(&self) -> f64 {
        self.prior_mass
            .iter()
            .zip(&self.posterior_mass)
            .filter(|(&p, _)| p == 0.0)
            .map(|(_, &q)| q)
            .sum()
    }

    /// Writes the grid as `bin_lo,bin_hi,prior_mass,posterior_mass` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_lo,bin_hi,prior_mass,posterior_mass")?;
        for i in 0..self.n_bins() {
            writeln!(
                w,
                "{},{},{},{}",
                self.bin_edges[i], self.bin_edges[i + 1], self.prior_mass[i], self.posterior_mass[i]
            )?;
        }
        Ok(())
    }

    /// Parses a grid from the CSV format produced by [`EvidenceGrid::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(Error::Csv { line: 1, msg: "empty input".into() })?;
        let header = header.map_err(|e| Error::Csv { line: 1, msg: e.to_string() })?;
        if header.trim() != "bin_lo,bin_hi,prior_mass,posterior_mass" {
            return Err(Error::Csv {
                line: 1,
                msg: format!("unexpected header {header:?}"),
            });
        }

        let mut edges: Vec<f64> = Vec::new();
        let mut prior = Vec::new();
        let mut posterior = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Csv { line: line_no, msg: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Csv {
                    line: line_no,
                    msg: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| Error::Csv {
                    line: line_no,
                    msg: format!("bad number {s:?}: {e}"),
                })
            };
            let lo = parse(fields[0])?;
            let hi = parse(fields[1])?;
            match edges.last() {
                None => {
                    edges.push(lo);
                    edges.push(hi);
                }
                Some(&prev_hi) => {
                    if lo != prev_hi {
                        return Err(Error::Csv {
                            line: line_no,
                            msg: format!("bin_lo {lo} does not continue previous bin_hi {prev_hi}"),
                        });
                    }
                    edges.push(hi);
                }
            }
            prior.push(parse(fields[2])?);
            posterior.push(parse(fields[3])?);
        }
        EvidenceGrid::new(edges, prior, posterior)
    }
}

fn normalize(mass: &mut [f64], label: &str) -> Result<()> {
    if mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::InvalidGrid(format!("{label} masses must be finite and >= 0")));
    }
    let sum: f64 = mass.iter().sum();
    if (sum - 1.0).abs() > MASS_SUM_SLACK {
        return Err(Error::InvalidGrid(format!(
            "{label} masses sum to {sum}, outside 1 +/- {MASS_SUM_SLACK}"
        )));
    }
    for m in mass.iter_mut() {
        *m /= sum;
    }
    Ok(())
}

/// Relative belief ratio from a single prior/posterior mass pair.
pub fn rb_from_masses(prior_mass: f64, posterior_mass: f64) -> Result<f64> {
    if prior_mass == 0.0 {
        return Err(Error::PriorNull);
    }
    if prior_mass < 0.0 || posterior_mass < 0.0 {
        return Err(Error::Domain("masses must be nonnegative".into()));
    }
    Ok(posterior_mass / prior_mass)
}

/// Trichotomy of the principle of evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    InFavor,
    Against,
    NoEvidence,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::InFavor => "in_favor",
            Verdict::Against => "against",
            Verdict::NoEvidence => "no_evidence",
        })
    }
}

/// A relative belief ratio together with its verdict at the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvidenceVerdict {
    pub rb: f64,
    pub verdict: Verdict,
}

/// Classifies `rb` against the canonical cutoff 1.
pub fn classify_evidence(rb: f64) -> EvidenceVerdict {
    classify_evidence_at(rb, 1.0)
}

/// Classifies a measure of evidence against an arbitrary cutoff.
pub fn classify_evidence_at(value: f64, cutoff: f64) -> EvidenceVerdict {
    let verdict = if value > cutoff {
        Verdict::InFavor
    } else if value < cutoff {
        Verdict::Against
    } else {
        Verdict::NoEvidence
    };
    EvidenceVerdict { rb: value, verdict }
}

/// The plausible region { bins with RB > 1 } and its complement { RB < 1 }.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlausibleRegion {
    /// Bins with evidence in their favor, ascending.
    pub member_bins: Vec<usize>,
    /// Posterior probability of the plausible region.
    pub posterior_content: f64,
    /// Total width of the member bins, in units of the quantity of interest.
    pub volume: f64,
    /// The implausible region: bins with evidence against (RB < 1), ascending.
    pub implausible_bins: Vec<usize>,
}

/// Computes the plausible and implausible regions of a grid.
///
/// Prior-null bins belong to neither region. Errors if every bin is
/// prior-null.
pub fn plausible_region(grid: &EvidenceGrid) -> Result<PlausibleRegion> {
    if grid.prior_mass().iter().all(|&p| p == 0.0) {
        return Err(Error::Domain("all prior masses are zero".into()));
    }
    let mut member_bins = Vec::new();
    let mut implausible_bins = Vec::new();
    let mut posterior_content = 0.0;
    let mut volume = 0.0;
    for (i, rb) in grid.rb_values().into_iter().enumerate() {
        let Some(rb) = rb else { continue };
        if rb > 1.0 {
            member_bins.push(i);
            posterior_content += grid.posterior_mass()[i];
            volume += grid.bin_width(i);
        } else if rb < 1.0 {
            implausible_bins.push(i);
        }
    }
    Ok(PlausibleRegion { member_bins, posterior_content, volume, implausible_bins })
}

/// The relative belief estimate: the bin maximizing RB over positive-prior
/// bins, ties broken by the smallest index.
///
/// On grids whose posterior is supported by positive-prior bins the maximizing
/// RB is at least 1.
pub fn relative_belief_estimate(grid: &EvidenceGrid) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, rb) in grid.rb_values().into_iter().enumerate() {
        let Some(rb) = rb else { continue };
        match best {
            Some((_, rb_best)) if rb <= rb_best => {}
            _ => best = Some((i, rb)),
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::Domain("no bin with positive prior mass".into()))
}

/// Strength of the evidence for `target_bin`: the posterior probability of the
/// bins whose RB does not exceed the target's RB.
///
/// In the discrete case the value is sandwiched between the target's posterior
/// mass and min(1, RB(target)).
pub fn strength(grid: &EvidenceGrid, target_bin: usize) -> Result<f64> {
    let rb_target = grid.rb(target_bin)?;
    let mut total = 0.0;
    for (i, rb) in grid.rb_values().into_iter().enumerate() {
        let Some(rb) = rb else { continue };
        if rb <= rb_target {
            total += grid.posterior_mass()[i];
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn three_bin() -> EvidenceGrid {
        EvidenceGrid::new(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![0.6, 0.3, 0.1],
        )
        .unwrap()
    }

    #[test]
    fn rb_from_masses_examples() {
        assert_abs_diff_eq!(rb_from_masses(0.5, 0.5).unwrap(), 1.0);
        assert_abs_diff_eq!(rb_from_masses(0.2, 0.6).unwrap(), 3.0, epsilon = 1e-15);
        assert!(matches!(rb_from_masses(0.0, 0.1), Err(Error::PriorNull)));
    }

    #[test]
    fn classify_trichotomy() {
        assert_eq!(classify_evidence(1.0).verdict, Verdict::NoEvidence);
        assert_eq!(classify_evidence(3.2).verdict, Verdict::InFavor);
        assert_eq!(classify_evidence(0.4).verdict, Verdict::Against);
    }

    #[test]
    fn identical_masses_give_empty_region() {
        let grid = EvidenceGrid::new(
            vec![0.0, 1.0, 2.0],
            vec![0.5, 0.5],
            vec![0.5, 0.5],
        )
        .unwrap();
        let region = plausible_region(&grid).unwrap();
        assert!(region.member_bins.is_empty());
        assert!(region.implausible_bins.is_empty());
        assert_eq!(region.posterior_content, 0.0);
    }

    #[test]
    fn three_bin_region_and_estimate() {
        let grid = three_bin();
        let region = plausible_region(&grid).unwrap();
        assert_eq!(region.member_bins, vec![0]);
        assert_abs_diff_eq!(region.posterior_content, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(region.volume, 1.0);
        assert_eq!(region.implausible_bins, vec![1, 2]);
        assert_eq!(relative_belief_estimate(&grid).unwrap(), 0);
    }

    #[test]
    fn estimate_tie_breaks_to_smallest_index() {
        let grid = EvidenceGrid::new(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![0.25, 0.5, 0.25],
            vec![0.25, 0.5, 0.25],
        )
        .unwrap();
        assert_eq!(relative_belief_estimate(&grid).unwrap(), 0);
        assert_abs_diff_eq!(grid.rb(0).unwrap(), 1.0);
    }

    #[test]
    fn strength_examples() {
        let grid = three_bin();
        // target bin 1 has RB = 0.9; bins with RB <= 0.9 are bins 1 and 2.
        assert_abs_diff_eq!(strength(&grid, 1).unwrap(), 0.4, epsilon = 1e-12);

        let flat = EvidenceGrid::new(
            vec![0.0, 1.0, 2.0],
            vec![0.4, 0.6],
            vec![0.4, 0.6],
        )
        .unwrap();
        for b in 0..flat.n_bins() {
            assert_abs_diff_eq!(strength(&flat, b).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalization_policy() {
        // within slack: rescaled
        let grid = EvidenceGrid::new(
            vec![0.0, 1.0, 2.0],
            vec![0.5 + 4e-7, 0.5],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_abs_diff_eq!(grid.prior_mass().iter().sum::<f64>(), 1.0, epsilon = 1e-15);

        // outside slack: rejected
        let err = EvidenceGrid::new(vec![0.0, 1.0, 2.0], vec![0.6, 0.5], vec![0.5, 0.5]);
        assert!(err.is_err());
    }

    #[test]
    fn csv_round_trip() {
        let grid = three_bin();
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let back = EvidenceGrid::read_csv(buf.as_slice()).unwrap();
        assert_eq!(grid, back);
    }

    #[test]
    fn csv_rejects_gapped_bins() {
        let text = "bin_lo,bin_hi,prior_mass,posterior_mass\n0,1,0.5,0.5\n1.5,2,0.5,0.5\n";
        let err = EvidenceGrid::read_csv(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }));
    }

    #[test]
    fn bin_index_lookup() {
        let grid = three_bin();
        assert_eq!(grid.bin_index_of(0.5), Some(0));
        assert_eq!(grid.bin_index_of(1.0), Some(0)); // (lo, hi] convention
        assert_eq!(grid.bin_index_of(1.0000001), Some(1));
        assert_eq!(grid.bin_index_of(0.0), None);
        assert_eq!(grid.bin_index_of(3.5), None);
    }
}
