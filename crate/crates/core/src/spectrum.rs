//! Certified eigenvalue multisets and the counting function.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lame::{BoundaryCondition, FlatDomain, LameParameters};

/// Values within this relative distance are merged into one multiplicity.
pub const MERGE_TOLERANCE: f64 = 1e-9;

/// Version stamped into serialized spectra.
pub const FORMAT_VERSION: u32 = 1;

/// Provenance of an eigenvalue within a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Gradient fields, speed `lambda + 2 mu`.
    Pressure,
    /// Divergence-free fields, speed `mu`.
    Shear,
    /// Scalar Laplacian modes.
    Scalar,
    /// Coupled pressure/shear modes of the disk.
    Coupled,
    /// Zero modes given by rigid motions.
    Rigid,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Pressure => "pressure",
            Family::Shear => "shear",
            Family::Scalar => "scalar",
            Family::Coupled => "coupled",
            Family::Rigid => "rigid",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One merged eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub eigenvalue: f64,
    pub multiplicity: u64,
}

/// One eigenvalue as produced by a family, before merging across families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub eigenvalue: f64,
    pub multiplicity: u64,
    pub family: Family,
    /// Angular index on the disk.
    pub angular_index: Option<u32>,
}

impl ModeRow {
    pub fn new(eigenvalue: f64, multiplicity: u64, family: Family) -> Self {
        Self {
            eigenvalue,
            multiplicity,
            family,
            angular_index: None,
        }
    }

    pub fn with_angular_index(mut self, k: u32) -> Self {
        self.angular_index = Some(k);
        self
    }
}

/// Summary of the residual checks applied to the emitted eigenfields.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificationSummary {
    pub fields_checked: u64,
    pub sample_points: u64,
    /// Worst scale-normalized PDE residual.
    pub max_pde_residual: f64,
    /// Worst scale-normalized boundary residual.
    pub max_bc_residual: f64,
}

impl CertificationSummary {
    pub fn absorb(&mut self, other: &CertificationSummary) {
        self.fields_checked += other.fields_checked;
        self.sample_points += other.sample_points;
        self.max_pde_residual = self.max_pde_residual.max(other.max_pde_residual);
        self.max_bc_residual = self.max_bc_residual.max(other.max_bc_residual);
    }
}

/// Ascending eigenvalues with multiplicities, complete below `lambda_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    entries: Vec<SpectrumEntry>,
    rows: Vec<ModeRow>,
    // cumulative[i] = total multiplicity of entries[..i]
    #[serde(skip)]
    cumulative: Vec<u64>,
    lambda_max: f64,
    domain: FlatDomain,
    bc: BoundaryCondition,
    params: Option<LameParameters>,
    certification: Option<CertificationSummary>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_TOLERANCE * a.abs().max(b.abs())
}

fn merge_sorted<K: PartialEq + Copy>(
    rows: impl Iterator<Item = (K, f64, u64)>,
) -> Vec<(K, f64, u64)> {
    let mut out: Vec<(K, f64, u64)> = Vec::new();
    for (key, value, mult) in rows {
        match out.last_mut() {
            Some(last) if last.0 == key && close(last.1, value) => last.2 += mult,
            _ => out.push((key, value, mult)),
        }
    }
    out
}

impl Spectrum {
    /// Builds a spectrum from unsorted family rows.
    ///
    /// Rows without an angular index are merged per family; all rows are then
    /// merged across families into [`Spectrum::entries`].
    pub fn from_rows(
        mut rows: Vec<ModeRow>,
        lambda_max: f64,
        domain: FlatDomain,
        bc: BoundaryCondition,
        params: Option<LameParameters>,
    ) -> Result<Self> {
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(Error::ContractViolation(format!(
                "lambda_max must be positive and finite, got {lambda_max}"
            )));
        }
        for row in &rows {
            if !(row.eigenvalue >= 0.0 && row.eigenvalue <= lambda_max) || row.multiplicity == 0 {
                return Err(Error::Integrity(format!(
                    "row {row:?} violates 0 <= eigenvalue <= {lambda_max} with positive multiplicity"
                )));
            }
        }
        rows.sort_by(|a, b| {
            (a.family, a.angular_index)
                .cmp(&(b.family, b.angular_index))
                .then(a.eigenvalue.total_cmp(&b.eigenvalue))
        });
        let rows: Vec<ModeRow> = merge_sorted(
            rows.iter()
                .map(|r| ((r.family, r.angular_index), r.eigenvalue, r.multiplicity)),
        )
        .into_iter()
        .map(|((family, angular_index), eigenvalue, multiplicity)| ModeRow {
            eigenvalue,
            multiplicity,
            family,
            angular_index,
        })
        .collect();

        let mut by_value: Vec<(f64, u64)> = rows.iter().map(|r| (r.eigenvalue, r.multiplicity)).collect();
        by_value.sort_by(|a, b| a.0.total_cmp(&b.0));
        let entries: Vec<SpectrumEntry> = merge_sorted(by_value.into_iter().map(|(v, m)| ((), v, m)))
            .into_iter()
            .map(|(_, eigenvalue, multiplicity)| SpectrumEntry {
                eigenvalue,
                multiplicity,
            })
            .collect();
        let mut cumulative = Vec::with_capacity(entries.len() + 1);
        let mut total = 0u64;
        cumulative.push(0);
        for e in &entries {
            total += e.multiplicity;
            cumulative.push(total);
        }
        let mut rows = rows;
        rows.sort_by(|a, b| {
            a.eigenvalue
                .total_cmp(&b.eigenvalue)
                .then((a.family, a.angular_index).cmp(&(b.family, b.angular_index)))
        });
        Ok(Self {
            entries,
            rows,
            cumulative,
            lambda_max,
            domain,
            bc,
            params,
            certification: None,
        })
    }

    pub fn with_certification(mut self, summary: CertificationSummary) -> Self {
        self.certification = Some(summary);
        self
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    /// Per-family rows in ascending eigenvalue order.
    pub fn rows(&self) -> &[ModeRow] {
        &self.rows
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn domain(&self) -> &FlatDomain {
        &self.domain
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn params(&self) -> Option<&LameParameters> {
        self.params.as_ref()
    }

    pub fn certification(&self) -> Option<&CertificationSummary> {
        self.certification.as_ref()
    }

    /// Total number of eigenvalues with multiplicity.
    pub fn total_multiplicity(&self) -> u64 {
        *self.cumulative.last().unwrap_or(&0)
    }

    /// Number of eigenvalues strictly below `lambda`, with multiplicity.
    ///
    /// ```
    /// use elastospec::boxes::{scalar_box_spectrum, DEFAULT_MODE_BUDGET};
    /// use elastospec::lame::{BoundaryCondition, FlatDomain};
    ///
    /// let square = FlatDomain::pi_cube(2).unwrap();
    /// let s = scalar_box_spectrum(&square, BoundaryCondition::ScalarDirichlet, 5.5, DEFAULT_MODE_BUDGET).unwrap();
    /// assert_eq!(s.counting(2.0).unwrap(), 0);
    /// assert_eq!(s.counting(2.5).unwrap(), 1);
    /// assert_eq!(s.counting(5.5).unwrap(), 3);
    /// assert!(s.counting(6.0).is_err());
    /// ```
    pub fn counting(&self, lambda: f64) -> Result<u64> {
        if !(lambda <= self.lambda_max) {
            return Err(Error::Completeness {
                requested: lambda,
                lambda_max: self.lambda_max,
            });
        }
        let idx = self.entries.partition_point(|e| e.eigenvalue < lambda);
        Ok(self.cumulative[idx])
    }

    /// Counts of one family strictly below `lambda`.
    pub fn family_counting(&self, family: Family, lambda: f64) -> Result<u64> {
        if !(lambda <= self.lambda_max) {
            return Err(Error::Completeness {
                requested: lambda,
                lambda_max: self.lambda_max,
            });
        }
        Ok(self
            .rows
            .iter()
            .take_while(|r| r.eigenvalue < lambda)
            .filter(|r| r.family == family)
            .map(|r| r.multiplicity)
            .sum())
    }

    /// Configuration block written into serialized headers.
    pub fn config_json(&self) -> serde_json::Value {
        serde_json::json!({
            "domain": self.domain,
            "bc": self.bc,
            "params": self.params,
            "lambda_max": self.lambda_max,
            "certification": self.certification,
        })
    }

    /// Writes the per-family rows as CSV after two `#` comment lines carrying
    /// the format version and the configuration.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let with_index = self.domain.is_disk();
        writeln!(out, "# elastospec format_version={FORMAT_VERSION}")?;
        writeln!(out, "# config={}", self.config_json())?;
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        if with_index {
            w.write_record(["eigenvalue", "multiplicity", "family", "angular_index"])
                .map_err(csv_err)?;
        } else {
            w.write_record(["eigenvalue", "multiplicity", "family"])
                .map_err(csv_err)?;
        }
        for row in &self.rows {
            let value = format!("{:.16e}", row.eigenvalue);
            let mult = row.multiplicity.to_string();
            if with_index {
                let k = row.angular_index.map(|k| k.to_string()).unwrap_or_default();
                w.write_record([value.as_str(), &mult, row.family.label(), &k])
                    .map_err(csv_err)?;
            } else {
                w.write_record([value.as_str(), &mult, row.family.label()])
                    .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Spectrum {
        let rows = vec![
            ModeRow::new(2.0, 1, Family::Shear),
            ModeRow::new(1.0, 2, Family::Shear),
            ModeRow::new(2.0 * (1.0 + 1e-12), 1, Family::Pressure),
            ModeRow::new(5.0, 1, Family::Pressure),
            ModeRow::new(1.0, 1, Family::Shear),
        ];
        Spectrum::from_rows(rows, 6.0, FlatDomain::pi_cube(2).unwrap(), BoundaryCondition::DirichletFree, None)
            .unwrap()
    }

    #[test]
    fn merging() {
        let s = sample();
        let values: Vec<(f64, u64)> = s.entries().iter().map(|e| (e.eigenvalue, e.multiplicity)).collect();
        assert_eq!(values.len(), 3);
        assert_eq!(values[0], (1.0, 3));
        assert_eq!(values[1].1, 2);
        assert_eq!(s.rows().len(), 4);
        assert_eq!(s.total_multiplicity(), 6);
    }

    #[test]
    fn counting_is_strict() {
        let s = sample();
        assert_eq!(s.counting(1.0).unwrap(), 0);
        assert_eq!(s.counting(1.0 + 1e-12).unwrap(), 3);
        assert_eq!(s.counting(6.0).unwrap(), 6);
        assert!(matches!(s.counting(6.5), Err(Error::Completeness { .. })));
        assert!(s.counting(f64::NAN).is_err());
        assert_eq!(s.family_counting(Family::Pressure, 6.0).unwrap(), 2);
    }

    #[test]
    fn rejects_rows_above_bound() {
        let rows = vec![ModeRow::new(7.0, 1, Family::Scalar)];
        let err = Spectrum::from_rows(rows, 6.0, FlatDomain::pi_cube(2).unwrap(), BoundaryCondition::ScalarDirichlet, None);
        assert!(err.unwrap_err().is_integrity());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# elastospec format_version=1");
        assert!(lines[1].starts_with("# config={"));
        assert_eq!(lines[2], "eigenvalue,multiplicity,family");
        assert_eq!(lines[3], "1.0000000000000000e0,3,shear");
    }

    proptest! {
        #[test]
        fn counting_matches_linear_scan(values in proptest::collection::vec((0u32..200, 1u64..4), 1..60), probes in proptest::collection::vec(0.0f64..200.0, 1..50)) {
            let rows: Vec<ModeRow> = values.iter().map(|&(v, m)| ModeRow::new(f64::from(v), m, Family::Scalar)).collect();
            let s = Spectrum::from_rows(rows, 200.0, FlatDomain::pi_cube(2).unwrap(), BoundaryCondition::ScalarNeumann, None).unwrap();
            let mut last = 0;
            let mut sorted = probes.clone();
            sorted.sort_by(f64::total_cmp);
            for lambda in sorted {
                let expected: u64 = values.iter().filter(|&&(v, _)| f64::from(v) < lambda).map(|&(_, m)| m).sum();
                let got = s.counting(lambda).unwrap();
                prop_assert_eq!(got, expected);
                prop_assert!(got >= last);
                last = got;
            }
        }
    }
}
