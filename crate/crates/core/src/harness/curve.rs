//! BER curves with per-run bookkeeping and CSV output.

use std::fmt::Write as _;

/// Quantity on the horizontal axis of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    SnrDb,
    Users,
    /// Symbol index within the packet.
    Symbols,
    Doppler,
    FeedbackError,
}

impl SweepVariable {
    pub fn label(&self) -> &'static str {
        match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::Users => "users",
            SweepVariable::Symbols => "symbol",
            SweepVariable::Doppler => "fdt",
            SweepVariable::FeedbackError => "pe",
        }
    }
}

/// Error counts of one scheme at one sweep point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SchemeStats {
    pub errors: u64,
    pub bits: u64,
    /// `(errors, bits)` of every run, in run order.
    pub runs: Vec<(u64, u64)>,
}

impl SchemeStats {
    pub fn push(&mut self, errors: u64, bits: u64) {
        self.errors += errors;
        self.bits += bits;
        self.runs.push((errors, bits));
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    fn run_bers(&self) -> Vec<f64> {
        self.runs
            .iter()
            .map(|&(e, b)| if b == 0 { 0.0 } else { e as f64 / b as f64 })
            .collect()
    }

    /// Standard error of the mean per-run BER.
    pub fn std_error(&self) -> f64 {
        mean_and_se(&self.run_bers()).1
    }
}

/// Mean of `x` and its standard error.
pub fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Mean per-run BER difference `a - b` and its standard error (runs paired).
pub fn paired_difference(a: &SchemeStats, b: &SchemeStats) -> (f64, f64) {
    let d: Vec<f64> = a.run_bers().iter().zip(b.run_bers()).map(|(x, y)| x - y).collect();
    mean_and_se(&d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub x: f64,
    /// One entry per curve label, in label order.
    pub stats: Vec<SchemeStats>,
}

/// BER of several schemes against one sweep variable.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub variable: SweepVariable,
    pub labels: Vec<String>,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn new(variable: SweepVariable, labels: Vec<String>) -> Self {
        Self {
            variable,
            labels,
            points: Vec::new(),
        }
    }

    pub fn column(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Statistics of `label` at point `index`.
    pub fn stats(&self, index: usize, label: &str) -> Option<&SchemeStats> {
        let c = self.column(label)?;
        self.points.get(index).map(|p| &p.stats[c])
    }

    pub fn ber(&self, index: usize, label: &str) -> Option<f64> {
        self.stats(index, label).map(SchemeStats::ber)
    }

    /// CSV with the sweep value first and one `<label>_ber` column per scheme.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(self.variable.label());
        for l in &self.labels {
            let _ = write!(out, ",{l}_ber");
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&format_sig(p.x));
            for s in &p.stats {
                out.push(',');
                out.push_str(&format_sig(s.ber()));
            }
            out.push('\n');
        }
        out
    }
}

/// `x` with six significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(12.0), "12");
        assert_eq!(format_sig(0.0123456789), "0.0123457");
        assert_eq!(format_sig(1e-7), "1.00000e-7");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(123456.7), "123457");
        assert_eq!(format_sig(1234567.0), "1.23457e6");
    }

    #[test]
    fn paired_se_of_identical_runs_is_zero() {
        let mut a = SchemeStats::default();
        a.push(3, 100);
        a.push(5, 100);
        let mut b = SchemeStats::default();
        b.push(1, 100);
        b.push(3, 100);
        let (d, se) = paired_difference(&a, &b);
        assert!((d - 0.02).abs() < 1e-15);
        assert!(se < 1e-15);
        assert!((a.ber() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let mut c = BerCurve::new(SweepVariable::SnrDb, vec!["cis".into(), "ncis".into()]);
        let mut s = SchemeStats::default();
        s.push(1, 4);
        c.points.push(BerPoint {
            x: 12.0,
            stats: vec![s.clone(), s],
        });
        assert_eq!(c.to_csv(), "snr_db,cis_ber,ncis_ber\n12,0.25,0.25\n");
        assert_eq!(c.ber(0, "ncis"), Some(0.25));
    }
}
