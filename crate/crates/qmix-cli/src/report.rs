//! Run reports: every number carries a provenance label, checks compare a
//! computed quantity against a reference at a pinned tolerance, and the
//! report serializes deterministically (12 significant digits).

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    Simulated,
    PaperReference,
}

#[derive(Debug, Clone, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Name of the computed quantity.
    pub value: String,
    /// Name of the reference quantity.
    pub reference: String,
    pub tolerance: f64,
    pub difference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub case: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub quantities: Vec<Quantity>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(case: &str) -> Self {
        Self {
            case: case.to_string(),
            inputs: BTreeMap::new(),
            quantities: Vec::new(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.inputs.insert(key.to_string(), value.into());
    }

    pub fn quantity(&mut self, name: &str, value: f64, provenance: Provenance) {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value: round_sig12(value),
            provenance,
            std_error: None,
        });
    }

    pub fn quantity_with_error(&mut self, name: &str, value: f64, std_error: f64) {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value: round_sig12(value),
            provenance: Provenance::Simulated,
            std_error: Some(round_sig12(std_error)),
        });
    }

    /// Record a computed/reference pair plus the comparison between them.
    pub fn check(
        &mut self,
        name: &str,
        value_name: &str,
        value: f64,
        reference_name: &str,
        reference: f64,
        reference_provenance: Provenance,
        tolerance: f64,
    ) {
        self.quantity(reference_name, reference, reference_provenance);
        let difference = (value - reference).abs();
        let pass = difference <= tolerance;
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            value: value_name.to_string(),
            reference: reference_name.to_string(),
            tolerance,
            difference: round_sig12(difference),
            pass,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization") + "\n"
    }

    /// Flat comma-separated rendering: one row per quantity and per check.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("case,row,name,value,provenance,std_error\n");
        for q in &self.quantities {
            out.push_str(&format!(
                "{},quantity,{},{:.12e},{},{}\n",
                self.case,
                q.name,
                q.value,
                match q.provenance {
                    Provenance::Analytic => "analytic",
                    Provenance::Simulated => "simulated",
                    Provenance::PaperReference => "paper-reference",
                },
                q.std_error.map_or(String::new(), |e| format!("{e:.12e}")),
            ));
        }
        out.push_str("case,row,name,difference,tolerance,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},check,{},{:.12e},{:.12e},{}\n",
                self.case, c.name, c.difference, c.tolerance, c.pass
            ));
        }
        out.push_str(&format!("{},summary,pass,,,{}\n", self.case, self.pass));
        out
    }
}

/// Round to 12 significant digits so reports are stable across formatting.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(11 - magnitude);
    (x * factor).round() / factor
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig12(123456.789012349), 123456.789012);
        assert_eq!(round_sig12(0.0), 0.0);
        assert_eq!(round_sig12(-2.5e-7), -2.5e-7);
    }

    #[test]
    fn failing_check_flips_the_report() {
        let mut r = RunReport::new("demo");
        r.quantity("x", 1.0, Provenance::Analytic);
        r.check(
            "x_matches",
            "x",
            1.0,
            "x_ref",
            1.5,
            Provenance::PaperReference,
            0.1,
        );
        assert!(!r.pass);
        let json = r.to_json();
        assert!(json.contains("paper-reference"));
    }
}
