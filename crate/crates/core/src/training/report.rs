use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
    pub test_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config_name: String,
    pub seed: u64,
    pub wall_seconds: f64,
    pub records: Vec<EpochRecord>,
    /// Whether the run tracks accuracy; decides the CSV columns even when
    /// there are no records.
    pub classification: bool,
}

impl TrainReport {
    pub fn final_record(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    /// `epoch,train_loss,test_loss[,test_accuracy]`, 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,test_loss");
        if self.classification {
            out.push_str(",test_accuracy");
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{}",
                r.epoch,
                format_sig(r.train_loss, 9),
                format_sig(r.test_loss, 9)
            ));
            if self.classification {
                out.push(',');
                out.push_str(&r.test_accuracy.map_or(String::new(), |a| format_sig(a, 9)));
            }
            out.push('\n');
        }
        out
    }
}

/// `printf("%.{digits}g")`: fixed notation for exponents in `-4..digits`,
/// scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let digits = digits.max(1);
    // Round once in scientific form; the exponent of the rounded value picks
    // the notation.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
