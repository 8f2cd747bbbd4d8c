//! Deterministic text and CSV rendering.

use std::fmt::Write;

use crate::analytics::{BudgetRow, ThresholdClass};
use crate::montecarlo::{ExperimentResult, WorkedExampleTrace};
use crate::protocol::{CheckVerdict, SessionOutcome};

/// Six significant digits, fixed width mantissa; `inf` for infinity.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new digit (9.999995 -> 10.00000)
    let digits = s.chars().filter(char::is_ascii_digit).count();
    let leading = s.trim_start_matches(['-', '0', '.']).len();
    if leading > 6 && decimals > 0 && digits > 6 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Grid labels use the shortest round-trip form (`0.01`, not `0.0100000`).
fn label(x: f64) -> String {
    format!("{x}")
}

pub fn table1_csv(betas: &[f64], rows: &[BudgetRow]) -> String {
    let mut out = String::from("alpha");
    for b in betas {
        write!(out, ",beta_{}", label(*b)).unwrap();
    }
    out.push('\n');
    for row in rows {
        out.push_str(&label(row.alpha));
        for cell in &row.cells {
            out.push(',');
            out.push_str(&opt(*cell));
        }
        out.push('\n');
    }
    out
}

pub fn snr_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("alpha,snr\n");
    for (a, s) in points {
        writeln!(out, "{},{}", num(*a), num(*s)).unwrap();
    }
    out
}

pub fn snr_general_csv(a: [f64; 3], snr: f64) -> String {
    format!(
        "a1,a2,a3,snr\n{},{},{},{}\n",
        num(a[0]),
        num(a[1]),
        num(a[2]),
        num(snr)
    )
}

pub fn classify_text(class: &ThresholdClass) -> String {
    if !class.has_threshold_property() {
        return format!("{class} (no threshold property)\n");
    }
    format!(
        "{class}\n  fewer than {p} photons: completely secure\n  {p} to {k} photons: partially secure\n  more than {k} photons: insecure\n",
        p = class.p,
        k = class.k
    )
}

pub const EXPERIMENT_HEADER: &str =
    "cell,detection_rate,detection_ci,decode_accuracy,mean_final_snr,eve_success_rate,trials";

pub fn experiment_csv(result: &ExperimentResult) -> String {
    let mut out = format!("{EXPERIMENT_HEADER}\n");
    for c in &result.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.label,
            num(c.detection_rate),
            opt(c.detection_ci),
            num(c.decode_accuracy),
            opt(c.mean_final_snr),
            num(c.eve_success_rate),
            c.trials
        )
        .unwrap();
    }
    out
}

pub fn worked_example_csv(trace: &WorkedExampleTrace) -> String {
    let mut out = String::from(
        "pass,taken,stream_good,stream_bad,stash_good,stash_bad,stash_snr,stream_good_mean,stash_good_mean,stash_bad_mean,stash_snr_of_means\n",
    );
    for p in &trace.passes {
        let (sg, sb) = p.stream();
        let (eg, eb) = p.stash();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.pass.number(),
            p.taken,
            sg,
            sb,
            eg,
            eb,
            num(p.stash_snr()),
            num(p.stream_good_mean),
            num(p.stash_good_mean),
            num(p.stash_bad_mean),
            num(p.stash_snr_of_means())
        )
        .unwrap();
    }
    out
}

fn bit(b: Option<bool>) -> &'static str {
    match b {
        Some(false) => "0",
        Some(true) => "1",
        None => "none",
    }
}

fn verdict(v: CheckVerdict) -> &'static str {
    match v {
        CheckVerdict::Pass => "pass",
        CheckVerdict::Breach => "breach",
    }
}

pub fn session_text(o: &SessionOutcome) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "rotations: theta index {}, phi index {}",
        o.theta_index, o.phi_index
    )
    .unwrap();
    for r in &o.intensity_records {
        writeln!(
            out,
            "{}: expected {} observed {} (diverted {}, g {}) -> {}",
            r.checkpoint,
            num(r.expected),
            r.observed,
            r.diverted,
            num(r.g),
            verdict(r.verdict).to_uppercase()
        )
        .unwrap();
    }
    for i in &o.intercepts {
        writeln!(
            out,
            "eve {}: stash {} good / {} bad, estimate {}",
            i.pass,
            i.stash_good,
            i.stash_bad,
            if i.estimate.success {
                "correct"
            } else {
                "wrong"
            }
        )
        .unwrap();
    }
    match o.breach_stage {
        Some(stage) => writeln!(out, "breach detected at {stage}").unwrap(),
        None => writeln!(out, "no breach detected").unwrap(),
    }
    writeln!(
        out,
        "final pulse: {} good, {} bad",
        o.final_composition.0, o.final_composition.1
    )
    .unwrap();
    write!(
        out,
        "sent bit {}, decoded bit {}",
        bit(Some(o.sent_bit)),
        bit(o.decoded_bit)
    )
    .unwrap();
    if let Some(d) = o.diagnostic {
        write!(out, " ({d})").unwrap();
    }
    out.push('\n');
    out
}

/// `key=value` lines, one fact per line.
pub fn session_kv(o: &SessionOutcome) -> String {
    let mut out = String::new();
    writeln!(out, "sent_bit={}", bit(Some(o.sent_bit))).unwrap();
    writeln!(out, "decoded_bit={}", bit(o.decoded_bit)).unwrap();
    writeln!(out, "breach_detected={}", o.breach_detected).unwrap();
    writeln!(
        out,
        "breach_stage={}",
        o.breach_stage
            .map(|s| s.step().to_string())
            .unwrap_or_default()
    )
    .unwrap();
    writeln!(out, "final_good={}", o.final_composition.0).unwrap();
    writeln!(out, "final_bad={}", o.final_composition.1).unwrap();
    writeln!(out, "theta_index={}", o.theta_index).unwrap();
    writeln!(out, "phi_index={}", o.phi_index).unwrap();
    for r in &o.intensity_records {
        let s = r.checkpoint.step();
        writeln!(out, "stage{s}.expected={}", num(r.expected)).unwrap();
        writeln!(out, "stage{s}.observed={}", r.observed).unwrap();
        writeln!(out, "stage{s}.diverted={}", r.diverted).unwrap();
        writeln!(out, "stage{s}.g={}", num(r.g)).unwrap();
        writeln!(out, "stage{s}.verdict={}", verdict(r.verdict)).unwrap();
    }
    for i in &o.intercepts {
        let p = i.pass.number();
        writeln!(out, "pass{p}.stash_good={}", i.stash_good).unwrap();
        writeln!(out, "pass{p}.stash_bad={}", i.stash_bad).unwrap();
        writeln!(out, "pass{p}.eve_success={}", i.estimate.success).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(num(0.95099), "0.950990");
        assert_eq!(num(2.690036900369004), "2.69004");
        assert_eq!(num(1.0), "1.00000");
        assert_eq!(num(123456.7), "123457");
        assert_eq!(num(9.999996), "10.0000");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(1.5e-7), "1.50000e-7");
        assert_eq!(num(-0.25), "-0.250000");
    }
}
