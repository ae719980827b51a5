//! Deterministic report rendering: a self-describing structured-text
//! document (indented key/value lines), a flat CSV table with one row
//! per multiindex or tuple, and two-column plot data.
//!
//! All numbers go through the shortest-round-trip formatter, so two
//! runs with the same inputs emit byte-identical files.

use num_complex::Complex64;

use crate::io::fmt_float;
use crate::symbols::checks::{CancellationReport, DecayReport};
use crate::verify::moments::MomentReport;
use crate::verify::weakconv::WeakConvReport;
use crate::verify::EquivalenceReport;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Structured-text document builder.  Nesting is expressed by
/// two-space indentation; every line is `key value` or a bare section
/// key.
pub struct Doc {
    buf: String,
    indent: usize,
}

impl Doc {
    pub fn new(kind: &str) -> Self {
        let mut d = Doc {
            buf: String::new(),
            indent: 0,
        };
        d.kv("report", kind);
        d.kv("version", TOOL_VERSION);
        d
    }

    fn pad(&mut self) {
        for _ in 0..self.indent {
            self.buf.push_str("  ");
        }
    }

    pub fn kv(&mut self, key: &str, value: &str) {
        self.pad();
        self.buf.push_str(key);
        if !value.is_empty() {
            self.buf.push(' ');
            self.buf.push_str(value);
        }
        self.buf.push('\n');
    }

    pub fn open(&mut self, key: &str) {
        self.kv(key, "");
        self.indent += 1;
    }

    pub fn close(&mut self) {
        assert!(self.indent > 0, "unbalanced close");
        self.indent -= 1;
    }

    pub fn finish(mut self) -> String {
        while self.indent > 0 {
            self.close();
        }
        self.buf
    }
}

pub fn fmt_complex(v: Complex64) -> String {
    format!("{}{}{}i", fmt_float(v.re), if v.im < 0.0 { "" } else { "+" }, fmt_float(v.im))
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

/// Multiindex as dot-joined entries, e.g. `1.0.2`; CSV-safe.
pub fn fmt_alpha(alpha: &[u32]) -> String {
    alpha
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// Block-multiindex tuple as `:`-joined multiindices, e.g. `1.0:0.2`.
pub fn fmt_alpha_tuple(tuple: &[Vec<u32>]) -> String {
    tuple
        .iter()
        .map(|a| fmt_alpha(a))
        .collect::<Vec<_>>()
        .join(":")
}

pub fn fmt_floats(v: &[f64]) -> String {
    v.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(",")
}

/// Two-column plot data: one `x y` pair per line.
pub fn plot_data(pairs: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for (x, y) in pairs {
        out.push_str(&fmt_float(*x));
        out.push(' ');
        out.push_str(&fmt_float(*y));
        out.push('\n');
    }
    out
}

pub fn cancellation_section(doc: &mut Doc, rep: &CancellationReport) {
    doc.open("cancellation");
    doc.kv("max_order", &rep.max_order.to_string());
    doc.kv("block", &rep.block.to_string());
    doc.kv("seed", &rep.seed.to_string());
    doc.kv("samples", &rep.samples.len().to_string());
    doc.kv("verdict", fmt_bool(rep.verdict));
    doc.open("per_alpha_max");
    for (alpha, max) in &rep.per_alpha_max {
        doc.kv(&fmt_alpha(alpha), &fmt_float(*max));
    }
    doc.close();
    doc.close();
}

pub fn cancellation_csv(rep: &CancellationReport) -> String {
    let mut out = String::from("alpha,max_normalized\n");
    for (alpha, max) in &rep.per_alpha_max {
        out.push_str(&format!("{},{}\n", fmt_alpha(alpha), fmt_float(*max)));
    }
    out
}

pub fn decay_section(doc: &mut Doc, rep: &DecayReport) {
    doc.open("decay");
    doc.kv("shells", &fmt_floats(&rep.sample_domain));
    doc.kv("cm_consistent", fmt_bool(rep.cm_consistent));
    doc.open("per_alpha_sup_cm");
    for (tuple, sup) in &rep.per_alpha_sup_cm {
        doc.kv(&fmt_alpha_tuple(tuple), &fmt_float(*sup));
    }
    doc.close();
    doc.open("per_alpha_sup_weak");
    for (tuple, sup) in &rep.per_alpha_sup_weak {
        doc.kv(&fmt_alpha_tuple(tuple), &fmt_float(*sup));
    }
    doc.close();
    doc.close();
}

pub fn decay_csv(rep: &DecayReport) -> String {
    let mut out = String::from("alpha,sup_cm,sup_weak\n");
    for (tuple, sup) in &rep.per_alpha_sup_cm {
        let weak = rep.per_alpha_sup_weak.get(tuple).copied().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_alpha_tuple(tuple),
            fmt_float(*sup),
            fmt_float(weak)
        ));
    }
    out
}

pub fn moment_section(doc: &mut Doc, rep: &MomentReport) {
    doc.open("identity");
    doc.kv("alpha", &fmt_alpha(&rep.alpha));
    doc.kv("lhs", &fmt_complex(rep.lhs));
    doc.kv("rhs", &fmt_complex(rep.rhs));
    doc.kv("abs_err", &fmt_float(rep.abs_err));
    doc.kv("rel_err", &fmt_float(rep.rel_err));
    doc.kv("tail_estimate", &fmt_float(rep.tail_estimate));
    doc.kv("delta", &fmt_float(rep.delta));
    doc.kv("verdict", fmt_bool(rep.pass));
    doc.close();
}

pub fn moment_csv(reports: &[MomentReport]) -> String {
    let mut out =
        String::from("alpha,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,rel_err,tail_estimate,pass\n");
    for rep in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_alpha(&rep.alpha),
            fmt_float(rep.lhs.re),
            fmt_float(rep.lhs.im),
            fmt_float(rep.rhs.re),
            fmt_float(rep.rhs.im),
            fmt_float(rep.abs_err),
            fmt_float(rep.rel_err),
            fmt_float(rep.tail_estimate),
            fmt_bool(rep.pass)
        ));
    }
    out
}

pub fn equivalence_section(doc: &mut Doc, rep: &EquivalenceReport) {
    doc.open("equivalence");
    doc.kv("symbol", &rep.symbol_id);
    doc.kv("p", &fmt_floats(&rep.p));
    doc.kv("p_total", &fmt_float(rep.p_total));
    doc.kv("moment_cap", &rep.moment_cap.to_string());
    doc.kv("cancellation_verdict", fmt_bool(rep.cancellation.verdict));
    doc.kv("moments_verdict", fmt_bool(rep.all_moments_pass));
    doc.kv("agree", fmt_bool(rep.agree));
    doc.open("entries");
    for e in &rep.entries {
        doc.kv(
            &format!("tuple_{}_alpha_{}", e.tuple_index, fmt_alpha(&e.alpha)),
            &format!(
                "{} {} {}",
                fmt_float(e.lhs_abs),
                fmt_float(e.threshold),
                fmt_bool(e.pass)
            ),
        );
    }
    doc.close();
    doc.close();
}

pub fn equivalence_csv(rep: &EquivalenceReport) -> String {
    let mut out = String::from("tuple,alpha,lhs_abs,threshold,pass\n");
    for e in &rep.entries {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.tuple_index,
            fmt_alpha(&e.alpha),
            fmt_float(e.lhs_abs),
            fmt_float(e.threshold),
            fmt_bool(e.pass)
        ));
    }
    out
}

pub fn weakconv_section(doc: &mut Doc, rep: &WeakConvReport) {
    doc.open("weakconv");
    doc.kv("limit", &fmt_complex(rep.limit));
    doc.kv("predicted_gap", &fmt_float(rep.predicted_gap));
    doc.open("per_frequency");
    for ((k, pairing), gap) in rep.k_list.iter().zip(&rep.pairings).zip(&rep.gaps) {
        doc.kv(
            &fmt_float(*k),
            &format!("{} {}", fmt_complex(*pairing), fmt_float(*gap)),
        );
    }
    doc.close();
    doc.close();
}

pub fn weakconv_csv(rep: &WeakConvReport) -> String {
    let mut out = String::from("k,pairing_re,pairing_im,gap\n");
    for ((k, pairing), gap) in rep.k_list.iter().zip(&rep.pairings).zip(&rep.gaps) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(*k),
            fmt_float(pairing.re),
            fmt_float(pairing.im),
            fmt_float(*gap)
        ));
    }
    out
}

pub fn weakconv_plot(rep: &WeakConvReport) -> String {
    let pairs: Vec<(f64, f64)> = rep.k_list.iter().copied().zip(rep.gaps.iter().copied()).collect();
    plot_data(&pairs)
}
