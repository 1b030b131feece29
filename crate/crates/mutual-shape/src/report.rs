//! CSV tables. Floats are written with 6 significant digits in the style of
//! C's `%g`.
//!
//! Columns:
//! - `pq.csv`: `index,name,p,q`
//! - `trace.csv`: `iteration,jh,mi,sd,reg,total,area,changed,p_1..p_n,q_1..q_n`
//! - `ranking.csv`: `rank,name,p,q,score[,dice]`, sorted by `score = p + q`
//!   descending

use std::fmt::Write;

use mutual_shape_core::criterion::QualityParams;
use mutual_shape_core::evolution::EvolutionTrace;

/// `%g` with 6 significant digits.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn pq_csv(names: &[String], qp: &QualityParams) -> String {
    let mut out = String::from("index,name,p,q\n");
    for (i, name) in names.iter().enumerate() {
        writeln!(out, "{},{},{},{}", i + 1, name, fmt_g6(qp.p[i]), fmt_g6(qp.q[i])).unwrap();
    }
    out
}

pub fn trace_csv(trace: &EvolutionTrace, n: usize) -> String {
    let mut out = String::from("iteration,jh,mi,sd,reg,total,area,changed");
    for i in 1..=n {
        write!(out, ",p_{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",q_{i}").unwrap();
    }
    out.push('\n');
    for r in &trace.records {
        let e = &r.energy;
        write!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.iteration,
            fmt_g6(e.jh),
            fmt_g6(e.mi_surrogate),
            fmt_g6(e.sd),
            fmt_g6(e.reg),
            fmt_g6(e.total),
            r.area,
            r.changed
        )
        .unwrap();
        for v in r.p.iter().chain(&r.q) {
            write!(out, ",{}", fmt_g6(*v)).unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub name: String,
    pub p: f64,
    pub q: f64,
    pub dice: Option<f64>,
}

impl RankEntry {
    pub fn score(&self) -> f64 {
        self.p + self.q
    }
}

/// Sorts by `p + q` descending; ties are broken by name so the order does not
/// depend on input order.
pub fn rank(names: &[String], qp: &QualityParams, dice: Option<&[f64]>) -> Vec<RankEntry> {
    let mut v: Vec<RankEntry> = names
        .iter()
        .enumerate()
        .map(|(i, name)| RankEntry {
            name: name.clone(),
            p: qp.p[i],
            q: qp.q[i],
            dice: dice.map(|d| d[i]),
        })
        .collect();
    v.sort_by(|a, b| b.score().total_cmp(&a.score()).then_with(|| a.name.cmp(&b.name)));
    v
}

pub fn ranking_csv(entries: &[RankEntry]) -> String {
    let with_dice = entries.iter().any(|e| e.dice.is_some());
    let mut out = String::from(if with_dice { "rank,name,p,q,score,dice\n" } else { "rank,name,p,q,score\n" });
    for (k, e) in entries.iter().enumerate() {
        write!(out, "{},{},{},{},{}", k + 1, e.name, fmt_g6(e.p), fmt_g6(e.q), fmt_g6(e.score())).unwrap();
        if with_dice {
            write!(out, ",{}", e.dice.map_or_else(String::new, fmt_g6)).unwrap();
        }
        out.push('\n');
    }
    out
}
