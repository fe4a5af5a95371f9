//! Plain-text run reports.
//!
//! A report is a sequence of `[section]` headers each followed by
//! `key = value` lines. Field order is preserved exactly, so two runs with the
//! same inputs produce byte-identical sections (timing excepted).

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::oracle::OracleResult;
use crate::scalar::Scalar;
use crate::wkcenter::SubsetSolution;

/// Formats with 9 significant digits, `%.9g` style.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_indices(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_indices(s: &str) -> Result<Vec<usize>> {
    s.split_whitespace()
        .map(|t| {
            t.parse().map_err(|_| Error::Report {
                line: 0,
                msg: format!("bad index {t:?}"),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.put(key, fmt_sig(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub sections: Vec<Section>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Section {
        if let Some(pos) = self.sections.iter().position(|s| s.name == name) {
            return &mut self.sections[pos];
        }
        self.sections.push(Section::new(name));
        self.sections.last_mut().expect("just pushed")
    }

    pub fn get_section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.get_section(section)?.get(key)
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Option<f64> {
        self.get(section, key)?.parse().ok()
    }

    pub fn add_solution<T: Scalar>(&mut self, solution: &SubsetSolution<T>) {
        let s = self.section("solution");
        s.put("algorithm", solution.algorithm)
            .put("k", solution.indices.len())
            .put("indices", fmt_indices(&solution.indices))
            .num("radius_term", solution.radius_term.as_f64())
            .num("weight_term", solution.weight_term.as_f64())
            .num("lambda", solution.lambda.as_f64())
            .num("objective", solution.objective.as_f64());
        match solution.gamma_used {
            Some(g) => s.num("gamma_used", g.as_f64()),
            None => s.put("gamma_used", "none"),
        };
        if let Some(m) = solution.machines {
            s.put("machines", m);
            let workers = self.section("workers");
            for (w, cands) in solution.worker_candidates.iter().enumerate() {
                workers.put(format!("worker_{w}"), fmt_indices(cands));
            }
        }
    }

    pub fn add_trace<T: Scalar>(&mut self, trace: &[(T, T)]) {
        let s = self.section("trace");
        s.put("entries", trace.len());
        for (i, (g, obj)) in trace.iter().enumerate() {
            s.put(format!("gamma_{i}"), fmt_sig(g.as_f64()))
                .put(format!("objective_{i}"), fmt_sig(obj.as_f64()));
        }
    }

    pub fn add_oracle<T: Scalar>(&mut self, oracle: &OracleResult<T>) {
        self.section("oracle")
            .put("best_subset", fmt_indices(&oracle.best_subset))
            .num("radius_term", oracle.radius_term.as_f64())
            .num("weight_term", oracle.weight_term.as_f64())
            .num("objective", oracle.objective.as_f64())
            .put("enumerated", oracle.enumerated);
    }

    /// Parses the text produced by `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut report = Report::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                report.sections.push(Section::new(name));
                continue;
            }
            let (key, value) = line.split_once(" = ").ok_or_else(|| Error::Report {
                line: line_no,
                msg: "expected `key = value`".into(),
            })?;
            let section = report.sections.last_mut().ok_or_else(|| Error::Report {
                line: line_no,
                msg: "entry before first section".into(),
            })?;
            section.entries.push((key.to_string(), value.to_string()));
        }
        Ok(report)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", section.name);
            for (k, v) in &section.entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        f.write_str(&out)
    }
}
