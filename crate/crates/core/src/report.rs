//! Report assembly and rendering: one machine-readable JSON document per
//! analysis, CSV series for external plotting, and a human summary table.
//! Identical inputs produce byte-identical JSON (fixed grids, fixed field
//! order, no randomness anywhere in the pipeline).

use serde::{Deserialize, Serialize};

use crate::classical::{self, RivalMethod, RivalReport, RivalVerdict};
use crate::criteria::{
    self, Assessment, AsymptoticConditions, ConditionCurve, CriterionParams, RiccatiDiagnostics,
    SecondOrderAssessment, Verdict,
};
use crate::error::Result;
use crate::expr::TimeFunction;
use crate::system::{BlockSystem, ConditionCheck, EnvelopeProvenance, Envelopes};
use crate::verifier::{self, BasisSweep};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSummary {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub t0: f64,
    pub horizon: f64,
}

/// The full analysis document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub system: SystemSummary,
    pub verdict: Verdict,
    pub condition_a: ConditionCheck,
    pub condition_b: ConditionCheck,
    pub envelope_provenance: EnvelopeProvenance,
    pub cond1: ConditionCurve,
    pub cond2: ConditionCurve,
    pub cond2prime: AsymptoticConditions,
    pub riccati: Option<RiccatiDiagnostics>,
    pub rivals: Vec<RivalReport>,
    pub empirical: Option<BasisSweep>,
    pub notes: Vec<String>,
}

/// Options for one full analysis run.
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub name: String,
    pub horizon: f64,
    pub tol: f64,
    pub rivals: Vec<RivalMethod>,
    pub verify: bool,
    pub envelopes: Option<Envelopes>,
    pub extra_notes: Vec<String>,
}

impl AnalysisOptions {
    pub fn new(name: impl Into<String>, horizon: f64) -> Self {
        AnalysisOptions {
            name: name.into(),
            horizon,
            tol: 1e-9,
            rivals: RivalMethod::all().to_vec(),
            verify: true,
            envelopes: None,
            extra_notes: Vec::new(),
        }
    }
}

/// Runs the whole pipeline: validation, the criterion, the classical tests,
/// and (optionally) the empirical basis sweep.
pub fn analyze(sys: &BlockSystem, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    sys.validate(opts.horizon)?;
    let mut params = CriterionParams::new(opts.horizon);
    params.tol = opts.tol;
    let assessment: Assessment = criteria::assess(sys, opts.envelopes.clone(), &params)?;
    let rivals = classical::run_rivals(sys, &opts.rivals, opts.horizon, opts.tol.max(1e-9))?;
    let empirical = if opts.verify {
        Some(verifier::basis_sweep(sys, opts.horizon, opts.tol.max(1e-9))?)
    } else {
        None
    };
    let (m, n) = sys.dims();
    let mut notes = opts.extra_notes.clone();
    notes.extend(assessment.notes);
    Ok(AnalysisReport {
        system: SystemSummary {
            name: opts.name.clone(),
            m,
            n,
            t0: sys.t0,
            horizon: opts.horizon,
        },
        verdict: assessment.verdict,
        condition_a: assessment.condition_a,
        condition_b: assessment.condition_b,
        envelope_provenance: assessment.envelope_provenance,
        cond1: assessment.cond1,
        cond2: assessment.cond2,
        cond2prime: assessment.cond2prime,
        riccati: assessment.riccati,
        rivals,
        empirical,
        notes,
    })
}

/// Second-order equation report document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecondOrderReport {
    pub name: String,
    pub t0: f64,
    pub horizon: f64,
    pub verdict: Verdict,
    pub i1: ConditionCurve,
    pub i2: ConditionCurve,
    pub asymptotic_excluded: Option<bool>,
    pub notes: Vec<String>,
}

pub fn analyze_second_order(
    name: &str,
    p: &TimeFunction,
    q: &TimeFunction,
    r: &TimeFunction,
    t0: f64,
    horizon: f64,
    tol: f64,
) -> Result<SecondOrderReport> {
    let a: SecondOrderAssessment = criteria::assess_second_order(p, q, r, t0, horizon, tol)?;
    Ok(SecondOrderReport {
        name: name.to_string(),
        t0,
        horizon,
        verdict: a.verdict,
        i1: a.i1,
        i2: a.i2,
        asymptotic_excluded: a.asymptotic_excluded,
        notes: a.notes,
    })
}

/// Either kind of report, for format-agnostic emission.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Report {
    Analysis(AnalysisReport),
    SecondOrder(SecondOrderReport),
}

impl Report {
    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text)
            .map_err(|e| crate::error::Error::Config(format!("cannot parse report JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// One (filename, csv-content) pair per series carried by the report.
    pub fn csv_series(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |name: &str, series: &[(f64, f64)]| {
            let mut body = String::from("t,value\n");
            for (t, v) in series {
                body.push_str(&format!("{t},{v}\n"));
            }
            out.push((format!("{name}.csv"), body));
        };
        match self {
            Report::Analysis(r) => {
                push("cond1", &r.cond1.series);
                push("cond2", &r.cond2.series);
                push("e_integral", &r.cond2prime.e_integral.series);
                if let Some(d) = &r.riccati {
                    push("riccati_y0", &d.y0_series);
                    push("phi", &d.phi_series);
                    push("psi", &d.psi_series);
                }
                for rival in &r.rivals {
                    push(&format!("rival_{}", rival.method.label()), &rival.curve.series);
                }
                if let Some(e) = &r.empirical {
                    push("empirical_worst_norm", &e.worst_norm_series);
                }
            }
            Report::SecondOrder(r) => {
                push("i1", &r.i1.series);
                push("i2", &r.i2.series);
            }
        }
        out
    }

    /// Human-readable summary; every claim here is backed by a series in
    /// the JSON document.
    pub fn table(&self) -> String {
        match self {
            Report::Analysis(r) => analysis_table(r),
            Report::SecondOrder(r) => second_order_table(r),
        }
    }
}

fn trend_word(c: &ConditionCurve) -> String {
    format!("{:?}", c.trend)
}

fn check_word(c: &ConditionCheck) -> String {
    if c.passed {
        let witness = c
            .witness
            .as_ref()
            .map(|w| format!(" [{w}]"))
            .unwrap_or_default();
        format!("pass (max residual {:.2e}){witness}", c.max_residual)
    } else {
        format!(
            "FAIL (max residual {:.2e}, {} witness pair(s) reported)",
            c.max_residual,
            c.failures.len()
        )
    }
}

fn analysis_table(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let line = "-".repeat(72);
    s.push_str(&format!(
        "system: {} ({}+{} blocks, t0 = {}, horizon = {})\n{line}\n",
        r.system.name, r.system.m, r.system.n, r.system.t0, r.system.horizon
    ));
    s.push_str(&format!("verdict: {:?}\n", r.verdict));
    s.push_str(&format!(
        "commutation check:        {}\n",
        check_word(&r.condition_a)
    ));
    s.push_str(&format!(
        "diagonalizability check:  {}\n",
        check_word(&r.condition_b)
    ));
    s.push_str(&format!(
        "envelopes:                {:?}\n",
        r.envelope_provenance
    ));
    s.push_str(&format!(
        "condition 1 (coupling):   sup {:.6}, trend {}\n",
        r.cond1.sup,
        trend_word(&r.cond1)
    ));
    s.push_str(&format!(
        "condition 2 (growth):     final {:.6}, trend {}\n",
        r.cond2.final_value,
        trend_word(&r.cond2)
    ));
    s.push_str(&format!(
        "condition 2' (asymptotic): {} (gap integral {}, growth {})\n",
        if r.cond2prime.satisfied {
            "satisfied"
        } else {
            "not satisfied"
        },
        trend_word(&r.cond2prime.e_integral),
        trend_word(&r.cond2prime.j_integral),
    ));
    if let Some(d) = &r.riccati {
        s.push_str(&format!(
            "riccati diagnostics:      min y0 {:.3e}, representation residual {:.3e}, bound margin {:.3e}\n",
            d.min_y0, d.representation_residual, d.bound_margin
        ));
    }
    if !r.rivals.is_empty() {
        s.push_str(&line);
        s.push_str("\nclassical tests:\n");
        for rival in &r.rivals {
            let verdict = match rival.verdict {
                RivalVerdict::Stable => "Stable",
                RivalVerdict::Inconclusive => "Inconclusive",
            };
            let note = match (&rival.method, &rival.note) {
                (RivalMethod::Freezing, Some(n)) => {
                    // Keep the short phrase first for scanning.
                    let phrase = if rival.applicable {
                        "precondition passed"
                    } else {
                        "precondition failed"
                    };
                    format!("{phrase}; {n}")
                }
                (_, Some(n)) => n.clone(),
                (_, None) => String::new(),
            };
            s.push_str(&format!(
                "  {:<18} {:<13} {}\n",
                format!("{}:", rival.method.label()),
                verdict,
                note
            ));
        }
    }
    if let Some(e) = &r.empirical {
        s.push_str(&format!(
            "empirical sweep:          {:?} over {} basis trajectories\n",
            e.overall,
            e.runs.len()
        ));
    }
    if !r.notes.is_empty() {
        s.push_str(&line);
        s.push_str("\nnotes:\n");
        for n in &r.notes {
            s.push_str(&format!("  - {n}\n"));
        }
    }
    s
}

fn second_order_table(r: &SecondOrderReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "equation: {} (t0 = {}, horizon = {})\n",
        r.name, r.t0, r.horizon
    ));
    s.push_str(&format!("verdict: {:?}\n", r.verdict));
    s.push_str(&format!(
        "I1: sup {:.6}, trend {}\n",
        r.i1.sup,
        trend_word(&r.i1)
    ));
    s.push_str(&format!(
        "I2: sup {:.6}, trend {}\n",
        r.i2.sup,
        trend_word(&r.i2)
    ));
    match r.asymptotic_excluded {
        Some(true) => s.push_str("asymptotic stability: excluded (positive nondecreasing solution exists)\n"),
        Some(false) => s.push_str("asymptotic stability: not excluded\n"),
        None => s.push_str("asymptotic stability: sign conditions not met, exclusion check skipped\n"),
    }
    for n in &r.notes {
        s.push_str(&format!("  - {n}\n"));
    }
    s
}
