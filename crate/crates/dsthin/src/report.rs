//! JSON documents written by `synthesize`.

use serde::{Deserialize, Serialize};

use dsthin_core::dsbounds::BoundsReport;
use dsthin_core::error::TraceEntry;
use dsthin_core::synthesis::SynthesisResult;
use dsthin_core::ThetaBarSource;

pub const SCHEMA_VERSION: &str = "1.0.0";

// JSON has no infinities.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorsJson {
    pub p: usize,
    pub q: usize,
    pub h: usize,
    pub gamma: usize,
    pub thinning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellJson {
    pub d1: [f64; 2],
    pub d2: [f64; 2],
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsJson {
    pub sll_inf_db: Option<f64>,
    pub sll_sup_db: Option<f64>,
    pub d_inf_db: Option<f64>,
    pub bw_sup_deg: Option<f64>,
    pub epsilon: f64,
    pub peak_level: f64,
    pub offpeak_level: f64,
    pub mc_rhs: f64,
    pub theta_bar_deg: f64,
    pub theta_bar_source: String,
}

impl From<&BoundsReport> for BoundsJson {
    fn from(b: &BoundsReport) -> Self {
        Self {
            sll_inf_db: finite(b.sll_inf_db),
            sll_sup_db: finite(b.sll_sup_db),
            d_inf_db: finite(b.d_inf_db),
            bw_sup_deg: finite(b.bw_sup_deg),
            epsilon: b.epsilon,
            peak_level: b.peak_level,
            offpeak_level: b.offpeak_level,
            mc_rhs: b.mc_rhs,
            theta_bar_deg: b.theta_bar.value().to_degrees(),
            theta_bar_source: match b.theta_bar.source() {
                ThetaBarSource::DefaultRule => "default-rule",
                ThetaBarSource::User => "user",
                ThetaBarSource::Calibrated => "calibrated",
            }
            .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternAtJson {
    pub u: f64,
    pub v: f64,
    pub level_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredJson {
    pub sll_db: Option<f64>,
    pub directivity_db: Option<f64>,
    pub bw_max_deg: Option<f64>,
    pub pattern_at: Vec<PatternAtJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub name: String,
    pub target: f64,
    pub measured: Option<f64>,
    pub met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceJson {
    pub step: u8,
    pub message: String,
}

impl From<&TraceEntry> for TraceJson {
    fn from(t: &TraceEntry) -> Self {
        Self { step: t.step, message: t.message.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub schema_version: String,
    pub status: String,
    pub descriptors: DescriptorsJson,
    pub cell: CellJson,
    pub steer: [f64; 2],
    pub element: String,
    pub m: i64,
    pub n: i64,
    pub sigma_opt: usize,
    pub sigma_x: usize,
    pub sigma_y: usize,
    pub bounds: BoundsJson,
    pub measured: MeasuredJson,
    pub constraints: Vec<ConstraintJson>,
    pub trace: Vec<TraceJson>,
}

impl ResultJson {
    pub fn new(r: &SynthesisResult, steer: [f64; 2], element: &str) -> Self {
        let d = r.ds.descriptors();
        let m = &r.measured;
        Self {
            schema_version: SCHEMA_VERSION.into(),
            status: if r.success() { "success" } else { "failed" }.into(),
            descriptors: DescriptorsJson { p: d.p, q: d.q, h: d.h, gamma: d.gamma, thinning: d.thinning() },
            cell: CellJson { d1: r.cell.d1().into(), d2: r.cell.d2().into(), nu: r.cell.nu() },
            steer,
            element: element.into(),
            m: r.m,
            n: r.n,
            sigma_opt: r.sigma_opt,
            sigma_x: r.sigma_xy.0,
            sigma_y: r.sigma_xy.1,
            bounds: (&r.bounds).into(),
            measured: MeasuredJson {
                sll_db: finite(m.sll_db),
                directivity_db: finite(m.directivity_db),
                bw_max_deg: finite(m.bw_max_deg),
                pattern_at: m
                    .pattern_at
                    .iter()
                    .map(|(d, db)| PatternAtJson { u: d.u, v: d.v, level_db: finite(*db) })
                    .collect(),
            },
            constraints: r
                .checks
                .iter()
                .map(|c| ConstraintJson {
                    name: c.name.into(),
                    target: c.target,
                    measured: finite(c.measured),
                    met: c.met,
                })
                .collect(),
            trace: r.trace.iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticJson {
    pub schema_version: String,
    pub status: String,
    /// Step at which the last candidate was rejected.
    pub failed_step: u8,
    pub trace: Vec<TraceJson>,
}

impl DiagnosticJson {
    pub fn new(trace: &[TraceEntry]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            status: "infeasible".into(),
            failed_step: trace.last().map_or(1, |t| t.step),
            trace: trace.iter().map(Into::into).collect(),
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes") + "\n"
}
