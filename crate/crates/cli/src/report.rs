use caqi_core::closed_form::db;
use caqi_core::{BreakdownReport, GainMode, Metrics, OptimalGain, OptimizationOutcome, SchemeConfig, SplitSource};
use serde_json::Value;

use crate::args::engine_label;
use crate::output::{fmt_gain, fmt_num, Cell, CurveSeries, Metadata};

pub const METRIC_COLUMNS: &[&str] = &[
    "scheme",
    "t",
    "g",
    "signal_slope",
    "noise_std",
    "delta_phi",
    "delta_phi_sqrt_n",
    "m_db",
    "rel_snr_db",
    "beyond_sql_db",
    "degradation_db",
    "per_unit_gain",
];

pub fn metric_cells(config: &SchemeConfig, m: &Metrics) -> Vec<Cell> {
    vec![
        config.scheme.label().into(),
        m.t.into(),
        fmt_gain(&m.gain).into(),
        m.signal_slope.into(),
        m.noise_std.into(),
        m.delta_phi.into(),
        (m.delta_phi * config.params.n.sqrt()).into(),
        m.m_db.into(),
        m.rel_snr_db.into(),
        m.beyond_sql_db.into(),
        m.degradation_db.into(),
        if m.per_unit_gain { "true" } else { "false" }.into(),
    ]
}

fn gain_mode_label(mode: GainMode) -> String {
    match mode {
        GainMode::Free => "free".into(),
        GainMode::ConstrainedPhotonNumber => "constrained".into(),
        GainMode::Fixed(g) => format!("fixed {}", fmt_num(g)),
    }
}

fn split_label(split: SplitSource) -> String {
    match split {
        SplitSource::Default => "default".into(),
        SplitSource::Analytic => "analytic".into(),
        SplitSource::Optimized => "optimized".into(),
        SplitSource::Fixed(t) => format!("fixed {}", fmt_num(t)),
    }
}

/// Metadata common to every scheme evaluation.
pub fn config_metadata(config: &SchemeConfig) -> Metadata {
    let p = &config.params;
    let mut md = Metadata::new();
    md.push("scheme", config.scheme.label());
    md.push("engine", engine_label(config.engine));
    md.push("photons", fmt_num(p.n));
    md.push("squeeze_r", fmt_num(p.r));
    md.push("squeeze_db", fmt_num(db::squeezing_db(p.r)));
    md.push("loss", fmt_num(p.l));
    md.push("gain_mode", gain_mode_label(config.gain_mode));
    md.push("split", split_label(config.split));
    md.push("lock_phase_rad", fmt_num(config.lock_phase));
    md.push("probe_amplitude_rad", fmt_num(config.probe_amplitude));
    md
}

pub fn push_units(md: &mut Metadata) {
    md.push(
        "units",
        "delta_phi rad; signal_slope photons/rad; noise_std photons; *_db dB",
    );
    md.push(
        "conventions",
        "m_db vs same scheme at r=0 with its split/gain rule re-applied; degradation_db vs l=0; \
         per_unit_gain marks G->inf limits normalized by G",
    );
}

fn with_metadata(mut v: Value, md: &Metadata) -> Value {
    v.as_object_mut()
        .expect("object")
        .insert("metadata".into(), md.to_json());
    v
}

pub fn metrics_json(config: &SchemeConfig, m: &Metrics) -> Value {
    let mut md = config_metadata(config);
    push_units(&mut md);
    with_metadata(serde_json::to_value(m).expect("metrics"), &md)
}

pub fn metrics_series(config: &SchemeConfig, m: &Metrics) -> CurveSeries {
    let mut md = config_metadata(config);
    push_units(&mut md);
    let mut cols: Vec<String> = METRIC_COLUMNS.iter().map(|c| c.to_string()).collect();
    let mut row = metric_cells(config, m);
    for (tag, v) in &m.breakdown {
        cols.push(format!("var_{}", tag.replace('-', "_")));
        row.push((*v).into());
    }
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut s = CurveSeries::new(md, &cols);
    s.push(row);
    s
}

pub fn breakdown_json(config: &SchemeConfig, b: &BreakdownReport) -> Value {
    let mut md = config_metadata(config);
    md.push("units", "photons^2");
    with_metadata(serde_json::to_value(b).expect("breakdown"), &md)
}

pub fn breakdown_series(config: &SchemeConfig, b: &BreakdownReport) -> CurveSeries {
    let mut md = config_metadata(config);
    md.push("units", "photons^2");
    md.push("t", fmt_num(b.t));
    md.push("g", fmt_gain(&b.gain));
    md.push("per_unit_gain", b.per_unit_gain.to_string());
    let mut s = CurveSeries::new(md, &["source", "variance", "fraction"]);
    for (tag, v) in &b.shares {
        s.push(vec![tag.clone().into(), (*v).into(), (v / b.total).into()]);
    }
    s.push(vec![
        "loss-induced".into(),
        b.loss_induced.into(),
        (b.loss_induced / b.total).into(),
    ]);
    s.push(vec![
        "amplification-associated".into(),
        b.amplification_associated.into(),
        (b.amplification_associated / b.total).into(),
    ]);
    s.push(vec!["total".into(), b.total.into(), 1.0.into()]);
    s
}

fn outcome_metadata(o: &OptimizationOutcome) -> Metadata {
    let mut md = Metadata::new();
    md.push("photons", fmt_num(o.n));
    md.push("squeeze_r", fmt_num(o.r));
    md.push("squeeze_db", fmt_num(db::squeezing_db(o.r)));
    md.push("loss", fmt_num(o.l));
    md.push("units", "delta_phi rad");
    md
}

pub fn outcome_json(o: &OptimizationOutcome) -> Value {
    with_metadata(serde_json::to_value(o).expect("outcome"), &outcome_metadata(o))
}

pub fn outcome_series(o: &OptimizationOutcome) -> CurveSeries {
    let mut s = CurveSeries::new(
        outcome_metadata(o),
        &[
            "mode",
            "t_star",
            "g_star",
            "delta_phi_star",
            "analytic_t",
            "analytic_delta_phi",
            "t_deviation",
            "delta_phi_gap",
            "evaluations",
        ],
    );
    let mode = serde_json::to_value(o.mode).expect("mode");
    let g = match o.g_star {
        OptimalGain::Finite { value } => fmt_num(value),
        OptimalGain::Asymptotic { .. } => "inf".into(),
    };
    s.push(vec![
        mode.as_str().unwrap_or_default().into(),
        o.t_star.into(),
        g.into(),
        o.delta_phi_star.into(),
        o.analytic_t.into(),
        o.analytic_delta_phi.into(),
        o.t_deviation.into(),
        o.delta_phi_gap.into(),
        (o.evaluations as f64).into(),
    ]);
    s
}
