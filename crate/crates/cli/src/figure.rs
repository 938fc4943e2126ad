use std::f64::consts::LN_10;
use std::path::Path;

use caqi_core::closed_form::db;
use caqi_core::{evaluate, noise_breakdown, GainMode, ParamPoint, Scheme, SchemeConfig};
use rayon::prelude::*;

use crate::output::{fmt_num, Cell, CurveSeries, Metadata};
use crate::report::{metric_cells, push_units, METRIC_COLUMNS};
use crate::CliError;

pub const THEORY_N: f64 = 4e14;
pub const EXPERIMENT_N: f64 = 1.2e15;
pub const EXPERIMENT_R: f64 = 0.48;

pub const IDS: &[&str] = &[
    "fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig4a", "fig4b", "fig4c", "fig4d",
];

const SCHEMES: [Scheme; 3] = [Scheme::Cqi, Scheme::QiG, Scheme::QiTG];
const GAIN_LOSSES: [f64; 5] = [0.0, 0.2, 0.5, 0.7, 0.9];

fn theory_r() -> f64 {
    LN_10 / 2.0
}

/// `1 ≤ G ≤ 100` on a log grid, 50 points per decade.
fn gain_grid() -> Vec<f64> {
    (0..=100).map(|k| 10f64.powf(k as f64 / 50.0)).collect()
}

fn loss_grid(max_pct: usize) -> Vec<f64> {
    (0..=max_pct).map(|k| k as f64 / 100.0).collect()
}

/// Plot hints for the gnuplot script.
struct Layout {
    x: &'static str,
    y: &'static [&'static str],
    group: Option<&'static str>,
    logx: bool,
}

fn layout(id: &str) -> Layout {
    match id {
        "fig2a" | "fig2b" => Layout {
            x: "g",
            y: &["signal_slope", "var_noise_g", "var_noise_l", "var_noise_t"],
            group: None,
            logx: true,
        },
        "fig2c" => Layout {
            x: "g",
            y: &["rel_snr_db"],
            group: Some("l"),
            logx: true,
        },
        "fig2d" => Layout {
            x: "g",
            y: &["m_db"],
            group: Some("l"),
            logx: true,
        },
        "fig2e" => Layout {
            x: "l",
            y: &["delta_phi"],
            group: Some("scheme"),
            logx: false,
        },
        "fig2f" | "fig4d" => Layout {
            x: "l",
            y: &["m_db"],
            group: Some("scheme"),
            logx: false,
        },
        "fig4a" => Layout {
            x: "l",
            y: &["signal_slope"],
            group: Some("scheme"),
            logx: false,
        },
        "fig4b" => Layout {
            x: "l",
            y: &["noise_std"],
            group: Some("scheme"),
            logx: false,
        },
        _ => Layout {
            x: "l",
            y: &["delta_phi"],
            group: Some("scheme"),
            logx: false,
        },
    }
}

fn base_metadata(id: &str, caption: &str, n: f64, r: f64) -> Metadata {
    let mut md = Metadata::new();
    md.push("figure", id);
    md.push("description", caption);
    md.push("engine", "closed");
    md.push("photons", fmt_num(n));
    md.push("squeeze_r", fmt_num(r));
    md.push("squeeze_db", fmt_num(db::squeezing_db(r)));
    md
}

fn eval_rows(jobs: Vec<(Vec<Cell>, SchemeConfig)>) -> Result<Vec<Vec<Cell>>, CliError> {
    Ok(jobs
        .into_par_iter()
        .map(|(mut prefix, config)| {
            let m = evaluate(&config)?;
            prefix.extend(metric_cells(&config, &m));
            Ok(prefix)
        })
        .collect::<Result<_, caqi_core::Error>>()?)
}

fn finish(md: Metadata, prefix_cols: &[&str], rows: Vec<Vec<Cell>>) -> CurveSeries {
    let mut cols = prefix_cols.to_vec();
    cols.extend_from_slice(METRIC_COLUMNS);
    let mut s = CurveSeries::new(md, &cols);
    for row in rows {
        s.push(row);
    }
    s
}

/// Signal and noise components of the split-optimized scheme versus gain at one loss.
fn signal_noise_vs_gain(id: &str, l: f64) -> Result<CurveSeries, CliError> {
    let r = theory_r();
    let mut md = base_metadata(
        id,
        "signal and noise versus gain, split re-optimized at each gain",
        THEORY_N,
        r,
    );
    md.push("scheme", Scheme::QiTG.label());
    md.push("loss", fmt_num(l));
    md.push(
        "units",
        "signal_slope photons/rad; var_* photons^2; noise_g amplification-associated, noise_l loss-induced, noise_t total",
    );
    let rows: Vec<Vec<Cell>> = gain_grid()
        .into_par_iter()
        .map(|g| {
            let p = ParamPoint::new(THEORY_N, r, 0.5, 1.0, l)?;
            let config = SchemeConfig::new(Scheme::QiTG, p).with_gain_mode(GainMode::Fixed(g));
            let m = evaluate(&config)?;
            let b = noise_breakdown(&config)?;
            Ok(vec![
                g.into(),
                b.t.into(),
                m.signal_slope.into(),
                b.amplification_associated.into(),
                b.loss_induced.into(),
                b.total.into(),
                b.total.sqrt().into(),
            ])
        })
        .collect::<Result<_, caqi_core::Error>>()?;
    let mut s = CurveSeries::new(
        md,
        &[
            "g",
            "t",
            "signal_slope",
            "var_noise_g",
            "var_noise_l",
            "var_noise_t",
            "noise_std",
        ],
    );
    for row in rows {
        s.push(row);
    }
    Ok(s)
}

fn metrics_vs_gain(id: &str, caption: &str) -> Result<CurveSeries, CliError> {
    let r = theory_r();
    let mut md = base_metadata(id, caption, THEORY_N, r);
    md.push("scheme", Scheme::QiTG.label());
    md.push(
        "losses",
        GAIN_LOSSES.iter().map(|l| fmt_num(*l)).collect::<Vec<_>>().join(" "),
    );
    md.push("zero_level", "conventional interferometer at r=0, l=0");
    push_units(&mut md);
    let mut jobs = vec![];
    for &l in &GAIN_LOSSES {
        for g in gain_grid() {
            let p = ParamPoint::new(THEORY_N, r, 0.5, 1.0, l)?;
            let config = SchemeConfig::new(Scheme::QiTG, p).with_gain_mode(GainMode::Fixed(g));
            jobs.push((vec![l.into(), g.into()], config));
        }
    }
    Ok(finish(md, &["l", "g_set"], eval_rows(jobs)?))
}

/// One row per scheme and loss; `constrained` applies photon-number matching to the amplified schemes.
fn metrics_vs_loss(
    id: &str,
    caption: &str,
    n: f64,
    r: f64,
    max_pct: usize,
    constrained: bool,
) -> Result<CurveSeries, CliError> {
    let mut md = base_metadata(id, caption, n, r);
    md.push(
        "gain_mode",
        if constrained {
            "cqi free; qig and qitg constrained by photon-number matching"
        } else {
            "free (optimal gain)"
        },
    );
    md.push("sql_delta_phi", fmt_num(1.0 / n.sqrt()));
    md.push("lossless_cqi_delta_phi", fmt_num((-r).exp() / n.sqrt()));
    push_units(&mut md);
    let mut jobs = vec![];
    for scheme in SCHEMES {
        for l in loss_grid(max_pct) {
            let p = ParamPoint::new(n, r, 0.5, 1.0, l)?;
            let mut config = SchemeConfig::new(scheme, p);
            if constrained && scheme != Scheme::Cqi {
                config = config.with_gain_mode(GainMode::ConstrainedPhotonNumber);
            }
            jobs.push((vec![l.into()], config));
        }
    }
    Ok(finish(md, &["l"], eval_rows(jobs)?))
}

pub fn build(id: &str) -> Result<CurveSeries, CliError> {
    let r = theory_r();
    let fig4 = |id: &str, caption: &str| metrics_vs_loss(id, caption, EXPERIMENT_N, EXPERIMENT_R, 95, true);
    match id {
        "fig2a" => signal_noise_vs_gain(id, 0.2),
        "fig2b" => signal_noise_vs_gain(id, 0.9),
        "fig2c" => metrics_vs_gain(id, "relative SNR versus gain for several losses"),
        "fig2d" => metrics_vs_gain(id, "quantum enhancement versus gain for several losses"),
        "fig2e" => metrics_vs_loss(id, "optimal sensitivity versus loss", THEORY_N, r, 99, false),
        "fig2f" => metrics_vs_loss(id, "quantum enhancement versus loss", THEORY_N, r, 99, false),
        "fig4a" => fig4(id, "signal versus loss, experimental parameters"),
        "fig4b" => fig4(id, "noise versus loss, experimental parameters"),
        "fig4c" => fig4(id, "sensitivity versus loss, experimental parameters"),
        "fig4d" => fig4(id, "quantum enhancement versus loss, experimental parameters"),
        other => Err(CliError::Usage(format!(
            "unknown figure '{other}'; known: {} or all",
            IDS.join(", ")
        ))),
    }
}

/// gnuplot script reading `data` (CSV, header row, `#` comments).
pub fn gnuplot_script(id: &str, series: &CurveSeries, data: &Path) -> String {
    let lay = layout(id);
    let col = |name: &str| {
        series
            .columns
            .iter()
            .position(|c| c == name)
            .map(|k| k + 1)
            .expect("plot column")
    };
    let file = data
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut out = String::new();
    out.push_str("set datafile separator ','\nset datafile columnheaders\nset key outside\n");
    out.push_str(&format!("set title '{id}'\nset xlabel '{}'\n", lay.x));
    if lay.logx {
        out.push_str("set logscale x\n");
    }
    let x = col(lay.x);
    let plots: Vec<String> = match lay.group {
        None => lay
            .y
            .iter()
            .map(|y| format!("'{file}' using {x}:{} with lines title '{y}'", col(y)))
            .collect(),
        Some(group) => {
            let g = col(group);
            let mut keys: Vec<String> = vec![];
            for row in &series.rows {
                let key = match &row[g - 1] {
                    Cell::Num(v) => fmt_num(*v),
                    Cell::Text(t) => t.clone(),
                };
                if !keys.contains(&key) {
                    keys.push(key);
                }
            }
            let y = col(lay.y[0]);
            out.push_str(&format!("set ylabel '{}'\n", lay.y[0]));
            keys.iter()
                .map(|k| {
                    let test = match group {
                        "scheme" => format!("strcol({g}) eq '{k}'"),
                        _ => format!("abs(column({g}) - {k}) < 1e-9"),
                    };
                    format!("'{file}' using {x}:({test} ? column({y}) : NaN) with lines title '{group}={k}'")
                })
                .collect()
        }
    };
    out.push_str("plot ");
    out.push_str(&plots.join(", \\\n     "));
    out.push('\n');
    out
}
