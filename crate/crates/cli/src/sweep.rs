use caqi_core::closed_form::db;
use caqi_core::{evaluate, Scheme};
use rayon::prelude::*;

use crate::args::{Settings, SweepArgs};
use crate::output::{fmt_num, Cell, CurveSeries, Format};
use crate::report::{config_metadata, metric_cells, push_units, METRIC_COLUMNS};
use crate::CliError;

pub const MAX_POINTS: usize = 1_000_000;
pub const MAX_PARAMS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Loss,
    Gain,
    Split,
    SqueezeR,
    SqueezeDb,
    Photons,
}

impl Param {
    fn parse(name: &str) -> Result<Self, CliError> {
        Ok(match name {
            "l" | "loss" => Param::Loss,
            "g" | "gain" => Param::Gain,
            "t" | "split" => Param::Split,
            "r" | "squeeze-r" => Param::SqueezeR,
            "db" | "squeeze-db" => Param::SqueezeDb,
            "n" | "photons" => Param::Photons,
            other => return Err(CliError::Usage(format!("unknown sweep parameter '{other}'"))),
        })
    }

    pub fn column(self) -> &'static str {
        match self {
            Param::Loss => "l",
            Param::Gain => "g_set",
            Param::Split => "t_set",
            Param::SqueezeR => "r",
            Param::SqueezeDb => "squeeze_db",
            Param::Photons => "n",
        }
    }

    fn apply(self, s: &mut Settings, v: f64) {
        match self {
            Param::Loss => s.l = v,
            Param::Gain => s.gain = Some(v),
            Param::Split => s.split = Some(v),
            Param::SqueezeR => s.r = v,
            Param::SqueezeDb => s.r = db::squeezing_r(v),
            Param::Photons => s.n = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

fn number(s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("not a number: '{s}'")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("not finite: '{s}'")));
    }
    Ok(v)
}

/// Inclusive `start:stop:step` grid; `stop` is kept when it lands within rounding of the grid.
pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if step <= 0.0 {
        return Err(CliError::Usage(format!("step must be > 0, got {step}")));
    }
    if stop < start {
        return Err(CliError::Usage(format!("empty range {start}:{stop}:{step}")));
    }
    let span = (stop - start) / step;
    if span >= MAX_POINTS as f64 {
        return Err(CliError::Usage(format!(
            "range {start}:{stop}:{step} exceeds {MAX_POINTS} points"
        )));
    }
    let count = (span + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            if k + 1 == count && (start + k as f64 * step - stop).abs() < 1e-9 * step {
                stop
            } else {
                start + k as f64 * step
            }
        })
        .collect())
}

pub fn parse_axis(spec: &str) -> Result<Axis, CliError> {
    let (name, body) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected name=values, got '{spec}'")))?;
    let param = Param::parse(name.trim())?;
    let values = if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!("expected start:stop:step, got '{body}'")));
        }
        range(number(parts[0])?, number(parts[1])?, number(parts[2])?)?
    } else {
        body.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(number)
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(CliError::Usage(format!("no values for '{name}'")));
    }
    Ok(Axis { param, values })
}

fn grid(axes: &[Axis]) -> Result<Vec<Vec<f64>>, CliError> {
    let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()));
    match total {
        Some(n) if n <= MAX_POINTS => {}
        _ => return Err(CliError::Usage(format!("sweep exceeds {MAX_POINTS} points"))),
    }
    let mut points = vec![vec![]];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    Ok(points)
}

pub fn run(args: &SweepArgs) -> Result<(CurveSeries, Format, Settings), CliError> {
    let base = Settings::from_args(&args.params, Format::Csv)?;
    if args.vary.len() > MAX_PARAMS {
        return Err(CliError::Usage(format!("at most {MAX_PARAMS} swept parameters")));
    }
    let axes = args.vary.iter().map(|s| parse_axis(s)).collect::<Result<Vec<_>, _>>()?;
    for (k, a) in axes.iter().enumerate() {
        if axes[..k].iter().any(|b| b.param == a.param) {
            return Err(CliError::Usage(format!("parameter '{}' swept twice", a.param.column())));
        }
    }
    let schemes: Vec<Scheme> = if !args.schemes.is_empty() {
        args.schemes.iter().map(|&s| s.into()).collect()
    } else if base.scheme_explicit {
        vec![base.scheme]
    } else {
        vec![Scheme::Cqi, Scheme::QiG, Scheme::QiTG]
    };
    let points = grid(&axes)?;

    let mut jobs = Vec::with_capacity(points.len() * schemes.len());
    for &scheme in &schemes {
        for point in &points {
            let mut s = base.clone();
            s.scheme = scheme;
            // photon-number matching only concerns the amplified schemes
            s.constrained &= scheme != Scheme::Cqi;
            for (axis, &v) in axes.iter().zip(point) {
                axis.param.apply(&mut s, v);
            }
            jobs.push((point.clone(), s.scheme_config()?));
        }
    }

    let rows: Vec<Vec<Cell>> = jobs
        .par_iter()
        .map(|(point, config)| {
            let m = evaluate(config)?;
            let mut row: Vec<Cell> = point.iter().map(|&v| v.into()).collect();
            row.extend(metric_cells(config, &m));
            Ok(row)
        })
        .collect::<Result<_, caqi_core::Error>>()?;

    let mut md = config_metadata(&jobs[0].1);
    md.0.retain(|(k, _)| k != "scheme");
    for a in &axes {
        let first = a.values[0];
        let last = a.values[a.values.len() - 1];
        md.push(
            &format!("sweep_{}", a.param.column()),
            format!("{}..{} ({} values)", fmt_num(first), fmt_num(last), a.values.len()),
        );
    }
    push_units(&mut md);
    let mut cols: Vec<&str> = axes.iter().map(|a| a.param.column()).collect();
    cols.extend_from_slice(METRIC_COLUMNS);
    let mut series = CurveSeries::new(md, &cols);
    for row in rows {
        series.push(row);
    }
    Ok((series, base.format, base))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(range(0.0, 1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let r = range(0.0, 0.99, 0.01).unwrap();
        assert_eq!(r.len(), 100);
        assert_eq!(*r.last().unwrap(), 0.99);
        assert_eq!(range(1.0, 1.0, 0.5).unwrap(), vec![1.0]);
        assert!(range(1.0, 0.0, 0.1).is_err());
        assert!(range(0.0, 1.0, 0.0).is_err());
        assert!(range(0.0, 1e7, 1.0).is_err());
    }

    #[test]
    fn axes() {
        let a = parse_axis("l=0:0.5:0.25").unwrap();
        assert_eq!(a.param, Param::Loss);
        assert_eq!(a.values.len(), 3);
        let a = parse_axis("g=1,2,5").unwrap();
        assert_eq!(a.values, vec![1.0, 2.0, 5.0]);
        assert!(parse_axis("q=1").is_err());
        assert!(parse_axis("l=0:1").is_err());
        assert!(parse_axis("l=").is_err());
    }

    #[test]
    fn grid_order_is_row_major() {
        let a = parse_axis("l=0,1").unwrap();
        let b = parse_axis("g=1,2,3").unwrap();
        let g = grid(&[a, b]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![0.0, 2.0]);
        assert_eq!(g[3], vec![1.0, 1.0]);
    }

    #[test]
    fn grid_size_cap() {
        let a = parse_axis("l=0:1:0.0001").unwrap();
        let b = parse_axis("g=1:2:0.001").unwrap();
        assert!(grid(&[a, b]).is_err());
    }
}
