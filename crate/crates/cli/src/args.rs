use std::path::{Path, PathBuf};

use caqi_core::closed_form::db;
use caqi_core::{Engine, GainMode, ParamPoint, Scheme, SchemeConfig, SplitSource};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::output::Format;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "caqi",
    version,
    about = "Phase sensitivity of coherent-amplifier quantum interferometers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one operating point.
    Point(PointArgs),
    /// Evaluate a grid over one or two parameters.
    Sweep(SweepArgs),
    /// Find the best splitting ratio and gain.
    Optimize(PointArgs),
    /// Write the data behind a named figure.
    Figure(FigureArgs),
    /// Per-source noise variance at one operating point.
    Decompose(PointArgs),
    /// Run internal consistency checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Cqi,
    Qig,
    Qitg,
    Custom,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Cqi => Scheme::Cqi,
            SchemeArg::Qig => Scheme::QiG,
            SchemeArg::Qitg => Scheme::QiTG,
            SchemeArg::Custom => Scheme::Custom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Closed,
    Linear,
    Exact,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Closed => Engine::ClosedForm,
            EngineArg::Linear => Engine::GaussianLinearized,
            EngineArg::Exact => Engine::GaussianExact,
        }
    }
}

pub fn engine_label(e: Engine) -> &'static str {
    match e {
        Engine::ClosedForm => "closed",
        Engine::GaussianLinearized => "linear",
        Engine::GaussianExact => "exact",
    }
}

/// Operating-point flags shared by every evaluating subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// TOML file whose keys mirror these flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Mean photon number of the coherent input [default: 1].
    #[arg(long)]
    pub photons: Option<f64>,
    /// Squeezing in dB below vacuum.
    #[arg(long, conflicts_with = "squeeze_r")]
    pub squeeze_db: Option<f64>,
    /// Squeezing parameter r.
    #[arg(long)]
    pub squeeze_r: Option<f64>,
    /// Signal-arm loss in [0, 1].
    #[arg(long)]
    pub loss: Option<f64>,
    /// Fixed amplitude gain (>= 1).
    #[arg(long)]
    pub gain: Option<f64>,
    /// Fixed splitting ratio in [0, 1].
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    /// Tie the gain to the splitting ratio by photon-number matching.
    #[arg(long)]
    pub constrained: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// `name=start:stop:step` or `name=v1,v2,...` with name in {l, g, t, r, n, db}. At most two.
    #[arg(long = "vary", required = true)]
    pub vary: Vec<String>,
    /// Comma-separated schemes to sweep; defaults to --scheme, else cqi,qig,qitg.
    #[arg(long, value_delimiter = ',', value_enum)]
    pub schemes: Vec<SchemeArg>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Figure id (fig2a..fig2f, fig4a..fig4d) or `all`.
    pub id: String,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file, or directory for `all`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script next to each data file.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value = "fast")]
    pub suite: Suite,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    scheme: Option<SchemeArg>,
    photons: Option<f64>,
    squeeze_db: Option<f64>,
    squeeze_r: Option<f64>,
    loss: Option<f64>,
    gain: Option<f64>,
    split: Option<f64>,
    engine: Option<EngineArg>,
    constrained: Option<bool>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Fully merged operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub scheme: Scheme,
    /// Whether the scheme came from a flag or the config file rather than the default.
    pub scheme_explicit: bool,
    pub n: f64,
    pub r: f64,
    pub l: f64,
    pub gain: Option<f64>,
    pub split: Option<f64>,
    pub engine: Engine,
    pub constrained: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn from_args(args: &ParamArgs, default_format: Format) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => FileConfig::default(),
        };
        // a flag for either squeezing form overrides both file keys
        let (db_val, r_val) = if args.squeeze_db.is_some() || args.squeeze_r.is_some() {
            (args.squeeze_db, args.squeeze_r)
        } else {
            (file.squeeze_db, file.squeeze_r)
        };
        let r = match (db_val, r_val) {
            (Some(_), Some(_)) => return Err(CliError::Usage("give squeeze-db or squeeze-r, not both".into())),
            (Some(d), None) => db::squeezing_r(d),
            (None, Some(r)) => r,
            (None, None) => 0.0,
        };
        let s = Self {
            scheme: args.scheme.or(file.scheme).unwrap_or(SchemeArg::Cqi).into(),
            scheme_explicit: args.scheme.or(file.scheme).is_some(),
            n: args.photons.or(file.photons).unwrap_or(1.0),
            r,
            l: args.loss.or(file.loss).unwrap_or(0.0),
            gain: args.gain.or(file.gain),
            split: args.split.or(file.split),
            engine: args.engine.or(file.engine).unwrap_or(EngineArg::Closed).into(),
            constrained: args.constrained || file.constrained.unwrap_or(false),
            format: args.format.or(file.format).unwrap_or(default_format),
            out: args.out.clone().or(file.out),
        };
        if s.constrained && s.gain.is_some() {
            return Err(CliError::Usage(
                "--constrained and --gain are mutually exclusive".into(),
            ));
        }
        Ok(s)
    }

    pub fn params(&self) -> Result<ParamPoint, CliError> {
        let p = ParamPoint::new(
            self.n,
            self.r,
            self.split.unwrap_or(0.5),
            self.gain.unwrap_or(1.0),
            self.l,
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }

    pub fn gain_mode(&self) -> GainMode {
        match (self.constrained, self.gain) {
            (true, _) => GainMode::ConstrainedPhotonNumber,
            // custom reads its gain from the parameter point
            (false, Some(_)) if self.scheme == Scheme::Custom => GainMode::Free,
            (false, Some(g)) => GainMode::Fixed(g),
            (false, None) => GainMode::Free,
        }
    }

    pub fn split_source(&self) -> SplitSource {
        match self.split {
            Some(t) if self.scheme != Scheme::Custom => SplitSource::Fixed(t),
            _ => SplitSource::Default,
        }
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig, CliError> {
        let config = SchemeConfig::new(self.scheme, self.params()?)
            .with_engine(self.engine)
            .with_gain_mode(self.gain_mode())
            .with_split(self.split_source());
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> ParamArgs {
        let mut full = vec!["caqi", "point"];
        full.extend_from_slice(args);
        match Cli::parse_from(full).command {
            Command::Point(p) => p.params,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults() {
        let s = Settings::from_args(&parse(&[]), Format::Json).unwrap();
        assert_eq!(s.scheme, Scheme::Cqi);
        assert_eq!(s.n, 1.0);
        assert_eq!(s.r, 0.0);
        assert_eq!(s.engine, Engine::ClosedForm);
        assert_eq!(s.format, Format::Json);
    }

    #[test]
    fn squeeze_db_converts() {
        let s = Settings::from_args(&parse(&["--squeeze-db", "10"]), Format::Json).unwrap();
        assert!((s.r - 10f64.ln() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn config_file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "scheme = \"qitg\"\nloss = 0.3\nsqueeze-db = 10\nengine = \"linear\"\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let s = Settings::from_args(&parse(&["--config", p, "--loss", "0.6"]), Format::Json).unwrap();
        assert_eq!(s.scheme, Scheme::QiTG);
        assert_eq!(s.l, 0.6);
        assert_eq!(s.engine, Engine::GaussianLinearized);
        let s = Settings::from_args(&parse(&["--config", p, "--squeeze-r", "0.5"]), Format::Json).unwrap();
        assert_eq!(s.r, 0.5);
    }

    #[test]
    fn unknown_config_key_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "los = 0.3\n").unwrap();
        let err = Settings::from_args(&parse(&["--config", path.to_str().unwrap()]), Format::Json).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }

    #[test]
    fn gain_and_split_mapping() {
        let s = Settings::from_args(
            &parse(&["--scheme", "qitg", "--gain", "5", "--split", "0.3"]),
            Format::Json,
        )
        .unwrap();
        assert_eq!(s.gain_mode(), GainMode::Fixed(5.0));
        assert_eq!(s.split_source(), SplitSource::Fixed(0.3));
        let s = Settings::from_args(
            &parse(&["--scheme", "custom", "--gain", "5", "--split", "0.3"]),
            Format::Json,
        )
        .unwrap();
        assert_eq!(s.gain_mode(), GainMode::Free);
        let c = s.scheme_config().unwrap();
        assert_eq!((c.params.t, c.params.g), (0.3, 5.0));
    }

    #[test]
    fn forced_scheme_parameters_rejected() {
        let s = Settings::from_args(&parse(&["--scheme", "cqi", "--gain", "2"]), Format::Json).unwrap();
        assert!(matches!(s.scheme_config(), Err(CliError::Usage(_))));
        let s = Settings::from_args(&parse(&["--scheme", "qig", "--split", "0.3"]), Format::Json).unwrap();
        assert!(matches!(s.scheme_config(), Err(CliError::Usage(_))));
        assert!(Settings::from_args(&parse(&["--gain", "2", "--constrained"]), Format::Json).is_err());
    }
}
