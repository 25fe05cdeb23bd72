//! Command-line grammar.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nbx_core::walks::WalkKind;

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "nbx", version, about = "Non-backtracking graph experiments")]
pub struct Command {
    #[command(subcommand)]
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Action {
    /// Sample an SBM or ER graph and write it as an edge list.
    Gen(GenArgs),
    /// Monte Carlo access time of a random walk.
    Walk(WalkArgs),
    /// Exact SRW and BBRW access times on a tree.
    AccessTime(AccessTimeArgs),
    /// Non-backtracking and message-passing sensitivity bounds.
    Bounds(BoundsArgs),
    /// Two-community recovery from the non-backtracking spectrum.
    Spectral(SpectralArgs),
    /// SBM versus ER decision from the two leading eigenvalues.
    Classify(ClassifyArgs),
    /// Semi-supervised node classification with an NBA-GCN.
    Train(TrainArgs),
    /// Node outputs of a freshly initialized NBA-GCN.
    Forward(ForwardArgs),
    /// Node, edge, arc and non-backtracking transition counts.
    Info(InfoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    pub fn is_on(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErSpec {
    pub n: usize,
    pub c: f64,
}

/// Parses `key=value,key=value` with exactly the given keys.
fn key_values(s: &str, keys: &[&str]) -> Result<Vec<String>, String> {
    let mut found: Vec<Option<String>> = vec![None; keys.len()];
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let idx = keys
            .iter()
            .position(|&key| key == k.trim())
            .ok_or_else(|| format!("unknown key {:?} (expected {})", k.trim(), keys.join(", ")))?;
        if found[idx].replace(v.trim().to_string()).is_some() {
            return Err(format!("key {:?} given twice", keys[idx]));
        }
    }
    keys.iter()
        .zip(found)
        .map(|(k, v)| v.ok_or_else(|| format!("missing key {k:?}")))
        .collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid value {v:?} for {key}"))
}

impl FromStr for SbmSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = key_values(s, &["n", "a", "b"])?;
        Ok(SbmSpec {
            n: parse_num("n", &v[0])?,
            a: parse_num("a", &v[1])?,
            b: parse_num("b", &v[2])?,
        })
    }
}

impl FromStr for ErSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = key_values(s, &["n", "c"])?;
        Ok(ErSpec {
            n: parse_num("n", &v[0])?,
            c: parse_num("c", &v[1])?,
        })
    }
}

fn parse_kind(s: &str) -> Result<WalkKind, String> {
    s.parse().map_err(|_| format!("expected one of srw, nbrw, bbrw, got {s:?}"))
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct Seed {
    #[arg(long, default_value_t = 0, value_name = "U64")]
    pub seed: u64,
}

/// Exactly one graph source.
#[derive(Debug, Clone, PartialEq, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Edge-list file; a `<PATH>.labels` sidecar is picked up when present.
    #[arg(long, value_name = "PATH")]
    pub graph: Option<PathBuf>,
    /// Two-block SBM with `a/n` inside and `b/n` across blocks.
    #[arg(long, value_name = "n=..,a=..,b=..")]
    pub sbm: Option<SbmSpec>,
    /// Erdős–Rényi graph with mean degree `c`.
    #[arg(long, value_name = "n=..,c=..")]
    pub er: Option<ErSpec>,
}

pub enum SourceRef<'a> {
    Graph(&'a PathBuf),
    Sbm(SbmSpec),
    Er(ErSpec),
}

impl Source {
    pub fn pick(&self) -> SourceRef<'_> {
        match (&self.graph, self.sbm, self.er) {
            (Some(p), _, _) => SourceRef::Graph(p),
            (None, Some(s), _) => SourceRef::Sbm(s),
            (None, None, Some(e)) => SourceRef::Er(e),
            (None, None, None) => unreachable!("clap requires one graph source"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
#[group(required = true, multiple = false)]
pub struct Generator {
    #[arg(long, value_name = "n=..,a=..,b=..")]
    pub sbm: Option<SbmSpec>,
    #[arg(long, value_name = "n=..,c=..")]
    pub er: Option<ErSpec>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub generator: Generator,
    /// Edge-list destination; SBM labels go to `<PATH>.labels`.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct WalkArgs {
    #[arg(long, value_name = "PATH")]
    pub graph: PathBuf,
    #[arg(long, value_parser = parse_kind, value_name = "srw|nbrw|bbrw")]
    pub kind: WalkKind,
    #[arg(long, value_name = "NODE")]
    pub from: usize,
    #[arg(long, value_name = "NODE")]
    pub to: usize,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..), value_name = "U64")]
    pub samples: u64,
    #[arg(long = "max-steps", default_value_t = nbx_core::walks::DEFAULT_MAX_STEPS, value_parser = clap::value_parser!(u64).range(1..), value_name = "U64")]
    pub max_steps: u64,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct AccessTimeArgs {
    /// Must be a tree.
    #[arg(long, value_name = "PATH")]
    pub graph: PathBuf,
    /// Omit both `--from` and `--to` for the table of all ordered pairs.
    #[arg(long, value_name = "NODE", requires = "to")]
    pub from: Option<usize>,
    #[arg(long, value_name = "NODE", requires = "from")]
    pub to: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct BoundsArgs {
    #[arg(long, value_name = "PATH")]
    pub graph: PathBuf,
    /// Path length; pairs at exactly this distance are reported.
    #[arg(long = "T", value_parser = clap::value_parser!(u32).range(1..), value_name = "U32")]
    pub t: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = nbx_core::spectral::DEFAULT_DELTA, value_name = "F64")]
    pub delta: f64,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 2, value_name = "U32")]
    pub layers: u32,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..), value_name = "U32")]
    pub hidden: u32,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub begrudging: Toggle,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct TrainArgs {
    /// Needs node labels: `--sbm`, or `--graph` with a `.labels` sidecar.
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1000, value_name = "U32")]
    pub epochs: u32,
    #[arg(long, default_value_t = 0.2, value_name = "F64")]
    pub lr: f64,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ForwardArgs {
    #[arg(long, value_name = "PATH")]
    pub graph: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub seed: Seed,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct InfoArgs {
    #[arg(long, value_name = "PATH")]
    pub graph: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

/// Parses arguments without the program name.
pub fn parse_args<I, S>(argv: I) -> Result<Command, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    Command::try_parse_from(std::iter::once(std::ffi::OsString::from("nbx")).chain(argv.into_iter().map(Into::into)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_with_t() {
        let cmd = parse_args(["bounds", "--graph", "g.txt", "--T", "3"]).unwrap();
        match cmd.action {
            Action::Bounds(b) => {
                assert_eq!(b.t, 3);
                assert_eq!(b.graph, PathBuf::from("g.txt"));
                assert_eq!(b.format, Format::Json);
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn walk_flags() {
        let cmd = parse_args([
            "walk", "--kind", "bbrw", "--from", "0", "--to", "2", "--graph", "p3.txt", "--samples", "100000",
        ])
        .unwrap();
        match cmd.action {
            Action::Walk(w) => {
                assert_eq!(w.kind, WalkKind::Bbrw);
                assert_eq!((w.from, w.to, w.samples), (0, 2, 100_000));
                assert_eq!(w.seed.seed, 0);
                assert_eq!(w.max_steps, nbx_core::walks::DEFAULT_MAX_STEPS);
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn usage_errors_name_the_flag() {
        let err = parse_args(["bounds", "--graph", "g.txt", "--T", "0"]).unwrap_err();
        assert!(err.to_string().contains("--T"), "{err}");
        let err = parse_args(["bounds", "--T", "0"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = parse_args(["info", "--graph", "g.txt", "--samples", "3"]).unwrap_err();
        assert!(err.to_string().contains("--samples"), "{err}");
        let err = parse_args(["classify", "--sbm", "n=10,a=3", "--seed", "1"]).unwrap_err();
        assert!(err.to_string().contains("--sbm"), "{err}");
        assert!(parse_args(["classify", "--sbm", "n=10,a=3,b=1", "--er", "n=10,c=2"]).is_err());
        assert!(parse_args(["walk", "--kind", "lazy", "--from", "0", "--to", "1", "--graph", "g"]).is_err());
        assert!(parse_args(["info", "--graph", "g", "info"]).is_err());
        assert!(parse_args(Vec::<String>::new()).is_err());
    }

    #[test]
    fn generator_specs() {
        assert_eq!("n=3000,a=16,b=4".parse(), Ok(SbmSpec { n: 3000, a: 16.0, b: 4.0 }));
        assert_eq!("c=2.5, n=10".parse(), Ok(ErSpec { n: 10, c: 2.5 }));
        assert!("n=10,c=2,c=3".parse::<ErSpec>().is_err());
        assert!("n=10,a=1,b=1,d=2".parse::<SbmSpec>().is_err());
        assert!("n=ten,c=2".parse::<ErSpec>().is_err());
    }

    #[test]
    fn help_is_a_short_circuit() {
        let err = parse_args(["--help"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::DisplayHelp);
        assert_eq!(err.exit_code(), 0);
    }
}
