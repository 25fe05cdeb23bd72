//! Subcommand execution.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use serde_json::{json, Map, Value};

use nbx_core::graph::{nb_matrix, ArcIndex, Graph};
use nbx_core::nbagnn::{forward, train_node_classifier, ModelShape, NbaGcnModel, NodeClassificationConfig};
use nbx_core::sensitivity::compare_bounds;
use nbx_core::spectral::{
    alignment, classify_model, sample_er, sample_sbm, spectral_communities, Labeling, SbmParams, Spectrum,
};
use nbx_core::walks::{mc_access_time, tree_access_time_bbrw, tree_access_time_srw, WalkKind};

use crate::args::{Action, Command, SourceRef, Format, Source};
use crate::report::{format_number, num, nums};

#[derive(Debug)]
pub enum CliError {
    Domain(nbx_core::Error),
    Io { path: PathBuf, message: String },
    /// Argument combination that the grammar cannot express.
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.kind(),
            CliError::Io { .. } => "IoError",
            CliError::Usage(_) => "UsageError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<nbx_core::Error> for CliError {
    fn from(e: nbx_core::Error) -> Self {
        CliError::Domain(e)
    }
}

/// Successful subcommand output.
#[derive(Debug, Clone, PartialEq)]
pub struct Success {
    pub results: Value,
    /// Table rendering for `--format csv`.
    pub csv: Option<String>,
    pub timings_ms: Vec<(String, f64)>,
}

struct Phases {
    last: Instant,
    done: Vec<(String, f64)>,
}

impl Phases {
    fn start() -> Self {
        Phases {
            last: Instant::now(),
            done: Vec::new(),
        }
    }

    fn mark(&mut self, name: &str) {
        let now = Instant::now();
        self.done.push((name.into(), (now - self.last).as_secs_f64() * 1e3));
        self.last = now;
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn labels_path(graph: &Path) -> PathBuf {
    let mut s = graph.as_os_str().to_owned();
    s.push(".labels");
    PathBuf::from(s)
}

pub fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    Ok(Graph::from_edge_list(BufReader::new(file))?)
}

fn parse_labels(text: &str) -> Result<Vec<usize>, nbx_core::Error> {
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        labels.push(line.parse().map_err(|_| nbx_core::Error::MalformedInput {
            line: idx + 1,
            reason: format!("invalid label {line:?}"),
        })?);
    }
    Ok(labels)
}

/// Graph plus sidecar labels, if any. Nodes past the largest id in the edge
/// list but covered by the labels are added as isolated nodes.
fn load_labeled(path: &Path) -> Result<(Graph, Option<Labeling>), CliError> {
    let g = load_graph(path)?;
    let lp = labels_path(path);
    if !lp.exists() {
        return Ok((g, None));
    }
    let text = fs::read_to_string(&lp).map_err(|e| io_err(&lp, e))?;
    let labels = parse_labels(&text)?;
    if labels.len() < g.n() {
        return Err(CliError::Domain(nbx_core::Error::ShapeError(format!(
            "{} has {} labels for {} nodes",
            lp.display(),
            labels.len(),
            g.n()
        ))));
    }
    let g = Graph::from_edges(labels.len(), g.edges().iter().copied())?;
    Ok((g, Some(Labeling { labels })))
}

fn sbm_params(n: usize, a: f64, b: f64) -> Result<SbmParams, CliError> {
    Ok(SbmParams::two_block(n, a, b)?)
}

fn resolve(source: &Source, seed: u64) -> Result<(Graph, Option<Labeling>), CliError> {
    match source.pick() {
        SourceRef::Graph(p) => load_labeled(p),
        SourceRef::Sbm(s) => {
            let (g, truth) = sample_sbm(&sbm_params(s.n, s.a, s.b)?, seed);
            Ok((g, Some(truth)))
        }
        SourceRef::Er(e) => Ok((sample_er(e.n, e.c, seed)?, None)),
    }
}

fn spectrum_json(s: &Spectrum, out: &mut Map<String, Value>) {
    out.insert("lambda".into(), nums(&s.eigenvalues));
    out.insert("magnitudes".into(), nums(&s.magnitudes));
    out.insert("residuals".into(), nums(&s.residuals));
    out.insert("converged".into(), json!(s.converged));
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII table")
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => format_number(n),
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn table(format: Format, header: &[&str], records: &[Value]) -> Option<String> {
    (format == Format::Csv).then(|| {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| header.iter().map(|h| cell(&r[*h])).collect())
            .collect();
        csv_table(header, &rows)
    })
}

/// Runs a parsed command. Output files other than the report (edge lists,
/// labels) are written here.
pub fn execute(cmd: &Command) -> Result<Success, CliError> {
    let mut phases = Phases::start();
    let mut csv = None;
    let results = match &cmd.action {
        Action::Gen(a) => {
            let seed = a.seed.seed;
            let (g, truth, model) = match (a.generator.sbm, a.generator.er) {
                (Some(s), _) => {
                    let (g, t) = sample_sbm(&sbm_params(s.n, s.a, s.b)?, seed);
                    (g, Some(t), "SBM")
                }
                (None, Some(e)) => (sample_er(e.n, e.c, seed)?, None, "ER"),
                (None, None) => unreachable!("clap requires a generator"),
            };
            phases.mark("generate");
            let mut text = format!("# {model} n={} m={} seed={seed}\n", g.n(), g.m());
            text.push_str(&g.to_edge_list());
            fs::write(&a.out, text).map_err(|e| io_err(&a.out, e))?;
            let mut r = json!({
                "model": model,
                "n": g.n(),
                "m": g.m(),
                "edges": a.out.display().to_string(),
            });
            if let Some(t) = truth {
                let lp = labels_path(&a.out);
                let body: String = t.labels.iter().map(|l| format!("{l}\n")).collect();
                fs::write(&lp, body).map_err(|e| io_err(&lp, e))?;
                r["labels"] = lp.display().to_string().into();
            }
            phases.mark("write");
            r
        }
        Action::Walk(a) => {
            let g = load_graph(&a.graph)?;
            phases.mark("load");
            let est = mc_access_time(&g, a.kind, a.from, a.to, a.samples, a.max_steps, a.seed.seed)?;
            let mut r = json!({
                "kind": a.kind.to_string(),
                "from": a.from,
                "to": a.to,
                "mean": num(est.mean),
                "stderr": num(est.stderr),
                "samples": est.samples,
                "hits": est.hits,
                "truncated": est.truncated,
                "dead_ends": est.dead_ends,
                "truncation_significant": est.truncation_significant(),
            });
            if g.is_tree() {
                let exact = match a.kind {
                    WalkKind::Srw => Some(tree_access_time_srw(&g, a.from, a.to)?),
                    WalkKind::Bbrw => Some(tree_access_time_bbrw(&g, a.from, a.to)?),
                    WalkKind::Nbrw => None,
                };
                if let Some(x) = exact {
                    r["closed_form"] = num(x);
                }
            }
            phases.mark("simulate");
            r
        }
        Action::AccessTime(a) => {
            let g = load_graph(&a.graph)?;
            phases.mark("load");
            let entry = |i: usize, j: usize| -> Result<Value, CliError> {
                let srw = tree_access_time_srw(&g, i, j)?;
                let bbrw = tree_access_time_bbrw(&g, i, j)?;
                Ok(json!({"from": i, "to": j, "srw": num(srw), "bbrw": num(bbrw), "gap": num(bbrw - srw)}))
            };
            let header = ["from", "to", "srw", "bbrw", "gap"];
            let r = match (a.from, a.to) {
                (Some(i), Some(j)) => {
                    let e = entry(i, j)?;
                    csv = table(a.format, &header, std::slice::from_ref(&e));
                    json!({"srw": e["srw"], "bbrw": e["bbrw"], "gap": e["gap"]})
                }
                _ => {
                    if !g.is_tree() {
                        return Err(nbx_core::Error::NotATree.into());
                    }
                    let mut pairs = Vec::new();
                    for i in 0..g.n() {
                        for j in (0..g.n()).filter(|&j| j != i) {
                            pairs.push(entry(i, j)?);
                        }
                    }
                    csv = table(a.format, &header, &pairs);
                    json!({"pairs": pairs})
                }
            };
            phases.mark("compute");
            r
        }
        Action::Bounds(a) => {
            let g = load_graph(&a.graph)?;
            phases.mark("load");
            let reports = compare_bounds(&g, a.t as usize)?;
            let pairs: Vec<Value> = reports
                .iter()
                .map(|b| {
                    if b.nba_bound < b.gnn_bound {
                        return Err(nbx_core::Error::BoundViolation {
                            i: b.pair.0,
                            j: b.pair.1,
                            nba: b.nba_bound,
                            gnn: b.gnn_bound,
                        });
                    }
                    Ok(json!({
                        "i": b.pair.0,
                        "j": b.pair.1,
                        "distance": b.distance,
                        "nba_bound": num(b.nba_bound),
                        "gnn_bound": num(b.gnn_bound),
                        "path_count_nb": b.path_count_nb,
                        "path_count_simple": b.path_count_simple,
                    }))
                })
                .collect::<Result<_, _>>()?;
            csv = table(
                a.format,
                &["i", "j", "distance", "nba_bound", "gnn_bound", "path_count_nb", "path_count_simple"],
                &pairs,
            );
            phases.mark("compute");
            json!({"T": a.t, "pairs": pairs})
        }
        Action::Spectral(a) => {
            let (g, truth) = resolve(&a.source, a.seed.seed)?;
            phases.mark("load");
            let (labels, spectrum) = spectral_communities(&g, a.seed.seed)?;
            let mut r = Map::new();
            spectrum_json(&spectrum, &mut r);
            if let Some(t) = truth {
                r.insert("alignment".into(), num(alignment(&labels, &t)?));
            }
            r.insert("labels".into(), json!(labels.labels));
            phases.mark("compute");
            Value::Object(r)
        }
        Action::Classify(a) => {
            let (g, _) = resolve(&a.source, a.seed.seed)?;
            phases.mark("load");
            let c = classify_model(&g, a.delta, a.seed.seed)?;
            let mut r = Map::new();
            spectrum_json(&c.spectrum, &mut r);
            r.insert("decision".into(), c.decision.as_str().into());
            r.insert("lambda1".into(), num(c.lambda1));
            r.insert("lambda2_abs".into(), num(c.lambda2));
            r.insert("threshold".into(), num(c.threshold));
            phases.mark("compute");
            Value::Object(r)
        }
        Action::Train(a) => {
            let (g, truth) = resolve(&a.source, a.seed.seed)?;
            let truth = truth.ok_or_else(|| {
                CliError::Usage("train needs node labels: use --sbm or a --graph with a .labels sidecar".into())
            })?;
            phases.mark("load");
            let classes = truth.labels.iter().max().map_or(0, |&m| m + 1);
            let cfg = NodeClassificationConfig {
                hidden: a.model.hidden as usize,
                layers: a.model.layers as usize,
                learning_rate: a.lr,
                epochs: a.epochs as usize,
                begrudging: a.model.begrudging.is_on(),
                seed: a.seed.seed,
                ..Default::default()
            };
            let out = train_node_classifier(&g, &truth.labels, classes, &cfg)?;
            phases.mark("train");
            json!({
                "test_accuracy": num(out.test_accuracy),
                "labeled": out.labeled.len(),
                "test": out.test.len(),
                "excluded": g.n() - out.kept.len(),
                "final_loss": out.history.last().map_or(Value::Null, |&l| num(l)),
                "history": nums(&out.history),
                "predictions": out.predictions,
                "model": out.model.to_json(),
            })
        }
        Action::Forward(a) => {
            let g = load_graph(&a.graph)?;
            let ai = ArcIndex::build(&g)?;
            phases.mark("load");
            let shape = ModelShape {
                f_in: 1,
                f_edge: 0,
                hidden: a.model.hidden as usize,
                f_out: 1,
                layers: a.model.layers as usize,
            };
            let model = NbaGcnModel::init(shape, a.model.begrudging.is_on(), a.seed.seed)?;
            let x = Array2::from_shape_fn((g.n(), 1), |(v, _)| g.degree(v) as f64);
            let y = forward(&g, &ai, &x, None, &model)?;
            phases.mark("forward");
            json!({"outputs": nums(&y.column(0).to_vec()), "model": model.to_json()})
        }
        Action::Info(a) => {
            let g = load_graph(&a.graph)?;
            phases.mark("load");
            let nb_nnz = match ArcIndex::build(&g) {
                Ok(ai) => nb_matrix(&g, &ai, false).nnz(),
                Err(nbx_core::Error::EmptyGraph) => 0,
                Err(e) => return Err(e.into()),
            };
            json!({"n": g.n(), "m": g.m(), "arcs": 2 * g.m(), "nb_nnz": nb_nnz})
        }
    };
    Ok(Success {
        results,
        csv,
        timings_ms: phases.done,
    })
}
