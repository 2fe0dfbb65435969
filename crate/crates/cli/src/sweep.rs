use std::time::Instant;

use genpr::rng::{self, tag};
use genpr::{gen, AnyCertificate, CertifyConfig, Field, GenKind, GenSpec, Verdict};
use rand::Rng;
use rayon::prelude::*;

use crate::{CliError, CliResult};

/// First line of every sweep CSV. Bump when columns change.
pub const SWEEP_SCHEMA: &str = "#schema=genpr.sweep.v1";

pub const SWEEP_COLUMNS: [&str; 20] = [
    "row_type",
    "field",
    "kind",
    "d",
    "n",
    "trial",
    "seed",
    "verdict",
    "decided_by",
    "witness",
    "nullspace_dim",
    "min_sigma_jacobian",
    "collision_best",
    "wall_ms",
    "trials",
    "certified_pr_rate",
    "likely_pr_rate",
    "not_pr_rate",
    "witness_rate",
    "inconclusive_rate",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankPolicy {
    /// The largest rank the kind allows at each `d`.
    Full,
    Fixed(usize),
    /// Each matrix draws its rank uniformly from `1..=max_rank(d)`.
    Random,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    /// Inclusive.
    pub d_range: (usize, usize),
    /// Inclusive.
    pub n_range: (usize, usize),
    pub field: Field,
    pub kind: GenKind,
    pub ranks: RankPolicy,
    pub trials: usize,
    pub restarts: usize,
    pub witness_tol: Option<f64>,
    pub seed: u64,
    /// Wall time is the only nondeterministic column, so it stays blank unless asked for.
    pub timing: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> CliResult<()> {
        let (d0, d1) = self.d_range;
        let (n0, n1) = self.n_range;
        if d0 == 0 || d0 > d1 {
            return Err(CliError::Input(format!("empty or invalid d range {d0}..={d1}")));
        }
        if n0 == 0 || n0 > n1 {
            return Err(CliError::Input(format!("empty or invalid N range {n0}..={n1}")));
        }
        if self.trials == 0 {
            return Err(CliError::Input("--trials must be at least 1".into()));
        }
        if let RankPolicy::Fixed(r) = self.ranks {
            let max = self.kind.max_rank(d0);
            if r == 0 || r > max {
                return Err(CliError::Input(format!(
                    "--rank {r} is outside 1..={max} for kind {} at d={d0}",
                    self.kind.as_str()
                )));
            }
        }
        Ok(())
    }

    fn config(&self, seed: u64) -> CertifyConfig {
        let mut cfg = CertifyConfig::with_seed(seed);
        cfg.restarts = self.restarts;
        if let Some(t) = self.witness_tol {
            cfg.witness_tol = t;
        }
        cfg
    }

    fn ranks_for(&self, d: usize, n: usize, seed: u64) -> Vec<usize> {
        let max = self.kind.max_rank(d);
        match self.ranks {
            RankPolicy::Full => vec![max; n],
            RankPolicy::Fixed(r) => vec![r; n],
            RankPolicy::Random => {
                let mut s = rng::stream(seed, &[tag::SWEEP, 1]);
                (0..n).map(|_| s.random_range(1..=max.max(1))).collect()
            }
        }
    }
}

struct Trial {
    d: usize,
    n: usize,
    index: usize,
    seed: u64,
    cert: AnyCertificate,
    wall_ms: f64,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run_trial(spec: &SweepSpec, d: usize, n: usize, index: usize) -> CliResult<Trial> {
    let seed = rng::derive(spec.seed, &[tag::SWEEP, d as u64, n as u64, index as u64]);
    let gen_spec = GenSpec::new(d, spec.field, spec.kind, spec.ranks_for(d, n, seed), seed);
    let start = Instant::now();
    let ensemble = gen(&gen_spec)?;
    let cert = ensemble.certify(&spec.config(seed))?;
    Ok(Trial {
        d,
        n,
        index,
        seed,
        cert,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Certify `trials` generated ensembles for every `(d, N)` cell and return the CSV text.
///
/// Trials run in parallel; each seed depends only on `(seed, d, N, trial)`, so the output
/// is identical for any thread count.
pub fn run_sweep(spec: &SweepSpec) -> CliResult<String> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> = (spec.d_range.0..=spec.d_range.1)
        .flat_map(|d| (spec.n_range.0..=spec.n_range.1).map(move |n| (d, n)))
        .collect();
    let jobs: Vec<(usize, usize, usize)> = cells
        .iter()
        .flat_map(|&(d, n)| (0..spec.trials).map(move |t| (d, n, t)))
        .collect();
    let results: Vec<Trial> = jobs
        .par_iter()
        .map(|&(d, n, t)| run_trial(spec, d, n, t))
        .collect::<CliResult<_>>()?;

    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record([SWEEP_SCHEMA]).map_err(io_err)?;
    w.write_record(SWEEP_COLUMNS).map_err(io_err)?;
    let field = spec.field.to_string();
    let kind = spec.kind.as_str();
    for cell in results.chunks(spec.trials) {
        for t in cell {
            let ev = t.cert.evidence();
            let wall = if spec.timing { format!("{:.3}", t.wall_ms) } else { String::new() };
            w.write_record([
                "trial".to_string(),
                field.clone(),
                kind.to_string(),
                t.d.to_string(),
                t.n.to_string(),
                t.index.to_string(),
                t.seed.to_string(),
                t.cert.verdict().to_string(),
                t.cert.decided_by().as_str().to_string(),
                t.cert.has_witness().to_string(),
                opt(ev.nullspace_dim),
                opt(ev.min_sigma_jacobian),
                opt(ev.collision_best),
                wall,
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])
            .map_err(io_err)?;
        }
        let total = cell.len() as f64;
        let rate = |f: &dyn Fn(&Trial) -> bool| (cell.iter().filter(|t| f(t)).count() as f64 / total).to_string();
        let first = &cell[0];
        w.write_record([
            "summary".to_string(),
            field.clone(),
            kind.to_string(),
            first.d.to_string(),
            first.n.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            cell.len().to_string(),
            rate(&|t| t.cert.verdict() == Verdict::CertifiedPr),
            rate(&|t| t.cert.verdict() == Verdict::LikelyPr),
            rate(&|t| t.cert.verdict() == Verdict::CertifiedNotPr),
            rate(&|t| t.cert.has_witness()),
            rate(&|t| t.cert.verdict() == Verdict::Inconclusive),
        ])
        .map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}
