//! Density sweeps: the same scenario at increasing node counts, each
//! replicated over several seeds, aggregated per scheme.

use std::sync::mpsc;

use crate::config::{invalid, ConfigError, Scheme, SimConfig};
use crate::engine::{run, SimError};
use crate::metrics::MetricsReport;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub node_counts: Vec<u32>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    pub base_config: SimConfig,
}

impl SweepSpec {
    /// The standard grid: 10 to 100 nodes in steps of 10, all three
    /// schemes, five seeds starting at the base scenario's seed.
    pub fn default_grid(base_config: SimConfig) -> SweepSpec {
        let first_seed = base_config.scenario.seed;
        SweepSpec {
            node_counts: (1..=10).map(|i| i * 10).collect(),
            schemes: Scheme::ALL.to_vec(),
            seeds: (0..5).map(|i| first_seed + i).collect(),
            base_config,
        }
    }

    /// One derived config per (scheme, node count, seed), scheme-major.
    pub fn configs(&self) -> impl Iterator<Item = SimConfig> + '_ {
        self.schemes.iter().flat_map(move |&scheme| {
            self.node_counts.iter().flat_map(move |&n| {
                self.seeds.iter().map(move |&seed| {
                    let mut cfg = self.base_config.clone();
                    cfg.scenario.scheme = scheme;
                    cfg.scenario.n_nodes = n;
                    cfg.scenario.seed = seed;
                    cfg
                })
            })
        })
    }

    /// Checks the grid and every derived configuration before anything
    /// runs, so a sweep never fails halfway through.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.node_counts.is_empty() {
            return Err(invalid("sweep.node_counts", "[]", "must list at least one count"));
        }
        if !self.node_counts.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid(
                "sweep.node_counts",
                format!("{:?}", self.node_counts),
                "must be strictly increasing",
            ));
        }
        if self.schemes.is_empty() {
            return Err(invalid("sweep.schemes", "[]", "must list at least one scheme"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("sweep.seeds", "[]", "must list at least one seed"));
        }
        for cfg in self.configs() {
            cfg.validate()?;
        }
        Ok(())
    }
}

/// Seed-aggregated results for one (scheme, node count) grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub scheme: Scheme,
    pub n_nodes: u32,
    pub mean_success_rate: f64,
    pub stdev_success_rate: f64,
    pub mean_total_messages: f64,
    pub stdev_total_messages: f64,
    pub runs: Vec<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub node_counts: Vec<u32>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    /// Scheme-major, then node count, in declaration order.
    pub cells: Vec<SweepCell>,
}

fn mean_and_stdev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the whole grid. Replicates execute on up to `workers` threads;
/// results are aggregated in grid order, so the outcome and every
/// serialized byte are independent of scheduling.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult, SimError> {
    spec.validate()?;
    let jobs: Vec<SimConfig> = spec.configs().collect();
    let mut reports: Vec<Option<MetricsReport>> = (0..jobs.len()).map(|_| None).collect();

    let workers = workers.max(1).min(jobs.len().max(1));
    if workers <= 1 {
        for (slot, cfg) in reports.iter_mut().zip(&jobs) {
            *slot = Some(run(cfg)?.report);
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<(usize, Result<MetricsReport, SimError>)>();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                let jobs = &jobs;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= jobs.len() {
                        break;
                    }
                    let result = run(&jobs[i]).map(|out| out.report);
                    if tx.send((i, result)).is_err() {
                        break;
                    }
                });
            }
        });
        drop(tx);
        for (i, result) in rx {
            reports[i] = Some(result?);
        }
    }

    let per_point = spec.seeds.len();
    let mut cells = Vec::with_capacity(spec.schemes.len() * spec.node_counts.len());
    let mut it = reports.into_iter();
    for &scheme in &spec.schemes {
        for &n in &spec.node_counts {
            let runs: Vec<MetricsReport> = it
                .by_ref()
                .take(per_point)
                .map(|r| r.expect("every job ran"))
                .collect();
            let rates: Vec<f64> =
                runs.iter().map(|r| r.success_rate().unwrap_or(0.0)).collect();
            let messages: Vec<f64> = runs.iter().map(|r| r.total_messages() as f64).collect();
            let (mean_success_rate, stdev_success_rate) = mean_and_stdev(&rates);
            let (mean_total_messages, stdev_total_messages) = mean_and_stdev(&messages);
            cells.push(SweepCell {
                scheme,
                n_nodes: n,
                mean_success_rate,
                stdev_success_rate,
                mean_total_messages,
                stdev_total_messages,
                runs,
            });
        }
    }
    Ok(SweepResult {
        node_counts: spec.node_counts.clone(),
        schemes: spec.schemes.clone(),
        seeds: spec.seeds.clone(),
        cells,
    })
}

impl SweepResult {
    fn cell(&self, scheme: Scheme, n: u32) -> &SweepCell {
        self.cells
            .iter()
            .find(|c| c.scheme == scheme && c.n_nodes == n)
            .expect("grid point exists")
    }

    /// Every run, one row each, in grid order.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from(MetricsReport::csv_header());
        out.push('\n');
        for cell in &self.cells {
            for run in &cell.runs {
                out.push_str(&run.csv_row());
                out.push('\n');
            }
        }
        out
    }

    /// Per-density series of one aggregated quantity, a scheme pair of
    /// mean and sample standard deviation per column group.
    fn series_csv(&self, pick: impl Fn(&SweepCell) -> (f64, f64)) -> String {
        let mut out = String::from("n_nodes");
        for scheme in &self.schemes {
            out.push_str(&format!(",{0}_mean,{0}_stdev", scheme.name()));
        }
        out.push('\n');
        for &n in &self.node_counts {
            out.push_str(&n.to_string());
            for &scheme in &self.schemes {
                let (mean, stdev) = pick(self.cell(scheme, n));
                out.push_str(&format!(",{mean:.6},{stdev:.6}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn success_rate_series_csv(&self) -> String {
        self.series_csv(|c| (c.mean_success_rate, c.stdev_success_rate))
    }

    pub fn total_messages_series_csv(&self) -> String {
        self.series_csv(|c| (c.mean_total_messages, c.stdev_total_messages))
    }
}
