//! Timing grid over the row count m.

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::instance::{gaussian_matrix, generate_instance};
use crate::stats::{median, quantile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CSV_HEADER: &str = "algorithm,m,n,nx,ny,repeat,seconds,normalized_seconds";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Dense,
    Feigh,
    Svd,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Dense => "dense",
            Algorithm::Feigh => "feigh",
            Algorithm::Svd => "svd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.trim() {
            "dense" => Ok(Algorithm::Dense),
            "feigh" => Ok(Algorithm::Feigh),
            "svd" => Ok(Algorithm::Svd),
            other => bail!("unknown algorithm `{other}` (expected feigh, svd or dense)"),
        }
    }
}

/// A rank given either as a fixed count or as `m/3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSpec {
    Fixed(usize),
    ThirdOfM,
}

impl RankSpec {
    pub fn resolve(self, m: usize) -> usize {
        match self {
            RankSpec::Fixed(n) => n,
            RankSpec::ThirdOfM => m / 3,
        }
    }
}

impl FromStr for RankSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let s = s.trim();
        if s == "m/3" {
            return Ok(RankSpec::ThirdOfM);
        }
        s.parse()
            .map(RankSpec::Fixed)
            .with_context(|| format!("rank `{s}` is neither a count nor `m/3`"))
    }
}

/// Parses `start:end:xFACTOR` (geometric) or a comma-separated list.
pub fn parse_m_grid(s: &str) -> anyhow::Result<Vec<usize>> {
    let grid: Vec<usize> = if let Some((range, step)) = s.rsplit_once(":x") {
        let (start, end) = range
            .split_once(':')
            .with_context(|| format!("grid `{s}` should look like START:END:xFACTOR"))?;
        let start: usize = start.parse().context("grid start")?;
        let end: usize = end.parse().context("grid end")?;
        let factor: usize = step.parse().context("grid factor")?;
        if start == 0 || factor < 2 {
            bail!("grid needs a positive start and a factor of at least 2");
        }
        let mut out = Vec::new();
        let mut m = start;
        while m <= end {
            out.push(m);
            m = m.checked_mul(factor).context("grid overflow")?;
        }
        out
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .with_context(|| format!("grid entry `{t}`"))
            })
            .collect::<anyhow::Result<_>>()?
    };
    if grid.is_empty() {
        bail!("empty m grid");
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        bail!("m grid must be strictly ascending");
    }
    Ok(grid)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub m_grid: Vec<usize>,
    pub n: RankSpec,
    pub nx: RankSpec,
    pub ny: RankSpec,
    pub repeats: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Dense cells above this size are skipped and reported as failures.
    pub dense_max_m: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            m_grid: (10..=18).map(|e| 1usize << e).collect(),
            n: RankSpec::Fixed(1),
            nx: RankSpec::Fixed(1),
            ny: RankSpec::Fixed(1),
            repeats: 11,
            seed: 0,
            algorithms: vec![Algorithm::Feigh, Algorithm::Svd],
            dense_max_m: 512,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.repeats == 0 {
            bail!("repeats must be at least 1");
        }
        if self.m_grid.is_empty() || self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            bail!("m grid must be non-empty and strictly ascending");
        }
        if self.algorithms.is_empty() {
            bail!("no algorithms selected");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub repeat: usize,
    pub seconds: f64,
    pub normalized_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub algorithm: Algorithm,
    pub m: usize,
    pub repeat: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct GridResult {
    pub records: Vec<BenchRecord>,
    pub failures: Vec<CellFailure>,
}

fn cell_seed(seed: u64, m: usize, repeat: usize) -> u64 {
    // splitmix64 over the cell coordinates
    let mut z = seed
        .wrapping_add((m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((repeat as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Times one cell; instance generation happens outside the measured region.
fn run_cell(
    alg: Algorithm,
    m: usize,
    (n, nx, ny): (usize, usize, usize),
    repeat: usize,
    seed: u64,
) -> feigh::Result<BenchRecord> {
    let seed = cell_seed(seed, m, repeat);
    let (dims, seconds) = match alg {
        Algorithm::Svd => {
            // Same total rank, all weights nonnegative.
            let k = n + nx + ny;
            if k > m {
                return Err(feigh::Error::RankExceedsDimension { rank: k, dim: m });
            }
            let x = gaussian_matrix(&mut ChaCha8Rng::seed_from_u64(seed), m, k);
            let t = Instant::now();
            let ef = feigh::svd_route(1.0, &x)?;
            let s = t.elapsed().as_secs_f64();
            std::hint::black_box(ef);
            ((0, k, 0), s)
        }
        Algorithm::Feigh => {
            let inst = generate_instance(seed, m, n, nx, ny)?;
            let t = Instant::now();
            let ef = feigh::fast_eigh(&inst.factor, &inst.data)?;
            let s = t.elapsed().as_secs_f64();
            std::hint::black_box(ef);
            ((n, nx, ny), s)
        }
        Algorithm::Dense => {
            let inst = generate_instance(seed, m, n, nx, ny)?;
            let t = Instant::now();
            let ef = feigh::dense_fallback(&inst.factor, &inst.data)?;
            let s = t.elapsed().as_secs_f64();
            std::hint::black_box(ef);
            ((n, nx, ny), s)
        }
    };
    let seconds = seconds.max(1e-9);
    let total = (dims.0 + dims.1 + dims.2).max(1);
    Ok(BenchRecord {
        algorithm: alg.tag().to_string(),
        m,
        n: dims.0,
        nx: dims.1,
        ny: dims.2,
        repeat,
        seconds,
        normalized_seconds: seconds / (m as f64 * (total * total) as f64),
    })
}

/// Runs every (algorithm, m, repeat) cell sequentially.
///
/// Failing cells are collected rather than aborting the run. Records come
/// back sorted by (algorithm, m, repeat).
pub fn run_grid(cfg: &BenchConfig) -> anyhow::Result<GridResult> {
    cfg.validate()?;
    let mut algorithms = cfg.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();

    let mut out = GridResult::default();
    for &alg in &algorithms {
        for &m in &cfg.m_grid {
            let dims = (cfg.n.resolve(m), cfg.nx.resolve(m), cfg.ny.resolve(m));
            for repeat in 0..cfg.repeats {
                if alg == Algorithm::Dense && m > cfg.dense_max_m {
                    out.failures.push(CellFailure {
                        algorithm: alg,
                        m,
                        repeat,
                        error: format!("skipped: m exceeds dense cap {}", cfg.dense_max_m),
                    });
                    continue;
                }
                match run_cell(alg, m, dims, repeat, cfg.seed) {
                    Ok(r) => out.records.push(r),
                    Err(e) => out.failures.push(CellFailure {
                        algorithm: alg,
                        m,
                        repeat,
                        error: e.to_string(),
                    }),
                }
            }
        }
    }
    Ok(out)
}

pub fn write_records<W: io::Write>(w: W, records: &[BenchRecord]) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if records.is_empty() {
        wtr.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records<R: io::Read>(r: R) -> anyhow::Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        bail!("unexpected CSV header `{}`", header.join(","));
    }
    rdr.deserialize()
        .map(|r| r.map_err(anyhow::Error::from))
        .collect()
}

pub fn write_failures<W: io::Write>(w: W, failures: &[CellFailure]) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["algorithm", "m", "repeat", "error"])?;
    for f in failures {
        wtr.write_record([
            f.algorithm.tag(),
            &f.m.to_string(),
            &f.repeat.to_string(),
            &f.error,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Median and 10%/90% quantiles for one (algorithm, m) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub runs: usize,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub normalized_median: f64,
    pub normalized_q10: f64,
    pub normalized_q90: f64,
}

/// Per-(algorithm, m) statistics. Repeat 0 is treated as warm-up and
/// excluded when a cell has at least three repeats.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, usize)> =
        records.iter().map(|r| (r.algorithm.clone(), r.m)).collect();
    keys.sort();
    keys.dedup();

    keys.into_iter()
        .map(|(alg, m)| {
            let cell: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.algorithm == alg && r.m == m)
                .collect();
            let used: Vec<&BenchRecord> = if cell.len() >= 3 {
                cell.iter().copied().filter(|r| r.repeat != 0).collect()
            } else {
                cell.clone()
            };
            let secs: Vec<f64> = used.iter().map(|r| r.seconds).collect();
            let norm: Vec<f64> = used.iter().map(|r| r.normalized_seconds).collect();
            let first = cell[0];
            SummaryRow {
                algorithm: alg,
                m,
                n: first.n,
                nx: first.nx,
                ny: first.ny,
                runs: secs.len(),
                median: median(&secs).unwrap_or(f64::NAN),
                q10: quantile(&secs, 0.1).unwrap_or(f64::NAN),
                q90: quantile(&secs, 0.9).unwrap_or(f64::NAN),
                normalized_median: median(&norm).unwrap_or(f64::NAN),
                normalized_q10: quantile(&norm, 0.1).unwrap_or(f64::NAN),
                normalized_q90: quantile(&norm, 0.9).unwrap_or(f64::NAN),
            }
        })
        .collect()
}

pub fn write_summary<W: io::Write>(w: W, rows: &[SummaryRow]) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `results.csv` → `results.<suffix>.csv`
pub fn sibling_path(out: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(
            parse_m_grid("1024:8192:x2").unwrap(),
            vec![1024, 2048, 4096, 8192]
        );
        assert_eq!(parse_m_grid("64,128").unwrap(), vec![64, 128]);
        assert_eq!(parse_m_grid("10:100:x3").unwrap(), vec![10, 30, 90]);
        assert!(parse_m_grid("128,64").is_err());
        assert!(parse_m_grid("0:8:x2").is_err());
        assert!(parse_m_grid("a,b").is_err());
    }

    #[test]
    fn rank_spec_parsing() {
        assert_eq!("m/3".parse::<RankSpec>().unwrap().resolve(100), 33);
        assert_eq!("4".parse::<RankSpec>().unwrap().resolve(100), 4);
        assert!("m/2".parse::<RankSpec>().is_err());
        assert!("svdd".parse::<Algorithm>().is_err());
    }

    #[test]
    fn dense_grid_shape() {
        let cfg = BenchConfig {
            m_grid: vec![64, 128],
            repeats: 3,
            algorithms: vec![Algorithm::Dense],
            ..BenchConfig::default()
        };
        let res = run_grid(&cfg).unwrap();
        assert_eq!(res.records.len(), 6);
        assert!(res.failures.is_empty());
        let summary = summarize(&res.records);
        assert_eq!(summary.len(), 2);
        assert!(summary.iter().all(|s| s.runs == 2 && s.median > 0.0));
    }

    #[test]
    fn oversized_cells_are_recorded_as_failures() {
        let cfg = BenchConfig {
            m_grid: vec![2, 600],
            repeats: 1,
            algorithms: vec![Algorithm::Feigh, Algorithm::Dense],
            ..BenchConfig::default()
        };
        let res = run_grid(&cfg).unwrap();
        // m = 2 cannot hold rank 3; m = 600 exceeds the dense cap.
        assert_eq!(res.failures.len(), 3);
        assert_eq!(res.records.len(), 1);
        assert_eq!(res.records[0].algorithm, "feigh");
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let cfg = BenchConfig {
            m_grid: vec![16, 32],
            repeats: 2,
            algorithms: vec![Algorithm::Svd, Algorithm::Feigh],
            ..BenchConfig::default()
        };
        let res = run_grid(&cfg).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &res.records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 1 + 8);
        let back = read_records(buf.as_slice()).unwrap();
        assert_eq!(back, res.records);
        // sorted by algorithm, then m, then repeat
        let keys: Vec<_> = back
            .iter()
            .map(|r| (r.algorithm.clone(), r.m, r.repeat))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn deterministic_except_seconds() {
        let cfg = BenchConfig {
            m_grid: vec![16, 32],
            repeats: 2,
            algorithms: vec![Algorithm::Feigh, Algorithm::Svd],
            ..BenchConfig::default()
        };
        let strip = |rs: Vec<BenchRecord>| -> Vec<_> {
            rs.into_iter()
                .map(|r| (r.algorithm, r.m, r.n, r.nx, r.ny, r.repeat))
                .collect()
        };
        let a = strip(run_grid(&cfg).unwrap().records);
        let b = strip(run_grid(&cfg).unwrap().records);
        assert_eq!(a, b);
    }

    #[test]
    fn sibling_names() {
        assert_eq!(
            sibling_path(Path::new("/tmp/results.csv"), "summary"),
            Path::new("/tmp/results.summary.csv")
        );
    }
}
