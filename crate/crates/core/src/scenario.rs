//! Instance and random-state generation, plus the CSV sample archive.
//!
//! Channel covariances follow the exponential correlation model: entry `(m, n)` of
//! `R_jik` is `g · α^|m−n| · e^{jβ(m−n)}`, with a fresh phase `β ~ U[0, 2π)` per
//! `(j, i, k)` and gain `g = 1` inside the serving cell, `g = cross_gain` otherwise.
//!
//! Random states carry per-BS buy price `a`, sell price `b = ratio · a` and harvested
//! energy `e`. Prices are uniform around their mean; the renewable output is Weibull,
//! exponential, or a fixed value.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BsState, CMatrix, SystemModel, C64};

/// Distribution family of the harvested renewable energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResFamily {
    Weibull,
    Exponential,
    /// Every sample equals the configured mean.
    Custom,
}

/// Generation parameters for one scenario.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cells: usize,
    pub users: usize,
    pub antennas: usize,
    /// Antenna correlation coefficient `α ∈ [0, 1)`.
    pub correlation: f64,
    /// Large-scale gain applied to channels from neighbouring cells.
    pub cross_gain: f64,
    /// Linear SINR target shared by every user. The default 0.5 keeps 4×4 users on
    /// 8 correlated antennas feasible; targets near 1 and above are usually
    /// infeasible for randomly drawn phases.
    pub sinr_target: f64,
    /// Noise variance (W); the default puts the minimum sum power near 48 W.
    pub noise: f64,
    pub price_mean: f64,
    /// Width of the uniform buy-price support, centred on `price_mean`.
    pub price_width: f64,
    /// `b = sell_ratio · a`.
    pub sell_ratio: f64,
    /// One price draw for all BSs (grid-wide) instead of one per BS.
    pub shared_prices: bool,
    pub res_family: ResFamily,
    pub res_mean: f64,
    /// Weibull shape; the scale is solved from `res_mean`.
    pub res_shape: f64,
    pub samples: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cells: 4,
            users: 4,
            antennas: 8,
            correlation: 0.9,
            cross_gain: 0.25,
            sinr_target: 0.5,
            noise: 18.0,
            price_mean: 1.0,
            price_width: 1.0,
            sell_ratio: 0.9,
            shared_prices: true,
            res_family: ResFamily::Weibull,
            res_mean: 3.75,
            res_shape: 2.0,
            samples: 500,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.cells == 0 || self.users == 0 {
            return fail("cells and users must be at least 1".into());
        }
        if self.antennas == 0 {
            return fail("antennas must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return fail(format!("correlation {} outside [0, 1)", self.correlation));
        }
        if !(self.cross_gain >= 0.0 && self.cross_gain.is_finite()) {
            return fail(format!("cross_gain {} must be >= 0", self.cross_gain));
        }
        if !(self.sinr_target > 0.0 && self.sinr_target.is_finite()) {
            return fail(format!("sinr_target {} must be > 0", self.sinr_target));
        }
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return fail(format!("noise {} must be > 0", self.noise));
        }
        if !(0.0..=1.0).contains(&self.sell_ratio) {
            return fail(format!("sell_ratio {} outside [0, 1]", self.sell_ratio));
        }
        if !(self.price_width >= 0.0 && self.price_mean - 0.5 * self.price_width >= 0.0) {
            return fail(format!(
                "price support [{}, {}] must be non-negative",
                self.price_mean - 0.5 * self.price_width,
                self.price_mean + 0.5 * self.price_width
            ));
        }
        if !(self.res_mean >= 0.0 && self.res_mean.is_finite()) {
            return fail(format!("res_mean {} must be >= 0", self.res_mean));
        }
        if self.res_family == ResFamily::Weibull && !(self.res_shape > 0.0 && self.res_shape.is_finite()) {
            return fail(format!("res_shape {} must be > 0", self.res_shape));
        }
        if self.samples == 0 {
            return fail("samples must be at least 1".into());
        }
        Ok(())
    }

    /// Weibull scale giving mean `res_mean` at shape `res_shape`.
    pub fn weibull_scale(&self) -> f64 {
        self.res_mean / statrs::function::gamma::gamma(1.0 + 1.0 / self.res_shape)
    }
}

/// `g · α^|m−n| · e^{jβ(m−n)}`.
pub fn exponential_correlation(antennas: usize, alpha: f64, phase: f64, gain: f64) -> CMatrix {
    CMatrix::from_fn(antennas, antennas, |m, n| {
        let d = m as f64 - n as f64;
        C64::from_polar(gain * alpha.powi((m as i32 - n as i32).abs()), phase * d)
    })
}

/// Draws channel covariances for every `(j, i, k)`.
pub fn make_channels<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<SystemModel> {
    cfg.validate()?;
    let phase = Uniform::new(0.0, TAU).map_err(|e| Error::Config(e.to_string()))?;
    let (cells, users) = (cfg.cells, cfg.users);
    let mut channels = Vec::with_capacity(cells);
    for j in 0..cells {
        let mut from_bs = Vec::with_capacity(cells);
        for i in 0..cells {
            let gain = if i == j { 1.0 } else { cfg.cross_gain };
            let to_cell = (0..users)
                .map(|_| exponential_correlation(cfg.antennas, cfg.correlation, phase.sample(rng), gain))
                .collect();
            from_bs.push(to_cell);
        }
        channels.push(from_bs);
    }
    SystemModel::new(
        cfg.antennas,
        channels,
        vec![vec![cfg.sinr_target; users]; cells],
        vec![vec![cfg.noise; users]; cells],
    )
}

/// One realization of prices and harvested energy across all BSs.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomState {
    per_bs: Vec<BsState>,
}

impl RandomState {
    pub fn new(per_bs: Vec<BsState>) -> Result<Self> {
        if per_bs.is_empty() {
            return Err(Error::Input("random state needs at least one BS".into()));
        }
        Ok(Self { per_bs })
    }

    pub fn bs(&self, i: usize) -> &BsState {
        &self.per_bs[i]
    }

    pub fn per_bs(&self) -> &[BsState] {
        &self.per_bs
    }

    pub fn cells(&self) -> usize {
        self.per_bs.len()
    }
}

/// Ordered archive of i.i.d. random states.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDatabase {
    samples: Vec<RandomState>,
    a_max: f64,
}

impl SampleDatabase {
    pub fn new(samples: Vec<RandomState>) -> Result<Self> {
        let cells = samples.first().ok_or(Error::EmptyDatabase)?.cells();
        if samples.iter().any(|s| s.cells() != cells) {
            return Err(Error::Input("samples disagree on the number of BSs".into()));
        }
        let a_max = samples
            .iter()
            .flat_map(|s| s.per_bs.iter().map(BsState::buy))
            .fold(0.0, f64::max);
        Ok(Self { samples, a_max })
    }

    /// A database repeating one state, i.e. a deterministic environment.
    pub fn single(state: RandomState) -> Self {
        let a_max = state.per_bs.iter().map(BsState::buy).fold(0.0, f64::max);
        Self {
            samples: vec![state],
            a_max,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.samples[0].cells()
    }

    pub fn samples(&self) -> &[RandomState] {
        &self.samples
    }

    pub fn get(&self, idx: usize) -> &RandomState {
        &self.samples[idx]
    }

    /// Largest buy price in the archive.
    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    /// The first `n` samples (all of them when `n ≥ len`).
    pub fn truncated(&self, n: usize) -> Self {
        if n >= self.samples.len() || n == 0 {
            return self.clone();
        }
        Self::new(self.samples[..n].to_vec()).expect("non-empty prefix")
    }

    /// States seen by BS `i` across the archive.
    pub fn column(&self, i: usize) -> Vec<BsState> {
        self.samples.iter().map(|s| s.per_bs[i]).collect()
    }

    /// Every state with the harvested energy forced to `e`.
    pub fn with_harvested(&self, e: f64) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let per_bs = s.per_bs.iter().map(|b| b.with_harvested(e)).collect::<Result<_>>()?;
                RandomState::new(per_bs)
            })
            .collect::<Result<_>>()?;
        Self::new(samples)
    }

    /// Cells relabelled so that new BS `c` is old BS `perm[c]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| RandomState::new(perm.iter().map(|&p| s.per_bs[p]).collect()))
            .collect::<Result<_>>()?;
        Self::new(samples)
    }
}

fn price_dist(cfg: &ScenarioConfig) -> Result<Option<Uniform<f64>>> {
    if cfg.price_width == 0.0 {
        return Ok(None);
    }
    let lo = cfg.price_mean - 0.5 * cfg.price_width;
    Uniform::new(lo, lo + cfg.price_width)
        .map(Some)
        .map_err(|e| Error::Config(format!("price distribution: {e}")))
}

enum ResDist {
    Weibull(Weibull<f64>),
    Exponential(Exp<f64>),
    Fixed(f64),
}

impl ResDist {
    fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let bad = |e: String| Error::Config(format!("RES distribution: {e}"));
        Ok(match cfg.res_family {
            _ if cfg.res_mean == 0.0 => ResDist::Fixed(0.0),
            ResFamily::Weibull => {
                ResDist::Weibull(Weibull::new(cfg.weibull_scale(), cfg.res_shape).map_err(|e| bad(e.to_string()))?)
            }
            ResFamily::Exponential => {
                ResDist::Exponential(Exp::new(1.0 / cfg.res_mean).map_err(|e| bad(e.to_string()))?)
            }
            ResFamily::Custom => ResDist::Fixed(cfg.res_mean),
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ResDist::Weibull(d) => d.sample(rng),
            ResDist::Exponential(d) => d.sample(rng),
            ResDist::Fixed(v) => *v,
        }
    }
}

/// Draws `n` i.i.d. random states.
pub fn sample_states<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R, n: usize) -> Result<SampleDatabase> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let prices = price_dist(cfg)?;
    let res = ResDist::from_config(cfg)?;
    // Separate streams keep the price draws identical across RES settings.
    let mut price_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    let mut res_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    let mut draw_price = || prices.as_ref().map_or(cfg.price_mean, |d| d.sample(&mut price_rng));

    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let shared = draw_price();
        let mut per_bs = Vec::with_capacity(cfg.cells);
        for _ in 0..cfg.cells {
            let a = if cfg.shared_prices { shared } else { draw_price() };
            let e = res.sample(&mut res_rng);
            per_bs.push(BsState::new(a, cfg.sell_ratio * a, e)?);
        }
        samples.push(RandomState::new(per_bs)?);
    }
    SampleDatabase::new(samples)
}

const HEADER: [&str; 5] = ["sample_index", "bs_index", "a", "b", "e"];

/// Writes the archive as CSV `sample_index,bs_index,a,b,e`, one row per (sample, BS).
pub fn write_database<W: Write>(db: &SampleDatabase, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for (n, s) in db.samples.iter().enumerate() {
        for (i, bs) in s.per_bs.iter().enumerate() {
            w.write_record([
                n.to_string(),
                i.to_string(),
                bs.buy().to_string(),
                bs.sell().to_string(),
                bs.harvested().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_database(db: &SampleDatabase, path: &Path) -> Result<()> {
    write_database(db, BufWriter::new(File::create(path)?))
}

pub fn load_database(path: &Path) -> Result<SampleDatabase> {
    read_database(BufReader::new(File::open(path)?), path)
}

/// Parses an archive. Accepts the five-column layout written by [`write_database`]
/// and a four-column `bs_index,a,b,e` layout where each sample starts at `bs_index` 0.
pub fn read_database<R: Read>(input: R, origin: &Path) -> Result<SampleDatabase> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    let width = header.len();
    let expected: &[&str] = match width {
        5 => &HEADER,
        4 => &HEADER[1..],
        _ if header.iter().all(str::is_empty) => return Err(Error::EmptyDatabase),
        _ => return Err(parse_err(1, format!("expected 4 or 5 columns in header, got {width}"))),
    };
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_err(1, format!("header must be {}", expected.join(","))));
    }

    let mut samples: Vec<Vec<BsState>> = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let line = row + 2;
        let record = record?;
        if record.len() != width {
            return Err(parse_err(line, format!("expected {width} columns, got {}", record.len())));
        }
        let field = |c: usize| -> Result<f64> {
            record[c]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("column {} is not a number: {:?}", expected[c], &record[c])))
        };
        let index = |c: usize| -> Result<usize> {
            record[c]
                .parse::<usize>()
                .map_err(|_| parse_err(line, format!("column {} is not an index: {:?}", expected[c], &record[c])))
        };
        let off = width - 4;
        let bs = index(off)?;
        let state = BsState::new(field(off + 1)?, field(off + 2)?, field(off + 3)?)
            .map_err(|e| parse_err(line, e.to_string()))?;

        let sample = if width == 5 {
            index(0)?
        } else if bs == 0 {
            samples.len()
        } else {
            samples.len().saturating_sub(1)
        };
        if sample == samples.len() {
            samples.push(Vec::new());
        }
        if sample + 1 != samples.len() {
            return Err(parse_err(line, format!("sample index {sample} out of order")));
        }
        let current = samples.last_mut().expect("pushed above");
        if bs != current.len() {
            return Err(parse_err(line, format!("expected bs_index {}, got {bs}", current.len())));
        }
        current.push(state);
    }

    if samples.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let cells = samples[0].len();
    if let Some(n) = samples.iter().position(|s| s.len() != cells) {
        return Err(parse_err(0, format!("sample {n} has {} BSs, expected {cells}", samples[n].len())));
    }
    SampleDatabase::new(samples.into_iter().map(RandomState::new).collect::<Result<_>>()?)
}
