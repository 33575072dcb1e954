//! Datasets for treatment effect estimation: a synthetic generator whose
//! potential-outcome surfaces are stored alongside the factual draws, CSV
//! ingestion/serialization, splitting, and treated-arm subsampling.

use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::seeds;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeType {
    Continuous,
    Binary,
}

/// Covariates, treatment and factual outcome, plus (when known) the
/// noiseless potential-outcome surfaces and the true propensity.
#[derive(Clone, Debug)]
pub struct CausalDataset {
    pub x: Array2<f64>,
    pub t: Vec<u8>,
    pub y: Vec<f64>,
    pub mu0_true: Option<Vec<f64>>,
    pub mu1_true: Option<Vec<f64>>,
    pub pi_true: Option<Vec<f64>>,
    pub outcome_type: OutcomeType,
}

impl CausalDataset {
    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_treated(&self) -> usize {
        self.t.iter().filter(|&&t| t == 1).count()
    }

    pub fn has_counterfactuals(&self) -> bool {
        self.mu0_true.is_some() && self.mu1_true.is_some()
    }

    /// True per-unit effects mu1 - mu0; errors when surfaces are absent.
    pub fn true_effects(&self) -> Result<Vec<f64>> {
        match (&self.mu0_true, &self.mu1_true) {
            (Some(m0), Some(m1)) => Ok(m1.iter().zip(m0).map(|(a, b)| a - b).collect()),
            _ => Err(Error::data("counterfactuals unavailable")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.x.nrows() != n || self.y.len() != n {
            return Err(Error::data("X, T, Y row counts disagree"));
        }
        for opt in [&self.mu0_true, &self.mu1_true, &self.pi_true] {
            if let Some(v) = opt {
                if v.len() != n {
                    return Err(Error::data("surface length disagrees with N"));
                }
                if !v.iter().all(|e| e.is_finite()) {
                    return Err(Error::data("non-finite surface entry"));
                }
            }
        }
        if !self.x.iter().all(|e| e.is_finite()) || !self.y.iter().all(|e| e.is_finite()) {
            return Err(Error::data("non-finite entry in X or Y"));
        }
        if !self.t.iter().any(|&t| t == 0) || !self.t.iter().any(|&t| t == 1) {
            return Err(Error::data("treatment groups must both be nonempty"));
        }
        if self.t.iter().any(|&t| t > 1) {
            return Err(Error::data("treatment must be binary"));
        }
        Ok(())
    }

    /// Row subset in the given index order.
    pub fn select(&self, indices: &[usize]) -> CausalDataset {
        let take = |v: &Option<Vec<f64>>| {
            v.as_ref().map(|v| indices.iter().map(|&i| v[i]).collect::<Vec<f64>>())
        };
        CausalDataset {
            x: ndarray::Array2::from_shape_fn((indices.len(), self.d()), |(r, c)| {
                self.x[[indices[r], c]]
            }),
            t: indices.iter().map(|&i| self.t[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            mu0_true: take(&self.mu0_true),
            mu1_true: take(&self.mu1_true),
            pi_true: take(&self.pi_true),
            outcome_type: self.outcome_type,
        }
    }

    /// Indices of rows in each treatment group.
    pub fn group_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let mut g0 = Vec::new();
        let mut g1 = Vec::new();
        for (i, &t) in self.t.iter().enumerate() {
            if t == 1 {
                g1.push(i);
            } else {
                g0.push(i);
            }
        }
        (g0, g1)
    }
}

/// Knobs of the synthetic process. `confounding_strength` scales the
/// propensity logit; `shared_structure` in [0,1] interpolates the effect
/// between fully heterogeneous (0) and a shared constant shift (1).
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct DgpConfig {
    pub n: usize,
    pub d: usize,
    pub confounding_strength: f64,
    pub shared_structure: f64,
    pub noise_sd: f64,
    pub binary_outcome: bool,
}

impl Default for DgpConfig {
    fn default() -> Self {
        DgpConfig {
            n: 1000,
            d: 10,
            confounding_strength: 1.0,
            shared_structure: 0.9,
            noise_sd: 0.5,
            binary_outcome: false,
        }
    }
}

impl DgpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 20 {
            return Err(Error::config("dgp n must be at least 20"));
        }
        if self.d == 0 {
            return Err(Error::config("dgp d must be at least 1"));
        }
        if self.noise_sd < 0.0 {
            return Err(Error::config("noise_sd must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.shared_structure) {
            return Err(Error::config("shared_structure must lie in [0, 1]"));
        }
        Ok(())
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Fixed unit-norm coefficient vectors for the propensity logit, the base
/// surface and the heterogeneous effect. They depend only on `d`, so every
/// seed draws samples from the same population.
fn dgp_coefficients(d: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let draw = |salt: u64| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(0x5EED_D6F0, salt ^ d as u64));
        let mut beta: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        if norm > 0.0 {
            for b in &mut beta {
                *b /= norm;
            }
        }
        beta
    };
    (draw(101), draw(202), draw(303))
}

/// Draw a dataset: X standard normal, T from a confounded propensity,
/// outcomes from surfaces that share structure across arms. The stored mu
/// surfaces are noiseless.
pub fn generate_synthetic(cfg: &DgpConfig, seed: u64) -> Result<CausalDataset> {
    generate_with_streams(cfg, seeds::mix(seed, 10), seeds::mix(seed, 11), seeds::mix(seed, 12))
}

/// Internal variant with separate sample/assignment/noise streams; the
/// noise stream influences Y only, never the surfaces.
pub(crate) fn generate_with_streams(
    cfg: &DgpConfig,
    x_seed: u64,
    t_seed: u64,
    noise_seed: u64,
) -> Result<CausalDataset> {
    cfg.validate()?;
    let (n, d) = (cfg.n, cfg.d);
    let (beta_pi, beta_b, beta_tau) = dgp_coefficients(d);

    let mut x_rng = ChaCha8Rng::seed_from_u64(x_seed);
    let x = Array2::from_shape_fn((n, d), |_| x_rng.sample::<f64, _>(StandardNormal));

    let mut t_rng = ChaCha8Rng::seed_from_u64(t_seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(noise_seed);

    let mut t = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut mu0 = Vec::with_capacity(n);
    let mut mu1 = Vec::with_capacity(n);
    let mut pi = Vec::with_capacity(n);

    for i in 0..n {
        let row = x.row(i);
        let lin_pi: f64 = row.iter().zip(&beta_pi).map(|(a, b)| a * b).sum();
        let p = sigmoid(cfg.confounding_strength * lin_pi);
        let ti = u8::from(t_rng.gen::<f64>() < p);

        let lin_b: f64 = row.iter().zip(&beta_b).map(|(a, b)| a * b).sum();
        let base = lin_b.sin() + 0.5 * row[0] * row[0];
        let lin_tau: f64 = row.iter().zip(&beta_tau).map(|(a, b)| a * b).sum();
        let effect = cfg.shared_structure * 0.5 + (1.0 - cfg.shared_structure) * lin_tau;
        let (m0, m1) = (base, base + effect);

        // both arms consume noise so the factual draw is seed-stable
        let e0: f64 = noise_rng.sample(StandardNormal);
        let e1: f64 = noise_rng.sample(StandardNormal);
        let (m0, m1, yi) = if cfg.binary_outcome {
            let (p0, p1) = (sigmoid(m0), sigmoid(m1));
            let u = noise_rng.gen::<f64>();
            let prob = if ti == 1 { p1 } else { p0 };
            (p0, p1, f64::from(u < prob))
        } else {
            let y0 = m0 + cfg.noise_sd * e0;
            let y1 = m1 + cfg.noise_sd * e1;
            (m0, m1, if ti == 1 { y1 } else { y0 })
        };

        t.push(ti);
        y.push(yi);
        mu0.push(m0);
        mu1.push(m1);
        pi.push(p);
    }

    let data = CausalDataset {
        x,
        t,
        y,
        mu0_true: Some(mu0),
        mu1_true: Some(mu1),
        pi_true: Some(pi),
        outcome_type: if cfg.binary_outcome { OutcomeType::Binary } else { OutcomeType::Continuous },
        };
    if !data.t.iter().any(|&v| v == 0) || !data.t.iter().any(|&v| v == 1) {
        return Err(Error::data(
            "degenerate treatment draw: all units landed in one group; weaken confounding_strength",
        ));
    }
    Ok(data)
}

/// Column names used when reading a CSV file. Covariates are every column
/// `<x_prefix><index>` with contiguous indices from 0; other columns are
/// matched by name and surface/propensity columns are optional.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct CsvSchema {
    pub x_prefix: String,
    pub t: String,
    pub y: String,
    pub mu0: String,
    pub mu1: String,
    pub pi: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            x_prefix: "x".to_string(),
            t: "t".to_string(),
            y: "y".to_string(),
            mu0: "mu0".to_string(),
            mu1: "mu1".to_string(),
            pi: "pi".to_string(),
        }
    }
}

/// Read a dataset from a headered CSV file. Unrecognized columns are
/// ignored; surface columns are loaded when present.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<CausalDataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();

    let mut x_cols: Vec<(usize, usize)> = Vec::new(); // (covariate index, column)
    for (c, h) in headers.iter().enumerate() {
        if let Some(rest) = h.strip_prefix(&schema.x_prefix) {
            if let Ok(k) = rest.parse::<usize>() {
                x_cols.push((k, c));
            }
        }
    }
    x_cols.sort_unstable();
    for (expect, &(k, _)) in x_cols.iter().enumerate() {
        if k != expect {
            return Err(Error::data(format!(
                "covariate columns must be contiguous from {}0; missing {}{}",
                schema.x_prefix, schema.x_prefix, expect
            )));
        }
    }
    if x_cols.is_empty() {
        return Err(Error::data(format!("missing column {}0", schema.x_prefix)));
    }

    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_col = find(&schema.t)
        .ok_or_else(|| Error::data(format!("missing column {}", schema.t)))?;
    let y_col = find(&schema.y)
        .ok_or_else(|| Error::data(format!("missing column {}", schema.y)))?;
    let mu0_col = find(&schema.mu0);
    let mu1_col = find(&schema.mu1);
    let pi_col = find(&schema.pi);

    let d = x_cols.len();
    let mut x_data: Vec<f64> = Vec::new();
    let mut t = Vec::new();
    let mut y = Vec::new();
    let mut mu0 = Vec::new();
    let mut mu1 = Vec::new();
    let mut pi = Vec::new();

    let parse = |field: &str, row: usize, col: &str| -> Result<f64> {
        field.trim().parse::<f64>().map_err(|_| {
            Error::data(format!("non-numeric cell '{field}' at row {row}, column {col}"))
        })
    };

    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for &(_, c) in &x_cols {
            x_data.push(parse(&record[c], r, &headers[c])?);
        }
        let tv = parse(&record[t_col], r, &schema.t)?;
        if tv != 0.0 && tv != 1.0 {
            return Err(Error::data(format!("treatment value {tv} at row {r} is not in {{0,1}}")));
        }
        t.push(tv as u8);
        y.push(parse(&record[y_col], r, &schema.y)?);
        if let Some(c) = mu0_col {
            mu0.push(parse(&record[c], r, &schema.mu0)?);
        }
        if let Some(c) = mu1_col {
            mu1.push(parse(&record[c], r, &schema.mu1)?);
        }
        if let Some(c) = pi_col {
            pi.push(parse(&record[c], r, &schema.pi)?);
        }
    }

    let n = t.len();
    let x = Array2::from_shape_vec((n, d), x_data)
        .map_err(|e| Error::data(format!("ragged covariate block: {e}")))?;
    let binary = y.iter().all(|&v| v == 0.0 || v == 1.0);
    let data = CausalDataset {
        x,
        t,
        y,
        mu0_true: (mu0_col.is_some()).then_some(mu0),
        mu1_true: (mu1_col.is_some()).then_some(mu1),
        pi_true: (pi_col.is_some()).then_some(pi),
        outcome_type: if binary { OutcomeType::Binary } else { OutcomeType::Continuous },
    };
    data.validate()?;
    Ok(data)
}

/// Write a dataset in the same schema `load_csv` reads. Surfaces appear only
/// when `with_mu` is set and they are available; the propensity column is
/// written whenever it is known.
pub fn write_csv(data: &CausalDataset, path: &Path, with_mu: bool) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..data.d()).map(|k| format!("x{k}")).collect();
    header.push("t".into());
    header.push("y".into());
    if data.pi_true.is_some() {
        header.push("pi".into());
    }
    let write_mu = with_mu && data.has_counterfactuals();
    if write_mu {
        header.push("mu0".into());
        header.push("mu1".into());
    }
    writer.write_record(&header)?;

    for i in 0..data.n() {
        let mut record: Vec<String> = (0..data.d()).map(|c| data.x[[i, c]].to_string()).collect();
        record.push(data.t[i].to_string());
        record.push(data.y[i].to_string());
        if let Some(pi) = &data.pi_true {
            record.push(pi[i].to_string());
        }
        if write_mu {
            record.push(data.mu0_true.as_ref().unwrap()[i].to_string());
            record.push(data.mu1_true.as_ref().unwrap()[i].to_string());
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

fn rounded(frac: f64, n: usize) -> usize {
    (frac * n as f64).round() as usize
}

/// Disjoint exhaustive (train, val, test) index partition. `test_frac` is
/// taken from the full data, `val_frac` from the remaining train portion.
/// With stratification the allocation happens within each treatment group.
pub fn split_indices(
    data: &CausalDataset,
    test_frac: f64,
    val_frac: f64,
    seed: u64,
    stratify_by_t: bool,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_frac) || !(0.0..1.0).contains(&val_frac) {
        return Err(Error::data("split fractions must lie in [0, 1)"));
    }
    let groups: Vec<Vec<usize>> = if stratify_by_t {
        let (g0, g1) = data.group_indices();
        vec![g0, g1]
    } else {
        vec![(0..data.n()).collect()]
    };

    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for (gi, mut idx) in groups.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 1000 + gi as u64));
        shuffle(&mut idx, &mut rng);
        let n_test = rounded(test_frac, idx.len());
        let n_val = rounded(val_frac, idx.len() - n_test);
        test.extend_from_slice(&idx[..n_test]);
        val.extend_from_slice(&idx[n_test..n_test + n_val]);
        train.extend_from_slice(&idx[n_test + n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();

    if stratify_by_t {
        for (name, part) in [("train", &train), ("val", &val), ("test", &test)] {
            if part.is_empty() {
                continue;
            }
            let treated = part.iter().filter(|&&i| data.t[i] == 1).count();
            if treated == 0 || treated == part.len() {
                return Err(Error::data(format!(
                    "{name} split lost one treatment group; adjust fractions"
                )));
            }
        }
    }
    Ok((train, val, test))
}

/// Materialized three-way split.
pub fn split(
    data: &CausalDataset,
    test_frac: f64,
    val_frac: f64,
    seed: u64,
    stratify_by_t: bool,
) -> Result<(CausalDataset, CausalDataset, CausalDataset)> {
    let (tr, va, te) = split_indices(data, test_frac, val_frac, seed, stratify_by_t)?;
    Ok((data.select(&tr), data.select(&va), data.select(&te)))
}

/// Two-way split used by the experiment harness: the train pool keeps the
/// validation rows (learners split those off themselves).
pub fn train_test_split(
    data: &CausalDataset,
    test_frac: f64,
    seed: u64,
    stratify_by_t: bool,
) -> Result<(CausalDataset, CausalDataset)> {
    let (tr, va, te) = split_indices(data, test_frac, 0.0, seed, stratify_by_t)?;
    debug_assert!(va.is_empty());
    let mut train = tr;
    train.extend(va);
    train.sort_unstable();
    Ok((data.select(&train), data.select(&te)))
}

/// Keep each treated unit with probability `keep_prob`; untreated rows are
/// untouched.
pub fn subsample_treated(data: &CausalDataset, keep_prob: f64, seed: u64) -> Result<CausalDataset> {
    if !(0.0..=1.0).contains(&keep_prob) || keep_prob == 0.0 {
        return Err(Error::data("keep_prob must lie in (0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 77));
    let mut keep = Vec::with_capacity(data.n());
    for (i, &t) in data.t.iter().enumerate() {
        if t == 0 || rng.gen::<f64>() < keep_prob {
            keep.push(i);
        }
    }
    let out = data.select(&keep);
    if out.n_treated() == 0 {
        return Err(Error::data("subsampling removed every treated unit; raise keep_prob"));
    }
    Ok(out)
}

/// Stratified subsample of exactly `size` rows preserving the treated
/// fraction within one unit.
pub fn stratified_subsample(data: &CausalDataset, size: usize, seed: u64) -> Result<CausalDataset> {
    if size > data.n() {
        return Err(Error::data(format!("cannot subsample {size} of {} rows", data.n())));
    }
    let (g0, g1) = data.group_indices();
    let n1 = ((size as f64) * (g1.len() as f64) / (data.n() as f64)).round() as usize;
    let n1 = n1.min(size).min(g1.len());
    let n0 = size - n1;
    if n0 > g0.len() {
        return Err(Error::data("not enough untreated rows for the requested size"));
    }
    if n0 < 2 || n1 < 2 {
        return Err(Error::data("subsample size leaves fewer than 2 rows in a group"));
    }
    let pick = |idx: &[usize], k: usize, salt: u64| -> Vec<usize> {
        let mut v = idx.to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, salt));
        shuffle(&mut v, &mut rng);
        v.truncate(k);
        v
    };
    let mut chosen = pick(&g0, n0, 501);
    chosen.extend(pick(&g1, n1, 502));
    chosen.sort_unstable();
    Ok(data.select(&chosen))
}

/// Fisher-Yates with an explicit RNG so splits stay reproducible.
pub(crate) fn shuffle(indices: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
}
