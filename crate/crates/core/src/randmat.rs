//! Seeded Monte Carlo over complex Gaussian matrix ensembles.
//!
//! Every `(trial, label)` pair draws its matrix from its own ChaCha stream
//! derived from the run seed, so results do not depend on how trials are
//! scheduled across workers.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::moments::{eta_moment, OperatorSpec, VarianceProfile};
use crate::rational::{self, Rational};
use crate::word::StarWord;
use crate::Limits;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnsembleKind {
    /// All entries with variance `1/n`.
    IidSquare,
    /// Variance `1/n` strictly above the diagonal, zero elsewhere.
    StrictUpper,
    /// Entries in block `(p, q)` have variance `v[p][q]/n`.
    BlockProfile(VarianceProfile),
}

impl EnsembleKind {
    /// The operator whose moments are the `n → ∞` limits.
    pub fn limit_operator(&self) -> OperatorSpec {
        match self {
            EnsembleKind::IidSquare => OperatorSpec::Circular,
            EnsembleKind::StrictUpper => OperatorSpec::Triangular,
            EnsembleKind::BlockProfile(p) => OperatorSpec::Profile(p.clone()),
        }
    }

    pub fn resolution(&self) -> Option<usize> {
        match self {
            EnsembleKind::BlockProfile(p) => Some(p.r()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub n: usize,
    pub kind: EnsembleKind,
}

impl EnsembleSpec {
    pub fn new(n: usize, kind: EnsembleKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parse("matrix dimension must be at least 1".into()));
        }
        Ok(EnsembleSpec { n, kind })
    }
}

/// Splits `n` rows into blocks proportional to `widths` by largest remainder;
/// ties go to the lower index.
pub fn block_sizes(n: usize, widths: &[Rational]) -> Vec<usize> {
    let total = Rational::from_integer(n.into());
    let exact: Vec<Rational> = widths.iter().map(|w| w * &total).collect();
    let mut sizes: Vec<usize> = exact
        .iter()
        .map(|x| x.floor().to_integer().to_usize().expect("fits"))
        .collect();
    let short = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..widths.len()).collect();
    // stable sort keeps lower indices first among equal remainders
    order.sort_by(|&a, &b| exact[b].fract().cmp(&exact[a].fract()));
    for &i in order.iter().take(short) {
        sizes[i] += 1;
    }
    sizes
}

/// Dense complex matrix with separate real and imaginary planes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.n + j;
        Complex64::new(self.re[k], self.im[k])
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        let k = i * self.n + j;
        self.re[k] = z.re;
        self.im[k] = z.im;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.re[j * n + i] = self.re[i * n + j];
                out.im[j * n + i] = -self.im[i * n + j];
            }
        }
        out
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        let n = self.n;
        assert_eq!(n, rhs.n, "dimension mismatch");
        let mut out = Self::zeros(n);
        for i in 0..n {
            let (ore, oim) = (
                &mut out.re[i * n..(i + 1) * n],
                &mut out.im[i * n..(i + 1) * n],
            );
            for k in 0..n {
                let (ar, ai) = (self.re[i * n + k], self.im[i * n + k]);
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                let (br, bi) = (&rhs.re[k * n..(k + 1) * n], &rhs.im[k * n..(k + 1) * n]);
                for j in 0..n {
                    ore[j] += ar * br[j] - ai * bi[j];
                    oim[j] += ar * bi[j] + ai * br[j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Sum of `|a_ij|²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.re.iter().chain(&self.im).map(|x| x * x).sum()
    }
}

/// RNG for one `(trial, label)` pair.
pub fn substream(seed: u64, trial: u64, label: u32) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((trial << 20) | label as u64);
    rng
}

/// One matrix from the ensemble. Real and imaginary parts are independent
/// normals of variance `v/(2n)`; zero-variance entries are exact zeros.
pub fn sample_matrix(spec: &EnsembleSpec, rng: &mut ChaCha20Rng) -> CMatrix {
    let n = spec.n;
    let base = 1.0 / (2.0 * n as f64);
    let mut m = CMatrix::zeros(n);
    let mut fill = |i: usize, j: usize, var_half: f64, rng: &mut ChaCha20Rng| {
        let sd = var_half.sqrt();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        m.set(i, j, Complex64::new(sd * re, sd * im));
    };
    match &spec.kind {
        EnsembleKind::IidSquare => {
            for i in 0..n {
                for j in 0..n {
                    fill(i, j, base, rng);
                }
            }
        }
        EnsembleKind::StrictUpper => {
            for i in 0..n {
                for j in i + 1..n {
                    fill(i, j, base, rng);
                }
            }
        }
        EnsembleKind::BlockProfile(prof) => {
            let sizes = block_sizes(n, prof.widths());
            let block_of: Vec<usize> = sizes
                .iter()
                .enumerate()
                .flat_map(|(b, &len)| std::iter::repeat_n(b, len))
                .collect();
            let var: Vec<Vec<f64>> = prof
                .values()
                .iter()
                .map(|row| row.iter().map(rational::to_f64).collect())
                .collect();
            for i in 0..n {
                for j in 0..n {
                    let v = var[block_of[i]][block_of[j]];
                    if v != 0.0 {
                        fill(i, j, v * base, rng);
                    }
                }
            }
        }
    }
    m
}

/// `tr(W)/n` for one trial, with one fresh matrix per distinct label.
pub fn trial_value(w: &StarWord, spec: &EnsembleSpec, seed: u64, trial: u64) -> Complex64 {
    let n = spec.n;
    if w.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let mut plain = std::collections::BTreeMap::new();
    let mut starred = std::collections::BTreeMap::new();
    for label in w.labels() {
        let mut rng = substream(seed, trial, label);
        plain.insert(label, sample_matrix(spec, &mut rng));
    }
    for l in w.letters().iter().filter(|l| l.starred) {
        starred
            .entry(l.label)
            .or_insert_with(|| plain[&l.label].adjoint());
    }
    let pick = |i: usize| {
        let l = w.letters()[i];
        if l.starred {
            &starred[&l.label]
        } else {
            &plain[&l.label]
        }
    };
    let mut prod = pick(0).clone();
    for i in 1..w.len() {
        prod = prod.mul(pick(i));
    }
    prod.trace() / n as f64
}

fn word_string<S: Serializer>(w: &StarWord, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&w.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    /// Mean of the real parts of `tr(W)/n`.
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; `None` for one trial.
    pub stderr: Option<f64>,
    pub trials: usize,
    pub n: usize,
    #[serde(serialize_with = "word_string")]
    pub word: StarWord,
    /// Mean of the imaginary parts, expected to be near zero.
    pub mean_imag: f64,
}

/// Per-trial values of `tr(W)/n`, ordered by trial index.
pub fn trial_values(w: &StarWord, spec: &EnsembleSpec, trials: usize, seed: u64) -> Vec<Complex64> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_value(w, spec, seed, t))
        .collect()
}

pub fn estimate_moment(
    w: &StarWord,
    spec: &EnsembleSpec,
    trials: usize,
    seed: u64,
) -> MomentEstimate {
    assert!(trials >= 1, "at least one trial");
    let values = trial_values(w, spec, trials, seed);
    summarize(w, spec.n, &values)
}

fn summarize(w: &StarWord, n: usize, values: &[Complex64]) -> MomentEstimate {
    let t = values.len() as f64;
    let mean = values.iter().map(|z| z.re).sum::<f64>() / t;
    let mean_imag = values.iter().map(|z| z.im).sum::<f64>() / t;
    let stderr = (values.len() >= 2).then(|| {
        let var = values.iter().map(|z| (z.re - mean).powi(2)).sum::<f64>() / (t - 1.0);
        (var / t).sqrt()
    });
    MomentEstimate {
        mean,
        stderr,
        trials: values.len(),
        n,
        word: w.clone(),
        mean_imag,
    }
}

/// Exact limit of the ensemble's moments as `n → ∞`.
pub fn ensemble_prediction(w: &StarWord, kind: &EnsembleKind, limits: &Limits) -> Result<Rational> {
    Ok(eta_moment(w, &kind.limit_operator(), limits)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub r: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub exact_num: String,
    pub exact_den: String,
    pub abs_gap: f64,
}

/// Estimates for each ensemble next to the exact limit prediction.
pub fn convergence_report(
    w: &StarWord,
    family: &[EnsembleSpec],
    trials: usize,
    seed: u64,
    limits: &Limits,
) -> Result<Vec<ReportRow>> {
    family
        .iter()
        .map(|spec| {
            let exact = ensemble_prediction(w, &spec.kind, limits)?;
            let est = estimate_moment(w, spec, trials, seed);
            Ok(ReportRow {
                n: spec.n,
                r: spec.kind.resolution(),
                trials,
                seed,
                estimate: est.mean,
                stderr: est.stderr,
                exact_num: exact.numer().to_string(),
                exact_den: exact.denom().to_string(),
                abs_gap: (est.mean - rational::to_f64(&exact)).abs(),
            })
        })
        .collect()
}

pub fn report_csv(rows: &[ReportRow]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.serialize(row)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}
