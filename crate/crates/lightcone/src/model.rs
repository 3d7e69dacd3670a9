//! Concrete power-law 2-local Hamiltonian families on an open chain.
//!
//! Every pair coupling obeys the decay cap `|h_ij| <= h / |i-j|^alpha`.
//! Three built-in families span the frustration dichotomy: a commuting
//! long-range Ising chain, a uniform XX chain, and an XX chain with
//! deterministic pseudo-random `±1` signs per pair. Sites are 0-based.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, OperatorSum, PauliString};
use crate::scale::ScaleBlock;

/// Hamiltonian family tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    IsingLr,
    XxLr,
    RandomSignXx,
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::IsingLr => "ising_lr",
            ModelFamily::XxLr => "xx_lr",
            ModelFamily::RandomSignXx => "random_sign_xx",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ising_lr" => Ok(ModelFamily::IsingLr),
            "xx_lr" => Ok(ModelFamily::XxLr),
            "random_sign_xx" => Ok(ModelFamily::RandomSignXx),
            other => Err(Error::argument(format!("unknown model family '{other}'"))),
        }
    }
}

fn default_onsite_x() -> f64 {
    1.0
}
fn default_onsite_z() -> f64 {
    0.5
}

/// Full specification of a model instance; serializable to JSON with
/// exactly these field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub n_sites: usize,
    pub alpha: f64,
    pub h: f64,
    #[serde(default = "default_onsite_x")]
    pub onsite_x: f64,
    #[serde(default = "default_onsite_z")]
    pub onsite_z: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::argument("n_sites must be >= 2"));
        }
        if self.n_sites > 64 {
            return Err(Error::argument("n_sites must be <= 64"));
        }
        if !(self.alpha > 2.0) {
            return Err(Error::domain(format!(
                "alpha must exceed 2 (got {})",
                self.alpha
            )));
        }
        if !(self.h > 0.0) {
            return Err(Error::argument("h must be positive"));
        }
        Ok(())
    }
}

/// The realized couplings of a model instance: one `OperatorSum` per site
/// pair `(i, j)` with `i < j`, plus on-site field terms.
#[derive(Clone, Debug)]
pub struct CouplingSet {
    pub spec: ModelSpec,
    /// Pair terms keyed by `(i, j)`, `i < j`, in deterministic order.
    pub pair_terms: Vec<((usize, usize), OperatorSum)>,
    pub onsite_terms: Vec<(usize, OperatorSum)>,
}

impl CouplingSet {
    /// Sum of all pair and on-site terms.
    pub fn total_hamiltonian(&self) -> Result<OperatorSum> {
        let mut h = OperatorSum::zero(self.spec.n_sites)?;
        let one = Complex64::new(1.0, 0.0);
        for (_, term) in &self.pair_terms {
            h.add_scaled(term, one)?;
        }
        for (_, term) in &self.onsite_terms {
            h.add_scaled(term, one)?;
        }
        Ok(h)
    }
}

/// splitmix64: the standard 64-bit finalizer-based generator.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic `±1` sign for pair `(i, j)` of an n-site chain.
fn pair_sign(seed: u64, n: usize, i: usize, j: usize) -> f64 {
    let idx = (i * n + j) as u64;
    if splitmix64(seed ^ idx) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Build the coupling set for a model spec. Deterministic: identical specs
/// produce identical coupling sets.
pub fn build_model(spec: &ModelSpec) -> Result<CouplingSet> {
    spec.validate()?;
    let n = spec.n_sites;
    let one = Complex64::new(1.0, 0.0);
    let mut pair_terms = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (j - i) as f64;
            let coeff = spec.h / d.powf(spec.alpha);
            let mut term = OperatorSum::zero(n)?;
            match spec.family {
                ModelFamily::IsingLr => {
                    let mut zz = PauliString::single(n, i, Letter::Z)?;
                    let zj = PauliString::single(n, j, Letter::Z)?;
                    zz = crate::pauli::pauli_mul(&zz, &zj)?;
                    term.add_term(&zz, one * coeff)?;
                }
                ModelFamily::XxLr | ModelFamily::RandomSignXx => {
                    let sign = match spec.family {
                        ModelFamily::RandomSignXx => pair_sign(spec.seed, n, i, j),
                        _ => 1.0,
                    };
                    let xx = crate::pauli::pauli_mul(
                        &PauliString::single(n, i, Letter::X)?,
                        &PauliString::single(n, j, Letter::X)?,
                    )?;
                    let yy = crate::pauli::pauli_mul(
                        &PauliString::single(n, i, Letter::Y)?,
                        &PauliString::single(n, j, Letter::Y)?,
                    )?;
                    term.add_term(&xx, one * (0.5 * sign * coeff))?;
                    term.add_term(&yy, one * (0.5 * sign * coeff))?;
                }
            }
            pair_terms.push(((i, j), term));
        }
    }
    let mut onsite_terms = Vec::new();
    for i in 0..n {
        let mut term = OperatorSum::zero(n)?;
        term.add_term(&PauliString::single(n, i, Letter::X)?, one * spec.onsite_x)?;
        term.add_term(&PauliString::single(n, i, Letter::Z)?, one * spec.onsite_z)?;
        onsite_terms.push((i, term));
    }
    Ok(CouplingSet { spec: spec.clone(), pair_terms, onsite_terms })
}

/// Result of checking the decay cap on every pair term.
#[derive(Clone, Debug)]
pub struct DecayReport {
    pub ok: bool,
    /// Violating pairs with (measured norm, cap).
    pub violations: Vec<((usize, usize), f64, f64)>,
}

/// Check `spectral_norm(pair term) <= h/|i-j|^alpha` with tolerance 1e-12.
pub fn verify_decay(cs: &CouplingSet) -> Result<DecayReport> {
    let mut violations = Vec::new();
    for (&(i, j), term) in cs.pair_terms.iter().map(|(p, t)| (p, t)) {
        let d = (j - i) as f64;
        let cap = cs.spec.h / d.powf(cs.spec.alpha);
        let norm = term.spectral_norm(crate::DEFAULT_DENSE_CAP)?;
        if norm > cap + 1e-12 {
            violations.push(((i, j), norm, cap));
        }
    }
    Ok(DecayReport { ok: violations.is_empty(), violations })
}

/// Per-block norm comparison record.
#[derive(Clone, Debug, Serialize)]
pub struct BlockNormRecord {
    pub q: u32,
    pub k: u32,
    pub spectral: f64,
    pub frobenius: f64,
    /// `frobenius / spectral`, in (0, 1].
    pub ratio: f64,
}

/// Measured frustration constant of an instance's block decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct FrustrationReport {
    pub blocks: Vec<BlockNormRecord>,
    /// Minimum ratio over non-empty blocks.
    pub k_est: f64,
}

/// Measure per-block norm ratios `‖H_(q,k)‖₂ / ‖H_(q,k)‖` and their
/// minimum `K_est`. Empty blocks are skipped. Errors with a resource error
/// naming the block when a block's support exceeds `dense_cap`.
pub fn frustration_ratio(
    blocks: &[ScaleBlock],
    dense_cap: usize,
) -> Result<FrustrationReport> {
    let mut records = Vec::new();
    let mut k_est = f64::INFINITY;
    for block in blocks {
        if block.op.num_terms() == 0 {
            continue;
        }
        let frobenius = block.op.frobenius_norm();
        let spectral = block.op.spectral_norm(dense_cap).map_err(|e| match e {
            Error::Resource(msg) => {
                Error::resource(format!("block (q={}, k={}): {msg}", block.q, block.k))
            }
            other => other,
        })?;
        let ratio = frobenius / spectral;
        k_est = k_est.min(ratio);
        records.push(BlockNormRecord { q: block.q, k: block.k, spectral, frobenius, ratio });
    }
    if records.is_empty() {
        return Err(Error::argument("frustration_ratio: no non-empty blocks"));
    }
    Ok(FrustrationReport { blocks: records, k_est })
}
