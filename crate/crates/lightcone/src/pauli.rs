//! Bit-packed Pauli-string algebra.
//!
//! A [`PauliString`] on `n <= 64` sites is stored as two `u64` bitmasks
//! `(x, z)` plus a power-of-`i` phase: bit `s` of `x`/`z` says whether the
//! letter on site `s` contains an `X`/`Z` factor, so `(0,0) = I`,
//! `(1,0) = X`, `(0,1) = Z`, `(1,1) = Y`. Basis states are indexed with
//! site `s` on bit `s` of the computational-basis label.
//!
//! An [`OperatorSum`] is a coefficient map over phase-free letter strings;
//! phases carried by individual strings are folded into the coefficients, so
//! representation is canonical and term order is deterministic.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

/// Single-site Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (u64, u64) {
        match self {
            Letter::I => (0, 0),
            Letter::X => (1, 0),
            Letter::Y => (1, 1),
            Letter::Z => (0, 1),
        }
    }

    fn from_bits(x: u64, z: u64) -> Letter {
        match (x & 1, z & 1) {
            (0, 0) => Letter::I,
            (1, 0) => Letter::X,
            (1, 1) => Letter::Y,
            _ => Letter::Z,
        }
    }
}

/// A Pauli string `i^phase_exp * (tensor of letters)` on `n_sites` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliString {
    pub n_sites: usize,
    pub x: u64,
    pub z: u64,
    /// Power of `i` multiplying the letter tensor, in `{0,1,2,3}`.
    pub phase_exp: u8,
}

impl PauliString {
    /// The identity string.
    pub fn identity(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        Ok(PauliString { n_sites, x: 0, z: 0, phase_exp: 0 })
    }

    /// A single non-identity letter at `site`, identity elsewhere.
    pub fn single(n_sites: usize, site: usize, letter: Letter) -> Result<Self> {
        check_sites(n_sites)?;
        if site >= n_sites {
            return Err(Error::argument(format!(
                "site {site} out of range for {n_sites} sites"
            )));
        }
        let (x, z) = letter.bits();
        Ok(PauliString { n_sites, x: x << site, z: z << site, phase_exp: 0 })
    }

    /// Build from an explicit letter list (`letters.len()` sites).
    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        check_sites(letters.len())?;
        let mut x = 0u64;
        let mut z = 0u64;
        for (s, l) in letters.iter().enumerate() {
            let (lx, lz) = l.bits();
            x |= lx << s;
            z |= lz << s;
        }
        Ok(PauliString { n_sites: letters.len(), x, z, phase_exp: 0 })
    }

    /// Letter at `site`.
    pub fn letter(&self, site: usize) -> Letter {
        Letter::from_bits(self.x >> site, self.z >> site)
    }

    /// Number of sites on which the string acts non-trivially.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Number of `Y` letters.
    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > 64 {
        return Err(Error::argument(format!("n_sites must be in 1..=64, got {n}")));
    }
    Ok(())
}

/// Product of two Pauli strings on the same number of sites.
///
/// The result satisfies `a * b = i^phase_exp * letters(c)` exactly; the
/// phase bookkeeping uses the symplectic form, so no matrices are built.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.n_sites != b.n_sites {
        return Err(Error::argument("pauli_mul: site-count mismatch"));
    }
    let x = a.x ^ b.x;
    let z = a.z ^ b.z;
    let yc = (x & z).count_ones();
    // In X^x Z^z normal form: letters = i^{y_count} X^x Z^z, and commuting
    // Z^{z_a} past X^{x_b} costs (-1)^{<z_a, x_b>}.
    let p = a.phase_exp as u32
        + b.phase_exp as u32
        + a.y_count()
        + b.y_count()
        + 2 * (a.z & b.x).count_ones()
        + (4 - yc % 4);
    Ok(PauliString { n_sites: a.n_sites, x, z, phase_exp: (p % 4) as u8 })
}

/// `+1` if the strings commute, `-1` if they anticommute.
pub fn commute_sign(a: &PauliString, b: &PauliString) -> Result<i32> {
    if a.n_sites != b.n_sites {
        return Err(Error::argument("commute_sign: site-count mismatch"));
    }
    let s = ((a.x & b.z).count_ones() + (a.z & b.x).count_ones()) % 2;
    Ok(if s == 0 { 1 } else { -1 })
}

/// Sparse sum of Pauli strings with complex coefficients.
///
/// Keys are phase-free `(x, z)` letter strings; string phases are folded
/// into the coefficients on insertion. Terms with `|coeff| <= drop_tol`
/// are pruned.
#[derive(Clone, Debug)]
pub struct OperatorSum {
    pub n_sites: usize,
    terms: BTreeMap<(u64, u64), Complex64>,
    drop_tol: f64,
}

impl OperatorSum {
    pub fn zero(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        Ok(OperatorSum { n_sites, terms: BTreeMap::new(), drop_tol: 0.0 })
    }

    /// Add `coeff * string` (the string's own phase is folded in).
    pub fn add_term(&mut self, string: &PauliString, coeff: Complex64) -> Result<()> {
        if string.n_sites != self.n_sites {
            return Err(Error::argument("add_term: site-count mismatch"));
        }
        let phase = Complex64::i().powu(string.phase_exp as u32);
        let key = (string.x, string.z);
        let entry = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff * phase;
        if entry.norm() <= self.drop_tol {
            self.terms.remove(&key);
        }
        Ok(())
    }

    /// Add every term of `other` scaled by `factor`.
    pub fn add_scaled(&mut self, other: &OperatorSum, factor: Complex64) -> Result<()> {
        if other.n_sites != self.n_sites {
            return Err(Error::argument("add_scaled: site-count mismatch"));
        }
        for (&(x, z), &c) in &other.terms {
            let s = PauliString { n_sites: self.n_sites, x, z, phase_exp: 0 };
            self.add_term(&s, c * factor)?;
        }
        Ok(())
    }

    /// Iterate `(string, coeff)` pairs in canonical key order.
    pub fn terms(&self) -> impl Iterator<Item = (PauliString, Complex64)> + '_ {
        self.terms.iter().map(move |(&(x, z), &c)| {
            (PauliString { n_sites: self.n_sites, x, z, phase_exp: 0 }, c)
        })
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Hermitian conjugate. Letter strings are Hermitian, so this just
    /// conjugates coefficients.
    pub fn dagger(&self) -> OperatorSum {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.conj();
        }
        out
    }

    /// True when all coefficients are real to within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Bitmask of sites the sum acts on non-trivially.
    pub fn support_mask(&self) -> u64 {
        self.terms.keys().fold(0u64, |m, &(x, z)| m | x | z)
    }

    /// Sites in the support, ascending.
    pub fn support_sites(&self) -> Vec<usize> {
        let m = self.support_mask();
        (0..self.n_sites).filter(|s| m >> s & 1 == 1).collect()
    }

    /// Restrict to the support: relabel support sites to `0..weight`.
    /// The spectrum (up to identity tensor factors) is unchanged.
    pub fn compress_support(&self) -> Result<OperatorSum> {
        let mask = self.support_mask();
        let m = mask.count_ones().max(1) as usize;
        let mut out = OperatorSum::zero(m)?;
        for (&(x, z), &c) in &self.terms {
            let s = PauliString {
                n_sites: m,
                x: extract_bits(x, mask),
                z: extract_bits(z, mask),
                phase_exp: 0,
            };
            out.add_term(&s, c)?;
        }
        Ok(out)
    }

    /// Dense matrix representation, dimension `2^n_sites`.
    ///
    /// Errors with [`Error::Resource`] if `n_sites > dense_cap`.
    pub fn dense_matrix(&self, dense_cap: usize) -> Result<Array2<Complex64>> {
        if self.n_sites > dense_cap {
            return Err(Error::resource(format!(
                "dense matrix on {} sites exceeds dense cap {}",
                self.n_sites, dense_cap
            )));
        }
        let dim = 1usize << self.n_sites;
        let mut out = Array2::<Complex64>::zeros((dim, dim));
        for (&(x, z), &c) in &self.terms {
            let val = c * Complex64::i().powu((x & z).count_ones());
            for col in 0..dim {
                let row = col ^ (x as usize);
                let sign = if ((z as usize & col).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                out[(row, col)] += val * sign;
            }
        }
        Ok(out)
    }

    /// Apply the operator to a state vector of dimension `2^n_sites`.
    pub fn apply(&self, v: &Array1<Complex64>, out: &mut Array1<Complex64>) {
        out.fill(Complex64::new(0.0, 0.0));
        for (&(x, z), &c) in &self.terms {
            let val = c * Complex64::i().powu((x & z).count_ones());
            for col in 0..v.len() {
                let row = col ^ (x as usize);
                let sign = if ((z as usize & col).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                out[row] += val * sign * v[col];
            }
        }
    }

    /// Normalized Frobenius norm `sqrt(tr(O^dag O) / 2^n)`.
    ///
    /// Letter strings are orthonormal under the normalized trace inner
    /// product, so this is just the coefficient 2-norm. It lower-bounds the
    /// spectral norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    ///
    /// The operator is first restricted to its support. Supports up to 8
    /// sites are handled densely; larger supports up to `dense_cap` use
    /// matrix-free Lanczos iteration on `O^dag O`. Errors with
    /// [`Error::Resource`] if the support exceeds `dense_cap`.
    pub fn spectral_norm(&self, dense_cap: usize) -> Result<f64> {
        let support = self.support_mask().count_ones() as usize;
        if support > dense_cap {
            return Err(Error::resource(format!(
                "spectral norm: support of {support} sites exceeds dense cap {dense_cap}"
            )));
        }
        let small = self.compress_support()?;
        // Diagonal operators (all-Z strings): the norm is the largest
        // absolute diagonal entry, in one pass.
        if small.terms.keys().all(|&(x, _)| x == 0) {
            let dim = 1usize << small.n_sites;
            let mut best = 0.0f64;
            for col in 0..dim {
                let mut entry = Complex64::new(0.0, 0.0);
                for (&(_, z), &c) in &small.terms {
                    let sign = if ((z as usize & col).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                    entry += c * sign;
                }
                best = best.max(entry.norm());
            }
            return Ok(best);
        }
        if support <= 8 {
            let m = small.dense_matrix(8)?;
            return dense_spectral_norm(&m);
        }
        // Lanczos on the PSD operator O^dag O; sqrt of its top eigenvalue.
        let dag = small.dagger();
        let dim = 1usize << small.n_sites;
        let mut tmp = Array1::<Complex64>::zeros(dim);
        let mut tmp2 = Array1::<Complex64>::zeros(dim);
        let (_, top) = linalg::lanczos_extreme_hermitian(dim, 150, 1e-10, |v, out| {
            small.apply(v, &mut tmp);
            dag.apply(&tmp, &mut tmp2);
            out.assign(&tmp2);
        })?;
        Ok(top.max(0.0).sqrt())
    }
}

/// Gather the bits of `v` selected by `mask` into the low positions.
fn extract_bits(v: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut pos = 0;
    let mut m = mask;
    while m != 0 {
        let bit = m.trailing_zeros();
        out |= (v >> bit & 1) << pos;
        pos += 1;
        m &= m - 1;
    }
    out
}

/// Spectral norm of a dense matrix via the Hermitian eigenproblem on
/// `[[0, A], [A^dag, 0]]`-free route: eigenvalues of `A^dag A`.
pub fn dense_spectral_norm(a: &Array2<Complex64>) -> Result<f64> {
    let ata = a.t().mapv(|v| v.conj()).dot(a);
    let (vals, _) = ata
        .eigh(UPLO::Lower)
        .map_err(|e| Error::numeric(format!("eigh failed: {e}")))?;
    Ok(vals.iter().fold(0.0f64, |m, &v| m.max(v)).max(0.0).sqrt())
}
