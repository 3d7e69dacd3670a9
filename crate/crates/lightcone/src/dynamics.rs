//! Exact dense Heisenberg dynamics on short chains.
//!
//! The Hamiltonian is diagonalized once per model (with a real-symmetric
//! fast path — all built-in families are real in the computational basis)
//! and operators are evolved in the eigenbasis, where time evolution is an
//! elementwise phase. Commutator norms use a dense eigensolve at small
//! dimension and matrix-free Lanczos above it, so a full time sweep costs
//! one eigendecomposition plus a few matrix-vector products per sample.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::bound::{self, BoundParams};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::CouplingSet;
use crate::pauli::{dense_spectral_norm, Letter, OperatorSum, PauliString};
use crate::scale::Variant;

type C64 = Complex64;

/// Eigenvector storage. All built-in families are real in the computational
/// basis, so the common case keeps `U` in `f64` and does every basis change
/// with real gemms (4x cheaper than complex, half the memory).
enum Basis {
    /// Real orthogonal eigenvectors: `H = U diag Uᵀ`.
    Real { u: Array2<f64> },
    /// General unitary eigenvectors: `H = U diag U†`.
    Complex { u: Array2<C64>, u_dag: Array2<C64> },
}

fn complex_from_parts(re: &Array2<f64>, im: &Array2<f64>) -> Array2<C64> {
    let mut out = Array2::<C64>::zeros(re.dim());
    for ((o, &x), &y) in out.iter_mut().zip(re.iter()).zip(im.iter()) {
        *o = C64::new(x, y);
    }
    out
}

/// Eigendecomposition of a model Hamiltonian, reused across a time grid.
pub struct Evolver {
    pub n_sites: usize,
    pub dim: usize,
    evals: Array1<f64>,
    basis: Basis,
}

impl Evolver {
    /// Diagonalize the model's total Hamiltonian. Errors with a resource
    /// error above the dense cap and a numeric error if LAPACK fails.
    pub fn new(cs: &CouplingSet, dense_cap: usize) -> Result<Self> {
        let n = cs.spec.n_sites;
        let h = cs.total_hamiltonian()?;
        let m = h.dense_matrix(dense_cap)?;
        let dim = m.nrows();
        let is_real = m.iter().all(|c| c.im.abs() < 1e-14);
        let (evals, basis) = if is_real {
            // Real-symmetric path: divide-and-conquer on f64 is an order
            // of magnitude cheaper than the complex QR solver.
            let mr = m.mapv(|c| c.re);
            let (vals, u) = linalg::eigh_real_dc(&mr)?;
            (vals, Basis::Real { u })
        } else {
            let (vals, u) = m
                .eigh(UPLO::Lower)
                .map_err(|e| Error::numeric(format!("eigh (complex) failed: {e}")))?;
            let u_dag = u.t().mapv(|v| v.conj());
            (vals, Basis::Complex { u, u_dag })
        };
        Ok(Evolver { n_sites: n, dim, evals, basis })
    }

    /// Transform a dense operator into the eigenbasis: `U† O U`.
    pub fn to_eigenbasis(&self, op: &Array2<C64>) -> Array2<C64> {
        match &self.basis {
            Basis::Real { u } => {
                let re = op.mapv(|c| c.re);
                let im = op.mapv(|c| c.im);
                complex_from_parts(&u.t().dot(&re.dot(u)), &u.t().dot(&im.dot(u)))
            }
            Basis::Complex { u, u_dag } => u_dag.dot(&op.dot(u)),
        }
    }

    /// Transform back to the computational basis: `U O U†`.
    pub fn from_eigenbasis(&self, op: &Array2<C64>) -> Array2<C64> {
        match &self.basis {
            Basis::Real { u } => {
                let re = op.mapv(|c| c.re);
                let im = op.mapv(|c| c.im);
                complex_from_parts(
                    &u.dot(&re.dot(&u.t())),
                    &u.dot(&im.dot(&u.t())),
                )
            }
            Basis::Complex { u, u_dag } => u.dot(&op.dot(u_dag)),
        }
    }

    /// Heisenberg-evolve an operator given in the eigenbasis:
    /// `A(t)[j,k] = exp(i (λ_j - λ_k) t) A[j,k]`.
    pub fn evolve_in_eigenbasis(&self, tilde: &Array2<C64>, t: f64) -> Array2<C64> {
        let mut out = tilde.clone();
        for ((j, k), v) in out.indexed_iter_mut() {
            let phase = (self.evals[j] - self.evals[k]) * t;
            *v *= C64::from_polar(1.0, phase);
        }
        out
    }

    /// Eigenbasis representation of a single-site Pauli.
    pub fn single_site_tilde(&self, site: usize, letter: Letter) -> Result<Array2<C64>> {
        if site >= self.n_sites {
            return Err(Error::argument(format!("site {site} out of range")));
        }
        if let (Basis::Real { u }, false) = (&self.basis, matches!(letter, Letter::I)) {
            // A single-site Pauli acts on U as a signed row permutation
            // (Y = i times a real signed permutation), so the whole
            // transform costs one real gemm instead of two complex ones.
            let bit = 1usize << site;
            let mut pu = Array2::<f64>::zeros((self.dim, self.dim));
            for x in 0..self.dim {
                let (src, sign) = match letter {
                    Letter::X => (x ^ bit, 1.0),
                    Letter::Z => (x, if x & bit == 0 { 1.0 } else { -1.0 }),
                    Letter::Y => (x ^ bit, if x & bit == 0 { -1.0 } else { 1.0 }),
                    Letter::I => unreachable!(),
                };
                let mut row = pu.row_mut(x);
                row.assign(&u.row(src));
                if sign < 0.0 {
                    row.mapv_inplace(|v| -v);
                }
            }
            let tilde = u.t().dot(&pu);
            return Ok(if matches!(letter, Letter::Y) {
                tilde.mapv(|v| C64::new(0.0, v))
            } else {
                tilde.mapv(|v| C64::new(v, 0.0))
            });
        }
        let mut op = OperatorSum::zero(self.n_sites)?;
        op.add_term(
            &PauliString::single(self.n_sites, site, letter)?,
            C64::new(1.0, 0.0),
        )?;
        // The dense single-site operator is sparse; the cap was already
        // paid when the Evolver was built.
        let dense = op.dense_matrix(self.n_sites)?;
        Ok(self.to_eigenbasis(&dense))
    }
}

/// Heisenberg-evolved operator `e^{iHt} A e^{-iHt}` as a dense matrix in
/// the computational basis.
pub fn heisenberg_evolve(
    cs: &CouplingSet,
    a: &OperatorSum,
    t: f64,
    dense_cap: usize,
) -> Result<Array2<C64>> {
    let ev = Evolver::new(cs, dense_cap)?;
    let tilde = ev.to_eigenbasis(&a.dense_matrix(dense_cap)?);
    Ok(ev.from_eigenbasis(&ev.evolve_in_eigenbasis(&tilde, t)))
}

fn is_hermitian_dense(a: &Array2<C64>, tol: f64) -> bool {
    let n = a.nrows();
    for i in 0..n {
        for j in i..n {
            let d = a[(i, j)] - a[(j, i)].conj();
            if d.norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Spectral norm of the commutator `[A, B]`.
///
/// Small dimensions use a dense eigensolve; larger Hermitian inputs use
/// matrix-free Lanczos on the Hermitian operator `i [A, B]`.
pub fn commutator_norm(a: &Array2<C64>, b: &Array2<C64>) -> Result<f64> {
    if a.dim() != b.dim() || a.nrows() != a.ncols() {
        return Err(Error::argument("commutator_norm: dimension mismatch"));
    }
    let dim = a.nrows();
    if dim <= 256 {
        let m = a.dot(b) - b.dot(a);
        return dense_spectral_norm(&m);
    }
    if is_hermitian_dense(a, 1e-9) && is_hermitian_dense(b, 1e-9) {
        // 32 iterations give ~1e-3 relative accuracy on spectra bounded
        // by 2, plenty for crossing detection; each iteration streams both
        // dense matrices, which dominates the dynamics runtime, so the cap
        // is kept tight.
        let (lo, hi) = linalg::lanczos_extreme_hermitian(dim, 32, 1e-9, |v, out| {
            let t1 = a.dot(&b.dot(v));
            let t2 = b.dot(&a.dot(v));
            for (o, (x, y)) in out.iter_mut().zip(t1.iter().zip(t2.iter())) {
                *o = C64::i() * (x - y);
            }
        })?;
        return Ok(lo.abs().max(hi.abs()));
    }
    // General case: Lanczos on M†M.
    let m = a.dot(b) - b.dot(a);
    let m_dag = m.t().mapv(|v| v.conj());
    let (_, top) = linalg::lanczos_extreme_hermitian(dim, 48, 1e-9, |v, out| {
        out.assign(&m_dag.dot(&m.dot(v)));
    })?;
    Ok(top.max(0.0).sqrt())
}

/// Merge `keep`-bits and `s`-bits into a full basis index, where `mask`
/// marks the traced sites.
fn deposit_bits(keep: usize, s: usize, mask: usize, n_bits: usize) -> usize {
    let mut out = 0usize;
    let (mut ki, mut si) = (0, 0);
    for bit in 0..n_bits {
        if mask >> bit & 1 == 1 {
            out |= ((s >> si) & 1) << bit;
            si += 1;
        } else {
            out |= ((keep >> ki) & 1) << bit;
            ki += 1;
        }
    }
    out
}

/// Projector `P_S O = O - (tr_S O) ⊗ I_S / 2^{|S|}`: removes the component
/// acting trivially on every site of `S`.
pub fn project_onto(s: &[usize], o: &Array2<C64>, n_sites: usize) -> Result<Array2<C64>> {
    if s.is_empty() {
        return Err(Error::argument("project_onto: S must be nonempty"));
    }
    let dim = 1usize << n_sites;
    if o.nrows() != dim || o.ncols() != dim {
        return Err(Error::argument("project_onto: operator dimension mismatch"));
    }
    let mut mask = 0usize;
    for &site in s {
        if site >= n_sites {
            return Err(Error::argument(format!("site {site} out of range")));
        }
        mask |= 1 << site;
    }
    let m = mask.count_ones() as usize;
    let keep_bits = n_sites - m;
    let keep_dim = 1usize << keep_bits;
    let s_dim = 1usize << m;
    // Partial trace over S.
    let mut tr = Array2::<C64>::zeros((keep_dim, keep_dim));
    for ka in 0..keep_dim {
        for kb in 0..keep_dim {
            let mut acc = C64::new(0.0, 0.0);
            for si in 0..s_dim {
                acc += o[(
                    deposit_bits(ka, si, mask, n_sites),
                    deposit_bits(kb, si, mask, n_sites),
                )];
            }
            tr[(ka, kb)] = acc;
        }
    }
    // Subtract (tr_S O) ⊗ I_S / 2^m.
    let mut out = o.clone();
    let scale = 1.0 / s_dim as f64;
    for ka in 0..keep_dim {
        for kb in 0..keep_dim {
            let v = tr[(ka, kb)] * scale;
            for si in 0..s_dim {
                let row = deposit_bits(ka, si, mask, n_sites);
                let col = deposit_bits(kb, si, mask, n_sites);
                out[(row, col)] -= v;
            }
        }
    }
    Ok(out)
}

/// Independent projector formula: `(1 / (2·4^m)) Σ_ω [T^ω, [T^ω, O]]` over
/// all Pauli strings `T^ω` supported on `S`. Intended for validation at
/// `|S| <= 2`.
pub fn casimir_project(s: &[usize], o: &Array2<C64>, n_sites: usize) -> Result<Array2<C64>> {
    if s.is_empty() {
        return Err(Error::argument("casimir_project: S must be nonempty"));
    }
    let m = s.len();
    if m > 3 {
        return Err(Error::resource("casimir_project supports |S| <= 3"));
    }
    let dim = 1usize << n_sites;
    let mut acc = Array2::<C64>::zeros((dim, dim));
    let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    let combos = 4usize.pow(m as u32);
    for combo in 0..combos {
        let mut op = OperatorSum::zero(n_sites)?;
        let mut string = PauliString::identity(n_sites)?;
        let mut idx = combo;
        for &site in s {
            let l = letters[idx % 4];
            idx /= 4;
            string = crate::pauli::pauli_mul(&string, &PauliString::single(n_sites, site, l)?)?;
        }
        op.add_term(&string, C64::new(1.0, 0.0))?;
        let w = op.dense_matrix(n_sites)?;
        let inner = w.dot(o) - o.dot(&w);
        acc = acc + w.dot(&inner) - inner.dot(&w);
    }
    let norm = 1.0 / (2.0 * combos as f64);
    Ok(acc.mapv(|v| v * norm))
}

/// Inputs for an empirical scrambling-time measurement.
pub struct EvolutionSetup<'a> {
    pub cs: &'a CouplingSet,
    pub a_site: usize,
    pub b_site: usize,
    pub a_basis: Vec<Letter>,
    pub b_basis: Vec<Letter>,
    /// Strictly increasing, starting at 0.
    pub t_grid: Vec<f64>,
    pub delta: f64,
    pub dense_cap: usize,
}

impl EvolutionSetup<'_> {
    fn validate(&self) -> Result<()> {
        if self.a_site >= self.b_site {
            return Err(Error::argument("A_site must be left of B_site"));
        }
        if self.b_site >= self.cs.spec.n_sites {
            return Err(Error::argument("B_site out of range"));
        }
        if self.t_grid.first() != Some(&0.0)
            || !self.t_grid.windows(2).all(|w| w[1] > w[0])
        {
            return Err(Error::argument("t_grid must start at 0 and strictly increase"));
        }
        if !(self.delta > 0.0 && self.delta < 2.0) {
            return Err(Error::argument("delta must lie in (0, 2)"));
        }
        if self.a_basis.is_empty() || self.b_basis.is_empty() {
            return Err(Error::argument("basis sets must be nonempty"));
        }
        Ok(())
    }
}

/// Normalized commutator growth evaluator for one (model, A-site, B-site)
/// choice, reusing a prebuilt eigendecomposition.
pub struct CommutatorProbe<'a> {
    ev: &'a Evolver,
    a_tildes: Vec<Array2<C64>>,
    b_tildes: Vec<Array2<C64>>,
}

impl<'a> CommutatorProbe<'a> {
    pub fn new(
        ev: &'a Evolver,
        a_site: usize,
        b_site: usize,
        a_basis: &[Letter],
        b_basis: &[Letter],
    ) -> Result<Self> {
        let a_tildes = a_basis
            .iter()
            .map(|&l| ev.single_site_tilde(a_site, l))
            .collect::<Result<Vec<_>>>()?;
        let b_tildes = b_basis
            .iter()
            .map(|&l| ev.single_site_tilde(b_site, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(CommutatorProbe { ev, a_tildes, b_tildes })
    }

    /// `C(t) = max over basis pairs of ‖[A(t), B]‖` (single-site Paulis
    /// have unit norm, so this is already normalized).
    pub fn c_of_t(&self, t: f64) -> Result<f64> {
        let mut best = 0.0f64;
        for a in &self.a_tildes {
            let at = self.ev.evolve_in_eigenbasis(a, t);
            for b in &self.b_tildes {
                best = best.max(commutator_norm(&at, b)?);
            }
        }
        Ok(best)
    }
}

/// First time `C(t)` reaches `delta`, bracketed on the grid and refined by
/// bisection to 1e-3 absolute. `None` when no grid point crosses.
pub fn empirical_scrambling_time(setup: &EvolutionSetup) -> Result<Option<f64>> {
    setup.validate()?;
    let ev = Evolver::new(setup.cs, setup.dense_cap)?;
    let probe = CommutatorProbe::new(
        &ev,
        setup.a_site,
        setup.b_site,
        &setup.a_basis,
        &setup.b_basis,
    )?;
    crossing_time(&probe, &setup.t_grid, setup.delta)
}

fn crossing_time(probe: &CommutatorProbe, t_grid: &[f64], delta: f64) -> Result<Option<f64>> {
    let mut prev_t = t_grid[0];
    let mut prev_c = probe.c_of_t(prev_t)?;
    if prev_c >= delta {
        return Ok(Some(prev_t));
    }
    for &t in &t_grid[1..] {
        let c = probe.c_of_t(t)?;
        if c >= delta {
            // Bisect in (prev_t, t].
            let (mut lo, mut hi) = (prev_t, t);
            while hi - lo > 1e-3 {
                let mid = 0.5 * (lo + hi);
                if probe.c_of_t(mid)? >= delta {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_t = t;
        prev_c = c;
    }
    let _ = prev_c;
    Ok(None)
}

/// One row of a light-cone sweep.
#[derive(Clone, Debug)]
pub struct LightConeRecord {
    pub model: String,
    pub alpha: f64,
    pub n: usize,
    pub r: u64,
    pub delta: f64,
    /// `None` = censored (no crossing within the grid).
    pub ts_empirical: Option<f64>,
    pub ts_bound: f64,
}

/// Sweep configuration shared across models and distances.
pub struct SweepConfig {
    pub a_basis: Vec<Letter>,
    pub b_basis: Vec<Letter>,
    pub t_max: f64,
    pub dt: f64,
    pub dense_cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            a_basis: vec![Letter::X, Letter::Y, Letter::Z],
            b_basis: vec![Letter::X, Letter::Y, Letter::Z],
            t_max: 10.0,
            dt: 0.25,
            dense_cap: crate::DEFAULT_DENSE_CAP,
        }
    }
}

/// Measure empirical crossings for every `(model, r)` pair and attach the
/// certified bound (general variant). `A` sits at site 0 and `B` at site
/// `r`. Output order: models in input order, `r` ascending.
pub fn lightcone_sweep(
    models: &[CouplingSet],
    r_list: &[u64],
    delta: f64,
    config: &SweepConfig,
) -> Result<Vec<LightConeRecord>> {
    let mut t_grid = vec![0.0];
    let mut t = config.dt;
    while t <= config.t_max + 1e-12 {
        t_grid.push(t);
        t += config.dt;
    }
    let mut out = Vec::new();
    for cs in models {
        let params = BoundParams::new(cs.spec.alpha, cs.spec.h, delta, Variant::General)?;
        let ev = Evolver::new(cs, config.dense_cap)?;
        for &r in r_list {
            if r as usize >= cs.spec.n_sites {
                return Err(Error::argument(format!(
                    "r = {r} does not fit a chain of {} sites",
                    cs.spec.n_sites
                )));
            }
            let probe =
                CommutatorProbe::new(&ev, 0, r as usize, &config.a_basis, &config.b_basis)?;
            let ts_empirical = crossing_time(&probe, &t_grid, delta)?;
            out.push(LightConeRecord {
                model: cs.spec.family.name().to_string(),
                alpha: cs.spec.alpha,
                n: cs.spec.n_sites,
                r,
                delta,
                ts_empirical,
                ts_bound: bound::scrambling_time_bound(r, &params)?,
            });
        }
    }
    Ok(out)
}
