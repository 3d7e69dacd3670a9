//! Dyadic scale decomposition of couplings inside a window.
//!
//! For a site pair `(i, j)` the window covers the `R = 2^{n*}` sites ending
//! at `j` (with `n* = floor(log2(j-i))`); couplings are relabeled to
//! coordinates `1..=R` and partitioned into blocks `Q(q, k)`: the set of
//! pairs inside the half-open dyadic window `(2^{q-1} k, 2^{q-1}(k+2)]` not
//! already captured at a smaller scale. Couplings sticking out of the
//! window fold onto its edges. The module also provides the per-block norm
//! bound and the long-sequence thresholds `N_q`, `M`, `q*`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::CouplingSet;
use crate::pauli::OperatorSum;

/// Window parameters for a pair of physical sites `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowParams {
    pub i: i64,
    pub j: i64,
    pub n_star: u32,
    /// `R = 2^{n_star}`.
    pub r_size: u64,
    /// Left edge of the window: relabeled coordinate 1.
    pub i_prime: i64,
}

/// Compute the dyadic window for physical sites `i < j`.
///
/// Errors with a degenerate-distance domain error when `j - i < 2`; at
/// distance 1 the scale range is empty and the bound is vacuous.
pub fn window_params(i: i64, j: i64) -> Result<WindowParams> {
    if j - i < 2 {
        return Err(Error::domain(format!(
            "degenerate distance: j - i = {} < 2",
            j - i
        )));
    }
    let r = (j - i) as u64;
    let n_star = 63 - r.leading_zeros();
    let r_size = 1u64 << n_star;
    Ok(WindowParams { i, j, n_star, r_size, i_prime: j - r_size as i64 + 1 })
}

/// One scale block `Q(q, k)` with its member pairs (relabeled coordinates,
/// with multiplicity) and the summed coupling operator.
#[derive(Clone, Debug)]
pub struct ScaleBlock {
    pub q: u32,
    pub k: u32,
    /// Relabeled member pairs `(m, n)`, `1 <= m < n <= R`, with
    /// multiplicity (edge folding can map distinct couplings to one pair).
    pub members: Vec<(u32, u32)>,
    /// Sum of the physical coupling operators mapped into this block.
    pub op: OperatorSum,
}

/// Block geometry helpers: edges of the window of `Q(q, k)`.
pub fn left_edge(q: u32, k: u32) -> u64 {
    (1u64 << (q - 1)) * k as u64
}
pub fn right_edge(q: u32, k: u32) -> u64 {
    (1u64 << (q - 1)) * (k as u64 + 2)
}
pub fn midpoint(q: u32, k: u32) -> u64 {
    (1u64 << (q - 1)) * (k as u64 + 1)
}

/// Number of valid `k` labels at scale `q` for window size `R`:
/// `2^{1-q} R - 1` (right edge must not pass `R`).
pub fn num_labels(r_size: u64, q: u32) -> u64 {
    (r_size >> (q - 1)) - 1
}

/// Assign a relabeled pair `1 <= m < n <= R` to its unique block `(q, k)`.
///
/// Searches scales from the smallest up; uniqueness at the found scale
/// holds because the overlap of neighboring same-scale windows lies inside
/// a smaller-scale window.
pub fn assign_block(m: u64, n: u64, r_size: u64) -> Result<(u32, u32)> {
    if !(1 <= m && m < n && n <= r_size) {
        return Err(Error::argument(format!(
            "assign_block: pair ({m}, {n}) out of range for R = {r_size}"
        )));
    }
    let n_star = 63 - r_size.leading_zeros();
    for q in 1..=n_star {
        let s = 1u64 << (q - 1);
        // Need s*k < m and n <= s*(k+2), with the window inside [0, R].
        let k_hi = ((m - 1) / s).min(r_size / s - 2);
        let k_lo = (n + s - 1) / s; // ceil(n/s)
        let k_lo = k_lo.saturating_sub(2);
        if k_lo <= k_hi {
            debug_assert_eq!(k_lo, k_hi, "same-scale double membership");
            return Ok((q, k_lo as u32));
        }
    }
    unreachable!("every in-range pair fits at scale n_star");
}

/// Fold a physical coupling `(a, b)` (a < b) into relabeled window
/// coordinates, absorbing out-of-window legs onto the edges. Returns
/// `None` when the folded pair collapses (the coupling lies entirely
/// outside the open window).
pub fn fold_pair(wp: &WindowParams, a: i64, b: i64) -> Option<(u64, u64)> {
    let m_raw = a - wp.i_prime + 1;
    let n_raw = b - wp.i_prime + 1;
    let m = m_raw.max(1) as u64;
    let n = (n_raw.min(wp.r_size as i64)).max(0) as u64;
    if m < n {
        Some((m, n))
    } else {
        None
    }
}

/// Decompose a coupling set over the window into scale blocks.
///
/// Every label `(q, k)` valid for `R` appears in the output (possibly with
/// no members), ordered by `(q, k)`. Each physical coupling overlapping
/// the open window maps into exactly one block.
pub fn build_decomposition(wp: &WindowParams, cs: &CouplingSet) -> Result<Vec<ScaleBlock>> {
    let r = wp.r_size;
    let mut blocks: Vec<ScaleBlock> = Vec::new();
    let mut index = std::collections::BTreeMap::new();
    for q in 1..=wp.n_star {
        for k in 0..num_labels(r, q) {
            index.insert((q, k as u32), blocks.len());
            blocks.push(ScaleBlock {
                q,
                k: k as u32,
                members: Vec::new(),
                op: OperatorSum::zero(cs.spec.n_sites)?,
            });
        }
    }
    let one = Complex64::new(1.0, 0.0);
    for (&(a, b), term) in cs.pair_terms.iter().map(|(p, t)| (p, t)) {
        if let Some((m, n)) = fold_pair(wp, a as i64, b as i64) {
            let (q, k) = assign_block(m, n, r)?;
            let idx = index[&(q, k)];
            blocks[idx].members.push((m as u32, n as u32));
            blocks[idx].op.add_scaled(term, one)?;
        }
    }
    Ok(blocks)
}

/// Label-only decomposition of all pairs `1 <= m < n <= R` (no model).
pub fn abstract_blocks(r_size: u64) -> Result<Vec<(u32, u32, Vec<(u32, u32)>)>> {
    if r_size < 2 || !r_size.is_power_of_two() {
        return Err(Error::argument("R must be a power of two >= 2"));
    }
    let n_star = 63 - r_size.leading_zeros();
    let mut out: Vec<(u32, u32, Vec<(u32, u32)>)> = Vec::new();
    let mut index = std::collections::BTreeMap::new();
    for q in 1..=n_star {
        for k in 0..num_labels(r_size, q) {
            index.insert((q, k as u32), out.len());
            out.push((q, k as u32, Vec::new()));
        }
    }
    for m in 1..r_size {
        for n in (m + 1)..=r_size {
            let (q, k) = assign_block(m, n, r_size)?;
            out[index[&(q, k)]].2.push((m as u32, n as u32));
        }
    }
    Ok(out)
}

/// Which per-block norm bound to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    /// Valid for any Hamiltonian obeying the decay cap; `alpha' = alpha - 1`.
    General,
    /// Requires the frustration constant `K` in (0, 1]; `alpha' = alpha`.
    Frustrated { k: f64 },
}

impl Variant {
    pub fn alpha_prime(&self, alpha: f64) -> f64 {
        match self {
            Variant::General => alpha - 1.0,
            Variant::Frustrated { .. } => alpha,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::General => "general",
            Variant::Frustrated { .. } => "frustrated",
        }
    }
}

/// The `b` constant of the per-block Liouvillian norm bound.
pub fn b_constant(alpha: f64, h: f64, variant: Variant) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::domain(format!("alpha must exceed 2 (got {alpha})")));
    }
    match variant {
        Variant::General => Ok(h * 2f64.powf(alpha + 2.0) / ((alpha - 1.0) * (alpha - 2.0))),
        Variant::Frustrated { k } => {
            if !(k > 0.0) {
                return Err(Error::argument(format!("K must be positive (got {k})")));
            }
            Ok(h * 2f64.powf(2.0 * alpha - 0.5) / ((alpha - 1.0) * k))
        }
    }
}

/// Per-block norm bound `b · 2^{-q(alpha'-1)}` on the block Liouvillian.
pub fn block_norm_bound(q: u32, alpha: f64, h: f64, variant: Variant) -> Result<f64> {
    let b = b_constant(alpha, h, variant)?;
    let ap = variant.alpha_prime(alpha);
    Ok(b * 2f64.powf(-(q as f64) * (ap - 1.0)))
}

/// Long-sequence thresholds for a window of size `R`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub alpha_prime: f64,
    pub r_size: u64,
    /// `N_q` for `q = 1..=n_star` (index `q - 1`).
    pub n: Vec<u64>,
    /// Normalization `M = sum_{q=1}^{n*} 2^{-q(alpha'-2)/2}`.
    pub m: f64,
    /// Smallest `q` with `N_q = 1`.
    pub q_star: u32,
}

/// Compute the thresholds `N_q = ceil( (1/2) 2^{-q(alpha'-2)/2} / M · R/2^q )`.
///
/// At `alpha' = 2` the normalization gives `M = log2 R` and the formula
/// reduces to the explicit form `N_q = ceil(R / (2^{q+1} log2 R))`.
pub fn long_thresholds(alpha_prime: f64, r_size: u64) -> Result<Thresholds> {
    if r_size < 2 || !r_size.is_power_of_two() {
        return Err(Error::argument(format!(
            "R must be a power of two >= 2 (got {r_size})"
        )));
    }
    if !(alpha_prime > 1.0) {
        return Err(Error::domain(format!(
            "alpha' must exceed 1 (got {alpha_prime})"
        )));
    }
    let n_star = 63 - r_size.leading_zeros();
    let m: f64 = (1..=n_star)
        .map(|q| 2f64.powf(-(q as f64) * (alpha_prime - 2.0) / 2.0))
        .sum();
    let mut n = Vec::with_capacity(n_star as usize);
    let mut q_star = n_star;
    for q in 1..=n_star {
        let weight = 2f64.powf(-(q as f64) * (alpha_prime - 2.0) / 2.0);
        let raw = 0.5 * weight / m * (r_size as f64) / 2f64.powi(q as i32);
        let nq = raw.ceil().max(1.0) as u64;
        if nq == 1 && q_star == n_star && q < n_star {
            q_star = q;
        }
        n.push(nq);
    }
    // Recompute q_star strictly: first q with N_q = 1.
    let q_star = n
        .iter()
        .position(|&v| v == 1)
        .map(|p| p as u32 + 1)
        .unwrap_or(n_star);
    Ok(Thresholds { alpha_prime, r_size, n, m, q_star })
}

impl Thresholds {
    /// The slack quantity `sum_q 2^q (N_q - 1)` in exact integer
    /// arithmetic; the coverage lemma needs it below `R/2`.
    pub fn slack(&self) -> u128 {
        self.n
            .iter()
            .enumerate()
            .map(|(idx, &nq)| (1u128 << (idx + 1)) * (nq as u128 - 1))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelFamily, ModelSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn window_examples() {
        let w = window_params(1, 17).unwrap();
        assert_eq!((w.n_star, w.r_size, w.i_prime), (4, 16, 2));
        let w = window_params(1, 9).unwrap();
        assert_eq!((w.n_star, w.r_size, w.i_prime), (3, 8, 2));
        let w = window_params(5, 7).unwrap();
        assert_eq!((w.n_star, w.r_size, w.i_prime), (1, 2, 6));
        assert!(window_params(3, 4).is_err());
    }

    #[test]
    fn assign_examples() {
        assert_eq!(assign_block(3, 4, 16).unwrap(), (1, 2));
        assert_eq!(assign_block(2, 4, 16).unwrap(), (2, 0));
        assert_eq!(assign_block(6, 9, 16).unwrap(), (3, 1));
    }

    #[test]
    fn partition_exhaustive_small() {
        // Every pair belongs to exactly one block; verified by re-checking
        // membership against the raw window definition at every scale.
        for r in [4u64, 8, 16] {
            let n_star = 63 - r.leading_zeros();
            for m in 1..r {
                for n in (m + 1)..=r {
                    let mut memberships = Vec::new();
                    for q in 1..=n_star {
                        let s = 1u64 << (q - 1);
                        for k in 0..num_labels(r, q) {
                            let inside = s * k < m && n <= s * (k + 2);
                            // Member of Q(q,k) iff inside this window and
                            // inside no smaller-scale window.
                            let lower = (1..q).any(|q2| {
                                let s2 = 1u64 << (q2 - 1);
                                (0..num_labels(r, q2))
                                    .any(|k2| s2 * k2 < m && n <= s2 * (k2 + 2))
                            });
                            if inside && !lower {
                                memberships.push((q, k as u32));
                            }
                        }
                    }
                    assert_eq!(
                        memberships.len(),
                        1,
                        "pair ({m},{n}) R={r}: memberships {memberships:?}"
                    );
                    assert_eq!(memberships[0], assign_block(m, n, r).unwrap());
                }
            }
        }
    }

    #[test]
    fn fold_examples() {
        // Coupling two sites left of the window folds to (1, 2).
        let wp = window_params(1, 9).unwrap(); // i' = 2
        assert_eq!(fold_pair(&wp, 0, 3), Some((1, 2)));
        // A leg at or beyond j folds to n = R.
        assert_eq!(fold_pair(&wp, 5, 11), Some((4, 8)));
        // Entirely left of the window: dropped.
        assert_eq!(fold_pair(&wp, 0, 2), None);
        // Entirely right of the window: dropped.
        assert_eq!(fold_pair(&wp, 9, 10), None);
    }

    #[test]
    fn decomposition_conserves_window_couplings() {
        // The multiset of member pairs equals the multiset of physical
        // couplings overlapping the open window, for a 12-site Ising chain.
        let spec = ModelSpec {
            family: ModelFamily::IsingLr,
            n_sites: 12,
            alpha: 3.0,
            h: 1.0,
            onsite_x: 1.0,
            onsite_z: 0.5,
            seed: 0,
        };
        let cs = build_model(&spec).unwrap();
        let wp = window_params(0, 10).unwrap(); // R = 8, i' = 3
        let blocks = build_decomposition(&wp, &cs).unwrap();
        let mut from_blocks: Vec<(u32, u32)> =
            blocks.iter().flat_map(|b| b.members.iter().copied()).collect();
        from_blocks.sort_unstable();
        let mut expected: Vec<(u32, u32)> = cs
            .pair_terms
            .iter()
            .filter_map(|(p, _)| fold_pair(&wp, p.0 as i64, p.1 as i64))
            .map(|(m, n)| (m as u32, n as u32))
            .collect();
        expected.sort_unstable();
        assert_eq!(from_blocks, expected);
        assert!(!expected.is_empty());
    }

    #[test]
    fn abstract_blocks_r4() {
        let blocks = abstract_blocks(4).unwrap();
        // Labels: (1,0),(1,1),(1,2),(2,0) — right edges must stay <= R.
        let labels: Vec<(u32, u32)> = blocks.iter().map(|b| (b.0, b.1)).collect();
        assert_eq!(labels, vec![(1, 0), (1, 1), (1, 2), (2, 0)]);
        // Pair (1,3) lands in (2,0).
        assert_eq!(assign_block(1, 3, 4).unwrap(), (2, 0));
        let total: usize = blocks.iter().map(|b| b.2.len()).sum();
        assert_eq!(total, 6); // C(4,2) pairs
    }

    #[test]
    fn block_norm_bound_examples() {
        // General, alpha = 3.5: b = 2^{5.5} / (2.5 * 1.5).
        let b = b_constant(3.5, 1.0, Variant::General).unwrap();
        assert_abs_diff_eq!(b, 2f64.powf(5.5) / 3.75, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 12.068, epsilon = 1e-3);
        let q2 = block_norm_bound(2, 3.5, 1.0, Variant::General).unwrap();
        assert_abs_diff_eq!(q2, b * 2f64.powf(-3.0), epsilon = 1e-12);
        // Frustrated, alpha = 3, K = 1: b = 2^{5.5} / 2.
        let bf = b_constant(3.0, 1.0, Variant::Frustrated { k: 1.0 }).unwrap();
        assert_abs_diff_eq!(bf, 2f64.powf(5.5) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bf, 22.63, epsilon = 1e-2);
        // Ratio structure.
        for q in 1..5 {
            let a = block_norm_bound(q, 3.5, 1.0, Variant::General).unwrap();
            let b2 = block_norm_bound(q + 1, 3.5, 1.0, Variant::General).unwrap();
            assert_abs_diff_eq!(b2 / a, 2f64.powf(-1.5), epsilon = 1e-12);
        }
        assert!(b_constant(2.0, 1.0, Variant::General).is_err());
        assert!(b_constant(3.0, 1.0, Variant::Frustrated { k: 0.0 }).is_err());
    }

    #[test]
    fn threshold_examples() {
        let th = long_thresholds(4.0, 16).unwrap();
        assert_eq!(th.n, vec![3, 1, 1, 1]);
        assert_abs_diff_eq!(th.m, 0.9375, epsilon = 1e-12);
        assert_eq!(th.q_star, 2);

        let th = long_thresholds(2.0, 16).unwrap();
        assert_eq!(th.n, vec![1, 1, 1, 1]);

        let th = long_thresholds(4.0, 8).unwrap();
        assert_eq!(th.n, vec![2, 1, 1]);
        assert_abs_diff_eq!(th.m, 0.875, epsilon = 1e-12);
    }

    #[test]
    fn threshold_slack_and_monotonicity() {
        for &ap in &[2.0, 2.5, 3.0, 4.0] {
            for exp in 2..=14u32 {
                let r = 1u64 << exp;
                let th = long_thresholds(ap, r).unwrap();
                assert!(
                    th.slack() < (r / 2) as u128,
                    "slack violated at alpha'={ap}, R={r}"
                );
                assert!(th.n.iter().all(|&v| v >= 1));
                if ap > 2.0 {
                    // Strictly decreasing before q*.
                    for w in th.n[..(th.q_star as usize - 1).max(1)].windows(2) {
                        assert!(w[0] > w[1], "alpha'={ap} R={r}: N not strict {:?}", th.n);
                    }
                }
            }
        }
    }
}
