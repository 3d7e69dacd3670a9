//! Combinatorics of block sequences.
//!
//! A block sequence is an ordered list of scale-block labels `(q, k)` valid
//! for a window size `R`. This module classifies sequences (creeping,
//! forward, q-forward extraction, long scales), counts irreducible
//! q-forward skeletons, and verifies the coverage, inclusion-exclusion and
//! resummation lemmas by exhaustive enumeration at small `R`.
//!
//! Two q-forward extraction rules appear:
//!
//! * [`extract_q_forward`] keeps a running maximum right edge over *all*
//!   prior steps (any scale) and records scale-`q` steps that beat it —
//!   the constructive extraction used for coverage.
//! * [`extract_q_records`] keeps the running maximum over prior *scale-q*
//!   steps only. This is the notion under which the resummation bijection
//!   is exact (see [`verify_resummation`]).
//!
//! For the filler sets of the resummation, the literal midpoint-exclusion
//! rule from the source analysis fails exhaustive validation (e.g. at
//! `R = 4`, `q = 1` the sequence `[(1,0),(1,1)]` is generated twice). The
//! validated rule, [`FillerRule::GapRule`], allows between consecutive
//! skeleton steps any block of a different scale, and same-scale blocks
//! only with `k` at most the previous skeleton step's `k` (none before the
//! first). Both variants are exposed; the default is the one that passes.

use std::collections::BTreeSet;
use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::scale::{left_edge, midpoint, num_labels, right_edge, Thresholds};

/// A block label `(q, k)`.
pub type Label = (u32, u32);

/// All valid labels for window size `R`, ordered by `(q, k)`.
pub fn alphabet(r_size: u64) -> Result<Vec<Label>> {
    if r_size < 2 || !r_size.is_power_of_two() {
        return Err(Error::argument("R must be a power of two >= 2"));
    }
    let n_star = 63 - r_size.leading_zeros();
    let mut out = Vec::new();
    for q in 1..=n_star {
        for k in 0..num_labels(r_size, q) {
            out.push((q, k as u32));
        }
    }
    Ok(out)
}

/// Creeping test: first step starts at the left edge (`k = 0`) and every
/// later step's window begins no further than the frontier already
/// reached. The empty sequence is creeping by convention.
pub fn is_creeping(steps: &[Label]) -> bool {
    if steps.is_empty() {
        return true;
    }
    if steps[0].1 != 0 {
        return false;
    }
    let mut frontier = right_edge(steps[0].0, steps[0].1);
    for &(q, k) in &steps[1..] {
        if left_edge(q, k) + 1 > frontier {
            return false;
        }
        frontier = frontier.max(right_edge(q, k));
    }
    true
}

/// Forward test: right edges strictly increase, the first step's left edge
/// is `j1`, and the last step's right edge is `j2`.
pub fn is_forward(steps: &[Label], j1: u64, j2: u64) -> bool {
    if steps.is_empty() {
        return false;
    }
    if left_edge(steps[0].0, steps[0].1) != j1 {
        return false;
    }
    let mut prev = 0u64;
    let mut first = true;
    for &(q, k) in steps {
        let re = right_edge(q, k);
        if !first && re <= prev {
            return false;
        }
        prev = re;
        first = false;
    }
    prev == j2
}

/// Constructive q-forward extraction: scan in order keeping the running
/// maximum right edge over all prior steps (any scale); record index `m`
/// iff step `m` has scale `q` and strictly beats that maximum.
pub fn extract_q_forward(steps: &[Label], q: u32) -> Vec<usize> {
    let mut out = Vec::new();
    let mut record = 0u64;
    for (idx, &(sq, sk)) in steps.iter().enumerate() {
        let re = right_edge(sq, sk);
        if sq == q && re > record {
            out.push(idx);
        }
        record = record.max(re);
    }
    out
}

/// Scale-local record extraction: as [`extract_q_forward`] but the running
/// maximum is taken over prior scale-`q` steps only.
pub fn extract_q_records(steps: &[Label], q: u32) -> Vec<usize> {
    let mut out = Vec::new();
    let mut record = 0u64;
    for (idx, &(sq, sk)) in steps.iter().enumerate() {
        if sq != q {
            continue;
        }
        let re = right_edge(sq, sk);
        if re > record {
            out.push(idx);
            record = re;
        }
    }
    out
}

/// Full classification of a sequence against thresholds.
#[derive(Clone, Debug)]
pub struct ClassificationResult {
    pub creeping: bool,
    /// Maximum right edge reached (0 for the empty sequence).
    pub frontier: u64,
    /// Extracted q-forward index lists, index `q - 1`.
    pub q_forward: Vec<Vec<usize>>,
    /// Scales whose extracted subsequence is long (`>= N_q`).
    pub long_scales: BTreeSet<u32>,
    /// First `N_q` indices of each long scale's extraction.
    pub irreducible: Vec<(u32, Vec<usize>)>,
}

/// Classify a sequence: creeping flag, frontier, all q-forward
/// extractions, long scales and irreducible prefixes.
pub fn classify(steps: &[Label], th: &Thresholds) -> ClassificationResult {
    let n_star = th.n.len() as u32;
    let frontier = steps.iter().map(|&(q, k)| right_edge(q, k)).max().unwrap_or(0);
    let mut q_forward = Vec::with_capacity(n_star as usize);
    let mut long_scales = BTreeSet::new();
    let mut irreducible = Vec::new();
    for q in 1..=n_star {
        let ext = extract_q_forward(steps, q);
        let nq = th.n[q as usize - 1] as usize;
        if ext.len() >= nq {
            long_scales.insert(q);
            irreducible.push((q, ext[..nq].to_vec()));
        }
        q_forward.push(ext);
    }
    ClassificationResult {
        creeping: is_creeping(steps),
        frontier,
        q_forward,
        long_scales,
        irreducible,
    }
}

/// Counting mode for the irreducible-skeleton formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// The displayed formula `C(2^{1-q} R, N_q)` (safe upper bound, used
    /// inside the growth bound).
    Paper,
    /// The number of valid labels is `2^{1-q} R - 1`, giving
    /// `C(2^{1-q} R - 1, N_q)` (matches brute-force enumeration).
    Exact,
}

/// Exact binomial in u128 with overflow detection.
fn binomial(n: u128, k: u128) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .ok_or_else(|| Error::numeric("binomial overflow in u128"))?;
        acc /= i + 1;
    }
    Ok(acc)
}

/// Number of irreducible q-forward skeletons of length `n_q`.
pub fn count_irreducible(r_size: u64, q: u32, n_q: u64, mode: CountMode) -> Result<u128> {
    if n_q == 0 {
        return Ok(1);
    }
    let pool = match mode {
        CountMode::Paper => (r_size >> (q - 1)) as u128,
        CountMode::Exact => num_labels(r_size, q) as u128,
    };
    binomial(pool, n_q as u128)
}

/// Number of ways to weave the skeletons of every scale in `Z` together:
/// multinomial `(sum N_q)! / prod N_q!` times the per-scale counts.
pub fn count_irreducible_z(
    r_size: u64,
    z: &[u32],
    th: &Thresholds,
    mode: CountMode,
) -> Result<u128> {
    if z.is_empty() {
        return Err(Error::argument("count_irreducible_z: Z must be nonempty"));
    }
    let mut total: u128 = 0;
    let mut multinomial: u128 = 1;
    let mut product: u128 = 1;
    for &q in z {
        if q == 0 || q as usize > th.n.len() {
            return Err(Error::argument(format!("scale {q} out of range")));
        }
        let nq = th.n[q as usize - 1] as u128;
        total += nq;
        // Multiply C(total, nq) progressively: equals the multinomial.
        multinomial = multinomial
            .checked_mul(binomial(total, nq)?)
            .ok_or_else(|| Error::numeric("multinomial overflow"))?;
        product = product
            .checked_mul(count_irreducible(r_size, q, nq as u64, mode)?)
            .ok_or_else(|| Error::numeric("count overflow"))?;
    }
    multinomial
        .checked_mul(product)
        .ok_or_else(|| Error::numeric("count overflow"))
}

/// Total number of nonempty sequences of length up to `max_len` over an
/// alphabet of `a` labels.
fn sequence_space(a: u64, max_len: usize) -> u128 {
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 0..max_len {
        pow = pow.saturating_mul(a as u128);
        total = total.saturating_add(pow);
    }
    total
}

fn check_budget(a: u64, max_len: usize, budget: u64) -> Result<()> {
    let total = sequence_space(a, max_len);
    if total > budget as u128 {
        return Err(Error::resource(format!(
            "enumeration of {total} sequences exceeds budget {budget}"
        )));
    }
    Ok(())
}

/// Outcome of the exhaustive coverage / inclusion-exclusion check.
#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub checked: u64,
    /// Creeping frontier-reaching sequences without a long scale (must be
    /// empty), capped at 16 entries.
    pub counterexamples: Vec<Vec<Label>>,
}

/// Exhaustively verify, over every sequence of length `<= max_len`:
///
/// * coverage: every creeping sequence whose frontier reaches `R` has at
///   least one long scale;
/// * inclusion-exclusion: for every sequence with nonempty long-scale set
///   `S`, the alternating subset sum over `∅ ≠ Z ⊆ S` equals 1.
pub fn verify_coverage(
    r_size: u64,
    max_len: usize,
    th: &Thresholds,
    budget: u64,
) -> Result<CoverageReport> {
    let labels = alphabet(r_size)?;
    check_budget(labels.len() as u64, max_len, budget)?;

    let partials = exec::map_indexed((0..labels.len()).collect(), |first| {
        let mut checked = 0u64;
        let mut bad: Vec<Vec<Label>> = Vec::new();
        let mut stack = vec![labels[first]];
        walk_coverage(&labels, th, r_size, max_len, &mut stack, &mut checked, &mut bad);
        (checked, bad)
    });
    let mut checked = 0u64;
    let mut counterexamples = Vec::new();
    for (c, bad) in partials {
        checked += c;
        for b in bad {
            if counterexamples.len() < 16 {
                counterexamples.push(b);
            }
        }
    }
    Ok(CoverageReport { checked, counterexamples })
}

fn walk_coverage(
    labels: &[Label],
    th: &Thresholds,
    r_size: u64,
    max_len: usize,
    stack: &mut Vec<Label>,
    checked: &mut u64,
    bad: &mut Vec<Vec<Label>>,
) {
    *checked += 1;
    let cls = classify(stack, th);
    if cls.creeping && cls.frontier == r_size && cls.long_scales.is_empty() {
        if bad.len() < 16 {
            bad.push(stack.clone());
        }
    }
    // Inclusion-exclusion identity over the nonempty long-scale set: the
    // alternating sum of (-1)^{|Z|+1} over nonempty Z ⊆ S must be 1.
    if !cls.long_scales.is_empty() {
        let s = cls.long_scales.len() as u32;
        let mut acc: i64 = 0;
        for mask in 1u64..(1 << s) {
            acc += if mask.count_ones() % 2 == 1 { 1 } else { -1 };
        }
        if acc != 1 && bad.len() < 16 {
            bad.push(stack.clone());
        }
    }
    if stack.len() < max_len {
        for &l in labels {
            stack.push(l);
            walk_coverage(labels, th, r_size, max_len, stack, checked, bad);
            stack.pop();
        }
    }
}

/// Filler rule used between consecutive skeleton steps when regenerating
/// sequences from an irreducible skeleton.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FillerRule {
    /// Before skeleton step `p`: any other-scale block; same-scale blocks
    /// only with `k <= k(skeleton step p-1)` (none before the first).
    /// This is the rule under which the bijection verifies exactly.
    GapRule,
    /// Before skeleton step `p`: any block whose window midpoint is
    /// strictly below the midpoint of the pending skeleton step. Stated in
    /// the source analysis; fails exhaustive validation (kept for the
    /// documented negative result).
    MidpointVerbatim,
    /// No restriction (control run; must fail with double counts).
    Unrestricted,
}

/// Outcome of the exhaustive resummation check.
#[derive(Clone, Debug, Serialize)]
pub struct ResummationReport {
    pub ok: bool,
    pub checked: u64,
    /// Sequences generated with multiplicity > 1 (capped at 16).
    pub double_counted: Vec<Vec<Label>>,
    /// Sequences with a long scale-q record subsequence that are never
    /// generated, or generated despite having none (capped at 16).
    pub mismatched: Vec<Vec<Label>>,
}

/// Exhaustively verify the resummation bijection at scale `q`:
///
/// every sequence of length `<= order` whose scale-local record
/// subsequence at scale `q` has length `>= N_q` is generated exactly once
/// by choosing an increasing skeleton `k_1 < … < k_{N_q}` and inserting
/// fillers per `rule`; sequences without such a subsequence are never
/// generated.
pub fn verify_resummation(
    r_size: u64,
    q: u32,
    order: usize,
    th: &Thresholds,
    rule: FillerRule,
    budget: u64,
) -> Result<ResummationReport> {
    let labels = alphabet(r_size)?;
    check_budget(labels.len() as u64, order, budget)?;
    let n_q = *th
        .n
        .get(q as usize - 1)
        .ok_or_else(|| Error::argument(format!("scale {q} out of range")))? as usize;
    let pool = num_labels(r_size, q) as u32;
    // All increasing skeletons of length N_q at scale q.
    let mut skeletons: Vec<Vec<u32>> = Vec::new();
    let mut cur = Vec::new();
    gen_increasing(0, pool, n_q, &mut cur, &mut skeletons);

    let partials = exec::map_indexed((0..labels.len()).collect(), |first| {
        let mut checked = 0u64;
        let mut doubles: Vec<Vec<Label>> = Vec::new();
        let mut mismatches: Vec<Vec<Label>> = Vec::new();
        let mut stack = vec![labels[first]];
        walk_resummation(
            &labels, q, n_q, &skeletons, rule, order, &mut stack, &mut checked,
            &mut doubles, &mut mismatches,
        );
        (checked, doubles, mismatches)
    });
    let mut checked = 0u64;
    let mut double_counted = Vec::new();
    let mut mismatched = Vec::new();
    for (c, d, m) in partials {
        checked += c;
        for s in d {
            if double_counted.len() < 16 {
                double_counted.push(s);
            }
        }
        for s in m {
            if mismatched.len() < 16 {
                mismatched.push(s);
            }
        }
    }
    Ok(ResummationReport {
        ok: double_counted.is_empty() && mismatched.is_empty(),
        checked,
        double_counted,
        mismatched,
    })
}

/// Outcome of the closed-form-vs-brute-force counting check.
#[derive(Clone, Debug, Serialize)]
pub struct CountsReport {
    pub checked: u64,
    /// `(q, N, closed-form, brute-force)` mismatches (must be empty).
    pub counterexamples: Vec<(u32, u64, u128, u128)>,
}

/// Compare `count_irreducible` in exact mode against brute-force
/// enumeration of strictly increasing skeletons, for every scale of `R`
/// and every skeleton length up to `max_n`; also check that paper mode
/// never undercounts.
pub fn verify_counts(r_size: u64, max_n: u64) -> Result<CountsReport> {
    if r_size < 2 || !r_size.is_power_of_two() {
        return Err(Error::argument("R must be a power of two >= 2"));
    }
    let n_star = 63 - r_size.leading_zeros();
    let worst = binomial(num_labels(r_size, 1) as u128, max_n as u128)?;
    if worst > 10_000_000 {
        return Err(Error::resource(format!(
            "brute-force counting of {worst} skeletons is too large"
        )));
    }
    let mut checked = 0u64;
    let mut counterexamples = Vec::new();
    for q in 1..=n_star {
        let pool = num_labels(r_size, q) as u32;
        for n in 0..=max_n {
            let mut tuples = Vec::new();
            let mut cur = Vec::new();
            gen_increasing(0, pool, n as usize, &mut cur, &mut tuples);
            let brute = tuples.len() as u128;
            let exact = count_irreducible(r_size, q, n, CountMode::Exact)?;
            let paper = count_irreducible(r_size, q, n, CountMode::Paper)?;
            checked += 1;
            if exact != brute || paper < brute {
                counterexamples.push((q, n, exact, brute));
            }
        }
    }
    Ok(CountsReport { checked, counterexamples })
}

fn gen_increasing(start: u32, pool: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if left == 0 {
        out.push(cur.clone());
        return;
    }
    for k in start..pool {
        if (pool - k) as usize >= left {
            cur.push(k);
            gen_increasing(k + 1, pool, left - 1, cur, out);
            cur.pop();
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn walk_resummation(
    labels: &[Label],
    q: u32,
    n_q: usize,
    skeletons: &[Vec<u32>],
    rule: FillerRule,
    order: usize,
    stack: &mut Vec<Label>,
    checked: &mut u64,
    doubles: &mut Vec<Vec<Label>>,
    mismatches: &mut Vec<Vec<Label>>,
) {
    *checked += 1;
    let want = (extract_q_records(stack, q).len() >= n_q) as u64;
    let got: u64 = skeletons
        .iter()
        .map(|sk| embeddings(stack, 0, 0, q, sk, rule))
        .sum();
    if got > 1 {
        if doubles.len() < 16 {
            doubles.push(stack.clone());
        }
    } else if got != want && mismatches.len() < 16 {
        mismatches.push(stack.clone());
    }
    if stack.len() < order {
        for &l in labels {
            stack.push(l);
            walk_resummation(
                labels, q, n_q, skeletons, rule, order, stack, checked, doubles, mismatches,
            );
            stack.pop();
        }
    }
}

/// Number of ways the skeleton suffix `sk[p..]` embeds into `s[i..]` with
/// all intermediate elements allowed as fillers of segment `p`.
fn embeddings(s: &[Label], i: usize, p: usize, q: u32, sk: &[u32], rule: FillerRule) -> u64 {
    if p == sk.len() {
        return 1; // trailing elements are unrestricted
    }
    if i == s.len() {
        return 0;
    }
    let mut ways = 0;
    let step = s[i];
    if step == (q, sk[p]) {
        ways += embeddings(s, i + 1, p + 1, q, sk, rule);
    }
    let filler_ok = match rule {
        FillerRule::Unrestricted => true,
        FillerRule::GapRule => step.0 != q || (p > 0 && step.1 <= sk[p - 1]),
        FillerRule::MidpointVerbatim => midpoint(step.0, step.1) < midpoint(q, sk[p]),
    };
    if filler_ok {
        ways += embeddings(s, i + 1, p, q, sk, rule);
    }
    ways
}


/// Map of sequence -> generated multiplicity for a full resummation run;
/// exposed for the CLI's JSON report.
pub fn resummation_multiplicities(
    r_size: u64,
    q: u32,
    order: usize,
    th: &Thresholds,
    rule: FillerRule,
    budget: u64,
) -> Result<HashMap<Vec<Label>, u64>> {
    let labels = alphabet(r_size)?;
    check_budget(labels.len() as u64, order, budget)?;
    let n_q = *th
        .n
        .get(q as usize - 1)
        .ok_or_else(|| Error::argument(format!("scale {q} out of range")))? as usize;
    let pool = num_labels(r_size, q) as u32;
    let mut skeletons: Vec<Vec<u32>> = Vec::new();
    let mut cur = Vec::new();
    gen_increasing(0, pool, n_q, &mut cur, &mut skeletons);
    let mut out = HashMap::new();
    let mut stack: Vec<Label> = Vec::new();
    fn walk(
        labels: &[Label],
        q: u32,
        skeletons: &[Vec<u32>],
        rule: FillerRule,
        order: usize,
        stack: &mut Vec<Label>,
        out: &mut HashMap<Vec<Label>, u64>,
    ) {
        if !stack.is_empty() {
            let got: u64 = skeletons
                .iter()
                .map(|sk| embeddings(stack, 0, 0, q, sk, rule))
                .sum();
            if got > 0 {
                out.insert(stack.clone(), got);
            }
        }
        if stack.len() < order {
            for &l in labels {
                stack.push(l);
                walk(labels, q, skeletons, rule, order, stack, out);
                stack.pop();
            }
        }
    }
    walk(&labels, q, &skeletons, rule, order, &mut stack, &mut out);
    Ok(out)
}
