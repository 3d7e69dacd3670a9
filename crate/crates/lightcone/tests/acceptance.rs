//! Acceptance gate: one test per criterion, each printing a pass/fail
//! line (`cargo test -- --nocapture` shows them; the test verdicts
//! themselves are the gate).

use lightcone::bound::{self, BoundParams, Regime};
use lightcone::dynamics::{
    casimir_project, empirical_scrambling_time, project_onto, CommutatorProbe, EvolutionSetup,
    Evolver,
};
use lightcone::linalg::random_dense;
use lightcone::model::{build_model, frustration_ratio, verify_decay, ModelFamily, ModelSpec};
use lightcone::pauli::{dense_spectral_norm, Letter};
use lightcone::scale::{
    assign_block, abstract_blocks, block_norm_bound, build_decomposition, long_thresholds,
    window_params, Thresholds, Variant,
};
use lightcone::seq::{
    count_irreducible_z, verify_counts, verify_coverage, verify_resummation, CountMode,
    FillerRule,
};

fn pass(id: u32, what: &str) {
    // Write to the raw stderr descriptor so the line survives the test
    // harness's output capture: the suite's contract is one visible
    // pass/fail line per criterion in a plain `cargo test` run. (A failed
    // criterion reports through the panic message instead.)
    use std::io::Write;
    use std::os::unix::io::FromRawFd;
    let mut err = unsafe { std::fs::File::from_raw_fd(2) };
    let _ = writeln!(err, "criterion {id:02} PASS — {what}");
    std::mem::forget(err);
}

fn spec(family: ModelFamily, n: usize, alpha: f64, seed: u64) -> ModelSpec {
    ModelSpec {
        family,
        n_sites: n,
        alpha,
        h: 1.0,
        onsite_x: 1.0,
        onsite_z: 0.5,
        seed,
    }
}

#[test]
fn criterion_01_partition() {
    for r_size in [4u64, 8, 16, 32] {
        let blocks = abstract_blocks(r_size).unwrap();
        let mut seen = std::collections::HashMap::new();
        for (q, k, members) in &blocks {
            for &(m, n) in members {
                assert!(
                    seen.insert((m, n), (*q, *k)).is_none(),
                    "pair ({m},{n}) in two blocks at R={r_size}"
                );
                assert_eq!(
                    assign_block(m as u64, n as u64, r_size).unwrap(),
                    (*q, *k)
                );
            }
        }
        // Every pair 1 <= m < n <= R appears.
        for m in 1..=(r_size as u32) {
            for n in (m + 1)..=(r_size as u32) {
                assert!(seen.contains_key(&(m, n)), "pair ({m},{n}) missing at R={r_size}");
            }
        }
        assert_eq!(seen.len() as u64, r_size * (r_size - 1) / 2);
    }
    pass(1, "every pair lies in exactly one Q(q,k) for R in {4,8,16,32}");
}

#[test]
fn criterion_02_coverage() {
    let mut checked = 0u64;
    for alpha_prime in [2.0f64, 4.0] {
        for (r_size, max_len) in [(4u64, 5usize), (8, 6)] {
            let th = long_thresholds(alpha_prime, r_size).unwrap();
            let rep = verify_coverage(r_size, max_len, &th, 10_000_000).unwrap();
            assert!(
                rep.counterexamples.is_empty(),
                "R={r_size} alpha'={alpha_prime}: {:?}",
                rep.counterexamples
            );
            checked += rep.checked;
        }
    }
    pass(2, &format!("coverage holds over {checked} enumerated sequences"));
}

#[test]
fn criterion_03_inclusion_exclusion() {
    // The alternating subset sum over every nonempty S (identity used by
    // the enumeration check, verified literally here).
    for bits in 1u32..(1 << 6) {
        let s: Vec<u32> = (0..6).filter(|i| bits >> i & 1 == 1).collect();
        let mut total: i64 = 0;
        for z_bits in 1u32..(1u32 << s.len()) {
            let size = z_bits.count_ones();
            total += if size % 2 == 1 { 1 } else { -1 };
        }
        assert_eq!(total, 1, "S = {s:?}");
    }
    // And over the full enumeration (verify_coverage checks the literal
    // per-sequence sum alongside coverage).
    let th = long_thresholds(2.0, 8).unwrap();
    let rep = verify_coverage(8, 6, &th, 10_000_000).unwrap();
    assert!(rep.counterexamples.is_empty());
    pass(3, "inclusion-exclusion multiplicity is exactly 1 for every nonempty long-scale set");
}

#[test]
fn criterion_04_resummation() {
    for alpha_prime in [2.0f64, 4.0] {
        let th = long_thresholds(alpha_prime, 4).unwrap();
        for q in [1u32, 2] {
            let rep =
                verify_resummation(4, q, 5, &th, FillerRule::GapRule, 10_000_000).unwrap();
            assert!(rep.ok, "gap rule failed at q={q}, alpha'={alpha_prime}");
            let control =
                verify_resummation(4, q, 5, &th, FillerRule::Unrestricted, 10_000_000).unwrap();
            assert!(!control.ok, "weakened control unexpectedly passed at q={q}");
        }
    }
    pass(4, "resummation bijection exact for R=4, q in {1,2}, order <= 5; weakened control fails");
}

#[test]
fn criterion_05_counting() {
    // |F_q| closed forms vs brute force, every scale of R in {4,8,16}.
    for r_size in [4u64, 8, 16] {
        let rep = verify_counts(r_size, 3).unwrap();
        assert!(rep.counterexamples.is_empty(), "R={r_size}: {:?}", rep.counterexamples);
    }
    // |F_Z| vs brute-force enumeration of interleavings at R=16 with
    // synthetic thresholds exercising N up to 3.
    let r_size = 16u64;
    let th = Thresholds {
        alpha_prime: 2.0,
        r_size,
        n: vec![3, 2, 1, 1],
        m: 0.0,
        q_star: 3,
    };
    for z in [vec![1u32], vec![2], vec![1, 2], vec![2, 3], vec![1, 4]] {
        let exact = count_irreducible_z(r_size, &z, &th, CountMode::Exact).unwrap();
        let paper = count_irreducible_z(r_size, &z, &th, CountMode::Paper).unwrap();
        let brute = brute_force_fz(r_size, &z, &th);
        assert_eq!(exact, brute, "Z={z:?}");
        assert!(paper >= exact, "Z={z:?}");
    }
    pass(5, "closed-form |F_q| and |F_Z| match brute force; paper mode never undercounts");
}

/// Count sequences of length sum(N_q) over the labels of the scales in
/// `Z` whose scale-q subsequence is strictly increasing of length N_q for
/// every q in Z.
fn brute_force_fz(r_size: u64, z: &[u32], th: &Thresholds) -> u128 {
    let mut labels: Vec<(u32, u32)> = Vec::new();
    for &q in z {
        let pool = (r_size >> (q - 1)) - 1;
        for k in 0..pool as u32 {
            labels.push((q, k));
        }
    }
    let total_len: usize = z.iter().map(|&q| th.n[q as usize - 1] as usize).sum();
    let mut count = 0u128;
    let mut stack: Vec<(u32, u32)> = Vec::new();
    fn walk(
        labels: &[(u32, u32)],
        z: &[u32],
        th: &Thresholds,
        total_len: usize,
        stack: &mut Vec<(u32, u32)>,
        count: &mut u128,
    ) {
        if stack.len() == total_len {
            for &q in z {
                let ks: Vec<u32> = stack.iter().filter(|l| l.0 == q).map(|l| l.1).collect();
                if ks.len() as u64 != th.n[q as usize - 1]
                    || !ks.windows(2).all(|w| w[0] < w[1])
                {
                    return;
                }
            }
            *count += 1;
            return;
        }
        for &l in labels {
            stack.push(l);
            walk(labels, z, th, total_len, stack, count);
            stack.pop();
        }
    }
    walk(&labels, z, th, total_len, &mut stack, &mut count);
    count
}

#[test]
fn criterion_06_casimir() {
    let mut trials = 0;
    let mut seed = 0u64;
    while trials < 100 {
        let n = 3 + (trials % 3); // n in {3,4,5}
        let dim = 1usize << n;
        let o = random_dense(dim, seed);
        seed += 1;
        let s: Vec<usize> = if trials % 2 == 0 {
            vec![trials % n]
        } else {
            vec![trials % n, (trials + 1 + trials / 7) % n]
        };
        let s: Vec<usize> = {
            let mut s = s;
            s.sort_unstable();
            s.dedup();
            s
        };
        let a = project_onto(&s, &o, n).unwrap();
        let b = casimir_project(&s, &o, n).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() <= 1e-12, "projectors disagree: n={n} S={s:?}");
        }
        let capped = dense_spectral_norm(&a).unwrap();
        let original = dense_spectral_norm(&o).unwrap();
        assert!(capped <= 2.0 * original + 1e-12, "cap violated: n={n} S={s:?}");
        trials += 1;
    }
    pass(6, "partial-trace and Casimir projectors agree to 1e-12; ‖P_S O‖ <= 2‖O‖ in 100 trials");
}

#[test]
fn criterion_07_block_norms() {
    // Window (0,16): R = 16, folded sites 1..=16 on a 17-site chain.
    let wp = window_params(0, 16).unwrap();
    let mut blocks_checked = 0;
    for family in [ModelFamily::IsingLr, ModelFamily::XxLr, ModelFamily::RandomSignXx] {
        for alpha in [2.5f64, 3.0, 3.5] {
            let cs = build_model(&spec(family, 17, alpha, 7)).unwrap();
            assert!(verify_decay(&cs).unwrap().ok);
            let blocks = build_decomposition(&wp, &cs).unwrap();
            // One spectral norm per block, shared with the K_est estimate.
            let frus = frustration_ratio(&blocks, 17).unwrap();
            assert!(frus.k_est > 0.0 && frus.k_est <= 1.0, "K_est = {}", frus.k_est);
            for rec in &frus.blocks {
                let twice = 2.0 * rec.spectral;
                let general = block_norm_bound(rec.q, alpha, 1.0, Variant::General).unwrap();
                assert!(
                    twice <= general + 1e-12,
                    "{family:?} alpha={alpha} block ({},{}): {twice} > {general}",
                    rec.q,
                    rec.k
                );
                let frustrated =
                    block_norm_bound(rec.q, alpha, 1.0, Variant::Frustrated { k: frus.k_est })
                        .unwrap();
                assert!(
                    twice <= frustrated + 1e-12,
                    "{family:?} alpha={alpha} block ({},{}): frustrated bound with measured K",
                    rec.q,
                    rec.k
                );
                blocks_checked += 1;
            }
        }
    }
    pass(
        7,
        &format!("2‖H_(q,k)‖ within Lemma-S3 bounds on {blocks_checked} blocks (general and measured-K frustrated)"),
    );
}

#[test]
fn criterion_08_threshold_slack() {
    for alpha_prime in [2.0f64, 2.5, 3.0, 4.0] {
        for exp in 2u32..=20 {
            let r_size = 1u64 << exp;
            let th = long_thresholds(alpha_prime, r_size).unwrap();
            let slack = th.slack();
            assert!(
                slack < (r_size / 2) as u128,
                "alpha'={alpha_prime} R=2^{exp}: slack {slack} >= R/2"
            );
        }
    }
    pass(8, "sum_q 2^q (N_q - 1) < R/2 for alpha' in {2,2.5,3,4}, R = 2^2..2^20 (exact integers)");
}

#[test]
fn criterion_09_constants() {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    // Independent re-derivation of the c1/c2 case table.
    for (alpha, variant) in [
        (5.0, Variant::General),          // alpha' = 4 > 2
        (3.0, Variant::General),          // alpha' = 2 (marginal)
        (2.5, Variant::General),          // alpha' = 1.5 in (1,2)
        (3.0, Variant::Frustrated { k: 0.5 }), // alpha' = 3 > 2
    ] {
        let p = BoundParams::new(alpha, 1.0, 0.5, variant).unwrap();
        let ap = p.alpha_prime();
        let b = match variant {
            Variant::General => 2f64.powf(alpha + 2.0) / ((alpha - 1.0) * (alpha - 2.0)),
            Variant::Frustrated { k } => 2f64.powf(2.0 * alpha - 0.5) / ((alpha - 1.0) * k),
        };
        let (c1, c2) = if ap > 2.0 {
            let g = (1.0 - 2f64.powf(-(ap - 2.0) / 2.0)).powi(-2);
            (
                16.0 * e2 * g * b,
                2f64.powf(2.0 + ap) * e2 / (1.0 - 2f64.powf(-ap)) * g * b,
            )
        } else if ap == 2.0 {
            (16.0 * e2 * b, 64.0 / 3.0 * e2 * b)
        } else {
            let g = (1.0 - 2f64.powf(-(2.0 - ap) / 2.0)).powi(-2);
            (
                32.0 * e2 * g * b,
                2f64.powf(2.0 + ap) * e2 / (1.0 - 2f64.powf(-ap)) * g * b,
            )
        };
        let cc = bound::case_constants(&p).unwrap();
        assert!((cc.b - b).abs() <= 1e-12 * b.abs());
        assert!((cc.c1 - c1).abs() <= 1e-12 * c1.abs(), "c1 mismatch at alpha={alpha}");
        assert!((cc.c2 - c2).abs() <= 1e-12 * c2.abs(), "c2 mismatch at alpha={alpha}");
    }
    // Marginal-case closed form: delta*Rcal/(2(2c1+c2)) equals
    // (delta/2b)(3/160e^2) * r / log2^2 r at powers of two.
    let p = BoundParams::new(3.0, 1.0, 0.5, Variant::General).unwrap();
    let cc = bound::case_constants(&p).unwrap();
    assert_eq!(cc.regime, Regime::Marginal);
    for r in [4u64, 16, 64, 1024] {
        let log2 = (r as f64).log2();
        let rcal = r as f64 / (log2 * log2);
        let lhs = 0.5 * rcal / (2.0 * (2.0 * cc.c1 + cc.c2));
        let rhs = (0.5 / (2.0 * cc.b)) * (3.0 / (160.0 * e2)) * rcal;
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "r={r}");
        // The implemented bound carries the extra conservative factor 2.
        let ts = bound::scrambling_time_bound(r, &p).unwrap();
        assert!((ts - lhs / 2.0).abs() <= 1e-12 * ts.abs());
    }
    pass(9, "b, c1, c2 case table and the marginal closed form reproduced to 1e-12 relative");
}

#[test]
fn criterion_10_bound_dominance() {
    let started = std::time::Instant::now();
    let basis = [Letter::X, Letter::Y, Letter::Z];
    let mut samples = 0u64;
    for family in [ModelFamily::IsingLr, ModelFamily::RandomSignXx] {
        for alpha in [3.0f64, 3.5, 4.0] {
            let cs = build_model(&spec(family, 10, alpha, 11)).unwrap();
            assert!(verify_decay(&cs).unwrap().ok);
            let params = BoundParams::new(alpha, 1.0, 0.5, Variant::General).unwrap();
            let ev = Evolver::new(&cs, 12).unwrap();
            for r in 3u64..=9 {
                let horizon = bound::validity_time(r, &params).unwrap();
                // All nine Pauli pairs at mid-window; the window edges are
                // probed with a single pair to stay inside the runtime
                // budget (each norm streams two dense 2^10 matrices).
                let full = CommutatorProbe::new(&ev, 0, r as usize, &basis, &basis).unwrap();
                let xz =
                    CommutatorProbe::new(&ev, 0, r as usize, &[Letter::X], &[Letter::Z]).unwrap();
                for (frac, probe) in
                    [(0.02f64, &xz), (0.1, &full), (0.5, &xz)]
                {
                    let t = frac * horizon;
                    let measured = probe.c_of_t(t).unwrap();
                    let (cap, _) = bound::commutator_bound_curve(r, t, &params).unwrap();
                    assert!(
                        measured <= cap + 1e-9,
                        "{family:?} alpha={alpha} r={r} t={t}: {measured} > {cap}"
                    );
                    samples += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 600, "criterion 10 exceeded 10 minutes: {elapsed:?}");
    pass(
        10,
        &format!("bound never undercut across {samples} (model, alpha, r, t) samples in {elapsed:?}"),
    );
}

#[test]
fn criterion_11_two_qubit_closed_form() {
    let mut s = spec(ModelFamily::IsingLr, 2, 3.0, 0);
    s.onsite_x = 0.0;
    s.onsite_z = 0.0;
    let cs = build_model(&s).unwrap();
    let setup = EvolutionSetup {
        cs: &cs,
        a_site: 0,
        b_site: 1,
        a_basis: vec![Letter::X],
        b_basis: vec![Letter::X],
        t_grid: (0..40).map(|i| i as f64 * 0.05).collect(),
        delta: 1.0,
        dense_cap: 4,
    };
    let ts = empirical_scrambling_time(&setup).unwrap().expect("crossing exists");
    let exact = std::f64::consts::PI / 12.0;
    assert!((ts - exact).abs() < 1e-3, "ts = {ts}, exact = {exact}");
    pass(11, "H = Z1 Z2, delta = 1 crosses at t = pi/12 within 1e-3");
}

#[test]
fn criterion_12_lightcone_monotonicity() {
    // Exact bound doubling across powers of two for alpha' > 2
    // (Rcal = R, so ts scales exactly by 2 in binary arithmetic).
    let p = BoundParams::new(4.0, 1.0, 0.5, Variant::General).unwrap();
    for r in [4u64, 8, 16, 32, 64] {
        let a = bound::scrambling_time_bound(r, &p).unwrap();
        let b = bound::scrambling_time_bound(2 * r, &p).unwrap();
        assert_eq!(b, 2.0 * a, "doubling not exact at r={r}");
    }

    // Empirical monotonicity at n = 12, alpha = 6, delta = 0.5. One
    // (X@0, Z@r) probe pair; the crossing is bracketed on a 0.5 grid and
    // refined by four bisection steps (resolution ~0.03, far below the
    // observed spacing between consecutive crossing times).
    let cs = build_model(&spec(ModelFamily::IsingLr, 12, 6.0, 0)).unwrap();
    let ev = Evolver::new(&cs, 12).unwrap();
    let delta = 0.5;
    let mut times = Vec::new();
    for r in [2usize, 4, 6, 8] {
        let probe = CommutatorProbe::new(&ev, 0, r, &[Letter::X], &[Letter::Z]).unwrap();
        // Start scanning from the previous crossing: C grows with t, so a
        // crossing can only move right as r increases; a violation would
        // surface as a non-increasing refined time below.
        let mut lo = times.last().copied().unwrap_or(0.0_f64).max(0.0);
        if probe.c_of_t(lo).unwrap() >= delta {
            // Crossing earlier than the previous r: rescan from zero.
            lo = 0.0;
        }
        let mut hi = lo + 0.5;
        while probe.c_of_t(hi).unwrap() < delta {
            lo = hi;
            hi += 0.5;
            assert!(hi < 12.0, "no crossing before t = 12 at r = {r}");
        }
        for _ in 0..4 {
            let mid = 0.5 * (lo + hi);
            if probe.c_of_t(mid).unwrap() >= delta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        times.push(0.5 * (lo + hi));
    }
    assert!(
        times.windows(2).all(|w| w[1] >= w[0]),
        "empirical crossing times not monotone: {times:?}"
    );
    pass(
        12,
        &format!("ts_empirical nondecreasing in r: {times:?}; bound doubles exactly across powers of two"),
    );
}
