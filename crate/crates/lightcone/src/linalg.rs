//! Matrix-free iterative eigenvalue estimation for Hermitian operators.
//!
//! Used for spectral norms of operators whose dense form would not fit in
//! memory, and for commutator norms during exact dynamics where a full SVD
//! per time sample would dominate the runtime.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

fn splitmix_stream(seed: u64) -> impl FnMut() -> u64 {
    let mut state = seed;
    move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// Deterministic pseudo-random dense matrix with entries uniform in the
/// unit square of the complex plane (test and validation input).
pub fn random_dense(dim: usize, seed: u64) -> Array2<Complex64> {
    let mut next = splitmix_stream(seed ^ 0xd1b5_4a32_d192_ed03);
    let mut unit = move || (next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    Array2::from_shape_fn((dim, dim), |_| Complex64::new(unit(), unit()))
}

/// Deterministic pseudo-random Hermitian matrix: `G + G†` for a random
/// dense `G`.
pub fn random_hermitian(dim: usize, seed: u64) -> Array2<Complex64> {
    let g = random_dense(dim, seed);
    let g_dag = g.t().mapv(|v| v.conj());
    g + g_dag
}

/// Eigendecomposition of a real symmetric matrix via LAPACK's
/// divide-and-conquer routine `dsyevd`, which is several times faster than
/// the QR-based `dsyev` the `Eigh` trait binds at the dimensions the
/// dynamics layer uses (2^10..2^12).
///
/// Returns `(eigenvalues ascending, eigenvector matrix U)` with the
/// eigenvectors in the columns of `U`: `A = U diag(vals) U^T`.
pub fn eigh_real_dc(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::argument("eigh_real_dc: matrix must be square and nonempty"));
    }
    // LAPACK is column-major; the input is symmetric, so the layout
    // transpose is a no-op. Eigenvectors come back in LAPACK columns,
    // i.e. in the rows of this row-major buffer.
    let mut buf = a.clone();
    let mut vals = Array1::<f64>::zeros(n);
    let ni = n as i32;
    let (jobz, uplo) = (b'V', b'U');
    let mut info: i32 = 0;
    // Workspace query.
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    unsafe {
        lapack_sys::dsyevd_(
            &(jobz as std::ffi::c_char),
            &(uplo as std::ffi::c_char),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            vals.as_mut_ptr(),
            &mut wkopt,
            &(-1i32),
            &mut iwkopt,
            &(-1i32),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::numeric(format!("dsyevd workspace query failed: info = {info}")));
    }
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &(jobz as std::ffi::c_char),
            &(uplo as std::ffi::c_char),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            vals.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::numeric(format!("dsyevd failed: info = {info}")));
    }
    // Transpose so eigenvectors sit in columns of the returned array.
    let u = buf.reversed_axes().as_standard_layout().to_owned();
    Ok((vals, u))
}

/// Deterministic pseudo-random starting vector (splitmix64 stream).
fn start_vector(dim: usize) -> Array1<Complex64> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let mut v = Array1::<Complex64>::zeros(dim);
    for e in v.iter_mut() {
        let re = (next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        let im = (next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        *e = Complex64::new(re, im);
    }
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_into(|c| c / norm)
}

/// Count of eigenvalues of the symmetric tridiagonal `(alpha, beta)` that
/// are strictly below `x` (Sturm sequence).
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0f64;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - b2 / d;
        if d == 0.0 {
            d = 1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix via
/// Sturm bisection inside the Gershgorin interval.
fn tridiag_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i == 0 { 0.0 } else { beta[i - 1].abs() }
            + if i + 1 < m { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    if m == 1 {
        return (alpha[0], alpha[0]);
    }
    let bisect = |target_below: usize| -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..140 {
            let mid = 0.5 * (a + b);
            if sturm_count(alpha, beta, mid) > target_below {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
        }
        0.5 * (a + b)
    };
    (bisect(0), bisect(m - 1))
}

/// Estimate the extreme eigenvalues of a Hermitian operator given only its
/// action `matvec(v, out)`, using a three-term Lanczos recurrence.
///
/// Returns `(lambda_min, lambda_max)`. Estimates converge from inside the
/// spectrum; `tol` is the relative stagnation threshold for early exit.
pub fn lanczos_extreme_hermitian<F>(
    dim: usize,
    max_iter: usize,
    tol: f64,
    mut matvec: F,
) -> Result<(f64, f64)>
where
    F: FnMut(&Array1<Complex64>, &mut Array1<Complex64>),
{
    if dim == 0 {
        return Err(Error::argument("lanczos: zero-dimensional space"));
    }
    let steps = max_iter.min(dim);
    let mut v = start_vector(dim);
    let mut v_prev = Array1::<Complex64>::zeros(dim);
    let mut w = Array1::<Complex64>::zeros(dim);
    let mut alphas: Vec<f64> = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);
    let mut beta_prev = 0.0f64;
    let mut last = (f64::NAN, f64::NAN);
    let mut stagnant = 0;

    for it in 0..steps {
        matvec(&v, &mut w);
        let alpha: f64 = v
            .iter()
            .zip(w.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        alphas.push(alpha);
        // w <- w - alpha v - beta_prev v_prev
        for ((wi, vi), pi) in w.iter_mut().zip(v.iter()).zip(v_prev.iter()) {
            *wi -= alpha * vi + beta_prev * pi;
        }
        let beta = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let scale = alphas.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1e-300);
        if beta <= 1e-13 * scale || it + 1 == steps {
            break;
        }
        betas.push(beta);
        std::mem::swap(&mut v_prev, &mut v);
        v.assign(&w);
        v.mapv_inplace(|c| c / beta);
        beta_prev = beta;

        if it >= 4 && it % 2 == 0 {
            let est = tridiag_extremes(&alphas, &betas);
            let span = (est.1 - est.0).abs().max(est.1.abs()).max(1.0);
            if (est.0 - last.0).abs() <= tol * span && (est.1 - last.1).abs() <= tol * span {
                stagnant += 1;
                if stagnant >= 2 {
                    return Ok(est);
                }
            } else {
                stagnant = 0;
            }
            last = est;
        }
    }
    Ok(tridiag_extremes(&alphas, &betas))
}
