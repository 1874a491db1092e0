//! The diamond update for one null cell and one row sweep.

/// Radiation-field magnitude treated as scheme blow-up.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Diamond rule `N = E + W − S − κ (E + W)/2 + (h²/4) source`.
///
/// `kappa` is the discrete potential weight; in the bulk it equals
/// `h² ℓ(ℓ+1) / (4 r_c²)`.
#[inline(always)]
pub fn diamond_cell(e: f64, w: f64, s: f64, kappa: f64, source: f64, h: f64) -> f64 {
    e + w - s - 0.5 * kappa * (e + w) + 0.25 * h * h * source
}

/// Potential weight for the cell whose centre sits at `r_c = x·h/2`.
///
/// Chosen so that the static regular solution `r^{ℓ+1}` is reproduced
/// exactly; it agrees with `h² ℓ(ℓ+1) / (4 r_c²)` up to `O(x⁻⁴)`.
pub fn potential_weight(ell: usize, x: usize) -> f64 {
    if ell == 0 {
        return 0.0;
    }
    let n = ell + 1;
    let inv = 1.0 / x as f64;
    // even binomial terms of (x+1)^n + (x−1)^n, divided by x^n
    let mut binom = 1.0;
    let mut pow = 1.0;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..=n {
        if k % 2 == 0 {
            den += binom * pow;
            if k >= 2 {
                num += binom * pow;
            }
        }
        binom = binom * (n - k) as f64 / (k + 1) as f64;
        pow *= inv;
    }
    2.0 * num / den
}

/// Table of `potential_weight` for every mode and every `x ∈ [0, x_max]`,
/// stored `[k·(x_max+1) + x]`.
pub fn potential_table(ells: &[usize], x_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; ells.len() * (x_max + 1)];
    for (k, &ell) in ells.iter().enumerate() {
        for x in 1..=x_max {
            out[k * (x_max + 1) + x] = potential_weight(ell, x);
        }
    }
    out
}

/// Sweeps row `i` into row `i + 1` for all modes.
///
/// Arrays are node-major with `n_modes` values per node; `sources[j·M+k]`
/// belongs to the cell whose north corner is `(i+1, j)`. `kappa` is the
/// table from [`potential_table`] with `x_max = n_v`.
#[allow(clippy::too_many_arguments)]
pub fn diamond_step(
    prev: &[f64],
    next: &mut [f64],
    sources: Option<&[f64]>,
    kappa: &[f64],
    i: usize,
    n_v: usize,
    n_modes: usize,
    h: f64,
) {
    let m = n_modes;
    let stride = n_v + 1;
    for k in 0..m {
        next[(i + 1) * m + k] = 0.0;
    }
    for j in (i + 2)..=n_v {
        let x = j - i - 1;
        for k in 0..m {
            let e = prev[j * m + k];
            let s = prev[(j - 1) * m + k];
            let w = next[(j - 1) * m + k];
            let src = sources.map_or(0.0, |src| src[j * m + k]);
            next[j * m + k] = diamond_cell(e, w, s, kappa[k * stride + x], src, h);
        }
    }
}
