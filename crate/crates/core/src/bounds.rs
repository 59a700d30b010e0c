//! Capacity bound calculator for the `(rho_r, rho_w)` adversarial wiretap
//! channel.
//!
//! Achievable rate: `max(1 - h(rho_w) - rho_r, 0)`. Converse:
//! `1 - h(rho_w) - rho_r - min_p f(p)` with
//! `f(p) = h((2 rho_w - 1) p + 1 - rho_w) - h(rho_w) - rho_r h(p)`.
//! The minimization is a coarse grid scan refined by golden-section search.
//!
//! All functions are pure and generic over the float type.

use num_traits::Float;

use crate::error::{Error, Result};

/// Channel parameters: fraction read by the adversary and fraction of
/// injected errors. `n` is carried only by simulation configs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    pub rho_r: T,
    pub rho_w: T,
    pub n: Option<usize>,
}

impl<T: Float> ChannelParams<T> {
    /// Strict-interior parameters: `0 < rho_r < 1`, `0 < rho_w < 1/2`.
    pub fn new(rho_r: T, rho_w: T) -> Result<Self> {
        if !(rho_r > T::zero() && rho_r < T::one()) {
            return Err(Error::Domain(format!(
                "rho_r must lie in (0,1), got {}",
                rho_r.to_f64().unwrap_or(f64::NAN)
            )));
        }
        let half = T::from(0.5).unwrap();
        if !(rho_w > T::zero() && rho_w < half) {
            return Err(Error::Domain(format!(
                "rho_w must lie in (0,1/2), got {}",
                rho_w.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { rho_r, rho_w, n: None })
    }

    /// Closed-endpoint variant used by the grid emitter: admits `rho_r` in
    /// `[0,1]` and `rho_w` in `[0,1/2]` for plotting.
    pub fn new_closed(rho_r: T, rho_w: T) -> Result<Self> {
        let half = T::from(0.5).unwrap();
        if !(rho_r >= T::zero() && rho_r <= T::one()) || rho_r.is_nan() {
            return Err(Error::Domain("rho_r must lie in [0,1]".into()));
        }
        if !(rho_w >= T::zero() && rho_w <= half) || rho_w.is_nan() {
            return Err(Error::Domain("rho_w must lie in [0,1/2]".into()));
        }
        Ok(Self { rho_r, rho_w, n: None })
    }

    /// Attach a block length; `rho * n` must be integral so simulation
    /// budgets are exact.
    pub fn with_block_length(mut self, n: usize) -> Result<Self> {
        let nf = T::from(n).unwrap();
        for (name, rho) in [("rho_r", self.rho_r), ("rho_w", self.rho_w)] {
            let prod = rho * nf;
            if (prod - prod.round()).abs() > T::from(1e-9).unwrap() {
                return Err(Error::Domain(format!("{name} * n is not an integer")));
            }
        }
        self.n = Some(n);
        Ok(self)
    }
}

/// Bounds for one `(rho_r, rho_w)` pair.
#[derive(Debug, Clone, Copy)]
pub struct BoundsResult<T> {
    /// Clamped achievable rate `max(1 - h(rho_w) - rho_r, 0)`.
    pub lower: T,
    /// Unclamped achievable rate `1 - h(rho_w) - rho_r`.
    pub lower_raw: T,
    /// Converse `1 - h(rho_w) - rho_r - f_min`, reported unclamped.
    pub upper: T,
    /// Minimizer of `f` over `[0,1]` (smallest on ties).
    pub p_star: T,
    /// `min_p f(p)`, always `<= 0`.
    pub f_min: T,
    /// True iff `rho_r > 1 - 4 rho_w (1 - rho_w)` (strict).
    pub zero_capacity: bool,
}

/// Binary entropy in bits, with the `0 log 0 = 0` convention.
pub fn binary_entropy<T: Float>(p: T) -> Result<T> {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return Err(Error::Domain(format!(
            "binary_entropy needs p in [0,1], got {}",
            p.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(h_unchecked(p))
}

#[inline]
fn h_unchecked<T: Float>(p: T) -> T {
    let q = T::one() - p;
    let mut acc = T::zero();
    if p > T::zero() {
        acc = acc - p * p.log2();
    }
    if q > T::zero() {
        acc = acc - q * q.log2();
    }
    acc
}

/// The converse objective
/// `f(p) = h((2 rho_w - 1) p + 1 - rho_w) - h(rho_w) - rho_r h(p)`.
///
/// The inner argument stays in `[rho_w, 1 - rho_w]` for valid inputs, so the
/// only removable singularities are those of `h` at the endpoints of `p`.
pub fn f_objective<T: Float>(p: T, params: &ChannelParams<T>) -> Result<T> {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return Err(Error::Domain("f_objective needs p in [0,1]".into()));
    }
    let two = T::from(2.0).unwrap();
    let inner = (two * params.rho_w - T::one()) * p + T::one() - params.rho_w;
    Ok(h_unchecked(inner) - h_unchecked(params.rho_w) - params.rho_r * h_unchecked(p))
}

/// Golden-section iterations to shrink a bracket of width `w0` below `tol`:
/// each step multiplies the width by `1/phi ~ 0.618`.
const GOLDEN_INV: f64 = 0.618_033_988_749_894_9;

/// Minimize `f` over `[0,1]`.
///
/// A 1e-3 coarse grid locates the basin (guarding against the interior
/// minima `f` can have), then golden-section search refines it. Ties between
/// minima resolve to the smallest `p_star`; `f` is symmetric about 1/2, so a
/// symmetric pair always reports the left member.
pub fn minimize_f<T: Float>(params: &ChannelParams<T>) -> Result<(T, T)> {
    let f = |p: T| f_objective(p, params).expect("p stays in [0,1]");
    let steps = 1000usize;
    let step = T::one() / T::from(steps).unwrap();

    // Coarse scan; strict `<` keeps the smallest minimizer on ties.
    let mut best_i = 0usize;
    let mut best_f = f(T::zero());
    for i in 1..=steps {
        let p = if i == steps { T::one() } else { T::from(i).unwrap() * step };
        let v = f(p);
        if v < best_f {
            best_f = v;
            best_i = i;
        }
    }

    // Bracket one grid step either side of the coarse minimum.
    let mut a = if best_i == 0 { T::zero() } else { T::from(best_i - 1).unwrap() * step };
    let mut b = if best_i >= steps { T::one() } else { T::from(best_i + 1).unwrap() * step };

    let tol = T::from(1e-9).unwrap();
    let ratio = T::from(GOLDEN_INV).unwrap();
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    let mid = (a + b) / T::from(2.0).unwrap();

    // The refined value can only improve on the coarse one; keep whichever
    // candidate is smaller, preferring the smaller p on exact ties.
    let mut p_star = mid;
    let mut f_min = f(mid);
    let coarse_p = if best_i == steps { T::one() } else { T::from(best_i).unwrap() * step };
    if best_f < f_min || (best_f == f_min && coarse_p < p_star) {
        p_star = coarse_p;
        f_min = best_f;
    }
    // f(0) = 0 exactly; never report a spurious positive minimum, and
    // collapse float noise around zero to the exact endpoint value.
    if f_min > T::from(-1e-12).unwrap() {
        p_star = T::zero();
        f_min = T::zero();
    }
    Ok((p_star, f_min))
}

/// Full bound computation for one parameter pair.
pub fn capacity_bounds<T: Float>(params: &ChannelParams<T>) -> Result<BoundsResult<T>> {
    let four = T::from(4.0).unwrap();
    let lower_raw = T::one() - h_unchecked(params.rho_w) - params.rho_r;
    let (p_star, f_min) = minimize_f(params)?;
    Ok(BoundsResult {
        lower: lower_raw.max(T::zero()),
        lower_raw,
        upper: lower_raw - f_min,
        p_star,
        f_min,
        zero_capacity: params.rho_r
            > T::one() - four * params.rho_w * (T::one() - params.rho_w),
    })
}

/// One row of the figure-data grid.
#[derive(Debug, Clone)]
pub struct GridRow<T> {
    pub rho_r: T,
    pub rho_w: T,
    pub result: BoundsResult<T>,
    /// `lower / upper` when `upper > 0`.
    pub ratio: Option<T>,
    /// True when `rho_r <= 1 - h(rho_w)`, the region where the converse
    /// formula is stated; rows outside it are emitted but marked.
    pub regime_ok: bool,
}

/// Bounds for every `rho_w` in the list and every `rho_r` in
/// `{step, 2 step, ...} < 1`, ordered by `(rho_w, rho_r)`.
pub fn bounds_grid<T: Float>(rho_w_list: &[T], rho_r_step: T) -> Result<Vec<GridRow<T>>> {
    if !(rho_r_step > T::zero()) {
        return Err(Error::Domain("rho_r_step must be positive".into()));
    }
    let half = T::from(0.5).unwrap();
    for &w in rho_w_list {
        if !(w > T::zero() && w < half) {
            return Err(Error::Domain("each rho_w must lie in (0,1/2)".into()));
        }
    }
    let mut rows = Vec::new();
    for &rho_w in rho_w_list {
        let mut k = 1usize;
        loop {
            let rho_r = T::from(k).unwrap() * rho_r_step;
            if !(rho_r < T::one()) {
                break;
            }
            let params = ChannelParams::new_closed(rho_r, rho_w)?;
            let result = capacity_bounds(&params)?;
            let ratio = if result.upper > T::zero() {
                Some(result.lower / result.upper)
            } else {
                None
            };
            rows.push(GridRow {
                rho_r,
                rho_w,
                result,
                ratio,
                regime_ok: rho_r <= T::one() - h_unchecked(rho_w),
            });
            k += 1;
        }
    }
    Ok(rows)
}

/// Render grid rows as the `bounds` CSV: 9 significant digits, `\n` line
/// endings, empty ratio when `upper <= 0`.
pub fn grid_to_csv<T: Float>(rows: &[GridRow<T>]) -> String {
    let mut out = String::from("rho_r,rho_w,lower_raw,lower,upper,p_star,f_min,ratio,regime\n");
    let fmt = |v: T| format!("{:.9}", v.to_f64().unwrap());
    for row in rows {
        let r = &row.result;
        let ratio = row.ratio.map(fmt).unwrap_or_default();
        let regime = if row.regime_ok { "ok" } else { "extrapolated" };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(row.rho_r),
            fmt(row.rho_w),
            fmt(r.lower_raw),
            fmt(r.lower),
            fmt(r.upper),
            fmt(r.p_star),
            fmt(r.f_min),
            ratio,
            regime,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h64(p: f64) -> f64 {
        binary_entropy(p).unwrap()
    }

    #[test]
    fn entropy_known_values() {
        assert_eq!(h64(0.5), 1.0);
        assert_eq!(h64(0.0), 0.0);
        assert_eq!(h64(1.0), 0.0);
        // frozen from direct evaluation of -p log2 p - (1-p) log2 (1-p)
        assert!((h64(0.25) - 0.8112781244591328).abs() < 1e-6);
    }

    #[test]
    fn entropy_rejects_out_of_domain() {
        assert!(binary_entropy(-0.1f64).is_err());
        assert!(binary_entropy(1.1f64).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn entropy_generic_over_f32() {
        let v: f32 = binary_entropy(0.25f32).unwrap();
        assert!((v - 0.811_278_1).abs() < 1e-5);
    }

    #[test]
    fn f_objective_endpoints_vanish() {
        for &(rr, rw) in &[(0.2, 0.1), (0.5, 0.25), (0.9, 0.45), (0.01, 0.49)] {
            let params = ChannelParams::new(rr, rw).unwrap();
            assert!(f_objective(0.0, &params).unwrap().abs() <= 1e-12);
            assert!(f_objective(1.0, &params).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn f_objective_at_half() {
        // inner argument is exactly 1/2, so f(1/2) = 1 - h(rho_w) - rho_r/1... h(1/2)=1
        let params = ChannelParams::new(0.2, 0.1).unwrap();
        let expected = 1.0 - h64(0.1) - 0.2;
        assert!((f_objective(0.5, &params).unwrap() - expected).abs() < 1e-6);
        assert!((expected - 0.331004).abs() < 1e-6);
    }

    /// Brute-force grid oracle for `min_p f(p)`, independent of the
    /// golden-section path.
    fn grid_oracle(params: &ChannelParams<f64>, steps: usize) -> (f64, f64) {
        let mut best_p = 0.0;
        let mut best_f = f_objective(0.0, params).unwrap();
        for i in 1..=steps {
            let p = i as f64 / steps as f64;
            let v = f_objective(p, params).unwrap();
            if v < best_f {
                best_f = v;
                best_p = p;
            }
        }
        (best_p, best_f)
    }

    #[test]
    fn minimize_matches_grid_oracle() {
        for &(rr, rw) in &[(0.2, 0.1), (0.5, 0.25), (0.1, 0.4), (0.8, 0.05)] {
            let params = ChannelParams::new(rr, rw).unwrap();
            let (p_star, f_min) = minimize_f(&params).unwrap();
            let (gp, gf) = grid_oracle(&params, 1_000_000);
            assert!((f_min - gf).abs() <= 1e-6, "f mismatch at ({rr},{rw})");
            // f(p) = f(1-p): the oracle may land on either member of a
            // symmetric pair, minimize_f always reports the left one
            let p_dist = (p_star - gp).abs().min((p_star - (1.0 - gp)).abs());
            assert!(p_dist <= 1e-5, "p mismatch at ({rr},{rw})");
            assert!(p_star <= 0.5 + 1e-9);
            assert!(f_min <= 0.0);
        }
    }

    #[test]
    fn minimize_symmetric_pair_returns_smaller_p() {
        // f(p) = f(1-p), so the reported minimizer must sit in [0, 1/2].
        let params = ChannelParams::new(0.5, 0.25).unwrap();
        let (p_star, f_min) = minimize_f(&params).unwrap();
        let mirrored = f_objective(1.0 - p_star, &params).unwrap();
        assert!((mirrored - f_min).abs() < 1e-9);
        assert!(p_star <= 0.5 + 1e-9);
    }

    #[test]
    fn minimize_degenerate_rho_r_zero() {
        // rho_r -> 0: f >= 0 with equality only at the endpoints.
        let params = ChannelParams::new_closed(0.0, 0.1).unwrap();
        let (p_star, f_min) = minimize_f(&params).unwrap();
        assert_eq!(f_min, 0.0);
        assert_eq!(p_star, 0.0);
    }

    #[test]
    fn capacity_bounds_example() {
        let params = ChannelParams::new(0.1, 0.1).unwrap();
        let b = capacity_bounds(&params).unwrap();
        assert!((b.lower - 0.431004).abs() < 1e-6);
        assert!(b.upper >= b.lower);
        assert!(b.f_min < 0.0);
    }

    #[test]
    fn zero_capacity_threshold_at_quarter() {
        // rho_w = 0.25: 1 - 4*0.25*0.75 = 0.25
        for &(rr, expect) in &[(0.24, false), (0.25, false), (0.26, true)] {
            let params = ChannelParams::new(rr, 0.25).unwrap();
            assert_eq!(capacity_bounds(&params).unwrap().zero_capacity, expect);
        }
    }

    #[test]
    fn lower_clamps_to_zero_at_entropy_boundary() {
        let rho_w = 0.1f64;
        let rho_r = 1.0 - h64(rho_w);
        let params = ChannelParams::new(rho_r, rho_w).unwrap();
        let b = capacity_bounds(&params).unwrap();
        assert_eq!(b.lower, 0.0);
        assert!(b.lower_raw.abs() < 1e-15);
    }

    #[test]
    fn grid_cardinality_and_order() {
        let rows = bounds_grid(&[0.1], 0.5).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].rho_r - 0.5).abs() < 1e-12);

        let rows = bounds_grid(&[0.05, 0.1], 0.25).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.windows(2).all(|w| (w[0].rho_w, w[0].rho_r) < (w[1].rho_w, w[1].rho_r)
            || w[0].rho_w < w[1].rho_w));
    }

    #[test]
    fn grid_rejects_bad_spec() {
        assert!(bounds_grid(&[0.1], 0.0).is_err());
        assert!(bounds_grid(&[0.5], 0.1).is_err());
    }

    #[test]
    fn grid_monotone_in_rho_r() {
        let rows = bounds_grid(&[0.05, 0.1, 0.2], 0.01).unwrap();
        for pair in rows.windows(2) {
            if pair[0].rho_w == pair[1].rho_w {
                assert!(pair[1].result.upper <= pair[0].result.upper + 1e-12);
                assert!(pair[1].result.lower <= pair[0].result.lower + 1e-12);
            }
        }
    }

    #[test]
    fn csv_shape() {
        let rows = bounds_grid(&[0.25], 0.4).unwrap();
        let csv = grid_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "rho_r,rho_w,lower_raw,lower,upper,p_star,f_min,ratio,regime"
        );
        assert_eq!(csv.lines().count(), 1 + rows.len());
        assert!(csv.ends_with('\n'));
        // high rho_r at rho_w=0.25 has upper <= 0: empty ratio field
        let last = csv.lines().last().unwrap();
        let fields: Vec<_> = last.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert!(fields[7].is_empty());
    }

    proptest! {
        #[test]
        fn entropy_symmetric(p in 0.0f64..=1.0) {
            prop_assert!((h64(p) - h64(1.0 - p)).abs() <= 1e-12);
        }

        #[test]
        fn f_minimum_nonpositive(rr in 0.01f64..0.99, rw in 0.01f64..0.49) {
            // interior minima can be arbitrarily close to 0 (they sit at
            // exponentially small p), so only nonpositivity is universal
            let params = ChannelParams::new(rr, rw).unwrap();
            let (_, f_min) = minimize_f(&params).unwrap();
            prop_assert!(f_min <= 0.0);
        }

        #[test]
        fn lower_never_exceeds_upper(rr in 0.001f64..0.999, rw in 0.001f64..0.499) {
            let params = ChannelParams::new(rr, rw).unwrap();
            let b = capacity_bounds(&params).unwrap();
            prop_assert!(b.lower <= b.upper + 1e-12);
        }
    }
}
