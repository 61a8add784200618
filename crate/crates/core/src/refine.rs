//! Exact minimization of the objective along a ray.
//!
//! With `d = r_h - r` and `e = h - beta`, the objective at
//! `(1 - alpha) h + alpha beta` is
//!
//! ```text
//! g(alpha) = 1/2 ||r_h - alpha d||^2 + lambda ||h - alpha e||_1
//! ```
//!
//! and its subdifferential for `alpha > 0` is the piecewise linear,
//! nondecreasing set-valued map
//!
//! ```text
//! dg(alpha) = alpha ||d||^2 - <r_h, d> + lambda sum_i (beta_i - h_i) SGN(h_i - alpha e_i)
//! ```
//!
//! Coordinates with `h_i = 0`, or with `h_i` and `beta_i - h_i` of the same
//! sign, contribute a constant. Coordinates where the two have opposite signs
//! (the set Omega) cross zero at `w_i = h_i / (h_i - beta_i) > 0`; there the
//! subdifferential jumps by `2 lambda |beta_i - h_i|`. Coordinates with
//! `beta_i = h_i` contribute nothing.
//!
//! For `lambda = 0` the minimizer is `<r_h, d> / ||d||^2`. Otherwise it is the
//! unique `alpha` with `0 in dg(alpha)`, found either by scanning the sorted
//! breakpoints or by a bisection that snaps its probes to breakpoints.

use std::cmp::Ordering;

use crate::error::{check_len, Error, Result};
use crate::linalg::norm2;
use crate::solver::RefineMethod;

/// Bisection gives up after this many probes.
const MAX_BISECTION_STEPS: usize = 4096;

/// The data defining `g`: history point `h`, current point `beta`, their
/// residuals and the regularization weight.
#[derive(Debug, Clone, Copy)]
pub struct RefinementInput<'a> {
    pub h: &'a [f64],
    pub beta: &'a [f64],
    pub r_h: &'a [f64],
    pub r: &'a [f64],
    pub lambda: f64,
}

impl<'a> RefinementInput<'a> {
    pub fn new(
        h: &'a [f64],
        beta: &'a [f64],
        r_h: &'a [f64],
        r: &'a [f64],
        lambda: f64,
    ) -> Result<Self> {
        check_len("current iterate", h.len(), beta.len())?;
        check_len("current residual", r_h.len(), r.len())?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(RefinementInput {
            h,
            beta,
            r_h,
            r,
            lambda,
        })
    }

    /// `g(alpha)` from the residuals, without touching the design matrix.
    pub fn g(&self, alpha: f64) -> f64 {
        let loss: f64 = self
            .r_h
            .iter()
            .zip(self.r)
            .map(|(&rh, &r)| {
                let v = rh - alpha * (rh - r);
                v * v
            })
            .sum();
        let pen: f64 = self
            .h
            .iter()
            .zip(self.beta)
            .map(|(&h, &b)| (h - alpha * (h - b)).abs())
            .sum();
        0.5 * loss + self.lambda * pen
    }

    /// `||r_h - r||^2 + lambda sum |beta_i - h_i| + 1`, the magnitude root
    /// tolerances are measured against.
    pub fn scale(&self) -> f64 {
        let d_sq: f64 = self.r_h.iter().zip(self.r).map(|(a, b)| (a - b) * (a - b)).sum();
        let e1: f64 = self.h.iter().zip(self.beta).map(|(h, b)| (b - h).abs()).sum();
        d_sq + self.lambda * e1 + 1.0
    }
}

/// Where the subdifferential of `g` jumps. Coordinates sharing the same `w`
/// are merged; `index` is the smallest of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub index: usize,
    pub w: f64,
    pub jump: f64,
    pub multiplicity: usize,
}

/// Operation counts of one refinement solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefineStats {
    /// Subdifferential evaluations.
    pub evaluations: usize,
    /// Coordinate or breakpoint visits, including the setup pass.
    pub touches: usize,
    /// Breakpoints (size of Omega).
    pub breakpoints: usize,
}

enum Contribution {
    None,
    Constant(f64),
    Crossing { w: f64, half_jump: f64 },
}

#[inline]
fn classify(h: f64, beta: f64) -> Contribution {
    let e = h - beta;
    if e == 0.0 {
        Contribution::None
    } else if h == 0.0 {
        Contribution::Constant(beta.abs())
    } else if (h > 0.0) != (e > 0.0) {
        // h and beta - h share a sign: h - alpha e keeps the sign of h.
        Contribution::Constant(e.abs())
    } else {
        Contribution::Crossing {
            w: h / e,
            half_jump: e.abs(),
        }
    }
}

/// Returns the smallest and largest element of `dg(alpha)`.
pub fn subgradient_interval(input: &RefinementInput<'_>, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "subgradient is only defined for alpha > 0, got {alpha}"
        )));
    }
    let (a, b) = quadratic_terms(input);
    let linear = alpha * a - b;
    let lambda = input.lambda;
    let (mut lo, mut hi) = (linear, linear);
    for (&h, &beta) in input.h.iter().zip(input.beta) {
        match classify(h, beta) {
            Contribution::None => {}
            Contribution::Constant(v) => {
                lo += lambda * v;
                hi += lambda * v;
            }
            Contribution::Crossing { w, half_jump } => match alpha.partial_cmp(&w) {
                Some(Ordering::Less) => {
                    lo -= lambda * half_jump;
                    hi -= lambda * half_jump;
                }
                Some(Ordering::Greater) => {
                    lo += lambda * half_jump;
                    hi += lambda * half_jump;
                }
                _ => {
                    lo -= lambda * half_jump;
                    hi += lambda * half_jump;
                }
            },
        }
    }
    Ok((lo, hi))
}

/// `(||d||^2, <r_h, d>)`
fn quadratic_terms(input: &RefinementInput<'_>) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for (&rh, &r) in input.r_h.iter().zip(input.r) {
        let d = rh - r;
        a += d * d;
        b += rh * d;
    }
    (a, b)
}

fn check_not_degenerate(input: &RefinementInput<'_>, a: f64) -> Result<()> {
    if a == 0.0 || a.sqrt() <= 1e-14 * norm2(input.r_h) {
        return Err(Error::DegenerateRefinement(
            "history and current residuals coincide".into(),
        ));
    }
    Ok(())
}

/// Breakpoints of `dg`, sorted ascending by `w`, equal `w` merged.
pub fn breakpoints(input: &RefinementInput<'_>) -> Vec<Breakpoint> {
    let mut raw: Vec<Breakpoint> = input
        .h
        .iter()
        .zip(input.beta)
        .enumerate()
        .filter_map(|(i, (&h, &b))| match classify(h, b) {
            Contribution::Crossing { w, half_jump } => Some(Breakpoint {
                index: i,
                w,
                jump: 2.0 * input.lambda * half_jump,
                multiplicity: 1,
            }),
            _ => None,
        })
        .collect();
    raw.sort_by(|x, y| x.w.total_cmp(&y.w).then(x.index.cmp(&y.index)));
    let mut grouped: Vec<Breakpoint> = Vec::with_capacity(raw.len());
    for bp in raw {
        match grouped.last_mut() {
            Some(last) if last.w == bp.w => {
                last.jump += bp.jump;
                last.multiplicity += 1;
            }
            _ => grouped.push(bp),
        }
    }
    grouped
}

/// Closed-form minimizer for `lambda = 0`: `<r_h, r_h - r> / ||r_h - r||^2`.
pub fn alpha_closed_form(input: &RefinementInput<'_>) -> Result<f64> {
    if input.lambda != 0.0 {
        return Err(Error::InvalidArgument(
            "the closed form applies only to lambda = 0".into(),
        ));
    }
    let (a, b) = quadratic_terms(input);
    check_not_degenerate(input, a)?;
    Ok(b / a)
}

/// Linear part of `dg` plus the constant penalty terms: the value of `dg`
/// just to the right of zero is `c0`, and `slope` is `||d||^2`.
struct RayGeometry {
    slope: f64,
    c0: f64,
}

fn geometry(input: &RefinementInput<'_>, stats: &mut RefineStats) -> Result<RayGeometry> {
    let (a, b) = quadratic_terms(input);
    check_not_degenerate(input, a)?;
    let mut constant = 0.0;
    let mut crossing = 0.0;
    for (&h, &beta) in input.h.iter().zip(input.beta) {
        match classify(h, beta) {
            Contribution::None => {}
            Contribution::Constant(v) => constant += v,
            Contribution::Crossing { half_jump, .. } => crossing += half_jump,
        }
    }
    stats.touches += input.h.len();
    let c0 = input.lambda * (constant - crossing) - b;
    if c0 >= 0.0 {
        return Err(Error::DegenerateRefinement(
            "objective does not decrease along the ray".into(),
        ));
    }
    Ok(RayGeometry { slope: a, c0 })
}

/// Minimizer of `g` by scanning the sorted breakpoints.
pub fn alpha_by_sort(input: &RefinementInput<'_>) -> Result<f64> {
    alpha_by_sort_instrumented(input).map(|(a, _)| a)
}

pub fn alpha_by_sort_instrumented(input: &RefinementInput<'_>) -> Result<(f64, RefineStats)> {
    let mut stats = RefineStats::default();
    let geo = geometry(input, &mut stats)?;
    let bps = breakpoints(input);
    stats.touches += input.h.len();
    stats.breakpoints = bps.iter().map(|b| b.multiplicity).sum();

    // dg(alpha) = slope * alpha + c on the current piece.
    let mut c = geo.c0;
    let mut left = 0.0;
    for bp in &bps {
        stats.evaluations += 1;
        stats.touches += 1;
        let lo = geo.slope * bp.w + c;
        let hi = lo + bp.jump;
        if lo > 0.0 {
            return Ok(((-c / geo.slope).max(left).min(bp.w), stats));
        }
        if hi >= 0.0 {
            return Ok((bp.w, stats));
        }
        c += bp.jump;
        left = bp.w;
    }
    Ok(((-c / geo.slope).max(left), stats))
}

/// Minimizer of `g` by bisection with breakpoint snapping: after each midpoint
/// probe the bracket end that moved is pushed to the nearest breakpoint inside
/// the bracket, so every step either halves the bracket or discards
/// breakpoints. Once no breakpoint is left inside, the root is read off the
/// remaining linear piece.
pub fn alpha_by_bisection(input: &RefinementInput<'_>) -> Result<f64> {
    alpha_by_bisection_instrumented(input).map(|(a, _)| a)
}

pub fn alpha_by_bisection_instrumented(
    input: &RefinementInput<'_>,
) -> Result<(f64, RefineStats)> {
    let mut stats = RefineStats::default();
    let geo = geometry(input, &mut stats)?;
    let mut cands: Vec<(f64, f64)> = input
        .h
        .iter()
        .zip(input.beta)
        .filter_map(|(&h, &b)| match classify(h, b) {
            Contribution::Crossing { w, half_jump } => Some((w, 2.0 * input.lambda * half_jump)),
            _ => None,
        })
        .collect();
    stats.touches += input.h.len();
    stats.breakpoints = cands.len();

    let mut bracket = Bracket {
        slope: geo.slope,
        c: geo.c0,
        left: 0.0,
        right: 1.0,
    };

    // Grow the right end until the whole subdifferential there is positive.
    loop {
        match bracket.probe(bracket.right, &mut cands, &mut stats) {
            Probe::Root(a) => return Ok((a, stats)),
            Probe::Positive => break,
            Probe::Negative => {
                bracket.right *= 2.0;
                if !bracket.right.is_finite() {
                    return Err(Error::NumericFailure(
                        "could not bracket the refinement factor".into(),
                    ));
                }
            }
        }
    }

    for _ in 0..MAX_BISECTION_STEPS {
        if cands.is_empty() {
            return Ok((bracket.linear_root(), stats));
        }
        let mid = 0.5 * (bracket.left + bracket.right);
        let snap = match bracket.probe(mid, &mut cands, &mut stats) {
            Probe::Root(a) => return Ok((a, stats)),
            Probe::Positive => cands.iter().map(|c| c.0).reduce(f64::max),
            Probe::Negative => cands.iter().map(|c| c.0).reduce(f64::min),
        };
        stats.touches += cands.len();
        if let Some(w) = snap {
            if let Probe::Root(a) = bracket.probe(w, &mut cands, &mut stats) {
                return Ok((a, stats));
            }
        }
    }
    Err(Error::NumericFailure(format!(
        "bisection did not isolate the refinement factor in {MAX_BISECTION_STEPS} steps"
    )))
}

enum Probe {
    Root(f64),
    Positive,
    Negative,
}

/// Bracket `(left, right)` around the root. `c` is the offset of `dg` just
/// right of `left`, i.e. it already includes the jumps of every breakpoint at
/// or below `left`; the candidate list holds only breakpoints strictly inside.
struct Bracket {
    slope: f64,
    c: f64,
    left: f64,
    right: f64,
}

impl Bracket {
    /// Evaluates `dg(t)` and shrinks the bracket and candidate list to the
    /// side that still contains the root.
    fn probe(&mut self, t: f64, cands: &mut Vec<(f64, f64)>, stats: &mut RefineStats) -> Probe {
        stats.evaluations += 1;
        stats.touches += cands.len();
        let (mut below, mut at) = (0.0, 0.0);
        for &(w, jump) in cands.iter() {
            if w < t {
                below += jump;
            } else if w == t {
                at += jump;
            }
        }
        let lo = self.slope * t + self.c + below;
        let hi = lo + at;
        if lo > 0.0 {
            self.right = t;
            cands.retain(|&(w, _)| w < t);
            Probe::Positive
        } else if hi >= 0.0 {
            Probe::Root(t)
        } else {
            self.left = t;
            self.c += below + at;
            cands.retain(|&(w, _)| w > t);
            Probe::Negative
        }
    }

    fn linear_root(&self) -> f64 {
        (-self.c / self.slope).max(self.left).min(self.right)
    }
}

/// The minimizing refinement factor. Uses the closed form when `lambda = 0`
/// and the selected method otherwise. Fails with
/// [`Error::DegenerateRefinement`] when the residuals coincide or the
/// objective does not decrease from `h` toward `beta`.
pub fn minimize_g(input: &RefinementInput<'_>, method: RefineMethod) -> Result<f64> {
    let alpha = if input.lambda == 0.0 {
        alpha_closed_form(input)?
    } else {
        match method {
            RefineMethod::Auto | RefineMethod::Sort => alpha_by_sort(input)?,
            RefineMethod::Bisection => alpha_by_bisection(input)?,
        }
    };
    if alpha > 0.0 && alpha.is_finite() {
        Ok(alpha)
    } else {
        Err(Error::DegenerateRefinement(format!(
            "no positive minimizer along the ray (got {alpha})"
        )))
    }
}

/// `0 in dg(alpha)` up to `tol * scale`.
pub fn is_root(input: &RefinementInput<'_>, alpha: f64, tol: f64) -> Result<bool> {
    let (lo, hi) = subgradient_interval(input, alpha)?;
    let slack = tol * input.scale();
    Ok(lo <= slack && hi >= -slack)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_input<'a>(
        h: &'a [f64],
        beta: &'a [f64],
        r_h: &'a [f64],
        r: &'a [f64],
        lambda: f64,
    ) -> RefinementInput<'a> {
        RefinementInput::new(h, beta, r_h, r, lambda).unwrap()
    }

    // x = (1), y = (1), h = 0, beta = 0.5: r_h = 1, r = 0.5,
    // g(alpha) = 1/2 (1 - 0.5 alpha)^2 + 0.1 alpha.
    const H0: [f64; 1] = [0.0];
    const B0: [f64; 1] = [0.5];
    const RH0: [f64; 1] = [1.0];
    const R0: [f64; 1] = [0.5];

    #[test]
    fn interval_without_penalty_is_a_point() {
        let input = scalar_input(&H0, &B0, &RH0, &R0, 0.0);
        let (lo, hi) = subgradient_interval(&input, 3.0).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(lo, 3.0 * 0.25 - 0.5);
    }

    #[test]
    fn interval_scalar_instance() {
        let input = scalar_input(&H0, &B0, &RH0, &R0, 0.2);
        let (lo, hi) = subgradient_interval(&input, 1.0).unwrap();
        assert!((lo + 0.15).abs() < 1e-15 && (hi + 0.15).abs() < 1e-15);
    }

    #[test]
    fn interval_at_breakpoint_has_full_jump() {
        // h = 1, beta = -1, x = 1, y = 1: r_h = 0, r = 2.
        let input = scalar_input(&[1.0], &[-1.0], &[0.0], &[2.0], 0.2);
        let (lo, hi) = subgradient_interval(&input, 0.5).unwrap();
        assert!((hi - lo - 0.8).abs() < 1e-15);
        assert!((0.5 * (lo + hi) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn interval_rejects_nonpositive_alpha() {
        let input = scalar_input(&H0, &B0, &RH0, &R0, 0.2);
        assert!(subgradient_interval(&input, 0.0).is_err());
        assert!(subgradient_interval(&input, -1.0).is_err());
    }

    #[test]
    fn breakpoints_examples() {
        let none = scalar_input(&[0.0, 0.0], &[1.0, -2.0], &[1.0], &[0.0], 0.3);
        assert!(breakpoints(&none).is_empty());

        let one = scalar_input(&[1.0], &[-1.0], &[0.0], &[2.0], 0.3);
        let bps = breakpoints(&one);
        assert_eq!(bps.len(), 1);
        assert_eq!(bps[0].w, 0.5);

        let lam = 0.3;
        let dup = scalar_input(&[1.0, -2.0], &[0.5, -1.0], &[1.0], &[0.0], lam);
        let bps = breakpoints(&dup);
        assert_eq!(bps.len(), 1);
        assert_eq!(bps[0].w, 2.0);
        assert_eq!(bps[0].multiplicity, 2);
        assert!((bps[0].jump - 2.0 * lam * 1.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        let rh = [1.0, -2.0, 0.5];
        let input = scalar_input(&[0.0], &[1.0], &rh, &[0.0, 0.0, 0.0], 0.0);
        assert_eq!(alpha_closed_form(&input).unwrap(), 1.0);
        let half: Vec<f64> = rh.iter().map(|v| v / 2.0).collect();
        let input = scalar_input(&[0.0], &[1.0], &rh, &half, 0.0);
        assert_eq!(alpha_closed_form(&input).unwrap(), 2.0);
    }

    #[test]
    fn closed_form_degenerate() {
        let rh = [1.0, 2.0];
        let input = scalar_input(&[0.0], &[1.0], &rh, &rh, 0.0);
        assert!(matches!(
            alpha_closed_form(&input),
            Err(Error::DegenerateRefinement(_))
        ));
        let input = scalar_input(&[0.0], &[1.0], &rh, &[0.0, 0.0], 0.1);
        assert!(alpha_closed_form(&input).is_err());
    }

    #[test]
    fn scalar_instance_root_is_1_6() {
        let input = scalar_input(&H0, &B0, &RH0, &R0, 0.2);
        let a = alpha_by_sort(&input).unwrap();
        let b = alpha_by_bisection(&input).unwrap();
        assert!((a - 1.6).abs() < 1e-12, "{a}");
        assert!((b - 1.6).abs() < 1e-10, "{b}");
        // brute-force grid
        let (mut best, mut arg) = (f64::INFINITY, 0.0);
        for i in 1..=4_000_000 {
            let t = i as f64 * 1e-6;
            let g = input.g(t);
            if g < best {
                best = g;
                arg = t;
            }
        }
        assert!((arg - 1.6).abs() <= 1e-6);
    }

    #[test]
    fn empty_omega_single_piece() {
        // h = 0 everywhere: dg = alpha a - b + lambda sum |beta|.
        let h = [0.0, 0.0];
        let beta = [0.4, -0.3];
        let rh = [1.0, 1.0, 0.5];
        let r = [0.2, 0.1, 0.0];
        let lam = 0.1;
        let input = scalar_input(&h, &beta, &rh, &r, lam);
        let (a, b) = quadratic_terms(&input);
        let expect = (b - lam * 0.7) / a;
        let (got, stats) = alpha_by_bisection_instrumented(&input).unwrap();
        assert!((alpha_by_sort(&input).unwrap() - expect).abs() < 1e-14);
        assert!((got - expect).abs() < 1e-12);
        assert_eq!(stats.breakpoints, 0);
    }

    #[test]
    fn root_at_breakpoint_is_returned_exactly() {
        // One crossing at w = 0.5 whose jump straddles zero.
        let input = scalar_input(&[1.0], &[-1.0], &[1.0], &[-1.0], 2.0);
        // dg = 4 alpha - 2 -/+ 4 near 0.5: [-4, 4] at w
        let a = alpha_by_sort(&input).unwrap();
        let b = alpha_by_bisection(&input).unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(b, 0.5);
    }

    #[test]
    fn minimize_g_dispatch() {
        let input = scalar_input(&H0, &B0, &RH0, &R0, 0.0);
        assert_eq!(
            minimize_g(&input, RefineMethod::Sort).unwrap(),
            alpha_closed_form(&input).unwrap()
        );
        let input = scalar_input(&H0, &B0, &RH0, &R0, 0.2);
        let s = minimize_g(&input, RefineMethod::Sort).unwrap();
        let b = minimize_g(&input, RefineMethod::Bisection).unwrap();
        assert!((s - b).abs() < 1e-10);
    }

    #[test]
    fn ascent_ray_is_rejected() {
        // beta worse than h: g increases from 0.
        let input = scalar_input(&[0.5], &[0.0], &[0.5], &[1.0], 0.2);
        assert!(matches!(
            minimize_g(&input, RefineMethod::Sort),
            Err(Error::DegenerateRefinement(_))
        ));
        assert!(minimize_g(&input, RefineMethod::Bisection).is_err());
    }
}
