//! Error-bounded evaluation of the peaked series
//! `I(n, a) = n^(1-a) * sum_k exp(-n f(k/n^a)) g(k/n^a)` and of the reference
//! integral `n * int_0^inf exp(-n f) g dx`.

use serde::{Deserialize, Serialize};

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::exponent::ScaleExponent;
use crate::piecewise::PiecewiseFunction;
use crate::poly::Polynomial;
use crate::quadrature;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesProblem {
    pub f: PiecewiseFunction,
    pub g: PiecewiseFunction,
    pub alpha: ScaleExponent,
}

impl SeriesProblem {
    pub fn new(f: PiecewiseFunction, g: PiecewiseFunction, alpha: impl Into<ScaleExponent>) -> Self {
        Self {
            f,
            g,
            alpha: alpha.into(),
        }
    }

    /// Integrand `exp(-n (f(x) - shift)) g(x)`, zero where `f = +inf`.
    #[inline]
    pub(crate) fn weight(&self, x: f64, n: f64, shift: f64) -> f64 {
        let fx = self.f.eval(x);
        if fx == f64::INFINITY {
            return 0.0;
        }
        let gx = self.g.eval(x);
        if gx == 0.0 {
            return 0.0;
        }
        (-n * (fx - shift)).exp() * gx
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumResult {
    pub value: f64,
    pub terms_used: usize,
    pub truncation_bound: f64,
}

/// A sum held as `mantissa * exp(log_scale)` so that large `n f` never
/// overflows or underflows before the caller decides how to combine it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledSum {
    pub mantissa: f64,
    pub log_scale: f64,
    pub terms_used: usize,
    pub truncation_bound: f64,
}

impl ScaledSum {
    pub fn value(&self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * self.log_scale.exp()
    }

    pub fn into_result(self) -> SumResult {
        let scale = self.log_scale.exp();
        SumResult {
            value: self.value(),
            terms_used: self.terms_used,
            truncation_bound: if self.truncation_bound == 0.0 {
                0.0
            } else {
                self.truncation_bound * scale
            },
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub rel_tol: f64,
    /// Hard cap on evaluated terms; exceeding it means the series does not
    /// decay and is reported as [`Error::NonSummable`].
    pub max_terms: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 50_000_000,
        }
    }
}

impl SeriesOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

const RATIO_WINDOW: usize = 8;

pub fn eval_series_direct(problem: &SeriesProblem, n: u64, rel_tol: f64) -> Result<SumResult> {
    eval_series_scaled(problem, n, SeriesOptions::with_tol(rel_tol)).map(ScaledSum::into_result)
}

pub fn eval_series_scaled(problem: &SeriesProblem, n: u64, opts: SeriesOptions) -> Result<ScaledSum> {
    if n < 1 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rel_tol must lie in (0, 1), got {}",
            opts.rel_tol
        )));
    }
    let nf = n as f64;
    let prefactor = nf.powf(1.0 - problem.alpha.value());
    let s = nf.powf(problem.alpha.value());
    let f = &problem.f;

    let (x_min, _) = match f.minimum(0.0, f64::INFINITY) {
        Ok(m) => m,
        Err(Error::UnboundedBelow) => {
            return Err(Error::NonSummable("f is unbounded below".into()))
        }
        Err(Error::EmptyDomain) => return Err(Error::EmptyDomain),
        Err(e) => return Err(e),
    };
    let k0 = start_index(f, s, x_min).ok_or(Error::EmptyDomain)?;
    let f_ref = f.eval(k0 as f64 / s);

    if problem.g.is_identically_zero() {
        return Ok(ScaledSum {
            mantissa: 0.0,
            log_scale: 0.0,
            terms_used: 1,
            truncation_bound: 0.0,
        });
    }

    let mut acc = NeumaierSum::new();
    let mut terms = 0usize;
    let mut peak = 0.0f64;
    let mut bound = 0.0;
    for forward in [true, false] {
        let start = if forward { Some(k0) } else { k0.checked_sub(1) };
        if let Some(start) = start {
            bound += sweep(problem, nf, s, f_ref, start, forward, opts, &mut acc, &mut terms, &mut peak)?;
        }
    }
    Ok(ScaledSum {
        mantissa: acc.value() * prefactor,
        log_scale: -nf * f_ref,
        terms_used: terms.max(1),
        truncation_bound: bound * prefactor,
    })
}

/// Grid index nearest the minimiser of `f` at which `f` is finite.
fn start_index(f: &PiecewiseFunction, s: f64, x_min: f64) -> Option<u64> {
    let centre = (x_min * s).round().max(0.0);
    let mut best: Option<(u64, f64)> = None;
    let lo = (centre - 1.0).max(0.0) as u64;
    for k in lo..=(centre as u64 + 1) {
        let v = f.eval(k as f64 / s);
        if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
            best = Some((k, v));
        }
    }
    if let Some((k, _)) = best {
        return Some(k);
    }
    // No finite value next to the minimiser: look for the nearest piece that
    // contains a grid point.
    let mut nearest: Option<(u64, f64)> = None;
    for p in f.pieces() {
        let k = (p.a.max(0.0) * s).ceil();
        if k.is_finite() && k / s <= p.b {
            let d = (k - centre).abs();
            if nearest.is_none_or(|(_, bd)| d < bd) {
                nearest = Some((k as u64, d));
            }
        }
    }
    nearest.map(|(k, _)| k)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    problem: &SeriesProblem,
    n: f64,
    s: f64,
    f_ref: f64,
    start: u64,
    forward: bool,
    opts: SeriesOptions,
    acc: &mut NeumaierSum,
    terms: &mut usize,
    peak: &mut f64,
) -> Result<f64> {
    let f = &problem.f;
    let mut ratios = [f64::INFINITY; RATIO_WINDOW];
    let mut filled = 0usize;
    let mut prev: Option<f64> = None;
    let mut k = start as i128;
    loop {
        if k < 0 {
            return Ok(0.0);
        }
        let x = k as f64 / s;
        let fx = f.eval(x);
        if fx == f64::INFINITY {
            match f.next_finite(x, forward) {
                Some(nx) if nx != x => {
                    let nk = if forward { (nx * s).ceil() } else { (nx * s).floor() };
                    let nk = nk as i128;
                    if (forward && nk <= k) || (!forward && nk >= k) || nk < 0 {
                        return Ok(0.0);
                    }
                    if f.eval(nk as f64 / s).is_infinite() {
                        // The next finite stretch holds no grid point; skip past it.
                        let piece_end = f
                            .piece_at(nx)
                            .map(|p| if forward { p.b } else { p.a })
                            .unwrap_or(nx);
                        let skip = if forward {
                            (piece_end * s).floor() as i128 + 1
                        } else {
                            (piece_end * s).ceil() as i128 - 1
                        };
                        if skip == k || !piece_end.is_finite() {
                            return Ok(0.0);
                        }
                        k = skip;
                    } else {
                        k = nk;
                    }
                    prev = None;
                    filled = 0;
                    continue;
                }
                _ => return Ok(0.0),
            }
        }
        let term = problem.weight(x, n, f_ref);
        if !term.is_finite() {
            return Err(Error::NonSummable(format!("term at k = {k} is not finite")));
        }
        acc.add(term);
        *terms += 1;
        if *terms > opts.max_terms {
            return Err(Error::NonSummable(format!(
                "terms did not decay within {} evaluations",
                opts.max_terms
            )));
        }
        let m = term.abs();
        *peak = peak.max(m);
        if let Some(pm) = prev {
            let r = if pm > 0.0 {
                m / pm
            } else if m == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            ratios[filled % RATIO_WINDOW] = r;
            filled += 1;
        }
        prev = Some(m);
        if filled >= RATIO_WINDOW && m <= opts.rel_tol * *peak {
            let r_max = ratios.iter().copied().fold(0.0, f64::max);
            if r_max < 1.0 {
                let tail = m * r_max / (1.0 - r_max);
                let total = acc.value().abs();
                if tail <= 0.5 * opts.rel_tol * total || (total == 0.0 && tail == 0.0) {
                    return Ok(tail);
                }
            }
        }
        k += if forward { 1 } else { -1 };
    }
}

/// Lower integration limit: every region below zero is excluded.
const DOMAIN_LO: f64 = 0.0;

pub fn eval_integral(problem: &SeriesProblem, n: u64, rel_tol: f64) -> Result<SumResult> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    if problem.g.is_identically_zero() {
        return Ok(SumResult {
            value: 0.0,
            terms_used: 1,
            truncation_bound: 0.0,
        });
    }
    let nf = n as f64;
    let (x_min, f_ref) = match problem.f.minimum(DOMAIN_LO, f64::INFINITY) {
        Ok(m) => m,
        Err(Error::UnboundedBelow) => {
            return Err(Error::NonIntegrable("f is unbounded below".into()))
        }
        Err(e) => return Err(e),
    };
    let r = integrate_scaled(problem, nf, f_ref, x_min, DOMAIN_LO, f64::INFINITY, rel_tol)?;
    let scale = nf * (-nf * f_ref).exp();
    Ok(SumResult {
        value: r.value * scale,
        terms_used: r.intervals.max(1),
        truncation_bound: r.error * scale,
    })
}

pub(crate) struct ScaledIntegral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// `int_lo^hi exp(-n (f - f_ref)) g dx` over the finite regions of `f`, with an
/// analytic bound for an unbounded last piece.
pub(crate) fn integrate_scaled(
    problem: &SeriesProblem,
    n: f64,
    f_ref: f64,
    x_min: f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<ScaledIntegral> {
    let f = &problem.f;
    let g = &problem.g;
    let width = peak_width(f, n, x_min);

    let mut knots: Vec<f64> = f.breakpoints();
    knots.extend(g.breakpoints());
    knots.push(lo);
    for j in [1.0, 3.0, 9.0, 27.0] {
        knots.push(x_min - j * width);
        knots.push(x_min + j * width);
    }
    knots.push(x_min);
    knots.retain(|v| v.is_finite() && *v >= lo && *v <= hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    // Right end of the finite part of the domain.
    let last_end = if !f.outside().is_finite() {
        f.pieces().last().map(|p| p.b).unwrap_or(lo)
    } else {
        f64::INFINITY
    };
    let right = hi.min(last_end);
    let mut total = NeumaierSum::new();
    let mut error = 0.0;
    let mut intervals = 0usize;

    let finite_right = if right.is_finite() {
        right
    } else {
        tail_start(problem, n, f_ref, x_min, width, lo, rel_tol)?
    };
    knots.retain(|v| *v <= finite_right);
    if knots.last().is_none_or(|&v| v < finite_right) {
        knots.push(finite_right);
    }
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        if f.eval(mid) == f64::INFINITY {
            continue;
        }
        let r = quadrature::integrate(
            |x| problem.weight(x, n, f_ref),
            a,
            b,
            &[],
            0.1 * rel_tol,
            0.0,
            4000,
        );
        total.add(r.value);
        error += r.error;
        intervals += r.intervals;
    }
    let value = total.value();
    if !right.is_finite() {
        let tail = tail_bound(problem, n, f_ref, finite_right)?;
        error += tail;
    }
    if !value.is_finite() {
        return Err(Error::NonIntegrable("integral overflowed".into()));
    }
    Ok(ScaledIntegral {
        value,
        error,
        intervals,
    })
}

fn peak_width(f: &PiecewiseFunction, n: f64, x_min: f64) -> f64 {
    let f2 = f.derivative(x_min, 2);
    let f1 = f.derivative(x_min, 1).abs();
    let w = if f2.is_finite() && f2 > 0.0 {
        1.0 / (n * f2).sqrt()
    } else if f1.is_finite() && f1 > 0.0 {
        1.0 / (n * f1)
    } else {
        1.0 / n.sqrt()
    };
    w.clamp(1e-300, 1.0)
}

/// Chooses a cut point `X` beyond which the unbounded last piece is convex
/// and increasing, and the analytic tail bound is negligible.
fn tail_start(
    problem: &SeriesProblem,
    n: f64,
    f_ref: f64,
    x_min: f64,
    width: f64,
    lo: f64,
    rel_tol: f64,
) -> Result<f64> {
    let f = &problem.f;
    let Some(last) = f.pieces().last().filter(|p| p.b.is_infinite()) else {
        return Err(Error::NonIntegrable(
            "finite outside value gives an unbounded region".into(),
        ));
    };
    if last.poly.degree() == 0 {
        return Err(Error::NonIntegrable("f is constant on an unbounded piece".into()));
    }
    let convex_from = last
        .derivative_roots(2, last.a, f64::INFINITY)
        .into_iter()
        .chain(last.derivative_roots(1, last.a, f64::INFINITY))
        .fold(last.a, f64::max);
    let mut x = convex_from.max(x_min).max(lo).max(last.a) + 10.0 * width;
    let reference = {
        let probe = quadrature::integrate(
            |t| problem.weight(t, n, f_ref),
            (x_min - 10.0 * width).max(lo),
            x_min + 10.0 * width,
            &[x_min],
            1e-6,
            0.0,
            200,
        );
        probe.value.abs().max(f64::MIN_POSITIVE)
    };
    for _ in 0..200 {
        if last.eval_derivative(x, 1) > 0.0 {
            let b = tail_bound(problem, n, f_ref, x)?;
            if b <= 0.01 * rel_tol * reference {
                return Ok(x);
            }
        }
        x += (x - x_min).abs().max(width);
    }
    Err(Error::NonIntegrable("tail bound could not be established".into()))
}

/// Bound on `int_X^inf exp(-n (f - f_ref)) |g| dx` using
/// `f(x) >= f(X) + f'(X)(x - X)` and `|g(x)| <= sum |c_i| x^i`.
fn tail_bound(problem: &SeriesProblem, n: f64, f_ref: f64, x: f64) -> Result<f64> {
    let f = &problem.f;
    let fx = f.eval(x);
    let slope = f.derivative(x, 1);
    if !(slope > 0.0) {
        return Err(Error::NonIntegrable(format!("f is not increasing at {x}")));
    }
    let lambda = n * slope;
    let g_major: Polynomial = match problem.g.piece_at(x) {
        Some(p) if p.b.is_infinite() => Polynomial::new(
            p.taylor_at(0.0).iter().map(|c| c.abs()).collect(),
        ),
        Some(_) => {
            return Err(Error::NonIntegrable(
                "g changes piece inside the tail region".into(),
            ))
        }
        None => Polynomial::constant(problem.g.outside().abs()),
    };
    if problem
        .g
        .pieces()
        .iter()
        .any(|p| p.a > x || (p.b > x && p.b.is_finite()))
    {
        return Err(Error::NonIntegrable(
            "g changes piece inside the tail region".into(),
        ));
    }
    // int_X^inf x^i e^{-lambda (x - X)} dx = sum_j i!/(i-j)! X^(i-j) / lambda^(j+1)
    let mut bound = 0.0;
    for (i, c) in g_major.coeffs().iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        let mut term = 0.0;
        let mut falling = 1.0;
        for j in 0..=i {
            if j > 0 {
                falling *= (i + 1 - j) as f64;
            }
            term += falling * x.powi((i - j) as i32) / lambda.powi(j as i32 + 1);
        }
        bound += c * term;
    }
    Ok((-n * (fx - f_ref)).exp() * bound)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Admissibility {
    Admissible,
    SuspectGrowth,
    Unbounded,
}

/// Sampled heuristic for the admissibility of `(f, g)`: `f` bounded below and
/// growing at least like `c log x` on the tail. It cannot certify the
/// asymptotic hypothesis from finitely many samples.
pub fn check_admissibility(problem: &SeriesProblem, x_max: f64, samples: usize) -> Admissibility {
    let f = &problem.f;
    let samples = samples.max(16);
    match f.minimum(0.0, f64::INFINITY) {
        Err(Error::UnboundedBelow) => return Admissibility::Unbounded,
        Err(_) => return Admissibility::Admissible,
        Ok(_) => {}
    }
    let x_lo = 1e-3f64.min(x_max / 2.0).max(f64::MIN_POSITIVE);
    let ratio = (x_max / x_lo).powf(1.0 / (samples - 1) as f64);
    let xs: Vec<f64> = (0..samples).map(|i| x_lo * ratio.powi(i as i32)).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    if vals.iter().any(|v| *v == f64::NEG_INFINITY || v.is_nan()) {
        return Admissibility::Unbounded;
    }
    let tail: Vec<(f64, f64)> = xs
        .iter()
        .zip(&vals)
        .skip(samples / 2)
        .filter(|(x, _)| **x > std::f64::consts::E)
        .map(|(x, v)| (*x, *v))
        .collect();
    if tail.iter().all(|(_, v)| v.is_infinite()) {
        return Admissibility::Admissible;
    }
    if tail.len() < 2 {
        return Admissibility::SuspectGrowth;
    }
    let c: Vec<f64> = tail.iter().map(|(x, v)| v / x.ln()).collect();
    let first = c[0];
    let last = c[c.len() - 1];
    let fitted = c.iter().copied().fold(f64::INFINITY, f64::min);
    if fitted > 0.0 && last >= 0.75 * first {
        Admissibility::Admissible
    } else {
        Admissibility::SuspectGrowth
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerMaclaurin {
    pub series_value: f64,
    pub integral_value: f64,
    pub em_corrected: f64,
}

const BERNOULLI_OVER_FACTORIAL: [f64; 2] = [1.0 / 12.0, -1.0 / 720.0];

/// Compares `sum_{k=0}^{N} h(k)` with `int_0^N h` and with the
/// Euler–Maclaurin estimate
/// `int + (h(0) + h(N))/2 + sum_{k<=p} B_2k/(2k)! (h^(2k-1)(N) - h^(2k-1)(0))`,
/// where `h(y) = exp(-n f(y/n)) g(y/n)`.
pub fn euler_maclaurin_compare(
    problem: &SeriesProblem,
    n: u64,
    upper: u64,
    p: usize,
) -> Result<EulerMaclaurin> {
    if !(1..=2).contains(&p) {
        return Err(Error::InvalidInput(format!("p must be 1 or 2, got {p}")));
    }
    if n < 1 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let nf = n as f64;
    let x_end = upper as f64 / nf;
    for func in [&problem.f, &problem.g] {
        if !func.is_finite_on(0.0, x_end) {
            return Err(Error::DomainError(format!(
                "f and g must be finite on [0, {x_end}]"
            )));
        }
    }
    if problem.g.is_identically_zero() {
        return Ok(EulerMaclaurin {
            series_value: 0.0,
            integral_value: 0.0,
            em_corrected: 0.0,
        });
    }
    let h = |y: f64| problem.weight(y / nf, nf, 0.0);
    let series_value = (0..=upper).map(|k| h(k as f64)).collect::<NeumaierSum>().value();

    let (x_min, _) = problem.f.minimum(0.0, x_end)?;
    let width = peak_width(&problem.f, nf, x_min);
    let mut splits: Vec<f64> = problem.f.breakpoints();
    splits.extend(problem.g.breakpoints());
    splits.push(x_min);
    for j in [1.0, 3.0, 9.0] {
        splits.push(x_min - j * width);
        splits.push(x_min + j * width);
    }
    let q = quadrature::integrate(
        |x| problem.weight(x, nf, 0.0),
        0.0,
        x_end,
        &splits,
        1e-14,
        0.0,
        20_000,
    );
    let integral_value = nf * q.value;

    let left = ExtendedIntegrand::at(problem, nf, 0.0);
    let right = ExtendedIntegrand::at(problem, nf, x_end);
    let mut em = NeumaierSum::new();
    em.add(integral_value);
    em.add(0.5 * (h(0.0) + h(upper as f64)));
    for (k, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate().take(p) {
        let order = 2 * k + 1;
        let dn = right.odd_derivative(upper as f64, order);
        let d0 = left.odd_derivative(0.0, order);
        em.add(coef * (dn - d0));
    }
    Ok(EulerMaclaurin {
        series_value,
        integral_value,
        em_corrected: em.value(),
    })
}

/// `h(y)` built from the pieces that contain an endpoint, continued
/// analytically past it so central stencils stay smooth.
struct ExtendedIntegrand<'a> {
    f: Option<&'a crate::piecewise::Piece>,
    g: Option<&'a crate::piecewise::Piece>,
    f_outside: f64,
    g_outside: f64,
    n: f64,
}

impl<'a> ExtendedIntegrand<'a> {
    fn at(problem: &'a SeriesProblem, n: f64, x: f64) -> Self {
        Self {
            f: problem.f.piece_at(x),
            g: problem.g.piece_at(x),
            f_outside: problem.f.outside(),
            g_outside: problem.g.outside(),
            n,
        }
    }

    fn eval(&self, y: f64) -> f64 {
        let x = y / self.n;
        let fx = self.f.map_or(self.f_outside, |p| p.eval(x));
        let gx = self.g.map_or(self.g_outside, |p| p.eval(x));
        (-self.n * fx).exp() * gx
    }

    /// Fourth-order central differences for the first and third derivative.
    fn odd_derivative(&self, y: f64, order: usize) -> f64 {
        let h = |k: f64, s: f64| self.eval(y + k * s);
        match order {
            1 => {
                let s = 1e-3;
                (-h(2.0, s) + 8.0 * h(1.0, s) - 8.0 * h(-1.0, s) + h(-2.0, s)) / (12.0 * s)
            }
            3 => {
                let s = 1e-2;
                (-h(3.0, s) + 8.0 * h(2.0, s) - 13.0 * h(1.0, s) + 13.0 * h(-1.0, s)
                    - 8.0 * h(-2.0, s)
                    + h(-3.0, s))
                    / (8.0 * s * s * s)
            }
            _ => unreachable!("only first and third derivatives are used"),
        }
    }
}
