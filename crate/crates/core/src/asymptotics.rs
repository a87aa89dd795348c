//! Regime classification and asymptotic formulas for the peaked series, plus
//! the `1/n` expansions at `alpha = 1`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ScaleExponent;
use crate::series::{eval_series_scaled, SeriesOptions, SeriesProblem};
use crate::standard_sums::{oscillatory_factor_p, theta3, GaussianSumParams};

/// Two candidate minima closer than this in value are a tie.
const TIE_TOL: f64 = 1e-12;
/// Candidates closer than this in position are the same point.
const SAME_POINT: f64 = 1e-6;
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinimumKind {
    Interior,
    LeftBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimumProfile {
    pub kind: MinimumKind,
    pub x0: f64,
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub g0: f64,
    pub g1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    InteriorHigh,
    InteriorCritical,
    InteriorOscillatory,
    InteriorWeak,
    BoundaryHigh,
    BoundaryCritical,
    BoundaryLow,
}

impl Regime {
    pub fn classify(kind: MinimumKind, alpha: &ScaleExponent) -> Regime {
        match kind {
            MinimumKind::Interior => match alpha.cmp_threshold(1, 2) {
                Ordering::Greater => Regime::InteriorHigh,
                Ordering::Equal => Regime::InteriorCritical,
                Ordering::Less => match alpha.cmp_threshold(1, 3) {
                    Ordering::Greater => Regime::InteriorOscillatory,
                    _ => Regime::InteriorWeak,
                },
            },
            MinimumKind::LeftBoundary => match alpha.cmp_threshold(1, 1) {
                Ordering::Greater => Regime::BoundaryHigh,
                Ordering::Equal => Regime::BoundaryCritical,
                Ordering::Less => Regime::BoundaryLow,
            },
        }
    }
}

/// Asymptotic value `prefactor * (base + sum_l corrections[l] n^-(l+1))`.
/// `leading` is `prefactor * base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticApproximation {
    pub regime: Regime,
    pub leading: f64,
    pub corrections: Vec<f64>,
    /// Claimed order of the relative remainder, `O(n^-error_exponent)`.
    pub error_exponent: f64,
    pub prefactor: f64,
    pub base: f64,
    pub n: u64,
}

impl AsymptoticApproximation {
    pub fn value(&self) -> f64 {
        let inv = 1.0 / self.n as f64;
        let mut power = 1.0;
        let mut total = self.base;
        for a in &self.corrections {
            power *= inv;
            total += a * power;
        }
        self.prefactor * total
    }
}

pub fn classify_minimum(problem: &SeriesProblem) -> Result<MinimumProfile> {
    let f = &problem.f;
    let mut cands = f.critical_points(0.0, f64::INFINITY)?;
    cands.retain(|(_, v)| v.is_finite());
    if cands.is_empty() {
        return Err(Error::EmptyDomain);
    }
    cands.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x0, f0) = cands[0];
    let tie = TIE_TOL * f0.abs().max(1.0);
    if let Some(&(x1, _)) = cands
        .iter()
        .skip(1)
        .find(|(x, v)| (v - f0).abs() <= tie && (x - x0).abs() > SAME_POINT)
    {
        return Err(Error::NonUniqueMinimum {
            first: x0.min(x1),
            second: x0.max(x1),
        });
    }
    let g = &problem.g;
    let f1 = f.derivative(x0, 1);
    let f2 = f.derivative(x0, 2);
    let f3 = f.derivative(x0, 3);
    let g0 = g.eval(x0);
    let g1 = g.derivative(x0, 1);
    let domain_start = f.pieces().first().map_or(0.0, |p| p.a.max(0.0));
    let kind = if x0 <= domain_start && domain_start == 0.0 {
        if f1 <= DEGENERACY_TOL {
            return Err(Error::DegenerateMinimum {
                x0,
                reason: format!("boundary slope f'(0) = {f1} is not positive"),
            });
        }
        MinimumKind::LeftBoundary
    } else {
        let scale = f.pieces().iter().map(|p| p.poly.coeffs().iter().map(|c| c.abs()).sum::<f64>()).fold(1.0, f64::max);
        if f1.abs() > 1e-10 * scale {
            return Err(Error::UnsupportedMinimum {
                x0,
                reason: format!("minimum sits on a domain edge with f' = {f1}"),
            });
        }
        if f2 <= DEGENERACY_TOL {
            return Err(Error::DegenerateMinimum {
                x0,
                reason: format!("f''(x0) = {f2} is not positive"),
            });
        }
        MinimumKind::Interior
    };
    Ok(MinimumProfile {
        kind,
        x0,
        f0,
        f1: if kind == MinimumKind::Interior { 0.0 } else { f1 },
        f2,
        f3,
        g0,
        g1,
    })
}

pub fn interior_leading(profile: &MinimumProfile, n: u64, alpha: &ScaleExponent) -> Result<AsymptoticApproximation> {
    if profile.kind != MinimumKind::Interior {
        return Err(Error::InvalidInput("interior formula needs an interior minimum".into()));
    }
    let nf = n as f64;
    let decay = (-nf * profile.f0).exp();
    let regime = Regime::classify(MinimumKind::Interior, alpha);
    let a = alpha.value();
    let (prefactor, error_exponent) = match regime {
        Regime::InteriorHigh => (
            (2.0 * PI * nf / profile.f2).sqrt(),
            (2.0 * a - 1.0).min(0.5),
        ),
        Regime::InteriorCritical => {
            let q = (-2.0 * PI * PI / profile.f2).exp();
            (
                (2.0 * PI * nf / profile.f2).sqrt() * theta3(-nf.sqrt() * PI * profile.x0, q)?,
                0.5,
            )
        }
        Regime::InteriorOscillatory | Regime::InteriorWeak => {
            let p = GaussianSumParams::new(n, a, profile.f2 / 2.0, profile.x0)?;
            let beta = if regime == Regime::InteriorOscillatory {
                1.0 - 3.0 * a
            } else {
                0.0
            };
            (nf.powf(1.0 - a) * oscillatory_factor_p(&p), beta.max(0.0))
        }
        _ => unreachable!("interior regimes only"),
    };
    Ok(AsymptoticApproximation {
        regime,
        leading: prefactor * decay * profile.g0,
        corrections: Vec::new(),
        error_exponent,
        prefactor: prefactor * decay,
        base: profile.g0,
        n,
    })
}

pub fn boundary_leading(profile: &MinimumProfile, n: u64, alpha: &ScaleExponent) -> Result<AsymptoticApproximation> {
    if profile.kind != MinimumKind::LeftBoundary {
        return Err(Error::InvalidInput("boundary formula needs a boundary minimum".into()));
    }
    let nf = n as f64;
    let a = alpha.value();
    let decay = (-nf * profile.f0).exp();
    let regime = Regime::classify(MinimumKind::LeftBoundary, alpha);
    let (base, prefactor, error_exponent) = match regime {
        Regime::BoundaryHigh => (profile.g0 / profile.f1, decay, (a - 1.0).min(1.0)),
        Regime::BoundaryCritical => (profile.g0 / -(-profile.f1).exp_m1(), decay, 1.0),
        Regime::BoundaryLow => (profile.g0, nf.powf(1.0 - a) * decay, 1.0 - a),
        _ => unreachable!("boundary regimes only"),
    };
    Ok(AsymptoticApproximation {
        regime,
        leading: prefactor * base,
        corrections: Vec::new(),
        error_exponent,
        prefactor,
        base,
        n,
    })
}

/// Leading formula for the problem's own scale exponent.
pub fn leading_approximation(problem: &SeriesProblem, n: u64) -> Result<AsymptoticApproximation> {
    let profile = classify_minimum(problem)?;
    match profile.kind {
        MinimumKind::Interior => interior_leading(&profile, n, &problem.alpha),
        MinimumKind::LeftBoundary => boundary_leading(&profile, n, &problem.alpha),
    }
}

/// Truncated bivariate series: `terms[m]` is the coefficient polynomial (in
/// the local variable, ascending) of `eps^m`.
type Bivariate = Vec<Vec<f64>>;

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add_into(acc: &mut Vec<f64>, p: &[f64], scale: f64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += scale * b;
    }
}

fn bivariate_mul(a: &Bivariate, b: &Bivariate, order: usize) -> Bivariate {
    let mut out: Bivariate = vec![Vec::new(); order + 1];
    for (i, pa) in a.iter().enumerate().take(order + 1) {
        for (j, pb) in b.iter().enumerate().take(order + 1 - i) {
            let prod = poly_mul(pa, pb);
            poly_add_into(&mut out[i + j], &prod, 1.0);
        }
    }
    out
}

/// `exp(-a)` for a series `a` with no `eps^0` term, truncated at `eps^order`.
fn bivariate_exp_neg(a: &Bivariate, order: usize) -> Bivariate {
    let mut out: Bivariate = vec![Vec::new(); order + 1];
    out[0] = vec![1.0];
    let mut power: Bivariate = out.clone();
    let mut factorial = 1.0;
    for k in 1..=order {
        power = bivariate_mul(&power, a, order);
        factorial *= k as f64;
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        for m in 0..=order {
            let p = power[m].clone();
            poly_add_into(&mut out[m], &p, sign / factorial);
        }
    }
    out
}

/// Monomial `c * t^deg` placed at `eps^m`.
fn place(series: &mut Bivariate, m: usize, deg: usize, c: f64) {
    if m >= series.len() {
        return;
    }
    let p = &mut series[m];
    if p.len() <= deg {
        p.resize(deg + 1, 0.0);
    }
    p[deg] += c;
}

fn taylor(func: &crate::piecewise::PiecewiseFunction, x0: f64, len: usize) -> Vec<f64> {
    let mut t = match func.piece_at(x0) {
        Some(p) => p.taylor_at(x0),
        None => vec![func.outside()],
    };
    t.resize(len.max(t.len()), 0.0);
    t
}

pub const MAX_EXPANSION_ORDER: usize = 2;

/// Coefficients `a_1..a_order` of `I(n, 1) ~ sqrt(2 pi n / f2) e^{-n f0}
/// (g0 + a_1/n + a_2/n^2)` for an interior minimum, computed by expanding the
/// integrand around `x0` in `t = sqrt(n)(x - x0)` and taking Gaussian moments.
pub fn interior_coefficients(problem: &SeriesProblem, order: usize) -> Result<(MinimumProfile, Vec<f64>)> {
    if order > MAX_EXPANSION_ORDER {
        return Err(Error::OrderUnavailable(order));
    }
    let profile = classify_minimum(problem)?;
    if profile.kind != MinimumKind::Interior {
        return Err(Error::InvalidInput("interior expansion needs an interior minimum".into()));
    }
    let m_max = 2 * order;
    let fc = taylor(&problem.f, profile.x0, m_max + 3);
    let gc = taylor(&problem.g, profile.x0, m_max + 1);
    // exponent: sum_{j>=3} fc[j] t^j eps^(j-2), eps = n^(-1/2)
    let mut a: Bivariate = vec![Vec::new(); m_max + 1];
    for (j, c) in fc.iter().enumerate().skip(3) {
        if j - 2 <= m_max {
            place(&mut a, j - 2, j, *c);
        }
    }
    let mut g: Bivariate = vec![Vec::new(); m_max + 1];
    for (i, c) in gc.iter().enumerate().take(m_max + 1) {
        place(&mut g, i, i, *c);
    }
    let series = bivariate_mul(&bivariate_exp_neg(&a, m_max), &g, m_max);
    let f2 = profile.f2;
    // E[t^(2j)] for t ~ N(0, 1/f2)
    let moment = |deg: usize| -> f64 {
        if deg % 2 == 1 {
            return 0.0;
        }
        let j = deg / 2;
        let double_fact: f64 = (1..=j).map(|i| (2 * i - 1) as f64).product();
        double_fact / f2.powi(j as i32)
    };
    let coeffs = (1..=order)
        .map(|l| {
            series[2 * l]
                .iter()
                .enumerate()
                .map(|(deg, c)| c * moment(deg))
                .sum()
        })
        .collect();
    Ok((profile, coeffs))
}

pub fn interior_expansion(problem: &SeriesProblem, n: u64, order: usize) -> Result<AsymptoticApproximation> {
    require_alpha_one(problem)?;
    let (profile, corrections) = interior_coefficients(problem, order)?;
    let nf = n as f64;
    let prefactor = (2.0 * PI * nf / profile.f2).sqrt() * (-nf * profile.f0).exp();
    Ok(AsymptoticApproximation {
        regime: Regime::InteriorHigh,
        leading: prefactor * profile.g0,
        error_exponent: (order + 1) as f64,
        corrections,
        prefactor,
        base: profile.g0,
        n,
    })
}

/// `S_m(x) = sum_{k>=0} k^m x^k` for `m = 0..=max`, from
/// `(1 - x) S_m = -sum_{j<m} C(m, j) (-1)^(m-j) (S_j - [j = 0])`.
pub fn polylog_moments(x: f64, max: usize) -> Vec<f64> {
    let mut s = vec![1.0 / (1.0 - x)];
    for m in 1..=max {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..m {
            if j > 0 {
                binom = binom * (m - j + 1) as f64 / j as f64;
            }
            let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
            let sj = s[j] - if j == 0 { 1.0 } else { 0.0 };
            acc += binom * sign * sj;
        }
        s.push(-acc / (1.0 - x));
    }
    s
}

/// Coefficients `a_1..a_order` of `I(n, 1) ~ e^{-n f0} (g0/(1 - e^{-f1}) +
/// a_1/n + a_2/n^2)` for a minimum at the left end, as
/// `a_l = sum_k e^{-k f1} P_l(k)` with `P_l` from the expansion of the summand
/// in `1/n`.
pub fn boundary_coefficients(problem: &SeriesProblem, order: usize) -> Result<(MinimumProfile, Vec<f64>)> {
    if order > MAX_EXPANSION_ORDER {
        return Err(Error::OrderUnavailable(order));
    }
    let profile = classify_minimum(problem)?;
    if profile.kind != MinimumKind::LeftBoundary {
        return Err(Error::InvalidInput("boundary expansion needs a boundary minimum".into()));
    }
    let fc = taylor(&problem.f, 0.0, order + 2);
    let gc = taylor(&problem.g, 0.0, order + 1);
    // exponent: sum_{j>=2} fc[j] k^j eps^(j-1), eps = 1/n
    let mut b: Bivariate = vec![Vec::new(); order + 1];
    for (j, c) in fc.iter().enumerate().skip(2) {
        if j - 1 <= order {
            place(&mut b, j - 1, j, *c);
        }
    }
    let mut g: Bivariate = vec![Vec::new(); order + 1];
    for (i, c) in gc.iter().enumerate().take(order + 1) {
        place(&mut g, i, i, *c);
    }
    let series = bivariate_mul(&bivariate_exp_neg(&b, order), &g, order);
    let x = (-profile.f1).exp();
    let max_deg = series.iter().map(|p| p.len()).max().unwrap_or(1);
    let s = polylog_moments(x, max_deg);
    let coeffs = (1..=order)
        .map(|l| series[l].iter().enumerate().map(|(m, c)| c * s[m]).sum())
        .collect();
    Ok((profile, coeffs))
}

pub fn boundary_expansion(problem: &SeriesProblem, n: u64, order: usize) -> Result<AsymptoticApproximation> {
    require_alpha_one(problem)?;
    let (profile, corrections) = boundary_coefficients(problem, order)?;
    let nf = n as f64;
    let prefactor = (-nf * profile.f0).exp();
    let base = profile.g0 / -(-profile.f1).exp_m1();
    Ok(AsymptoticApproximation {
        regime: Regime::BoundaryCritical,
        leading: prefactor * base,
        error_exponent: (order + 1) as f64,
        corrections,
        prefactor,
        base,
        n,
    })
}

fn require_alpha_one(problem: &SeriesProblem) -> Result<()> {
    if problem.alpha.is_one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "expansions need alpha = 1, got {}",
            problem.alpha
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u64,
    pub direct: f64,
    pub asymptotic: f64,
    pub ratio: f64,
    pub abs_error: f64,
}

/// Direct sum against the leading formula for each `n`. `abs_error` is
/// `e^{n f0} n^{alpha-1} |direct - asymptotic|`.
pub fn relative_error_report(
    problem: &SeriesProblem,
    alpha: ScaleExponent,
    n_values: &[u64],
    rel_tol: f64,
) -> Result<Vec<ReportRow>> {
    if n_values.is_empty() {
        return Ok(Vec::new());
    }
    let problem = SeriesProblem {
        alpha,
        ..problem.clone()
    };
    let profile = classify_minimum(&problem)?;
    n_values
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let approx = match profile.kind {
                MinimumKind::Interior => interior_leading(&profile, n, &alpha)?,
                MinimumKind::LeftBoundary => boundary_leading(&profile, n, &alpha)?,
            };
            let sum = eval_series_scaled(&problem, n, SeriesOptions::with_tol(rel_tol))?;
            // Both sides in units of e^{-n f0} to keep large n f0 finite.
            let shift = sum.log_scale + nf * profile.f0;
            let direct_scaled = sum.mantissa * shift.exp();
            let asym_scaled = approx.prefactor * (nf * profile.f0).exp() * approx.base;
            Ok(ReportRow {
                n,
                direct: sum.value(),
                asymptotic: approx.leading,
                ratio: direct_scaled / asym_scaled,
                abs_error: nf.powf(alpha.value() - 1.0) * (direct_scaled - asym_scaled).abs(),
            })
        })
        .collect()
}
