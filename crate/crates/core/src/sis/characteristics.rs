//! Method of characteristics for the Hamilton–Jacobi / transport pair.
//!
//! Each grid point carries `(r, q, s, dr, dq, ln|L| + ln(dr)/2)`: position,
//! momentum, action, the variational pair whose ratio `dq/dr` is the action's
//! curvature, and the log-amplitude with its Jacobian factor removed. The
//! curvature term of the transport equation is exactly `-d ln(dr)/dt / 2`, so
//! the system stays regular when characteristics focus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{log_amplitude_rate, partials, Picture, SisParams};
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::piecewise::{Piece, PiecewiseFunction};

const CHECKPOINTS: usize = 16;
const BISECTIONS: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalField {
    pub picture: Picture,
    pub time: f64,
    grid: Vec<f64>,
    action: Vec<f64>,
    amplitude: Vec<f64>,
    momentum: Vec<f64>,
    curvature: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Characteristic {
    pub position: f64,
    pub momentum: f64,
    pub action: f64,
    pub amplitude: f64,
}

/// A characteristic together with its tangent `(dr, dq)`; `dq/dr` is the
/// curvature of the transported action.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicState {
    pub characteristic: Characteristic,
    pub dr: f64,
    pub dq: f64,
}

impl CharacteristicState {
    pub fn curvature(&self) -> f64 {
        self.dq / self.dr
    }
}

impl SemiclassicalField {
    pub fn with_derivatives(
        picture: Picture,
        time: f64,
        grid: Vec<f64>,
        action: Vec<f64>,
        momentum: Vec<f64>,
        curvature: Vec<f64>,
        amplitude: Vec<f64>,
    ) -> Result<Self> {
        let m = grid.len();
        if m < 2 {
            return Err(Error::InvalidInput("a field needs at least two grid points".into()));
        }
        if [action.len(), momentum.len(), curvature.len(), amplitude.len()]
            .iter()
            .any(|&l| l != m)
        {
            return Err(Error::InvalidInput("field columns differ in length".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("grid must be strictly increasing".into()));
        }
        if picture == Picture::Probability && (grid[0] < 0.0 || grid[m - 1] > 1.0) {
            return Err(Error::InvalidInput("probability grid must lie in [0, 1]".into()));
        }
        if picture == Picture::Generating && !(grid[0] > 0.0) {
            return Err(Error::InvalidInput("generating grid must be positive".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&action) || !finite(&momentum) || !finite(&curvature) || !finite(&amplitude) {
            return Err(Error::InvalidInput("field values must be finite on the grid".into()));
        }
        if !(time >= 0.0) {
            return Err(Error::InvalidInput("time must be nonnegative".into()));
        }
        Ok(Self {
            picture,
            time,
            grid,
            action,
            amplitude,
            momentum,
            curvature,
        })
    }

    /// Samples `S` and `L` with exact derivatives.
    pub fn from_functions(
        picture: Picture,
        grid: Vec<f64>,
        action: &PiecewiseFunction,
        amplitude: &PiecewiseFunction,
    ) -> Result<Self> {
        let s = grid.iter().map(|&x| action.eval(x)).collect();
        let q = grid.iter().map(|&x| action.derivative(x, 1)).collect();
        let w = grid.iter().map(|&x| action.derivative(x, 2)).collect();
        let l = grid.iter().map(|&x| amplitude.eval(x)).collect();
        Self::with_derivatives(picture, 0.0, grid, s, q, w, l)
    }

    /// Samples with derivatives from a natural cubic spline through the action.
    pub fn from_samples(picture: Picture, grid: Vec<f64>, action: Vec<f64>, amplitude: Vec<f64>) -> Result<Self> {
        if grid.len() < 3 || action.len() != grid.len() {
            return Err(Error::InvalidInput("need at least three matching samples".into()));
        }
        let (q, w) = natural_spline_derivatives(&grid, &action);
        Self::with_derivatives(picture, 0.0, grid, action, q, w, amplitude)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn action(&self) -> &[f64] {
        &self.action
    }
    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }
    pub fn momentum(&self) -> &[f64] {
        &self.momentum
    }
    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// Cubic Hermite interpolant of the action (using the carried momentum),
    /// `+inf` outside the grid range.
    pub fn action_function(&self) -> PiecewiseFunction {
        hermite(&self.grid, &self.action, &self.momentum)
    }

    /// Cubic Hermite interpolant of the amplitude with three-point slopes,
    /// zero outside the grid range.
    pub fn amplitude_function(&self) -> PiecewiseFunction {
        let slopes = three_point_slopes(&self.grid, &self.amplitude);
        let mut f = hermite(&self.grid, &self.amplitude, &slopes);
        f = PiecewiseFunction::new(f.pieces().to_vec(), 0.0).expect("valid pieces");
        f
    }

    pub fn states(&self) -> Vec<CharacteristicState> {
        (0..self.len())
            .map(|i| CharacteristicState {
                characteristic: Characteristic {
                    position: self.grid[i],
                    momentum: self.momentum[i],
                    action: self.action[i],
                    amplitude: self.amplitude[i],
                },
                dr: 1.0,
                dq: self.curvature[i],
            })
            .collect()
    }

    fn from_states(picture: Picture, time: f64, states: &[CharacteristicState]) -> Result<Self> {
        let c = |f: fn(&CharacteristicState) -> f64| states.iter().map(f).collect::<Vec<_>>();
        Self::with_derivatives(
            picture,
            time,
            c(|s| s.characteristic.position),
            c(|s| s.characteristic.action),
            c(|s| s.characteristic.momentum),
            c(|s| s.curvature()),
            c(|s| s.characteristic.amplitude),
        )
    }
}

fn hermite(x: &[f64], y: &[f64], m: &[f64]) -> PiecewiseFunction {
    let pieces = (0..x.len() - 1)
        .map(|i| {
            let h = x[i + 1] - x[i];
            let d = (y[i + 1] - y[i]) / h;
            let c2 = (3.0 * d - 2.0 * m[i] - m[i + 1]) / h;
            let c3 = (m[i] + m[i + 1] - 2.0 * d) / (h * h);
            Piece::with_origin(x[i], x[i + 1], x[i], vec![y[i], m[i], c2, c3])
        })
        .collect();
    PiecewiseFunction::new(pieces, f64::INFINITY).expect("sorted grid gives valid pieces")
}

fn three_point_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    (0..n)
        .map(|i| {
            if i == 0 {
                d[0]
            } else if i == n - 1 {
                d[n - 2]
            } else {
                let (hl, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                (hl * d[i] + hr * d[i - 1]) / (hl + hr)
            }
        })
        .collect()
}

/// First and second derivatives at the knots of the natural cubic spline.
fn natural_spline_derivatives(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    // Tridiagonal system for the second derivatives M with M_0 = M_{n-1} = 0.
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        let mut upper = vec![0.0; k];
        for j in 0..k {
            let i = j + 1;
            diag[j] = 2.0 * (h[i - 1] + h[i]);
            upper[j] = h[i];
            rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        for j in 1..k {
            let w = h[j] / diag[j - 1];
            diag[j] -= w * upper[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for j in (0..k - 1).rev() {
            m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
        }
    }
    let q = (0..n)
        .map(|i| {
            if i < n - 1 {
                (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0
            } else {
                (y[i] - y[i - 1]) / h[i - 1] + h[i - 1] * (m[i - 1] + 2.0 * m[i]) / 6.0
            }
        })
        .collect();
    (q, m)
}

type State = [f64; 6];

fn rhs(picture: Picture, params: &SisParams, y: &State) -> State {
    let [r, q, _, dr, dq, _] = *y;
    let d = partials(picture, r, q, params);
    [
        d.q,
        -d.r,
        q * d.q - d.value,
        d.qr * dr + d.qq * dq,
        -d.rr * dr - d.qr * dq,
        log_amplitude_rate(picture, r, q, 0.0, &d, params) + 0.5 * d.qr,
    ]
}

fn pack(s: &CharacteristicState) -> (State, f64) {
    let c = &s.characteristic;
    (
        [c.position, c.momentum, c.action, s.dr, s.dq, c.amplitude.abs().ln() + 0.5 * s.dr.ln()],
        c.amplitude.signum(),
    )
}

fn unpack(y: &State, sign: f64) -> CharacteristicState {
    CharacteristicState {
        characteristic: Characteristic {
            position: y[0],
            momentum: y[1],
            action: y[2],
            amplitude: sign * (y[5] - 0.5 * y[3].ln()).exp(),
        },
        dr: y[3],
        dq: y[4],
    }
}

/// Integrates one characteristic and its tangent for a time `t`.
pub fn integrate_characteristic(
    picture: Picture,
    params: &SisParams,
    start: CharacteristicState,
    t: f64,
    tol: f64,
) -> Result<CharacteristicState> {
    let (y0, sign) = pack(&start);
    let opts = OdeOptions::with_tol(0.1 * tol);
    let y = ode::integrate(|_, y: &State| rhs(picture, params, y), 0.0, y0, t, opts)?;
    Ok(unpack(&y, sign))
}

fn advance(
    picture: Picture,
    params: &SisParams,
    states: &[CharacteristicState],
    dt: f64,
    tol: f64,
) -> Result<Vec<CharacteristicState>> {
    states
        .par_iter()
        .map(|s| integrate_characteristic(picture, params, *s, dt, tol))
        .collect()
}

fn caustic_free(states: &[CharacteristicState]) -> bool {
    states.iter().all(|s| s.dr > 0.0)
        && states
            .windows(2)
            .all(|w| w[1].characteristic.position > w[0].characteristic.position)
}

/// Transports the field along characteristics to time `field0.time + t`.
/// Fails with [`Error::CausticFormed`], carrying the field at the last
/// caustic-free time, if characteristics cross first.
pub fn evolve_characteristics(
    field0: &SemiclassicalField,
    t: f64,
    params: &SisParams,
    tol: f64,
) -> Result<SemiclassicalField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(field0.clone());
    }
    if field0.amplitude.contains(&0.0) {
        return Err(Error::InvalidInput("amplitude must be nonzero on the grid".into()));
    }
    let picture = field0.picture;
    let t0 = field0.time;
    let mut states = field0.states();
    let mut elapsed = 0.0;
    for j in 1..=CHECKPOINTS {
        let target = t * j as f64 / CHECKPOINTS as f64;
        let next = advance(picture, params, &states, target - elapsed, tol)?;
        if !caustic_free(&next) {
            let (mut lo, mut hi) = (0.0, target - elapsed);
            let mut safe = states.clone();
            for _ in 0..BISECTIONS {
                let mid = 0.5 * (lo + hi);
                let trial = advance(picture, params, &states, mid, tol)?;
                if caustic_free(&trial) {
                    lo = mid;
                    safe = trial;
                } else {
                    hi = mid;
                }
            }
            let safe_time = t0 + elapsed + lo;
            let field = SemiclassicalField::from_states(picture, safe_time, &safe)?;
            return Err(Error::CausticFormed {
                safe_time,
                requested: t0 + t,
                field: Box::new(field),
            });
        }
        states = next;
        elapsed = target;
    }
    SemiclassicalField::from_states(picture, t0 + t, &states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sis::{hamiltonian_h, stationary_momentum_x, stationary_momentum_z};

    fn params() -> SisParams {
        SisParams::new(2.0, 1.0, 100).unwrap()
    }

    fn stationary_action(x: f64) -> f64 {
        // Antiderivative of ln(1 / (2 (1 - x))), zero at x = 0.
        -x * 2f64.ln() + (1.0 - x) * (1.0 - x).ln() + x
    }

    #[test]
    fn spline_derivatives_of_cubic() {
        let x: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let (q, w) = natural_spline_derivatives(&x, &y);
        assert!((q[20] - 1.0).abs() < 1e-4);
        assert!((w[20] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let x = vec![0.0, 0.3, 0.7, 1.0];
        let f = |v: f64| 1.0 - v + 2.0 * v * v * v;
        let df = |v: f64| -1.0 + 6.0 * v * v;
        let pf = hermite(&x, &x.iter().map(|&v| f(v)).collect::<Vec<_>>(), &x.iter().map(|&v| df(v)).collect::<Vec<_>>());
        for v in [0.1, 0.5, 0.95] {
            assert!((pf.eval(v) - f(v)).abs() < 1e-14);
        }
        assert_eq!(pf.eval(1.5), f64::INFINITY);
    }

    #[test]
    fn zero_time_is_identity() {
        let s = PiecewiseFunction::polynomial_on(0.0, 1.0, vec![0.18, -0.6, 0.5], f64::INFINITY).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let f = SemiclassicalField::from_functions(Picture::Probability, grid, &s, &PiecewiseFunction::constant(1.0)).unwrap();
        assert_eq!(evolve_characteristics(&f, 0.0, &params(), 1e-8).unwrap(), f);
    }

    #[test]
    fn stationary_probability_field_is_preserved() {
        let p = params();
        let grid: Vec<f64> = (0..=56).map(|i| 0.02 + i as f64 * 0.01).collect();
        let s: Vec<f64> = grid.iter().map(|&x| stationary_action(x)).collect();
        let q: Vec<f64> = grid.iter().map(|&x| stationary_momentum_x(x, &p).unwrap()).collect();
        let w: Vec<f64> = grid.iter().map(|&x| 1.0 / (1.0 - x)).collect();
        // Stationary amplitude for beta = 2, alpha = 1.
        let amp = |x: f64| 1.0 / (x * (1.0 - x).sqrt());
        let l = grid.iter().map(|&x| amp(x)).collect();
        let f0 = SemiclassicalField::with_derivatives(Picture::Probability, 0.0, grid, s, q, w, l).unwrap();
        let f1 = evolve_characteristics(&f0, 1.0, &p, 1e-10).unwrap();
        for ((x, s), l) in f1.grid().iter().zip(f1.action()).zip(f1.amplitude()) {
            assert!((s - stationary_action(*x)).abs() < 1e-6, "x={x}");
            assert!((l / amp(*x) - 1.0).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn stationary_generating_field_is_preserved() {
        let p = params();
        // Sigma* = 0 below z = 1/2, and int_{1/2}^z (2u - 1)/(2u^2) du above.
        let sigma = |z: f64| if z < 0.5 { 0.0 } else { z.ln() + 1.0 / (2.0 * z) - 0.5f64.ln() - 1.0 };
        // Below the junction characteristics drift to z = 0, reaching it within
        // t = 1 from z < 0.39; above z = 1.25 they blow up before t = 1.
        let mut grid: Vec<f64> = (0..=8).map(|i| 0.40 + i as f64 * 0.01).collect();
        grid.extend((0..=13).map(|i| 0.55 + i as f64 * 0.05));
        let s: Vec<f64> = grid.iter().map(|&z| sigma(z)).collect();
        let q: Vec<f64> = grid.iter().map(|&z| stationary_momentum_z(z, &p)).collect();
        let w: Vec<f64> = grid
            .iter()
            .map(|&z| if z < 0.5 { 0.0 } else { (1.0 - z) / (z * z * z) })
            .collect();
        // Stationary amplitude: constant below the junction, z / (2z - 1) above.
        let amp = |z: f64| if z < 0.5 { 1.0 } else { z / (2.0 * z - 1.0) };
        let l = grid.iter().map(|&z| amp(z)).collect();
        let f0 = SemiclassicalField::with_derivatives(Picture::Generating, 0.0, grid, s, q, w, l).unwrap();
        let f1 = evolve_characteristics(&f0, 1.0, &p, 1e-10).unwrap();
        for ((z, s), l) in f1.grid().iter().zip(f1.action()).zip(f1.amplitude()) {
            assert!((s - sigma(*z)).abs() < 1e-6, "z={z}");
            assert!((l / amp(*z) - 1.0).abs() < 1e-6, "z={z}");
        }
    }

    #[test]
    fn hamiltonian_is_conserved_along_characteristics() {
        let p = params();
        let tol = 1e-9;
        for (x, q) in [(0.3, 0.2), (0.7, -0.5), (0.1, 1.0)] {
            let start = CharacteristicState {
                characteristic: Characteristic { position: x, momentum: q, action: 0.0, amplitude: 1.0 },
                dr: 1.0,
                dq: 1.0,
            };
            let end = integrate_characteristic(Picture::Probability, &p, start, 0.5, tol).unwrap();
            let c = end.characteristic;
            let drift = (hamiltonian_h(c.position, c.momentum, &p) - hamiltonian_h(x, q, &p)).abs();
            assert!(drift < 10.0 * tol, "drift {drift}");
        }
    }

    #[test]
    fn caustic_is_reported_with_safe_field() {
        // A concave initial action focuses characteristics.
        let s = PiecewiseFunction::polynomial_on(0.0, 1.0, vec![-0.125, 0.5, -0.5], f64::INFINITY).unwrap();
        let grid: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        let f0 = SemiclassicalField::from_functions(Picture::Probability, grid, &s, &PiecewiseFunction::constant(1.0)).unwrap();
        match evolve_characteristics(&f0, 5.0, &params(), 1e-8) {
            Err(Error::CausticFormed { safe_time, field, .. }) => {
                assert!(safe_time > 0.0 && safe_time < 5.0);
                assert_eq!(field.time, safe_time);
                assert!(field.grid().windows(2).all(|w| w[1] > w[0]));
            }
            other => panic!("expected a caustic, got {other:?}"),
        }
    }
}
