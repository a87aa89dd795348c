//! Dense real polynomials with ascending coefficients.

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, order: usize) -> Polynomial {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn eval_derivative(&self, x: f64, order: usize) -> f64 {
        if order == 0 {
            return self.eval(x);
        }
        self.nth_derivative(order).eval(x)
    }

    /// Coefficients of `p(x0 + t)` in powers of `t`, i.e. `p^(j)(x0) / j!`.
    pub fn taylor_at(&self, x0: f64) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        let d = c.len();
        for i in 0..d {
            for j in (i..d - 1).rev() {
                c[j] += x0 * c[j + 1];
            }
        }
        c
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new(
            (0..len)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + other.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Cauchy bound: every real root satisfies `|x| <= bound`.
    pub fn root_bound(&self) -> f64 {
        let lead = self.leading();
        if self.degree() == 0 || lead == 0.0 {
            return 0.0;
        }
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max)
    }

    /// Real roots in `[lo, hi]`, sorted. Either end may be infinite.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.is_zero() || self.degree() == 0 || lo > hi {
            return Vec::new();
        }
        let bound = self.root_bound();
        let lo = lo.max(-bound);
        let hi = hi.min(bound);
        if lo > hi {
            return Vec::new();
        }
        if self.degree() == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            return if r >= lo && r <= hi { vec![r] } else { Vec::new() };
        }
        let scale: Vec<f64> = self.coeffs.iter().map(|c| c.abs()).collect();
        let magnitude = |x: f64| scale.iter().rev().fold(0.0, |acc, &c| acc * x.abs() + c);

        let mut knots = vec![lo];
        knots.extend(self.derivative().roots_in(lo, hi));
        knots.push(hi);

        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots.last().is_none_or(|&last| (r - last).abs() > 1e-13 * (1.0 + r.abs())) {
                roots.push(r);
            }
        };
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa.abs() <= 1e-14 * magnitude(a) {
                push(a, &mut roots);
                continue;
            }
            if fb.abs() <= 1e-14 * magnitude(b) {
                continue;
            }
            if fa.signum() != fb.signum() {
                push(bisect(|x| self.eval(x), a, b, fa), &mut roots);
            }
        }
        let last = knots[knots.len() - 1];
        if self.eval(last).abs() <= 1e-14 * magnitude(last) {
            push(last, &mut roots);
        }
        roots
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return if f(a).abs() <= f(b).abs() { a } else { b };
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}
