//! Globally adaptive Gauss–Kronrod (G7/K15) quadrature on finite intervals.

use std::collections::BinaryHeap;

use crate::compensated::NeumaierSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, starting from the given interior split
/// points, until the summed error estimate is below
/// `max(abs_tol, rel_tol * |value|)` or `max_intervals` is reached.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    splits: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let mut knots: Vec<f64> = std::iter::once(a)
        .chain(splits.iter().copied().filter(|&s| s > a && s < b))
        .chain(std::iter::once(b))
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut heap = BinaryHeap::new();
    for w in knots.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&f, w[0], w[1]);
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    let totals = |heap: &BinaryHeap<Segment>| {
        let mut v = NeumaierSum::new();
        let mut e = 0.0;
        for s in heap.iter() {
            v.add(s.value);
            e += s.error;
        }
        (v.value(), e)
    };
    let (mut value, mut error) = totals(&heap);
    let mut converged = error <= abs_tol.max(rel_tol * value.abs());
    while !converged && heap.len() < max_intervals {
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        heap.push(Segment { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: worst.b, value: v2, error: e2 });
        if heap.len() % 64 == 0 {
            (value, error) = totals(&heap);
        } else {
            value += v1 + v2 - worst.value;
            error += e1 + e2 - worst.error;
        }
        converged = error <= abs_tol.max(rel_tol * value.abs());
    }
    let (value, error) = totals(&heap);
    QuadResult {
        value,
        error,
        intervals: heap.len(),
        converged: converged || error <= abs_tol.max(rel_tol * value.abs()),
    }
}
