//! Shared test support: an independent double-exponential quadrature and
//! small statistics helpers.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use capsketch::{Element, FrequencyDistribution};

/// `∫_a^b f` by tanh-sinh quadrature, refined until two levels agree to
/// `tol` relative. Points are placed by their distance to the nearer
/// endpoint, so integrable endpoint singularities are fine.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    assert!(b > a);
    let half = 0.5 * (b - a);
    let node = |u: f64| -> (f64, f64) {
        let s = FRAC_PI_2 * u.sinh();
        let c = s.cosh();
        let w = half * FRAC_PI_2 * u.cosh() / (c * c);
        let d = (b - a) / ((2.0 * s.abs()).exp() + 1.0);
        let x = if u >= 0.0 { b - d } else { a + d };
        (x, w)
    };
    double_exponential(|u| {
        let (x, w) = node(u);
        if w == 0.0 || x <= a || x >= b {
            0.0
        } else {
            let v = w * f(x);
            if v.is_finite() { v } else { 0.0 }
        }
    }, tol)
}

/// `∫_a^∞ f` by exp-sinh quadrature.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    double_exponential(|u| {
        let e = (FRAC_PI_2 * u.sinh()).exp();
        let w = FRAC_PI_2 * u.cosh() * e;
        let x = a + e;
        if !x.is_finite() || w == 0.0 || x <= a {
            0.0
        } else {
            let v = w * f(x);
            if v.is_finite() { v } else { 0.0 }
        }
    }, tol)
}

/// `∫_a^∞ f`, split at `a + 1` so that both pieces are well conditioned.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    let mid = if a == 0.0 { 1.0 } else { a * 2.0 };
    tanh_sinh(&f, a, mid, tol) + exp_sinh(&f, mid, tol)
}

fn double_exponential<G: Fn(f64) -> f64>(g: G, tol: f64) -> f64 {
    const U_MAX: f64 = 6.5;
    let mut h = 0.5;
    let mut sum = g(0.0);
    let mut k = 1;
    while k as f64 * h <= U_MAX {
        let u = k as f64 * h;
        sum += g(u) + g(-u);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= U_MAX {
            let u = k as f64 * h;
            sum += g(u) + g(-u);
            k += 2;
        }
        let next = sum * h;
        if (next - estimate).abs() <= tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// The 13-key example: ten keys of weight 1, two of weight 5, one of 10.
pub fn example() -> FrequencyDistribution {
    FrequencyDistribution::from_counts([(1.0, 10), (5.0, 2), (10.0, 1)]).unwrap()
}

/// The same distribution as one element per key.
pub fn example_elements() -> Vec<Element> {
    let mut v = Vec::new();
    for i in 0..10 {
        v.push(Element::new(format!("one-{i}"), 1.0).unwrap());
    }
    for i in 0..2 {
        v.push(Element::new(format!("five-{i}"), 5.0).unwrap());
    }
    v.push(Element::new("ten", 10.0).unwrap());
    v
}

/// The example with weights split over several elements per key.
pub fn example_split_elements() -> Vec<Element> {
    let mut v = Vec::new();
    for i in 0..10 {
        v.push(Element::new(format!("one-{i}"), 1.0).unwrap());
    }
    for i in 0..2 {
        for part in [2.0, 3.0] {
            v.push(Element::new(format!("five-{i}"), part).unwrap());
        }
    }
    for _ in 0..4 {
        v.push(Element::new("ten", 2.5).unwrap());
    }
    v
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    n: f64,
    sum: f64,
    sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sq += x * x;
    }

    pub fn count(&self) -> f64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.sq - self.n * m * m) / (self.n - 1.0)
    }

    pub fn sd(&self) -> f64 {
        self.variance().max(0.0).sqrt()
    }

    pub fn se(&self) -> f64 {
        self.sd() / self.n.sqrt()
    }

    /// `|mean - want|` in standard errors.
    pub fn z(&self, want: f64) -> f64 {
        (self.mean() - want).abs() / self.se()
    }
}

/// Kolmogorov–Smirnov distance of `samples` from `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance `alpha` for `n` samples.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}
