//! Tabulated antiderivatives of the scaled interference kernel.
//!
//! With `s = r² + Δh²` and `w = z A s^{−α/2}`,
//! `∫ r hₙ(z ζ(r)) dr = (δ/2) (zA)^δ ∫_{w_b}^{w_a} hₙ(ω) ω^{−δ−1} dω`, `δ = 2/α`.
//! The inner integral is kept as a lower antiderivative `G(w) = ∫₀^w` and an
//! upper one `T(w) = ∫_w^∞`, each tabulated on a logarithmic grid as
//! `ln |·|` and interpolated by cubic Hermite polynomials with the exact
//! slope. A difference is taken on the side where it does not cancel.
//! Outside the grid the series of `Υ` in `ω` and `1/ω` are summed.

use crate::error::Result;
use crate::quadrature::{integrate_vec, Tolerance};

use super::laplace::scaled_upsilon_terms;

const LN_W_MIN: f64 = -4.605_170_185_988_091; // ln 0.01
const STEPS_PER_UNIT: f64 = 128.0;
/// Upper grid end in units of `m`.
const UPPER_RATIO: f64 = 1000.0;
const SERIES_TERMS: usize = 40;
const MAX_ORDERS: usize = 16;

#[derive(Debug, Clone)]
struct LogTable {
    /// `ln |F|` at each node, per order.
    ln: Vec<Vec<f64>>,
    /// `d ln |F| / d ln w` at each node, per order.
    slope: Vec<Vec<f64>>,
}

impl LogTable {
    fn zeros(orders: usize, nodes: usize) -> Self {
        LogTable {
            ln: vec![vec![0.0; nodes]; orders],
            slope: vec![vec![0.0; nodes]; orders],
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct KernelTable {
    m: u32,
    delta: f64,
    orders: usize,
    ln_w_max: f64,
    step: f64,
    /// Sign of `hₙ`, shared by `G` and `T`.
    sign: Vec<f64>,
    lower: LogTable,
    upper: LogTable,
    /// Where differences switch from `G` to `T`.
    pivot: f64,
    pivot_g: Vec<f64>,
    pivot_t: Vec<f64>,
}

impl KernelTable {
    pub(crate) fn new(m: u32, alpha: f64, orders: usize) -> Result<Self> {
        assert!((1..=MAX_ORDERS).contains(&orders));
        let delta = 2.0 / alpha;
        let ln_w_max = (UPPER_RATIO * m as f64).ln();
        let n = ((ln_w_max - LN_W_MIN) * STEPS_PER_UNIT).ceil() as usize;
        let step = (ln_w_max - LN_W_MIN) / n as f64;
        let tol = Tolerance {
            abs: 1e-300,
            rel: 1e-13,
            max_panels: 200,
        };
        let kernel = |l: f64, out: &mut [f64]| {
            let mut h = [0.0; MAX_ORDERS];
            scaled_upsilon_terms(l.exp(), m, &mut h[..orders]);
            let s = (-delta * l).exp();
            for (o, x) in out.iter_mut().zip(&h) {
                *o = x * s;
            }
        };
        let mut f = vec![vec![0.0; n + 1]; orders];
        let mut buf = [0.0; MAX_ORDERS];
        for i in 0..=n {
            kernel(LN_W_MIN + i as f64 * step, &mut buf[..orders]);
            for k in 0..orders {
                f[k][i] = buf[k];
            }
        }
        let mut piece = vec![vec![0.0; n]; orders];
        for i in 0..n {
            let l = LN_W_MIN + i as f64 * step;
            let res = integrate_vec(kernel, &[l, l + step], orders, &tol)?;
            for k in 0..orders {
                piece[k][i] = res.value[k];
            }
        }
        let mut table = KernelTable {
            m,
            delta,
            orders,
            ln_w_max,
            step,
            // h₀ > 0, then hₙ has the sign of (−1)^{n+1}.
            sign: (0..orders)
                .map(|k| if k == 0 || k % 2 == 1 { 1.0 } else { -1.0 })
                .collect(),
            lower: LogTable::zeros(orders, n + 1),
            upper: LogTable::zeros(orders, n + 1),
            pivot: m as f64,
            pivot_g: Vec::new(),
            pivot_t: Vec::new(),
        };
        let g0 = table.small_series(LN_W_MIN.exp());
        let t1 = table.large_tail(ln_w_max.exp());
        for k in 0..orders {
            let sg = table.sign[k];
            let mut g = g0[k];
            let mut t = t1[k];
            for i in 0..=n {
                if i > 0 {
                    g += piece[k][i - 1];
                }
                table.lower.ln[k][i] = (sg * g).ln();
                table.lower.slope[k][i] = f[k][i] / g;
                let j = n - i;
                if i > 0 {
                    t += piece[k][j];
                }
                table.upper.ln[k][j] = (sg * t).ln();
                table.upper.slope[k][j] = -f[k][j] / t;
            }
        }
        let mut g = vec![0.0; orders];
        let mut t = vec![0.0; orders];
        table.lower_at(table.pivot, &mut g);
        table.upper_at(table.pivot, &mut t);
        table.pivot_g = g;
        table.pivot_t = t;
        Ok(table)
    }

    pub(crate) fn orders(&self) -> usize {
        self.orders
    }

    pub(crate) fn delta(&self) -> f64 {
        self.delta
    }

    /// `∫_{w_b}^{w_a} hₙ(ω) ω^{−δ−1} dω` for `n < out.len()`, `w_a ≥ w_b ≥ 0`.
    pub(crate) fn integral(&self, w_b: f64, w_a: f64, out: &mut [f64]) {
        let k = out.len();
        debug_assert!(k <= self.orders && w_a >= w_b);
        let mut x = [0.0; MAX_ORDERS];
        let mut y = [0.0; MAX_ORDERS];
        if w_b >= self.pivot {
            self.upper_at(w_b, &mut x[..k]);
            self.upper_at(w_a, &mut y[..k]);
            for n in 0..k {
                out[n] = x[n] - y[n];
            }
        } else if w_a <= self.pivot {
            self.lower_at(w_a, &mut x[..k]);
            self.lower_at(w_b, &mut y[..k]);
            for n in 0..k {
                out[n] = x[n] - y[n];
            }
        } else {
            self.lower_at(w_b, &mut x[..k]);
            self.upper_at(w_a, &mut y[..k]);
            for n in 0..k {
                out[n] = (self.pivot_g[n] - x[n]) + (self.pivot_t[n] - y[n]);
            }
        }
    }

    /// `G(w) = ∫₀^w`.
    fn lower_at(&self, w: f64, out: &mut [f64]) {
        if w <= 0.0 {
            out.iter_mut().for_each(|x| *x = 0.0);
        } else if w.ln() < LN_W_MIN {
            let s = self.small_series(w);
            out.copy_from_slice(&s[..out.len()]);
        } else {
            self.interpolate(&self.lower, w.ln().min(self.ln_w_max), out);
        }
    }

    /// `T(w) = ∫_w^∞`.
    fn upper_at(&self, w: f64, out: &mut [f64]) {
        if w.ln() >= self.ln_w_max {
            let s = self.large_tail(w);
            out.copy_from_slice(&s[..out.len()]);
        } else {
            self.interpolate(&self.upper, w.ln().max(LN_W_MIN), out);
        }
    }

    fn interpolate(&self, table: &LogTable, l: f64, out: &mut [f64]) {
        let pos = (l - LN_W_MIN) / self.step;
        let i = (pos.floor().max(0.0) as usize).min(table.ln[0].len() - 2);
        let t = pos - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        for (k, o) in out.iter_mut().enumerate() {
            let (v, d) = (&table.ln[k], &table.slope[k]);
            let ln =
                h00 * v[i] + h10 * self.step * d[i] + h01 * v[i + 1] + h11 * self.step * d[i + 1];
            *o = self.sign[k] * ln.exp();
        }
    }

    /// `G(w)` from `1 − Υ = Σ_j a_j ω^j`, for small `w`.
    fn small_series(&self, w: f64) -> Vec<f64> {
        let m = self.m as f64;
        let d = self.delta;
        let mut out = vec![0.0; self.orders];
        // a_j = (−1)^{j+1} (m)_j / (j! m^j)
        let mut a = 1.0;
        let mut wj = 1.0;
        let w_d = w.powf(-d);
        for j in 1..=SERIES_TERMS {
            let jf = j as f64;
            a *= if j == 1 {
                1.0
            } else {
                -(m + jf - 1.0) / (jf * m)
            };
            wj *= w;
            let base = a * wj * w_d / (jf - d);
            let mut falling = 1.0;
            for (n, o) in out.iter_mut().enumerate() {
                if n > j {
                    break;
                }
                if n > 0 {
                    falling *= jf - (n - 1) as f64;
                }
                *o += falling * base;
            }
        }
        out
    }

    /// `T(w)` from `Υ = Σ_j C(−m, j) (ω/m)^{−m−j}`, for `w ≫ m`.
    fn large_tail(&self, w: f64) -> Vec<f64> {
        let m = self.m as usize;
        let d = self.delta;
        let mut out = vec![0.0; self.orders];
        let w_d = w.powf(-d);
        out[0] = w_d / d;
        let mut binom = 1.0;
        let ratio = m as f64 / w;
        let mut pow = ratio.powi(m as i32);
        for j in 0..=SERIES_TERMS {
            if j > 0 {
                binom *= (m + j - 1) as f64 / j as f64;
                pow *= ratio;
            }
            let k = (m + j) as f64;
            let sign_j = if j % 2 == 0 { 1.0 } else { -1.0 };
            let base = sign_j * binom * pow * w_d / (k + d);
            let mut rising = 1.0;
            for (n, o) in out.iter_mut().enumerate() {
                if n > 0 {
                    rising *= -(k + (n - 1) as f64);
                }
                *o -= rising * base;
            }
        }
        out
    }
}
