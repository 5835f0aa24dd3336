//! Adaptive Gauss–Kronrod quadrature for vector-valued, piecewise-smooth
//! integrands, and the Gauss–Chebyshev rule used for ergodic rates.
//!
//! The integrand fills a slice of `dim` values at each abscissa so that
//! families of integrals sharing the same kinks (derivative orders, SINR
//! thresholds) are refined together on one set of panels.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-7,
            max_panels: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Tolerance::default()
        }
    }

    fn bound(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    pub panels: usize,
}

impl Integral {
    pub fn zeros(dim: usize) -> Self {
        Integral {
            value: vec![0.0; dim],
            error: vec![0.0; dim],
            panels: 0,
        }
    }

    pub fn max_error(&self) -> f64 {
        self.error.iter().copied().fold(0.0, f64::max)
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

/// Scratch buffers for one 15-point rule evaluation.
struct Workspace {
    fc: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    fv1: Vec<Vec<f64>>,
    fv2: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Workspace {
            fc: vec![0.0; dim],
            f1: vec![0.0; dim],
            f2: vec![0.0; dim],
            fv1: vec![vec![0.0; dim]; 7],
            fv2: vec![vec![0.0; dim]; 7],
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, ws: &mut Workspace) -> Panel
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    f(center, &mut ws.fc);
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, &mut ws.fv1[j]);
        f(center + dx, &mut ws.fv2[j]);
    }

    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    for i in 0..dim {
        let fc = ws.fc[i];
        let mut res_g = fc * WG[3];
        let mut res_k = fc * WGK[7];
        let mut res_abs = fc.abs() * WGK[7];
        for j in 0..7 {
            let (v1, v2) = (ws.fv1[j][i], ws.fv2[j][i]);
            if j % 2 == 1 {
                res_g += WG[j / 2] * (v1 + v2);
            }
            res_k += WGK[j] * (v1 + v2);
            res_abs += WGK[j] * (v1.abs() + v2.abs());
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            res_asc += WGK[j] * ((ws.fv1[j][i] - mean).abs() + (ws.fv2[j][i] - mean).abs());
        }
        value[i] = res_k * half;
        error[i] = rescale_error(
            (res_k - res_g) * half,
            res_abs * abs_half,
            res_asc * abs_half,
        );
    }
    let _ = (&ws.f1, &ws.f2);
    Panel { a, b, value, error }
}

/// Integrates a `dim`-valued function over `[points[0], points[last]]`,
/// never placing a panel across any of the interior `points`.
pub fn integrate_vec<F>(mut f: F, points: &[f64], dim: usize, tol: &Tolerance) -> Result<Integral>
where
    F: FnMut(f64, &mut [f64]),
{
    if points.len() < 2 || dim == 0 {
        return Ok(Integral::zeros(dim));
    }
    let mut ws = Workspace::new(dim);
    let mut panels: Vec<Panel> = Vec::with_capacity(points.len() * 2);
    for w in points.windows(2) {
        if w[1] > w[0] {
            panels.push(gk15(&mut f, w[0], w[1], dim, &mut ws));
        }
    }
    if panels.is_empty() {
        return Ok(Integral::zeros(dim));
    }

    let mut total = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    for p in &panels {
        for i in 0..dim {
            total[i] += p.value[i];
            total_err[i] += p.error[i];
        }
    }
    let mut scale = vec![0.0; dim];

    loop {
        let mut converged = true;
        for i in 0..dim {
            scale[i] = tol.bound(total[i]);
            if total_err[i] > scale[i] {
                converged = false;
            }
        }
        if converged {
            break;
        }
        // Bisect the panel contributing most to the worst-converged component.
        let (worst, _) = panels
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let score = p
                    .error
                    .iter()
                    .zip(&scale)
                    .map(|(e, s)| e / s)
                    .fold(0.0, f64::max);
                (k, score)
            })
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );

        let p = &panels[worst];
        let (a, b) = (p.a, p.b);
        let mid = 0.5 * (a + b);
        if panels.len() >= tol.max_panels || !(mid > a && mid < b) {
            let (i, err) = total_err
                .iter()
                .enumerate()
                .map(|(i, e)| (i, e / scale[i]))
                .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            return Err(Error::QuadratureFailure {
                a: points[0],
                b: points[points.len() - 1],
                error: err * scale[i],
                tolerance: scale[i],
            });
        }
        let left = gk15(&mut f, a, mid, dim, &mut ws);
        let right = gk15(&mut f, mid, b, dim, &mut ws);
        let old = std::mem::replace(&mut panels[worst], left);
        for i in 0..dim {
            total[i] += panels[worst].value[i] + right.value[i] - old.value[i];
            total_err[i] += panels[worst].error[i] + right.error[i] - old.error[i];
        }
        panels.push(right);
    }

    // Re-sum to shed the drift of incremental updates.
    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    for p in &panels {
        for i in 0..dim {
            value[i] += p.value[i];
            error[i] += p.error[i];
        }
    }
    Ok(Integral {
        value,
        error,
        panels: panels.len(),
    })
}

/// Scalar convenience wrapper returning `(value, error)`.
pub fn integrate<F>(mut f: F, points: &[f64], tol: &Tolerance) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let res = integrate_vec(|x, out| out[0] = f(x), points, 1, tol)?;
    Ok((res.value[0], res.error[0]))
}

/// Nodes `t_n` and weights of the K-point Gauss–Chebyshev rule for
/// `∫₀^∞ g(t) dt ≈ Σ g(t_n) w_n`, after mapping `t = tan θ`, `θ ∈ (0, π/2)`.
pub fn gauss_chebyshev_half_line(k: usize) -> Vec<(f64, f64)> {
    (1..=k)
        .map(|n| {
            let u = (2 * n - 1) as f64 / (2 * k) as f64 * PI;
            let theta = PI / 4.0 * u.cos() + PI / 4.0;
            let t = theta.tan();
            let w = PI * PI * u.sin() / (4.0 * k as f64 * theta.cos().powi(2));
            (t, w)
        })
        .collect()
}
