//! Adaptive one-dimensional quadrature on finite intervals.
//!
//! The kernel is the 15-point Kronrod extension of the 7-point Gauss rule;
//! the driver bisects whichever interval currently carries the largest error
//! estimate until the requested tolerance is met. Callers that know where an
//! integrand is non-smooth (filter edges, cavity peaks) should pass those
//! points to [`integrate_split`] so no panel straddles a kink.

use thiserror::Error;

/// Abscissae of the 15-point Kronrod rule on [0, 1] (positive half plus
/// center). Odd indices are the embedded 7-point Gauss abscissae.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
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

/// Weights of the embedded 7-point Gauss rule (for `XGK[1]`, `XGK[3]`,
/// `XGK[5]`, `XGK[7]`).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Maximum number of interval bisections before giving up.
const MAX_BISECTIONS: usize = 4096;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    /// Estimate of the integral.
    pub value: f64,
    /// Upper bound on the absolute error of `value`.
    pub abs_error: f64,
    /// Number of panels in the final subdivision.
    pub intervals: usize,
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error(
        "quadrature did not converge: value {value:e}, error {abs_error:e}, requested {requested:e}"
    )]
    NotConverged {
        value: f64,
        abs_error: f64,
        requested: f64,
    },
}

/// One panel with its Kronrod estimate.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// 15-point Kronrod estimate on [a, b] with the QUADPACK error heuristic.
fn kronrod_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Panel, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let eval = |x: f64| -> Result<f64, QuadError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite { x })
        }
    };

    let fc = eval(center)?;
    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    let mut res_gauss = WG[3] * fc;
    let mut res_kronrod = WGK[7] * fc;
    let mut res_abs = res_kronrod.abs();

    for j in 0..7 {
        let offset = half * XGK[j];
        let f1 = eval(center - offset)?;
        let f2 = eval(center + offset)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        res_kronrod += WGK[j] * sum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * sum;
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();

    let mut error = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }

    Ok(Panel {
        a,
        b,
        value,
        error,
    })
}

/// Integrates `f` over [a, b] until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature, QuadError> {
    integrate_split(f, &[a, b], abs_tol, rel_tol)
}

/// Integrates over `[edges[0], edges[last]]` with initial panels split at
/// every interior edge. Edges must be finite and non-decreasing; repeated
/// edges are ignored.
pub fn integrate_split(
    f: impl Fn(f64) -> f64,
    edges: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature, QuadError> {
    if edges.len() < 2 || edges.iter().any(|x| !x.is_finite()) {
        return Err(QuadError::InvalidInterval {
            a: f64::NAN,
            b: f64::NAN,
        });
    }
    for pair in edges.windows(2) {
        if pair[1] < pair[0] {
            return Err(QuadError::InvalidInterval {
                a: pair[0],
                b: pair[1],
            });
        }
    }

    let mut panels: Vec<Panel> = Vec::new();
    for pair in edges.windows(2) {
        if pair[1] > pair[0] {
            panels.push(kronrod_panel(&f, pair[0], pair[1])?);
        }
    }
    if panels.is_empty() {
        return Ok(Quadrature {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }

    let tolerance_met = |panels: &[Panel]| -> Option<(f64, f64)> {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            Some((value, error))
        } else {
            None
        }
    };

    for _ in 0..MAX_BISECTIONS {
        if let Some((value, error)) = tolerance_met(&panels) {
            return Ok(Quadrature {
                value,
                abs_error: error,
                intervals: panels.len(),
            });
        }

        // Bisect the panel with the largest error estimate, unless it is
        // already too narrow for f64 to resolve.
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let scale = p.a.abs().max(p.b.abs()).max(1.0);
                p.b - p.a > 4.0 * f64::EPSILON * scale
            })
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i);

        let Some(worst) = worst else {
            break;
        };
        let panel = panels.swap_remove(worst);
        let mid = 0.5 * (panel.a + panel.b);
        panels.push(kronrod_panel(&f, panel.a, mid)?);
        panels.push(kronrod_panel(&f, mid, panel.b)?);
    }

    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    Err(QuadError::NotConverged {
        value,
        abs_error: error,
        requested: abs_tol.max(rel_tol * value.abs()),
    })
}
