//! Adaptive Gauss–Kronrod quadrature and the substituted kernels used by the
//! closed-form bond and variance formulas.

use crate::error::{Error, Result};

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, &x) in XGK.iter().enumerate().take(7) {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kronrod * h;
    let err = ((kronrod - gauss) * h).abs();
    (value, err)
}

/// Adaptively integrate `f` over `[a, b]` to relative tolerance `rtol`.
///
/// Bisects the worst interval until the summed error estimate satisfies the
/// tolerance. Errors out instead of silently returning a poor estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("non-finite integration bounds"));
    }
    if a == b {
        return Ok(0.0);
    }
    struct Seg {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }
    let (v0, e0) = gk15(&f, a, b);
    let mut segs = vec![Seg {
        a,
        b,
        value: v0,
        err: e0,
    }];
    let max_segs = 4000;
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        let tol = rtol * total.abs().max(1e-300) + 1e-305;
        if err <= tol {
            return Ok(total);
        }
        if segs.len() >= max_segs {
            return Err(Error::QuadratureNonConvergence {
                rtol,
                achieved: err / total.abs().max(1e-300),
            });
        }
        // split the interval with the largest error estimate
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let Seg { a, b, .. } = segs.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        segs.push(Seg {
            a,
            b: m,
            value: v1,
            err: e1,
        });
        segs.push(Seg {
            a: m,
            b,
            value: v2,
            err: e2,
        });
    }
}

/// `∫_0^t e^{s·x} x^p dx` for `p > -1`, handling the integrable endpoint
/// singularity at 0 when `p < 0` by the substitution `x = u^{1/(p+1)}`,
/// under which the integrand becomes smooth:
/// `(1/(p+1)) ∫_0^{t^{p+1}} e^{s·u^{1/(p+1)}} du`.
pub fn int_exp_pow(s: f64, p: f64, t: f64, rtol: f64) -> Result<f64> {
    if p <= -1.0 {
        return Err(Error::domain(format!("power {p} must exceed -1")));
    }
    if t < 0.0 {
        return Err(Error::domain("negative upper limit"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if s.abs() * t > 690.0 {
        return Err(Error::Overflow(s.abs() * t));
    }
    if p < 0.0 {
        let q = p + 1.0;
        let inv_q = 1.0 / q;
        let upper = t.powf(q);
        let v = integrate(|u| (s * u.powf(inv_q)).exp(), 0.0, upper, rtol)?;
        Ok(v * inv_q)
    } else {
        integrate(|x| (s * x).exp() * x.powf(p), 0.0, t, rtol)
    }
}
