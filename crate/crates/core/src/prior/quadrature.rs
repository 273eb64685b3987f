use crate::error::{Error, Result};

/// Maximum number of interval splits per integral.
pub const MAX_SUBDIVISIONS: usize = 1 << 16;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` (either orientation)
/// with absolute error target `eps`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let (fa, fb) = (f(a)?, f(b)?);
    let fm = f(0.5 * (a + b))?;
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(a, b, fa, fm, fb),
        eps,
    }];
    let mut total = 0.0;
    let mut splits = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
        let (flm, frm) = (f(lm)?, f(rm)?);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * p.eps || (m - p.a).abs() < 1e-14 * (1.0 + m.abs()) {
            total += left + right + delta / 15.0;
            continue;
        }
        splits += 1;
        if splits > MAX_SUBDIVISIONS {
            return Err(Error::QuadratureFailure { a, b });
        }
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            eps: 0.5 * p.eps,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            eps: 0.5 * p.eps,
        });
    }
    if !total.is_finite() {
        return Err(Error::QuadratureFailure { a, b });
    }
    Ok(total)
}
