#![allow(dead_code)]

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` over [a, b].
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        const XK: [f64; 8] = [
            0.991_455_371_120_812_6,
            0.949_107_912_342_758_5,
            0.864_864_423_359_769_1,
            0.741_531_185_599_394_5,
            0.586_087_235_467_691_1,
            0.405_845_151_377_397_2,
            0.207_784_955_007_898_48,
            0.0,
        ];
        const WK: [f64; 8] = [
            0.022_935_322_010_529_224,
            0.063_092_092_629_978_56,
            0.104_790_010_322_250_19,
            0.140_653_259_715_525_92,
            0.169_004_726_639_267_9,
            0.190_350_578_064_785_42,
            0.204_432_940_075_298_89,
            0.209_482_141_084_727_82,
        ];
        const WG: [f64; 4] = [
            0.129_484_966_168_869_7,
            0.279_705_391_489_276_64,
            0.381_830_050_505_118_9,
            0.417_959_183_673_469_4,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let dx = h * XK[i];
            let s = f(c - dx) + f(c + dx);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, (k - g).abs() * h)
    }
    // Near the target, a split that fails to halve the error estimate means
    // the estimate is rounding noise (large cancelling polynomial terms).
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, v: f64, err: f64, tol: f64, depth: u32) -> f64 {
        let target = tol.max(1e-15 * v.abs());
        if err <= target || depth > 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        let (vl, el) = gk15(f, a, m);
        let (vr, er) = gk15(f, m, b);
        if el + er > 0.5 * err && err < 1e3 * target {
            return vl + vr;
        }
        rec(f, a, m, vl, el, 0.5 * tol, depth + 1) + rec(f, m, b, vr, er, 0.5 * tol, depth + 1)
    }
    let (v, err) = gk15(f, a, b);
    rec(f, a, b, v, err, tol, 0)
}

/// Root of a monotone increasing `f` on [lo, hi] by plain bisection.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if f(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Squared-polynomial integrand (Σ θ_k η^k)², written out without Horner.
pub fn squared_poly(theta: &[f64], eta: f64) -> f64 {
    let r: f64 = theta.iter().enumerate().map(|(k, t)| t * eta.powi(k as i32)).sum();
    r * r
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}
