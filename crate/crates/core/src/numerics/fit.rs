//! Least-squares line fits and small grid helpers.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        1.0
    };
    Some(LineFit {
        slope,
        intercept,
        r2,
        n,
    })
}

/// Linear interpolation on a uniform grid `x0 + i*dx`, clamped at the ends.
pub fn interp_uniform(values: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let s = (x - x0) / dx;
    if s <= 0.0 {
        return values[0];
    }
    let i = s.floor() as usize;
    if i + 1 >= values.len() {
        return values[values.len() - 1];
    }
    let w = s - i as f64;
    values[i] * (1.0 - w) + values[i + 1] * w
}

/// Linear interpolation on a sorted abscissa, clamped at the ends.
pub fn interp_sorted(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ys[j - 1] * (1.0 - w) + ys[j] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.5 * x + 2.0).collect();
        let f = line_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 2.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_clamps() {
        let v = [0.0, 1.0, 4.0];
        assert_eq!(interp_uniform(&v, 0.0, 1.0, -1.0), 0.0);
        assert_eq!(interp_uniform(&v, 0.0, 1.0, 1.5), 2.5);
        assert_eq!(interp_uniform(&v, 0.0, 1.0, 9.0), 4.0);
        assert_eq!(interp_sorted(&[0.0, 1.0, 3.0], &v, 2.0), 2.5);
    }
}
