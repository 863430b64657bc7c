use crate::solver::Field;

/// Relative size below which `f1 - f2` counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Sign changes of `f1 - f2` over the cells `[lo, hi]`. Values below
/// `ZERO_TOL * scale` are zero; a run of zeros counts once when the signs on
/// both sides differ.
pub fn intersection_count(f1: &Field, f2: &Field, lo: usize, hi: usize, scale: f64) -> usize {
    assert_eq!(f1.grid, f2.grid, "intersection_count needs a common grid");
    let tol = ZERO_TOL * scale;
    let hi = hi.min(f1.u.len().saturating_sub(1));
    let mut last = 0i8;
    let mut count = 0;
    for i in lo..=hi {
        let d = f1.u[i] - f2.u[i];
        let s = if d > tol {
            1
        } else if d < -tol {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Cell range of `[a, b]` on the field's grid.
pub fn overlap_cells(f: &Field, a: f64, b: f64) -> (usize, usize) {
    let g = &f.grid;
    let lo = ((a - g.x0) / g.dx).floor().max(0.0) as usize;
    let hi = (((b - g.x0) / g.dx).ceil() as usize).min(g.n_cells) - 1;
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Grid1D;

    #[test]
    fn identical_fields_do_not_intersect() {
        let g = Grid1D::new(0.0, 0.01, 100).unwrap();
        let f = Field::from_fn(g, 0.0, |x| x.sin());
        assert_eq!(intersection_count(&f, &f, 0, 99, 1.0), 0);
    }

    #[test]
    fn counts_constructed_crossings() {
        let g = Grid1D::new(0.0, 0.001, 1000).unwrap();
        let a = Field::from_fn(g, 0.0, |x| {
            2.0 + (3.0 * std::f64::consts::PI * x + 0.3).sin()
        });
        let b = Field::from_fn(g, 0.0, |_| 2.0);
        assert_eq!(intersection_count(&a, &b, 0, 999, 1.0), 3);
    }

    #[test]
    fn zero_runs_collapse() {
        let g = Grid1D::new(0.0, 1.0, 7).unwrap();
        let a = Field::new(g, vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.5], 0.0);
        let b = Field::new(g, vec![0.5, 0.0, 0.0, 0.0, 2.5, 0.0, 0.5], 0.0);
        // + 0 0 0 - 0 0: one change across the zero run.
        assert_eq!(intersection_count(&a, &b, 0, 6, 1.0), 1);
        let (lo, hi) = overlap_cells(&a, 1.5, 4.5);
        assert_eq!((lo, hi), (1, 4));
    }
}
