use crate::geometry::EPS;

/// y targets for `count` idle atoms of a column whose active atom sits at
/// `anchor`: anchor+r, anchor-r, anchor+2r, ... Candidates outside `[lo, hi]`,
/// closer than `radius` to a `fixed` y or an earlier pick, or rejected by
/// `ok` are skipped. `None` when not enough candidates survive.
pub fn spread_column(
    anchor: f64,
    fixed: &[f64],
    count: usize,
    radius: f64,
    lo: f64,
    hi: f64,
    mut ok: impl FnMut(f64) -> bool,
) -> Option<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    if count == 0 {
        return Some(out);
    }
    let max_k = ((hi - lo) / radius).ceil() as usize + 1;
    for k in 1..=max_k {
        for sign in [1.0, -1.0] {
            let y = anchor + sign * k as f64 * radius;
            if y < lo - EPS || y > hi + EPS {
                continue;
            }
            if fixed.iter().chain(out.iter()).any(|&f| (f - y).abs() < radius - EPS) {
                continue;
            }
            if !ok(y) {
                continue;
            }
            out.push(y);
            if out.len() == count {
                return Some(out);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternates_above_and_below() {
        let ys = spread_column(60.0, &[60.0], 3, 10.0, 0.0, 200.0, |_| true).unwrap();
        assert_eq!(ys, vec![70.0, 50.0, 80.0]);
    }

    #[test]
    fn single_atom_needs_no_spread() {
        assert_eq!(spread_column(60.0, &[60.0], 0, 10.0, 0.0, 200.0, |_| true), Some(vec![]));
    }

    #[test]
    fn top_edge_goes_below() {
        let ys = spread_column(185.0, &[185.0], 2, 10.0, 0.0, 185.0, |_| true).unwrap();
        assert_eq!(ys, vec![175.0, 165.0]);
    }

    #[test]
    fn rejected_candidates_are_skipped() {
        let ys = spread_column(60.0, &[60.0], 1, 10.0, 0.0, 200.0, |y| y < 55.0).unwrap();
        assert_eq!(ys, vec![50.0]);
        assert_eq!(spread_column(60.0, &[60.0], 1, 10.0, 55.0, 65.0, |_| true), None);
    }
}
