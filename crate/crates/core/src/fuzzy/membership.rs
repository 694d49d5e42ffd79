use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear membership function.
///
/// `Triangular([a, b, c])` rises on `[a, b]`, peaks at `b`, falls on `[b, c]`.
/// `Trapezoidal([a, b, c, d])` has a plateau on `[b, c]`. Setting `a == b` (or
/// `c == d`) yields a shoulder that is 1 right at the edge of the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipFunction {
    Triangular([f64; 3]),
    Trapezoidal([f64; 4]),
}

impl MembershipFunction {
    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self> {
        let mf = MembershipFunction::Triangular([a, b, c]);
        mf.check()?;
        Ok(mf)
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let mf = MembershipFunction::Trapezoidal([a, b, c, d]);
        mf.check()?;
        Ok(mf)
    }

    pub fn check(&self) -> Result<()> {
        let p = self.corners();
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite membership parameter in {self:?}"
            )));
        }
        if !(p[0] <= p[1] && p[1] <= p[2] && p[2] <= p[3]) {
            return Err(Error::Input(format!(
                "membership parameters out of order in {self:?}"
            )));
        }
        Ok(())
    }

    /// `[a, b, c, d]`, with triangles expressed as a zero-width plateau.
    pub fn corners(&self) -> [f64; 4] {
        match *self {
            MembershipFunction::Triangular([a, b, c]) => [a, b, b, c],
            MembershipFunction::Trapezoidal(p) => p,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let [a, _, _, d] = self.corners();
        (a, d)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.corners();
        if x < a || x > d {
            0.0
        } else if x < b {
            ((x - a) / (b - a)).clamp(0.0, 1.0)
        } else if x <= c {
            1.0
        } else {
            ((d - x) / (d - c)).clamp(0.0, 1.0)
        }
    }

    /// Exact centre of gravity of the membership curve.
    pub fn centroid(&self) -> f64 {
        let [a, b, c, d] = self.corners();
        let pts = [(a, 0.0), (b, 1.0), (c, 1.0), (d, 0.0)];
        let mut area = 0.0;
        let mut moment = 0.0;
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            let dx = x1 - x0;
            area += dx * (y0 + y1) / 2.0;
            moment += dx / 6.0 * (x0 * (2.0 * y0 + y1) + x1 * (y0 + 2.0 * y1));
        }
        if area > 0.0 {
            moment / area
        } else {
            a
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_and_support() {
        let t = MembershipFunction::triangular(0.2, 0.4, 0.9).unwrap();
        assert_eq!(t.eval(0.4), 1.0);
        assert_eq!(t.eval(0.1), 0.0);
        assert_eq!(t.eval(0.95), 0.0);
        assert_eq!(t.eval(0.2), 0.0);
        assert_eq!(t.eval(0.9), 0.0);
    }

    #[test]
    fn rising_edge_midpoint_is_half() {
        let (a, b) = (0.17, 0.5);
        let t = MembershipFunction::triangular(a, b, 0.83).unwrap();
        assert!((t.eval((a + b) / 2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shoulder_is_one_at_edge() {
        let s = MembershipFunction::trapezoidal(0.0, 0.0, 0.17, 0.5).unwrap();
        assert_eq!(s.eval(0.0), 1.0);
        assert_eq!(s.eval(0.17), 1.0);
        assert!((s.eval(0.335) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MembershipFunction::triangular(0.5, 0.2, 0.9).is_err());
        assert!(MembershipFunction::trapezoidal(0.0, 0.3, 0.2, 0.9).is_err());
        assert!(MembershipFunction::triangular(f64::NAN, 0.2, 0.9).is_err());
    }

    #[test]
    fn centroid_matches_dense_sum() {
        let cases = [
            MembershipFunction::triangular(0.1, 0.2, 0.9).unwrap(),
            MembershipFunction::trapezoidal(0.0, 0.0, 0.17, 0.5).unwrap(),
            MembershipFunction::trapezoidal(0.3, 0.4, 0.6, 1.0).unwrap(),
        ];
        for mf in cases {
            let n = 200_000;
            let (mut m0, mut m1) = (0.0, 0.0);
            for i in 0..n {
                let x = (i as f64 + 0.5) / n as f64;
                let y = mf.eval(x);
                m0 += y;
                m1 += x * y;
            }
            assert!((mf.centroid() - m1 / m0).abs() < 1e-6, "{mf:?}");
        }
        let sym = MembershipFunction::triangular(0.17, 0.5, 0.83).unwrap();
        assert!((sym.centroid() - 0.5).abs() < 1e-12);
    }
}
