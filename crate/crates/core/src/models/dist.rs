//! Bounded scalar distributions for degree parameters and latent positions.

use rand::Rng;
use rand_distr::{Beta, Distribution as _, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta as BetaPdf, Continuous, ContinuousCDF, Normal as NormalPdf};

use super::quadrature::integrate;
use crate::error::{GeeError, Result};

/// Normal latent draws are clipped into this interval before use.
pub const NORMAL_CLIP: (f64, f64) = (0.001, 0.999);

const QUAD_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Beta { a: f64, b: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Sampled then clipped into [`NORMAL_CLIP`].
    Normal { mean: f64, sd: f64 },
    Constant(f64),
}

/// JSON form: `{"dist": "beta", "params": [1, 4]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistDoc {
    pub dist: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl Dist {
    pub fn from_doc(doc: &DistDoc) -> Result<Dist> {
        let p = &doc.params;
        let want = |k: usize| -> Result<()> {
            if p.len() == k && p.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(GeeError::Spec(format!(
                    "distribution {:?} needs {k} finite parameters, got {:?}",
                    doc.dist, p
                )))
            }
        };
        let d = match doc.dist.to_ascii_lowercase().as_str() {
            "beta" => {
                want(2)?;
                Dist::Beta { a: p[0], b: p[1] }
            }
            "uniform" => {
                want(2)?;
                Dist::Uniform { lo: p[0], hi: p[1] }
            }
            "normal" => {
                want(2)?;
                Dist::Normal { mean: p[0], sd: p[1] }
            }
            "constant" => {
                want(1)?;
                Dist::Constant(p[0])
            }
            other => return Err(GeeError::Config(format!("unsupported distribution {other:?}"))),
        };
        d.check()?;
        Ok(d)
    }

    pub fn to_doc(&self) -> DistDoc {
        let (dist, params) = match *self {
            Dist::Beta { a, b } => ("beta", vec![a, b]),
            Dist::Uniform { lo, hi } => ("uniform", vec![lo, hi]),
            Dist::Normal { mean, sd } => ("normal", vec![mean, sd]),
            Dist::Constant(v) => ("constant", vec![v]),
        };
        DistDoc { dist: dist.into(), params }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            Dist::Beta { a, b } => a > 0.0 && b > 0.0,
            Dist::Uniform { lo, hi } => lo < hi,
            Dist::Normal { sd, .. } => sd > 0.0,
            Dist::Constant(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(GeeError::Spec(format!("invalid distribution parameters {self:?}")))
        }
    }

    /// Smallest and largest values a draw can take (after clipping).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Dist::Beta { .. } => (0.0, 1.0),
            Dist::Uniform { lo, hi } => (lo, hi),
            Dist::Normal { .. } => NORMAL_CLIP,
            Dist::Constant(v) => (v, v),
        }
    }

    /// Draws a value, reporting whether clipping was applied.
    pub fn sample(&self, rng: &mut impl Rng) -> (f64, bool) {
        match *self {
            Dist::Beta { a, b } => (Beta::new(a, b).expect("checked parameters").sample(rng), false),
            Dist::Uniform { lo, hi } => (rng.random_range(lo..hi), false),
            Dist::Normal { mean, sd } => {
                let x = Normal::new(mean, sd).expect("checked parameters").sample(rng);
                let c = x.clamp(NORMAL_CLIP.0, NORMAL_CLIP.1);
                (c, c != x)
            }
            Dist::Constant(v) => (v, false),
        }
    }

    /// Closed-form `E[X^t]`, where one exists for the bounded samplers.
    pub fn closed_form_moment(&self, t: u32) -> Option<f64> {
        match *self {
            Dist::Beta { a, b } => Some((0..t).map(|r| (a + r as f64) / (a + b + r as f64)).product()),
            Dist::Uniform { lo, hi } => {
                let e = t as i32 + 1;
                Some((hi.powi(e) - lo.powi(e)) / (e as f64 * (hi - lo)))
            }
            Dist::Constant(v) => Some(v.powi(t as i32)),
            Dist::Normal { .. } => None,
        }
    }

    /// `E[g(X)]` by adaptive quadrature against the density (point masses from
    /// clipping are added exactly).
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        match *self {
            Dist::Beta { a, b } => {
                let pdf = BetaPdf::new(a, b).expect("checked parameters");
                integrate(|x| g(x) * pdf.pdf(x), 0.0, 1.0, QUAD_TOL)
            }
            Dist::Uniform { lo, hi } => integrate(|x| g(x) / (hi - lo), lo, hi, QUAD_TOL),
            Dist::Normal { mean, sd } => {
                let nd = NormalPdf::new(mean, sd).expect("checked parameters");
                let (lo, hi) = NORMAL_CLIP;
                let below = nd.cdf(lo);
                let above = 1.0 - nd.cdf(hi);
                let a = lo.max(mean - 14.0 * sd);
                let b = hi.min(mean + 14.0 * sd);
                let body = if a < b { integrate(|x| g(x) * nd.pdf(x), a, b, QUAD_TOL) } else { 0.0 };
                body + g(lo) * below + g(hi) * above
            }
            Dist::Constant(v) => g(v),
        }
    }

    pub fn mean_by_quadrature(&self) -> f64 {
        self.expect(|x| x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_moments() {
        let d = Dist::Beta { a: 1.0, b: 4.0 };
        assert!((d.closed_form_moment(1).unwrap() - 0.2).abs() < 1e-15);
        assert!((d.closed_form_moment(2).unwrap() - 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        for d in [
            Dist::Beta { a: 1.0, b: 5.0 },
            Dist::Beta { a: 5.0, b: 1.0 },
            Dist::Beta { a: 5.0, b: 5.0 },
            Dist::Beta { a: 2.0, b: 3.0 },
            Dist::Uniform { lo: 0.15, hi: 0.25 },
            Dist::Uniform { lo: 0.1, hi: 0.5 },
        ] {
            let closed = d.closed_form_moment(1).unwrap();
            assert!((d.mean_by_quadrature() - closed).abs() < 1e-8, "{d:?}");
            let closed2 = d.closed_form_moment(2).unwrap();
            assert!((d.expect(|x| x * x) - closed2).abs() < 1e-8, "{d:?}");
        }
    }

    #[test]
    fn clipped_normal_mean_matches_monte_carlo() {
        let d = Dist::Normal { mean: 0.01, sd: 0.03 };
        let exact = d.mean_by_quadrature();
        let mut rng = crate::rng::stream(5, &[]);
        let n = 400_000;
        let (mut sum, mut clipped) = (0.0, 0);
        for _ in 0..n {
            let (x, c) = d.sample(&mut rng);
            sum += x;
            clipped += usize::from(c);
        }
        let mc = sum / n as f64;
        // sd of a draw is below 0.03
        assert!((mc - exact).abs() < 4.0 * 0.03 / (n as f64).sqrt());
        assert!(clipped > 0);
        // far from the clip bounds the mean is the raw mean
        let far = Dist::Normal { mean: 0.5, sd: 0.03 };
        assert!((far.mean_by_quadrature() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn doc_parsing() {
        let d = Dist::from_doc(&DistDoc { dist: "Beta".into(), params: vec![1.0, 4.0] }).unwrap();
        assert_eq!(d, Dist::Beta { a: 1.0, b: 4.0 });
        assert!(Dist::from_doc(&DistDoc { dist: "beta".into(), params: vec![1.0] }).is_err());
        assert!(matches!(
            Dist::from_doc(&DistDoc { dist: "cauchy".into(), params: vec![] }),
            Err(GeeError::Config(_))
        ));
        assert!(Dist::from_doc(&DistDoc { dist: "uniform".into(), params: vec![0.5, 0.1] }).is_err());
    }
}
