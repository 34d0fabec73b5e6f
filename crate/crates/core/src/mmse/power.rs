use crate::linalg::{norm_sqr, CMat, CVec, HermitianFactor};
use crate::{Error, Result};
use nalgebra::SymmetricEigen;
use num_complex::Complex64;

/// How the Lagrange multiplier of the power constraint is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multiplier {
    /// Fixed regularizer `λ ≥ 0`; the constraint is met by rescaling afterwards.
    Fixed(f64),
    /// Multiplier solved numerically so that `(R + μI)^{-1} p` lies on the
    /// constraint sphere, giving the exact constrained minimizer.
    Exact,
}

/// Set in which transmit amplitudes live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeDomain {
    /// Real and non-negative: negative entries are clipped before rescaling.
    NonNegative,
    Real,
    Complex,
}

impl AmplitudeDomain {
    /// Whether the design uses the real parts of `R` and `p`.
    pub fn is_real(self) -> bool {
        !matches!(self, AmplitudeDomain::Complex)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub a: CVec,
    /// Multiplier actually used.
    pub multiplier: f64,
    /// Extra diagonal loading needed to solve the system, if any.
    pub loading: Option<f64>,
}

/// Rescales `a` so that `a^H a = budget`; a zero vector becomes the equal split.
pub fn normalize_power(a: &mut CVec, budget: f64) {
    let e = norm_sqr(a);
    if e > 0.0 && e.is_finite() {
        *a *= Complex64::new((budget / e).sqrt(), 0.0);
    } else {
        let n = a.len().max(1) as f64;
        a.fill(Complex64::new((budget / n).sqrt(), 0.0));
    }
}

/// Maps `a` into `domain` (before normalization).
pub fn enforce_domain(a: &mut CVec, domain: AmplitudeDomain) {
    match domain {
        AmplitudeDomain::Complex => {}
        AmplitudeDomain::Real => a.iter_mut().for_each(|z| z.im = 0.0),
        AmplitudeDomain::NonNegative => {
            if a.iter().all(|z| z.re <= 0.0) {
                a.iter_mut().for_each(|z| *z = Complex64::new(z.re.abs(), 0.0));
            } else {
                a.iter_mut().for_each(|z| *z = Complex64::new(z.re.max(0.0), 0.0));
            }
        }
    }
}

/// `a = (R + λI)^{-1} p` rescaled to `a^H a = budget`.
pub fn power_allocation(r: &CMat, p: &CVec, multiplier: Multiplier, budget: f64) -> Result<PowerAllocation> {
    if r.nrows() != r.ncols() || r.nrows() != p.len() {
        return Err(Error::shape("power statistics sizes differ"));
    }
    if !(budget > 0.0) {
        return Err(Error::param("P_G", "power budget must be positive"));
    }
    let (mut a, mu, loading) = match multiplier {
        Multiplier::Fixed(lambda) => {
            if !(lambda >= 0.0) {
                return Err(Error::param("lambda", "regularizer must be non-negative"));
            }
            let mut m = r.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += lambda;
            }
            let f = HermitianFactor::new(&m);
            (f.solve(p), lambda, f.loading)
        }
        Multiplier::Exact => {
            let (a, mu) = sphere_minimizer(r, p, budget);
            (a, mu, None)
        }
    };
    normalize_power(&mut a, budget);
    Ok(PowerAllocation {
        a,
        multiplier: mu,
        loading,
    })
}

/// Minimizer of `a^H R a - 2 Re(p^H a)` over `a^H a = budget`.
///
/// Solves the secular equation `Σ |u_i^H p|² / (λ_i + μ)² = budget` for
/// `μ > -λ_min` by bisection on a log scale.
fn sphere_minimizer(r: &CMat, p: &CVec, budget: f64) -> (CVec, f64) {
    let eig = SymmetricEigen::new(r.clone());
    let lambdas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let coeffs: Vec<Complex64> = (0..lambdas.len()).map(|i| eig.eigenvectors.column(i).dotc(p)).collect();
    let lmin = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let pnorm = norm_sqr(p).sqrt();
    if pnorm == 0.0 {
        return (CVec::zeros(p.len()), 0.0);
    }
    // t = μ + λ_min > 0
    let f = |t: f64| -> f64 {
        lambdas
            .iter()
            .zip(&coeffs)
            .map(|(&l, c)| c.norm_sqr() / (l - lmin + t).powi(2))
            .sum::<f64>()
    };
    let mut hi = pnorm / budget.sqrt() * (1.0 + 1e-12);
    let mut lo = hi * 1e-16;
    if f(lo) <= budget {
        hi = lo;
    } else {
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if f(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-15 {
                break;
            }
        }
    }
    let t = hi;
    let mut a = CVec::zeros(p.len());
    for (i, (&l, &c)) in lambdas.iter().zip(&coeffs).enumerate() {
        a.axpy(c / (l - lmin + t), &eig.eigenvectors.column(i), Complex64::new(1.0, 0.0));
    }
    (a, t - lmin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{add_outer, eye, quad_form};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn scalar_case_meets_budget() {
        let r = CMat::from_element(1, 1, c(0.3));
        let p = CVec::from_element(1, Complex64::new(0.2, -0.1));
        for m in [Multiplier::Fixed(0.025), Multiplier::Exact] {
            let out = power_allocation(&r, &p, m, 2.5).unwrap();
            assert!((norm_sqr(&out.a) - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn large_regularizer_aligns_with_cross_correlation() {
        let v = CVec::from_vec(vec![c(1.0), c(0.5), Complex64::new(0.0, 0.3)]);
        let mut r = eye(3) * c(0.2);
        add_outer(&mut r, &v, 2.0);
        let p = CVec::from_vec(vec![c(0.1), c(-0.7), c(0.4)]);
        let out = power_allocation(&r, &p, Multiplier::Fixed(1e9), 1.0).unwrap();
        let cos = out.a.dotc(&p).norm() / (norm_sqr(&out.a) * norm_sqr(&p)).sqrt();
        assert!(cos > 1.0 - 1e-9);
    }

    #[test]
    fn exact_multiplier_beats_random_points_on_sphere() {
        let v = CVec::from_vec(vec![c(1.0), Complex64::new(0.5, 0.2)]);
        let mut r = eye(2) * c(0.05);
        add_outer(&mut r, &v, 1.0);
        let p = CVec::from_vec(vec![c(0.4), c(0.9)]);
        let cost = |a: &CVec| quad_form(&r, a) - 2.0 * p.dotc(a).re;
        let best = power_allocation(&r, &p, Multiplier::Exact, 1.0).unwrap();
        for i in 0..2000 {
            let th = i as f64 / 2000.0 * std::f64::consts::TAU;
            let a = CVec::from_vec(vec![c(th.cos()), c(th.sin())]);
            assert!(cost(&best.a) <= cost(&a) + 1e-12);
        }
    }

    #[test]
    fn domain_projection() {
        let mut a = CVec::from_vec(vec![Complex64::new(-0.5, 1.0), Complex64::new(2.0, -1.0)]);
        enforce_domain(&mut a, AmplitudeDomain::NonNegative);
        assert_eq!(a, CVec::from_vec(vec![c(0.0), c(2.0)]));
        let mut b = CVec::from_vec(vec![c(-1.0), c(-2.0)]);
        enforce_domain(&mut b, AmplitudeDomain::NonNegative);
        assert_eq!(b, CVec::from_vec(vec![c(1.0), c(2.0)]));
    }

    #[test]
    fn negative_regularizer_is_rejected() {
        let r = eye(2);
        let p = CVec::zeros(2);
        assert!(power_allocation(&r, &p, Multiplier::Fixed(-1.0), 1.0).is_err());
    }
}
