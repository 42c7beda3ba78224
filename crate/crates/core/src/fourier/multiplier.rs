use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{square_side, to_complex, unit_step, unit_step_sq, Fft2};
use crate::error::{Error, Result};

/// Pointwise spectral weights `m(u,v)`, indexed `[[u, v]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    values: Array2<Complex64>,
}

impl Multiplier {
    pub fn new(values: Array2<Complex64>) -> Result<Self> {
        square_side(values.dim())?;
        for ((u, v), c) in values.indexed_iter() {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite {
                    a: u,
                    b: v,
                    value: if c.re.is_finite() { c.im } else { c.re },
                });
            }
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(Array2::from_shape_fn((n, n), |(u, v)| f(u, v)))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            values: Array2::from_elem((n, n), Complex64::new(1.0, 0.0)),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            values: Array2::zeros((n, n)),
        }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.values[[u, v]]
    }

    /// Pointwise product; the multiplier of the composed operator.
    pub fn product(&self, other: &Multiplier) -> Result<Multiplier> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(Multiplier {
            values: &self.values * &other.values,
        })
    }

    /// `sup |m|`, the exact `ℓ₂ → ℓ₂` norm of `T_m`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `T_m f = Σ m(u,v) f̂(u,v) e_{uv}`.
pub fn apply_multiplier(m: &Multiplier, f: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = square_side(f.dim())?;
    if n != m.n() {
        return Err(Error::ShapeMismatch {
            expected: m.n(),
            rows: f.nrows(),
            cols: f.ncols(),
        });
    }
    let plan = Fft2::cached(n);
    let mut spectrum = plan.forward(f);
    spectrum.zip_mut_with(&m.values, |s, w| *s *= w);
    Ok(plan.inverse(&spectrum))
}

pub fn apply_multiplier_real(m: &Multiplier, f: &Array2<f64>) -> Result<Array2<Complex64>> {
    apply_multiplier(m, &to_complex(f))
}

fn require_side(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::SideTooSmall { n, min: 2 })
    } else {
        Ok(())
    }
}

/// `m₁(u,v) = |ω^u − 1|² / (|ω^u − 1|² + |ω^v − 1|²)`, `m₁(0,0) = 0`.
pub fn multiplier_m1(n: usize) -> Result<Multiplier> {
    require_side(n)?;
    Multiplier::from_fn(n, |u, v| {
        if (u, v) == (0, 0) {
            return Complex64::new(0.0, 0.0);
        }
        let (su, sv) = (unit_step_sq(u, n), unit_step_sq(v, n));
        Complex64::new(su / (su + sv), 0.0)
    })
}

/// `m₂(u,v) = (ω^{−u} − 1)(ω^v − 1) / (|ω^u − 1|² + |ω^v − 1|²)`, `m₂(0,0) = 0`.
pub fn multiplier_m2(n: usize) -> Result<Multiplier> {
    require_side(n)?;
    Multiplier::from_fn(n, |u, v| {
        if (u, v) == (0, 0) {
            return Complex64::new(0.0, 0.0);
        }
        let denom = unit_step_sq(u, n) + unit_step_sq(v, n);
        unit_step(u, n).conj() * unit_step(v, n) / denom
    })
}

fn lp_norm(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        values.map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Largest observed `‖T_m f‖_p / ‖f‖_p` (counting measure) over seeded test
/// fields, cycling through Gaussian noise, single Diracs and random signs.
/// Always a lower bound for the operator norm.
pub fn estimate_multiplier_pnorm(m: &Multiplier, p: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Config(format!("p must be at least 1, got {p}")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for t in 0..trials {
        let field: Array2<f64> = match t % 3 {
            0 => Array2::from_shape_fn((n, n), |_| rng.sample(StandardNormal)),
            1 => {
                let mut f = Array2::zeros((n, n));
                f[[rng.gen_range(0..n), rng.gen_range(0..n)]] = 1.0;
                f
            }
            _ => Array2::from_shape_fn((n, n), |_| if rng.gen::<bool>() { 1.0 } else { -1.0 }),
        };
        let denom = lp_norm(field.iter().map(|x| x.abs()), p);
        if denom == 0.0 {
            continue;
        }
        let out = apply_multiplier_real(m, &field)?;
        let num = lp_norm(out.iter().map(|c| c.norm()), p);
        best = best.max(num / denom);
    }
    Ok(best)
}
