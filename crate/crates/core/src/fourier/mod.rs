//! Discrete Fourier analysis on the torus ℤ_n² for arbitrary `n`.
//!
//! Convention: the forward transform carries the `1/n²` factor,
//! `f̂(u,v) = n⁻² Σ_{a,b} f(a,b) e^{−2πi(au+bv)/n}`, and the inverse is the
//! plain character sum `f(a,b) = Σ_{u,v} f̂(u,v) e^{2πi(au+bv)/n}`.
//!
//! Two-dimensional transforms are computed row–column with `rustfft`, which
//! covers lengths that are not powers of two (mixed radix, Rader, Bluestein).

mod multiplier;

pub use multiplier::{
    apply_multiplier, apply_multiplier_real, estimate_multiplier_pnorm, multiplier_m1,
    multiplier_m2, Multiplier,
};

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::measures::{SignedMeasure, Topology};

/// Fourier coefficients `f̂(u,v)`, indexed `[[u, v]]` with `u, v ∈ 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Array2<Complex64>,
}

impl SpectralField {
    pub fn from_coeffs(coeffs: Array2<Complex64>) -> Result<Self> {
        square_side(coeffs.dim())?;
        Ok(Self { coeffs })
    }

    pub fn n(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.coeffs[[u, v]]
    }

    /// Largest `|f̂(−u,−v) − conj f̂(u,v)|`; zero for spectra of real fields.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0_f64;
        for ((u, v), c) in self.coeffs.indexed_iter() {
            let mirror = self.coeffs[[(n - u) % n, (n - v) % n]];
            worst = worst.max((mirror - c.conj()).norm());
        }
        worst
    }
}

pub(crate) fn square_side((rows, cols): (usize, usize)) -> Result<usize> {
    if rows != cols || rows == 0 {
        return Err(Error::ShapeMismatch {
            expected: rows.max(1),
            rows,
            cols,
        });
    }
    Ok(rows)
}

/// Precomputed 1-D plans for side `n`. Immutable and shareable; scratch
/// space is allocated per call.
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Process-wide plan cache keyed by side length.
    pub fn cached(n: usize) -> Arc<Fft2> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(n).or_insert_with(|| Arc::new(Fft2::new(n))).clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn run(&self, data: &mut Array2<Complex64>, fft: &dyn Fft<f64>) {
        let n = self.n;
        debug_assert_eq!(data.dim(), (n, n));
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for mut row in data.rows_mut() {
            let slice = row.as_slice_mut().expect("standard layout");
            fft.process_with_scratch(slice, &mut scratch);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..n {
            for a in 0..n {
                column[a] = data[[a, b]];
            }
            fft.process_with_scratch(&mut column, &mut scratch);
            for a in 0..n {
                data[[a, b]] = column[a];
            }
        }
    }

    /// `f ↦ f̂`, including the `1/n²` factor.
    pub fn forward(&self, field: &Array2<Complex64>) -> Array2<Complex64> {
        let mut data = field.as_standard_layout().into_owned();
        self.run(&mut data, self.forward.as_ref());
        let scale = 1.0 / (self.n * self.n) as f64;
        data.mapv_inplace(|c| c * scale);
        data
    }

    /// `f̂ ↦ Σ f̂(u,v) e_{uv}`, no normalisation.
    pub fn inverse(&self, coeffs: &Array2<Complex64>) -> Array2<Complex64> {
        let mut data = coeffs.as_standard_layout().into_owned();
        self.run(&mut data, self.inverse.as_ref());
        data
    }
}

pub fn to_complex(field: &Array2<f64>) -> Array2<Complex64> {
    field.mapv(|x| Complex64::new(x, 0.0))
}

pub fn dft2(field: &Array2<f64>) -> Result<SpectralField> {
    dft2_complex(&to_complex(field))
}

pub fn dft2_complex(field: &Array2<Complex64>) -> Result<SpectralField> {
    let n = square_side(field.dim())?;
    Ok(SpectralField {
        coeffs: Fft2::cached(n).forward(field),
    })
}

/// Spectrum of a measure on the torus; grid measures must be mapped onto a
/// torus first.
pub fn measure_spectrum(measure: &SignedMeasure) -> Result<SpectralField> {
    measure.domain().require(Topology::Torus)?;
    dft2(measure.values())
}

pub fn idft2(spectrum: &SpectralField) -> Array2<Complex64> {
    Fft2::cached(spectrum.n()).inverse(&spectrum.coeffs)
}

/// The character `e_{uv}(a,b) = e^{2πi(au+bv)/n}` as a field.
pub fn character(n: usize, u: usize, v: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(a, b)| {
        let phase = 2.0 * PI * (((a * u + b * v) % n) as f64) / n as f64;
        Complex64::from_polar(1.0, phase)
    })
}

/// `e^{2πik/n} − 1`, evaluated as `2i·sin(πk/n)·e^{iπk/n}` to avoid
/// cancellation at low frequencies.
pub fn unit_step(k: usize, n: usize) -> Complex64 {
    let half = PI * ((k % n) as f64) / n as f64;
    Complex64::from_polar(2.0 * half.sin(), half + PI / 2.0)
}

/// `|e^{2πik/n} − 1|² = 4 sin²(πk/n)`.
pub fn unit_step_sq(k: usize, n: usize) -> f64 {
    let s = (PI * ((k % n) as f64) / n as f64).sin();
    4.0 * s * s
}

/// Coordinate direction for a difference operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `e₁ = (1, 0)`: shifts the first index.
    First,
    /// `e₂ = (0, 1)`: shifts the second index.
    Second,
}

/// Cyclic forward difference `∂_j h(x) = h(x + e_j) − h(x)`.
pub fn partial_diff<T>(direction: Direction, h: &Array2<T>) -> Array2<T>
where
    T: Copy + std::ops::Sub<Output = T>,
{
    let (rows, cols) = h.dim();
    Array2::from_shape_fn((rows, cols), |(a, b)| match direction {
        Direction::First => h[[(a + 1) % rows, b]] - h[[a, b]],
        Direction::Second => h[[a, (b + 1) % cols]] - h[[a, b]],
    })
}
