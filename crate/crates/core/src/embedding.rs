//! Fourier-multiplier embedding of measures on `ℤ_n²` into `L1`.
//!
//! With `D(u,v) = |ω^u − 1|² + |ω^v − 1|²` and `ω = e^{2πi/n}`:
//!
//! | operator | multiplier at `(u,v) ≠ (0,0)` |
//! |----------|-------------------------------|
//! | `A`      | `(ω^u − 1) / D`               |
//! | `B`      | `(ω^v − 1) / D`               |
//! | `A*`     | `(ω^{−u} − 1) / D`, then subtract the value at the origin |
//! | `B*`     | `(ω^{−v} − 1) / D`, likewise  |
//! | `S`      | `1 / (|ω^u − 1| + |ω^v − 1|)` |
//!
//! Every multiplier vanishes at `(0,0)`, so only the zero-mass part of a
//! measure is seen. `L1` norms use counting measure on the cells.

use std::io::Write;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{
    apply_multiplier_real, partial_diff, square_side, unit_step, unit_step_sq,
    Direction, Multiplier,
};
use crate::measures::{Domain, ProbabilityMeasure, SignedMeasure, Topology};

/// Largest imaginary part tolerated when an operator output is taken real.
pub const RESIDUE_TOL: f64 = 1e-9;
/// Largest `|h(0,0)|` accepted by [`reconstruct`].
pub const BASE_POINT_TOL: f64 = 1e-12;

/// Which operator family produces the embedded coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// The pair `(Aμ, Bμ)` in `L1 ⊕ L1`.
    Ab,
    /// The single field `Sμ`.
    S,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ab => "ab",
            Variant::S => "s",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ab" => Ok(Variant::Ab),
            "s" => Ok(Variant::S),
            other => Err(Error::Config(format!(
                "unknown embedding variant `{other}` (expected ab or s)"
            ))),
        }
    }
}

fn require_side(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::SideTooSmall { n, min: 2 })
    } else {
        Ok(())
    }
}

fn quotient(n: usize, numerator: impl Fn(usize, usize) -> Complex64) -> Result<Multiplier> {
    require_side(n)?;
    Multiplier::from_fn(n, |u, v| {
        if (u, v) == (0, 0) {
            Complex64::new(0.0, 0.0)
        } else {
            numerator(u, v) / (unit_step_sq(u, n) + unit_step_sq(v, n))
        }
    })
}

pub fn multiplier_a(n: usize) -> Result<Multiplier> {
    quotient(n, |u, _| unit_step(u, n))
}

pub fn multiplier_b(n: usize) -> Result<Multiplier> {
    quotient(n, |_, v| unit_step(v, n))
}

pub fn multiplier_a_star(n: usize) -> Result<Multiplier> {
    quotient(n, |u, _| unit_step(u, n).conj())
}

pub fn multiplier_b_star(n: usize) -> Result<Multiplier> {
    quotient(n, |_, v| unit_step(v, n).conj())
}

pub fn multiplier_s(n: usize) -> Result<Multiplier> {
    require_side(n)?;
    Multiplier::from_fn(n, |u, v| {
        if (u, v) == (0, 0) {
            return Complex64::new(0.0, 0.0);
        }
        let sum = unit_step_sq(u, n).sqrt() + unit_step_sq(v, n).sqrt();
        Complex64::new(1.0 / sum, 0.0)
    })
}

fn real_part(z: Array2<Complex64>) -> Result<Array2<f64>> {
    let residue = z.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > RESIDUE_TOL {
        return Err(Error::ImaginaryResidue(residue));
    }
    Ok(z.mapv(|c| c.re))
}

fn torus_input(sigma: &SignedMeasure) -> Result<usize> {
    sigma.domain().require(Topology::Torus)?;
    require_side(sigma.n())?;
    Ok(sigma.n())
}

fn field_side(f: &Array2<f64>) -> Result<usize> {
    let n = square_side(f.dim())?;
    require_side(n)?;
    Ok(n)
}

fn apply_to_measure(sigma: &SignedMeasure, build: fn(usize) -> Result<Multiplier>) -> Result<Array2<f64>> {
    let n = torus_input(sigma)?;
    real_part(apply_multiplier_real(&build(n)?, sigma.values())?)
}

pub fn op_a(sigma: &SignedMeasure) -> Result<Array2<f64>> {
    apply_to_measure(sigma, multiplier_a)
}

pub fn op_b(sigma: &SignedMeasure) -> Result<Array2<f64>> {
    apply_to_measure(sigma, multiplier_b)
}

pub fn op_s(sigma: &SignedMeasure) -> Result<Array2<f64>> {
    apply_to_measure(sigma, multiplier_s)
}

fn adjoint(f: &Array2<f64>, build: fn(usize) -> Result<Multiplier>) -> Result<Array2<f64>> {
    let n = field_side(f)?;
    let g = apply_multiplier_real(&build(n)?, f)?;
    let origin = g[[0, 0]];
    real_part(g.mapv(|c| c - origin))
}

/// `A*f`; vanishes at `(0,0)`.
pub fn op_a_star(f: &Array2<f64>) -> Result<Array2<f64>> {
    adjoint(f, multiplier_a_star)
}

/// `B*g`; vanishes at `(0,0)`.
pub fn op_b_star(g: &Array2<f64>) -> Result<Array2<f64>> {
    adjoint(g, multiplier_b_star)
}

/// `A*(∂₁h) + B*(∂₂h)`, which returns `h` whenever `h(0,0) = 0`.
pub fn reconstruct(h: &Array2<f64>) -> Result<Array2<f64>> {
    field_side(h)?;
    let base = h[[0, 0]];
    if base.abs() > BASE_POINT_TOL {
        return Err(Error::BasePointNonZero(base));
    }
    let a = op_a_star(&partial_diff(Direction::First, h))?;
    let b = op_b_star(&partial_diff(Direction::Second, h))?;
    Ok(a + b)
}

/// Image of a measure: two fields for [`Variant::Ab`], one for [`Variant::S`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedVector {
    n: usize,
    variant: Variant,
    parts: Vec<Array2<f64>>,
}

impl EmbeddedVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn parts(&self) -> &[Array2<f64>] {
        &self.parts
    }

    pub fn part_a(&self) -> &Array2<f64> {
        &self.parts[0]
    }

    /// `None` for the single-field variant.
    pub fn part_b(&self) -> Option<&Array2<f64>> {
        self.parts.get(1)
    }

    /// Sum of absolute values over every coordinate.
    pub fn l1_norm(&self) -> f64 {
        self.parts.iter().flat_map(|p| p.iter()).map(|x| x.abs()).sum()
    }

    /// `n <n> embedded`, then one value per line, parts in order, row-major.
    pub fn write_text<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "n {} embedded", self.n)?;
        for part in &self.parts {
            for x in part.iter() {
                writeln!(out, "{x}")?;
            }
        }
        Ok(())
    }
}

/// Applies the variant's operators to any signed measure on the torus.
pub fn embed_signed(sigma: &SignedMeasure, variant: Variant) -> Result<EmbeddedVector> {
    let parts = match variant {
        Variant::Ab => vec![op_a(sigma)?, op_b(sigma)?],
        Variant::S => vec![op_s(sigma)?],
    };
    Ok(EmbeddedVector {
        n: sigma.n(),
        variant,
        parts,
    })
}

/// `μ ↦ (A(μ − U), B(μ − U))`.
pub fn embed(mu: &ProbabilityMeasure) -> Result<EmbeddedVector> {
    embed_with(mu, Variant::Ab)
}

/// `μ ↦ S(μ − U)`.
pub fn embed_s(mu: &ProbabilityMeasure) -> Result<EmbeddedVector> {
    embed_with(mu, Variant::S)
}

pub fn embed_with(mu: &ProbabilityMeasure, variant: Variant) -> Result<EmbeddedVector> {
    mu.domain().require(Topology::Torus)?;
    embed_signed(&mu.center(), variant)
}

/// `L1` distance between two embedded vectors of the same shape.
pub fn embedded_distance(x: &EmbeddedVector, y: &EmbeddedVector) -> Result<f64> {
    if x.n != y.n || x.variant != y.variant {
        return Err(Error::DomainMismatch);
    }
    Ok(x.parts
        .iter()
        .zip(&y.parts)
        .flat_map(|(p, q)| p.iter().zip(q.iter()))
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// Places a grid measure of side `n` into the corner of the torus of side
/// `2n`. Within that quadrant the geodesic torus distance equals the planar
/// one, so transport costs are unchanged.
pub fn grid_to_torus(sigma: &SignedMeasure) -> Result<SignedMeasure> {
    sigma.domain().require(Topology::Grid)?;
    let n = sigma.n();
    let mut values = Array2::zeros((2 * n, 2 * n));
    values
        .slice_mut(ndarray::s![..n, ..n])
        .assign(sigma.values());
    SignedMeasure::from_dense(Domain::torus(2 * n)?, values)
}

pub fn grid_to_torus_probability(mu: &ProbabilityMeasure) -> Result<ProbabilityMeasure> {
    grid_to_torus(mu.as_signed()).map(ProbabilityMeasure::from_signed_unchecked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{emd_cost, GroundMetric};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn torus(n: usize) -> Domain {
        Domain::torus(n).unwrap()
    }

    fn random_field(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0))
    }

    fn omega(k: i64, n: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
    }

    /// `Σ_{(u,v)≠0} weight(u,v) f̂(u,v) (e_{uv}(a,b) − shift)`, all sums explicit.
    fn naive(
        f: &Array2<f64>,
        weight: impl Fn(usize, usize) -> Complex64,
        shift: f64,
    ) -> Array2<Complex64> {
        let n = f.nrows();
        let hat = |u: usize, v: usize| {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((a, b), &x) in f.indexed_iter() {
                acc += x * omega(-((a * u + b * v) as i64), n);
            }
            acc / (n * n) as f64
        };
        let mut coeffs = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if (u, v) != (0, 0) {
                    coeffs.push((u, v, weight(u, v) * hat(u, v)));
                }
            }
        }
        Array2::from_shape_fn((n, n), |(a, b)| {
            coeffs
                .iter()
                .map(|&(u, v, c)| c * (omega((a * u + b * v) as i64, n) - shift))
                .sum()
        })
    }

    fn denom(u: usize, v: usize, n: usize) -> f64 {
        (omega(u as i64, n) - 1.0).norm_sqr() + (omega(v as i64, n) - 1.0).norm_sqr()
    }

    fn naive_a(f: &Array2<f64>) -> Array2<Complex64> {
        let n = f.nrows();
        naive(f, |u, v| (omega(u as i64, n) - 1.0) / denom(u, v, n), 0.0)
    }

    fn naive_b(f: &Array2<f64>) -> Array2<Complex64> {
        let n = f.nrows();
        naive(f, |u, v| (omega(v as i64, n) - 1.0) / denom(u, v, n), 0.0)
    }

    fn close(got: &Array2<f64>, want: &Array2<Complex64>, tol: f64) -> bool {
        got.iter()
            .zip(want.iter())
            .all(|(g, w)| (g - w.re).abs() <= tol && w.im.abs() <= tol)
    }

    fn dipole(n: usize, p: (usize, usize)) -> SignedMeasure {
        SignedMeasure::from_atoms(torus(n), &[(p, 1.0), ((0, 0), -1.0)]).unwrap()
    }

    #[test]
    fn trivial_inputs_vanish() {
        for n in [2, 5, 8] {
            let zero = SignedMeasure::zeros(torus(n));
            let u = ProbabilityMeasure::uniform(torus(n));
            for op in [op_a, op_b, op_s] {
                assert!(op(&zero).unwrap().iter().all(|&x| x == 0.0));
                assert!(op(u.as_signed()).unwrap().iter().all(|x| x.abs() <= 1e-15));
            }
            let e = embed(&u).unwrap();
            assert!(e.l1_norm() <= 1e-13);
        }
    }

    #[test]
    fn operators_match_naive_sums() {
        let s = dipole(4, (1, 0));
        assert!(close(&op_a(&s).unwrap(), &naive_a(s.values()), 1e-10));
        let s = dipole(4, (0, 1));
        assert!(close(&op_b(&s).unwrap(), &naive_b(s.values()), 1e-10));
        let s = dipole(4, (1, 1));
        let want = naive(
            s.values(),
            |u, v| {
                let sum = (omega(u as i64, 4) - 1.0).norm() + (omega(v as i64, 4) - 1.0).norm();
                Complex64::new(1.0 / sum, 0.0)
            },
            0.0,
        );
        assert!(close(&op_s(&s).unwrap(), &want, 1e-10));
    }

    #[test]
    fn op_b_mirrors_op_a() {
        let n = 6;
        let s = SignedMeasure::from_atoms(torus(n), &[((2, 2), 1.0), ((0, 3), -0.5), ((3, 0), -0.5)])
            .unwrap();
        let a = op_a(&s).unwrap();
        let b = op_b(&s).unwrap();
        for ((i, j), &x) in b.indexed_iter() {
            assert!((x - a[[j, i]]).abs() <= 1e-12);
        }
    }

    #[test]
    fn adjoints_match_naive_sums() {
        let n = 6;
        let f = random_field(n, 11);
        let want = naive(&f, |u, v| (omega(-(u as i64), n) - 1.0) / denom(u, v, n), 1.0);
        let got = op_a_star(&f).unwrap();
        assert!(close(&got, &want, 1e-10));
        assert_eq!(got[[0, 0]], 0.0);
        let want = naive(&f, |u, v| (omega(-(v as i64), n) - 1.0) / denom(u, v, n), 1.0);
        assert!(close(&op_b_star(&f).unwrap(), &want, 1e-10));
        let c = Array2::from_elem((n, n), 3.0);
        assert!(op_a_star(&c).unwrap().iter().all(|x| x.abs() <= 1e-14));
    }

    #[test]
    fn adjoint_identity_on_zero_mass() {
        let n = 5;
        let f = random_field(n, 12);
        let mut raw = random_field(n, 13);
        let mean = raw.mean().unwrap();
        raw.mapv_inplace(|x| x - mean);
        let sigma = SignedMeasure::from_dense(torus(n), raw).unwrap();
        let lhs = (&f * &op_a(&sigma).unwrap()).sum();
        let rhs = (&op_a_star(&f).unwrap() * sigma.values()).sum();
        assert!((lhs - rhs).abs() <= 1e-9);
        let lhs = (&f * &op_b(&sigma).unwrap()).sum();
        let rhs = (&op_b_star(&f).unwrap() * sigma.values()).sum();
        assert!((lhs - rhs).abs() <= 1e-9);
    }

    #[test]
    fn reconstruction() {
        assert!(reconstruct(&Array2::zeros((4, 4))).unwrap().iter().all(|&x| x == 0.0));

        let n = 7;
        let h = Array2::from_shape_fn((n, n), |(a, b)| omega((a + b) as i64, n).re - 1.0);
        let r = reconstruct(&h).unwrap();
        assert!(r.iter().zip(h.iter()).all(|(x, y)| (x - y).abs() <= 1e-10));

        let mut h = random_field(9, 14);
        h[[0, 0]] = 0.0;
        let r = reconstruct(&h).unwrap();
        assert!(r.iter().zip(h.iter()).all(|(x, y)| (x - y).abs() <= 1e-9));

        h[[0, 0]] = 1e-6;
        assert!(matches!(reconstruct(&h), Err(Error::BasePointNonZero(_))));
    }

    #[test]
    fn embedding_of_dirac() {
        let n = 4;
        let d = ProbabilityMeasure::dirac(torus(n), (0, 0)).unwrap();
        let e = embed(&d).unwrap();
        let centered = d.center();
        assert!(close(e.part_a(), &naive_a(centered.values()), 1e-10));
        assert!(close(e.part_b().unwrap(), &naive_b(centered.values()), 1e-10));
        let s = embed_s(&d).unwrap();
        assert_eq!(s.parts().len(), 1);
        assert!(s.part_b().is_none());
    }

    #[test]
    fn embedding_is_affine() {
        let n = 8;
        let mu = ProbabilityMeasure::uniform_on_set(torus(n), &[(1, 2), (5, 5)]).unwrap();
        let nu = ProbabilityMeasure::dirac(torus(n), (7, 0)).unwrap();
        let (em, en) = (embed(&mu).unwrap(), embed(&nu).unwrap());
        let direct = embed_signed(&mu.difference(&nu).unwrap(), Variant::Ab).unwrap();
        let dist = embedded_distance(&em, &en).unwrap();
        assert!((dist - direct.l1_norm()).abs() <= 1e-12);
        assert_eq!(embedded_distance(&em, &em).unwrap(), 0.0);
        assert_eq!(dist, embedded_distance(&en, &em).unwrap());
        assert!(matches!(
            embedded_distance(&em, &embed_s(&nu).unwrap()),
            Err(Error::DomainMismatch)
        ));
    }

    #[test]
    fn adjacent_diracs_have_a_fixed_distance() {
        let n = 8;
        let p = ProbabilityMeasure::dirac(torus(n), (3, 3)).unwrap();
        let q = ProbabilityMeasure::dirac(torus(n), (3, 4)).unwrap();
        let got = embedded_distance(&embed(&p).unwrap(), &embed(&q).unwrap()).unwrap();
        let diff = p.difference(&q).unwrap();
        let want: f64 = naive_a(diff.values())
            .iter()
            .chain(naive_b(diff.values()).iter())
            .map(|c| c.re.abs())
            .sum();
        assert!((got - want).abs() <= 1e-10);
        assert!(got > 0.0);
    }

    #[test]
    fn topology_and_size_errors() {
        let g = SignedMeasure::zeros(Domain::grid(4).unwrap());
        assert!(matches!(op_a(&g), Err(Error::WrongTopology { .. })));
        let tiny = SignedMeasure::zeros(torus(1));
        assert!(matches!(op_s(&tiny), Err(Error::SideTooSmall { .. })));
        assert!(matches!(op_a_star(&Array2::zeros((1, 1))), Err(Error::SideTooSmall { .. })));
        let u = ProbabilityMeasure::uniform(Domain::grid(4).unwrap());
        assert!(matches!(embed(&u), Err(Error::WrongTopology { .. })));
        assert!(matches!(
            grid_to_torus(&SignedMeasure::zeros(torus(4))),
            Err(Error::WrongTopology { .. })
        ));
    }

    #[test]
    fn grid_to_torus_examples() {
        let g = Domain::grid(4).unwrap();
        let d = ProbabilityMeasure::dirac(g, (0, 0)).unwrap();
        let t = grid_to_torus_probability(&d).unwrap();
        assert_eq!(t.domain(), torus(8));
        assert_eq!(t.get((0, 0)), 1.0);
        assert_eq!(t.as_signed().total_mass(), 1.0);

        let a = ProbabilityMeasure::uniform_on_set(g, &[(0, 0), (3, 1), (2, 3)]).unwrap();
        let b = ProbabilityMeasure::uniform_on_set(g, &[(3, 3), (0, 2), (1, 0)]).unwrap();
        let before = emd_cost(&a, &b, &GroundMetric::new(g)).unwrap();
        let (ta, tb) = (
            grid_to_torus_probability(&a).unwrap(),
            grid_to_torus_probability(&b).unwrap(),
        );
        let after = emd_cost(&ta, &tb, &GroundMetric::new(torus(8))).unwrap();
        assert!((before - after).abs() <= 1e-9);
    }

    #[test]
    fn write_text_layout() {
        let e = embed(&ProbabilityMeasure::dirac(torus(2), (1, 0)).unwrap()).unwrap();
        let mut buf = Vec::new();
        e.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n 2 embedded");
        assert_eq!(lines.len(), 1 + 2 * 4);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("AB".parse::<Variant>().unwrap(), Variant::Ab);
        assert_eq!("s".parse::<Variant>().unwrap(), Variant::S);
        assert!("x".parse::<Variant>().is_err());
    }
}
