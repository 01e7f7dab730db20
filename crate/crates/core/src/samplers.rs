//! Named population distributions with known intrinsic dimension.
//!
//! A [`Sampler`] describes a probability measure supported on a compact set
//! of intrinsic dimension `d`, possibly embedded in a higher-dimensional
//! ambient space by a random isometry. Draws are counter-based: point `i` is
//! generated from an independent stream derived from `(seed, i)`, so samples
//! are reproducible, order-independent, and safely drawable in parallel.
//!
//! Supports are rescaled into the unit ball (the divisor is reported by
//! [`Sampler::scale`]) so that analytic constants stated for the raw support
//! can be converted explicitly rather than silently.

use std::f64::consts::TAU;
use std::marker::PhantomData;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measures::Point;
use crate::rng::{mix, stream_rng};
use crate::scalar::Real;

/// Salt for deriving an embedding matrix seed from a descriptor seed.
pub(crate) const SALT_EMBED: u64 = 0x454d_4245_44;

/// The analytic form of the sampled density.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityForm {
    /// Uniform on the unit cube `[0,1]^d`.
    UniformCube { d: usize },
    /// Uniform on the closed unit ball in `R^d`.
    UniformBall { d: usize },
    /// Uniform on the surface of the unit sphere `S^d` in `R^{d+1}`.
    UniformSphereSurface { d: usize },
    /// Uniform on the interval `[0, length]`.
    ScaledUniformInterval { length: f64 },
    /// Coordinatewise Gaussian centered at 1/2 with the given sigma,
    /// truncated to `[0,1]^d`.
    TruncatedGaussianCube { d: usize, sigma: f64 },
}

impl DensityForm {
    fn intrinsic_dim(&self) -> usize {
        match *self {
            DensityForm::UniformCube { d }
            | DensityForm::UniformBall { d }
            | DensityForm::UniformSphereSurface { d }
            | DensityForm::TruncatedGaussianCube { d, .. } => d,
            DensityForm::ScaledUniformInterval { .. } => 1,
        }
    }

    /// Dimension of the space the raw (pre-embedding) draws live in.
    fn base_dim(&self) -> usize {
        match *self {
            DensityForm::UniformSphereSurface { d } => d + 1,
            _ => self.intrinsic_dim(),
        }
    }

    /// Supremum of the euclidean norm over the raw support.
    fn norm_bound(&self) -> f64 {
        match *self {
            DensityForm::UniformCube { d } | DensityForm::TruncatedGaussianCube { d, .. } => {
                (d as f64).sqrt()
            }
            DensityForm::UniformBall { .. } | DensityForm::UniformSphereSurface { .. } => 1.0,
            DensityForm::ScaledUniformInterval { length } => length,
        }
    }

    fn name(&self) -> String {
        match *self {
            DensityForm::UniformCube { d } => format!("uniform-cube-d{d}"),
            DensityForm::UniformBall { d } => format!("uniform-ball-d{d}"),
            DensityForm::UniformSphereSurface { d } => format!("uniform-sphere-surface-d{d}"),
            DensityForm::ScaledUniformInterval { length } => {
                format!("scaled-uniform-interval-len{length}")
            }
            DensityForm::TruncatedGaussianCube { d, sigma } => {
                format!("truncated-gaussian-cube-d{d}-sigma{sigma}")
            }
        }
    }
}

/// The moment `m = ∫ density^{d/(d+2)}` over the raw support, together with
/// whether it came from a closed form or from quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentDescriptor<T: Real> {
    pub value: T,
    pub exact: bool,
}

/// An immutable description of a population measure: draws are deterministic
/// given the seed and the draw index.
#[derive(Clone, Debug)]
pub struct Sampler<T: Real> {
    name: String,
    form: DensityForm,
    ambient_dim: usize,
    seed: u64,
    scale: f64,
    /// Row-major `ambient_dim x base_dim` matrix with orthonormal columns;
    /// `None` means the identity (no embedding).
    embed: Option<Vec<f64>>,
    _scalar: PhantomData<fn() -> T>,
}

impl<T: Real> Sampler<T> {
    fn from_form(form: DensityForm, seed: u64) -> Result<Self> {
        match form {
            DensityForm::UniformCube { d }
            | DensityForm::UniformBall { d }
            | DensityForm::UniformSphereSurface { d } => {
                if d == 0 {
                    return Err(Error::InvalidParameter(
                        "intrinsic dimension must be at least 1".into(),
                    ));
                }
            }
            DensityForm::ScaledUniformInterval { length } => {
                // Zero length is allowed as the degenerate point mass at the
                // origin, handy as a known-zero-distance population.
                if !(length >= 0.0) || !length.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "interval length {length} must be non-negative and finite"
                    )));
                }
            }
            DensityForm::TruncatedGaussianCube { d, sigma } => {
                if d == 0 {
                    return Err(Error::InvalidParameter(
                        "intrinsic dimension must be at least 1".into(),
                    ));
                }
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "sigma {sigma} must be positive and finite"
                    )));
                }
            }
        }
        Ok(Sampler {
            name: form.name(),
            ambient_dim: form.base_dim(),
            scale: form.norm_bound().max(1.0),
            form,
            seed,
            embed: None,
            _scalar: PhantomData,
        })
    }

    pub fn uniform_cube(d: usize, seed: u64) -> Result<Self> {
        Self::from_form(DensityForm::UniformCube { d }, seed)
    }

    pub fn uniform_ball(d: usize, seed: u64) -> Result<Self> {
        Self::from_form(DensityForm::UniformBall { d }, seed)
    }

    /// Uniform on the surface of `S^d`, which lives in `R^{d+1}`.
    pub fn uniform_sphere_surface(d: usize, seed: u64) -> Result<Self> {
        Self::from_form(DensityForm::UniformSphereSurface { d }, seed)
    }

    pub fn scaled_uniform_interval(length: f64, seed: u64) -> Result<Self> {
        Self::from_form(DensityForm::ScaledUniformInterval { length }, seed)
    }

    pub fn truncated_gaussian_cube(d: usize, sigma: f64, seed: u64) -> Result<Self> {
        Self::from_form(DensityForm::TruncatedGaussianCube { d, sigma }, seed)
    }

    /// Parses a descriptor like `uniform-cube:d=2`, `scaled-uniform-interval:len=2`,
    /// `truncated-gaussian-cube:d=1:sigma=0.3`, or `uniform-sphere-surface:d=1:D=10`
    /// (a trailing `D=` requests an isometric embedding into that ambient
    /// dimension, seeded from `seed`).
    pub fn from_descriptor(desc: &str, seed: u64) -> Result<Self> {
        let mut parts = desc.split(':');
        let head = parts.next().unwrap_or("");
        let mut d: Option<usize> = None;
        let mut len: Option<f64> = None;
        let mut sigma: Option<f64> = None;
        let mut ambient: Option<usize> = None;
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("descriptor field `{part}` is not key=value"))
            })?;
            let bad = |k: &str| Error::InvalidParameter(format!("bad value for `{k}` in `{desc}`"));
            match key {
                "d" => d = Some(value.parse().map_err(|_| bad("d"))?),
                "len" | "length" => len = Some(value.parse().map_err(|_| bad("len"))?),
                "sigma" => sigma = Some(value.parse().map_err(|_| bad("sigma"))?),
                "D" => ambient = Some(value.parse().map_err(|_| bad("D"))?),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown descriptor field `{key}` in `{desc}`"
                    )))
                }
            }
        }
        let need_d = || d.ok_or_else(|| Error::InvalidParameter(format!("`{desc}` needs d=")));
        let form = match head {
            "uniform-cube" => DensityForm::UniformCube { d: need_d()? },
            "uniform-ball" => DensityForm::UniformBall { d: need_d()? },
            "uniform-sphere-surface" => DensityForm::UniformSphereSurface { d: need_d()? },
            "scaled-uniform-interval" => DensityForm::ScaledUniformInterval {
                length: len.ok_or_else(|| {
                    Error::InvalidParameter(format!("`{desc}` needs len="))
                })?,
            },
            "truncated-gaussian-cube" => DensityForm::TruncatedGaussianCube {
                d: need_d()?,
                sigma: sigma.unwrap_or(0.25),
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown sampler form `{other}`"
                )))
            }
        };
        let base = Self::from_form(form, seed)?;
        match ambient {
            Some(dim) => base.embed_isometric(dim, mix(seed, SALT_EMBED)),
            None => Ok(base),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn form(&self) -> &DensityForm {
        &self.form
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.form.intrinsic_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Divisor applied to raw draws so the support fits the unit ball;
    /// 1 when the raw support already does.
    pub fn scale(&self) -> T {
        T::from_f64_lossy(self.scale)
    }

    /// Same distribution, new stream: used to draw independent samples.
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.seed = seed;
        s
    }

    /// Draws `n` i.i.d. points. Point `i` depends only on `(seed, i)`, so a
    /// shorter draw is a prefix of a longer one.
    pub fn draw(&self, n: usize) -> Result<Vec<Point<T>>> {
        if n == 0 {
            return Err(Error::InvalidParameter("cannot draw 0 points".into()));
        }
        let base_dim = self.form.base_dim();
        let mut raw = vec![0.0f64; base_dim];
        let mut out = Vec::with_capacity(n);
        let mut mapped = vec![0.0f64; self.ambient_dim];
        for i in 0..n {
            let mut rng = stream_rng(self.seed, i as u64);
            self.draw_raw(&mut rng, &mut raw);
            for v in raw.iter_mut() {
                *v /= self.scale;
            }
            let coords: &[f64] = match &self.embed {
                Some(q) => {
                    for (r, slot) in mapped.iter_mut().enumerate() {
                        let row = &q[r * base_dim..(r + 1) * base_dim];
                        *slot = row.iter().zip(&raw).map(|(a, b)| a * b).sum();
                    }
                    &mapped
                }
                None => &raw,
            };
            out.push(Point::new(
                coords.iter().map(|&v| T::from_f64_lossy(v)).collect(),
            ));
        }
        Ok(out)
    }

    fn draw_raw(&self, rng: &mut impl Rng, out: &mut [f64]) {
        match self.form {
            DensityForm::UniformCube { .. } => {
                for v in out.iter_mut() {
                    *v = rng.gen();
                }
            }
            DensityForm::UniformBall { d } => {
                let mut nrm = 0.0;
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                    nrm += *v * *v;
                }
                let nrm = nrm.sqrt().max(f64::MIN_POSITIVE);
                let r = rng.gen::<f64>().powf(1.0 / d as f64);
                for v in out.iter_mut() {
                    *v *= r / nrm;
                }
            }
            DensityForm::UniformSphereSurface { .. } => {
                let mut nrm = 0.0;
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                    nrm += *v * *v;
                }
                let nrm = nrm.sqrt().max(f64::MIN_POSITIVE);
                for v in out.iter_mut() {
                    *v /= nrm;
                }
            }
            DensityForm::ScaledUniformInterval { length } => {
                out[0] = length * rng.gen::<f64>();
            }
            DensityForm::TruncatedGaussianCube { sigma, .. } => {
                for v in out.iter_mut() {
                    *v = loop {
                        let g: f64 = rng.sample(StandardNormal);
                        let candidate = 0.5 + sigma * g;
                        if (0.0..=1.0).contains(&candidate) {
                            break candidate;
                        }
                    };
                }
            }
        }
    }

    /// Composes the sampler with a fresh random isometry into a larger
    /// ambient space. Draws, intrinsic dimension, and pairwise distances are
    /// unchanged; only the coordinates move.
    pub fn embed_isometric(&self, new_ambient_dim: usize, seed: u64) -> Result<Self> {
        if new_ambient_dim < self.ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "embedding cannot decrease ambient dimension ({} -> {})",
                self.ambient_dim, new_ambient_dim
            )));
        }
        let q = orthonormal_columns(new_ambient_dim, self.ambient_dim, seed);
        let base_dim = self.form.base_dim();
        let composed = match &self.embed {
            Some(old) => {
                // (new x cur) times (cur x base).
                let cur = self.ambient_dim;
                let mut c = vec![0.0f64; new_ambient_dim * base_dim];
                for r in 0..new_ambient_dim {
                    for col in 0..base_dim {
                        let mut acc = 0.0;
                        for k in 0..cur {
                            acc += q[r * cur + k] * old[k * base_dim + col];
                        }
                        c[r * base_dim + col] = acc;
                    }
                }
                c
            }
            None => q,
        };
        Ok(Sampler {
            name: format!("{}-emb{}", self.name, new_ambient_dim),
            form: self.form.clone(),
            ambient_dim: new_ambient_dim,
            seed: self.seed,
            scale: self.scale,
            embed: Some(composed),
            _scalar: PhantomData,
        })
    }

    /// The moment `∫ density^{d/(d+2)}` of the raw (pre-scale) density, a
    /// closed form for the constant-density supports and 1-D adaptive
    /// quadrature per coordinate for the truncated Gaussian.
    pub fn analytic_m(&self) -> Result<MomentDescriptor<T>> {
        let d = self.intrinsic_dim() as f64;
        let alpha = d / (d + 2.0);
        let (value, exact) = match self.form {
            // Constant density c on a region of measure V gives V * c^alpha;
            // with c = 1/V this is V^(1 - alpha) = V^(2/(d+2)).
            DensityForm::UniformCube { .. } => (1.0, true),
            DensityForm::UniformBall { d } => (ball_volume(d).powf(1.0 - alpha), true),
            DensityForm::UniformSphereSurface { d } => (sphere_area(d).powf(1.0 - alpha), true),
            DensityForm::ScaledUniformInterval { length } => (length.powf(1.0 - alpha), true),
            DensityForm::TruncatedGaussianCube { d, sigma } => {
                let phi = move |x: f64| {
                    let z = (x - 0.5) / sigma;
                    (-0.5 * z * z).exp() / (sigma * TAU.sqrt())
                };
                let z = adaptive_simpson(&phi, 0.0, 1.0, 1e-13);
                let integrand = move |x: f64| (phi(x) / z).powf(alpha);
                let per_coord = adaptive_simpson(&integrand, 0.0, 1.0, 1e-10 / d as f64);
                (per_coord.powi(d as i32), false)
            }
        };
        Ok(MomentDescriptor {
            value: T::from_f64_lossy(value),
            exact,
        })
    }
}

/// Volume of the unit ball in `R^d` via the two-step recursion.
pub(crate) fn ball_volume(d: usize) -> f64 {
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 0 } else { 1 };
    while k < d {
        k += 2;
        v *= TAU / k as f64;
    }
    v
}

/// Surface area of the unit sphere `S^d` (embedded in `R^{d+1}`).
pub(crate) fn sphere_area(d: usize) -> f64 {
    let mut a = if d % 2 == 0 { 2.0 } else { TAU };
    let mut k = if d % 2 == 0 { 0 } else { 1 };
    while k < d {
        k += 2;
        a *= TAU / (k - 1) as f64;
    }
    a
}

/// Random matrix with orthonormal columns: seeded Gaussian entries followed
/// by modified Gram-Schmidt with one re-orthogonalization pass.
fn orthonormal_columns(rows: usize, cols: usize, seed: u64) -> Vec<f64> {
    assert!(rows >= cols);
    let mut rng = stream_rng(seed, 0);
    // Column-major scratch for the orthogonalization.
    let mut q = vec![0.0f64; rows * cols];
    for c in 0..cols {
        loop {
            for r in 0..rows {
                q[c * rows + r] = rng.sample(StandardNormal);
            }
            for _pass in 0..2 {
                for prev in 0..c {
                    let mut dot = 0.0;
                    for r in 0..rows {
                        dot += q[c * rows + r] * q[prev * rows + r];
                    }
                    for r in 0..rows {
                        q[c * rows + r] -= dot * q[prev * rows + r];
                    }
                }
            }
            let nrm: f64 = q[c * rows..(c + 1) * rows].iter().map(|v| v * v).sum();
            let nrm = nrm.sqrt();
            if nrm > 1e-6 {
                for r in 0..rows {
                    q[c * rows + r] /= nrm;
                }
                break;
            }
            // Degenerate draw; take a fresh column.
        }
    }
    let mut row_major = vec![0.0f64; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            row_major[r * cols + c] = q[c * rows + r];
        }
    }
    row_major
}

/// Recursive adaptive Simpson quadrature to the given absolute tolerance.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48)
}
