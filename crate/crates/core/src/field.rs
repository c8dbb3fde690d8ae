//! Sampled fields, spectra, dilated kernels, convolution, weighted norms and
//! the binary field file format.
//!
//! Spectral convention: on each axis f̂(ξ_k) = δ·(−1)^k·DFT(f)_k with
//! ξ_k = πk/L and signed k, so that (f∗g)^ = f̂·ĝ exactly for the circular
//! convolution (f∗g)(x_i) = δ Σ_j f(x_j) g(x_i − x_j).

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dilation::ExpansiveDilation;
use crate::error::{Error, Result};
use crate::grid::{for_each_lane, neumaier_sum, signed_index, GridSpec};

/// A complex function sampled on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    spec: GridSpec,
    values: Vec<Complex64>,
}

/// Coefficients over the dual lattice in the physical convention.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    spec: GridSpec,
    coefficients: Vec<Complex64>,
}

impl Field {
    pub fn zeros(spec: &GridSpec) -> Self {
        Self { spec: spec.clone(), values: vec![Complex64::new(0.0, 0.0); spec.len()] }
    }

    pub fn from_values(spec: &GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::SpecMismatch);
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument("field has non-finite entries".into()));
        }
        Ok(Self { spec: spec.clone(), values })
    }

    pub fn from_real(spec: &GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::from_values(spec, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples `f` at the grid points (coordinates in [−L, L)).
    pub fn from_fn<F>(spec: &GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..spec.len())
            .into_par_iter()
            .map(|flat| f(&spec.point(&spec.multi_index(flat))))
            .collect();
        Self { spec: spec.clone(), values }
    }

    /// Samples `f` at the minimal-image coordinates relative to the origin,
    /// the natural placement of a kernel centred at 0 on the torus.
    pub fn from_fn_centered<F>(spec: &GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let origin = spec.origin_index();
        let values = (0..spec.len())
            .into_par_iter()
            .map(|flat| {
                let idx = spec.multi_index(flat);
                let x: Vec<f64> = idx
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| spec.min_image(a, origin[a], i) as f64 * spec.spacing(a))
                    .collect();
                f(&x)
            })
            .collect();
        Self { spec: spec.clone(), values }
    }

    /// The grid delta 1/cell_volume at the origin.
    pub fn delta(spec: &GridSpec) -> Self {
        let mut f = Self::zeros(spec);
        let o = spec.flat_index(&spec.origin_index());
        f.values[o] = Complex64::new(1.0 / spec.cell_volume(), 0.0);
        f
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn map<F: Fn(Complex64) -> Complex64 + Sync>(&self, f: F) -> Self {
        Self { spec: self.spec.clone(), values: self.values.par_iter().map(|v| f(*v)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Field) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        Ok(Self {
            spec: self.spec.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        Ok(Self {
            spec: self.spec.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add_assign(&mut self, other: &Field) -> Result<()> {
        self.spec.check_same(&other.spec)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        Ok(Self {
            spec: self.spec.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// Circular shift by whole cells: out(x) = self(x − shift·δ).
    pub fn shift(&self, shift: &[i64]) -> Self {
        let spec = &self.spec;
        let values = (0..spec.len())
            .into_par_iter()
            .map(|flat| {
                let idx = spec.multi_index(flat);
                let src: Vec<usize> =
                    idx.iter().enumerate().map(|(a, &i)| spec.wrap(a, i as i64 - shift[a])).collect();
                self.values[spec.flat_index(&src)]
            })
            .collect();
        Self { spec: spec.clone(), values }
    }

    /// Tensor product f₁ ⊗ f₂ on the concatenated grid.
    pub fn tensor(f1: &Field, f2: &Field) -> Result<Self> {
        let s1 = &f1.spec;
        let s2 = &f2.spec;
        let mut dims = s1.dims().to_vec();
        dims.extend_from_slice(s2.dims());
        let mut widths = s1.box_half_widths().to_vec();
        widths.extend_from_slice(s2.box_half_widths());
        let mut samples = s1.samples().to_vec();
        samples.extend_from_slice(s2.samples());
        let spec = GridSpec::new(dims, widths, samples)?;
        let n2 = f2.len();
        let values = (0..spec.len()).map(|i| f1.values[i / n2] * f2.values[i % n2]).collect();
        Ok(Self { spec, values })
    }

    /// Forward transform in the physical convention.
    pub fn spectrum(&self) -> SpectralField {
        let mut data = self.values.clone();
        fft_nd(&mut data, self.spec.samples(), FftDirection::Forward);
        apply_phase_and_scale(&mut data, &self.spec, self.spec.cell_volume());
        SpectralField { spec: self.spec.clone(), coefficients: data }
    }

    /// Riemann sum of the values.
    pub fn integral(&self) -> Complex64 {
        let re = neumaier_sum(self.values.iter().map(|v| v.re));
        let im = neumaier_sum(self.values.iter().map(|v| v.im));
        Complex64::new(re, im) * self.spec.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Plain L² norm.
    pub fn l2_norm(&self) -> f64 {
        (neumaier_sum(self.values.iter().map(|v| v.norm_sqr())) * self.spec.cell_volume()).sqrt()
    }

    pub fn real_part(&self) -> Self {
        self.map(|v| Complex64::new(v.re, 0.0))
    }
}

impl SpectralField {
    pub fn zeros(spec: &GridSpec) -> Self {
        Self { spec: spec.clone(), coefficients: vec![Complex64::new(0.0, 0.0); spec.len()] }
    }

    /// Samples a closed-form transform ĝ on the dual lattice.
    pub fn from_fn<F>(spec: &GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let coefficients = (0..spec.len())
            .into_par_iter()
            .map(|flat| {
                let idx = spec.multi_index(flat);
                let xi: Vec<f64> = idx.iter().enumerate().map(|(a, &k)| spec.frequency(a, k)).collect();
                f(&xi)
            })
            .collect();
        Self { spec: spec.clone(), coefficients }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }
    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Frequency vector of flat slot `flat`.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let idx = self.spec.multi_index(flat);
        idx.iter().enumerate().map(|(a, &k)| self.spec.frequency(a, k)).collect()
    }

    pub fn mul(&self, other: &SpectralField) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        Ok(Self {
            spec: self.spec.clone(),
            coefficients: self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn mul_real(&self, m: &[f64]) -> Self {
        Self {
            spec: self.spec.clone(),
            coefficients: self.coefficients.iter().zip(m).map(|(a, b)| a * b).collect(),
        }
    }

    /// Inverse transform back to samples.
    pub fn to_field(&self) -> Field {
        let mut data = self.coefficients.clone();
        apply_phase_and_scale(&mut data, &self.spec, 1.0 / self.spec.cell_volume());
        fft_nd(&mut data, self.spec.samples(), FftDirection::Inverse);
        let inv_n = 1.0 / self.spec.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= inv_n);
        Field { spec: self.spec.clone(), values: data }
    }

    /// Energy ∫|ĝ|² dξ/(2π)^d on the lattice, equal to ‖g‖₂² by Parseval.
    pub fn energy(&self) -> f64 {
        let dxi: f64 = (0..self.spec.axes())
            .map(|a| std::f64::consts::PI / self.spec.box_half_widths()[a])
            .product();
        let norm = (2.0 * std::f64::consts::PI).powi(self.spec.axes() as i32);
        neumaier_sum(self.coefficients.iter().map(|v| v.norm_sqr())) * dxi / norm
    }
}

fn apply_phase_and_scale(data: &mut [Complex64], spec: &GridSpec, scale: f64) {
    let samples = spec.samples().to_vec();
    data.par_iter_mut().enumerate().for_each(|(flat, v)| {
        let mut rem = flat;
        let mut parity = 0i64;
        for a in (0..samples.len()).rev() {
            let kk = rem % samples[a];
            rem /= samples[a];
            parity += signed_index(kk, samples[a]);
        }
        let s = if parity.rem_euclid(2) == 1 { -scale } else { scale };
        *v *= s;
    });
}

thread_local! {
    static PLANNER: std::cell::RefCell<FftPlanner<f64>> = std::cell::RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, dir))
}

/// Unnormalized N-d DFT along every axis.
pub fn fft_nd(data: &mut [Complex64], samples: &[usize], dir: FftDirection) {
    for axis in 0..samples.len() {
        fft_axis(data, samples, axis, dir);
    }
}

/// Unnormalized DFT along one axis.
pub fn fft_axis(data: &mut [Complex64], samples: &[usize], axis: usize, dir: FftDirection) {
    let n = samples[axis];
    let fft = plan(n, dir);
    for_each_lane(data, samples, axis, |lane| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(lane, &mut scratch);
    });
}

/// Circular convolution scaled by the cell volume.
pub fn convolve(f: &Field, g: &Field) -> Result<Field> {
    f.spec.check_same(&g.spec)?;
    Ok(f.spectrum().mul(&g.spectrum())?.to_field())
}

/// Convolution with a kernel given by its spectrum.
pub fn convolve_spectral(f: &Field, ghat: &SpectralField) -> Result<Field> {
    f.spec.check_same(&ghat.spec)?;
    Ok(f.spectrum().mul(ghat)?.to_field())
}

/// Weighted L^p (quasi-)norm {Σ |f|^p w δ}^{1/p}; p = ∞ gives max |f|.
pub fn lp_norm(f: &Field, p: f64, weight: Option<&[f64]>) -> Result<f64> {
    lp_norm_values(&f.abs(), f.spec.cell_volume(), p, weight)
}

/// [`lp_norm`] over precomputed magnitudes.
pub fn lp_norm_values(mag: &[f64], cell_volume: f64, p: f64, weight: Option<&[f64]>) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must be positive")));
    }
    if let Some(w) = weight {
        if w.len() != mag.len() {
            return Err(Error::SpecMismatch);
        }
        if let Some(index) = w.iter().position(|v| *v < 0.0 || v.is_nan()) {
            return Err(Error::NegativeWeight { index });
        }
    }
    if p.is_infinite() {
        return Ok(mag.iter().cloned().fold(0.0, f64::max));
    }
    let s = match weight {
        Some(w) => neumaier_sum(mag.iter().zip(w).map(|(m, w)| m.powf(p) * w)),
        None => neumaier_sum(mag.iter().map(|m| m.powf(p))),
    };
    Ok((s * cell_volume).powf(1.0 / p))
}

/// A base kernel: closed form either in space or in frequency.
#[derive(Clone)]
pub enum Kernel {
    Spatial(Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>),
    Spectral(Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>),
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kernel::Spatial(_) => write!(f, "Kernel::Spatial"),
            Kernel::Spectral(_) => write!(f, "Kernel::Spectral"),
        }
    }
}

/// Extent in cells of B_k along every axis of `spec`, for the unit-volume
/// gauge `xᵀP_k x < c`.
pub fn ball_extent_cells(gauge: &crate::dilation::EllipsoidGauge, k: i32, spec: &GridSpec) -> Vec<f64> {
    let pk = gauge.form_matrix(k);
    let inv = pk.try_inverse().expect("ball form is positive definite");
    (0..spec.axes())
        .map(|a| 2.0 * (gauge.radius() * inv[(a, a)]).sqrt() / spec.spacing(a))
        .collect()
}

/// φ_k(x) = b^{−k} φ(A^{−k}x), or φ̂_k(ξ) = φ̂((A*)^k ξ) for spectral kernels.
pub fn synthesize_dilated_kernel(
    base: &Kernel,
    gauge: &crate::dilation::EllipsoidGauge,
    k: i32,
    spec: &GridSpec,
) -> Result<Field> {
    let dil: &ExpansiveDilation = gauge.dilation();
    if spec.factors() != 1 || spec.dims()[0] != dil.dim() {
        return Err(Error::SpecMismatch);
    }
    let extent = ball_extent_cells(gauge, k, spec);
    for (a, e) in extent.iter().enumerate() {
        if *e < 4.0 || *e > spec.samples()[a] as f64 / 4.0 {
            return Err(Error::UnresolvableScale {
                k,
                reason: format!("B_k spans {e:.2} cells on axis {a}"),
            });
        }
    }
    Ok(dilated_kernel_unchecked(base, dil, k, spec))
}

/// [`synthesize_dilated_kernel`] without the resolvability check.
pub fn dilated_kernel_unchecked(base: &Kernel, dil: &ExpansiveDilation, k: i32, spec: &GridSpec) -> Field {
    let n = dil.dim();
    match base {
        Kernel::Spatial(phi) => {
            let m = dil.power(-k);
            let scale = dil.det_abs().powi(-k);
            Field::from_fn_centered(spec, |x| {
                let y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * x[j]).sum()).collect();
                phi(&y) * scale
            })
        }
        Kernel::Spectral(phihat) => {
            let m = dil.power(k).transpose();
            SpectralField::from_fn(spec, |xi| {
                let y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * xi[j]).sum()).collect();
                phihat(&y)
            })
            .to_field()
        }
    }
}

/// Dilated spectral kernel sampled directly on the dual lattice.
pub fn dilated_spectrum(phihat: &(dyn Fn(&[f64]) -> Complex64 + Sync), dil: &ExpansiveDilation, k: i32, spec: &GridSpec) -> SpectralField {
    let n = dil.dim();
    let m = dil.power(k).transpose();
    SpectralField::from_fn(spec, |xi| {
        let y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * xi[j]).sum()).collect();
        phihat(&y)
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldHeader {
    dims: Vec<usize>,
    #[serde(rename = "box")]
    box_half_widths: Vec<f64>,
    samples: Vec<usize>,
    dtype: String,
    byte_order: String,
}

/// Writes a JSON header line followed by interleaved little-endian f64 pairs.
pub fn write_field<W: Write>(mut out: W, field: &Field) -> Result<()> {
    let header = FieldHeader {
        dims: field.spec.dims().to_vec(),
        box_half_widths: field.spec.box_half_widths().to_vec(),
        samples: field.spec.samples().to_vec(),
        dtype: "f64-complex-interleaved".into(),
        byte_order: "little".into(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(field.len() * 16);
    for v in &field.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut input: R) -> Result<Field> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header: FieldHeader = serde_json::from_slice(&bytes[..nl])?;
    if header.dtype != "f64-complex-interleaved" || header.byte_order != "little" {
        return Err(Error::Format(format!("unsupported dtype {} / {}", header.dtype, header.byte_order)));
    }
    let spec = GridSpec::new(header.dims, header.box_half_widths, header.samples)?;
    let payload = &bytes[nl + 1..];
    if payload.len() != spec.len() * 16 {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            spec.len() * 16
        )));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Field::from_values(&spec, values)
}

pub fn save_field(path: &Path, field: &Field) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_field(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<Field> {
    read_field(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::EllipsoidGauge;
    use approx::assert_relative_eq;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn gaussian_1d(spec: &GridSpec, s: f64) -> Field {
        Field::from_fn_centered(spec, |x| c((-x[0] * x[0] / (2.0 * s * s)).exp()))
    }

    #[test]
    fn spectral_round_trip() {
        let spec = GridSpec::new(vec![1, 1], vec![3.0, 5.0], vec![32, 64]).unwrap();
        let f = Field::from_fn(&spec, |x| Complex64::new(x[0].sin() * x[1], x[1].cos()));
        let back = f.spectrum().to_field();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-12 * f.max_abs());
        }
    }

    #[test]
    fn gaussian_spectrum_matches_closed_form() {
        let spec = GridSpec::cube(1, 20.0, 256).unwrap();
        let f = gaussian_1d(&spec, 1.0);
        let fh = f.spectrum();
        for (flat, v) in fh.coefficients().iter().enumerate() {
            let xi = fh.frequency(flat)[0];
            let exact = (2.0 * std::f64::consts::PI).sqrt() * (-xi * xi / 2.0).exp();
            assert!((v - c(exact)).norm() < 1e-12, "xi={xi} got {v} want {exact}");
        }
    }

    #[test]
    fn delta_is_identity_and_convolution_commutes() {
        let spec = GridSpec::cube(1, 4.0, 64).unwrap();
        let f = Field::from_fn(&spec, |x| Complex64::new(x[0].cos(), (2.0 * x[0]).sin()));
        let g = gaussian_1d(&spec, 0.5);
        let fd = convolve(&f, &Field::delta(&spec)).unwrap();
        for (a, b) in f.values().iter().zip(fd.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        let fg = convolve(&f, &g).unwrap();
        let gf = convolve(&g, &f).unwrap();
        for (a, b) in fg.values().iter().zip(gf.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let spec = GridSpec::cube(1, 2.0, 16).unwrap();
        let f = Field::from_fn(&spec, |x| c(x[0] * x[0] - 0.3 * x[0]));
        let g = Field::from_fn(&spec, |x| c((x[0] + 0.25).exp()));
        let fg = convolve(&f, &g).unwrap();
        let n = 16usize;
        let d = spec.spacing(0);
        for i in 0..n {
            let mut s = c(0.0);
            for j in 0..n {
                s += f.values()[j] * g.values()[(i + n + n / 2 - j) % n] * d;
            }
            assert!((s - fg.values()[i]).norm() < 1e-12, "i={i}");
        }
    }

    #[test]
    fn lp_norm_examples() {
        let spec = GridSpec::cube(1, 1.0, 64).unwrap();
        let one = Field::from_fn(&spec, |_| c(1.0));
        assert_relative_eq!(lp_norm(&one, 2.0, None).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        let f = Field::from_fn(&spec, |x| c(x[0]));
        let n = lp_norm(&f, 1.5, None).unwrap();
        assert_eq!(lp_norm(&f.scale(c(-3.0)), 1.5, None).unwrap(), 3.0 * n);
        let neg = vec![-1.0; 64];
        assert!(matches!(lp_norm(&f, 2.0, Some(&neg)), Err(Error::NegativeWeight { .. })));
        assert_eq!(lp_norm(&f, f64::INFINITY, None).unwrap(), 1.0);
    }

    #[test]
    fn dilated_kernel_preserves_integral() {
        let dil = ExpansiveDilation::scalar(2.0).unwrap();
        let gauge = EllipsoidGauge::build(&dil).unwrap();
        let spec = GridSpec::cube(1, 32.0, 1024).unwrap();
        let base = Kernel::Spatial(Arc::new(|x: &[f64]| c((-x[0] * x[0] / 2.0).exp())));
        let i0 = dilated_kernel_unchecked(&base, &dil, 0, &spec).integral();
        for k in -2..=2 {
            let phi = synthesize_dilated_kernel(&base, &gauge, k, &spec).unwrap();
            assert!((phi.integral() - i0).norm() < 1e-10, "k={k}");
        }
        assert!(matches!(
            synthesize_dilated_kernel(&base, &gauge, 9, &spec),
            Err(Error::UnresolvableScale { .. })
        ));
    }

    #[test]
    fn spectral_dilation_shrinks_support() {
        let dil = ExpansiveDilation::scalar(2.0).unwrap();
        let spec = GridSpec::cube(1, 8.0, 128).unwrap();
        let bump = |xi: &[f64]| c(if xi[0].abs() < 2.0 { 1.0 } else { 0.0 });
        let s1 = dilated_spectrum(&bump, &dil, 1, &spec);
        for (flat, v) in s1.coefficients().iter().enumerate() {
            let xi = s1.frequency(flat)[0];
            assert_eq!(v.re != 0.0, xi.abs() < 1.0);
        }
    }

    #[test]
    fn file_round_trip() {
        let spec = GridSpec::new(vec![1, 1], vec![1.0, 2.0], vec![16, 32]).unwrap();
        let f = Field::from_fn(&spec, |x| Complex64::new(x[0], -x[1]));
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(read_field(&buf[..]).unwrap(), f);
    }
}
