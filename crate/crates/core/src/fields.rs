//! Gaussian random fields on the periodic grid: the traceless-diagonal
//! radial part, the skew-symmetric angular part, and the assembled random
//! metric.
//!
//! The radial field is
//!
//! ```text
//! b(x) = sum_j pi_n(xi_j) beta_j psi_j(x),     xi_j ~ N(0, I_n) iid,
//! ```
//!
//! with `pi_n` the orthogonal projection onto the trace-zero hyperplane, and
//! the angular field is the same recipe with iid standard Gaussian
//! skew-symmetric coefficients. The metric at a node is
//! `g1 = k e^{2b} k^T` with `k = exp(u)`; its determinant is one by
//! construction, so the volume form of the reference metric is preserved.
//!
//! Draw discipline: one ChaCha8 substream per (field, seed); modes consume
//! the stream in the fixed basis order, so extending the truncation level
//! appends draws without reshuffling earlier modes.

use crate::error::{Error, Result};
use crate::linalg::{Mat, SkewMatrix};
use crate::real::Real;
use crate::seeding::{self, STREAM_ANGULAR, STREAM_RADIAL};
use crate::spectrum::{Branch, DecaySchedule, SpectralBasis};
use crate::symspace::{SpdDetOne, TracelessDiag};
use std::io::{Read, Write};

/// Periodic grid with `m` nodes per axis on `[0, 2 pi)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n: usize,
    pub m: usize,
}

impl GridSpec {
    pub fn new(n: usize, m: usize) -> Self {
        GridSpec { n, m }
    }

    pub fn num_nodes(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    /// Quadrature weight per node, `(2 pi / m)^n`.
    pub fn weight(&self) -> f64 {
        (2.0 * std::f64::consts::PI / self.m as f64).powi(self.n as i32)
    }

    /// Grid spacing `2 pi / m`.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.m as f64
    }

    /// Decode a flat node index into the multi-index (last axis fastest).
    pub fn decode(&self, mut node: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.n];
        for a in (0..self.n).rev() {
            idx[a] = node % self.m;
            node /= self.m;
        }
        idx
    }

    pub fn encode(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0usize, |acc, &i| acc * self.m + i)
    }

    /// Coordinates of a node.
    pub fn coords<T: Real>(&self, node: usize) -> Vec<T> {
        let h = T::lit(self.spacing());
        self.decode(node).iter().map(|&i| h * T::lit(i as f64)).collect()
    }

    /// Exact-quadrature condition for a basis: `m > 2 max |k|_inf`.
    pub fn validate_for(&self, basis: &SpectralBasis) -> Result<()> {
        let min = 2 * basis.max_k_inf() as usize;
        if self.m <= min {
            return Err(Error::GridTooCoarse { m: self.m, min });
        }
        if self.n != basis.dim() {
            return Err(Error::ShapeMismatch(format!(
                "grid dimension {} vs basis dimension {}",
                self.n,
                basis.dim()
            )));
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        format!("grid:n={}:m={}", self.n, self.m)
    }
}

/// Orthogonal projection onto the trace-zero hyperplane.
pub fn project_traceless<T: Real>(v: &[T]) -> TracelessDiag<T> {
    TracelessDiag::project(v)
}

/// `psi_j` evaluated at every grid node, mode-major.
///
/// Values are exact trigonometric evaluations of `cos/sin(2 pi (k.i)/m)`
/// through a single table per residue, so identical angles give identical
/// floats everywhere.
pub struct PsiTable<T> {
    pub j_count: usize,
    pub nodes: usize,
    /// `values[j * nodes + node]`
    pub values: Vec<T>,
}

impl<T: Real> PsiTable<T> {
    pub fn build(basis: &SpectralBasis, grid: &GridSpec) -> Result<Self> {
        grid.validate_for(basis)?;
        let m = grid.m as i64;
        let nodes = grid.num_nodes();
        let mut cos_t = vec![T::zero(); grid.m];
        let mut sin_t = vec![T::zero(); grid.m];
        for r in 0..grid.m {
            let ang = 2.0 * std::f64::consts::PI * r as f64 / grid.m as f64;
            cos_t[r] = T::lit(ang.cos());
            sin_t[r] = T::lit(ang.sin());
        }
        let mut values = vec![T::zero(); basis.len() * nodes];
        // node multi-indices once
        let mut multi = vec![0usize; nodes * grid.n];
        for node in 0..nodes {
            let idx = grid.decode(node);
            multi[node * grid.n..(node + 1) * grid.n].copy_from_slice(&idx);
        }
        for (j, mode) in basis.modes().iter().enumerate() {
            let c = T::lit(mode.norm_const);
            let out = &mut values[j * nodes..(j + 1) * nodes];
            for node in 0..nodes {
                let mi = &multi[node * grid.n..(node + 1) * grid.n];
                let mut dot = 0i64;
                for (ki, &ii) in mode.lattice_vector.iter().zip(mi.iter()) {
                    dot += *ki as i64 * ii as i64;
                }
                let r = dot.rem_euclid(m) as usize;
                out[node] = c * match mode.branch {
                    Branch::Cos => cos_t[r],
                    Branch::Sin => sin_t[r],
                };
            }
        }
        Ok(PsiTable { j_count: basis.len(), nodes, values })
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.nodes..(j + 1) * self.nodes]
    }
}

/// Sampled radial field: the traceless log-scale vector `b` at every node.
#[derive(Debug, Clone)]
pub struct RadialField<T> {
    pub grid: GridSpec,
    /// `b[node * n + i]`
    pub b: Vec<T>,
    pub seed: u64,
    pub basis_id: String,
    pub schedule_id: String,
}

/// Sampled angular field: the skew-symmetric generator `u` at every node,
/// packed as the strict upper triangle.
#[derive(Debug, Clone)]
pub struct AngularField<T> {
    pub grid: GridSpec,
    /// `u[node * d + c]`, `d = n(n-1)/2`
    pub u: Vec<T>,
    pub seed: u64,
    pub basis_id: String,
    pub schedule_id: String,
}

/// Assembled random metric on the grid, determinant one at every node.
#[derive(Debug, Clone)]
pub struct MetricField<T> {
    pub grid: GridSpec,
    /// `g[node * n * n ..]`, row-major per node
    pub g: Vec<T>,
    /// radial log-scale vector per node (kept for the distance functionals)
    pub b: Vec<T>,
    /// rotation per node when an angular part was used
    pub k: Option<Vec<T>>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub n: usize,
    pub m: usize,
    pub radial_seed: u64,
    pub angular_seed: Option<u64>,
    pub basis_id: String,
    pub schedule_id: String,
    pub schedule2_id: Option<String>,
}

/// Reusable sampling context: basis + grid + precomputed mode table.
pub struct FieldSampler<'a, T> {
    pub basis: &'a SpectralBasis,
    pub grid: GridSpec,
    pub psi: PsiTable<T>,
}

impl<'a, T: Real> FieldSampler<'a, T> {
    pub fn new(basis: &'a SpectralBasis, grid: GridSpec) -> Result<Self> {
        let psi = PsiTable::build(basis, &grid)?;
        Ok(FieldSampler { basis, grid, psi })
    }

    /// The projected, damped Gaussian coefficients of one radial draw:
    /// `c_j = beta_j * pi_n(xi_j)`, flattened `[j * n + i]`.
    pub fn radial_coefficients(&self, betas: &[T], seed: u64) -> Vec<T> {
        let n = self.grid.n;
        let mut rng = seeding::rng_from(seeding::derive(seed, &[STREAM_RADIAL]));
        let mut coeffs = vec![T::zero(); betas.len() * n];
        let mut xi = vec![T::zero(); n];
        for (j, &beta) in betas.iter().enumerate() {
            for x in xi.iter_mut() {
                *x = T::standard_normal(&mut rng);
            }
            let projected = TracelessDiag::project(&xi);
            for i in 0..n {
                coeffs[j * n + i] = beta * projected.as_slice()[i];
            }
        }
        coeffs
    }

    /// Accumulate `sum_j c_j psi_j` into a component-major buffer
    /// (`out[i * nodes + node]`); contiguous axpy per component keeps the
    /// synthesis loop vectorizable.
    fn accumulate_component_major(&self, coeffs: &[T], out: &mut [T]) {
        let n = self.grid.n;
        let nodes = self.grid.num_nodes();
        debug_assert_eq!(coeffs.len() % n, 0);
        debug_assert_eq!(out.len(), nodes * n);
        for j in 0..coeffs.len() / n {
            let c = &coeffs[j * n..(j + 1) * n];
            let psi = self.psi.row(j);
            for i in 0..n {
                let ci = c[i];
                if ci == T::zero() {
                    continue;
                }
                let dst = &mut out[i * nodes..(i + 1) * nodes];
                for (d, &p) in dst.iter_mut().zip(psi.iter()) {
                    *d += ci * p;
                }
            }
        }
    }

    /// Synthesize the radial field from explicit coefficients (test hook and
    /// the shared path of [`Self::sample_radial`]).
    pub fn radial_from_coefficients(
        &self,
        coeffs: &[T],
        seed: u64,
        schedule_id: &str,
    ) -> RadialField<T> {
        let n = self.grid.n;
        let nodes = self.grid.num_nodes();
        let mut comp = vec![T::zero(); nodes * n];
        self.accumulate_component_major(coeffs, &mut comp);
        let mut b = vec![T::zero(); nodes * n];
        for i in 0..n {
            for node in 0..nodes {
                b[node * n + i] = comp[i * nodes + node];
            }
        }
        RadialField {
            grid: self.grid,
            b,
            seed,
            basis_id: self.basis.id(),
            schedule_id: schedule_id.to_string(),
        }
    }

    pub fn sample_radial(&self, betas: &[T], seed: u64, schedule_id: &str) -> RadialField<T> {
        let coeffs = self.radial_coefficients(betas, seed);
        self.radial_from_coefficients(&coeffs, seed, schedule_id)
    }

    /// Evaluate one radial draw at a single node without synthesizing the
    /// whole field (cheap path for pointwise statistics).
    pub fn radial_at_node(&self, coeffs: &[T], node: usize) -> Vec<T> {
        let n = self.grid.n;
        let mut out = vec![T::zero(); n];
        for j in 0..coeffs.len() / n {
            let p = self.psi.row(j)[node];
            for i in 0..n {
                out[i] += coeffs[j * n + i] * p;
            }
        }
        out
    }

    /// Maximum of `|b_i(x)|` over nodes and components for one draw,
    /// without keeping the field.
    pub fn radial_sup_abs(&self, coeffs: &[T], scratch: &mut Vec<T>) -> T {
        let n = self.grid.n;
        let nodes = self.grid.num_nodes();
        scratch.clear();
        scratch.resize(nodes * n, T::zero());
        self.accumulate_component_major(coeffs, scratch);
        scratch.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn sample_angular(&self, deltas: &[T], seed: u64, schedule_id: &str) -> AngularField<T> {
        let n = self.grid.n;
        let d = n * (n - 1) / 2;
        let nodes = self.grid.num_nodes();
        let mut rng = seeding::rng_from(seeding::derive(seed, &[STREAM_ANGULAR]));
        let mut u = vec![T::zero(); nodes * d];
        let mut eta = vec![T::zero(); d];
        for (j, &delta) in deltas.iter().enumerate() {
            for e in eta.iter_mut() {
                *e = T::standard_normal(&mut rng) * delta;
            }
            if eta.iter().all(|&x| x == T::zero()) {
                continue;
            }
            let psi = self.psi.row(j);
            for node in 0..nodes {
                let p = psi[node];
                let out = &mut u[node * d..(node + 1) * d];
                for c in 0..d {
                    out[c] += eta[c] * p;
                }
            }
        }
        AngularField {
            grid: self.grid,
            u,
            seed,
            basis_id: self.basis.id(),
            schedule_id: schedule_id.to_string(),
        }
    }
}

/// One-shot radial sample (builds the mode table internally; use
/// [`FieldSampler`] for Monte Carlo loops).
pub fn sample_radial<T: Real>(
    basis: &SpectralBasis,
    schedule: &DecaySchedule<T>,
    grid: GridSpec,
    seed: u64,
) -> Result<RadialField<T>> {
    let betas = crate::spectrum::decay_eval(schedule, basis)?;
    let sampler = FieldSampler::new(basis, grid)?;
    Ok(sampler.sample_radial(&betas, seed, &schedule.id()))
}

/// One-shot angular sample.
pub fn sample_angular<T: Real>(
    basis: &SpectralBasis,
    schedule2: &DecaySchedule<T>,
    grid: GridSpec,
    seed: u64,
) -> Result<AngularField<T>> {
    let deltas = crate::spectrum::decay_eval(schedule2, basis)?;
    let sampler = FieldSampler::new(basis, grid)?;
    Ok(sampler.sample_angular(&deltas, seed, &schedule2.id()))
}

/// Assemble the metric `g1 = k e^{2b} k^T` per node (`g1 = e^{2 diag b}`
/// when no angular part is given). Determinant one is re-enforced to 1e-12.
pub fn assemble_metric<T: Real>(
    radial: &RadialField<T>,
    angular: Option<&AngularField<T>>,
) -> Result<MetricField<T>> {
    let n = radial.grid.n;
    let nodes = radial.grid.num_nodes();
    if let Some(a) = angular {
        if a.grid != radial.grid {
            return Err(Error::ShapeMismatch(format!(
                "radial grid {:?} vs angular grid {:?}",
                radial.grid, a.grid
            )));
        }
    }
    let d = n * (n - 1) / 2;
    let two = T::lit(2.0);
    let mut g = vec![T::zero(); nodes * n * n];
    let mut ks = angular.map(|_| vec![T::zero(); nodes * n * n]);
    for node in 0..nodes {
        let b = &radial.b[node * n..(node + 1) * n];
        let out = &mut g[node * n * n..(node + 1) * n * n];
        match angular {
            None => {
                for i in 0..n {
                    out[i * n + i] = (two * b[i]).exp();
                }
            }
            Some(a) => {
                let u = SkewMatrix::from_upper(n, a.u[node * d..(node + 1) * d].to_vec());
                let k = crate::linalg::expm_skew(&u);
                // k * diag(e^{2b}) * k^T, symmetrized
                let mut m = Mat::zeros(n);
                for i in 0..n {
                    for jj in 0..n {
                        let mut s = T::zero();
                        for l in 0..n {
                            s += k[(i, l)] * (two * b[l]).exp() * k[(jj, l)];
                        }
                        m[(i, jj)] = s;
                    }
                }
                for i in 0..n {
                    out[i * n + i] = m[(i, i)];
                    for jj in i + 1..n {
                        let v = (m[(i, jj)] + m[(jj, i)]) * T::lit(0.5);
                        out[i * n + jj] = v;
                        out[jj * n + i] = v;
                    }
                }
                let kbuf = ks.as_mut().unwrap();
                for i in 0..n {
                    for jj in 0..n {
                        kbuf[node * n * n + i * n + jj] = k[(i, jj)];
                    }
                }
            }
        }
        // determinant renormalization
        let mat = Mat::from_fn(n, |i, j| out[i * n + j]);
        let det = mat.det();
        if det <= T::zero() {
            return Err(Error::NotPositiveDefinite);
        }
        if (det - T::one()).abs() > T::lit(1e-12) {
            let f = det.powf(-T::one() / T::lit(n as f64));
            for v in out.iter_mut() {
                *v *= f;
            }
        }
    }
    Ok(MetricField {
        grid: radial.grid,
        g,
        b: radial.b.clone(),
        k: ks,
        provenance: Provenance {
            n,
            m: radial.grid.m,
            radial_seed: radial.seed,
            angular_seed: angular.map(|a| a.seed),
            basis_id: radial.basis_id.clone(),
            schedule_id: radial.schedule_id.clone(),
            schedule2_id: angular.map(|a| a.schedule_id.clone()),
        },
    })
}

impl<T: Real> MetricField<T> {
    pub fn node_matrix(&self, node: usize) -> Mat<T> {
        let n = self.grid.n;
        Mat::from_fn(n, |i, j| self.g[node * n * n + i * n + j])
    }

    pub fn node_spd(&self, node: usize) -> Result<SpdDetOne<T>> {
        SpdDetOne::try_new(self.node_matrix(node))
    }
}

/// Covariance of the radial field between two points:
/// `Cov(b(x), b(y)) = (I - 11^T/n) * sum_j beta_j^2 psi_j(x) psi_j(y)`.
pub fn covariance_radial<T: Real>(
    basis: &SpectralBasis,
    schedule: &DecaySchedule<T>,
    x: &[T],
    y: &[T],
) -> Result<Mat<T>> {
    let n = basis.dim();
    let r = scalar_covariance(schedule, basis, x, y)?;
    let inv_n = T::one() / T::lit(n as f64);
    Ok(Mat::from_fn(n, |i, j| {
        let proj = if i == j { T::one() - inv_n } else { -inv_n };
        proj * r
    }))
}

/// The scalar covariance kernel `sum_j beta_j^2 psi_j(x) psi_j(y)` over the
/// truncated basis (spectral zeta / heat kernel partial sum, constant term
/// excluded).
pub fn scalar_covariance<T: Real>(
    schedule: &DecaySchedule<T>,
    basis: &SpectralBasis,
    x: &[T],
    y: &[T],
) -> Result<T> {
    schedule.validate()?;
    let mut s = T::zero();
    for mode in basis.modes() {
        let beta = schedule.beta(mode.lambda);
        s += beta * beta * basis.eval(mode, x) * basis.eval(mode, y);
    }
    Ok(s)
}

/// Supremum over grid nodes of the pointwise variance of one unprojected
/// scalar component field. Constant over the torus when eigenspaces are
/// complete, but scanned anyway.
pub fn sigma_sup<T: Real>(
    schedule: &DecaySchedule<T>,
    basis: &SpectralBasis,
    grid: &GridSpec,
) -> Result<T> {
    grid.validate_for(basis)?;
    let betas = crate::spectrum::decay_eval(schedule, basis)?;
    let psi = PsiTable::<T>::build(basis, grid)?;
    let nodes = grid.num_nodes();
    let mut best = T::zero();
    for node in 0..nodes {
        let mut s = T::zero();
        for (j, &beta) in betas.iter().enumerate() {
            let v = psi.row(j)[node];
            s += beta * beta * v * v;
        }
        best = best.max(s);
    }
    Ok(best)
}

const DUMP_MAGIC: &[u8; 4] = b"METV";
const DUMP_VERSION: u32 = 1;

fn write_schedule_desc(out: &mut impl Write, id: &str) -> std::io::Result<()> {
    let bytes = id.as_bytes();
    out.write_all(&(bytes.len() as u32).to_le_bytes())?;
    out.write_all(bytes)
}

fn read_schedule_desc(inp: &mut impl Read) -> std::io::Result<String> {
    let mut len4 = [0u8; 4];
    inp.read_exact(&mut len4)?;
    let mut buf = vec![0u8; u32::from_le_bytes(len4) as usize];
    inp.read_exact(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

/// Binary dump of a metric field. Layout (all integers and floats
/// little-endian): magic `METV`, format version u32, n u32, m u32, radial
/// seed u64, schedule descriptor (u32 length + utf8), angular flag u8
/// (+ angular seed u64 + descriptor when set), then `m^n * n` f64 of the
/// b-field, the rotation block if present (`m^n * n * n` f64) and
/// `m^n * n * n` f64 of the assembled metric.
pub fn write_metric_field<T: Real>(field: &MetricField<T>, out: &mut impl Write) -> Result<()> {
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    out.write_all(&(field.grid.n as u32).to_le_bytes())?;
    out.write_all(&(field.grid.m as u32).to_le_bytes())?;
    out.write_all(&field.provenance.radial_seed.to_le_bytes())?;
    write_schedule_desc(out, &field.provenance.schedule_id)?;
    match (&field.k, field.provenance.angular_seed) {
        (Some(_), Some(aseed)) => {
            out.write_all(&[1u8])?;
            out.write_all(&aseed.to_le_bytes())?;
            write_schedule_desc(out, field.provenance.schedule2_id.as_deref().unwrap_or(""))?;
        }
        _ => out.write_all(&[0u8])?,
    }
    for &v in &field.b {
        out.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    if let Some(k) = &field.k {
        for &v in k {
            out.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
    }
    for &v in &field.g {
        out.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_metric_field(inp: &mut impl Read) -> Result<MetricField<f64>> {
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::ShapeMismatch("bad magic in metric dump".into()));
    }
    let mut b4 = [0u8; 4];
    inp.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != DUMP_VERSION {
        return Err(Error::ShapeMismatch("unsupported metric dump version".into()));
    }
    inp.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    inp.read_exact(&mut b4)?;
    let m = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    inp.read_exact(&mut b8)?;
    let radial_seed = u64::from_le_bytes(b8);
    let schedule_id = read_schedule_desc(inp)?;
    let mut flag = [0u8; 1];
    inp.read_exact(&mut flag)?;
    let (angular_seed, schedule2_id) = if flag[0] == 1 {
        inp.read_exact(&mut b8)?;
        let s = u64::from_le_bytes(b8);
        let id = read_schedule_desc(inp)?;
        (Some(s), Some(id))
    } else {
        (None, None)
    };
    let grid = GridSpec::new(n, m);
    let nodes = grid.num_nodes();
    fn read_f64s(count: usize, inp: &mut impl Read) -> Result<Vec<f64>> {
        let mut out = vec![0f64; count];
        let mut buf = [0u8; 8];
        for v in out.iter_mut() {
            inp.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        Ok(out)
    }
    let b = read_f64s(nodes * n, inp)?;
    let k = if flag[0] == 1 { Some(read_f64s(nodes * n * n, inp)?) } else { None };
    let g = read_f64s(nodes * n * n, inp)?;
    Ok(MetricField {
        grid,
        g,
        b,
        k,
        provenance: Provenance {
            n,
            m,
            radial_seed,
            angular_seed,
            basis_id: String::new(),
            schedule_id,
            schedule2_id,
        },
    })
}
