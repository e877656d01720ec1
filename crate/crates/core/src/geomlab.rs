//! Discretized geometric functionals of a metric sample: diameter through
//! shortest paths on the 3^n-neighbor grid graph, Laplace eigenvalues
//! through a variational finite-difference form, distance averages, and the
//! bi-Lipschitz sandwich checks these feed.
//!
//! Both discretizations are set up so the sandwich inequalities are exact
//! at the discrete level: every metric evaluation point (edge bases, cell
//! corners) is a grid node, hence covered by the node supremum behind
//! `rho_hat`, and the mass form of the eigenproblem does not depend on the
//! metric because the volume form is fixed.

use crate::error::{Error, Result};
use crate::fields::{GridSpec, MetricField};
use crate::linalg::{cholesky, solve_lower, solve_lower_transpose, sym_eigen, Mat, SymMatrix};
use crate::seeding::{self, STREAM_CHOICE};
use rand::Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

/// Node threshold below which the diameter is computed from every source.
pub const EXACT_DIAMETER_NODES: usize = 5_000;
/// Source count for the sampled (lower bound) diameter mode.
pub const SAMPLED_DIAMETER_SOURCES: usize = 64;

/// Per-node metric data on a grid: the matrix and its inverse.
///
/// This is the view the discrete functionals consume. It deliberately does
/// not enforce `det = 1` so that tests can feed scaled or otherwise
/// synthetic metrics; [`MetricField`] conversions inherit the invariant
/// from the sampler.
#[derive(Debug, Clone)]
pub struct MetricGrid {
    pub grid: GridSpec,
    /// `g[node * n * n ..]` row-major per node
    pub g: Vec<f64>,
    /// inverse metric per node, same layout
    pub ginv: Vec<f64>,
}

impl MetricGrid {
    pub fn from_matrices(grid: GridSpec, g: Vec<f64>) -> Result<Self> {
        let n = grid.n;
        let nodes = grid.num_nodes();
        if g.len() != nodes * n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} metric entries, got {}",
                nodes * n * n,
                g.len()
            )));
        }
        let mut ginv = vec![0f64; g.len()];
        for node in 0..nodes {
            let m = Mat::from_fn(n, |i, j| g[node * n * n + i * n + j]);
            let l = cholesky(&m)?;
            for j in 0..n {
                let mut e = vec![0f64; n];
                e[j] = 1.0;
                let y = solve_lower(&l, &e);
                let x = solve_lower_transpose(&l, &y);
                for i in 0..n {
                    ginv[node * n * n + i * n + j] = x[i];
                }
            }
        }
        Ok(MetricGrid { grid, g, ginv })
    }

    pub fn from_field(field: &MetricField<f64>) -> Result<Self> {
        Self::from_matrices(field.grid, field.g.clone())
    }

    /// The reference metric: identity at every node.
    pub fn flat(grid: GridSpec) -> Self {
        let n = grid.n;
        let nodes = grid.num_nodes();
        let mut g = vec![0f64; nodes * n * n];
        for node in 0..nodes {
            for i in 0..n {
                g[node * n * n + i * n + i] = 1.0;
            }
        }
        MetricGrid { grid, ginv: g.clone(), g }
    }
}

/// Canonical neighbor offsets: all of `{-1,0,1}^n \ {0}` with positive
/// first nonzero component. Each undirected edge has exactly one canonical
/// base node and offset.
fn canonical_offsets(n: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut v = vec![-1i32; n];
    'outer: loop {
        if v.iter().any(|&x| x != 0) {
            if let Some(first) = v.iter().find(|&&x| x != 0) {
                if *first > 0 {
                    out.push(v.clone());
                }
            }
        }
        for i in (0..n).rev() {
            if v[i] < 1 {
                v[i] += 1;
                continue 'outer;
            }
            v[i] = -1;
        }
        break;
    }
    out
}

/// Weighted periodic grid graph in CSR form.
///
/// Edge `{x, x+delta}` (delta canonical) gets length
/// `sqrt(v^T g(x) v)` with `v = delta * h`: the metric is evaluated at the
/// canonical base node of the edge, the grid-rounded stand-in for the edge
/// midpoint. Both orientations share one weight, so shortest paths are
/// symmetric, and the evaluation point is a grid node covered by the
/// `rho_hat` supremum scan.
pub struct GridGraph {
    pub nodes: usize,
    pub offsets: Vec<u32>,
    pub targets: Vec<u32>,
    pub weights: Vec<f64>,
}

impl GridGraph {
    pub fn build(mg: &MetricGrid) -> Self {
        let grid = mg.grid;
        let n = grid.n;
        let m = grid.m as i64;
        assert!(grid.m >= 3, "periodic grid graph needs m >= 3");
        let nodes = grid.num_nodes();
        let offs = canonical_offsets(n);
        let h = grid.spacing();
        let deg = 2 * offs.len();
        let mut offsets = vec![0u32; nodes + 1];
        for i in 0..=nodes {
            offsets[i] = (i * deg) as u32;
        }
        let mut targets = vec![0u32; nodes * deg];
        let mut weights = vec![0f64; nodes * deg];
        let mut fill = vec![0u32; nodes];
        let mut idx = vec![0usize; n];
        for node in 0..nodes {
            let dec = grid.decode(node);
            for off in &offs {
                for a in 0..n {
                    idx[a] = ((dec[a] as i64 + off[a] as i64).rem_euclid(m)) as usize;
                }
                let tgt = grid.encode(&idx);
                // v^T g(node) v with v = off * h
                let mut q = 0f64;
                for i in 0..n {
                    for j in 0..n {
                        q += off[i] as f64 * mg.g[node * n * n + i * n + j] * off[j] as f64;
                    }
                }
                let w = (q).sqrt() * h;
                let s0 = (offsets[node] + fill[node]) as usize;
                targets[s0] = tgt as u32;
                weights[s0] = w;
                fill[node] += 1;
                let s1 = (offsets[tgt] + fill[tgt]) as usize;
                targets[s1] = node as u32;
                weights[s1] = w;
                fill[tgt] += 1;
            }
        }
        debug_assert!(fill.iter().all(|&f| f as usize == deg));
        GridGraph { nodes, offsets, targets, weights }
    }

    /// Single-source shortest paths. Non-negative weights let the heap key
    /// be the distance bit pattern, which orders exactly like the float.
    pub fn dijkstra_into(&self, src: usize, dist: &mut Vec<f64>) {
        dist.clear();
        dist.resize(self.nodes, f64::INFINITY);
        dist[src] = 0.0;
        let mut heap: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::with_capacity(self.nodes);
        heap.push(Reverse((0u64, src as u32)));
        while let Some(Reverse((dbits, u))) = heap.pop() {
            let u = u as usize;
            let d = f64::from_bits(dbits);
            if d > dist[u] {
                continue;
            }
            let lo = self.offsets[u] as usize;
            let hi = self.offsets[u + 1] as usize;
            for e in lo..hi {
                let v = self.targets[e] as usize;
                let nd = d + self.weights[e];
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((nd.to_bits(), v as u32)));
                }
            }
        }
    }

    pub fn eccentricity(&self, src: usize) -> f64 {
        let mut dist = Vec::new();
        self.dijkstra_into(src, &mut dist);
        dist.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DiameterReport {
    pub value: f64,
    /// true when every node served as a source; otherwise the value is a
    /// lower bound from the fixed 64-source sample.
    pub exact: bool,
}

/// Graph diameter: exact below [`EXACT_DIAMETER_NODES`] nodes, otherwise a
/// lower bound from a fixed, deterministic, evenly spread source sample.
pub fn discrete_diameter(mg: &MetricGrid) -> DiameterReport {
    let graph = GridGraph::build(mg);
    diameter_of_graph(&graph)
}

pub fn diameter_of_graph(graph: &GridGraph) -> DiameterReport {
    let nodes = graph.nodes;
    let exact = nodes <= EXACT_DIAMETER_NODES;
    let sources: Vec<usize> = if exact {
        (0..nodes).collect()
    } else {
        (0..SAMPLED_DIAMETER_SOURCES).map(|i| i * nodes / SAMPLED_DIAMETER_SOURCES).collect()
    };
    let value = sources
        .par_iter()
        .map_init(Vec::new, |dist, &src| {
            graph.dijkstra_into(src, dist);
            dist.iter().cloned().fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    DiameterReport { value, exact }
}

/// Monte Carlo estimate of `int int dist(x,y)^t dv dv`: the quadrature sum
/// over targets for a deterministic seeded sample of source nodes, scaled
/// by the total volume.
pub fn distance_average(mg: &MetricGrid, t: f64, sources: usize, seed: u64) -> f64 {
    assert!(sources >= 1);
    let graph = GridGraph::build(mg);
    let nodes = graph.nodes;
    let w = mg.grid.weight();
    let vol = nodes as f64 * w;
    let chosen: Vec<usize> = if sources >= nodes {
        (0..nodes).collect()
    } else {
        // partial Fisher-Yates, deterministic in the seed
        let mut rng = seeding::rng_from(seeding::derive(seed, &[STREAM_CHOICE]));
        let mut pool: Vec<usize> = (0..nodes).collect();
        for i in 0..sources {
            let j = rng.gen_range(i..nodes);
            pool.swap(i, j);
        }
        pool.truncate(sources);
        pool
    };
    let total: f64 = chosen
        .par_iter()
        .map_init(Vec::new, |dist, &src| {
            graph.dijkstra_into(src, dist);
            dist.iter().map(|&d| d.powf(t) * w).sum::<f64>()
        })
        .sum();
    total / chosen.len() as f64 * vol
}

// ---------------------------------------------------------------------------
// Variational discrete Laplacian and its smallest eigenvalues
// ---------------------------------------------------------------------------

/// Sparse symmetric stiffness matrix in CSR form. Row sums are exactly
/// zero, so constants span the kernel.
pub struct Stiffness {
    pub nodes: usize,
    pub offsets: Vec<u32>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Stiffness {
    /// Assemble the form `Q(f)/w = sum_cells (Df)^T Ginv_cell (Df)` with
    /// forward differences `Df_i = (f(x+e_i) - f(x))/h` and the inverse
    /// metric averaged over the 2^n corners of each cell. Dividing by the
    /// constant node weight `w` turns the generalized problem with mass
    /// `w I` into a standard one.
    pub fn assemble(mg: &MetricGrid) -> Self {
        let grid = mg.grid;
        let n = grid.n;
        let m = grid.m as i64;
        let nodes = grid.num_nodes();
        let h = grid.spacing();
        let inv_h2 = 1.0 / (h * h);
        let corners = 1usize << n;
        let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(nodes * (n + 1) * (n + 1));
        let mut idx = vec![0usize; n];
        let mut local = vec![0usize; n + 1];
        let mut ginv_cell = vec![0f64; n * n];
        for node in 0..nodes {
            let dec = grid.decode(node);
            // cell corner average of the inverse metric
            ginv_cell.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..corners {
                for a in 0..n {
                    let step = (c >> a) & 1;
                    idx[a] = ((dec[a] as i64 + step as i64).rem_euclid(m)) as usize;
                }
                let corner = grid.encode(&idx);
                for e in 0..n * n {
                    ginv_cell[e] += mg.ginv[corner * n * n + e];
                }
            }
            let scale = inv_h2 / corners as f64;
            // local nodes: 0 = base, i = base + e_i
            local[0] = node;
            for a in 0..n {
                for b in 0..n {
                    idx[b] = dec[b];
                }
                idx[a] = ((dec[a] as i64 + 1).rem_euclid(m)) as usize;
                local[a + 1] = grid.encode(&idx);
            }
            let mut row_sums = vec![0f64; n];
            let mut total = 0f64;
            for i in 0..n {
                for j in 0..n {
                    let v = ginv_cell[i * n + j] * scale;
                    triplets.push((local[i + 1] as u32, local[j + 1] as u32, v));
                    row_sums[i] += v;
                    total += v;
                }
            }
            for i in 0..n {
                triplets.push((local[i + 1] as u32, local[0] as u32, -row_sums[i]));
                triplets.push((local[0] as u32, local[i + 1] as u32, -row_sums[i]));
            }
            triplets.push((local[0] as u32, local[0] as u32, total));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut offsets = vec![0u32; nodes + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                offsets[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nodes {
            offsets[i + 1] += offsets[i];
        }
        Stiffness { nodes, offsets, cols, vals }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nodes);
        for r in 0..self.nodes {
            let lo = self.offsets[r] as usize;
            let hi = self.offsets[r + 1] as usize;
            let mut s = 0.0;
            for e in lo..hi {
                s += self.vals[e] * x[self.cols[e] as usize];
            }
            y[r] = s;
        }
    }
}

/// Exact inverse of the flat stiffness operator through the FFT, used as
/// the LOBPCG preconditioner. For a perturbed metric the preconditioned
/// condition number is bounded by the metric's bi-Lipschitz spread.
pub struct FlatInverse {
    grid: GridSpec,
    fwd: Arc<dyn rustfft::Fft<f64>>,
    inv: Arc<dyn rustfft::Fft<f64>>,
    /// flat symbol per node (zero at the constant mode)
    symbol: Vec<f64>,
}

impl FlatInverse {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.m);
        let inv = planner.plan_fft_inverse(grid.m);
        let h = grid.spacing();
        let nodes = grid.num_nodes();
        let mut symbol = vec![0f64; nodes];
        for node in 0..nodes {
            let dec = grid.decode(node);
            let mut s = 0f64;
            for &q in &dec {
                let ang = 2.0 * std::f64::consts::PI * q as f64 / grid.m as f64;
                s += (2.0 - 2.0 * ang.cos()) / (h * h);
            }
            symbol[node] = s;
        }
        FlatInverse { grid, fwd, inv, symbol }
    }

    fn fft_pass(&self, buf: &mut [Complex64], forward: bool) {
        let n = self.grid.n;
        let m = self.grid.m;
        let mut line = vec![Complex64::default(); m];
        for axis in 0..n {
            let stride = m.pow((n - 1 - axis) as u32);
            let high_count = m.pow(axis as u32);
            for high in 0..high_count {
                for low in 0..stride {
                    let base = high * stride * m + low;
                    for t in 0..m {
                        line[t] = buf[base + t * stride];
                    }
                    if forward {
                        self.fwd.process(&mut line);
                    } else {
                        self.inv.process(&mut line);
                    }
                    for t in 0..m {
                        buf[base + t * stride] = line[t];
                    }
                }
            }
        }
    }

    /// Apply the pseudo-inverse of the flat operator (constants map to 0).
    pub fn apply(&self, r: &[f64], out: &mut [f64]) {
        let nodes = self.grid.num_nodes();
        let mut buf: Vec<Complex64> = r.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft_pass(&mut buf, true);
        for node in 0..nodes {
            if self.symbol[node] > 0.0 {
                buf[node] /= self.symbol[node];
            } else {
                buf[node] = Complex64::default();
            }
        }
        self.fft_pass(&mut buf, false);
        let scale = 1.0 / nodes as f64;
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b.re * scale;
        }
    }
}

fn project_constants(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt with two passes; drops columns that lose more
/// than ~8 digits to the projection (degenerate search directions).
fn orthonormalize(cols: &mut Vec<Vec<f64>>) {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut c in cols.drain(..) {
        let orig = dot(&c, &c).sqrt();
        if orig == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for k in &kept {
                let p = dot(&c, k);
                c.iter_mut().zip(k.iter()).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&c, &c).sqrt();
        if norm > 1e-8 * orig {
            let inv = 1.0 / norm;
            c.iter_mut().for_each(|x| *x *= inv);
            kept.push(c);
        }
    }
    *cols = kept;
}

const LOBPCG_MAX_ITER: usize = 400;
const LOBPCG_TOL: f64 = 1e-9;
const LOBPCG_SEED: u64 = 0x4c4f425043470001;

/// Smallest `k` nonzero eigenvalues of the stiffness operator by LOBPCG
/// with the flat FFT inverse as preconditioner and constants deflated.
/// Block Rayleigh–Ritz over `[X, W, P]` with full re-orthonormalization,
/// so repeated eigenvalues resolve cleanly.
pub fn smallest_eigenvalues(
    stiff: &Stiffness,
    k: usize,
    precond: &FlatInverse,
) -> Result<Vec<f64>> {
    let nodes = stiff.nodes;
    let block = (k + 2).min(nodes - 1);
    let mut rng = seeding::rng_from(LOBPCG_SEED);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            let mut v: Vec<f64> =
                (0..nodes).map(|_| crate::real::Real::standard_normal(&mut rng)).collect();
            project_constants(&mut v);
            v
        })
        .collect();
    orthonormalize(&mut x);
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut theta = vec![0f64; block];
    for iter in 0..LOBPCG_MAX_ITER {
        // residuals of the current Ritz pairs
        let ax: Vec<Vec<f64>> = x
            .iter()
            .map(|c| {
                let mut y = vec![0f64; nodes];
                stiff.matvec(c, &mut y);
                y
            })
            .collect();
        for (j, c) in x.iter().enumerate() {
            theta[j] = dot(c, &ax[j]);
        }
        let mut converged = true;
        let scale = theta.iter().take(k).cloned().fold(1e-300, f64::max);
        let mut w_cols: Vec<Vec<f64>> = Vec::with_capacity(block);
        for j in 0..block {
            let mut r: Vec<f64> =
                ax[j].iter().zip(x[j].iter()).map(|(a, b)| a - theta[j] * b).collect();
            let rnorm = dot(&r, &r).sqrt();
            if j < k && rnorm > LOBPCG_TOL * scale.max(theta[j]) {
                converged = false;
            }
            let mut z = vec![0f64; nodes];
            precond.apply(&r, &mut z);
            project_constants(&mut z);
            r = z;
            w_cols.push(r);
        }
        if converged && iter > 0 {
            let mut out: Vec<f64> = theta[..k].to_vec();
            out.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Ok(out);
        }
        // Rayleigh-Ritz over the span of [X, W, P]
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3 * block);
        basis.extend(x.iter().cloned());
        basis.extend(w_cols);
        basis.extend(p.iter().cloned());
        orthonormalize(&mut basis);
        let dim = basis.len();
        if dim < k {
            return Err(Error::ConvergenceFailure(iter));
        }
        let abasis: Vec<Vec<f64>> = basis
            .iter()
            .map(|c| {
                let mut y = vec![0f64; nodes];
                stiff.matvec(c, &mut y);
                y
            })
            .collect();
        let mut t = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                t.set(i, j, dot(&basis[i], &abasis[j]));
            }
        }
        let (evals, evecs) = sym_eigen(&t); // descending
        let take = block.min(dim);
        let mut new_x: Vec<Vec<f64>> = Vec::with_capacity(take);
        let mut new_p: Vec<Vec<f64>> = Vec::with_capacity(take);
        for r in 0..take {
            let col = dim - 1 - r; // ascending Ritz values
            let mut xv = vec![0f64; nodes];
            let mut pv = vec![0f64; nodes];
            for (bidx, b) in basis.iter().enumerate() {
                let coef = evecs[(bidx, col)];
                if coef == 0.0 {
                    continue;
                }
                for i in 0..nodes {
                    xv[i] += coef * b[i];
                }
                if bidx >= block {
                    // contribution outside the previous X block
                    for i in 0..nodes {
                        pv[i] += coef * b[i];
                    }
                }
            }
            theta[r] = evals[dim - 1 - r];
            new_x.push(xv);
            new_p.push(pv);
        }
        x = new_x;
        orthonormalize(&mut new_p);
        new_p.truncate(block);
        p = new_p;
    }
    Err(Error::ConvergenceFailure(LOBPCG_MAX_ITER))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DiscreteSpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub m: usize,
    pub n: usize,
}

/// The `k` smallest nonzero eigenvalues of the variational discrete
/// Laplacian of a metric sample, ascending.
pub fn discrete_spectrum(mg: &MetricGrid, k: usize) -> Result<DiscreteSpectrumReport> {
    if k == 0 {
        return Err(Error::BadParameter("eigenvalue count k must be >= 1".into()));
    }
    if mg.grid.m < 8 {
        return Err(Error::BadParameter(format!(
            "grid resolution m={} is below the supported minimum 8",
            mg.grid.m
        )));
    }
    let stiff = Stiffness::assemble(mg);
    let pre = FlatInverse::new(mg.grid);
    let eigenvalues = smallest_eigenvalues(&stiff, k, &pre)?;
    Ok(DiscreteSpectrumReport { eigenvalues, m: mg.grid.m, n: mg.grid.n })
}

/// The exact symbol of the flat discrete Laplacian at lattice frequency `q`.
pub fn flat_symbol(grid: &GridSpec, q: &[i32]) -> f64 {
    let h = grid.spacing();
    q.iter()
        .map(|&qi| {
            let ang = 2.0 * std::f64::consts::PI * qi as f64 / grid.m as f64;
            (2.0 - 2.0 * ang.cos()) / (h * h)
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Sandwich checks
// ---------------------------------------------------------------------------

pub const SANDWICH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, serde::Serialize)]
pub struct DiamSandwichReport {
    pub rho_hat: f64,
    pub diam: f64,
    pub flat_diam: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Check `e^{-rho} <= diam(g1)/diam(g0) <= e^{rho}` on the grid.
pub fn sandwich_check_diam(field: &MetricField<f64>, flat_diam: f64) -> Result<DiamSandwichReport> {
    let rho_hat = rho_hat_of_field(field);
    let mg = MetricGrid::from_field(field)?;
    let diam = discrete_diameter(&mg).value;
    let ratio = diam / flat_diam;
    let pass =
        ratio >= (-rho_hat).exp() - SANDWICH_SLACK && ratio <= rho_hat.exp() + SANDWICH_SLACK;
    Ok(DiamSandwichReport { rho_hat, diam, flat_diam, ratio, pass })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EigSandwichReport {
    pub rho_hat: f64,
    pub eigenvalues: Vec<f64>,
    pub ratios: Vec<f64>,
    pub pass: bool,
}

/// Check `e^{-2 rho} <= lambda_j(g1)/lambda_j(g0) <= e^{2 rho}` for
/// `j = 1..k`.
pub fn sandwich_check_eig(
    field: &MetricField<f64>,
    flat_eigs: &[f64],
    k: usize,
) -> Result<EigSandwichReport> {
    let rho_hat = rho_hat_of_field(field);
    let mg = MetricGrid::from_field(field)?;
    let spec = discrete_spectrum(&mg, k)?;
    let lo = (-2.0 * rho_hat).exp() - SANDWICH_SLACK;
    let hi = (2.0 * rho_hat).exp() + SANDWICH_SLACK;
    let ratios: Vec<f64> =
        spec.eigenvalues.iter().zip(flat_eigs.iter()).map(|(a, b)| a / b).collect();
    let pass = ratios.iter().all(|&r| r >= lo && r <= hi);
    Ok(EigSandwichReport { rho_hat, eigenvalues: spec.eigenvalues, ratios, pass })
}

fn rho_hat_of_field(field: &MetricField<f64>) -> f64 {
    2.0 * field.b.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

// ---------------------------------------------------------------------------
// Integrability certificates
// ---------------------------------------------------------------------------

/// Which functional the certificate covers. Both use the growth family
/// `h(e^y) = exp(c y^2)`; the eigenvalue variant shifts the series by
/// `beta = log(lambda_k(g0))/2`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub enum CertKind {
    Diameter,
    Eigenvalue { beta: f64 },
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Certificate {
    pub converges: bool,
    /// Series bound including the geometric tail majorant (when it converges).
    pub tail_bound: Option<f64>,
    /// The geometric majorant used beyond the summed range; below 1e-12.
    pub remainder: Option<f64>,
    /// First term at or beyond 1 when the series is not certified.
    pub divergence_witness: Option<(u64, f64)>,
}

/// Certify the expectation series
/// `2n sum_{k>=N} h(e^k) exp(alpha(k-1)/2 - (k-1)^2/(8 sigma^2))`
/// (shifted to `h(e^{2(k+beta)})` for the eigenvalue functional).
/// It converges exactly when `c < 1/(8 sigma^2)`, strictly.
pub fn integrability_certificate(
    c: f64,
    sigma_sq: f64,
    alpha: f64,
    n: usize,
    kind: CertKind,
    start: u64,
) -> Result<Certificate> {
    if sigma_sq <= 0.0 {
        return Err(Error::BadParameter(format!("sigma_sq={sigma_sq} must be positive")));
    }
    if alpha < 0.0 || c < 0.0 {
        return Err(Error::BadParameter("alpha and c must be non-negative".into()));
    }
    let shift = match kind {
        CertKind::Diameter => 0.0,
        CertKind::Eigenvalue { beta } => beta,
    };
    let inv8s = 1.0 / (8.0 * sigma_sq);
    let log_term = |k: f64| -> f64 {
        let y = k + shift;
        (2.0 * n as f64).ln() + c * y * y + alpha * (k - 1.0) / 2.0 - (k - 1.0) * (k - 1.0) * inv8s
    };
    let converges = c < inv8s;
    if !converges {
        // terms eventually reach 1 since the exponent grows like (c - inv8s) k^2 + ...
        let mut k = start.max(1);
        loop {
            let lt = log_term(k as f64);
            if lt >= 0.0 {
                return Ok(Certificate {
                    converges: false,
                    tail_bound: None,
                    remainder: None,
                    divergence_witness: Some((k, lt.exp())),
                });
            }
            k += 1;
            if k > start + 100_000_000 {
                return Err(Error::ConvergenceFailure(k as usize));
            }
        }
    }
    let mut sum = 0.0f64;
    let mut k = start.max(1);
    loop {
        let lt = log_term(k as f64);
        sum += lt.exp();
        let lt_next = log_term((k + 1) as f64);
        let q = (lt_next - lt).exp();
        if q < 1.0 {
            let majorant = lt_next.exp() / (1.0 - q);
            if majorant < 1e-12 {
                return Ok(Certificate {
                    converges: true,
                    tail_bound: Some(sum + majorant),
                    remainder: Some(majorant),
                    divergence_witness: None,
                });
            }
        }
        k += 1;
        if k > start + 100_000_000 {
            return Err(Error::ConvergenceFailure(k as usize));
        }
    }
}
