use crate::element::GaussPoint;
use crate::mesh::{cook_mesh, punch_mesh, Mesh};
use crate::{FemError, Result};
use nalgebra::{DMatrix, DVector, SMatrix};
use plastokit::return_map::{Constitutive, Control, Integrator, MaterialState, StepResult};
use plastokit::tensor::SymTensor3;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Punch,
    Cook,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FemConfig {
    pub benchmark: Benchmark,
    pub u0: f64,
    pub n_increments: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Elements per direction; Cook uses the first two.
    pub divisions: [usize; 3],
}

impl Default for FemConfig {
    fn default() -> Self {
        FemConfig::punch()
    }
}

impl FemConfig {
    pub fn punch() -> Self {
        FemConfig {
            benchmark: Benchmark::Punch,
            u0: 0.015,
            n_increments: 10,
            max_iterations: 12,
            tolerance: 1e-6,
            divisions: [4, 4, 4],
        }
    }

    pub fn cook() -> Self {
        FemConfig { benchmark: Benchmark::Cook, u0: 0.3, divisions: [8, 8, 1], ..FemConfig::punch() }
    }

    pub fn mesh(&self) -> Mesh {
        match self.benchmark {
            Benchmark::Punch => punch_mesh(self.divisions[0], self.u0),
            Benchmark::Cook => cook_mesh(self.divisions[0], self.divisions[1], self.u0),
        }
    }

    /// Mesh point whose strain/stress history is recorded.
    pub fn probe(&self) -> [f64; 3] {
        match self.benchmark {
            Benchmark::Punch => [1.0, 1.0, 0.0],
            Benchmark::Cook => [48.0, 52.0, 0.5],
        }
    }
}

/// Relative residual norms `‖R‖/‖R₀‖` per increment. `R₀` is the
/// out-of-balance force of the load step, so each list starts at 1 and
/// gains one entry per linear solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceLog(pub Vec<Vec<f64>>);

impl ConvergenceLog {
    /// Newton corrections taken in each increment.
    pub fn iterations(&self) -> Vec<usize> {
        self.0.iter().map(|r| r.len() - 1).collect()
    }
}

#[derive(Clone, Debug)]
pub struct FemResult {
    pub mesh: Mesh,
    pub displacement: Vec<f64>,
    pub log: ConvergenceLog,
    /// `(‖ε‖, ‖σ‖)` at the Gauss point nearest the probe, from increment 0.
    pub probe: Vec<[f64; 2]>,
    /// Volume averages of `‖ε‖` and `‖σ‖` over all Gauss points.
    pub average: Vec<[f64; 2]>,
    /// Smallest dissipation of a single Gauss point in a single increment.
    pub min_dissipation: f64,
    /// Volume-integrated dissipation accumulated over the run.
    pub total_dissipation: f64,
}

/// Committed material state of every Gauss point.
#[derive(Clone, Debug)]
pub struct GaussStore(pub Vec<[MaterialState; 8]>);

impl GaussStore {
    pub fn virgin<M: Constitutive>(m: &M, n_elements: usize) -> Self {
        GaussStore(vec![std::array::from_fn(|_| MaterialState::virgin(m)); n_elements])
    }
}

pub struct Assembly {
    pub f_int: DVector<f64>,
    pub k: DMatrix<f64>,
    /// Trial step results, committed if the increment converges.
    pub trial: Vec<[StepResult; 8]>,
}

fn dofs(conn: &[usize; 8]) -> [usize; 24] {
    std::array::from_fn(|i| 3 * conn[i / 3] + i % 3)
}

/// Internal force and consistent stiffness at displacement `u`, integrating
/// every Gauss point from its committed state.
pub fn assemble<M: Constitutive>(
    mesh: &Mesh,
    gps: &[[GaussPoint; 8]],
    store: &GaussStore,
    u: &DVector<f64>,
    integ: &Integrator<M>,
) -> Result<Assembly> {
    let n = mesh.n_dofs();
    let mut f_int = DVector::zeros(n);
    let mut k = DMatrix::zeros(n, n);
    let mut trial = Vec::with_capacity(mesh.elements.len());
    for (e, conn) in mesh.elements.iter().enumerate() {
        let idx = dofs(conn);
        let ue = SMatrix::<f64, 24, 1>::from_fn(|i, _| u[idx[i]]);
        let mut fe = SMatrix::<f64, 24, 1>::zeros();
        let mut ke = SMatrix::<f64, 24, 24>::zeros();
        let mut res = Vec::with_capacity(8);
        for (g, gp) in gps[e].iter().enumerate() {
            let prev = &store.0[e][g];
            let eps = SymTensor3::from_engineering((gp.b * ue).as_slice());
            let de = eps - prev.strain();
            let fail = |source| FemError::Material { elem: e, gp: g, source };
            let r = integ.step(prev, &Control::Strain(de)).map_err(fail)?;
            let c = integ.consistent_tangent(prev, &r, &de).map_err(fail)?;
            let sig = SMatrix::<f64, 6, 1>::from_row_slice(&r.sigma.c);
            fe += gp.b.transpose() * sig * gp.dv;
            ke += gp.b.transpose() * c * gp.b * gp.dv;
            res.push(r);
        }
        for a in 0..24 {
            f_int[idx[a]] += fe[a];
            for b in 0..24 {
                k[(idx[a], idx[b])] += ke[(a, b)];
            }
        }
        trial.push(res.try_into().ok().expect("eight Gauss points"));
    }
    Ok(Assembly { f_int, k, trial })
}

/// Largest nodal displacement difference relative to the largest entry of
/// `reference`.
pub fn relative_linf(u: &[f64], reference: &[f64]) -> f64 {
    let d = u.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let s = reference.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Displacement-controlled incremental Newton solve of a benchmark.
pub fn run_benchmark<M: Constitutive>(cfg: &FemConfig, model: &M) -> Result<FemResult> {
    run_mesh(cfg.mesh(), cfg, cfg.probe(), model)
}

/// Run an arbitrary mesh with the solver settings of `cfg`.
pub fn run_mesh<M: Constitutive>(mesh: Mesh, cfg: &FemConfig, probe: [f64; 3], model: &M) -> Result<FemResult> {
    let gps = mesh.gauss_points()?;
    let integ = Integrator::new(model);
    let n = mesh.n_dofs();
    let free: Vec<usize> = (0..n).filter(|d| !mesh.dirichlet.contains_key(d)).collect();
    let volume: f64 = gps.iter().flatten().map(|g| g.dv).sum();
    let probe_gp = gps
        .iter()
        .enumerate()
        .flat_map(|(e, g)| g.iter().enumerate().map(move |(i, gp)| ((e, i), gp.x)))
        .min_by(|a, b| dist2(&a.1, &probe).total_cmp(&dist2(&b.1, &probe)))
        .map(|p| p.0)
        .ok_or_else(|| FemError::InvalidMesh("mesh without elements".into()))?;
    // residuals below this are roundoff for any load level of interest
    let force_floor = 1e-12 * model.sigma_y() * volume.powf(2.0 / 3.0);

    let mut store = GaussStore::virgin(model, mesh.elements.len());
    let mut u = DVector::<f64>::zeros(n);
    let mut log = ConvergenceLog::default();
    let mut probe_hist = vec![[0.0, 0.0]];
    let mut average = vec![[0.0, 0.0]];
    let (mut min_diss, mut total_diss) = (f64::INFINITY, 0.0);

    let prescribed: Vec<usize> = mesh.dirichlet.keys().copied().collect();
    let mut k_prev = assemble(&mesh, &gps, &store, &u, &integ)?.k;
    for inc in 1..=cfg.n_increments {
        let lambda = inc as f64 / cfg.n_increments as f64;
        // linearized predictor with the last converged tangent
        let dup = DVector::from_iterator(prescribed.len(), prescribed.iter().map(|d| lambda * mesh.dirichlet[d] - u[*d]));
        let kfp = DMatrix::from_fn(free.len(), prescribed.len(), |i, j| k_prev[(free[i], prescribed[j])]);
        let load = -(kfp * &dup);
        let r0 = load.norm();
        let mut hist = vec![1.0];
        if r0 > force_floor {
            let kff = DMatrix::from_fn(free.len(), free.len(), |i, j| k_prev[(free[i], free[j])]);
            let du = kff.lu().solve(&load).ok_or(FemError::SingularStiffness(inc))?;
            for (i, &d) in free.iter().enumerate() {
                u[d] += du[i];
            }
        }
        for (i, &d) in prescribed.iter().enumerate() {
            u[d] += dup[i];
        }
        let asm = loop {
            let asm = assemble(&mesh, &gps, &store, &u, &integ)?;
            let rf = DVector::from_iterator(free.len(), free.iter().map(|&d| asm.f_int[d]));
            let norm = rf.norm();
            let rel = if r0 > force_floor { norm / r0 } else { 0.0 };
            hist.push(rel);
            if rel <= cfg.tolerance || norm <= force_floor {
                break asm;
            }
            if hist.len() > cfg.max_iterations {
                log.0.push(hist);
                return Err(FemError::GlobalNoConvergence { increment: inc, relres: rel });
            }
            let kff = DMatrix::from_fn(free.len(), free.len(), |i, j| asm.k[(free[i], free[j])]);
            let du = kff.lu().solve(&(-rf)).ok_or(FemError::SingularStiffness(inc))?;
            for (i, &d) in free.iter().enumerate() {
                u[d] += du[i];
            }
        };
        log.0.push(hist);

        let mut avg = [0.0, 0.0];
        for (e, res) in asm.trial.into_iter().enumerate() {
            for (g, r) in res.into_iter().enumerate() {
                let prev = &store.0[e][g];
                let d_eps_p = r.state.eps_p - prev.eps_p;
                let diss = model.dissipation(&prev.internal, &r.state.internal, &r.sigma, &d_eps_p);
                let dv = gps[e][g].dv;
                min_diss = min_diss.min(diss);
                total_diss += diss * dv;
                let pair = [r.state.strain().frobenius_sq().sqrt(), r.sigma.frobenius_sq().sqrt()];
                avg[0] += pair[0] * dv / volume;
                avg[1] += pair[1] * dv / volume;
                if (e, g) == probe_gp {
                    probe_hist.push(pair);
                }
                store.0[e][g] = r.state;
            }
        }
        average.push(avg);
        k_prev = asm.k;
    }
    Ok(FemResult {
        mesh,
        displacement: u.as_slice().to_vec(),
        log,
        probe: probe_hist,
        average,
        min_dissipation: if min_diss.is_finite() { min_diss } else { 0.0 },
        total_dissipation: total_diss,
    })
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

impl FemResult {
    /// Averaged strain-norm versus stress-norm curve.
    pub fn cook_summary(&self) -> &[[f64; 2]] {
        &self.average
    }
}
