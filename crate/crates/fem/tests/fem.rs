use nalgebra::DVector;
use plastokit::constitutive::{ElasticLaw, ElasticParams};
use plastokit::reference::{SingleNlk, SingleNlkParams};
use plastokit::return_map::{Integrator, SurrogateModel};
use plastokit_fem::*;

fn elastic_model() -> SingleNlk {
    SingleNlk { p: SingleNlkParams { sigma_y: 1e9, ..SingleNlkParams::table() } }
}

fn table() -> SingleNlk {
    SingleNlk { p: SingleNlkParams::table() }
}

fn internal_force(mesh: &Mesh, u: &[f64]) -> DVector<f64> {
    let m = elastic_model();
    let gps = mesh.gauss_points().unwrap();
    let store = GaussStore::virgin(&m, mesh.elements.len());
    assemble(mesh, &gps, &store, &DVector::from_column_slice(u), &Integrator::new(&m)).unwrap().f_int
}

#[test]
fn zero_and_rigid_motion_give_no_force() {
    let mesh = punch_mesh(2, 0.0);
    let n = mesh.n_dofs();
    assert_eq!(internal_force(&mesh, &vec![0.0; n]).amax(), 0.0);
    let t: Vec<f64> = (0..n).map(|d| [0.3, -0.2, 0.7][d % 3]).collect();
    assert!(internal_force(&mesh, &t).amax() < 1e-8);
}

/// Distorted 2×2×2 cube whose boundary follows an affine field; the free
/// interior node must land on it and the stress must be uniform.
#[test]
fn patch_test() {
    let mut mesh = Mesh::structured([2, 2, 2], |x, y, z| [x, y, z]);
    mesh.nodes[13] = [0.55, 0.43, 0.52];
    let a = [[1e-4, 2e-5, -3e-5], [4e-5, -2e-4, 1e-5], [0.0, 3e-5, 5e-5]];
    let disp = |p: &[f64; 3]| -> [f64; 3] { std::array::from_fn(|i| (0..3).map(|j| a[i][j] * p[j]).sum()) };
    for i in 0..mesh.nodes.len() {
        if i != 13 {
            let u = disp(&mesh.nodes[i]);
            for d in 0..3 {
                mesh.dirichlet.insert(3 * i + d, u[d]);
            }
        }
    }
    let cfg = FemConfig { n_increments: 1, ..FemConfig::punch() };
    let res = run_mesh(mesh, &cfg, [0.5; 3], &elastic_model()).unwrap();
    let exact = disp(&[0.55, 0.43, 0.52]);
    for d in 0..3 {
        assert!((res.displacement[39 + d] - exact[d]).abs() < 1e-12);
    }
    let eps = plastokit::tensor::SymTensor3::new([a[0][0], a[1][1], a[2][2], 0.5 * (a[0][1] + a[1][0]), 0.5 * (a[0][2] + a[2][0]), 0.5 * (a[1][2] + a[2][1])]);
    let sig = plastokit::constitutive::LinearElastic::new(ElasticParams { e: 200e3, nu: 0.3 }).stress(&eps);
    let want = [eps.frobenius_sq().sqrt(), sig.frobenius_sq().sqrt()];
    for (got, w) in res.average[1].iter().zip(want) {
        assert!((got - w).abs() < 1e-8 * w);
    }
    assert!(res.log.iterations()[0] <= 2);
}

#[test]
fn uniaxial_column_matches_hooke() {
    let delta = 1e-4;
    let mut mesh = Mesh::structured([2, 2, 3], |x, y, z| [x, y, 2.0 * z]);
    mesh.fix(|p| p[0] == 0.0, 0, 0.0);
    mesh.fix(|p| p[1] == 0.0, 1, 0.0);
    mesh.fix(|p| p[2] == 0.0, 2, 0.0);
    mesh.fix(|p| p[2] == 2.0, 2, delta);
    let cfg = FemConfig { n_increments: 2, ..FemConfig::punch() };
    let res = run_mesh(mesh.clone(), &cfg, [1.0, 1.0, 2.0], &elastic_model()).unwrap();
    for (i, p) in mesh.nodes.iter().enumerate() {
        let e = delta / 2.0;
        let want = [-0.3 * e * p[0], -0.3 * e * p[1], e * p[2]];
        for d in 0..3 {
            assert!((res.displacement[3 * i + d] - want[d]).abs() < 1e-8 * delta);
        }
    }
    assert!(res.log.iterations().iter().all(|&k| k <= 2));
    // elastic averages grow linearly with load
    let a = &res.average;
    assert!((a[2][1] - 2.0 * a[1][1]).abs() < 1e-9 * a[2][1]);
    assert!((a[1][1] - 200e3 * delta / 2.0 / 2.0).abs() < 1e-8 * a[1][1]);
}

#[test]
fn zero_load_curve_is_zero() {
    let cfg = FemConfig { u0: 0.0, ..FemConfig::cook() };
    let res = run_benchmark(&cfg, &table()).unwrap();
    assert!(res.cook_summary().iter().all(|p| p[0] == 0.0 && p[1] == 0.0));
    assert_eq!(res.log.0.len(), 10);
}

fn check_plastic_run(res: &FemResult, cfg: &FemConfig) {
    assert_eq!(res.log.0.len(), cfg.n_increments);
    for hist in &res.log.0 {
        assert_eq!(hist[0], 1.0);
        assert!(hist.len() - 1 <= cfg.max_iterations);
        assert!(*hist.last().unwrap() <= cfg.tolerance);
    }
    assert!(res.min_dissipation >= -1e-10 * 207.0);
    assert!(res.total_dissipation > 0.0);
}

#[test]
fn punch_with_reference_model() {
    let cfg = FemConfig::punch();
    let res = run_benchmark(&cfg, &table()).unwrap();
    check_plastic_run(&res, &cfg);
    // superlinear decay once plastic flow is established
    let last = res.log.0.last().unwrap();
    let n = last.len();
    assert!(n >= 3);
    assert!(last[n - 1] / last[n - 2] < 0.1 * last[n - 2] / last[n - 3] || last[n - 1] < 1e-10);
    assert_eq!(res.probe.len(), 11);
    let mut buf = Vec::new();
    write_convergence_csv(&mut buf, &res.log).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("increment,iter,relres\n1,0,1.0\n"));
    let mut buf = Vec::new();
    write_field_csv(&mut buf, &res.mesh, &res.displacement).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 126);
}

#[test]
fn cook_with_reference_model() {
    let cfg = FemConfig::cook();
    let res = run_benchmark(&cfg, &table()).unwrap();
    check_plastic_run(&res, &cfg);
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, res.cook_summary()).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 12);
}

#[test]
fn punch_with_fresh_surrogate() {
    let m = SurrogateModel::new(ElasticParams { e: 200e3, nu: 0.3 }, 207.0, 15.0, 0);
    let cfg = FemConfig::punch();
    let res = run_benchmark(&cfg, &m).unwrap();
    check_plastic_run(&res, &cfg);
}

#[test]
fn global_failure_is_reported() {
    let cfg = FemConfig { max_iterations: 1, tolerance: 1e-14, ..FemConfig::punch() };
    assert!(matches!(run_benchmark(&cfg, &table()), Err(FemError::GlobalNoConvergence { increment: 1, .. })));
}
