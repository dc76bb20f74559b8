//! Five-block Newton system `[εᵉ, X, r, R, Δλ]` with the isotropic force
//! kept as an unknown, and its Jacobian written out block by block.
//!
//! Residual rows, strain control, tensor components in Voigt order:
//!   εᵉ − εᵉₙ − Δε + Δλ R n̂
//!   X − Xₙ − Δλ (2/3) C (R n̂ − 2 φ'(X:X) X)
//!   r − rₙ − Δλ J / σ_y
//!   R − Rₙ − Δλ R'(r) J / σ_y
//!   R J − σ_y
//! with J = J(σ − X), n̂ = 1.5 dev(σ − X) / J and σ = ℂ εᵉ.

use nalgebra::{DMatrix, SMatrix, SVector};
use plastokit::constitutive::ElasticParams;
use plastokit::diff::VectorFn;
use plastokit::return_map::SurrogateModel;
use plastokit::scalar::{c, lift, Real};
use plastokit::tensor::{SymTensor3, WEIGHT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const N: usize = 15;

type M6 = SMatrix<f64, 6, 6>;
type V6 = SVector<f64, 6>;

/// Frozen data of one increment.
pub struct FiveBlockSystem<'a> {
    pub model: &'a SurrogateModel,
    pub eps_e_n: [f64; 6],
    pub x_n: [f64; 6],
    pub r_n: f64,
    pub big_r_n: f64,
    pub d_eps: [f64; 6],
}

impl FiveBlockSystem<'_> {
    fn theta(&self) -> Vec<f64> {
        use plastokit::return_map::Constitutive;
        self.model.params()
    }

    fn split<'t, T>(&self, th: &'t [T]) -> (&'t [T], &'t [T]) {
        let ni = self.model.iso.net.n_params();
        let nk = self.model.kin.net.n_params();
        (&th[..ni], &th[ni..ni + nk])
    }

    pub fn residual<T: Real>(&self, u: &[T]) -> Vec<T> {
        let m = self.model;
        let th: Vec<T> = lift(&self.theta());
        let (pr, pk) = self.split(&th);
        let sy = c::<T>(m.yield_params.sigma_y);
        let (lam, mu) = (m.elastic.lame(), m.elastic.shear());
        let eps_e = SymTensor3::from_slice(&u[0..6]);
        let x = SymTensor3::from_slice(&u[6..12]);
        let (r, big_r, dlam) = (u[12], u[13], u[14]);
        let sigma = SymTensor3::identity().scale(c::<T>(lam) * eps_e.trace()) + eps_e.scale(c(2.0 * mu));
        let rel = sigma - x;
        let j = rel.vm_equivalent();
        let nhat = rel.deviator().scale(c::<T>(1.5) / j);
        let dphi = m.kin.deriv_with(pk, x.frobenius_sq());
        // R'(r) by a one-component dual through the same network
        let rr = {
            use plastokit::diff::Dual;
            let p: Vec<Dual<T, 1>> = pr.iter().map(|v| Dual::constant(*v)).collect();
            m.iso.eval_with(&p, Dual::variable(r, 0)).eps[0]
        };
        let cm = c::<T>(m.c);
        let mut g = vec![T::zero(); N];
        for a in 0..6 {
            g[a] = eps_e[a] - c(self.eps_e_n[a]) - c(self.d_eps[a]) + dlam * big_r * nhat[a];
            g[6 + a] = x[a] - c(self.x_n[a]) - dlam * c::<T>(2.0 / 3.0) * cm * (big_r * nhat[a] - c::<T>(2.0) * dphi * x[a]);
        }
        g[12] = r - c(self.r_n) - dlam * j / sy;
        g[13] = big_r - c(self.big_r_n) - dlam * rr * j / sy;
        g[14] = big_r * j - sy;
        g
    }

    /// Hand-assembled `∂G/∂u`.
    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let m = self.model;
        let sy = m.yield_params.sigma_y;
        let (lam, mu) = (m.elastic.lame(), m.elastic.shear());
        let w = V6::from_row_slice(&WEIGHT);
        let ee = V6::from_row_slice(&u[0..6]);
        let x = V6::from_row_slice(&u[6..12]);
        let (r, big_r, dlam) = (u[12], u[13], u[14]);

        // σ = ℂ εᵉ on tensor components
        let mut d = M6::zeros();
        for a in 0..3 {
            for b in 0..3 {
                d[(a, b)] = lam;
            }
        }
        for a in 0..6 {
            d[(a, a)] += 2.0 * mu;
        }
        let sigma = d * ee;
        let rel = sigma - x;
        let tr = (rel[0] + rel[1] + rel[2]) / 3.0;
        let mut s = rel;
        for a in 0..3 {
            s[a] -= tr;
        }
        let j = (1.5 * s.component_mul(&w).dot(&s)).sqrt();
        let nh = s * (1.5 / j);
        let wn = nh.component_mul(&w);
        // ∂n̂/∂σ with the deviatoric projector P
        let mut p = M6::identity();
        for a in 0..3 {
            for b in 0..3 {
                p[(a, b)] -= 1.0 / 3.0;
            }
        }
        let nn = (p * 1.5 - nh * wn.transpose()) / j;

        let y = x.component_mul(&w).dot(&x);
        let ks = m.kin.input_scale;
        let (_, k1, k2) = m.kin.net.forward_derivs(ks * y);
        let (phi1, phi2) = (ks * k1, ks * ks * k2);
        let is = m.iso.input_scale;
        let (n0, _, _) = m.iso.net.forward_derivs(0.0);
        let (nv, n1, n2) = m.iso.net.forward_derivs(is * r);
        let rp = -n0 * is * n1 / (nv * nv);
        let rpp = n0 * is * is * (2.0 * n1 * n1 / (nv * nv * nv) - n2 / (nv * nv));
        let k = 2.0 / 3.0 * m.c;

        let mut jac = DMatrix::zeros(N, N);
        let mut put = |r0: usize, c0: usize, blk: &M6| {
            for a in 0..6 {
                for b in 0..6 {
                    jac[(r0 + a, c0 + b)] = blk[(a, b)];
                }
            }
        };
        put(0, 0, &(M6::identity() + nn * d * (dlam * big_r)));
        put(0, 6, &(-nn * (dlam * big_r)));
        put(6, 0, &(-nn * d * (dlam * k * big_r)));
        let gxx = M6::identity() + (nn * big_r + M6::identity() * (2.0 * phi1) + x * x.component_mul(&w).transpose() * (4.0 * phi2)) * (dlam * k);
        put(6, 6, &gxx);
        let row_e = wn.transpose() * d;
        for a in 0..6 {
            jac[(a, 13)] = dlam * nh[a];
            jac[(a, 14)] = big_r * nh[a];
            jac[(6 + a, 13)] = -dlam * k * nh[a];
            jac[(6 + a, 14)] = -k * (big_r * nh[a] - 2.0 * phi1 * x[a]);
            jac[(12, a)] = -dlam / sy * row_e[a];
            jac[(12, 6 + a)] = dlam / sy * wn[a];
            jac[(13, a)] = -dlam * rp / sy * row_e[a];
            jac[(13, 6 + a)] = dlam * rp / sy * wn[a];
            jac[(14, a)] = big_r * row_e[a];
            jac[(14, 6 + a)] = -big_r * wn[a];
        }
        jac[(12, 12)] = 1.0;
        jac[(12, 14)] = -j / sy;
        jac[(13, 12)] = -dlam * rpp * j / sy;
        jac[(13, 13)] = 1.0;
        jac[(13, 14)] = -rp * j / sy;
        jac[(14, 13)] = j;
        jac
    }

    /// Jacobian of the solver's reduced system, unknowns
    /// `[εᵉ, X/σ_y, r, Δλ]` and rows `[εᵉ, X/σ_y, r, f/σ_y]`, obtained from the
    /// five-block one by eliminating `R = R(r)`.
    pub fn reduced_jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let m = self.model;
        let sy = m.yield_params.sigma_y;
        let full = self.jacobian(u);
        let rp = m.iso.dr_dr(u[12]);
        let rows: Vec<(usize, f64)> = (0..6).map(|a| (a, 1.0)).chain((6..12).map(|a| (a, 1.0 / sy))).chain([(12, 1.0), (14, 1.0 / sy)]).collect();
        let mut out = DMatrix::zeros(14, 14);
        for (i, &(ri, rs)) in rows.iter().enumerate() {
            for b in 0..6 {
                out[(i, b)] = full[(ri, b)] * rs;
                out[(i, 6 + b)] = full[(ri, 6 + b)] * rs * sy;
            }
            out[(i, 12)] = (full[(ri, 12)] + rp * full[(ri, 13)]) * rs;
            out[(i, 13)] = full[(ri, 14)] * rs;
        }
        out
    }
}

impl VectorFn for FiveBlockSystem<'_> {
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        self.residual(x)
    }
}

/// Random surrogate and increment data with a plastic iterate `u`:
/// `(model, εᵉₙ, Xₙ, rₙ, u, Δε)`.
pub fn random_case(seed: u64) -> (SurrogateModel, [f64; 6], [f64; 6], f64, Vec<f64>, [f64; 6]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = SurrogateModel::new(ElasticParams { e: 200e3, nu: 0.3 }, 207.0, rng.gen_range(5.0..5000.0), seed);
    m.kin.input_scale = 1e-4;
    let mut v = |s: f64| -> [f64; 6] { std::array::from_fn(|_| rng.gen_range(-s..s)) };
    let eps_e_n = v(2e-3);
    let x_n = v(30.0);
    let d_eps = v(5e-4);
    let eps_e = v(2e-3);
    let x = v(30.0);
    let r_n = rng.gen_range(0.0..0.02);
    let r = r_n + rng.gen_range(0.0..0.01);
    let mut u: Vec<f64> = eps_e.iter().chain(&x).copied().collect();
    u.extend([r, m.iso.r_of_r(r), rng.gen_range(1e-5..1e-3)]);
    (m, eps_e_n, x_n, r_n, u, d_eps)
}

/// Largest entrywise relative mismatch. Entries that vanish up to roundoff
/// are measured against `1e-10` of their row's largest magnitude.
pub fn max_rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        let row = (0..a.ncols()).fold(0.0f64, |m, j| m.max(a[(i, j)].abs()).max(b[(i, j)].abs()));
        for j in 0..a.ncols() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            let scale = x.abs().max(y.abs()).max(1e-10 * row);
            if scale > 0.0 {
                worst = worst.max((x - y).abs() / scale);
            }
        }
    }
    worst
}
