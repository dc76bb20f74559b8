use nalgebra::{Matrix3, SMatrix};

/// Reference-cube corners in element node order.
pub const CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// 2×2×2 Gauss points (unit weights).
pub const GAUSS: [[f64; 3]; 8] = {
    const G: f64 = 0.577_350_269_189_625_8;
    let mut out = [[0.0; 3]; 8];
    let mut i = 0;
    while i < 8 {
        out[i] = [CORNERS[i][0] * G, CORNERS[i][1] * G, CORNERS[i][2] * G];
        i += 1;
    }
    out
};

/// Trilinear shape functions and their natural derivatives at `xi`.
pub fn shape(xi: [f64; 3]) -> ([f64; 8], [[f64; 3]; 8]) {
    let mut n = [0.0; 8];
    let mut dn = [[0.0; 3]; 8];
    for (a, c) in CORNERS.iter().enumerate() {
        let f = [1.0 + c[0] * xi[0], 1.0 + c[1] * xi[1], 1.0 + c[2] * xi[2]];
        n[a] = f[0] * f[1] * f[2] / 8.0;
        dn[a] = [c[0] * f[1] * f[2] / 8.0, f[0] * c[1] * f[2] / 8.0, f[0] * f[1] * c[2] / 8.0];
    }
    (n, dn)
}

/// Strain-displacement matrix, `ε = B u_e` with engineering shears in the
/// order (11, 22, 33, 12, 13, 23).
pub type BMatrix = SMatrix<f64, 6, 24>;

#[derive(Clone, Debug)]
pub struct GaussPoint {
    pub b: BMatrix,
    /// Jacobian determinant times quadrature weight.
    pub dv: f64,
    pub x: [f64; 3],
}

impl GaussPoint {
    /// `None` if the mapping is not orientation preserving.
    pub fn new(coords: &[[f64; 3]; 8], xi: [f64; 3]) -> Option<Self> {
        let (n, dn) = shape(xi);
        let mut j = Matrix3::zeros();
        let mut x = [0.0; 3];
        for a in 0..8 {
            for r in 0..3 {
                x[r] += n[a] * coords[a][r];
                for c in 0..3 {
                    j[(r, c)] += dn[a][r] * coords[a][c];
                }
            }
        }
        let det = j.determinant();
        if !(det > 0.0) {
            return None;
        }
        let jinv = j.try_inverse()?;
        let mut b = BMatrix::zeros();
        for a in 0..8 {
            let g: [f64; 3] = std::array::from_fn(|i| (0..3).map(|k| jinv[(i, k)] * dn[a][k]).sum());
            let (u, v, w) = (3 * a, 3 * a + 1, 3 * a + 2);
            b[(0, u)] = g[0];
            b[(1, v)] = g[1];
            b[(2, w)] = g[2];
            b[(3, u)] = g[1];
            b[(3, v)] = g[0];
            b[(4, u)] = g[2];
            b[(4, w)] = g[0];
            b[(5, v)] = g[2];
            b[(5, w)] = g[1];
        }
        Some(GaussPoint { b, dv: det, x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        for xi in GAUSS.iter().chain(&[[0.3, -0.7, 0.1]]) {
            let (n, dn) = shape(*xi);
            assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for k in 0..3 {
                assert!(dn.iter().map(|d| d[k]).sum::<f64>().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn inverted_element_rejected() {
        let mut c = CORNERS;
        c.swap(0, 1);
        c.swap(3, 2);
        c.swap(4, 5);
        c.swap(7, 6);
        assert!(GaussPoint::new(&c, [0.0; 3]).is_none());
    }
}
