use crate::mesh::Mesh;
use crate::solver::ConvergenceLog;
use std::io::Write;

/// `increment,strain_norm,stress_norm`, starting from the unloaded state.
pub fn write_curve_csv<W: Write>(mut w: W, curve: &[[f64; 2]]) -> std::io::Result<()> {
    writeln!(w, "increment,strain_norm,stress_norm")?;
    for (i, p) in curve.iter().enumerate() {
        writeln!(w, "{i},{:?},{:?}", p[0], p[1])?;
    }
    Ok(())
}

/// `increment,iter,relres`, increments counted from 1.
pub fn write_convergence_csv<W: Write>(mut w: W, log: &ConvergenceLog) -> std::io::Result<()> {
    writeln!(w, "increment,iter,relres")?;
    for (i, hist) in log.0.iter().enumerate() {
        for (k, r) in hist.iter().enumerate() {
            writeln!(w, "{},{k},{r:?}", i + 1)?;
        }
    }
    Ok(())
}

/// `node,x,y,z,ux,uy,uz`.
pub fn write_field_csv<W: Write>(mut w: W, mesh: &Mesh, u: &[f64]) -> std::io::Result<()> {
    writeln!(w, "node,x,y,z,ux,uy,uz")?;
    for (i, x) in mesh.nodes.iter().enumerate() {
        writeln!(w, "{i},{:?},{:?},{:?},{:?},{:?},{:?}", x[0], x[1], x[2], u[3 * i], u[3 * i + 1], u[3 * i + 2])?;
    }
    Ok(())
}
