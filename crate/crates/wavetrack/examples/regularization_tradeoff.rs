//! How the regularization weight interacts with the discretization.
//!
//! The fourth built-in target is smooth inside the domain but incompatible
//! with the initial conditions. With the standard weight rho = h^2 the
//! regularization error dominates and the observed rate stalls near 3/2.
//! Choosing rho = h^3 rebalances the two error sources and restores
//! second-order convergence — at the price of a worse-conditioned system.
//! This example runs both choices side by side.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example regularization_tradeoff
//! ```

use wavetrack::mesh::{make_initial_mesh, mesh_size, MeshHierarchy};
use wavetrack::optcontrol::{
    build_system, default_quadrature, regularization_scale, solve, Regularization, SolverPath,
};
use wavetrack::postproc::{compute_eoc, element_errors, fit_eoc, ConvergenceRecord};
use wavetrack::targets::{TargetFunction, TargetKind};

fn main() -> wavetrack::Result<()> {
    let target = TargetFunction::new(TargetKind::U4Sine);
    let quad = default_quadrature();
    let mut hierarchy = MeshHierarchy::new(make_initial_mesh(4));
    let mut studies = [(2, Vec::new()), (3, Vec::new())];

    for level in 0..=5usize {
        if level > 0 {
            hierarchy.refine_uniformly();
        }
        let mesh = hierarchy.mesh(level);
        let h = regularization_scale(mesh);
        for (power, records) in &mut studies {
            let sys = build_system(
                &hierarchy,
                level,
                &target,
                Regularization::Energy,
                Some(h.powi(*power)),
            )?;
            let sol = solve(&sys, SolverPath::BlockLu)?;
            let errors = element_errors(
                mesh,
                sys.dofmap_x(),
                &sol.state,
                |x, t| target.eval(x, t),
                &quad,
            )?;
            records.push(ConvergenceRecord {
                level,
                dofs: sys.num_state(),
                elements: mesh.num_elements(),
                h: mesh_size(mesh).0,
                rho: sys.rho(),
                error: errors.global(),
                eoc: None,
            });
        }
    }

    println!("incompatible smooth target, energy regularization");
    println!(
        "{:>5} {:>8} | {:>12} {:>14} {:>7} | {:>12} {:>14} {:>7}",
        "level", "dofs", "rho = h^2", "error", "eoc", "rho = h^3", "error", "eoc"
    );
    let (_, base) = &mut studies[0];
    compute_eoc(base);
    let (_, remedy) = &mut studies[1];
    compute_eoc(remedy);
    let fmt = |r: &ConvergenceRecord| {
        let eoc = r.eoc.map_or_else(|| "   -".into(), |e| format!("{e:7.4}"));
        format!("{:>12.4e} {:>14.6e} {:>7}", r.rho, r.error, eoc)
    };
    for (b, r) in studies[0].1.iter().zip(&studies[1].1) {
        println!("{:>5} {:>8} | {} | {}", b.level, b.dofs, fmt(b), fmt(r));
    }

    let base_rate = fit_eoc(&studies[0].1, 3).unwrap();
    let remedy_rate = fit_eoc(&studies[1].1, 3).unwrap();
    println!(
        "\nfitted rates over the last three levels: {base_rate:.3} with rho = h^2, \
         {remedy_rate:.3} with rho = h^3"
    );
    Ok(())
}
