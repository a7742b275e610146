//! Uniqueness: continuation runs from independent random initializations
//! must land on the same solution.

use crate::error::Result;
use crate::field::Field;
use crate::field::VectorField;
use crate::gen;
use crate::norms;
use crate::real::Real;
use crate::solver::{cascade_with_init, CascadeSchedule};
use crate::spectral;
use crate::verify::report::CheckReport;

/// Run the continuation twice from independent seeded initial guesses and
/// compare the gradients: `‖∇(u_a - u_b)‖_p / ‖∇u_a‖_p <= rel_tol`.
pub fn check_uniqueness<T: Real>(
    f: &VectorField<T>,
    p: f64,
    schedule: &CascadeSchedule,
    seeds: (u64, u64),
    rel_tol: f64,
) -> Result<CheckReport> {
    let grid = *f.grid();
    let amp = norms::max_norm(f).max(1e-300);
    let mut init_a = gen::random_solenoidal::<T>(&grid, seeds.0, 0, 2.0);
    let mut init_b = gen::random_solenoidal::<T>(&grid, seeds.1, 0, 2.0);
    // O(forcing) initial spread
    for init in [&mut init_a, &mut init_b] {
        let scale = amp / norms::max_norm(init).max(1e-300);
        init.scale(crate::real::real::<T>(scale));
    }
    let a = cascade_with_init(f, p, schedule, Some(&init_a))?;
    let b = cascade_with_init(f, p, schedule, Some(&init_b))?;
    let ga = spectral::grad_vector(&a.u);
    let mut diff = spectral::grad_vector(&b.u);
    diff.axpy(T::of(-1.0), &ga);
    let rel = norms::lq_norm(&diff, p) / norms::lq_norm(&ga, p).max(1e-300);
    Ok(CheckReport::bound(
        format!("uniqueness[p={p}]"),
        "uniqueness-two-starts",
        "||grad(u_a - u_b)||_p / ||grad u_a||_p <= tol for independent initializations",
        rel,
        rel_tol,
        rel_tol,
        2,
        seeds.0 ^ seeds.1,
    ))
}
