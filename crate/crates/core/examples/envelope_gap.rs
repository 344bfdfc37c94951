//! Compares the envelope allocator with a brute-force grid search on a
//! three-client instance, and reports how much of the gap bound is used.
//!
//! ```bash
//! cargo run --release --example envelope_gap
//! ```

use aoi_noma::allocator::{brute_force_problem7, grid_error_bound, solve_problem8, AllocInstance};

fn main() -> aoi_noma::Result<()> {
    // coefficients w_i Δ_i, scales d^τ r σ², unit budget, r = 1
    let inst = AllocInstance::new(
        vec![0, 1, 2],
        vec![3.0, 2.0, 1.5],
        vec![0.9, 0.3, 0.05],
        1.0,
        1.0,
    )?;

    let sol = solve_problem8(&inst)?;
    println!(
        "solver: {} iterations, residual {:.1e}",
        sol.iterations, sol.residual
    );
    println!("p̂ = {:.4?}", sol.hat_powers);
    println!("raw p = {:.4?}", sol.raw_powers(inst.rate_factor()));
    println!("envelope value {:.6}", sol.envelope_value);
    println!("true value     {:.6}", sol.true_value);

    let step = 1e-2 * inst.budget();
    let grid = brute_force_problem7(&inst, step, true)?;
    let eps = grid_error_bound(&inst, step);
    println!(
        "\ngrid search (step {step}): {:.6} at {:.3?}",
        grid.value, grid.argmax
    );
    println!("grid error bound {eps:.6}");
    println!(
        "envelope - true = {:.6}, bound {:.6} ({:.1}% used)",
        sol.envelope_value - sol.true_value,
        sol.gap_certificate,
        100.0 * (sol.envelope_value - sol.true_value) / sol.gap_certificate
    );
    Ok(())
}
