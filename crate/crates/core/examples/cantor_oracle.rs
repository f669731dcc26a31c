//! The one-dimensional pair Φ(x) = {3x, 3x − 2} and its inverse, compared
//! with their closed forms in exact arithmetic.
//!
//! cargo run --release --example cantor_oracle

use dualfractal::geometry::{DedupPolicy, PointSet};
use dualfractal::macro_fractal::{expand, macro_cantor_oracle};
use dualfractal::micro::{iterate, DEFAULT_BUDGET};
use dualfractal::presets::{cantor_exact_inverse, cantor_micro_oracle, preset, rational};

fn main() -> dualfractal::Result<()> {
    let macro_map = preset("cantor")?.map.to_lattice()?;
    let micro_map = cantor_exact_inverse();
    let zero = PointSet::from_points(DedupPolicy::Exact, [rational(0, 1)]);

    for n in 0..=6 {
        let orbit = expand(&macro_map, n, DEFAULT_BUDGET)?.union();
        let same_macro = orbit.sorted_keys() == macro_cantor_oracle(n)?.sorted_keys();
        let micro = iterate(&micro_map, &zero, n, DEFAULT_BUDGET)?.points;
        let same_micro = micro.sorted_keys() == cantor_micro_oracle(n)?;
        println!(
            "n = {n}: |Φⁿ(Fix)| = {:>3} matches {same_macro},  |Φ⁻ⁿ(0)| = {:>2} matches {same_micro}",
            orbit.len(),
            micro.len()
        );
    }
    let micro = iterate(&micro_map, &zero, 3, DEFAULT_BUDGET)?.points;
    let shown: Vec<String> = micro.sorted_keys().iter().map(|q| q.to_string()).collect();
    println!("Φ⁻³(0) = {{{}}}", shown.join(", "));
    Ok(())
}
